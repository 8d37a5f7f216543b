// Retrospective flow: after a project finishes, mark each reported rule
// confirmed or refuted (plus a known-at-start flag and note) and file the
// events against the KB version the assessment used.

import { Report, RulesResponse } from "../types.js";
import {
  RetroSelection,
  canSubmitRetro,
  reportedRuleIds,
  retroEvents,
} from "../viewmodel.js";

export interface RetroCallbacks {
  onSubmit(events: ReturnType<typeof retroEvents>): void;
}

export function renderRetrospective(
    root: HTMLElement, report: Report, rules: RulesResponse,
    callbacks: RetroCallbacks, conflict: boolean = false): void {
  root.innerHTML = "";

  if (conflict) {
    const banner = document.createElement("div");
    banner.className = "conflict-banner";
    banner.textContent =
      "the knowledge base changed under you; reload and review again";
    const reload = document.createElement("button");
    reload.textContent = "reload";
    reload.addEventListener("click", () => window.location.reload());
    banner.appendChild(reload);
    root.appendChild(banner);
  }

  const ids = reportedRuleIds(report);
  if (ids.length === 0) {
    root.append("no reported rules to review");
    return;
  }

  const selections = new Map<number, RetroSelection>();
  const rows: HTMLElement[] = [];
  const submit = document.createElement("button");
  submit.id = "retro-submit";
  submit.textContent = "file retrospective";
  submit.disabled = true;

  const sync = () => {
    submit.disabled = !canSubmitRetro([...selections.values()]);
  };

  for (const ruleId of ids) {
    const rule = rules.rules.find((r) => r.id === ruleId);
    const row = document.createElement("div");
    row.className = "retro-row";
    row.dataset.rule = String(ruleId);

    const title = document.createElement("strong");
    title.textContent = `rule ${ruleId}`;
    title.title = rule?.description ?? "";
    row.appendChild(title);

    const note = document.createElement("input");
    note.type = "text";
    note.placeholder = "note";

    const known = document.createElement("input");
    known.type = "checkbox";
    known.title = "known at project start";

    for (const outcome of ["confirmed", "refuted"] as const) {
      const label = document.createElement("label");
      const radio = document.createElement("input");
      radio.type = "radio";
      radio.name = `outcome-${ruleId}`;
      radio.value = outcome;
      radio.addEventListener("change", () => {
        selections.set(ruleId, {
          ruleId, outcome, knownAtStart: known.checked, note: note.value });
        sync();
      });
      label.append(radio, ` ${outcome} `);
      row.appendChild(label);
    }
    known.addEventListener("change", () => {
      const current = selections.get(ruleId);
      if (current) current.knownAtStart = known.checked;
    });
    note.addEventListener("input", () => {
      const current = selections.get(ruleId);
      if (current) current.note = note.value;
    });

    const knownLabel = document.createElement("label");
    knownLabel.append(known, " known at start ");
    row.append(knownLabel, note);
    rows.push(row);
  }

  rows.forEach((row) => root.appendChild(row));
  submit.addEventListener("click", () => {
    callbacks.onSubmit(
      retroEvents([...selections.values()], report.kb_version));
  });
  root.appendChild(submit);
}
