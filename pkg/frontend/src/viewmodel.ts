// Pure view-model builders.  All list orderings shown in the UI come
// straight from the service response; nothing here re-ranks or computes
// relevance.

import {
  Comparison,
  FactorInfo,
  FactorsResponse,
  KbEvent,
  LEVELS,
  Level,
  ProjectDoc,
  Report,
  RiskRollup,
  ScopeName,
} from "./types.js";

// ------------------------------------------------------------- dashboard

export interface RuleCard {
  ruleId: number;
  relevance: string;
  expression: string;
  effects: { sign: "+" | "-"; risk: string }[];
  description: string;
  contextLabel: string;
}

export interface IndeterminateItem {
  ruleId: number;
  missing: string[];
  contextLabel: string;
  task: string;
  site: string;
}

export function contextLabel(context: { task: string; site: string }): string {
  return `${context.task} @ ${context.site}`;
}

function splitEffect(effect: string): { sign: "+" | "-"; risk: string } {
  const sign = effect.trim().startsWith("-") ? "-" : "+";
  return { sign, risk: effect.replace(/^[+-]\s*/, "") };
}

/** Ranked cards in exactly the service's order: context by context,
 *  each context's ranking verbatim. */
export function dashboardCards(report: Report): RuleCard[] {
  const cards: RuleCard[] = [];
  for (const context of report.contexts) {
    for (const entry of context.ranked) {
      cards.push({
        ruleId: entry.rule,
        relevance: entry.relevance,
        expression: entry.expression,
        effects: entry.effects.map(splitEffect),
        description: entry.description,
        contextLabel: contextLabel(context),
      });
    }
  }
  return cards;
}

export function indeterminatePanel(report: Report): IndeterminateItem[] {
  const items: IndeterminateItem[] = [];
  for (const context of report.contexts) {
    for (const entry of context.indeterminate) {
      items.push({
        ruleId: entry.rule,
        missing: entry.missing ?? [],
        contextLabel: contextLabel(context),
        task: context.task,
        site: context.site,
      });
    }
  }
  return items;
}

export function riskRollup(report: Report): RiskRollup[] {
  return report.risks;
}

/** Rule ids relevant for a retrospective: every reported rule, once. */
export function reportedRuleIds(report: Report): number[] {
  const seen = new Set<number>();
  const ids: number[] = [];
  for (const context of report.contexts) {
    for (const entry of context.ranked) {
      if (!seen.has(entry.rule)) {
        seen.add(entry.rule);
        ids.push(entry.rule);
      }
    }
  }
  return ids;
}

// ------------------------------------------------------------------ form

export interface FormSlot {
  scope: ScopeName;
  /** site id, task id, or pair key; null for project scope */
  ownerId: string | null;
  ownerLabel: string;
  factor: FactorInfo;
  value: string | null;
  /** stable DOM id, also the anchor for missing-factor links */
  inputId: string;
}

export function pairKeyOf(a: string, b: string): string {
  return a <= b ? `${a}+${b}` : `${b}+${a}`;
}

function assessable(factor: FactorInfo): boolean {
  return !factor.derived;
}

export function slotInputId(scope: ScopeName, ownerId: string | null,
                            factorId: string): string {
  return `slot-${scope}-${ownerId ?? "all"}-${factorId}`;
}

/** Every assessable factor instance for the project's structure:
 *  project factors once, site and relationship factors per remote site,
 *  task factors per task. */
export function formSlots(project: ProjectDoc,
                          factors: FactorsResponse): FormSlot[] {
  const slots: FormSlot[] = [];
  const remotes = project.sites.filter(
    (site) => site.id !== project.coordinating_site);

  for (const group of factors.groups) {
    for (const factor of group.factors) {
      if (!assessable(factor)) continue;
      if (group.scope === "project") {
        slots.push({
          scope: "project",
          ownerId: null,
          ownerLabel: "whole project",
          factor,
          value: project.bindings.project[factor.id] ?? null,
          inputId: slotInputId("project", null, factor.id),
        });
      } else if (group.scope === "site") {
        for (const site of remotes) {
          slots.push({
            scope: "site",
            ownerId: site.id,
            ownerLabel: site.name,
            factor,
            value: project.bindings.site[site.id]?.[factor.id] ?? null,
            inputId: slotInputId("site", site.id, factor.id),
          });
        }
      } else if (group.scope === "task") {
        for (const task of project.tasks) {
          slots.push({
            scope: "task",
            ownerId: task.id,
            ownerLabel: task.name,
            factor,
            value: project.bindings.task[task.id]?.[factor.id] ?? null,
            inputId: slotInputId("task", task.id, factor.id),
          });
        }
      } else {
        for (const site of remotes) {
          const key = pairKeyOf(project.coordinating_site, site.id);
          slots.push({
            scope: "relationship",
            ownerId: key,
            ownerLabel: `${project.coordinating_site} ↔ ${site.id}`,
            factor,
            value: project.bindings.pair[key]?.[factor.id] ?? null,
            inputId: slotInputId("relationship", key, factor.id),
          });
        }
      }
    }
  }
  return slots;
}

/** Exact form completeness: 1 - unbound / total (assessable slots). */
export function completeness(project: ProjectDoc,
                             factors: FactorsResponse): number {
  const slots = formSlots(project, factors);
  if (slots.length === 0) return 1;
  const unbound = slots.filter((slot) => slot.value === null).length;
  return 1 - unbound / slots.length;
}

/** Applies one form edit, returning a new project document.  Unsetting
 *  removes the entry (and any then-empty per-owner holder) so the value
 *  is submitted as absent. */
export function withSlotValue(project: ProjectDoc, slot: FormSlot,
                              value: string | null): ProjectDoc {
  const next: ProjectDoc = JSON.parse(JSON.stringify(project));
  let binding: Record<string, string>;
  let holder: Record<string, Record<string, string>> | null = null;
  if (slot.scope === "project") {
    binding = next.bindings.project;
  } else {
    holder = slot.scope === "site" ? next.bindings.site
      : slot.scope === "task" ? next.bindings.task
      : next.bindings.pair;
    binding = holder[slot.ownerId!] ??= {};
  }
  if (value === null) {
    delete binding[slot.factor.id];
    if (holder && Object.keys(binding).length === 0) {
      delete holder[slot.ownerId!];
    }
  } else {
    binding[slot.factor.id] = value;
  }
  return next;
}

export function selectorOptions(factor: FactorInfo): string[] {
  return factor.kind === "enum" ? factor.values ?? [] : LEVELS;
}

// --------------------------------------------------------------- compare

export interface CompareCell {
  text: string;
  reported: boolean;
}

export interface CompareRow {
  ruleId: number;
  expression: string;
  cells: CompareCell[];
  inDelta: boolean;
}

export function compareRows(comparison: Comparison): CompareRow[] {
  return comparison.rules.map((row) => ({
    ruleId: row.rule,
    expression: row.expression,
    cells: row.relevance.map((value, index) => ({
      text: value ?? "-",
      reported: row.reported[index],
    })),
    inDelta: comparison.delta.includes(row.rule),
  }));
}

export function highlightedRules(comparison: Comparison): number[] {
  return compareRows(comparison)
    .filter((row) => row.inDelta)
    .map((row) => row.ruleId);
}

/** Clone a variant, optionally reassigning one task to another site. */
export function cloneVariant(project: ProjectDoc, newId: string,
                             reassign?: { task: string; site: string }):
    ProjectDoc {
  const clone: ProjectDoc = JSON.parse(JSON.stringify(project));
  clone.id = newId;
  if (reassign) {
    clone.assignments[reassign.task] = reassign.site;
  }
  return clone;
}

// --------------------------------------------------------- retrospective

export interface RetroSelection {
  ruleId: number;
  outcome: "confirmed" | "refuted";
  knownAtStart: boolean;
  note: string;
}

export function canSubmitRetro(selections: RetroSelection[]): boolean {
  return selections.length > 0;
}

/** One KB event per selection, each echoing the version it was based on. */
export function retroEvents(selections: RetroSelection[],
                            kbVersion: number): KbEvent[] {
  return selections.map((selection) => ({
    kb_version: kbVersion,
    kind: selection.outcome === "confirmed" ? "confirm" : "refute",
    target: String(selection.ruleId),
    note: [
      selection.knownAtStart ? "known at project start" : "not known at start",
      selection.note,
    ].filter(Boolean).join("; "),
  }));
}

// ------------------------------------------------------------- threshold

export function levelAtLeast(value: string, threshold: Level): boolean {
  const index = LEVELS.indexOf(value as Level);
  return index >= 0 && index >= LEVELS.indexOf(threshold);
}

export function thresholdOptions(): Level[] {
  return [...LEVELS];
}

// ------------------------------------------------------------- indeterminate

/** The DOM anchor a missing-factor link should focus, given the factor's
 *  scope and the context the indeterminate entry came from. */
export function missingFactorAnchor(
    factorId: string, factors: FactorsResponse, project: ProjectDoc,
    context: { task: string; site: string }): string | null {
  for (const group of factors.groups) {
    const factor = group.factors.find((f) => f.id === factorId);
    if (!factor) continue;
    if (factor.derived) return null;
    switch (group.scope) {
      case "project":
        return slotInputId("project", null, factorId);
      case "site":
        return slotInputId("site", context.site, factorId);
      case "task":
        return slotInputId("task", context.task, factorId);
      case "relationship":
        return slotInputId(
          "relationship",
          pairKeyOf(project.coordinating_site, context.site), factorId);
    }
  }
  return null;
}
