// Ranked risk dashboard: rule cards in the service's order, an
// indeterminate panel with missing-factor links, and a per-risk rollup.

import { FactorsResponse, ProjectDoc, Report } from "../types.js";
import {
  dashboardCards,
  indeterminatePanel,
  missingFactorAnchor,
  riskRollup,
} from "../viewmodel.js";

export interface DashboardCallbacks {
  onFocusFactor(inputId: string): void;
}

export function renderDashboard(
    root: HTMLElement, report: Report, project: ProjectDoc,
    factors: FactorsResponse, callbacks: DashboardCallbacks): void {
  root.innerHTML = "";

  const heading = document.createElement("h2");
  heading.textContent =
    `reported rules (relevance ≥ ${report.threshold})`;
  root.appendChild(heading);

  const cards = dashboardCards(report);
  if (cards.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "no rules at or above the threshold";
    root.appendChild(empty);
  }
  for (const card of cards) {
    const element = document.createElement("article");
    element.className = "rule-card";
    element.dataset.rule = String(card.ruleId);

    const badge = document.createElement("span");
    badge.className = `badge badge-${card.relevance}`;
    badge.textContent = card.relevance;
    element.appendChild(badge);

    const title = document.createElement("h3");
    title.textContent = `rule ${card.ruleId} · ${card.contextLabel}`;
    element.appendChild(title);

    const expression = document.createElement("code");
    expression.textContent = card.expression;
    element.appendChild(expression);

    const effects = document.createElement("ul");
    effects.className = "effects";
    for (const effect of card.effects) {
      const item = document.createElement("li");
      item.className = effect.sign === "+" ? "increases" : "mitigates";
      item.textContent =
        `${effect.sign === "+" ? "increases" : "mitigates"} ${effect.risk}`;
      effects.appendChild(item);
    }
    element.appendChild(effects);

    const description = document.createElement("p");
    description.textContent = card.description;
    element.appendChild(description);

    root.appendChild(element);
  }

  const items = indeterminatePanel(report);
  if (items.length > 0) {
    const panel = document.createElement("section");
    panel.className = "indeterminate-panel";
    const title = document.createElement("h2");
    title.textContent = `indeterminate rules (${items.length})`;
    panel.appendChild(title);
    const list = document.createElement("ul");
    for (const item of items) {
      const row = document.createElement("li");
      row.append(`rule ${item.ruleId} (${item.contextLabel}) missing: `);
      for (const factorId of item.missing) {
        const link = document.createElement("a");
        link.href = "#";
        link.textContent = factorId;
        link.addEventListener("click", (event) => {
          event.preventDefault();
          const anchor = missingFactorAnchor(
            factorId, factors, project, { task: item.task, site: item.site });
          if (anchor) callbacks.onFocusFactor(anchor);
        });
        row.appendChild(link);
        row.append(" ");
      }
      list.appendChild(row);
    }
    panel.appendChild(list);
    root.appendChild(panel);
  }

  const risks = riskRollup(report);
  if (risks.length > 0) {
    const section = document.createElement("section");
    section.className = "risk-rollup";
    const title = document.createElement("h2");
    title.textContent = "per-risk view";
    section.appendChild(title);
    for (const risk of risks) {
      const row = document.createElement("div");
      row.className = "risk-row";
      const name = document.createElement("strong");
      name.textContent = risk.name;
      name.title = risk.impact;
      row.appendChild(name);
      const detail = document.createElement("span");
      const parts: string[] = [];
      if (risk.increasing.length > 0) {
        parts.push("increased by " + risk.increasing
          .map((e) => `rule ${e.rule} (${e.relevance})`).join(", "));
      }
      if (risk.mitigating.length > 0) {
        parts.push("mitigated by " + risk.mitigating
          .map((e) => `rule ${e.rule} (${e.relevance})`).join(", "));
      }
      detail.textContent = " " + parts.join("; ");
      row.appendChild(detail);
      section.appendChild(row);
    }
    root.appendChild(section);
  }
}
