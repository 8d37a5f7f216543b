// What-if comparison: one column per variant, delta rows highlighted.
// Variants are built by cloning the current draft and reassigning tasks.

import { Comparison, ProjectDoc } from "../types.js";
import { compareRows } from "../viewmodel.js";

export interface CompareCallbacks {
  onCloneVariant(reassign: { task: string; site: string }): void;
  onRemoveVariant(index: number): void;
}

export function renderCompareControls(
    root: HTMLElement, draft: ProjectDoc, variants: ProjectDoc[],
    callbacks: CompareCallbacks): void {
  root.innerHTML = "";
  const intro = document.createElement("p");
  intro.textContent =
    "clone the current project, reassign a task, and compare:";
  root.appendChild(intro);

  const taskSelect = document.createElement("select");
  taskSelect.id = "clone-task";
  for (const task of draft.tasks) {
    const option = document.createElement("option");
    option.value = task.id;
    option.textContent = task.name;
    taskSelect.appendChild(option);
  }
  const siteSelect = document.createElement("select");
  siteSelect.id = "clone-site";
  for (const site of draft.sites) {
    const option = document.createElement("option");
    option.value = site.id;
    option.textContent = site.name;
    siteSelect.appendChild(option);
  }
  const button = document.createElement("button");
  button.textContent = "clone with this assignment";
  button.addEventListener("click", () => {
    callbacks.onCloneVariant({
      task: taskSelect.value, site: siteSelect.value });
  });
  root.append(taskSelect, " → ", siteSelect, " ", button);

  if (variants.length > 0) {
    const list = document.createElement("ul");
    list.className = "variant-list";
    variants.forEach((variant, index) => {
      const item = document.createElement("li");
      item.textContent = `${variant.id} `;
      const remove = document.createElement("button");
      remove.textContent = "remove";
      remove.addEventListener("click", () => callbacks.onRemoveVariant(index));
      item.appendChild(remove);
      list.appendChild(item);
    });
    root.appendChild(list);
  }
}

export function renderComparison(root: HTMLElement,
                                 comparison: Comparison): void {
  root.innerHTML = "";
  const table = document.createElement("table");
  table.className = "compare-table";

  const head = document.createElement("tr");
  for (const label of ["rule", "expression", ...comparison.variants]) {
    const cell = document.createElement("th");
    cell.textContent = label;
    head.appendChild(cell);
  }
  table.appendChild(head);

  for (const row of compareRows(comparison)) {
    const element = document.createElement("tr");
    element.dataset.rule = String(row.ruleId);
    if (row.inDelta) element.classList.add("delta");

    const id = document.createElement("td");
    id.textContent = String(row.ruleId);
    element.appendChild(id);
    const expression = document.createElement("td");
    expression.innerHTML = `<code>${row.expression}</code>`;
    element.appendChild(expression);
    for (const cell of row.cells) {
      const value = document.createElement("td");
      value.textContent = cell.text + (cell.reported ? " *" : "");
      if (cell.reported) value.classList.add("reported");
      element.appendChild(value);
    }
    table.appendChild(element);
  }
  root.appendChild(table);

  const legend = document.createElement("p");
  legend.className = "legend";
  legend.textContent =
    "* reported at the threshold; highlighted rows change status between variants";
  root.appendChild(legend);
}
