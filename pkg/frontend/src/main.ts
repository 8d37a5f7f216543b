// Page wiring: draft project state, debounced re-assessment with
// cancel-and-replace, and the four views (assess, dashboard, compare,
// retrospective).

import { ApiClient } from "./api.js";
import { renderAssessmentForm } from "./components/assessmentForm.js";
import { renderDashboard } from "./components/dashboard.js";
import {
  renderCompareControls,
  renderComparison,
} from "./components/compareView.js";
import { renderRetrospective } from "./components/retrospective.js";
import { createStore, debounce } from "./store.js";
import {
  ApiError,
  FactorsResponse,
  Level,
  ProjectDoc,
  Report,
  RulesResponse,
} from "./types.js";
import { cloneVariant, thresholdOptions } from "./viewmodel.js";

interface AppState {
  project: ProjectDoc;
  report: Report | null;
  threshold: Level;
  variants: ProjectDoc[];
  retroConflict: boolean;
  error: string | null;
}

const api = new ApiClient();

function blankProject(): ProjectDoc {
  return {
    id: "draft",
    coordinating_site: "hq",
    sites: [
      { id: "hq", name: "Headquarters" },
      { id: "remote", name: "Remote site" },
    ],
    tasks: [{ id: "t1", name: "Task 1" }],
    assignments: { t1: "remote" },
    bindings: { project: {}, site: {}, task: {}, pair: {} },
  };
}

async function boot(): Promise<void> {
  const formRoot = document.getElementById("assessment-form")!;
  const dashboardRoot = document.getElementById("dashboard")!;
  const compareControlsRoot = document.getElementById("compare-controls")!;
  const comparisonRoot = document.getElementById("comparison")!;
  const retroRoot = document.getElementById("retrospective")!;
  const thresholdSelect =
    document.getElementById("threshold") as HTMLSelectElement;
  const errorBar = document.getElementById("error-bar")!;

  const factors: FactorsResponse = await api.getFactors();
  const rules: RulesResponse = await api.getRules();

  const store = createStore<AppState>({
    project: blankProject(),
    report: null,
    threshold: "high",
    variants: [],
    retroConflict: false,
    error: null,
  });

  for (const level of thresholdOptions()) {
    const option = document.createElement("option");
    option.value = level;
    option.textContent = level;
    if (level === "high") option.selected = true;
    thresholdSelect.appendChild(option);
  }
  thresholdSelect.addEventListener("change", () => {
    store.set({ threshold: thresholdSelect.value as Level });
    requestAssessment();
  });

  // in-flight assessment requests are cancel-and-replace
  let inflight: AbortController | null = null;
  async function runAssessment(): Promise<void> {
    inflight?.abort();
    inflight = new AbortController();
    const { project, threshold } = store.get();
    try {
      const response = await api.assess(project, threshold, "strict",
                                        inflight.signal);
      store.set({ report: response.report, error: null });
    } catch (error) {
      if (error instanceof DOMException && error.name === "AbortError") return;
      const message = error instanceof ApiError
        ? error.body.errors.map((e) => e.message).join("; ")
        : String(error);
      store.set({ error: message });
    }
  }
  const requestAssessment = debounce(runAssessment, 250);

  async function runComparison(): Promise<void> {
    const { project, variants, threshold } = store.get();
    if (variants.length === 0) {
      comparisonRoot.innerHTML = "";
      return;
    }
    try {
      const response = await api.compare([project, ...variants], threshold,
                                         "strict");
      renderComparison(comparisonRoot, response.comparison);
    } catch (error) {
      const message = error instanceof ApiError
        ? error.body.errors.map((e) => e.message).join("; ")
        : String(error);
      store.set({ error: message });
    }
  }

  function render(state: AppState): void {
    errorBar.textContent = state.error ?? "";
    errorBar.hidden = !state.error;

    renderAssessmentForm(formRoot, state.project, factors, {
      onChange(project) {
        store.set({ project });
        requestAssessment();
      },
    });

    if (state.report) {
      renderDashboard(dashboardRoot, state.report, state.project, factors, {
        onFocusFactor(inputId) {
          const input = document.getElementById(inputId);
          input?.scrollIntoView({ block: "center" });
          input?.focus();
        },
      });
      renderRetrospective(retroRoot, state.report, rules, {
        async onSubmit(events) {
          try {
            for (const event of events) {
              await api.postEvent(event);
            }
            store.set({ retroConflict: false });
            await runAssessment();
          } catch (error) {
            if (error instanceof ApiError && error.isConflict) {
              store.set({ retroConflict: true });
            } else {
              store.set({ error: String(error) });
            }
          }
        },
      }, state.retroConflict);
    }

    renderCompareControls(compareControlsRoot, state.project, state.variants, {
      onCloneVariant(reassign) {
        const variant = cloneVariant(
          state.project, `${state.project.id}-v${state.variants.length + 1}`,
          reassign);
        store.set({ variants: [...state.variants, variant] });
        void runComparison();
      },
      onRemoveVariant(index) {
        const variants = state.variants.filter((_, i) => i !== index);
        store.set({ variants });
        void runComparison();
      },
    });
  }

  store.subscribe(render);
  render(store.get());
  await runAssessment();
}

boot().catch((error) => {
  const bar = document.getElementById("error-bar");
  if (bar) {
    bar.hidden = false;
    bar.textContent = `failed to reach the service: ${error}`;
  }
});
