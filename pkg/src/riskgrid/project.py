"""Distributed-project model: sites, tasks, assignments, scoped bindings.

A project assessment binds factor values at four scopes: once for the
whole project, per remote site, per task, and per unordered pair of
collaborating sites.  Evaluating rules for one assignment (task -> site)
merges those scopes into a single binding: project factors from the
project scope, site factors from the remote site, task factors from the
task, and relationship factors from the pair {remote, counterpart},
where the counterpart defaults to the coordinating site.

The site-count factor is structural: it is derived from the distinct
sites appearing in assignments plus the coordinating site, through a
configurable count-to-scale mapping, and must not be bound by hand.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import FactorCatalog, Scope
from .engine import (
    EvalMode,
    EvalTypeError,
    Indeterminate,
    Ranking,
    Relevance,
    RuleRelevance,
    evaluate_rules,
    rank_and_filter,
    validate_binding,
)
from .rules import Rulebase, resolve_effects
from .scale import ScaleLevel

#: Factor auto-bound from the assignment structure.
SITE_COUNT_FACTOR = "number_of_involved_sites"

#: Default count -> level mapping; entries are minimum counts, the last
#: one extends upward (>= 6 reads very_high) and counts below the first
#: entry clamp down to it.
DEFAULT_SITE_COUNT_SCALE: tuple[tuple[int, ScaleLevel], ...] = (
    (2, ScaleLevel.VERY_LOW),
    (3, ScaleLevel.LOW),
    (4, ScaleLevel.MEDIUM),
    (5, ScaleLevel.HIGH),
    (6, ScaleLevel.VERY_HIGH),
)


class ProjectError(ValueError):
    """Aggregated project validation problems."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__(
            "invalid project:\n" + "\n".join(f"  {p}" for p in self.problems))


def pair_key(site_a: str, site_b: str) -> tuple[str, str]:
    """Canonical unordered-pair key (lexicographically sorted)."""
    return (site_a, site_b) if site_a <= site_b else (site_b, site_a)


def site_count_level(count: int,
                     scale: tuple[tuple[int, ScaleLevel], ...]) -> ScaleLevel:
    level = scale[0][1]
    for minimum, candidate in scale:
        if count >= minimum:
            level = candidate
    return level


@dataclass(frozen=True)
class Site:
    site_id: str
    name: str


@dataclass(frozen=True)
class Task:
    task_id: str
    name: str


@dataclass(frozen=True)
class ProjectAssessment:
    project_id: str
    coordinating_site_id: str
    sites: tuple[Site, ...]
    tasks: tuple[Task, ...]
    assignments: dict[str, str]
    project_binding: dict[str, object] = field(default_factory=dict)
    site_bindings: dict[str, dict[str, object]] = field(default_factory=dict)
    task_bindings: dict[str, dict[str, object]] = field(default_factory=dict)
    pair_bindings: dict[tuple[str, str], dict[str, object]] = field(
        default_factory=dict)
    site_count_scale: tuple[tuple[int, ScaleLevel], ...] = DEFAULT_SITE_COUNT_SCALE

    def site_ids(self) -> tuple[str, ...]:
        return tuple(s.site_id for s in self.sites)

    def task_ids(self) -> tuple[str, ...]:
        return tuple(t.task_id for t in self.tasks)

    def involved_site_count(self) -> int:
        involved = set(self.assignments.values())
        involved.add(self.coordinating_site_id)
        return len(involved)


def validate_project(project: ProjectAssessment,
                     factors: FactorCatalog) -> list[str]:
    """Structural and scope problems; empty list means valid."""
    problems: list[str] = []
    site_ids = set()
    for site in project.sites:
        if site.site_id in site_ids:
            problems.append(f"duplicate site id {site.site_id!r}")
        site_ids.add(site.site_id)
    task_ids = set()
    for task in project.tasks:
        if task.task_id in task_ids:
            problems.append(f"duplicate task id {task.task_id!r}")
        task_ids.add(task.task_id)

    if project.coordinating_site_id not in site_ids:
        problems.append(
            f"coordinating site {project.coordinating_site_id!r} is not declared")

    for task_id, site_id in project.assignments.items():
        if task_id not in task_ids:
            problems.append(f"assignment references unknown task {task_id!r}")
        if site_id not in site_ids:
            problems.append(f"assignment references unknown site {site_id!r}")

    scoped = [
        ("bindings.project", Scope.PROJECT, project.project_binding),
    ]
    for site_id, binding in sorted(project.site_bindings.items()):
        if site_id not in site_ids:
            problems.append(f"bindings.site.{site_id}: unknown site {site_id!r}")
        scoped.append((f"bindings.site.{site_id}", Scope.SITE, binding))
    for task_id, binding in sorted(project.task_bindings.items()):
        if task_id not in task_ids:
            problems.append(f"bindings.task.{task_id}: unknown task {task_id!r}")
        scoped.append((f"bindings.task.{task_id}", Scope.TASK, binding))
    for pair, binding in sorted(project.pair_bindings.items()):
        label = f"bindings.pair.{pair[0]}+{pair[1]}"
        site_a, site_b = pair
        if site_a == site_b:
            problems.append(f"{label}: pair sites must be distinct")
        for site_id in pair:
            if site_id not in site_ids:
                problems.append(f"{label}: unknown site {site_id!r}")
        if pair != pair_key(site_a, site_b):
            problems.append(f"{label}: pair key must be sorted")
        scoped.append((label, Scope.RELATIONSHIP, binding))

    for label, scope, binding in scoped:
        for problem in validate_binding(factors, binding):
            problems.append(f"{label}: {problem}")
        for factor_id in binding:
            if factor_id not in factors:
                continue
            declared = factors.get(factor_id).scope
            if declared != scope:
                problems.append(
                    f"{label}: factor {factor_id!r} has scope "
                    f"{declared}, not {scope}")
        if SITE_COUNT_FACTOR in binding:
            problems.append(
                f"{label}: {SITE_COUNT_FACTOR!r} is derived from the "
                f"assignments; configure site_count_scale instead of "
                f"binding it")
    return problems


# ------------------------------------------------------------- resolution


@dataclass(frozen=True)
class EvaluationContext:
    """One (task, remote site, counterpart) evaluation point."""

    task_id: str
    remote_site_id: str
    counterpart_site_id: str
    binding: dict[str, object]

    @property
    def label(self) -> str:
        return (f"task={self.task_id} site={self.remote_site_id} "
                f"counterpart={self.counterpart_site_id}")


def resolve_binding(project: ProjectAssessment, task_id: str,
                    remote_site_id: str, factors: FactorCatalog,
                    counterpart_site_id: str | None = None) -> dict[str, object]:
    """Merge the four scopes into the flat binding for one context."""
    if task_id not in project.task_ids():
        raise ProjectError([f"unknown task {task_id!r}"])
    if remote_site_id not in project.site_ids():
        raise ProjectError([f"unknown site {remote_site_id!r}"])
    if project.assignments.get(task_id) != remote_site_id:
        raise ProjectError(
            [f"task {task_id!r} is not assigned to site {remote_site_id!r}"])
    counterpart = counterpart_site_id or project.coordinating_site_id

    binding: dict[str, object] = {}
    binding.update(project.project_binding)
    binding.update(project.site_bindings.get(remote_site_id, {}))
    binding.update(project.task_bindings.get(task_id, {}))
    if counterpart != remote_site_id:
        pair = pair_key(remote_site_id, counterpart)
        binding.update(project.pair_bindings.get(pair, {}))

    if SITE_COUNT_FACTOR in factors:
        factor = factors.get(SITE_COUNT_FACTOR)
        if factor.scope == Scope.PROJECT and not factor.is_enum:
            binding[SITE_COUNT_FACTOR] = site_count_level(
                project.involved_site_count(), project.site_count_scale)
    return binding


def build_contexts(project: ProjectAssessment,
                   factors: FactorCatalog) -> tuple[EvaluationContext, ...]:
    """One context per assignment, in task declaration order."""
    contexts: list[EvaluationContext] = []
    for task in project.tasks:
        site_id = project.assignments.get(task.task_id)
        if site_id is None:
            continue
        binding = resolve_binding(project, task.task_id, site_id, factors)
        contexts.append(EvaluationContext(
            task_id=task.task_id,
            remote_site_id=site_id,
            counterpart_site_id=project.coordinating_site_id,
            binding=binding,
        ))
    return tuple(contexts)


# -------------------------------------------------------------- assessment


@dataclass(frozen=True)
class ContextResult:
    context: EvaluationContext
    #: Every active rule's relevance, in rule-id order.
    relevances: tuple[RuleRelevance, ...]
    #: Threshold-filtered view of the same.
    ranking: Ranking


@dataclass(frozen=True)
class RiskSummaryEntry:
    """Reported rules touching one risk, split by effect polarity."""

    risk_id: str
    increasing: tuple[tuple[int, ScaleLevel], ...]
    mitigating: tuple[tuple[int, ScaleLevel], ...]


@dataclass(frozen=True)
class ScenarioReport:
    project_id: str
    threshold: ScaleLevel
    mode: EvalMode
    contexts: tuple[ContextResult, ...]
    risk_summary: tuple[RiskSummaryEntry, ...]


def assess_project(project: ProjectAssessment, rulebase: Rulebase,
                   threshold: ScaleLevel = ScaleLevel.HIGH,
                   mode: EvalMode = EvalMode.STRICT) -> ScenarioReport:
    """Evaluate and rank every rule for every assignment of the project."""
    problems = validate_project(project, rulebase.factors)
    if problems:
        raise ProjectError(problems)

    results: list[ContextResult] = []
    for context in build_contexts(project, rulebase.factors):
        try:
            relevances = evaluate_rules(rulebase, context.binding, mode)
        except EvalTypeError as exc:
            raise EvalTypeError(f"context {context.label}: {exc}") from None
        results.append(ContextResult(
            context, relevances, rank_and_filter(relevances, threshold)))

    return ScenarioReport(
        project_id=project.project_id,
        threshold=threshold,
        mode=mode,
        contexts=tuple(results),
        risk_summary=_summarize_risks(results, rulebase),
    )


def _summarize_risks(results: list[ContextResult],
                     rulebase: Rulebase) -> tuple[RiskSummaryEntry, ...]:
    """Group reported rules per risk, keeping each rule's best relevance."""
    increasing: dict[str, dict[int, ScaleLevel]] = {}
    mitigating: dict[str, dict[int, ScaleLevel]] = {}
    for result in results:
        for entry in result.ranking.ranked:
            for effect in resolve_effects(entry.effects, rulebase.risks):
                bucket = increasing if effect.increases else mitigating
                per_rule = bucket.setdefault(effect.risk_id, {})
                level = entry.relevance
                if entry.rule_id not in per_rule or per_rule[entry.rule_id] < level:
                    per_rule[entry.rule_id] = level

    summary: list[RiskSummaryEntry] = []
    for risk in rulebase.risks:
        inc = increasing.get(risk.risk_id, {})
        mit = mitigating.get(risk.risk_id, {})
        if not inc and not mit:
            continue
        summary.append(RiskSummaryEntry(
            risk_id=risk.risk_id,
            increasing=_sorted_rule_levels(inc),
            mitigating=_sorted_rule_levels(mit),
        ))
    return tuple(summary)


def _sorted_rule_levels(
        per_rule: dict[int, ScaleLevel]) -> tuple[tuple[int, ScaleLevel], ...]:
    return tuple(sorted(per_rule.items(), key=lambda kv: (-int(kv[1]), kv[0])))


# -------------------------------------------------------------- comparison


@dataclass(frozen=True)
class RuleComparisonRow:
    rule_id: int
    relevance: tuple[Relevance | None, ...]  # one entry per variant
    reported: tuple[bool, ...]


@dataclass(frozen=True)
class RiskComparisonRow:
    risk_id: str
    increasing: tuple[ScaleLevel | None, ...]
    mitigating: tuple[ScaleLevel | None, ...]


@dataclass(frozen=True)
class ScenarioComparison:
    labels: tuple[str, ...]
    threshold: ScaleLevel
    mode: EvalMode
    rule_rows: tuple[RuleComparisonRow, ...]
    risk_rows: tuple[RiskComparisonRow, ...]
    #: Rule ids whose reported/filtered status differs between variants.
    delta: tuple[int, ...]


def compare_scenarios(variants: list[ProjectAssessment], rulebase: Rulebase,
                      threshold: ScaleLevel = ScaleLevel.HIGH,
                      mode: EvalMode = EvalMode.STRICT) -> ScenarioComparison:
    """Side-by-side rule and risk relevance across allocation variants.

    Within one variant a rule's value is its best (highest) relevance
    over all contexts, the risk-conservative aggregate.
    """
    if len(variants) < 2:
        raise ProjectError(["comparison needs at least 2 project variants"])
    task_sets = [frozenset(v.task_ids()) for v in variants]
    for i, tasks in enumerate(task_sets[1:], start=1):
        if tasks != task_sets[0]:
            missing = sorted(task_sets[0] - tasks)
            extra = sorted(tasks - task_sets[0])
            detail = []
            if missing:
                detail.append(f"missing tasks: {', '.join(missing)}")
            if extra:
                detail.append(f"extra tasks: {', '.join(extra)}")
            raise ProjectError(
                [f"variant {variants[i].project_id!r} does not share the "
                 f"task set of {variants[0].project_id!r} "
                 f"({'; '.join(detail)})"])

    reports = [assess_project(v, rulebase, threshold, mode) for v in variants]
    labels = tuple(v.project_id for v in variants)

    rule_rows: list[RuleComparisonRow] = []
    for rule in sorted(rulebase.active_rules, key=lambda r: r.rule_id):
        per_variant: list[Relevance | None] = []
        reported: list[bool] = []
        for report in reports:
            per_variant.append(_aggregate_rule(report, rule.rule_id))
            reported.append(any(
                entry.rule_id == rule.rule_id
                for result in report.contexts
                for entry in result.ranking.ranked))
        rule_rows.append(RuleComparisonRow(
            rule.rule_id, tuple(per_variant), tuple(reported)))

    risk_rows: list[RiskComparisonRow] = []
    for risk in rulebase.risks:
        inc: list[ScaleLevel | None] = []
        mit: list[ScaleLevel | None] = []
        for report in reports:
            entry = next((e for e in report.risk_summary
                          if e.risk_id == risk.risk_id), None)
            inc.append(max((lvl for _, lvl in entry.increasing), default=None)
                       if entry else None)
            mit.append(max((lvl for _, lvl in entry.mitigating), default=None)
                       if entry else None)
        if any(v is not None for v in inc + mit):
            risk_rows.append(RiskComparisonRow(risk.risk_id, tuple(inc),
                                               tuple(mit)))

    delta = tuple(row.rule_id for row in rule_rows
                  if len(set(row.reported)) > 1)
    return ScenarioComparison(
        labels=labels,
        threshold=threshold,
        mode=mode,
        rule_rows=tuple(rule_rows),
        risk_rows=tuple(risk_rows),
        delta=delta,
    )


def _aggregate_rule(report: ScenarioReport, rule_id: int) -> Relevance | None:
    """Best relevance across contexts; indeterminate only if never determinate.

    None means the variant had no contexts at all.
    """
    best: ScaleLevel | None = None
    missing: set[str] = set()
    saw_indeterminate = False
    for result in report.contexts:
        for entry in result.relevances:
            if entry.rule_id != rule_id:
                continue
            if isinstance(entry.relevance, Indeterminate):
                saw_indeterminate = True
                missing |= entry.relevance.missing
            elif best is None or entry.relevance > best:
                best = entry.relevance
    if best is not None:
        return best
    if saw_indeterminate:
        return Indeterminate(frozenset(missing))
    return None
