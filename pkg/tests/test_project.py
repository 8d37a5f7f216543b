import random

import pytest

from riskgrid.engine import EvalMode
from riskgrid.parser import parse_rulebase
from riskgrid.project import (
    DEFAULT_SITE_COUNT_SCALE,
    ProjectAssessment,
    ProjectError,
    Site,
    Task,
    assess_project,
    build_contexts,
    compare_scenarios,
    pair_key,
    resolve_binding,
    site_count_level,
    validate_project,
)
from riskgrid.scale import ScaleLevel

from oracles import oracle_resolve

L = ScaleLevel

CATALOG_DOC = (
    'factor cultural_difference scope=relationship name="Cultural difference"\n'
    'factor transparency scope=site name="Transparency"\n'
    'factor complexity scope=task name="Complexity"\n'
    'factor time_pressure scope=project name="Time pressure"\n'
    'factor number_of_involved_sites scope=project name="Number of involved sites"\n'
    'risk r name="R"\n'
    "rule 1: cultural_difference -> + r\n"
    "rule 2: transparency -> - r\n"
    "rule 3: complexity & time_pressure -> + r\n"
    "rule 4: number_of_involved_sites -> + r\n"
)


@pytest.fixture(scope="module")
def catalog():
    return parse_rulebase(CATALOG_DOC)


def make_project(**overrides):
    defaults = dict(
        project_id="p",
        coordinating_site_id="hq",
        sites=(Site("hq", "HQ"), Site("a", "A"), Site("b", "B")),
        tasks=(Task("t1", "T1"), Task("t2", "T2")),
        assignments={"t1": "a", "t2": "b"},
        project_binding={"time_pressure": L.HIGH},
        site_bindings={"a": {"transparency": L.LOW},
                       "b": {"transparency": L.HIGH}},
        task_bindings={"t1": {"complexity": L.MEDIUM},
                       "t2": {"complexity": L.VERY_LOW}},
        pair_bindings={pair_key("hq", "a"): {"cultural_difference": L.HIGH},
                       pair_key("hq", "b"): {"cultural_difference": L.LOW}},
    )
    defaults.update(overrides)
    return ProjectAssessment(**defaults)


class TestResolveBinding:
    def test_scope_lookup(self, catalog):
        project = make_project()
        binding = resolve_binding(project, "t1", "a", catalog.factors)
        assert binding["cultural_difference"] is L.HIGH
        assert binding["transparency"] is L.LOW
        assert binding["complexity"] is L.MEDIUM
        assert binding["time_pressure"] is L.HIGH

    def test_site_count_is_derived(self, catalog):
        project = make_project()
        binding = resolve_binding(project, "t1", "a", catalog.factors)
        # involved sites: hq + a + b = 3
        assert binding["number_of_involved_sites"] is L.LOW

    def test_two_total_sites_reads_very_low(self, catalog):
        project = make_project(
            sites=(Site("hq", "HQ"), Site("a", "A")),
            assignments={"t1": "a", "t2": "a"},
            site_bindings={"a": {"transparency": L.LOW}},
            pair_bindings={pair_key("hq", "a"):
                           {"cultural_difference": L.HIGH}},
        )
        binding = resolve_binding(project, "t1", "a", catalog.factors)
        assert binding["number_of_involved_sites"] is L.VERY_LOW

    def test_unassigned_pairing_rejected(self, catalog):
        project = make_project()
        with pytest.raises(ProjectError, match="not assigned"):
            resolve_binding(project, "t1", "b", catalog.factors)
        with pytest.raises(ProjectError, match="unknown task"):
            resolve_binding(project, "ghost", "a", catalog.factors)
        with pytest.raises(ProjectError, match="unknown site"):
            resolve_binding(project, "t1", "ghost", catalog.factors)

    def test_matches_flat_join_oracle_on_random_projects(self, catalog):
        rng = random.Random(0x10B5)
        for _ in range(200):
            sites = tuple(Site(f"s{i}", f"S{i}")
                          for i in range(rng.randint(2, 5)))
            tasks = tuple(Task(f"t{i}", f"T{i}")
                          for i in range(rng.randint(1, 4)))
            assignments = {t.task_id: rng.choice(sites[1:]).site_id
                           for t in tasks}
            project = ProjectAssessment(
                project_id="r",
                coordinating_site_id=sites[0].site_id,
                sites=sites,
                tasks=tasks,
                assignments=assignments,
                project_binding={"time_pressure": rng.choice(list(L))},
                site_bindings={s.site_id: {"transparency": rng.choice(list(L))}
                               for s in sites if rng.random() < 0.8},
                task_bindings={t.task_id: {"complexity": rng.choice(list(L))}
                               for t in tasks if rng.random() < 0.8},
                pair_bindings={
                    pair_key(sites[0].site_id, s.site_id):
                        {"cultural_difference": rng.choice(list(L))}
                    for s in sites[1:] if rng.random() < 0.8},
            )
            task = rng.choice(tasks)
            site_id = assignments[task.task_id]
            got = resolve_binding(project, task.task_id, site_id,
                                  catalog.factors)
            expected = oracle_resolve(project, task.task_id, site_id)
            assert got == expected


class TestValidateProject:
    def test_valid_project(self, catalog):
        assert validate_project(make_project(), catalog.factors) == []

    def test_wrong_scope_is_named(self, catalog):
        project = make_project(
            site_bindings={"a": {"cultural_difference": L.HIGH}})
        problems = validate_project(project, catalog.factors)
        assert any("cultural_difference" in p and "relationship" in p
                   for p in problems)

    def test_derived_factor_must_not_be_bound(self, catalog):
        project = make_project(
            project_binding={"number_of_involved_sites": L.HIGH})
        problems = validate_project(project, catalog.factors)
        assert any("derived" in p for p in problems)

    def test_structural_problems(self, catalog):
        project = make_project(
            sites=(Site("hq", "HQ"), Site("hq", "HQ again"), Site("a", "A")),
            assignments={"t1": "ghost", "ghost_task": "a"},
        )
        problems = validate_project(project, catalog.factors)
        text = "\n".join(problems)
        assert "duplicate site id" in text
        assert "unknown site 'ghost'" in text
        assert "unknown task 'ghost_task'" in text

    def test_pair_of_identical_sites_rejected(self, catalog):
        project = make_project(
            pair_bindings={("a", "a"): {"cultural_difference": L.HIGH}})
        problems = validate_project(project, catalog.factors)
        assert any("distinct" in p for p in problems)


class TestContexts:
    def test_context_count_equals_assignment_count(self, catalog):
        project = make_project()
        contexts = build_contexts(project, catalog.factors)
        assert len(contexts) == len(project.assignments) == 2

    def test_counterpart_defaults_to_coordinator(self, catalog):
        contexts = build_contexts(make_project(), catalog.factors)
        assert all(c.counterpart_site_id == "hq" for c in contexts)

    def test_zero_assignments(self, catalog):
        project = make_project(assignments={}, pair_bindings={},
                               site_bindings={}, task_bindings={})
        report = assess_project(project, catalog)
        assert report.contexts == ()

    def test_scope_isolation(self, catalog):
        # changing pair {hq,b} must not touch the context for task t1 at a
        base = make_project()
        changed = make_project(
            pair_bindings={pair_key("hq", "a"):
                           {"cultural_difference": L.HIGH},
                           pair_key("hq", "b"):
                           {"cultural_difference": L.VERY_HIGH}})
        before = resolve_binding(base, "t1", "a", catalog.factors)
        after = resolve_binding(changed, "t1", "a", catalog.factors)
        assert before == after


TWO_SITE_DOC = (
    'factor cultural_difference scope=relationship name="Cultural difference"\n'
    'factor common_working_experiences scope=relationship '
    'name="Common working experiences"\n'
    'factor process_maturity scope=site name="Process maturity"\n'
    'risk communication_problems name="Communication problems"\n'
    'risk lack_of_trust name="Lack of trust"\n'
    "rule 1: cultural_difference -> + communication_problems\n"
    "rule 2: cultural_difference & !common_working_experiences -> + lack_of_trust\n"
    "rule 3: process_maturity & common_working_experiences -> "
    "- communication_problems\n"
)


def two_site_project(site_id, cultural, experience, maturity=L.HIGH):
    return ProjectAssessment(
        project_id=f"two_site_{site_id}",
        coordinating_site_id="site_a",
        sites=(Site("site_a", "Site A"), Site(site_id, site_id.title())),
        tasks=(Task("t1", "T1"),),
        assignments={"t1": site_id},
        site_bindings={site_id: {"process_maturity": maturity}},
        pair_bindings={pair_key("site_a", site_id): {
            "cultural_difference": cultural,
            "common_working_experiences": experience,
        }},
    )


@pytest.fixture(scope="module")
def rulebase():
    return parse_rulebase(TWO_SITE_DOC)


class TestTwoSiteReconstruction:
    def test_site_b_reports_rules_1_and_3(self, rulebase):
        report = assess_project(two_site_project("site_b", L.HIGH, L.HIGH),
                                rulebase, L.HIGH)
        (result,) = report.contexts
        assert [e.rule_id for e in result.ranking.ranked] == [1, 3]
        by_id = {e.rule_id: e.relevance for e in result.relevances}
        assert by_id == {1: L.HIGH, 2: L.LOW, 3: L.HIGH}

    def test_alternate_site_changes_the_filtered_set(self, rulebase):
        report = assess_project(two_site_project("site_c", L.LOW, L.LOW),
                                rulebase, L.HIGH)
        (result,) = report.contexts
        assert [e.rule_id for e in result.ranking.ranked] == []
        by_id = {e.rule_id: e.relevance for e in result.relevances}
        assert by_id == {1: L.LOW, 2: L.LOW, 3: L.LOW}

    def test_risk_summary_groups_polarities(self, rulebase):
        report = assess_project(two_site_project("site_b", L.HIGH, L.HIGH),
                                rulebase, L.HIGH)
        (entry,) = report.risk_summary
        assert entry.risk_id == "communication_problems"
        assert entry.increasing == ((1, L.HIGH),)
        assert entry.mitigating == ((3, L.HIGH),)

    def test_compare_highlights_crossing_rules(self, rulebase):
        comparison = compare_scenarios(
            [two_site_project("site_b", L.HIGH, L.HIGH),
             two_site_project("site_c", L.LOW, L.LOW)],
            rulebase, L.HIGH)
        assert comparison.delta == (1, 3)
        row3 = next(r for r in comparison.rule_rows if r.rule_id == 3)
        assert row3.relevance == (L.HIGH, L.LOW)
        assert row3.reported == (True, False)

    def test_identical_variants_have_empty_delta(self, rulebase):
        variant = two_site_project("site_b", L.HIGH, L.HIGH)
        renamed = ProjectAssessment(
            **{**variant.__dict__, "project_id": "again"})
        comparison = compare_scenarios([variant, renamed], rulebase, L.HIGH)
        assert comparison.delta == ()

    def test_three_variants_three_columns(self, rulebase):
        comparison = compare_scenarios(
            [two_site_project("site_b", L.HIGH, L.HIGH),
             two_site_project("site_c", L.LOW, L.LOW),
             two_site_project("site_d", L.MEDIUM, L.MEDIUM)],
            rulebase, L.HIGH)
        assert len(comparison.labels) == 3
        assert all(len(r.relevance) == 3 for r in comparison.rule_rows)

    def test_mismatched_task_sets_rejected(self, rulebase):
        first = two_site_project("site_b", L.HIGH, L.HIGH)
        second = ProjectAssessment(
            **{**two_site_project("site_c", L.LOW, L.LOW).__dict__,
               "tasks": (Task("other", "Other"),),
               "assignments": {"other": "site_c"},
               "task_bindings": {}})
        with pytest.raises(ProjectError, match="task set"):
            compare_scenarios([first, second], rulebase, L.HIGH)

    def test_fewer_than_two_variants_rejected(self, rulebase):
        with pytest.raises(ProjectError, match="at least 2"):
            compare_scenarios([two_site_project("site_b", L.HIGH, L.HIGH)],
                              rulebase, L.HIGH)


def test_site_count_mapping_table():
    expected = {1: L.VERY_LOW, 2: L.VERY_LOW, 3: L.LOW, 4: L.MEDIUM,
                5: L.HIGH, 6: L.VERY_HIGH, 7: L.VERY_HIGH, 12: L.VERY_HIGH}
    for count, level in expected.items():
        assert site_count_level(count, DEFAULT_SITE_COUNT_SCALE) is level


def test_indeterminate_contexts_in_strict_mode(catalog):
    project = make_project(site_bindings={})  # transparency unbound
    report = assess_project(project, catalog, L.VERY_LOW, EvalMode.STRICT)
    for result in report.contexts:
        ids = [e.rule_id for e in result.ranking.indeterminate]
        assert ids == [2]
