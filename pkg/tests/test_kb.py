import random

import pytest

from riskgrid.catalog import Scope
from riskgrid.engine import evaluate_rules
from riskgrid.kb import (
    EventKind,
    KBError,
    KBStore,
    SeedError,
    UpdateEvent,
    VersionConflict,
    apply_change,
    load_seeded_kb,
    make_event,
    record_retrospective,
    replay,
)
from riskgrid.rules import EnumPredicate, FactorAtom, referenced_factors
from riskgrid.scale import ScaleLevel


def contains_predicate(expr, factor_id):
    if isinstance(expr, EnumPredicate):
        return expr.factor_id == factor_id
    if hasattr(expr, "child"):
        return contains_predicate(expr.child, factor_id)
    if hasattr(expr, "children"):
        return any(contains_predicate(c, factor_id) for c in expr.children)
    return False


class TestSeed:
    def test_shape(self, seed_kb):
        assert seed_kb.version == 1
        assert len(seed_kb.rulebase.factors) == 23
        assert len(seed_kb.rulebase.rules) == 36
        assert len(seed_kb.rulebase.risks) == 9

    def test_scope_grouping(self, seed_rulebase):
        by_scope = {scope: len(seed_rulebase.factors.in_scope(scope))
                    for scope in Scope}
        assert by_scope == {Scope.RELATIONSHIP: 6, Scope.SITE: 6,
                            Scope.TASK: 6, Scope.PROJECT: 5}

    def test_time_zone_difference_declaration(self, seed_rulebase):
        factor = seed_rulebase.factors.get("time_zone_difference")
        assert factor.scope is Scope.RELATIONSHIP
        assert factor.name == "Time zone difference"

    def test_rule_36_site_count_rule(self, seed_rulebase):
        rule = seed_rulebase.rule(36)
        assert rule.expr == FactorAtom("number_of_involved_sites")
        assert [str(e) for e in rule.effects] == ["+ coordination_problems"]
        assert "management structures have to be replicated" in rule.description

    def test_rule_31_wildcard_decrease(self, seed_rulebase):
        rule = seed_rulebase.rule(31)
        assert len(rule.effects) == 1
        assert rule.effects[0].is_wildcard
        assert not rule.effects[0].increases

    def test_rule_11_mixes_polarities(self, seed_rulebase):
        signs = {e.sign for e in seed_rulebase.rule(11).effects}
        assert signs == {"+", "-"}

    def test_phase_predicates_in_rules_5_32_33(self, seed_rulebase):
        for rule_id in (5, 32, 33):
            assert contains_predicate(seed_rulebase.rule(rule_id).expr,
                                      "process_phase"), rule_id

    def test_every_rule_carries_a_description(self, seed_rulebase):
        assert all(rule.description for rule in seed_rulebase.rules)

    def test_every_reference_resolves(self, seed_rulebase):
        assert seed_rulebase.validate() == []
        for rule in seed_rulebase.rules:
            for factor_id in referenced_factors(rule.expr):
                assert factor_id in seed_rulebase.factors
            for effect in rule.effects:
                assert effect.is_wildcard or effect.risk_id in seed_rulebase.risks

    def test_supplied_operators_carry_provenance_notes(self, seed_rulebase):
        noted = {rule.rule_id for rule in seed_rulebase.rules
                 if rule.provenance_note}
        assert noted == {4, 5, 7, 8, 16, 18, 21, 23, 30}

    def test_seed_corruption_aborts(self, monkeypatch):
        import riskgrid.kb as kb_module
        good = kb_module.seed_text()
        truncated = "\n".join(line for line in good.splitlines()
                              if not line.startswith("rule 36"))
        monkeypatch.setattr(kb_module, "seed_text", lambda: truncated)
        with pytest.raises(SeedError, match="35"):
            kb_module.load_seeded_kb()


class TestRetrospectives:
    def test_confirm_twice(self, seed_kb):
        kb = record_retrospective(seed_kb, 1, "confirmed", "project X")
        kb = record_retrospective(kb, 1, "confirmed", "project Y")
        confidence = kb.rulebase.rule(1).confidence
        assert (confidence.confirmations, confidence.refutations) == (2, 0)
        assert kb.version == 3

    def test_refute_then_replay_reproduces_state(self, seed_kb):
        kb = record_retrospective(seed_kb, 2, "refuted", "did not hold")
        replayed = replay(kb.changelog)
        assert replayed.rulebase == kb.rulebase
        assert replayed.version == kb.version

    def test_unknown_rule_leaves_version_untouched(self, seed_kb):
        with pytest.raises(KBError, match="unknown rule id 99"):
            record_retrospective(seed_kb, 99, "refuted")
        assert seed_kb.version == 1

    def test_invalid_outcome(self, seed_kb):
        with pytest.raises(KBError, match="outcome"):
            record_retrospective(seed_kb, 1, "maybe")


class TestApplyChange:
    def test_add_factor(self, seed_kb):
        event = make_event(
            EventKind.ADD_FACTOR, target="outsourcing_contract_type",
            factor=('outsourcing_contract_type scope=project '
                    'name="Outsourcing contract type"'))
        kb = apply_change(seed_kb, event)
        assert len(kb.rulebase.factors) == 24
        assert kb.version == 2

    def test_add_rule_gets_next_free_id(self, seed_kb):
        event = make_event(
            EventKind.ADD_RULE,
            rule="37: staff_motivation & time_pressure -> + quality_problems")
        kb = apply_change(seed_kb, event)
        assert len(kb.rulebase.rules) == 37
        assert kb.rulebase.rule(37).expr is not None

    def test_add_rule_rejects_wrong_id(self, seed_kb):
        event = make_event(EventKind.ADD_RULE, rule="50: staff_motivation -> + quality_problems")
        with pytest.raises(KBError, match="next free id 37"):
            apply_change(seed_kb, event)

    def test_modify_swaps_expression(self, seed_kb):
        event = make_event(
            EventKind.MODIFY, target="2",
            old="", new="2: process_maturity -> - productivity_drop")
        kb = apply_change(seed_kb, event)
        binding = {f.factor_id: ("coding" if f.is_enum else ScaleLevel.VERY_HIGH)
                   for f in kb.rulebase.factors}
        results = evaluate_rules(kb.rulebase, binding)
        entry = next(r for r in results if r.rule_id == 2)
        assert entry.relevance is ScaleLevel.VERY_HIGH
        # description survives when the new text has none
        assert kb.rulebase.rule(2).description == seed_kb.rulebase.rule(2).description

    def test_modify_validates_new_expression(self, seed_kb):
        event = make_event(EventKind.MODIFY, target="2",
                           old="", new="2: no_such_factor -> + quality_problems")
        with pytest.raises(KBError, match="no_such_factor"):
            apply_change(seed_kb, event)

    def test_retire_excludes_from_evaluation(self, seed_kb):
        kb = apply_change(seed_kb, make_event(EventKind.RETIRE_RULE, target="11"))
        binding = {f.factor_id: ("coding" if f.is_enum else ScaleLevel.MEDIUM)
                   for f in kb.rulebase.factors}
        assert len(evaluate_rules(kb.rulebase, binding)) == 35
        assert kb.rulebase.rule(11).retired  # still readable

    def test_retire_twice_fails(self, seed_kb):
        kb = apply_change(seed_kb, make_event(EventKind.RETIRE_RULE, target="11"))
        with pytest.raises(KBError, match="already retired"):
            apply_change(kb, make_event(EventKind.RETIRE_RULE, target="11"))


def random_event(rng, kb):
    kind = rng.choice(("confirm", "refute", "retire", "add_rule",
                       "add_factor", "modify"))
    active = [r.rule_id for r in kb.rulebase.rules if not r.retired]
    if kind in ("confirm", "refute"):
        return make_event(EventKind.CONFIRM if kind == "confirm"
                          else EventKind.REFUTE,
                          target=str(rng.choice(active)),
                          timestamp=f"t{rng.randint(0, 999)}")
    if kind == "retire" and active:
        return make_event(EventKind.RETIRE_RULE, target=str(rng.choice(active)),
                          timestamp="t0")
    if kind == "add_rule":
        next_id = kb.rulebase.next_rule_id()
        return make_event(
            EventKind.ADD_RULE, timestamp="t0",
            rule=f"{next_id}: staff_motivation -> - quality_problems")
    if kind == "add_factor":
        name = f"extra_factor_{len(kb.rulebase.factors)}"
        return make_event(EventKind.ADD_FACTOR, target=name, timestamp="t0",
                          factor=f'{name} scope=project name="Extra"')
    target = rng.choice(active)
    return make_event(EventKind.MODIFY, target=str(target), timestamp="t0",
                      old="", new=f"{target}: time_pressure -> + quality_problems")


def test_event_sourced_replay_500_sequences(seed_kb):
    rng = random.Random(0xD1CE)
    for _ in range(500):
        kb = seed_kb
        previous_confidence = {}
        for _ in range(rng.randint(0, 8)):
            event = random_event(rng, kb)
            try:
                kb = apply_change(kb, event)
            except KBError:
                continue
            for rule in kb.rulebase.rules:
                before = previous_confidence.get(rule.rule_id, (0, 0))
                now = (rule.confidence.confirmations,
                       rule.confidence.refutations)
                assert now >= before  # counters never decrease
                previous_confidence[rule.rule_id] = now
        replayed = replay(kb.changelog)
        assert replayed.rulebase == kb.rulebase
        assert replayed.version == kb.version
        assert replayed.changelog == kb.changelog


class TestStore:
    def test_init_load_round_trip(self, tmp_path, seed_kb):
        store = KBStore(tmp_path / "kb")
        store.init()
        loaded = store.load()
        assert loaded.rulebase == seed_kb.rulebase
        assert loaded.version == 1

    def test_init_refuses_to_clobber(self, tmp_path):
        store = KBStore(tmp_path / "kb")
        store.init()
        with pytest.raises(KBError, match="already exists"):
            store.init()

    def test_commit_appends_and_reloads(self, tmp_path):
        store = KBStore(tmp_path / "kb")
        store.init()
        kb = store.commit(make_event(EventKind.CONFIRM, target="1"))
        assert kb.version == 2
        reloaded = store.load()
        assert reloaded.version == 2
        assert reloaded.rulebase.rule(1).confidence.confirmations == 1

    def test_optimistic_concurrency(self, tmp_path):
        store = KBStore(tmp_path / "kb")
        store.init()
        store.commit(make_event(EventKind.CONFIRM, target="1"),
                     expected_version=1)
        with pytest.raises(VersionConflict) as excinfo:
            store.commit(make_event(EventKind.CONFIRM, target="1"),
                         expected_version=1)
        assert excinfo.value.actual == 2

    def test_rulebase_snapshot_stays_pristine(self, tmp_path):
        store = KBStore(tmp_path / "kb")
        store.init()
        before = store.rulebase_path.read_text("utf-8")
        store.commit(make_event(EventKind.RETIRE_RULE, target="11"))
        assert store.rulebase_path.read_text("utf-8") == before
        assert store.load().rulebase.rule(11).retired

    def test_event_json_round_trip(self):
        event = make_event(EventKind.MODIFY, target="2", note="n",
                           timestamp="2026-01-01T00:00:00+00:00",
                           old="2: a -> + r", new="2: b -> + r")
        parsed, version = UpdateEvent.from_json(event.to_json(7))
        assert parsed == event
        assert version == 7
