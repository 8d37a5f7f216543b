import random

import pytest

from riskgrid.parser import (
    ParseError,
    RulebaseError,
    parse_expr,
    parse_factor,
    parse_rule,
    parse_rulebase,
)
from riskgrid.rules import (
    And,
    Confidence,
    EnumPredicate,
    FactorAtom,
    Not,
    Or,
    RiskEffect,
    serialize_expr,
)

from oracles import gen_expr, gen_flat_source, oracle_parse


class TestParseRule:
    def test_single_factor_rule(self):
        rule = parse_rule(
            "1: time_zone_difference -> + communication_problems, + lack_of_trust")
        assert rule.rule_id == 1
        assert rule.expr == FactorAtom("time_zone_difference")
        assert rule.effects == (
            RiskEffect(True, "communication_problems"),
            RiskEffect(True, "lack_of_trust"),
        )

    def test_leading_rule_keyword_is_optional(self):
        bare = parse_rule("2: a & b -> - r")
        prefixed = parse_rule("rule 2: a & b -> - r")
        assert bare == prefixed

    def test_precedence_and_over_or(self):
        rule = parse_rule("9: a & b | c -> + r")
        assert rule.expr == Or((And((FactorAtom("a"), FactorAtom("b"))),
                                FactorAtom("c")))

    def test_missing_arrow_is_a_syntax_error(self):
        with pytest.raises(ParseError) as excinfo:
            parse_rule("7: x + r")
        issue = excinfo.value.issue
        assert "->" in issue.message
        assert (issue.line, issue.col) == (1, 6)

    def test_empty_effects_rejected(self):
        with pytest.raises(ParseError):
            parse_rule("1: a ->")

    def test_mixed_polarities_and_wildcard(self):
        rule = parse_rule("11: size -> + travel, - ip")
        assert [e.increases for e in rule.effects] == [True, False]
        wild = parse_rule("31: a -> - *")
        assert wild.effects[0].is_wildcard
        assert not wild.effects[0].increases

    def test_attributes(self):
        rule = parse_rule(
            '5: a -> + r  desc="say \\"hi\\"" prov="note" conf=2/1 retired=yes')
        assert rule.description == 'say "hi"'
        assert rule.provenance_note == "note"
        assert rule.confidence == Confidence(2, 1)
        assert rule.retired

    def test_effects_in_source_order(self):
        rule = parse_rule("4: a -> - r2, + r1, - r3")
        assert [(e.sign, e.risk_id) for e in rule.effects] == [
            ("-", "r2"), ("+", "r1"), ("-", "r3")]

    def test_unknown_operator(self):
        with pytest.raises(ParseError, match="unknown operator"):
            parse_rule("1: a ^ b -> + r")

    def test_multiline_input_rejected(self):
        with pytest.raises(ParseError):
            parse_rule("1: a -> + r\n2: b -> + r")

    def test_enum_predicate(self):
        rule = parse_rule("32: process_phase = coding -> - project_failure_risk")
        assert rule.expr == EnumPredicate("process_phase", "coding")

    def test_rule_id_must_be_positive(self):
        with pytest.raises(ParseError, match="positive"):
            parse_rule("0: a -> + r")


class TestExpressions:
    def test_not_binds_tighter_than_and(self):
        assert parse_expr("!a & b") == And((Not(FactorAtom("a")),
                                            FactorAtom("b")))

    def test_double_negation_kept(self):
        assert parse_expr("!!a") == Not(Not(FactorAtom("a")))

    def test_parenthesised_or_under_and(self):
        expr = parse_expr("a & (b | c)")
        assert expr == And((FactorAtom("a"),
                            Or((FactorAtom("b"), FactorAtom("c")))))

    def test_chains_are_flattened(self):
        assert parse_expr("a & b & c") == And(
            (FactorAtom("a"), FactorAtom("b"), FactorAtom("c")))
        assert parse_expr("a & (b & c)") == parse_expr("a & b & c")

    def test_unterminated_string(self):
        with pytest.raises(ParseError, match="unterminated string"):
            parse_rule('1: a -> + r desc="oops')

    def test_comment_ignored_outside_strings(self):
        rule = parse_rule('1: a -> + r desc="keep # this"  # drop this')
        assert rule.description == "keep # this"


# Fifty-case corpus checked against an independently written
# precedence-climbing parser.
CORPUS = (
    "a",
    "!a",
    "!!a",
    "!!!a",
    "a & b",
    "a | b",
    "a & b & c",
    "a | b | c",
    "a & b | c",
    "a | b & c",
    "!a & b",
    "a & !b",
    "!a | !b",
    "!(a & b)",
    "!(a | b)",
    "!(a) & !(b)",
    "(a)",
    "((a))",
    "(a & b) | c",
    "a & (b | c)",
    "(a | b) & c",
    "a | (b & c)",
    "(a | b) & (c | d)",
    "(a & b) | (c & d)",
    "!(a & b) | c",
    "a & !(b | c)",
    "!(a & b | c)",
    "!((a | b) & c)",
    "a & b & c & d",
    "a | b | c | d",
    "a & b | c & d",
    "a | b & c | d",
    "!a & !b & !c",
    "!a | !b | !c",
    "!(!(a))",
    "!(!a & b)",
    "a & (b & (c & d))",
    "a | (b | (c | d))",
    "((a & b) & c) & d",
    "p = x",
    "!p = x",
    "p = x & a",
    "a & p = x",
    "p = x | !a",
    "!(p = x)",
    "(p = x | a) & b",
    "a & b | !c & d",
    "!a | b & !c | d",
    "!( a )&( b )",
    "a&b|c&!d",
)


@pytest.mark.parametrize("source", CORPUS)
def test_corpus_matches_oracle(source):
    assert parse_expr(source) == oracle_parse(source)


def test_random_flat_expressions_match_oracle():
    rng = random.Random(0xBEEF)
    for _ in range(500):
        source = gen_flat_source(rng, ["a", "b", "c", "d", "e"])
        assert parse_expr(source) == oracle_parse(source), source


def test_round_trip_random_asts():
    # 1000 random canonical ASTs of depth <= 6: parse(serialize(ast)) == ast
    rng = random.Random(0xC0FFEE)
    enum_factors = {"p": ("x", "y", "z")}
    for _ in range(1000):
        ast = gen_expr(rng, ["a", "b", "c", "d", "p"], depth=6,
                       enum_factors=enum_factors)
        assert parse_expr(serialize_expr(ast)) == ast


class TestParseRulebase:
    def test_seeded_document_shape(self, seed_rulebase):
        assert len(seed_rulebase.factors) == 23
        assert len(seed_rulebase.rules) == 36
        assert len(seed_rulebase.risks) == 9

    def test_empty_document(self):
        rulebase = parse_rulebase("")
        assert len(rulebase.factors) == 0
        assert len(rulebase.rules) == 0
        assert len(rulebase.risks) == 0
        rulebase = parse_rulebase("# only a comment\n\n")
        assert len(rulebase.rules) == 0

    def test_undeclared_factor_is_named_with_rule_id(self):
        doc = (
            'factor criticality scope=task kind=ordinal name="Criticality"\n'
            'risk r name="R" impact=""\n'
            "rule 4: criticality2 -> + r\n"
        )
        with pytest.raises(RulebaseError) as excinfo:
            parse_rulebase(doc)
        text = str(excinfo.value)
        assert "criticality2" in text
        assert "rule 4" in text

    def test_all_problems_aggregated(self):
        doc = (
            'factor f scope=task name="F"\n'
            'factor f scope=task name="F again"\n'
            'risk r name="R"\n'
            "rule 1: f -> + r\n"
            "rule 1: f -> + unknown_risk\n"
            "rule 2: ghost -> + r\n"
        )
        with pytest.raises(RulebaseError) as excinfo:
            parse_rulebase(doc)
        issues = excinfo.value.issues
        messages = "\n".join(str(i) for i in issues)
        assert "duplicate factor id 'f'" in messages
        assert "duplicate rule id 1" in messages
        assert "unknown_risk" in messages
        assert "ghost" in messages
        assert len(issues) == 4

    def test_enum_misuse_is_reported(self):
        doc = (
            "factor phase scope=task kind=enum(build,test) name=\"Phase\"\n"
            "factor level scope=task kind=ordinal name=\"Level\"\n"
            'risk r name="R"\n'
            "rule 1: phase -> + r\n"
            "rule 2: level = build -> + r\n"
            "rule 3: phase = ship -> + r\n"
        )
        with pytest.raises(RulebaseError) as excinfo:
            parse_rulebase(doc)
        messages = str(excinfo.value)
        assert "used as a plain atom" in messages
        assert "compared with '='" in messages
        assert "'ship' not in enum domain" in messages

    def test_declarations_order_free(self):
        doc = (
            "rule 1: f -> + r\n"
            'risk r name="R"\n'
            'factor f scope=site name="F"\n'
        )
        rulebase = parse_rulebase(doc)
        assert rulebase.rule(1).expr == FactorAtom("f")


def test_parse_factor_line():
    factor = parse_factor(
        'factor phase scope=task kind=enum(build,test) name="Phase"')
    assert factor.factor_id == "phase"
    assert factor.enum_values == ("build", "test")
    bare = parse_factor('other scope=project name="Other"')
    assert bare.factor_id == "other"
    assert not bare.is_enum
