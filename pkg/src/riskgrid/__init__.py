"""Rule-based risk identification for distributed software projects."""

__version__ = "0.1.0"

from .catalog import FactorCatalog, FactorDef, RiskCatalog, RiskDef, Scope
from .engine import (
    Binding,
    EvalMode,
    Indeterminate,
    Ranking,
    RuleRelevance,
    eval_expr,
    evaluate_rules,
    rank_and_filter,
)
from .kb import KnowledgeBase, KBStore, UpdateEvent, load_seeded_kb
from .parser import ParseError, RulebaseError, parse_expr, parse_rule, parse_rulebase
from .rules import (
    And,
    EnumPredicate,
    FactorAtom,
    Not,
    Or,
    RiskEffect,
    Rule,
    Rulebase,
    lint_rulebase,
    serialize_expr,
    serialize_rule,
)
from .scale import ScaleLevel, negate, parse_level

__all__ = [
    "And",
    "Binding",
    "EnumPredicate",
    "EvalMode",
    "FactorAtom",
    "FactorCatalog",
    "FactorDef",
    "Indeterminate",
    "KBStore",
    "KnowledgeBase",
    "Not",
    "Or",
    "ParseError",
    "Ranking",
    "RiskCatalog",
    "RiskDef",
    "RiskEffect",
    "Rule",
    "Rulebase",
    "RulebaseError",
    "RuleRelevance",
    "ScaleLevel",
    "Scope",
    "UpdateEvent",
    "eval_expr",
    "evaluate_rules",
    "lint_rulebase",
    "load_seeded_kb",
    "negate",
    "parse_expr",
    "parse_level",
    "parse_rule",
    "parse_rulebase",
    "rank_and_filter",
    "serialize_expr",
    "serialize_rule",
]
