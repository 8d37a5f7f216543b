"""Rule relevance evaluation over factor bindings.

The semantics on the five-level scale: a factor atom evaluates to its
bound value, negation reflects the scale (6 - v), ``&`` takes the lowest
child value, ``|`` the highest, and the operators nest recursively.  An
enum predicate switches between the scale endpoints: ``very_high`` when
the bound value equals the literal, ``very_low`` otherwise.

Missing factor values are handled by mode: ``strict`` marks any rule
touching an unassessed factor as indeterminate (carrying the complete
missing-factor set), ``assume_nominal`` reads unbound ordinal factors as
``medium`` and unbound enum predicates as ``very_low``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Union

from .catalog import FactorCatalog
from .rules import (
    And,
    EnumPredicate,
    FactorAtom,
    Not,
    Or,
    RiskEffect,
    Rulebase,
    RuleExpr,
    referenced_factors,
)
from .scale import ScaleLevel, negate

#: A factor assessment: ScaleLevel for ordinal factors, str for enum ones.
BindingValue = Union[ScaleLevel, str]
Binding = Mapping[str, BindingValue]


class EvalMode(Enum):
    STRICT = "strict"
    ASSUME_NOMINAL = "assume_nominal"

    def __str__(self) -> str:
        return self.value


def parse_mode(text: str) -> EvalMode:
    for mode in EvalMode:
        if mode.value == text.strip().lower():
            return mode
    raise ValueError(
        f"unknown mode {text!r}; expected 'strict' or 'assume_nominal'")


class EvalTypeError(TypeError):
    """A bound value does not match the way the factor is used."""


@dataclass(frozen=True)
class Indeterminate:
    """Evaluation outcome when referenced factors are unassessed."""

    missing: frozenset[str]

    def __str__(self) -> str:
        return "indeterminate (missing: " + ", ".join(sorted(self.missing)) + ")"


Relevance = Union[ScaleLevel, Indeterminate]


@dataclass(frozen=True)
class RuleRelevance:
    """One rule's evaluated relevance plus the effects it would contribute."""

    rule_id: int
    relevance: Relevance
    effects: tuple[RiskEffect, ...]

    @property
    def is_indeterminate(self) -> bool:
        return isinstance(self.relevance, Indeterminate)


def eval_expr(expr: RuleExpr, binding: Binding,
              mode: EvalMode = EvalMode.STRICT) -> Relevance:
    """Evaluate a validated expression under a binding.

    In strict mode the result is Indeterminate (with every unbound
    referenced factor) as soon as one reference is unassessed.
    """
    if mode is EvalMode.STRICT:
        missing = frozenset(
            f for f in referenced_factors(expr) if f not in binding)
        if missing:
            return Indeterminate(missing)
    return _eval(expr, binding)


def _eval(expr: RuleExpr, binding: Binding) -> ScaleLevel:
    if isinstance(expr, FactorAtom):
        value = binding.get(expr.factor_id)
        if value is None:
            return ScaleLevel.MEDIUM
        if not isinstance(value, ScaleLevel):
            raise EvalTypeError(
                f"factor {expr.factor_id!r} is bound to enum value "
                f"{value!r} but used as a plain atom")
        return value
    if isinstance(expr, EnumPredicate):
        value = binding.get(expr.factor_id)
        if value is None:
            return ScaleLevel.VERY_LOW
        if isinstance(value, ScaleLevel):
            raise EvalTypeError(
                f"factor {expr.factor_id!r} is bound to a scale level "
                f"but compared with '='")
        return ScaleLevel.VERY_HIGH if value == expr.value else ScaleLevel.VERY_LOW
    if isinstance(expr, Not):
        return negate(_eval(expr.child, binding))
    if isinstance(expr, And):
        return min(_eval(child, binding) for child in expr.children)
    return max(_eval(child, binding) for child in expr.children)


def evaluate_rules(rulebase: Rulebase, binding: Binding,
                   mode: EvalMode = EvalMode.STRICT) -> tuple[RuleRelevance, ...]:
    """One RuleRelevance per active rule, in ascending rule-id order."""
    results: list[RuleRelevance] = []
    for rule in sorted(rulebase.active_rules, key=lambda r: r.rule_id):
        try:
            relevance = eval_expr(rule.expr, binding, mode)
        except EvalTypeError as exc:
            raise EvalTypeError(f"rule {rule.rule_id}: {exc}") from None
        results.append(RuleRelevance(rule.rule_id, relevance, rule.effects))
    return tuple(results)


@dataclass(frozen=True)
class Ranking:
    """Threshold-filtered ranking plus the separately-reported leftovers."""

    ranked: tuple[RuleRelevance, ...]
    indeterminate: tuple[RuleRelevance, ...]


def rank_and_filter(relevances: tuple[RuleRelevance, ...] | list[RuleRelevance],
                    threshold: ScaleLevel) -> Ranking:
    """Keep determinate entries at or above the threshold.

    Ordering: relevance descending, ties broken by ascending rule id.
    Indeterminate entries never enter the ranking; they are returned as
    their own section, in rule-id order.
    """
    determinate = [r for r in relevances if not r.is_indeterminate]
    indeterminate = [r for r in relevances if r.is_indeterminate]
    ranked = sorted(
        (r for r in determinate if r.relevance >= threshold),
        key=lambda r: (-int(r.relevance), r.rule_id),
    )
    return Ranking(
        ranked=tuple(ranked),
        indeterminate=tuple(sorted(indeterminate, key=lambda r: r.rule_id)),
    )


def validate_binding(factors: FactorCatalog, binding: Binding) -> list[str]:
    """Kind mismatches and unknown ids in a binding, as messages."""
    problems: list[str] = []
    for factor_id, value in binding.items():
        if factor_id not in factors:
            problems.append(f"unknown factor {factor_id!r}")
            continue
        factor = factors.get(factor_id)
        if factor.is_enum:
            if isinstance(value, ScaleLevel):
                problems.append(
                    f"enum factor {factor_id!r} bound to scale level "
                    f"{value}; expected one of {', '.join(factor.enum_values)}")
            elif value not in factor.enum_values:
                problems.append(
                    f"value {value!r} not in enum domain of {factor_id!r} "
                    f"({', '.join(factor.enum_values)})")
        elif not isinstance(value, ScaleLevel):
            problems.append(
                f"ordinal factor {factor_id!r} bound to {value!r}; "
                f"expected a scale level")
    return problems
