"""Rule expressions, risk effects, and the rulebase container.

An expression is a tree over factor atoms, enum predicates
(``factor = value``), negation, conjunction, and disjunction with the
precedence ``!`` > ``&`` > ``|``.  And/Or nodes hold flat, ordered child
lists (nested same-operator nodes are collapsed by the constructors), so
every valid tree has exactly one canonical source form.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .catalog import FactorCatalog, RiskCatalog

# --------------------------------------------------------------- expressions


@dataclass(frozen=True)
class FactorAtom:
    factor_id: str


@dataclass(frozen=True)
class EnumPredicate:
    factor_id: str
    value: str


@dataclass(frozen=True)
class Not:
    child: "RuleExpr"


@dataclass(frozen=True)
class And:
    children: tuple["RuleExpr", ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("'&' node needs at least 2 operands")
        if any(isinstance(c, And) for c in self.children):
            raise ValueError("'&' node children must be flattened")


@dataclass(frozen=True)
class Or:
    children: tuple["RuleExpr", ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("'|' node needs at least 2 operands")
        if any(isinstance(c, Or) for c in self.children):
            raise ValueError("'|' node children must be flattened")


RuleExpr = FactorAtom | EnumPredicate | Not | And | Or


def and_(*operands: RuleExpr) -> RuleExpr:
    """Conjunction constructor; flattens nested And nodes."""
    flat: list[RuleExpr] = []
    for op in operands:
        flat.extend(op.children) if isinstance(op, And) else flat.append(op)
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def or_(*operands: RuleExpr) -> RuleExpr:
    """Disjunction constructor; flattens nested Or nodes."""
    flat: list[RuleExpr] = []
    for op in operands:
        flat.extend(op.children) if isinstance(op, Or) else flat.append(op)
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def referenced_factors(expr: RuleExpr) -> set[str]:
    """All factor ids occurring anywhere in the expression."""
    if isinstance(expr, (FactorAtom, EnumPredicate)):
        return {expr.factor_id}
    if isinstance(expr, Not):
        return referenced_factors(expr.child)
    result: set[str] = set()
    for child in expr.children:
        result |= referenced_factors(child)
    return result


def validate_expr(expr: RuleExpr, factors: FactorCatalog) -> list[str]:
    """Cross-reference and kind problems, as human-readable messages."""
    problems: list[str] = []

    def walk(node: RuleExpr) -> None:
        if isinstance(node, FactorAtom):
            if node.factor_id not in factors:
                problems.append(f"unknown factor {node.factor_id!r}")
            elif factors.get(node.factor_id).is_enum:
                problems.append(
                    f"enum factor {node.factor_id!r} used as a plain atom; "
                    f"compare it with '='"
                )
        elif isinstance(node, EnumPredicate):
            if node.factor_id not in factors:
                problems.append(f"unknown factor {node.factor_id!r}")
            else:
                factor = factors.get(node.factor_id)
                if not factor.is_enum:
                    problems.append(
                        f"ordinal factor {node.factor_id!r} compared with '='"
                    )
                elif node.value not in factor.enum_values:
                    problems.append(
                        f"value {node.value!r} not in enum domain of "
                        f"{node.factor_id!r} ({', '.join(factor.enum_values)})"
                    )
        elif isinstance(node, Not):
            walk(node.child)
        else:
            for child in node.children:
                walk(child)

    walk(expr)
    return problems


# ------------------------------------------------------------ serialization

_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3


def serialize_expr(expr: RuleExpr) -> str:
    """Canonical source text with minimal parentheses."""
    return _serialize(expr, 0)


def _serialize(expr: RuleExpr, parent_prec: int) -> str:
    if isinstance(expr, FactorAtom):
        return expr.factor_id
    if isinstance(expr, EnumPredicate):
        return f"{expr.factor_id} = {expr.value}"
    if isinstance(expr, Not):
        return "!" + _serialize(expr.child, _PREC_NOT)
    if isinstance(expr, And):
        text = " & ".join(_serialize(c, _PREC_AND) for c in expr.children)
        return _wrap(text, _PREC_AND < parent_prec)
    text = " | ".join(_serialize(c, _PREC_OR) for c in expr.children)
    return _wrap(text, _PREC_OR < parent_prec)


def _wrap(text: str, needed: bool) -> str:
    return f"({text})" if needed else text


# ------------------------------------------------------------------ effects

#: Effect target meaning "every risk in the catalog".
WILDCARD = "*"


@dataclass(frozen=True)
class RiskEffect:
    """Signed impact of a rule on one risk (or on all, via the wildcard)."""

    increases: bool
    risk_id: str

    @property
    def sign(self) -> str:
        return "+" if self.increases else "-"

    @property
    def is_wildcard(self) -> bool:
        return self.risk_id == WILDCARD

    def __str__(self) -> str:
        return f"{self.sign} {self.risk_id}"


def validate_effects(effects: tuple[RiskEffect, ...],
                     risks: RiskCatalog) -> list[str]:
    problems: list[str] = []
    if not effects:
        problems.append("rule has no effects")
    for effect in effects:
        if not effect.is_wildcard and effect.risk_id not in risks:
            problems.append(f"unknown risk {effect.risk_id!r}")
    return problems


def resolve_effects(effects: tuple[RiskEffect, ...],
                    risks: RiskCatalog) -> tuple[RiskEffect, ...]:
    """Expand wildcard effects into one effect per catalog risk."""
    resolved: list[RiskEffect] = []
    for effect in effects:
        if effect.is_wildcard:
            resolved.extend(
                RiskEffect(effect.increases, risk_id) for risk_id in risks.ids()
            )
        else:
            resolved.append(effect)
    return tuple(resolved)


# -------------------------------------------------------------------- rules


@dataclass(frozen=True)
class Confidence:
    """Raw retrospective evidence: how often a rule was confirmed/refuted."""

    confirmations: int = 0
    refutations: int = 0

    def confirmed(self) -> "Confidence":
        return Confidence(self.confirmations + 1, self.refutations)

    def refuted(self) -> "Confidence":
        return Confidence(self.confirmations, self.refutations + 1)


@dataclass(frozen=True)
class Rule:
    """One knowledge-base rule: expression, signed effects, explanation."""

    rule_id: int
    expr: RuleExpr
    effects: tuple[RiskEffect, ...]
    description: str = ""
    provenance_note: str = ""
    confidence: Confidence = Confidence()
    retired: bool = False

    def __post_init__(self) -> None:
        if self.rule_id < 1:
            raise ValueError("rule id must be a positive integer")
        if not self.effects:
            raise ValueError("rule has no effects")


def serialize_rule(rule: Rule) -> str:
    """Core source line: ``<id>: <expr> -> <effects>`` (no attributes)."""
    effects = ", ".join(str(effect) for effect in rule.effects)
    return f"{rule.rule_id}: {serialize_expr(rule.expr)} -> {effects}"


def quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def format_rule_line(rule: Rule) -> str:
    """Full rulebase-document line including attributes."""
    parts = [f"rule {serialize_rule(rule)}"]
    if rule.description:
        parts.append(f"desc={quote(rule.description)}")
    if rule.provenance_note:
        parts.append(f"prov={quote(rule.provenance_note)}")
    conf = rule.confidence
    if conf.confirmations or conf.refutations:
        parts.append(f"conf={conf.confirmations}/{conf.refutations}")
    if rule.retired:
        parts.append("retired=yes")
    return "  ".join(parts)


def format_factor_line(factor) -> str:
    return (
        f"factor {factor.factor_id} scope={factor.scope} "
        f"kind={factor.kind_label} name={quote(factor.name)}"
    )


def format_risk_line(risk) -> str:
    return f"risk {risk.risk_id} name={quote(risk.name)} impact={quote(risk.impact)}"


# ----------------------------------------------------------------- rulebase


@dataclass(frozen=True)
class Rulebase:
    """Factor catalog, risk catalog, and the rules written over them."""

    factors: FactorCatalog = FactorCatalog()
    risks: RiskCatalog = RiskCatalog()
    rules: tuple[Rule, ...] = ()

    def rule(self, rule_id: int) -> Rule:
        for rule in self.rules:
            if rule.rule_id == rule_id:
                return rule
        raise KeyError(f"unknown rule id {rule_id}")

    @property
    def active_rules(self) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if not r.retired)

    def next_rule_id(self) -> int:
        return max((r.rule_id for r in self.rules), default=0) + 1

    def validate(self) -> list[str]:
        """All cross-reference problems; empty list means valid."""
        problems: list[str] = []
        seen: set[int] = set()
        for rule in self.rules:
            where = f"rule {rule.rule_id}"
            if rule.rule_id in seen:
                problems.append(f"{where}: duplicate rule id")
            seen.add(rule.rule_id)
            problems.extend(
                f"{where}: {p}" for p in validate_expr(rule.expr, self.factors)
            )
            problems.extend(
                f"{where}: {p}" for p in validate_effects(rule.effects, self.risks)
            )
        return problems

    def with_rules(self, rules: tuple[Rule, ...]) -> "Rulebase":
        return replace(self, rules=rules)

    def serialize(self) -> str:
        """Canonical rulebase document (factors, risks, then rules)."""
        lines: list[str] = []
        lines.extend(format_factor_line(f) for f in self.factors)
        if self.factors and self.risks:
            lines.append("")
        lines.extend(format_risk_line(r) for r in self.risks)
        if self.risks and self.rules:
            lines.append("")
        lines.extend(format_rule_line(r) for r in self.rules)
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------- lint


@dataclass(frozen=True)
class LintWarning:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def lint_rulebase(rulebase: Rulebase) -> list[LintWarning]:
    """Hygiene warnings for a validated rulebase.

    Retired rules are ignored: a factor only referenced by retired rules
    counts as unreferenced.
    """
    warnings: list[LintWarning] = []
    active = rulebase.active_rules

    used_factors: set[str] = set()
    for rule in active:
        used_factors |= referenced_factors(rule.expr)
    for factor in rulebase.factors:
        if factor.factor_id not in used_factors:
            warnings.append(LintWarning(
                "unreferenced-factor",
                f"factor {factor.factor_id!r} is declared but referenced by no rule",
            ))

    targeted: set[str] = set()
    for rule in active:
        for effect in resolve_effects(rule.effects, rulebase.risks):
            targeted.add(effect.risk_id)
    for risk in rulebase.risks:
        if risk.risk_id not in targeted:
            warnings.append(LintWarning(
                "untargeted-risk",
                f"risk {risk.risk_id!r} is never targeted by any effect",
            ))

    by_expr: dict[str, list[int]] = {}
    for rule in active:
        by_expr.setdefault(serialize_expr(rule.expr), []).append(rule.rule_id)
    for text, ids in by_expr.items():
        if len(ids) > 1:
            id_list = ", ".join(str(i) for i in ids)
            warnings.append(LintWarning(
                "duplicate-expression",
                f"rules {id_list} share the identical expression {text!r}",
            ))

    return warnings
