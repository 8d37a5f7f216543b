"""Factor and risk catalogs: the declared vocabulary a rulebase is written in.

Factors are influencing characteristics of the project environment,
declared with a scope category (who they are assessed for) and a kind
(ordinal five-level scale or a closed enum such as the process phase).
Risks are the problems that rule effects target.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Scope(Enum):
    """Assessment scope category of a factor."""

    PROJECT = "project"
    SITE = "site"
    TASK = "task"
    RELATIONSHIP = "relationship"

    def __str__(self) -> str:
        return self.value


SCOPE_LABELS = {scope.value: scope for scope in Scope}

#: Canonical presentation order for the four scope categories.
SCOPE_ORDER = (Scope.RELATIONSHIP, Scope.SITE, Scope.TASK, Scope.PROJECT)


def parse_scope(text: str) -> Scope:
    try:
        return SCOPE_LABELS[text.strip().lower()]
    except KeyError:
        raise ValueError(
            f"unknown scope {text!r}; expected one of {', '.join(SCOPE_LABELS)}"
        ) from None


@dataclass(frozen=True)
class FactorDef:
    """A declared influencing factor.

    ``enum_values`` is empty for ordinal factors and holds the closed
    value domain for enum-kinded ones.
    """

    factor_id: str
    scope: Scope
    name: str
    enum_values: tuple[str, ...] = ()

    @property
    def is_enum(self) -> bool:
        return bool(self.enum_values)

    @property
    def kind_label(self) -> str:
        if self.is_enum:
            return f"enum({','.join(self.enum_values)})"
        return "ordinal"


@dataclass(frozen=True)
class RiskDef:
    """A declared risk with a one-line impact description."""

    risk_id: str
    name: str
    impact: str = ""


class CatalogError(ValueError):
    """Duplicate or unknown catalog entry."""


@dataclass(frozen=True)
class FactorCatalog:
    """Ordered, id-unique collection of factor declarations."""

    factors: tuple[FactorDef, ...] = ()
    _by_id: dict[str, FactorDef] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_id: dict[str, FactorDef] = {}
        for factor in self.factors:
            if factor.factor_id in by_id:
                raise CatalogError(f"duplicate factor id {factor.factor_id!r}")
            by_id[factor.factor_id] = factor
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __contains__(self, factor_id: str) -> bool:
        return factor_id in self._by_id

    def get(self, factor_id: str) -> FactorDef:
        try:
            return self._by_id[factor_id]
        except KeyError:
            raise CatalogError(f"unknown factor id {factor_id!r}") from None

    def ids(self) -> tuple[str, ...]:
        return tuple(f.factor_id for f in self.factors)

    def in_scope(self, scope: Scope) -> tuple[FactorDef, ...]:
        return tuple(f for f in self.factors if f.scope == scope)

    def with_factor(self, factor: FactorDef) -> "FactorCatalog":
        if factor.factor_id in self._by_id:
            raise CatalogError(f"duplicate factor id {factor.factor_id!r}")
        return FactorCatalog(self.factors + (factor,))


@dataclass(frozen=True)
class RiskCatalog:
    """Ordered, id-unique collection of risk declarations."""

    risks: tuple[RiskDef, ...] = ()
    _by_id: dict[str, RiskDef] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_id: dict[str, RiskDef] = {}
        for risk in self.risks:
            if risk.risk_id in by_id:
                raise CatalogError(f"duplicate risk id {risk.risk_id!r}")
            by_id[risk.risk_id] = risk
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.risks)

    def __iter__(self):
        return iter(self.risks)

    def __contains__(self, risk_id: str) -> bool:
        return risk_id in self._by_id

    def get(self, risk_id: str) -> RiskDef:
        try:
            return self._by_id[risk_id]
        except KeyError:
            raise CatalogError(f"unknown risk id {risk_id!r}") from None

    def ids(self) -> tuple[str, ...]:
        return tuple(r.risk_id for r in self.risks)
