"""Parser for the rulebase document language.

A rulebase document is line-oriented UTF-8 text.  Each non-empty,
non-comment line declares a factor, a risk, or a rule:

    factor <id> scope=<project|site|task|relationship>
           kind=<ordinal|enum(v1,v2,...)> name="<display>"
    risk <id> name="<display>" impact="<one-line impact text>"
    rule <int>: <expr> -> <effect>[, <effect>...]
         desc="<text>" [prov="<text>"] [conf=<c>/<r>] [retired=yes]

Expressions use ``!`` > ``&`` > ``|`` precedence, parentheses, plain
factor atoms, and enum predicates ``factor = value``.  Effects are
``+ <risk-id>`` / ``- <risk-id>`` with ``*`` as the all-risks wildcard.
``#`` starts a comment outside quoted strings.  Declarations may appear
in any order; cross-references are checked once the whole document is
read, and all problems are reported together.
"""
from __future__ import annotations

from dataclasses import dataclass

from .catalog import (
    FactorCatalog,
    FactorDef,
    RiskCatalog,
    RiskDef,
    parse_scope,
)
from .rules import (
    Confidence,
    Rule,
    RuleExpr,
    Rulebase,
    RiskEffect,
    WILDCARD,
    and_,
    or_,
    EnumPredicate,
    FactorAtom,
    Not,
    validate_effects,
    validate_expr,
)

# ------------------------------------------------------------------- errors


@dataclass(frozen=True)
class ParseIssue:
    message: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"line {self.line}, col {self.col}: {self.message}"


class ParseError(ValueError):
    """Single syntax or reference error with source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.issue = ParseIssue(message, line, col)


class RulebaseError(ValueError):
    """Aggregated document problems, one ParseIssue per offense."""

    def __init__(self, issues: list[ParseIssue]):
        self.issues = list(issues)
        super().__init__(
            "invalid rulebase document:\n"
            + "\n".join(f"  {issue}" for issue in self.issues)
        )


# ---------------------------------------------------------------- tokenizer

_PUNCT = {"!", "&", "|", "(", ")", "=", "+", "-", ",", ":", "*", "/"}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "string" | a literal like "->" or "&"
    text: str
    line: int
    col: int


def tokenize_line(text: str, line_no: int) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        col = i + 1
        if c in " \t\r":
            i += 1
        elif c == "#":
            break
        elif c == '"':
            value, i = _read_string(text, i, line_no)
            tokens.append(Token("string", value, line_no, col))
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ident", text[i:j], line_no, col))
            i = j
        elif c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line_no, col))
            i = j
        elif c == "-" and i + 1 < n and text[i + 1] == ">":
            tokens.append(Token("->", "->", line_no, col))
            i += 2
        elif c in _PUNCT:
            tokens.append(Token(c, c, line_no, col))
            i += 1
        else:
            raise ParseError(f"unknown operator {c!r}", line_no, col)
    return tokens


def _read_string(text: str, start: int, line_no: int) -> tuple[str, int]:
    chars: list[str] = []
    i = start + 1
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            chars.append(text[i + 1])
            i += 2
        elif c == '"':
            return "".join(chars), i + 1
        else:
            chars.append(c)
            i += 1
    raise ParseError("unterminated string", line_no, start + 1)


class _Stream:
    def __init__(self, tokens: list[Token], line_no: int, line_len: int):
        self.tokens = tokens
        self.pos = 0
        self.line_no = line_no
        self.line_len = line_len

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token:
        token = self.peek()
        if token is None:
            raise ParseError("unexpected end of line", self.line_no,
                             self.line_len + 1)
        self.pos += 1
        return token

    def expect(self, kind: str, what: str | None = None) -> Token:
        token = self.peek()
        if token is None or token.kind != kind:
            expected = what or f"'{kind}'"
            if token is None:
                raise ParseError(f"expected {expected}", self.line_no,
                                 self.line_len + 1)
            raise ParseError(
                f"expected {expected}, found {token.text!r}",
                token.line, token.col,
            )
        self.pos += 1
        return token

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def require_end(self) -> None:
        token = self.peek()
        if token is not None:
            raise ParseError(f"unexpected {token.text!r}", token.line, token.col)


# -------------------------------------------------------------- expressions


def _parse_or(s: _Stream) -> RuleExpr:
    operands = [_parse_and(s)]
    while (t := s.peek()) is not None and t.kind == "|":
        s.next()
        operands.append(_parse_and(s))
    return or_(*operands)


def _parse_and(s: _Stream) -> RuleExpr:
    operands = [_parse_unary(s)]
    while (t := s.peek()) is not None and t.kind == "&":
        s.next()
        operands.append(_parse_unary(s))
    return and_(*operands)


def _parse_unary(s: _Stream) -> RuleExpr:
    token = s.peek()
    if token is not None and token.kind == "!":
        s.next()
        return Not(_parse_unary(s))
    return _parse_atom(s)


def _parse_atom(s: _Stream) -> RuleExpr:
    token = s.next()
    if token.kind == "(":
        expr = _parse_or(s)
        s.expect(")")
        return expr
    if token.kind == "ident":
        nxt = s.peek()
        if nxt is not None and nxt.kind == "=":
            s.next()
            value = s.expect("ident", "an enum value")
            return EnumPredicate(token.text, value.text)
        return FactorAtom(token.text)
    raise ParseError(
        f"expected a factor, '!' or '(', found {token.text!r}",
        token.line, token.col,
    )


def parse_expr(text: str, line_no: int = 1) -> RuleExpr:
    """Parse a bare expression (used by tests and rule modification)."""
    tokens = tokenize_line(text, line_no)
    stream = _Stream(tokens, line_no, len(text))
    expr = _parse_or(stream)
    stream.require_end()
    return expr


# -------------------------------------------------------------- rule lines


def _parse_effects(s: _Stream) -> tuple[RiskEffect, ...]:
    effects: list[RiskEffect] = []
    while True:
        token = s.next()
        if token.kind not in ("+", "-"):
            raise ParseError(
                f"expected '+' or '-' before an effect, found {token.text!r}",
                token.line, token.col,
            )
        target = s.next()
        if target.kind == "*":
            risk_id = WILDCARD
        elif target.kind == "ident":
            risk_id = target.text
        else:
            raise ParseError(
                f"expected a risk id or '*', found {target.text!r}",
                target.line, target.col,
            )
        effects.append(RiskEffect(token.kind == "+", risk_id))
        nxt = s.peek()
        if nxt is None or nxt.kind != ",":
            return tuple(effects)
        s.next()


_RULE_ATTRS = ("desc", "prov", "conf", "retired")


def _parse_rule_attrs(s: _Stream) -> dict[str, object]:
    attrs: dict[str, object] = {}
    while not s.at_end():
        key = s.expect("ident", "an attribute name")
        if key.text not in _RULE_ATTRS:
            raise ParseError(
                f"unknown rule attribute {key.text!r}", key.line, key.col)
        if key.text in attrs:
            raise ParseError(
                f"duplicate attribute {key.text!r}", key.line, key.col)
        s.expect("=")
        if key.text in ("desc", "prov"):
            attrs[key.text] = s.expect("string", "a quoted string").text
        elif key.text == "conf":
            confirmations = int(s.expect("int", "a count").text)
            s.expect("/")
            refutations = int(s.expect("int", "a count").text)
            attrs["conf"] = Confidence(confirmations, refutations)
        else:
            flag = s.expect("ident", "'yes' or 'no'")
            if flag.text not in ("yes", "no"):
                raise ParseError(
                    f"retired must be 'yes' or 'no', found {flag.text!r}",
                    flag.line, flag.col,
                )
            attrs["retired"] = flag.text == "yes"
    return attrs


def parse_rule(text: str, line_no: int = 1) -> Rule:
    """Parse one rule source line.

    The leading ``rule`` keyword used in rulebase documents is optional,
    so both document lines and bare ``<id>: <expr> -> <effects>`` forms
    are accepted.
    """
    lines = [l for l in text.splitlines() if l.strip()]
    if len(lines) != 1:
        raise ParseError("expected exactly one rule line", line_no, 1)
    tokens = tokenize_line(lines[0], line_no)
    stream = _Stream(tokens, line_no, len(lines[0]))
    first = stream.peek()
    if first is not None and first.kind == "ident" and first.text == "rule":
        stream.next()
    return _parse_rule_body(stream)


def _parse_rule_body(s: _Stream) -> Rule:
    id_token = s.expect("int", "a rule id")
    rule_id = int(id_token.text)
    if rule_id < 1:
        raise ParseError("rule id must be a positive integer",
                         id_token.line, id_token.col)
    s.expect(":")
    expr = _parse_or(s)
    arrow = s.peek()
    if arrow is None or arrow.kind != "->":
        if arrow is None:
            raise ParseError("expected '->' after the expression",
                             s.line_no, s.line_len + 1)
        raise ParseError(
            f"expected '->' after the expression, found {arrow.text!r}",
            arrow.line, arrow.col,
        )
    s.next()
    effects = _parse_effects(s)
    attrs = _parse_rule_attrs(s)
    return Rule(
        rule_id=rule_id,
        expr=expr,
        effects=effects,
        description=attrs.get("desc", ""),
        provenance_note=attrs.get("prov", ""),
        confidence=attrs.get("conf", Confidence()),
        retired=attrs.get("retired", False),
    )


# ------------------------------------------------------------ declarations


def _parse_attr_map(s: _Stream, allowed: tuple[str, ...]) -> dict[str, Token]:
    attrs: dict[str, Token] = {}
    while not s.at_end():
        key = s.expect("ident", "an attribute name")
        if key.text not in allowed:
            raise ParseError(f"unknown attribute {key.text!r}",
                             key.line, key.col)
        if key.text in attrs:
            raise ParseError(f"duplicate attribute {key.text!r}",
                             key.line, key.col)
        s.expect("=")
        if key.text == "kind":
            attrs[key.text] = _read_kind(s)
        elif key.text == "scope":
            attrs[key.text] = s.expect("ident", "a scope")
        else:
            attrs[key.text] = s.expect("string", "a quoted string")
    return attrs


def _read_kind(s: _Stream) -> Token:
    """Read ``ordinal`` or ``enum(v1,v2,...)`` and re-pack it as one token."""
    head = s.expect("ident", "'ordinal' or 'enum'")
    if head.text == "ordinal":
        return head
    if head.text != "enum":
        raise ParseError(
            f"kind must be 'ordinal' or 'enum(...)', found {head.text!r}",
            head.line, head.col,
        )
    s.expect("(")
    values = [s.expect("ident", "an enum value").text]
    while (t := s.peek()) is not None and t.kind == ",":
        s.next()
        values.append(s.expect("ident", "an enum value").text)
    s.expect(")")
    return Token("ident", "enum:" + ",".join(values), head.line, head.col)


def _parse_factor_line(s: _Stream) -> FactorDef:
    id_token = s.expect("ident", "a factor id")
    attrs = _parse_attr_map(s, ("scope", "kind", "name"))
    if "scope" not in attrs:
        raise ParseError(f"factor {id_token.text!r} is missing scope=",
                         id_token.line, id_token.col)
    scope_token = attrs["scope"]
    try:
        scope = parse_scope(scope_token.text)
    except ValueError as exc:
        raise ParseError(str(exc), scope_token.line, scope_token.col) from None
    enum_values: tuple[str, ...] = ()
    if "kind" in attrs and attrs["kind"].text.startswith("enum:"):
        enum_values = tuple(attrs["kind"].text[len("enum:"):].split(","))
        if len(set(enum_values)) != len(enum_values):
            kind_token = attrs["kind"]
            raise ParseError("duplicate enum values",
                             kind_token.line, kind_token.col)
    name = attrs["name"].text if "name" in attrs else id_token.text
    return FactorDef(id_token.text, scope, name, enum_values)


def _parse_risk_line(s: _Stream) -> RiskDef:
    id_token = s.expect("ident", "a risk id")
    attrs = _parse_attr_map(s, ("name", "impact"))
    name = attrs["name"].text if "name" in attrs else id_token.text
    impact = attrs["impact"].text if "impact" in attrs else ""
    return RiskDef(id_token.text, name, impact)


def parse_factor(text: str, line_no: int = 1) -> FactorDef:
    """Parse one factor declaration line (leading ``factor`` optional)."""
    lines = [l for l in text.splitlines() if l.strip()]
    if len(lines) != 1:
        raise ParseError("expected exactly one factor line", line_no, 1)
    tokens = tokenize_line(lines[0], line_no)
    stream = _Stream(tokens, line_no, len(lines[0]))
    first = stream.peek()
    if first is not None and first.kind == "ident" and first.text == "factor":
        stream.next()
    factor = _parse_factor_line(stream)
    stream.require_end()
    return factor


# ----------------------------------------------------------- whole document


def parse_rulebase(text: str) -> Rulebase:
    """Parse and validate a complete rulebase document.

    Raises RulebaseError listing every syntax error, duplicate id, and
    dangling cross-reference found, with source locations.
    """
    issues: list[ParseIssue] = []
    factors: list[tuple[FactorDef, int]] = []
    risks: list[tuple[RiskDef, int]] = []
    rule_lines: list[tuple[Rule, int]] = []

    for line_no, line in enumerate(text.splitlines(), start=1):
        try:
            tokens = tokenize_line(line, line_no)
        except ParseError as exc:
            issues.append(exc.issue)
            continue
        if not tokens:
            continue
        stream = _Stream(tokens, line_no, len(line))
        head = tokens[0]
        try:
            if head.kind == "ident" and head.text == "factor":
                stream.next()
                factors.append((_parse_factor_line(stream), line_no))
                stream.require_end()
            elif head.kind == "ident" and head.text == "risk":
                stream.next()
                risks.append((_parse_risk_line(stream), line_no))
                stream.require_end()
            elif head.kind == "ident" and head.text == "rule":
                stream.next()
                rule_lines.append((_parse_rule_body(stream), line_no))
            else:
                issues.append(ParseIssue(
                    f"expected 'factor', 'risk' or 'rule', found {head.text!r}",
                    head.line, head.col,
                ))
        except ParseError as exc:
            issues.append(exc.issue)

    seen_factor_ids: set[str] = set()
    unique_factors: list[FactorDef] = []
    for factor, decl_line in factors:
        if factor.factor_id in seen_factor_ids:
            issues.append(ParseIssue(
                f"duplicate factor id {factor.factor_id!r}", decl_line, 1))
        else:
            seen_factor_ids.add(factor.factor_id)
            unique_factors.append(factor)
    seen_risk_ids: set[str] = set()
    unique_risks: list[RiskDef] = []
    for risk, decl_line in risks:
        if risk.risk_id in seen_risk_ids:
            issues.append(ParseIssue(
                f"duplicate risk id {risk.risk_id!r}", decl_line, 1))
        else:
            seen_risk_ids.add(risk.risk_id)
            unique_risks.append(risk)

    factor_catalog = FactorCatalog(tuple(unique_factors))
    risk_catalog = RiskCatalog(tuple(unique_risks))

    seen_rule_ids: set[int] = set()
    for rule, line_no in rule_lines:
        prefix = f"rule {rule.rule_id}"
        if rule.rule_id in seen_rule_ids:
            issues.append(ParseIssue(
                f"duplicate rule id {rule.rule_id}", line_no, 1))
        seen_rule_ids.add(rule.rule_id)
        for problem in validate_expr(rule.expr, factor_catalog):
            issues.append(ParseIssue(f"{prefix}: {problem}", line_no, 1))
        for problem in validate_effects(rule.effects, risk_catalog):
            issues.append(ParseIssue(f"{prefix}: {problem}", line_no, 1))

    if issues:
        raise RulebaseError(issues)

    return Rulebase(
        factors=factor_catalog,
        risks=risk_catalog,
        rules=tuple(rule for rule, _ in rule_lines),
    )
