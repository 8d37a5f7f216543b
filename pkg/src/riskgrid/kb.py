"""Versioned knowledge base with an event-sourced update workflow.

The KB is an immutable value: a rulebase plus a version counter and the
append-only changelog that produced it.  Every committed update (confirm
or refute a rule after a retrospective, modify, add, retire a rule, add
a factor) yields a new value with version + 1, and folding the changelog
over the seed always reproduces the current state.

On disk a KB lives in a directory holding the seed snapshot
(``rulebase.rules``, never rewritten) and ``changelog.log`` with one
JSON event per line; both are plain text and diff cleanly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from importlib import resources
from pathlib import Path

from .parser import ParseError, RulebaseError, parse_factor, parse_rule, parse_rulebase
from .rules import Rule, Rulebase, validate_effects, validate_expr

SEED_FACTOR_COUNT = 23
SEED_RULE_COUNT = 36
SEED_RISK_COUNT = 9

_SEED_TIMESTAMP = "1970-01-01T00:00:00+00:00"

RULEBASE_FILENAME = "rulebase.rules"
CHANGELOG_FILENAME = "changelog.log"


class KBError(ValueError):
    """An update event failed validation; the KB value is unchanged."""


class SeedError(RuntimeError):
    """The shipped seed rulebase does not match its expected shape."""


class VersionConflict(Exception):
    """Optimistic-concurrency failure: the KB moved on under the caller."""

    def __init__(self, expected: int, actual: int):
        super().__init__(
            f"knowledge base is at version {actual}, caller expected {expected}")
        self.expected = expected
        self.actual = actual


class EventKind(Enum):
    SEED = "seed"
    CONFIRM = "confirm"
    REFUTE = "refute"
    MODIFY = "modify"
    ADD_RULE = "add_rule"
    RETIRE_RULE = "retire_rule"
    ADD_FACTOR = "add_factor"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class UpdateEvent:
    kind: EventKind
    target: str = ""
    payload: tuple[tuple[str, str], ...] = ()
    timestamp: str = ""
    note: str = ""

    def get(self, key: str) -> str:
        for k, v in self.payload:
            if k == key:
                return v
        raise KBError(f"{self.kind} event is missing payload key {key!r}")

    def to_json(self, version: int) -> str:
        return json.dumps(
            {
                "version": version,
                "kind": self.kind.value,
                "target": self.target,
                "payload": dict(self.payload),
                "note": self.note,
                "ts": self.timestamp,
            },
            ensure_ascii=False,
        )

    @staticmethod
    def from_json(line: str) -> tuple["UpdateEvent", int]:
        data = json.loads(line)
        event = UpdateEvent(
            kind=EventKind(data["kind"]),
            target=str(data.get("target", "")),
            payload=tuple(sorted(data.get("payload", {}).items())),
            timestamp=data.get("ts", ""),
            note=data.get("note", ""),
        )
        return event, int(data["version"])


def make_event(kind: EventKind, target: str = "", note: str = "",
               timestamp: str | None = None, **payload: str) -> UpdateEvent:
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return UpdateEvent(
        kind=kind,
        target=target,
        payload=tuple(sorted(payload.items())),
        timestamp=timestamp,
        note=note,
    )


@dataclass(frozen=True)
class KnowledgeBase:
    version: int
    rulebase: Rulebase
    changelog: tuple[UpdateEvent, ...]


# ---------------------------------------------------------------- seed load


def seed_text() -> str:
    return resources.files("riskgrid").joinpath("seed.rules").read_text("utf-8")


def kb_from_rulebase(rulebase: Rulebase,
                     note: str = "loaded rulebase") -> KnowledgeBase:
    """Wrap a parsed rulebase as a version-1 KB (used for bare .rules files)."""
    seed_event = UpdateEvent(
        kind=EventKind.SEED,
        payload=(
            ("factors", str(len(rulebase.factors))),
            ("risks", str(len(rulebase.risks))),
            ("rules", str(len(rulebase.rules))),
        ),
        timestamp=_SEED_TIMESTAMP,
        note=note,
    )
    return KnowledgeBase(version=1, rulebase=rulebase, changelog=(seed_event,))


def load_seeded_kb() -> KnowledgeBase:
    """Parse the shipped seed rulebase; abort on any shape mismatch."""
    try:
        rulebase = parse_rulebase(seed_text())
    except RulebaseError as exc:
        raise SeedError(f"seed rulebase does not parse: {exc}") from exc
    counts = (len(rulebase.factors), len(rulebase.rules), len(rulebase.risks))
    expected = (SEED_FACTOR_COUNT, SEED_RULE_COUNT, SEED_RISK_COUNT)
    if counts != expected:
        raise SeedError(
            "seed rulebase is corrupt: expected "
            f"{expected[0]} factors / {expected[1]} rules / {expected[2]} risks, "
            f"found {counts[0]} / {counts[1]} / {counts[2]}")
    seed_event = UpdateEvent(
        kind=EventKind.SEED,
        payload=(
            ("factors", str(counts[0])),
            ("risks", str(counts[2])),
            ("rules", str(counts[1])),
        ),
        timestamp=_SEED_TIMESTAMP,
        note="seeded knowledge base",
    )
    return KnowledgeBase(version=1, rulebase=rulebase, changelog=(seed_event,))


# ------------------------------------------------------------------ updates


def record_retrospective(kb: KnowledgeBase, rule_id: int, outcome: str,
                         note: str = "",
                         timestamp: str | None = None) -> KnowledgeBase:
    """Register a finished-project lesson: the rule was confirmed or refuted."""
    if outcome not in ("confirmed", "refuted"):
        raise KBError(f"outcome must be 'confirmed' or 'refuted', got {outcome!r}")
    kind = EventKind.CONFIRM if outcome == "confirmed" else EventKind.REFUTE
    return apply_change(kb, make_event(kind, target=str(rule_id), note=note,
                                       timestamp=timestamp))


def apply_change(kb: KnowledgeBase, event: UpdateEvent) -> KnowledgeBase:
    """Apply one update event, returning the next KB version.

    Raises KBError when the event does not validate against the current
    state; the input value is never touched.
    """
    rulebase = _apply_to_rulebase(kb.rulebase, event)
    return KnowledgeBase(
        version=kb.version + 1,
        rulebase=rulebase,
        changelog=kb.changelog + (event,),
    )


def _apply_to_rulebase(rulebase: Rulebase, event: UpdateEvent) -> Rulebase:
    if event.kind in (EventKind.CONFIRM, EventKind.REFUTE):
        rule = _existing_rule(rulebase, event.target)
        confidence = (rule.confidence.confirmed()
                      if event.kind is EventKind.CONFIRM
                      else rule.confidence.refuted())
        return _swap_rule(rulebase, replace(rule, confidence=confidence))

    if event.kind is EventKind.RETIRE_RULE:
        rule = _existing_rule(rulebase, event.target)
        if rule.retired:
            raise KBError(f"rule {rule.rule_id} is already retired")
        return _swap_rule(rulebase, replace(rule, retired=True))

    if event.kind is EventKind.MODIFY:
        rule = _existing_rule(rulebase, event.target)
        new_rule = _parse_rule_payload(event.get("new"))
        if new_rule.rule_id != rule.rule_id:
            raise KBError(
                f"modify event targets rule {rule.rule_id} but the new text "
                f"carries id {new_rule.rule_id}")
        new_rule = replace(
            new_rule,
            description=new_rule.description or rule.description,
            provenance_note=new_rule.provenance_note or rule.provenance_note,
            confidence=rule.confidence,
            retired=rule.retired,
        )
        _check_rule(rulebase, new_rule)
        return _swap_rule(rulebase, new_rule)

    if event.kind is EventKind.ADD_RULE:
        new_rule = _parse_rule_payload(event.get("rule"))
        expected_id = rulebase.next_rule_id()
        if new_rule.rule_id != expected_id:
            raise KBError(
                f"new rule must take the next free id {expected_id}, "
                f"got {new_rule.rule_id}")
        _check_rule(rulebase, new_rule)
        return rulebase.with_rules(rulebase.rules + (new_rule,))

    if event.kind is EventKind.ADD_FACTOR:
        try:
            factor = parse_factor(event.get("factor"))
        except ParseError as exc:
            raise KBError(f"invalid factor declaration: {exc}") from None
        if factor.factor_id in rulebase.factors:
            raise KBError(f"factor {factor.factor_id!r} already declared")
        return replace(rulebase, factors=rulebase.factors.with_factor(factor))

    raise KBError(f"event kind {event.kind} cannot be applied")


def _existing_rule(rulebase: Rulebase, target: str) -> Rule:
    try:
        rule_id = int(target)
    except ValueError:
        raise KBError(f"event target {target!r} is not a rule id") from None
    try:
        return rulebase.rule(rule_id)
    except KeyError:
        raise KBError(f"unknown rule id {rule_id}") from None


def _parse_rule_payload(text: str) -> Rule:
    try:
        return parse_rule(text)
    except ParseError as exc:
        raise KBError(f"invalid rule text: {exc}") from None


def _check_rule(rulebase: Rulebase, rule: Rule) -> None:
    problems = validate_expr(rule.expr, rulebase.factors)
    problems += validate_effects(rule.effects, rulebase.risks)
    if problems:
        raise KBError(
            f"rule {rule.rule_id} does not validate: " + "; ".join(problems))


def _swap_rule(rulebase: Rulebase, rule: Rule) -> Rulebase:
    rules = tuple(rule if r.rule_id == rule.rule_id else r
                  for r in rulebase.rules)
    return rulebase.with_rules(rules)


def replay(events: tuple[UpdateEvent, ...] | list[UpdateEvent]) -> KnowledgeBase:
    """Fold a changelog (starting with the seed event) back into a KB."""
    events = tuple(events)
    if not events or events[0].kind is not EventKind.SEED:
        raise KBError("changelog must start with the seed event")
    kb = load_seeded_kb()
    kb = KnowledgeBase(version=1, rulebase=kb.rulebase, changelog=events[:1])
    for event in events[1:]:
        kb = apply_change(kb, event)
    return kb


# -------------------------------------------------------------- persistence


class KBStore:
    """Directory-backed KB: seed snapshot plus append-only changelog."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    @property
    def rulebase_path(self) -> Path:
        return self.directory / RULEBASE_FILENAME

    @property
    def changelog_path(self) -> Path:
        return self.directory / CHANGELOG_FILENAME

    def exists(self) -> bool:
        return self.rulebase_path.exists() and self.changelog_path.exists()

    def init(self, kb: KnowledgeBase | None = None) -> KnowledgeBase:
        """Write a fresh store (refusing to clobber an existing one)."""
        if self.exists():
            raise KBError(f"knowledge base already exists in {self.directory}")
        kb = kb or load_seeded_kb()
        self.directory.mkdir(parents=True, exist_ok=True)
        self.rulebase_path.write_text(kb.rulebase.serialize(), "utf-8")
        lines = [event.to_json(version)
                 for version, event in enumerate(kb.changelog, start=1)]
        self.changelog_path.write_text("\n".join(lines) + "\n", "utf-8")
        return kb

    def load(self) -> KnowledgeBase:
        """Rebuild the current KB by folding the changelog over the snapshot."""
        if not self.exists():
            raise KBError(
                f"no knowledge base in {self.directory} "
                f"(expected {RULEBASE_FILENAME} and {CHANGELOG_FILENAME})")
        base = parse_rulebase(self.rulebase_path.read_text("utf-8"))
        events: list[UpdateEvent] = []
        for raw in self.changelog_path.read_text("utf-8").splitlines():
            if raw.strip():
                event, version = UpdateEvent.from_json(raw)
                if version != len(events) + 1:
                    raise KBError(
                        f"changelog is not contiguous at version {version}")
                events.append(event)
        if not events or events[0].kind is not EventKind.SEED:
            raise KBError("changelog must start with the seed event")
        kb = KnowledgeBase(version=1, rulebase=base, changelog=(events[0],))
        for event in events[1:]:
            kb = apply_change(kb, event)
        return kb

    def commit(self, event: UpdateEvent,
               expected_version: int | None = None) -> KnowledgeBase:
        """Validate, apply, and append one event.

        ``expected_version`` enables optimistic concurrency: the commit is
        rejected with VersionConflict when the stored KB has moved on.
        """
        kb = self.load()
        if expected_version is not None and kb.version != expected_version:
            raise VersionConflict(expected_version, kb.version)
        new_kb = apply_change(kb, event)
        with self.changelog_path.open("a", encoding="utf-8") as fh:
            fh.write(event.to_json(new_kb.version) + "\n")
        return new_kb


def describe_event(event: UpdateEvent, version: int) -> str:
    """One human-readable changelog line (used by ``riskctl kb log``)."""
    parts = [f"v{version}", event.timestamp, event.kind.value]
    if event.target:
        parts.append(f"target={event.target}")
    for key, value in event.payload:
        parts.append(f"{key}={value!r}" if " " in value else f"{key}={value}")
    if event.note:
        parts.append(f"note={event.note!r}")
    return "  ".join(parts)
