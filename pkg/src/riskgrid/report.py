"""Deterministic report rendering shared by the CLI and the HTTP service.

Everything here is a pure function of (knowledge-base version, project,
threshold, mode): no timestamps, no environment lookups, so identical
inputs give byte-identical text, JSON, and CSV.  Transport-level
metadata such as generation time belongs to the service envelope, never
to the report body.
"""
from __future__ import annotations

import csv
import io
import json

from .engine import Indeterminate, Relevance
from .project import ScenarioComparison, ScenarioReport
from .rules import Rulebase, serialize_expr

# ---------------------------------------------------------------- helpers


def _relevance_text(relevance: Relevance | None) -> str:
    if relevance is None:
        return "-"
    if isinstance(relevance, Indeterminate):
        return "indeterminate"
    return str(relevance)


# ------------------------------------------------------------- assessment


def report_to_dict(report: ScenarioReport, rulebase: Rulebase,
                   kb_version: int) -> dict:
    contexts = []
    for result in report.contexts:
        contexts.append({
            "task": result.context.task_id,
            "site": result.context.remote_site_id,
            "counterpart": result.context.counterpart_site_id,
            "ranked": [_entry_dict(entry, rulebase)
                       for entry in result.ranking.ranked],
            "indeterminate": [_entry_dict(entry, rulebase)
                              for entry in result.ranking.indeterminate],
        })
    risks = []
    for entry in report.risk_summary:
        risk = rulebase.risks.get(entry.risk_id)
        risks.append({
            "risk": entry.risk_id,
            "name": risk.name,
            "impact": risk.impact,
            "increasing": [{"rule": rule_id, "relevance": str(level)}
                           for rule_id, level in entry.increasing],
            "mitigating": [{"rule": rule_id, "relevance": str(level)}
                           for rule_id, level in entry.mitigating],
        })
    return {
        "project": report.project_id,
        "kb_version": kb_version,
        "threshold": str(report.threshold),
        "mode": str(report.mode),
        "contexts": contexts,
        "risks": risks,
    }


def _entry_dict(entry, rulebase: Rulebase) -> dict:
    rule = rulebase.rule(entry.rule_id)
    data: dict = {
        "rule": entry.rule_id,
        "relevance": _relevance_text(entry.relevance),
        "expression": serialize_expr(rule.expr),
        "effects": [str(e) for e in entry.effects],
        "description": rule.description,
    }
    if isinstance(entry.relevance, Indeterminate):
        data["missing"] = sorted(entry.relevance.missing)
    return data


def report_to_text(report: ScenarioReport, rulebase: Rulebase,
                   kb_version: int) -> str:
    lines = [
        "RISK ASSESSMENT REPORT",
        f"project: {report.project_id}",
        f"knowledge base: version {kb_version}",
        f"threshold: {report.threshold}",
        f"mode: {report.mode}",
        f"contexts: {len(report.contexts)}",
    ]
    for result in report.contexts:
        lines.append("")
        lines.append(f"context: {result.context.label}")
        lines.append(f"  reported rules (relevance >= {report.threshold}):")
        if not result.ranking.ranked:
            lines.append("    none")
        for position, entry in enumerate(result.ranking.ranked, start=1):
            rule = rulebase.rule(entry.rule_id)
            effects = ", ".join(str(e) for e in entry.effects)
            lines.append(
                f"    {position}. rule {entry.rule_id} [{entry.relevance}] "
                f"{serialize_expr(rule.expr)} -> {effects}")
            if rule.description:
                lines.append(f"       {rule.description}")
        if result.ranking.indeterminate:
            lines.append("  indeterminate rules:")
            for entry in result.ranking.indeterminate:
                missing = ", ".join(sorted(entry.relevance.missing))
                lines.append(f"    rule {entry.rule_id} (missing: {missing})")
    lines.append("")
    lines.append("risk summary (reported rules only):")
    if not report.risk_summary:
        lines.append("  none")
    for entry in report.risk_summary:
        parts = []
        if entry.increasing:
            inc = ", ".join(f"rule {rid} ({level})"
                            for rid, level in entry.increasing)
            parts.append(f"increased by {inc}")
        if entry.mitigating:
            mit = ", ".join(f"rule {rid} ({level})"
                            for rid, level in entry.mitigating)
            parts.append(f"mitigated by {mit}")
        lines.append(f"  {entry.risk_id}: " + "; ".join(parts))
    return "\n".join(lines) + "\n"


def report_to_csv(report: ScenarioReport, rulebase: Rulebase,
                  kb_version: int) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["project", "kb_version", "task", "site", "counterpart",
                     "rule", "relevance", "missing", "expression", "effects",
                     "description"])
    for result in report.contexts:
        context = result.context
        for entry in (*result.ranking.ranked, *result.ranking.indeterminate):
            rule = rulebase.rule(entry.rule_id)
            missing = ""
            if isinstance(entry.relevance, Indeterminate):
                missing = " ".join(sorted(entry.relevance.missing))
            writer.writerow([
                report.project_id, kb_version, context.task_id,
                context.remote_site_id, context.counterpart_site_id,
                entry.rule_id, _relevance_text(entry.relevance), missing,
                serialize_expr(rule.expr),
                "; ".join(str(e) for e in entry.effects),
                rule.description,
            ])
    return buffer.getvalue()


def render_report(report: ScenarioReport, rulebase: Rulebase, kb_version: int,
                  fmt: str) -> str:
    if fmt == "text":
        return report_to_text(report, rulebase, kb_version)
    if fmt == "json":
        return json.dumps(report_to_dict(report, rulebase, kb_version),
                          indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        return report_to_csv(report, rulebase, kb_version)
    raise ValueError(f"unknown format {fmt!r}")


# ------------------------------------------------------------- comparison


def comparison_to_dict(comparison: ScenarioComparison, rulebase: Rulebase,
                       kb_version: int) -> dict:
    return {
        "kb_version": kb_version,
        "threshold": str(comparison.threshold),
        "mode": str(comparison.mode),
        "variants": list(comparison.labels),
        "rules": [
            {
                "rule": row.rule_id,
                "expression": serialize_expr(rulebase.rule(row.rule_id).expr),
                "relevance": [_relevance_text(r) if r is not None else None
                              for r in row.relevance],
                "reported": list(row.reported),
            }
            for row in comparison.rule_rows
        ],
        "risks": [
            {
                "risk": row.risk_id,
                "increasing": [str(v) if v is not None else None
                               for v in row.increasing],
                "mitigating": [str(v) if v is not None else None
                               for v in row.mitigating],
            }
            for row in comparison.risk_rows
        ],
        "delta": list(comparison.delta),
    }


def comparison_to_text(comparison: ScenarioComparison, rulebase: Rulebase,
                       kb_version: int) -> str:
    lines = [
        "SCENARIO COMPARISON",
        f"knowledge base: version {kb_version}",
        f"threshold: {comparison.threshold}",
        f"mode: {comparison.mode}",
        f"variants: {', '.join(comparison.labels)}",
        "",
        "rule relevance by variant ('*' = reported at threshold):",
    ]
    width = max((len(label) for label in comparison.labels), default=8)
    width = max(width, len("indeterminate") + 1)
    header = "  rule  " + "".join(label.ljust(width + 2)
                                  for label in comparison.labels)
    lines.append(header.rstrip())
    for row in comparison.rule_rows:
        cells = []
        for value, reported in zip(row.relevance, row.reported):
            text = _relevance_text(value)
            if reported:
                text += "*"
            cells.append(text.ljust(width + 2))
        lines.append((f"  {row.rule_id:<4}  " + "".join(cells)).rstrip())

    lines.append("")
    lines.append("delta (reported status differs between variants):")
    if not comparison.delta:
        lines.append("  none")
    for rule_id in comparison.delta:
        row = next(r for r in comparison.rule_rows if r.rule_id == rule_id)
        where = [label for label, reported in zip(comparison.labels, row.reported)
                 if reported]
        lines.append(
            f"  rule {rule_id}: reported in {', '.join(where) or 'none'}")

    if comparison.risk_rows:
        lines.append("")
        lines.append("risk summary by variant (increasing / mitigating):")
        for row in comparison.risk_rows:
            cells = []
            for inc, mit in zip(row.increasing, row.mitigating):
                cells.append(f"{_relevance_text(inc)}/{_relevance_text(mit)}")
            lines.append(f"  {row.risk_id}: " + "  ".join(cells))
    return "\n".join(lines) + "\n"


def comparison_to_csv(comparison: ScenarioComparison, rulebase: Rulebase,
                      kb_version: int) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["rule", "expression"]
                    + [f"relevance_{label}" for label in comparison.labels]
                    + [f"reported_{label}" for label in comparison.labels]
                    + ["in_delta"])
    for row in comparison.rule_rows:
        writer.writerow(
            [row.rule_id, serialize_expr(rulebase.rule(row.rule_id).expr)]
            + [_relevance_text(v) if v is not None else "" for v in row.relevance]
            + ["yes" if r else "no" for r in row.reported]
            + ["yes" if row.rule_id in comparison.delta else "no"])
    return buffer.getvalue()


def render_comparison(comparison: ScenarioComparison, rulebase: Rulebase,
                      kb_version: int, fmt: str) -> str:
    if fmt == "text":
        return comparison_to_text(comparison, rulebase, kb_version)
    if fmt == "json":
        return json.dumps(comparison_to_dict(comparison, rulebase, kb_version),
                          indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        return comparison_to_csv(comparison, rulebase, kb_version)
    raise ValueError(f"unknown format {fmt!r}")
