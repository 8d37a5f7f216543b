"""HTTP/JSON service exposing assessment, comparison, and KB maintenance.

The service is a thin shell over the same core the CLI uses, so both
produce identical report documents for identical inputs.  State lives in
plain files under the data directory: the KB store plus one canonical
project file per stored project.  Reads are lock-free; KB commits go
through a single writer lock with an optimistic version check (the
client echoes the version it based its change on; a mismatch is a 409).

Error model: 400 with a machine-readable ``errors`` list for anything
invalid, 404 for unknown resources, 409 for version conflicts.
"""
from __future__ import annotations

import json
import re
import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse

from .catalog import SCOPE_ORDER
from .engine import EvalMode, EvalTypeError, parse_mode
from .kb import (
    EventKind,
    KBError,
    KBStore,
    KnowledgeBase,
    VersionConflict,
    load_seeded_kb,
    make_event,
)
from .parser import ParseError, RulebaseError
from .project import (
    SITE_COUNT_FACTOR,
    ProjectError,
    assess_project,
    compare_scenarios,
)
from .projectfile import (
    parse_project,
    project_from_dict,
    project_to_dict,
    serialize_project,
)
from .report import comparison_to_dict, report_to_dict
from .rules import serialize_expr, serialize_rule
from .scale import ScaleLevel, parse_level

_PROJECT_ID_RE = re.compile(r"^[a-zA-Z0-9_][a-zA-Z0-9_.-]*$")

#: Event kinds a client may post (the seed event is never posted).
_POSTABLE_KINDS = {k.value for k in EventKind if k is not EventKind.SEED}


def _errors(status: int, messages: list[str], **extra) -> JSONResponse:
    body = {"errors": [{"message": m} for m in messages]}
    body.update(extra)
    return JSONResponse(status_code=status, content=body)


def _meta() -> dict:
    return {"generated_at": datetime.now(timezone.utc).isoformat(
        timespec="seconds")}


def create_app(store: KBStore, data_dir: str | Path,
               ui_dir: str | Path | None = None) -> FastAPI:
    """Build the service around a KB store and a project directory.

    ``ui_dir`` optionally mounts a built browser client at ``/`` so the
    UI and the API share one origin.
    """
    data_dir = Path(data_dir)
    projects_dir = data_dir / "projects"
    write_lock = threading.Lock()

    if not store.exists():
        store.init(load_seeded_kb())

    app = FastAPI(title="riskgrid", version="0.1.0")

    def current_kb() -> KnowledgeBase:
        return store.load()

    def project_path(project_id: str) -> Path:
        return projects_dir / f"{project_id}.project"

    # ------------------------------------------------------------- catalog

    @app.get("/api/factors")
    def get_factors():
        kb = current_kb()
        groups = []
        for scope in SCOPE_ORDER:
            factors = []
            for factor in kb.rulebase.factors.in_scope(scope):
                item = {
                    "id": factor.factor_id,
                    "name": factor.name,
                    "kind": "enum" if factor.is_enum else "ordinal",
                }
                if factor.is_enum:
                    item["values"] = list(factor.enum_values)
                if factor.factor_id == SITE_COUNT_FACTOR:
                    # derived from the assignments, never assessed by hand
                    item["derived"] = True
                factors.append(item)
            groups.append({"scope": scope.value, "factors": factors})
        return {"kb_version": kb.version, "groups": groups}

    @app.get("/api/rules")
    def get_rules():
        kb = current_kb()
        rules = []
        for rule in kb.rulebase.rules:
            rules.append({
                "id": rule.rule_id,
                "text": serialize_rule(rule),
                "expression": serialize_expr(rule.expr),
                "effects": [str(e) for e in rule.effects],
                "description": rule.description,
                "provenance": rule.provenance_note,
                "confidence": {
                    "confirmations": rule.confidence.confirmations,
                    "refutations": rule.confidence.refutations,
                },
                "retired": rule.retired,
            })
        return {"kb_version": kb.version, "rules": rules}

    @app.get("/api/risks")
    def get_risks():
        kb = current_kb()
        return {
            "kb_version": kb.version,
            "risks": [{"id": r.risk_id, "name": r.name, "impact": r.impact}
                      for r in kb.rulebase.risks],
        }

    # ------------------------------------------------------------ projects

    @app.get("/api/projects")
    def list_projects():
        ids = sorted(p.stem for p in projects_dir.glob("*.project"))
        return {"projects": ids}

    @app.get("/api/projects/{project_id}")
    def get_project(project_id: str):
        path = project_path(project_id)
        if not path.exists():
            return _errors(404, [f"unknown project {project_id!r}"])
        kb = current_kb()
        try:
            project = parse_project(path.read_text("utf-8"),
                                    kb.rulebase.factors)
        except ProjectError as exc:
            return _errors(400, exc.problems)
        return {"kb_version": kb.version, "project": project_to_dict(project)}

    @app.put("/api/projects/{project_id}")
    def put_project(project_id: str, body: dict = Body(...)):
        if not _PROJECT_ID_RE.match(project_id):
            return _errors(400, [f"invalid project id {project_id!r}"])
        kb = current_kb()
        data = dict(body)
        data.setdefault("id", project_id)
        if data["id"] != project_id:
            return _errors(
                400, [f"body id {data['id']!r} does not match URL id "
                      f"{project_id!r}"])
        try:
            project = project_from_dict(data, kb.rulebase.factors)
        except ProjectError as exc:
            return _errors(400, exc.problems)
        projects_dir.mkdir(parents=True, exist_ok=True)
        project_path(project_id).write_text(serialize_project(project), "utf-8")
        return {"stored": project_id, "kb_version": kb.version}

    @app.get("/api/projects/{project_id}/file",
             response_class=PlainTextResponse)
    def get_project_file(project_id: str):
        path = project_path(project_id)
        if not path.exists():
            return PlainTextResponse(f"unknown project {project_id!r}\n",
                                     status_code=404)
        return path.read_text("utf-8")

    # ---------------------------------------------------------- assessment

    def _eval_params(threshold: str, mode: str):
        problems = []
        level = ScaleLevel.HIGH
        eval_mode = EvalMode.STRICT
        try:
            level = parse_level(threshold)
        except ValueError as exc:
            problems.append(str(exc))
        try:
            eval_mode = parse_mode(mode)
        except ValueError as exc:
            problems.append(str(exc))
        return level, eval_mode, problems

    @app.post("/api/projects/{project_id}/assess")
    def assess(project_id: str, threshold: str = "high",
               mode: str = "strict"):
        path = project_path(project_id)
        if not path.exists():
            return _errors(404, [f"unknown project {project_id!r}"])
        level, eval_mode, problems = _eval_params(threshold, mode)
        if problems:
            return _errors(400, problems)
        kb = current_kb()
        try:
            project = parse_project(path.read_text("utf-8"),
                                    kb.rulebase.factors)
            report = assess_project(project, kb.rulebase, level, eval_mode)
        except (ProjectError, EvalTypeError) as exc:
            messages = exc.problems if isinstance(exc, ProjectError) else [str(exc)]
            return _errors(400, messages)
        return {
            "meta": _meta(),
            "report": report_to_dict(report, kb.rulebase, kb.version),
        }

    @app.post("/api/compare")
    def compare(body: dict = Body(...)):
        level, eval_mode, problems = _eval_params(
            str(body.get("threshold", "high")), str(body.get("mode", "strict")))
        raw_projects = body.get("projects")
        if not isinstance(raw_projects, list) or len(raw_projects) < 2:
            problems.append("'projects' must list at least 2 stored ids "
                            "or inline project objects")
        if problems:
            return _errors(400, problems)

        kb = current_kb()
        variants = []
        for item in raw_projects:
            try:
                if isinstance(item, str):
                    path = project_path(item)
                    if not path.exists():
                        return _errors(404, [f"unknown project {item!r}"])
                    variants.append(parse_project(path.read_text("utf-8"),
                                                  kb.rulebase.factors))
                elif isinstance(item, dict):
                    variants.append(project_from_dict(item,
                                                      kb.rulebase.factors))
                else:
                    return _errors(400, ["'projects' entries must be ids or "
                                         "project objects"])
            except ProjectError as exc:
                return _errors(400, exc.problems)
        try:
            comparison = compare_scenarios(variants, kb.rulebase, level,
                                           eval_mode)
        except (ProjectError, EvalTypeError) as exc:
            messages = exc.problems if isinstance(exc, ProjectError) else [str(exc)]
            return _errors(400, messages)
        return {
            "meta": _meta(),
            "comparison": comparison_to_dict(comparison, kb.rulebase,
                                             kb.version),
        }

    # -------------------------------------------------------------- the KB

    @app.get("/api/kb")
    def get_kb():
        kb = current_kb()
        changelog = []
        for version, event in enumerate(kb.changelog, start=1):
            changelog.append(json.loads(event.to_json(version)))
        return {"version": kb.version, "changelog": changelog}

    @app.post("/api/kb/events")
    def post_event(body: dict = Body(...)):
        problems = []
        kind_text = str(body.get("kind", ""))
        if kind_text not in _POSTABLE_KINDS:
            problems.append(
                f"kind must be one of {', '.join(sorted(_POSTABLE_KINDS))}")
        if "kb_version" not in body:
            problems.append("'kb_version' (the version this change is based "
                            "on) is required")
        else:
            try:
                int(body["kb_version"])
            except (TypeError, ValueError):
                problems.append("'kb_version' must be an integer")
        if problems:
            return _errors(400, problems)

        expected = int(body["kb_version"])
        kind = EventKind(kind_text)
        payload = body.get("payload") or {}
        if not isinstance(payload, dict):
            return _errors(400, ["'payload' must be an object"])
        payload = {str(k): str(v) for k, v in payload.items()}
        target = str(body.get("target", ""))
        note = str(body.get("note", ""))

        with write_lock:
            if kind is EventKind.MODIFY and "old" not in payload:
                try:
                    kb = store.load()
                    payload["old"] = serialize_rule(
                        kb.rulebase.rule(int(target)))
                except (KeyError, ValueError):
                    return _errors(400, [f"unknown rule id {target!r}"])
            event = make_event(kind, target=target, note=note, **payload)
            try:
                kb = store.commit(event, expected_version=expected)
            except VersionConflict as exc:
                return _errors(409, [str(exc)], kb_version=exc.actual)
            except (KBError, ParseError, RulebaseError) as exc:
                return _errors(400, [str(exc)])
        return {"kb_version": kb.version}

    # ---------------------------------------------------------------- misc

    @app.get("/api/health")
    def health():
        return {"status": "ok", "kb_version": current_kb().version}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=Path(ui_dir), html=True),
                  name="ui")

    return app
