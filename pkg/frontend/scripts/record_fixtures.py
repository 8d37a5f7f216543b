#!/usr/bin/env python3
"""Record API fixtures for the frontend contract tests.

Spins up the real service in-process (seeded KB plus the miniature
two-site KB) and writes selected responses as JSON files.  Timestamps in
response envelopes are pinned so the fixtures stay byte-stable.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from riskgrid.kb import KBStore, kb_from_rulebase
from riskgrid.parser import parse_rulebase
from riskgrid.projectfile import parse_project, project_to_dict
from riskgrid.service import create_app

ROOT = Path(__file__).resolve().parents[2]
FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
PINNED_TS = "2026-08-11T00:00:00+00:00"


def pin(body: dict) -> dict:
    if isinstance(body.get("meta"), dict) and "generated_at" in body["meta"]:
        body["meta"]["generated_at"] = PINNED_TS
    return body


def dump(name: str, body: dict) -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    path = FIXTURES / name
    path.write_text(json.dumps(pin(body), indent=2, ensure_ascii=False,
                               sort_keys=False) + "\n", "utf-8")
    print(f"wrote {path.relative_to(ROOT)}")


def record_seed_service(tmp: Path) -> None:
    store = KBStore(tmp / "seed-kb")
    with TestClient(create_app(store, tmp / "seed-data")) as client:
        dump("factors.json", client.get("/api/factors").json())
        dump("rules.json", client.get("/api/rules").json())
        dump("risks.json", client.get("/api/risks").json())
        dump("kb.json", client.get("/api/kb").json())

        factors = store.load().rulebase.factors
        demo = parse_project((ROOT / "demo" / "demo.project").read_text("utf-8"),
                             factors)
        demo_dict = project_to_dict(demo)
        dump("project_demo.json", demo_dict)
        assert client.put("/api/projects/demo",
                          json=demo_dict).status_code == 200

        high = client.post(
            "/api/projects/demo/assess?threshold=high&mode=strict")
        assert high.status_code == 200
        dump("report_demo_high.json", high.json())

        very_high = client.post(
            "/api/projects/demo/assess?threshold=very_high&mode=strict")
        assert very_high.status_code == 200
        dump("report_demo_very_high.json", very_high.json())

        # a fresh project: structure only, nothing assessed
        fresh = {
            "id": "fresh",
            "coordinating_site": "hq",
            "sites": [{"id": "hq", "name": "HQ"},
                      {"id": "lab", "name": "Lab"}],
            "tasks": [{"id": "t1", "name": "T1"}],
            "assignments": {"t1": "lab"},
            "bindings": {"project": {}, "site": {}, "task": {}, "pair": {}},
        }
        assert client.put("/api/projects/fresh", json=fresh).status_code == 200
        fresh_report = client.post(
            "/api/projects/fresh/assess?threshold=high&mode=strict")
        assert fresh_report.status_code == 200
        dump("report_fresh.json", fresh_report.json())

        # optimistic-concurrency conflict
        ok = client.post("/api/kb/events", json={
            "kb_version": 1, "kind": "confirm", "target": "1",
            "note": "fixture"})
        assert ok.status_code == 200
        stale = client.post("/api/kb/events", json={
            "kb_version": 1, "kind": "confirm", "target": "2"})
        assert stale.status_code == 409
        dump("conflict_409.json", stale.json())


def record_two_site_service(tmp: Path) -> None:
    rulebase = parse_rulebase(
        (ROOT / "demo" / "two_site.rules").read_text("utf-8"))
    store = KBStore(tmp / "two-site-kb")
    store.init(kb_from_rulebase(rulebase))
    with TestClient(create_app(store, tmp / "two-site-data")) as client:
        variant_b = project_to_dict(parse_project(
            (ROOT / "demo" / "two_site_b.project").read_text("utf-8"),
            rulebase.factors))
        variant_c = project_to_dict(parse_project(
            (ROOT / "demo" / "two_site_c.project").read_text("utf-8"),
            rulebase.factors))
        assert client.put("/api/projects/two_site_b",
                          json=variant_b).status_code == 200

        report = client.post(
            "/api/projects/two_site_b/assess?threshold=high&mode=strict")
        assert report.status_code == 200
        dump("report_two_site_b.json", report.json())

        compare = client.post("/api/compare", json={
            "projects": [variant_b, variant_c], "threshold": "high",
            "mode": "strict"})
        assert compare.status_code == 200
        dump("compare_two_site.json", compare.json())

        identical = client.post("/api/compare", json={
            "projects": [variant_b, variant_b], "threshold": "high"})
        assert identical.status_code == 200
        dump("compare_identical.json", identical.json())

        # a third variant: clone of B with softened relationship values
        variant_d = json.loads(json.dumps(variant_b))
        variant_d["id"] = "two_site_d"
        variant_d["bindings"]["pair"]["site_a+site_b"] = {
            "cultural_difference": "medium",
            "common_working_experiences": "medium",
        }
        three = client.post("/api/compare", json={
            "projects": [variant_b, variant_c, variant_d],
            "threshold": "high"})
        assert three.status_code == 200
        dump("compare_three.json", three.json())


def main() -> int:
    import tempfile
    with tempfile.TemporaryDirectory() as tmp:
        record_seed_service(Path(tmp))
        record_two_site_service(Path(tmp))
    return 0


if __name__ == "__main__":
    sys.exit(main())
