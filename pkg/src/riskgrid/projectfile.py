"""Project file parsing and serialization.

A project is a UTF-8 key/value document with these sections:

    [project]            id, coordinating_site, optional site_count_scale
    [sites]              <site-id> = <display name>
    [tasks]              <task-id> = <display name>
    [assignments]        <task-id> = <site-id>
    [bindings.project]   <factor-id> = <level or enum value>
    [bindings.site.<id>]
    [bindings.task.<id>]
    [bindings.pair.<idA>+<idB>]

Scale values are written as the literal level names (``very_low`` ..
``very_high``); enum factors take one of their declared values.  ``#``
starts a comment.  Serialization is canonical (fixed section order,
sorted binding keys), so parse -> serialize -> parse is stable.

The same structure maps onto JSON for the HTTP API via
``project_to_dict`` / ``project_from_dict``.
"""
from __future__ import annotations

import configparser

from .catalog import FactorCatalog
from .engine import Binding
from .project import (
    DEFAULT_SITE_COUNT_SCALE,
    ProjectAssessment,
    ProjectError,
    Site,
    Task,
    pair_key,
    validate_project,
)
from .scale import ScaleLevel, parse_level


def _new_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        delimiters=("=",),
        comment_prefixes=("#",),
        inline_comment_prefixes=("#",),
        interpolation=None,
        strict=True,
    )
    parser.optionxform = str
    return parser


def parse_project(text: str, factors: FactorCatalog) -> ProjectAssessment:
    """Parse and fully validate a project document against a catalog."""
    parser = _new_parser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ProjectError([str(exc)]) from None

    problems: list[str] = []

    if not parser.has_section("project"):
        raise ProjectError(["missing [project] section"])
    project_id = parser.get("project", "id", fallback="").strip()
    coordinating = parser.get("project", "coordinating_site", fallback="").strip()
    if not project_id:
        problems.append("[project] needs an 'id'")
    if not coordinating:
        problems.append("[project] needs a 'coordinating_site'")
    for key in parser["project"]:
        if key not in ("id", "coordinating_site", "site_count_scale"):
            problems.append(f"[project] unknown key {key!r}")

    scale = DEFAULT_SITE_COUNT_SCALE
    raw_scale = parser.get("project", "site_count_scale", fallback="").strip()
    if raw_scale:
        try:
            scale = _parse_site_count_scale(raw_scale)
        except ValueError as exc:
            problems.append(f"[project] site_count_scale: {exc}")

    sites = tuple(Site(site_id, name.strip())
                  for site_id, name in _section_items(parser, "sites"))
    tasks = tuple(Task(task_id, name.strip())
                  for task_id, name in _section_items(parser, "tasks"))
    assignments = {task_id: site_id.strip()
                   for task_id, site_id in _section_items(parser, "assignments")}

    project_binding: dict[str, object] = {}
    site_bindings: dict[str, dict[str, object]] = {}
    task_bindings: dict[str, dict[str, object]] = {}
    pair_bindings: dict[tuple[str, str], dict[str, object]] = {}

    for section in parser.sections():
        if section in ("project", "sites", "tasks", "assignments"):
            continue
        if section == "bindings.project":
            project_binding = _parse_binding(parser, section, factors, problems)
        elif section.startswith("bindings.site."):
            site_id = section[len("bindings.site."):]
            site_bindings[site_id] = _parse_binding(parser, section, factors,
                                                    problems)
        elif section.startswith("bindings.task."):
            task_id = section[len("bindings.task."):]
            task_bindings[task_id] = _parse_binding(parser, section, factors,
                                                    problems)
        elif section.startswith("bindings.pair."):
            raw_pair = section[len("bindings.pair."):]
            parts = raw_pair.split("+")
            if len(parts) != 2 or not all(parts):
                problems.append(
                    f"[{section}] pair sections are named "
                    f"bindings.pair.<idA>+<idB>")
                continue
            pair_bindings[pair_key(*parts)] = _parse_binding(
                parser, section, factors, problems)
        else:
            problems.append(f"unknown section [{section}]")

    project = ProjectAssessment(
        project_id=project_id,
        coordinating_site_id=coordinating,
        sites=sites,
        tasks=tasks,
        assignments=assignments,
        project_binding=project_binding,
        site_bindings=site_bindings,
        task_bindings=task_bindings,
        pair_bindings=pair_bindings,
        site_count_scale=scale,
    )
    problems.extend(validate_project(project, factors))
    if problems:
        raise ProjectError(problems)
    return project


def _section_items(parser: configparser.ConfigParser,
                   section: str) -> list[tuple[str, str]]:
    if not parser.has_section(section):
        return []
    return list(parser[section].items())


def _parse_binding(parser: configparser.ConfigParser, section: str,
                   factors: FactorCatalog,
                   problems: list[str]) -> dict[str, object]:
    binding: dict[str, object] = {}
    for factor_id, raw in parser[section].items():
        value = raw.strip()
        if factor_id in factors and not factors.get(factor_id).is_enum:
            try:
                binding[factor_id] = parse_level(value)
            except ValueError as exc:
                problems.append(f"[{section}] {factor_id}: {exc}")
        else:
            # Unknown factors and enum values are kept verbatim;
            # validate_project reports them with full context.
            binding[factor_id] = value
    return binding


def _parse_site_count_scale(raw: str) -> tuple[tuple[int, ScaleLevel], ...]:
    entries: list[tuple[int, ScaleLevel]] = []
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        count_text, _, level_text = chunk.partition(":")
        if not level_text:
            raise ValueError(
                f"entry {chunk!r} is not of the form <count>:<level>")
        count = int(count_text.strip())
        entries.append((count, parse_level(level_text)))
    if not entries:
        raise ValueError("mapping is empty")
    counts = [c for c, _ in entries]
    if counts != sorted(set(counts)):
        raise ValueError("counts must be strictly increasing")
    return tuple(entries)


# ------------------------------------------------------------ serialization


def serialize_project(project: ProjectAssessment) -> str:
    """Canonical project document text."""
    lines: list[str] = ["[project]", f"id = {project.project_id}",
                        f"coordinating_site = {project.coordinating_site_id}"]
    if project.site_count_scale != DEFAULT_SITE_COUNT_SCALE:
        mapping = ", ".join(f"{count}:{level}"
                            for count, level in project.site_count_scale)
        lines.append(f"site_count_scale = {mapping}")

    lines += ["", "[sites]"]
    lines += [f"{site.site_id} = {site.name}" for site in project.sites]
    lines += ["", "[tasks]"]
    lines += [f"{task.task_id} = {task.name}" for task in project.tasks]
    lines += ["", "[assignments]"]
    lines += [f"{task_id} = {site_id}"
              for task_id, site_id in sorted(project.assignments.items())]

    def binding_lines(header: str, binding: dict[str, object]) -> list[str]:
        out = ["", f"[{header}]"]
        out += [f"{factor_id} = {value}"
                for factor_id, value in sorted(binding.items())]
        return out

    if project.project_binding:
        lines += binding_lines("bindings.project", project.project_binding)
    for site_id, binding in sorted(project.site_bindings.items()):
        lines += binding_lines(f"bindings.site.{site_id}", binding)
    for task_id, binding in sorted(project.task_bindings.items()):
        lines += binding_lines(f"bindings.task.{task_id}", binding)
    for pair, binding in sorted(project.pair_bindings.items()):
        lines += binding_lines(f"bindings.pair.{pair[0]}+{pair[1]}", binding)

    return "\n".join(lines) + "\n"


# --------------------------------------------------------------- JSON shape


def project_to_dict(project: ProjectAssessment) -> dict:
    """JSON-ready mirror of the project document structure."""
    data: dict = {
        "id": project.project_id,
        "coordinating_site": project.coordinating_site_id,
        "sites": [{"id": s.site_id, "name": s.name} for s in project.sites],
        "tasks": [{"id": t.task_id, "name": t.name} for t in project.tasks],
        "assignments": dict(sorted(project.assignments.items())),
        "bindings": {
            "project": _binding_to_dict(project.project_binding),
            "site": {site_id: _binding_to_dict(b)
                     for site_id, b in sorted(project.site_bindings.items())},
            "task": {task_id: _binding_to_dict(b)
                     for task_id, b in sorted(project.task_bindings.items())},
            "pair": {f"{a}+{b}": _binding_to_dict(binding)
                     for (a, b), binding in sorted(project.pair_bindings.items())},
        },
    }
    if project.site_count_scale != DEFAULT_SITE_COUNT_SCALE:
        data["site_count_scale"] = {
            str(count): str(level) for count, level in project.site_count_scale}
    return data


def _binding_to_dict(binding: dict[str, object] | Binding) -> dict[str, str]:
    return {factor_id: str(value)
            for factor_id, value in sorted(binding.items())}


def project_from_dict(data: dict, factors: FactorCatalog) -> ProjectAssessment:
    """Validate and build a project from its JSON shape."""
    if not isinstance(data, dict):
        raise ProjectError(["project body must be a JSON object"])
    problems: list[str] = []

    project_id = str(data.get("id", "")).strip()
    coordinating = str(data.get("coordinating_site", "")).strip()
    if not project_id:
        problems.append("project needs an 'id'")
    if not coordinating:
        problems.append("project needs a 'coordinating_site'")

    sites = tuple(Site(str(s.get("id", "")), str(s.get("name", s.get("id", ""))))
                  for s in data.get("sites", []))
    tasks = tuple(Task(str(t.get("id", "")), str(t.get("name", t.get("id", ""))))
                  for t in data.get("tasks", []))
    assignments = {str(k): str(v)
                   for k, v in (data.get("assignments") or {}).items()}

    bindings = data.get("bindings") or {}

    def coerce(binding: dict, label: str) -> dict[str, object]:
        out: dict[str, object] = {}
        for factor_id, raw in (binding or {}).items():
            value = str(raw)
            if factor_id in factors and not factors.get(factor_id).is_enum:
                try:
                    out[factor_id] = parse_level(value)
                except ValueError as exc:
                    problems.append(f"{label}.{factor_id}: {exc}")
            else:
                out[factor_id] = value
        return out

    project_binding = coerce(bindings.get("project"), "bindings.project")
    site_bindings = {str(site_id): coerce(b, f"bindings.site.{site_id}")
                     for site_id, b in (bindings.get("site") or {}).items()}
    task_bindings = {str(task_id): coerce(b, f"bindings.task.{task_id}")
                     for task_id, b in (bindings.get("task") or {}).items()}
    pair_bindings: dict[tuple[str, str], dict[str, object]] = {}
    for raw_pair, binding in (bindings.get("pair") or {}).items():
        parts = str(raw_pair).split("+")
        if len(parts) != 2 or not all(parts):
            problems.append(
                f"bindings.pair.{raw_pair}: pair keys look like <idA>+<idB>")
            continue
        pair_bindings[pair_key(*parts)] = coerce(
            binding, f"bindings.pair.{raw_pair}")

    scale = DEFAULT_SITE_COUNT_SCALE
    raw_scale = data.get("site_count_scale")
    if raw_scale:
        try:
            chunks = ", ".join(f"{count}:{level}"
                               for count, level in sorted(
                                   ((int(c), str(l)) for c, l in raw_scale.items())))
            scale = _parse_site_count_scale(chunks)
        except (ValueError, AttributeError) as exc:
            problems.append(f"site_count_scale: {exc}")

    project = ProjectAssessment(
        project_id=project_id,
        coordinating_site_id=coordinating,
        sites=sites,
        tasks=tasks,
        assignments=assignments,
        project_binding=project_binding,
        site_bindings=site_bindings,
        task_bindings=task_bindings,
        pair_bindings=pair_bindings,
        site_count_scale=scale,
    )
    problems.extend(validate_project(project, factors))
    if problems:
        raise ProjectError(problems)
    return project
