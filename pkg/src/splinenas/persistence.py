"""Canonical study files: save, load, validate, lock.

Files are JSON with a fixed key order and floats printed with 17 significant
digits, so equal studies serialize to identical bytes — diffs stay readable
and resumed sessions can be compared byte-for-byte. History entries carry a
monotone sequence number rather than wall-clock time for the same reason.
"""

from __future__ import annotations

import json
import math
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Sequence

import numpy as np

from .driver import PHASES, Pending, Study, StudyConfig
from .errors import (
    InvalidConfig,
    InvariantViolation,
    IoError,
    ParseError,
    StudyLocked,
    VersionMismatch,
)
from .fixtures import FixtureTable, load_fixture
from .halton_search import SearchConfig
from .paramspace import Dimension, ParamSpace, contains
from .spline import POINT_KINDS, SupportPoint

FORMAT_VERSION = 1


# --- canonical emitter -------------------------------------------------

def _fmt_float(v: float) -> str:
    if not math.isfinite(v):
        raise InvariantViolation(f"cannot serialize non-finite number {v!r}")
    return format(v, ".17g")


def _emit(obj: Any, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_emit(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{_emit(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _point_doc(p: SupportPoint) -> dict:
    return {"x": [float(v) for v in p.x], "y": float(p.y), "kind": p.kind}


def dumps_study(study: Study) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "study": {
            "id": study.id,
            "space": {
                "dims": [
                    {"name": d.name, "min": d.min, "max": d.max, "integer": d.integer}
                    for d in study.space.dims
                ],
                "normalize": study.space.normalize,
            },
            "config": {
                "direction": study.config.direction,
                "epsilon": study.config.epsilon,
                "residual_tol": study.config.residual_tol,
                "delta_min": study.config.delta_min,
                "max_evaluations": study.config.max_evaluations,
                "search": {
                    "samples_per_level": study.config.search.samples_per_level,
                    "levels": study.config.search.levels,
                    "shrink_factor": study.config.search.shrink_factor,
                    "stall_tolerance": study.config.search.stall_tolerance,
                    "max_total_samples": study.config.search.max_total_samples,
                },
            },
            "points": [_point_doc(p) for p in study.points],
            "phase": study.phase,
        },
        "history": study.history,
    }
    if study.pending is not None:
        doc["study"]["pending"] = {
            "x": [float(v) for v in study.pending.x],
            "predicted": float(study.pending.predicted),
        }
    if study.x_top is not None:
        doc["study"]["x_top"] = _point_doc(study.x_top)
    return _emit(doc, 0) + "\n"


def save_study(study: Study, path) -> None:
    """Atomic canonical write; identical studies produce identical bytes."""
    path = Path(path)
    data = dumps_study(study)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(data, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as err:
        raise IoError(f"cannot write study file {path}: {err}") from err


# --- parsing and validation --------------------------------------------

def _require_keys(obj: dict, required: set[str], optional: set[str], where: str) -> None:
    keys = set(obj)
    missing = required - keys
    unknown = keys - required - optional
    if missing:
        raise ParseError(f"{where}: missing fields {sorted(missing)}")
    if unknown:
        raise ParseError(f"{where}: unknown fields {sorted(unknown)}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvariantViolation(f"{where}: expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise InvariantViolation(f"{where}: value {value!r} is not finite")
    return v


def _coords(value, d: int, where: str) -> tuple[float, ...]:
    if not isinstance(value, list) or len(value) != d:
        raise InvariantViolation(f"{where}: expected {d} coordinates")
    return tuple(_number(v, where) for v in value)


def _parse_point(doc, space: ParamSpace, where: str) -> SupportPoint:
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected an object")
    _require_keys(doc, {"x", "y", "kind"}, set(), where)
    x = _coords(doc["x"], space.d, f"{where}.x")
    y = _number(doc["y"], f"{where}.y")
    if doc["kind"] not in POINT_KINDS:
        raise InvariantViolation(f"{where}: unknown kind {doc['kind']!r}")
    if not contains(space, x):
        raise InvariantViolation(f"{where}: point {x} is outside the box")
    return SupportPoint(x=x, y=y, kind=doc["kind"])


def loads_study(text: str) -> Study:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    if "format_version" not in doc:
        raise ParseError("missing format_version")
    version = doc["format_version"]
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"format_version {version!r}, supported: {FORMAT_VERSION}")
    _require_keys(doc, {"format_version", "study", "history"}, set(), "file")

    s = doc["study"]
    if not isinstance(s, dict):
        raise ParseError("study must be an object")
    _require_keys(
        s,
        {"id", "space", "config", "points", "phase"},
        {"pending", "x_top"},
        "study",
    )

    sp = s["space"]
    _require_keys(sp, {"dims", "normalize"}, set(), "space")
    if not isinstance(sp["dims"], list):
        raise ParseError("space.dims must be a list")
    try:
        dims = []
        for i, dd in enumerate(sp["dims"]):
            _require_keys(dd, {"name", "min", "max", "integer"}, set(), f"dim[{i}]")
            dims.append(
                Dimension(
                    name=dd["name"],
                    min=_number(dd["min"], f"dim[{i}].min"),
                    max=_number(dd["max"], f"dim[{i}].max"),
                    integer=bool(dd["integer"]),
                )
            )
        space = ParamSpace(dims=tuple(dims), normalize=bool(sp["normalize"]))
    except InvalidConfig as err:
        raise InvariantViolation(f"invalid space: {err}") from err

    c = s["config"]
    _require_keys(
        c,
        {"direction", "epsilon", "residual_tol", "delta_min", "max_evaluations", "search"},
        set(),
        "config",
    )
    sc = c["search"]
    _require_keys(
        sc,
        {"samples_per_level", "levels", "shrink_factor", "stall_tolerance", "max_total_samples"},
        set(),
        "config.search",
    )
    try:
        config = StudyConfig(
            direction=c["direction"],
            epsilon=_number(c["epsilon"], "epsilon"),
            residual_tol=_number(c["residual_tol"], "residual_tol"),
            delta_min=_number(c["delta_min"], "delta_min"),
            max_evaluations=int(c["max_evaluations"]),
            search=SearchConfig(
                samples_per_level=int(sc["samples_per_level"]),
                levels=int(sc["levels"]),
                shrink_factor=_number(sc["shrink_factor"], "shrink_factor"),
                stall_tolerance=_number(sc["stall_tolerance"], "stall_tolerance"),
                max_total_samples=int(sc["max_total_samples"]),
            ),
        )
    except (InvalidConfig, ValueError, TypeError) as err:
        raise InvariantViolation(f"invalid config: {err}") from err

    if not isinstance(s["points"], list):
        raise ParseError("study.points must be a list")
    points = [_parse_point(p, space, f"points[{i}]") for i, p in enumerate(s["points"])]

    phase = s["phase"]
    if phase not in PHASES:
        raise InvariantViolation(f"unknown phase {phase!r}")

    pending = None
    if "pending" in s:
        pd = s["pending"]
        _require_keys(pd, {"x", "predicted"}, set(), "pending")
        pending = Pending(
            x=_coords(pd["x"], space.d, "pending.x"),
            predicted=_number(pd["predicted"], "pending.predicted"),
        )
        if not contains(space, pending.x):
            raise InvariantViolation(f"pending point {pending.x} is outside the box")

    x_top = None
    if "x_top" in s:
        x_top = _parse_point(s["x_top"], space, "x_top")
        if points:
            best = max(p.y for p in points) if config.direction == "maximize" else min(p.y for p in points)
            if x_top.y != best or all(p.x != x_top.x for p in points):
                raise InvariantViolation("x_top does not match the best measured point")
        else:
            raise InvariantViolation("x_top set on a study with no points")

    history = doc["history"]
    if not isinstance(history, list):
        raise ParseError("history must be a list")
    last_seq = 0
    for i, entry in enumerate(history):
        if not isinstance(entry, dict) or "seq" not in entry or "event" not in entry:
            raise ParseError(f"history[{i}]: expected an object with seq and event")
        if not isinstance(entry["seq"], int) or entry["seq"] <= last_seq:
            raise InvariantViolation(f"history[{i}]: sequence numbers must increase")
        last_seq = entry["seq"]

    return Study(
        id=str(s["id"]),
        space=space,
        config=config,
        points=points,
        pending=pending,
        x_top=x_top,
        phase=phase,
        history=history,
    )


def load_study(path) -> Study:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise IoError(f"cannot read study file {path}: {err}") from err
    return loads_study(text)


# --- advisory lock ------------------------------------------------------

@contextmanager
def study_lock(path) -> Iterator[None]:
    """Advisory single-writer lock via an adjacent .lock file."""
    lock_path = Path(str(path) + ".lock")
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise StudyLocked(
            f"{lock_path} exists; another process is driving this study "
            "(delete the lock file if that process is gone)"
        ) from None
    except OSError as err:
        raise IoError(f"cannot create lock file {lock_path}: {err}") from err
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        yield
    finally:
        try:
            os.unlink(lock_path)
        except OSError:
            pass


# --- fixture replay ------------------------------------------------------

def study_from_fixture(
    fixture: FixtureTable | str,
    *,
    include: Sequence[str] = ("initial",),
    normalize: bool | None = None,
    config: StudyConfig | None = None,
    id: str | None = None,
) -> Study:
    """Study seeded with a table's measured rows, ready to fit.

    The replay keeps the table's literal coordinates (its near-center row is
    not the generated midpoint), so the study starts in the iterating phase
    rather than re-queueing the design.
    """
    if isinstance(fixture, str):
        fixture = load_fixture(fixture)
    space = fixture.space
    if normalize is not None and normalize != space.normalize:
        space = ParamSpace(dims=space.dims, normalize=normalize)
    config = config or StudyConfig()

    points = [
        SupportPoint(x=row.x, y=row.measured, kind=row.kind)
        for row in fixture.rows
        if row.kind in include and row.measured is not None and not row.extrapolated
    ]
    study = Study(
        id=id or f"replay-{fixture.name}",
        space=space,
        config=config,
        points=points,
        pending=None,
        x_top=None,
        phase="iterating",
        history=[],
    )
    for p in points:
        if study.x_top is None or (
            p.y > study.x_top.y if config.direction == "maximize" else p.y < study.x_top.y
        ):
            study.x_top = p
    return study
