"""Resumable ask-tell optimization loop over the spline surrogate.

A study moves through phases::

    initial-design -> iterating -> converged | budget-exhausted

During the initial design the study hands out unmeasured corner-design
points (in any order, without holding state). Once the design is measured it
alternates fit -> extremum search -> measure, recording each measurement and
stopping when prediction and measurement agree within epsilon or the
evaluation budget is spent. Extending the box re-opens the design phase for
whatever new corners are not yet covered.

Measurements are never discarded: the support-point list is append-only and
``x_top`` always tracks the best *measured* configuration, so a poor
surrogate estimate costs one extra measurement but cannot lose progress.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from . import spline
from .errors import (
    EvaluatorFailed,
    FitFailed,
    Inadmissible,
    InvalidConfig,
    NoAdmissiblePoint,
    NonFiniteMeasurement,
    OutOfBox,
    ShrinkNotAllowed,
    SplineFitError,
    StudyStateError,
    UnexpectedPoint,
)
from .halton_search import Direction, SearchConfig, search
from .paramspace import (
    ParamSpace,
    Point,
    admissible,
    contains,
    initial_design,
    snap,
)
from .spline import SupportPoint

Phase = Literal["initial-design", "iterating", "converged", "budget-exhausted"]
PHASES = ("initial-design", "iterating", "converged", "budget-exhausted")

PHASE_INITIAL = "initial-design"
PHASE_ITERATING = "iterating"
PHASE_CONVERGED = "converged"
PHASE_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class StudyConfig:
    direction: Direction = "maximize"
    epsilon: float = 0.5
    residual_tol: float = 1e-6
    delta_min: float = 1e-3
    max_evaluations: int = 100
    search: SearchConfig = field(default_factory=SearchConfig)

    def __post_init__(self):
        if self.direction not in ("maximize", "minimize"):
            raise InvalidConfig(f"unknown direction {self.direction!r}")
        if not self.epsilon > 0:
            raise InvalidConfig("epsilon must be positive")
        if not self.residual_tol > 0:
            raise InvalidConfig("residual_tol must be positive")
        if self.delta_min < 0:
            raise InvalidConfig("delta_min must be non-negative")
        if self.max_evaluations < 1:
            raise InvalidConfig("max_evaluations must be positive")


@dataclass(frozen=True)
class Pending:
    x: Point
    predicted: float


@dataclass(frozen=True)
class Suggestion:
    x: Point
    predicted: Optional[float]
    rationale: Literal["initial-design", "spline-argmax"]


@dataclass
class Study:
    id: str
    space: ParamSpace
    config: StudyConfig
    points: list[SupportPoint]
    pending: Optional[Pending]
    x_top: Optional[SupportPoint]
    phase: str
    history: list[dict]


def _as_point(x) -> Point:
    return tuple(float(v) for v in x)


def _better(config: StudyConfig, a: float, b: float) -> bool:
    return a > b if config.direction == "maximize" else a < b


def _log(study: Study, event: str, **payload) -> None:
    entry = {"seq": len(study.history) + 1, "event": event}
    entry.update(payload)
    study.history.append(entry)


def init_study(space: ParamSpace, config: StudyConfig, id: str | None = None) -> Study:
    if config.max_evaluations < 2 * space.d + 3:
        raise InvalidConfig(
            f"max_evaluations {config.max_evaluations} cannot cover the "
            f"{2 * space.d + 3}-point initial design"
        )
    return Study(
        id=id or f"study-{uuid.uuid4().hex[:8]}",
        space=space,
        config=config,
        points=[],
        pending=None,
        x_top=None,
        phase=PHASE_INITIAL,
        history=[],
    )


def _uncovered_design(space: ParamSpace, points: Sequence[SupportPoint], delta_min: float) -> list[Point]:
    existing = [p.x for p in points]
    return [
        cand
        for cand in initial_design(space)
        if admissible(space, cand, existing, delta_min)
    ]


def design_queue(study: Study) -> list[Point]:
    """Unmeasured initial-design points, in design order."""
    if study.phase != PHASE_INITIAL:
        return []
    return _uncovered_design(study.space, study.points, study.config.delta_min)


def propose(space: ParamSpace, config: StudyConfig, points: Sequence[SupportPoint]) -> Suggestion:
    """Fit on the given points and search the box for the next measurement.

    Pure function of its inputs; :func:`suggest` adds the study bookkeeping.
    The argmax is snapped to the integer grid; if snapping lands too close to
    an existing point, the best admissible sample from the search trace is
    taken instead (deterministic: value order, then sample order).
    """
    try:
        model = spline.fit(space, points, config.residual_tol)
    except SplineFitError as err:
        raise FitFailed(f"surrogate fit failed: {err}") from err

    report = search(
        model,
        space.lows,
        space.highs,
        config.direction,
        config.search,
        keep_trace=True,
    )
    existing = [p.x for p in points]

    chosen: Point | None = None
    candidate = snap(space, report.best_x)
    if admissible(space, candidate, existing, config.delta_min):
        chosen = candidate
    else:
        sign = 1.0 if config.direction == "maximize" else -1.0
        order = np.argsort(-sign * report.trace_values, kind="stable")
        seen = {candidate}
        for i in order:
            cand = snap(space, report.trace_points[i])
            if cand in seen:
                continue
            seen.add(cand)
            if admissible(space, cand, existing, config.delta_min):
                chosen = cand
                break
        if chosen is None:
            raise NoAdmissiblePoint(
                "every searched sample is within delta_min of a support point"
            )

    return Suggestion(x=chosen, predicted=spline.evaluate(model, chosen), rationale="spline-argmax")


def suggest(study: Study) -> Suggestion:
    """Next configuration to measure.

    Idempotent during the initial design (the queue itself is the
    outstanding work); during iteration it stores the proposal as pending
    until :func:`record` resolves it.
    """
    if study.phase in (PHASE_CONVERGED, PHASE_EXHAUSTED):
        raise StudyStateError(f"study is {study.phase}; no further suggestions")
    if study.pending is not None:
        raise StudyStateError(
            f"suggestion {study.pending.x} awaits measurement; record it first"
        )

    if study.phase == PHASE_INITIAL:
        queue = design_queue(study)
        if queue:
            return Suggestion(x=queue[0], predicted=None, rationale="initial-design")
        # imported points can cover the whole design; advance and fall through
        study.phase = PHASE_ITERATING

    suggestion = propose(study.space, study.config, study.points)
    study.pending = Pending(x=suggestion.x, predicted=suggestion.predicted)
    _log(study, "suggest", x=list(suggestion.x), predicted=suggestion.predicted)
    return suggestion


def record(study: Study, x, y: float) -> Study:
    """Attach a measurement to the pending suggestion or a design point."""
    y = float(y)
    if not np.isfinite(y):
        raise NonFiniteMeasurement(f"measured value {y!r} is not finite")
    x = _as_point(x)

    pending = study.pending
    if pending is not None and x == pending.x:
        kind = "incremental"
    elif study.phase == PHASE_INITIAL and x in design_queue(study):
        kind = "initial"
    else:
        raise UnexpectedPoint(
            f"{x} was not suggested; use import_point for external measurements"
        )

    point = SupportPoint(x=x, y=y, kind=kind)
    study.points.append(point)
    if study.x_top is None or _better(study.config, y, study.x_top.y):
        study.x_top = point

    gap = None
    if kind == "incremental":
        gap = abs(y - pending.predicted)
        study.pending = None
        if gap <= study.config.epsilon:
            study.phase = PHASE_CONVERGED

    if study.phase == PHASE_INITIAL and not design_queue(study):
        study.phase = PHASE_ITERATING
    if study.phase in (PHASE_INITIAL, PHASE_ITERATING) and len(study.points) >= study.config.max_evaluations:
        study.phase = PHASE_EXHAUSTED

    _log(study, "record", x=list(x), y=y, gap=gap, phase=study.phase)
    return study


def import_point(study: Study, x, y: float, kind: spline.PointKind = "imported", *, allow_close: bool = False) -> Study:
    """Append an externally measured point without touching the loop state.

    ``allow_close`` bypasses the minimum-distance rule for verbatim table
    replays; the bypass is recorded in the history log.
    """
    x = _as_point(x)
    y = float(y)
    if not contains(study.space, x):
        raise OutOfBox(f"{x} is outside the box; extend_space first")
    if not np.isfinite(y):
        raise NonFiniteMeasurement(f"measured value {y!r} is not finite")
    if not allow_close and not admissible(study.space, x, [p.x for p in study.points], study.config.delta_min):
        raise Inadmissible(f"{x} is within delta_min of an existing support point")

    point = SupportPoint(x=x, y=y, kind=kind)
    study.points.append(point)
    if study.x_top is None or _better(study.config, y, study.x_top.y):
        study.x_top = point
    _log(study, "import", x=list(x), y=y, kind=kind, forced=bool(allow_close))
    return study


def extend_space(study: Study, new_space: ParamSpace) -> Study:
    """Widen the box, keeping all measurements and queueing any new corners."""
    old, new = study.space, new_space
    if [d.name for d in old.dims] != [d.name for d in new.dims]:
        raise ShrinkNotAllowed("extension must keep dimension names and order")
    for od, nd in zip(old.dims, new.dims):
        if od.integer != nd.integer:
            raise ShrinkNotAllowed(f"{od.name}: integrality cannot change")
        if nd.min > od.min or nd.max < od.max:
            raise ShrinkNotAllowed(
                f"{od.name}: new range [{nd.min}, {nd.max}] does not contain [{od.min}, {od.max}]"
            )

    study.space = new_space
    uncovered = _uncovered_design(new_space, study.points, study.config.delta_min)
    if uncovered:
        study.phase = PHASE_INITIAL
        study.pending = None  # argmax of the old box-fit is stale
    _log(
        study,
        "extend",
        min=[d.min for d in new.dims],
        max=[d.max for d in new.dims],
        queued=len(uncovered),
    )
    return study


def run_loop(
    study: Study,
    evaluator: Callable[[Point], float],
    *,
    retries: int = 0,
    on_step: Callable[[Study], None] | None = None,
) -> Study:
    """Drive suggest -> evaluate -> record until the study terminates.

    ``on_step`` fires after every state change (pending stored, measurement
    recorded) so callers can checkpoint; a failed evaluation leaves the
    pending suggestion in place, making the study resumable.
    """
    while study.phase in (PHASE_INITIAL, PHASE_ITERATING):
        if study.pending is not None:
            x = study.pending.x
        else:
            before = study.pending
            x = suggest(study).x
            if on_step is not None and study.pending is not before:
                on_step(study)

        last_err: Exception | None = None
        y = None
        for _ in range(retries + 1):
            try:
                y = float(evaluator(x))
                last_err = None
                break
            except Exception as err:  # noqa: BLE001 - evaluator is arbitrary user code
                last_err = err
        if last_err is not None:
            raise EvaluatorFailed(f"evaluator failed at {x}: {last_err}") from last_err

        record(study, x, y)
        if on_step is not None:
            on_step(study)
    return study
