"""Command-line surface for driving studies across sessions.

Every command takes the study file explicitly, prints one machine-readable
JSON line first and a short human summary after it, and leaves the study
file untouched on any failure.

Exit codes: 0 ok, 2 usage, 3 state violation, 4 numeric failure,
5 evaluator failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import driver, errors, evaluators, persistence, projection, spline
from .fixtures import FIXTURE_NAMES, load_fixture
from .paramspace import Dimension, ParamSpace, contains

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_STATE = 3
EXIT_NUMERIC = 4
EXIT_EVALUATOR = 5

_ERROR_EXIT_CODES = [
    (
        (
            errors.InvalidConfig,
            errors.UnknownFixture,
            errors.UnknownBenchmark,
            errors.BadDimensionNames,
        ),
        EXIT_USAGE,
    ),
    (
        (
            errors.StudyStateError,
            errors.UnexpectedPoint,
            errors.Inadmissible,
            errors.OutOfBox,
            errors.StudyLocked,
            errors.IoError,
            errors.ParseError,
            errors.VersionMismatch,
            errors.InvariantViolation,
            errors.ShrinkNotAllowed,
        ),
        EXIT_STATE,
    ),
    (
        (
            errors.FitFailed,
            errors.SplineFitError,
            errors.NoAdmissiblePoint,
            errors.NonFiniteMeasurement,
            errors.RankDeficient,
            errors.NonFiniteInput,
        ),
        EXIT_NUMERIC,
    ),
    (
        (
            errors.EvaluatorFailed,
            errors.EvalTimeout,
            errors.EvalNonZeroExit,
            errors.EvalUnparseable,
        ),
        EXIT_EVALUATOR,
    ),
]


def _exit_code(err: Exception) -> int:
    for types, code in _ERROR_EXIT_CODES:
        if isinstance(err, types):
            return code
    return EXIT_USAGE if isinstance(err, ValueError) else 1


def _emit(doc: dict) -> None:
    print(json.dumps(doc))


def _parse_point(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise errors.InvalidConfig(f"cannot parse point {text!r}") from None


def _load_space_file(path: str) -> ParamSpace:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise errors.IoError(f"cannot read space file {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise errors.ParseError(f"space file {path} is not valid JSON: {err}") from err
    dims = tuple(
        Dimension(
            name=d["name"],
            min=float(d["min"]),
            max=float(d["max"]),
            integer=bool(d.get("integer", False)),
        )
        for d in doc["dims"]
    )
    return ParamSpace(dims=dims, normalize=bool(doc.get("normalize", True)))


def _study_config(args) -> driver.StudyConfig:
    search = persistence.SearchConfig(
        samples_per_level=args.samples,
        levels=args.levels,
        shrink_factor=args.shrink,
        stall_tolerance=args.stall_tolerance,
        max_total_samples=args.samples * args.levels,
    )
    return driver.StudyConfig(
        direction=args.direction,
        epsilon=args.epsilon,
        residual_tol=args.residual_tol,
        delta_min=args.delta_min,
        max_evaluations=args.budget,
        search=search,
    )


def _fit_study(study: driver.Study) -> spline.SplineModel:
    try:
        return spline.fit(study.space, study.points, study.config.residual_tol)
    except errors.SplineFitError as err:
        raise errors.FitFailed(f"surrogate fit failed: {err}") from err


def cmd_init(args) -> int:
    path = Path(args.study)
    if path.exists():
        raise errors.StudyStateError(f"{path} already exists; refusing to overwrite")
    if args.fixture:
        study = persistence.study_from_fixture(
            args.fixture,
            normalize=args.normalize,
            config=_study_config(args),
            id=args.id,
        )
        queued = []
    else:
        if not args.space:
            raise errors.InvalidConfig("need --space FILE or --fixture NAME")
        space = _load_space_file(args.space)
        if args.normalize is not None:
            space = ParamSpace(dims=space.dims, normalize=args.normalize)
        study = driver.init_study(space, _study_config(args), id=args.id)
        queued = driver.design_queue(study)
    persistence.save_study(study, path)
    _emit(
        {
            "study": study.id,
            "phase": study.phase,
            "points": len(study.points),
            "queued": [list(q) for q in queued],
        }
    )
    print(f"initialized {study.id} in phase {study.phase} ({len(study.points)} points)")
    for q in queued:
        print("  queued: " + ", ".join(format(v, "g") for v in q))
    return EXIT_OK


def cmd_suggest(args) -> int:
    with persistence.study_lock(args.study):
        study = persistence.load_study(args.study)
        suggestion = driver.suggest(study)
        persistence.save_study(study, args.study)
    _emit(
        {
            "x": list(suggestion.x),
            "predicted": suggestion.predicted,
            "rationale": suggestion.rationale,
        }
    )
    coords = ", ".join(format(v, "g") for v in suggestion.x)
    if suggestion.predicted is None:
        print(f"measure next (initial design): {coords}")
    else:
        print(f"measure next: {coords}  (predicted {suggestion.predicted:.4f})")
    return EXIT_OK


def _report_state(study: driver.Study, gap) -> None:
    top = None
    if study.x_top is not None:
        top = {"x": list(study.x_top.x), "y": study.x_top.y}
    _emit({"phase": study.phase, "points": len(study.points), "gap": gap, "x_top": top})
    gap_text = f"|measured - predicted| = {gap:.6g}" if gap is not None else "no prediction to compare"
    print(f"phase {study.phase}; {gap_text}")
    if top is not None:
        coords = ", ".join(format(v, "g") for v in study.x_top.x)
        print(f"best so far: {coords} -> {study.x_top.y:g}")


def cmd_record(args) -> int:
    x = _parse_point(args.point)
    with persistence.study_lock(args.study):
        study = persistence.load_study(args.study)
        predicted = study.pending.predicted if study.pending is not None else None
        driver.record(study, x, args.value)
        persistence.save_study(study, args.study)
    gap = abs(args.value - predicted) if predicted is not None else None
    _report_state(study, gap)
    return EXIT_OK


def _import_rows(study: driver.Study, rows) -> int:
    count = 0
    for x, y, kind in rows:
        driver.import_point(study, x, y, kind=kind)
        count += 1
    return count


def cmd_import(args) -> int:
    sources = [s for s in (args.point, args.csv, args.fixture) if s]
    if len(sources) != 1:
        raise errors.InvalidConfig("need exactly one of --point/--value, --csv, --fixture")
    with persistence.study_lock(args.study):
        study = persistence.load_study(args.study)
        if args.point:
            if args.value is None:
                raise errors.InvalidConfig("--point requires --value")
            count = _import_rows(study, [(_parse_point(args.point), args.value, args.kind)])
        elif args.csv:
            rows = []
            try:
                text = Path(args.csv).read_text(encoding="utf-8")
            except OSError as err:
                raise errors.IoError(f"cannot read {args.csv}: {err}") from err
            for line in text.splitlines():
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split(",")
                try:
                    values = [float(v) for v in parts]
                except ValueError:
                    continue  # header line
                rows.append((tuple(values[:-1]), values[-1], args.kind))
            count = _import_rows(study, rows)
        else:
            fixture = load_fixture(args.fixture)
            rows = [
                (row.x, row.measured, row.kind)
                for row in fixture.rows
                if row.measured is not None
                and (args.only is None or row.kind == args.only)
            ]
            count = _import_rows(study, rows)
        persistence.save_study(study, args.study)
    _emit({"imported": count, "points": len(study.points), "phase": study.phase})
    print(f"imported {count} points ({len(study.points)} total)")
    return EXIT_OK


def cmd_run(args) -> int:
    if bool(args.evaluator) == bool(args.benchmark):
        raise errors.InvalidConfig("need exactly one of --evaluator or --benchmark")
    with persistence.study_lock(args.study):
        study = persistence.load_study(args.study)
        if args.benchmark:
            bench = evaluators.builtin_benchmark(args.benchmark, negate=args.negate)
            evaluate = evaluators.as_point_evaluator(bench, study.space)
        else:
            names = study.space.names

            def evaluate(point, _cmd=args.evaluator, _names=names, _sid=study.id):
                return evaluators.run_external_evaluator(
                    _cmd, point, _names, study_id=_sid, timeout=args.timeout
                )

        save = lambda s: persistence.save_study(s, args.study)  # noqa: E731
        try:
            driver.run_loop(study, evaluate, retries=args.retries, on_step=save)
        except errors.EvaluatorFailed:
            persistence.save_study(study, args.study)
            raise
        persistence.save_study(study, args.study)
    _report_state(study, None)
    return EXIT_OK


def cmd_predict(args) -> int:
    study = persistence.load_study(args.study)
    model = _fit_study(study)
    x = _parse_point(args.point)
    value = spline.evaluate(model, x)
    extrapolated = not contains(study.space, x)
    _emit({"value": value, "extrapolated": extrapolated})
    note = "  (extrapolating outside the box)" if extrapolated else ""
    print(f"predicted objective: {value:.6f}{note}")
    return EXIT_OK


def cmd_project(args) -> int:
    study = persistence.load_study(args.study)
    model = _fit_study(study)
    free = tuple(args.free.split(","))
    fixed = {}
    if args.fixed:
        for part in args.fixed.split(","):
            name, _, value = part.partition("=")
            if not _:
                raise errors.InvalidConfig(f"cannot parse --fixed entry {part!r}")
            fixed[name.strip()] = float(value)
    grid = projection.project(model, free, fixed, resolution=args.resolution)
    projection.write_grid_csv(grid, args.out)
    _emit(
        {
            "out": str(args.out),
            "free": list(grid.free),
            "fixed": grid.fixed,
            "resolution": args.resolution,
        }
    )
    print(f"wrote {args.resolution}x{args.resolution} grid over ({free[0]}, {free[1]}) to {args.out}")
    return EXIT_OK


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--id", default=None, help="study identifier")
    p.add_argument("--direction", choices=("maximize", "minimize"), default="maximize")
    p.add_argument("--epsilon", type=float, default=0.5, help="convergence gap in objective units")
    p.add_argument("--budget", type=int, default=100, help="maximum number of measurements")
    p.add_argument("--delta-min", type=float, default=1e-3, dest="delta_min")
    p.add_argument("--residual-tol", type=float, default=1e-6, dest="residual_tol")
    p.add_argument("--samples", type=int, default=8192, help="search samples per level")
    p.add_argument("--levels", type=int, default=6, help="search shrink levels")
    p.add_argument("--shrink", type=float, default=0.5, help="per-side box shrink factor")
    p.add_argument("--stall-tolerance", type=float, default=1e-12, dest="stall_tolerance")
    norm = p.add_mutually_exclusive_group()
    norm.add_argument(
        "--normalize", dest="normalize", action="store_true",
        help="measure distances in [0,1]-scaled coordinates (default)",
    )
    norm.add_argument(
        "--raw-distance", dest="normalize", action="store_false",
        help="measure distances in raw parameter units",
    )
    p.set_defaults(normalize=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splinenas",
        description="Spline-surrogate ask-tell optimizer over a bounded box",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a fresh study file")
    p.add_argument("--space", help="JSON space definition file")
    p.add_argument("--fixture", choices=FIXTURE_NAMES, help="seed from an embedded table")
    p.add_argument("--study", required=True, help="study file to create")
    _add_config_flags(p)
    p.set_defaults(fn=cmd_init)

    p = sub.add_parser("suggest", help="print the next configuration to measure")
    p.add_argument("--study", required=True)
    p.set_defaults(fn=cmd_suggest)

    p = sub.add_parser("record", help="report a measurement for the pending suggestion")
    p.add_argument("--study", required=True)
    p.add_argument("--point", required=True, help="comma-separated coordinates")
    p.add_argument("--value", required=True, type=float)
    p.set_defaults(fn=cmd_record)

    p = sub.add_parser("import", help="merge externally measured points")
    p.add_argument("--study", required=True)
    p.add_argument("--point", help="comma-separated coordinates")
    p.add_argument("--value", type=float)
    p.add_argument("--csv", help="CSV with one row per point: coords..., value")
    p.add_argument("--fixture", choices=FIXTURE_NAMES)
    p.add_argument("--only", choices=("initial", "incremental", "imported"), default=None)
    p.add_argument("--kind", choices=("initial", "incremental", "imported"), default="imported")
    p.set_defaults(fn=cmd_import)

    p = sub.add_parser("run", help="drive the loop against an evaluator")
    p.add_argument("--study", required=True)
    p.add_argument("--evaluator", help="shell command implementing the evaluator protocol")
    p.add_argument("--benchmark", help="built-in benchmark name")
    p.add_argument("--negate", dest="negate", action="store_true", default=True)
    p.add_argument("--no-negate", dest="negate", action="store_false")
    p.add_argument("--retries", type=int, default=0)
    p.add_argument("--timeout", type=float, default=None, help="per-evaluation seconds")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("predict", help="evaluate the fitted surrogate at a point")
    p.add_argument("--study", required=True)
    p.add_argument("--point", required=True)
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("project", help="export a 2-d surrogate slice as CSV")
    p.add_argument("--study", required=True)
    p.add_argument("--free", required=True, help="two dimension names, comma-separated")
    p.add_argument("--fixed", default="", help="name=value pairs for the other dims")
    p.add_argument("--resolution", type=int, default=projection.DEFAULT_RESOLUTION)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(fn=cmd_project)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else 0
    try:
        return args.fn(args)
    except errors.SplineNasError as err:
        print(f"error: {err}", file=sys.stderr)
        return _exit_code(err)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
