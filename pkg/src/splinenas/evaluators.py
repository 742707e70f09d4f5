"""Objective evaluators: external commands and built-in benchmarks.

An external evaluator is any command that reads one JSON line on stdin,
prints a number as the last non-empty line of stdout, and exits 0. Each
parameter also arrives in the environment as SPLINENAS_<NAME>=<value>, so
shell wrappers need not parse anything.
"""

from __future__ import annotations

import json
import math
import os
import re
import shlex
import subprocess
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    EvalNonZeroExit,
    EvalTimeout,
    EvalUnparseable,
    UnknownBenchmark,
)
from .paramspace import ParamSpace

ENV_PREFIX = "SPLINENAS_"


def _env_name(name: str) -> str:
    return ENV_PREFIX + re.sub(r"[^A-Za-z0-9]", "_", name).upper()


def _format_value(v: float) -> str:
    return format(float(v), ".17g")


def run_external_evaluator(
    command: str,
    point: Sequence[float],
    names: Sequence[str],
    *,
    study_id: str = "",
    timeout: float | None = None,
    retries: int = 0,
) -> float:
    """Run the command once per attempt and parse its final stdout line.

    The last non-empty stdout line must be a finite number; anything the
    wrapped training script logs before that is ignored.
    """
    if len(point) != len(names):
        raise ValueError("point and names must have equal length")
    argv = shlex.split(command)
    if not argv:
        raise ValueError("empty evaluator command")

    payload = json.dumps(
        {"study": study_id, "names": list(names), "point": [float(v) for v in point]}
    )
    env = dict(os.environ)
    for name, value in zip(names, point):
        env[_env_name(name)] = _format_value(value)

    last_err: Exception | None = None
    for _ in range(retries + 1):
        try:
            return _run_once(argv, payload, env, timeout, command)
        except (EvalTimeout, EvalNonZeroExit, EvalUnparseable) as err:
            last_err = err
    raise last_err


def _run_once(argv, payload, env, timeout, command) -> float:
    try:
        proc = subprocess.run(
            argv,
            input=payload + "\n",
            capture_output=True,
            text=True,
            env=env,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired as err:
        stderr = err.stderr or ""
        raise EvalTimeout(f"{command!r} exceeded {timeout}s; stderr: {stderr}") from err
    except OSError as err:
        raise EvalNonZeroExit(f"cannot launch {command!r}: {err}") from err

    if proc.returncode != 0:
        raise EvalNonZeroExit(
            f"{command!r} exited {proc.returncode}; stderr: {proc.stderr}"
        )
    lines = [line for line in proc.stdout.splitlines() if line.strip()]
    if not lines:
        raise EvalUnparseable(f"{command!r} printed nothing; stderr: {proc.stderr}")
    try:
        value = float(lines[-1].strip())
    except ValueError:
        raise EvalUnparseable(
            f"{command!r} last line {lines[-1]!r} is not a number; stderr: {proc.stderr}"
        ) from None
    if not math.isfinite(value):
        raise EvalUnparseable(f"{command!r} returned non-finite value {value}")
    return value


# --- built-in benchmarks -------------------------------------------------

@dataclass(frozen=True)
class Benchmark:
    """Closed-form test function over unit coordinates u in [0, 1]^d.

    ``optimum_unit``/``optimum_value`` describe the global minimum of the
    un-negated function (its maximum when negated).
    """

    name: str
    negate: bool
    fn: Callable[[np.ndarray], np.ndarray]
    optimum_unit: Callable[[int], np.ndarray]
    optimum_value: float

    def __call__(self, u) -> float:
        u = np.asarray(u, dtype=float).reshape(1, -1)
        value = float(self.fn(u)[0])
        return -value if self.negate else value

    def batch(self, us: np.ndarray) -> np.ndarray:
        values = self.fn(np.asarray(us, dtype=float))
        return -values if self.negate else values


def _sphere(u: np.ndarray) -> np.ndarray:
    # minimum 0 at the box center
    z = u - 0.5
    return (z * z).sum(axis=1)


def _rastrigin(u: np.ndarray) -> np.ndarray:
    # unit cube mapped to [-5.12, 5.12]^d; minimum 0 at the center,
    # local optima on the integer lattice
    x = 10.24 * u - 5.12
    return 10.0 * x.shape[1] + (x * x - 10.0 * np.cos(2.0 * np.pi * x)).sum(axis=1)


def _rosenbrock(u: np.ndarray) -> np.ndarray:
    # unit cube mapped to [-2.048, 2.048]^d; minimum 0 at x = 1,
    # i.e. u = 3.048/4.096 per coordinate
    x = 4.096 * u - 2.048
    a = x[:, 1:] - x[:, :-1] ** 2
    b = 1.0 - x[:, :-1]
    return (100.0 * a * a + b * b).sum(axis=1)


def _affine(u: np.ndarray) -> np.ndarray:
    # plain coordinate sum; the surrogate reproduces it exactly
    return u.sum(axis=1)


_BENCHMARKS = {
    "sphere": (_sphere, lambda d: np.full(d, 0.5), 0.0),
    "rastrigin": (_rastrigin, lambda d: np.full(d, 0.5), 0.0),
    "rosenbrock": (_rosenbrock, lambda d: np.full(d, 3.048 / 4.096), 0.0),
    "affine": (_affine, lambda d: np.zeros(d), 0.0),
}


def builtin_benchmark(name: str, negate: bool) -> Benchmark:
    if name not in _BENCHMARKS:
        raise UnknownBenchmark(f"no benchmark named {name!r}; known: {sorted(_BENCHMARKS)}")
    fn, opt, value = _BENCHMARKS[name]
    return Benchmark(name=name, negate=negate, fn=fn, optimum_unit=opt, optimum_value=value)


def as_point_evaluator(bench: Benchmark, space: ParamSpace) -> Callable[[Sequence[float]], float]:
    """Adapt a benchmark to parameter-unit points from the given box."""

    def evaluate(point: Sequence[float]) -> float:
        p = np.asarray(point, dtype=float)
        u = (p - space.lows) / space.spans
        return bench(u)

    return evaluate
