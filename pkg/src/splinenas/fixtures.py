"""Embedded measurement tables used for replays and regression checks.

The accuracies in these tables came from multi-thousand-GPU-hour training
runs and are not reproducible here; they ship verbatim as read-only data.
Rows flagged ``extrapolated`` were deliberately measured outside the
declared box and need a widened space before import.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import UnknownFixture
from .paramspace import Dimension, ParamSpace

FIXTURE_NAMES = (
    "table1_resnet18",
    "table3_blresnext50",
    "table4_blresnext_1k",
    "table5_blresnext_1k_wide",
)

_DATA_PACKAGE = "splinenas.fixtures_data"


@dataclass(frozen=True)
class FixtureRow:
    x: tuple[float, ...]
    measured: Optional[float]
    predicted: Optional[float]
    kind: str
    extrapolated: bool = False


@dataclass(frozen=True)
class FixtureTable:
    name: str
    space: ParamSpace
    rows: tuple[FixtureRow, ...]

    @property
    def measured_rows(self) -> tuple[FixtureRow, ...]:
        return tuple(r for r in self.rows if r.measured is not None)


def fixture_path(name: str) -> Path:
    if name not in FIXTURE_NAMES and name != "reported_results":
        raise UnknownFixture(f"no fixture named {name!r}; known: {FIXTURE_NAMES}")
    return Path(str(resources.files(_DATA_PACKAGE).joinpath(f"{name}.json")))


def load_fixture(name: str) -> FixtureTable:
    if name not in FIXTURE_NAMES:
        raise UnknownFixture(f"no fixture named {name!r}; known: {FIXTURE_NAMES}")
    doc = json.loads(fixture_path(name).read_text(encoding="utf-8"))
    space = ParamSpace(
        dims=tuple(
            Dimension(name=d["name"], min=d["min"], max=d["max"], integer=d["integer"])
            for d in doc["space"]["dims"]
        ),
        normalize=doc["space"]["normalize"],
    )
    rows = tuple(
        FixtureRow(
            x=tuple(float(v) for v in r["x"]),
            measured=r["measured"],
            predicted=r["predicted"],
            kind=r["kind"],
            extrapolated=r.get("extrapolated", False),
        )
        for r in doc["rows"]
    )
    return FixtureTable(name=doc["name"], space=space, rows=rows)


def load_reported_results() -> dict:
    """Headline numbers from the original experiments (not a replay table)."""
    return json.loads(fixture_path("reported_results").read_text(encoding="utf-8"))
