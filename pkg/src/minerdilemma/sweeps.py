"""Parameter sweeps over three-pool games (the six price-of-anarchy panels)."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

from .dynamics import DEFAULT_MAX_ITERS, DEFAULT_TOL, NGameParams, iterate
from .errors import MinerDilemmaError

POWERS = tuple(float(2**k) for k in range(9))
T_VALUES = tuple(float(16 * k) for k in range(16))
P_VALUES = tuple(k / 16 for k in range(16))
CONJECTURE_SLACK = 1e-6

# "m01" moves m0 and m1 together, "m" moves all three pools together
AXIS_NAMES = ("m0", "m1", "m2", "m01", "m", "t", "p")


@dataclass(frozen=True)
class SweepSpec:
    """Swept axes ``(name, values)`` plus fixed parameters of a three-pool sweep."""

    axes: tuple
    fixed: dict = field(default_factory=dict)
    output: str | None = None

    def __post_init__(self):
        if not self.axes:
            raise ValueError("a sweep needs at least one axis")
        axes = tuple((str(name), tuple(float(v) for v in values)) for name, values in self.axes)
        for name, values in axes:
            if name not in AXIS_NAMES:
                raise ValueError(f"unknown axis {name!r}; choose from {AXIS_NAMES}")
            if not values:
                raise ValueError(f"axis {name!r} has no values")
        object.__setattr__(self, "axes", axes)

    @property
    def axis_names(self) -> list[str]:
        return [name for name, _ in self.axes]

    def points(self):
        """Grid points in row-major order of the axes."""
        for combo in product(*(values for _, values in self.axes)):
            yield dict(zip(self.axis_names, combo))

    def with_axis(self, k: int, values) -> "SweepSpec":
        axes = list(self.axes)
        axes[k] = (axes[k][0], tuple(values))
        return SweepSpec(tuple(axes), dict(self.fixed), self.output)


PANELS = {
    "a": SweepSpec((("m1", POWERS), ("m2", POWERS)), {"m0": 32.0, "t": 0.0, "p": 0.0}),
    "b": SweepSpec((("m1", POWERS), ("m2", POWERS)), {"m0": 32.0, "t": 32.0, "p": 0.0}),
    "c": SweepSpec((("m01", POWERS), ("m2", POWERS)), {"t": 0.0, "p": 0.0}),
    "d": SweepSpec((("m", POWERS), ("t", T_VALUES)), {"p": 0.0}),
    "e": SweepSpec((("m2", POWERS), ("t", T_VALUES)), {"m0": 32.0, "m1": 32.0, "p": 0.0}),
    "f": SweepSpec((("p", P_VALUES), ("t", T_VALUES)), {"m0": 32.0, "m1": 32.0, "m2": 32.0}),
}


def point_params(point: dict, fixed: dict) -> NGameParams:
    """Three-pool parameters for one grid point."""
    values = {**fixed, **point}
    if "m" in values:
        values.setdefault("m0", values["m"])
        values.setdefault("m1", values["m"])
        values.setdefault("m2", values["m"])
    if "m01" in values:
        values.setdefault("m0", values["m01"])
        values.setdefault("m1", values["m01"])
    missing = [k for k in ("m0", "m1", "m2") if k not in values]
    if missing:
        raise ValueError(f"sweep point leaves {missing} unset")
    return NGameParams(
        (values["m0"], values["m1"], values["m2"]), values.get("t", 0.0), values.get("p", 0.0)
    )


def _run_point(args):
    point, fixed, tol, max_iters, schedule = args
    row = dict(point)
    try:
        res = iterate(point_params(point, fixed), tol=tol, max_iters=max_iters, schedule=schedule)
    except (MinerDilemmaError, ValueError) as exc:
        row.update(ppoa=math.nan, iterations=0, converged=False,
                   conjecture_violation=False, error=f"{type(exc).__name__}: {exc}")
        return row
    violation = not (1.0 < res.ppoa <= 2.0 + CONJECTURE_SLACK)
    row.update(ppoa=res.ppoa, iterations=res.iterations, converged=res.converged,
               conjecture_violation=violation, error="")
    return row


def figure_sweep(panel: str | SweepSpec, grid: SweepSpec | None = None, *,
                 tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS,
                 schedule: str = "jacobi", workers: int = 1) -> list[dict]:
    """Run best-response dynamics at every grid point of a panel.

    ``grid`` overrides the panel's default sweep.  One row per point, in grid
    order; a failed point keeps its row with ``error`` set.
    """
    spec = grid if grid is not None else (panel if isinstance(panel, SweepSpec) else PANELS[panel])
    jobs = [(pt, spec.fixed, tol, max_iters, schedule) for pt in spec.points()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_point, jobs))
    return [_run_point(job) for job in jobs]


def write_csv(rows: list[dict], axis_names: list[str], path) -> None:
    """Write sweep rows; floats use shortest round-trip repr."""
    header = [*axis_names, "ppoa", "iterations", "converged", "conjecture_violation", "error"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in header])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)
