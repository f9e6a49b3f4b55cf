"""Seeded property checks pitting the closed forms against the oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import equilibrium as eqm
from .errors import MinerDilemmaError
from .game import GameParams, StrategyPair, raw_avg_reward, raw_d_avg_reward
from .oracle import DEFAULT_GRID, GridSpec, exhaustive_equilibrium, fd_derivative, \
    fd_second_difference, is_grid_fixed_point

DERIV_RTOL = 1e-6
CONCAVITY_TOL = 1e-8
BOUND_TOL = 1e-9
SCALE_RTOL = 1e-9
SCALES = (1e-3, 1.0, 1e3)
CLUSTER_CELLS = 10.0


def random_params(rng: np.random.Generator) -> GameParams:
    """Log-uniform pool powers in [2^-2, 2^8], t uniform in [0, 2^8], p in [0, 0.95]."""
    m1, m2 = 2.0 ** rng.uniform(-2.0, 8.0, size=2)
    t = rng.uniform(0.0, 256.0)
    p = rng.uniform(0.0, 0.95)
    return GameParams(float(m1), float(m2), float(t), float(p))


def random_instances(cases: int, seed: int) -> list[GameParams]:
    rng = np.random.default_rng(seed)
    return [random_params(rng) for _ in range(cases)]


def random_interior_profile(params: GameParams, rng: np.random.Generator,
                            margin: float) -> StrategyPair:
    x1 = rng.uniform(margin, params.m1 - margin)
    x2 = rng.uniform(margin, params.m2 - margin)
    return StrategyPair(float(x1), float(x2))


@dataclass
class PropertyResult:
    name: str
    checks: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, params, detail: str) -> None:
        self.failures.append((params, detail))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name} ({self.checks} checks)"
        if self.failures:
            params, detail = self.failures[0]
            text += f": {len(self.failures)} failing; first {params}: {detail}"
        return text


def check_dispatch_and_bounds(params: GameParams, res: PropertyResult) -> None:
    """Exactly one case fires; PPoA in (1, 2]; total infiltration at most half."""
    res.checks += 1
    try:
        g1 = eqm.eval_g(params, swapped=False)
        g2 = eqm.eval_g(params, swapped=True)
        if g1 <= 0.0 and g2 <= 0.0:
            res.fail(params, f"both idle conditions fire (g={g1}, {g2})")
            return
        e = eqm.solve(params)
    except MinerDilemmaError as exc:
        res.fail(params, f"{type(exc).__name__}: {exc}")
        return
    expect_extreme = g1 <= 0.0 or g2 <= 0.0
    if expect_extreme != e.kind.is_extreme:
        res.fail(params, f"kind {e.kind.value} disagrees with the sign of g")
    if not 1.0 < e.ppoa <= 2.0:
        res.fail(params, f"ppoa {e.ppoa} outside (1, 2]")
    if e.ppoa > 2.0 / (1.0 + params.p) + BOUND_TOL:
        res.fail(params, f"ppoa {e.ppoa} above 2/(1+p)")
    if e.y_star > 0.5 * (params.m1 + params.m2) + BOUND_TOL * params.m:
        res.fail(params, f"y* = {e.y_star} above (m1+m2)/2")


def check_grid_agreement(params: GameParams, res: PropertyResult,
                         grid: GridSpec = DEFAULT_GRID) -> None:
    """The closed-form profile is a fixed point of grid best responses."""
    res.checks += 1
    try:
        e = eqm.solve(params)
    except MinerDilemmaError as exc:
        res.fail(params, f"{type(exc).__name__}: {exc}")
        return
    if not is_grid_fixed_point(params, e.profile, grid):
        res.fail(params, f"profile ({e.x1}, {e.x2}) is not a grid best-response fixed point")


def check_uniqueness(params: GameParams, res: PropertyResult,
                     grid: GridSpec = DEFAULT_GRID) -> None:
    """The exhaustive scan finds a single cluster, located at the closed form."""
    res.checks += 1
    try:
        e = eqm.solve(params)
    except MinerDilemmaError as exc:
        res.fail(params, f"{type(exc).__name__}: {exc}")
        return
    found = exhaustive_equilibrium(params, grid)
    if len(found.clusters) != 1:
        res.fail(params, f"{len(found.clusters)} equilibrium clusters: {found.clusters}")
        return
    c = found.clusters[0]
    w = CLUSTER_CELLS * max(found.cell_width)
    if abs(c.x1 - e.x1) > w or abs(c.x2 - e.x2) > w:
        res.fail(params, f"cluster ({c.x1}, {c.x2}) far from ({e.x1}, {e.x2})")


def derivative_scale(params: GameParams, s: StrategyPair, pool: int) -> float:
    """Natural size of a reward slope at ``s``: reward over total power."""
    r = raw_avg_reward(params.m1, params.m2, params.t, params.p, s.x1, s.x2, pool)
    return abs(r) / params.m


def check_derivatives(params: GameParams, rng: np.random.Generator, points: int,
                      deriv: PropertyResult, concave: PropertyResult) -> None:
    """Analytic slopes match central differences; second differences are nonpositive."""
    step = 1e-6 * (params.m1 + params.m2)
    for _ in range(points):
        margin = max(step, 1e-3 * min(params.m1, params.m2))
        s = random_interior_profile(params, rng, margin)
        for pool in (1, 2):
            deriv.checks += 1
            an = raw_d_avg_reward(params.m1, params.m2, params.t, params.p, s.x1, s.x2, pool)
            fd = fd_derivative(params, s, pool, step)
            denom = max(abs(an), derivative_scale(params, s, pool))
            if abs(fd - an) > DERIV_RTOL * denom:
                deriv.fail(params, f"pool {pool} at {s}: analytic {an} vs fd {fd}")
            concave.checks += 1
            h = rng.uniform(0.0, 1.0) * margin
            if h <= 0.0:
                continue
            d2 = fd_second_difference(params, s, pool, h)
            r = raw_avg_reward(params.m1, params.m2, params.t, params.p, s.x1, s.x2, pool)
            if d2 > CONCAVITY_TOL * abs(r):
                concave.fail(params, f"pool {pool} at {s}, h={h}: second difference {d2}")


def check_scaling(params: GameParams, res: PropertyResult) -> None:
    """Scaling every power scales the equilibrium and leaves PPoA unchanged."""
    try:
        base = eqm.solve(params)
    except MinerDilemmaError as exc:
        res.checks += 1
        res.fail(params, f"{type(exc).__name__}: {exc}")
        return
    for alpha in SCALES:
        res.checks += 1
        try:
            e = eqm.solve(params.scaled(alpha))
        except MinerDilemmaError as exc:
            res.fail(params, f"alpha={alpha}: {type(exc).__name__}: {exc}")
            continue
        tol = SCALE_RTOL * alpha * params.m
        if abs(e.x1 - alpha * base.x1) > tol or abs(e.x2 - alpha * base.x2) > tol:
            res.fail(params, f"alpha={alpha}: profile {e.profile} vs scaled {base.profile}")
        if abs(e.ppoa - base.ppoa) > SCALE_RTOL * base.ppoa:
            res.fail(params, f"alpha={alpha}: ppoa {e.ppoa} vs {base.ppoa}")


def run_suite(cases: int = 200, seed: int = 42, points_per_case: int = 5,
              grid: GridSpec = DEFAULT_GRID) -> list[PropertyResult]:
    """All oracle properties over ``cases`` seeded random instances."""
    instances = random_instances(cases, seed)
    rng = np.random.default_rng([seed, 1])
    dispatch = PropertyResult("dispatch-and-bounds")
    agree = PropertyResult("grid-agreement")
    unique = PropertyResult("uniqueness-clusters")
    deriv = PropertyResult("derivative-agreement")
    concave = PropertyResult("concavity")
    scaling = PropertyResult("scaling-equivariance")
    for params in instances:
        check_dispatch_and_bounds(params, dispatch)
        check_grid_agreement(params, agree, grid)
        check_uniqueness(params, unique, grid)
        check_derivatives(params, rng, points_per_case, deriv, concave)
        check_scaling(params, scaling)
    return [dispatch, agree, unique, deriv, concave, scaling]
