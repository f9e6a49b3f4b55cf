"""Brute-force checks for the two-pool closed forms.

Nothing here touches the equilibrium formulas.  The only shared code is the
closed-form average reward, itself cross-checked against the 2x2 linear
system in ``game.raw_avg_rewards_linear``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .game import GameParams, StrategyPair, raw_avg_reward

REFINE_FACTOR = 8
# half-width of the refined window, in coarse cells
REFINE_HALF_WINDOW = 4


@dataclass(frozen=True)
class GridSpec:
    """Points per axis of the coarse grid and number of zoom-in rounds."""

    resolution: int = 64
    refinement_rounds: int = 6

    def __post_init__(self):
        if self.resolution < 16:
            raise DomainError(f"resolution must be >= 16, got {self.resolution}")
        if self.refinement_rounds < 1:
            raise DomainError(f"refinement_rounds must be >= 1, got {self.refinement_rounds}")

    def final_width(self, span: float) -> float:
        """Cell width after all refinement rounds on an axis of length ``span``."""
        return span / (self.resolution - 1) / REFINE_FACTOR**self.refinement_rounds


DEFAULT_GRID = GridSpec()


def _rewards(params: GameParams, pool: int, own, other) -> np.ndarray:
    # extended precision: near the maximizer binary64 rewards are flat to the
    # last bit over several final cells
    ld = np.longdouble
    own = np.asarray(own, dtype=ld)
    other = np.asarray(other, dtype=ld)
    x1, x2 = (own, other) if pool == 1 else (other, own)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = raw_avg_reward(ld(params.m1), ld(params.m2), ld(params.t), ld(params.p), x1, x2, pool)
    return np.where(np.isfinite(r), r, -np.inf)


def grid_best_responses(params: GameParams, opponent_x, pool: int, grid: GridSpec = DEFAULT_GRID):
    """Vectorized :func:`grid_best_response` over an array of opponent strategies."""
    other = np.atleast_1d(np.asarray(opponent_x, dtype=float))[:, None]
    span = params.m1 if pool == 1 else params.m2
    h = span / (grid.resolution - 1)
    xs = np.linspace(0.0, span, grid.resolution)[None, :]
    vals = _rewards(params, pool, xs, other)
    best = xs[0, np.argmax(vals, axis=1)]  # argmax keeps the lowest index on ties
    offsets = np.arange(-REFINE_HALF_WINDOW * REFINE_FACTOR, REFINE_HALF_WINDOW * REFINE_FACTOR + 1)
    for _ in range(grid.refinement_rounds):
        h /= REFINE_FACTOR
        cand = best[:, None] + h * offsets[None, :]
        cand = np.clip(cand, 0.0, span)
        vals = _rewards(params, pool, cand, other)
        best = cand[np.arange(cand.shape[0]), np.argmax(vals, axis=1)]
    return best


def grid_best_response(params: GameParams, opponent_x: float, pool: int,
                       grid: GridSpec = DEFAULT_GRID) -> float:
    """Approximate argmax of ``pool``'s average reward by recursive grid search.

    The result is within ``grid.final_width(m_pool)`` of the true maximizer.
    """
    if pool not in (1, 2):
        raise DomainError(f"pool must be 1 or 2, got {pool!r}")
    return float(grid_best_responses(params, [opponent_x], pool, grid)[0])


def is_grid_fixed_point(params: GameParams, profile: StrategyPair,
                        grid: GridSpec = DEFAULT_GRID, cells: float = 1.0) -> bool:
    """True when each coordinate is within ``cells`` final widths of the grid best response."""
    b1 = grid_best_response(params, profile.x2, 1, grid)
    b2 = grid_best_response(params, profile.x1, 2, grid)
    w1 = cells * grid.final_width(params.m1)
    w2 = cells * grid.final_width(params.m2)
    return abs(b1 - profile.x1) <= w1 and abs(b2 - profile.x2) <= w2


def grid_fixed_point(params: GameParams, grid: GridSpec = DEFAULT_GRID,
                     max_iters: int = 10_000) -> StrategyPair:
    """Alternate grid best responses from honest mining until they stop moving."""
    x1 = x2 = 0.0
    w = min(grid.final_width(params.m1), grid.final_width(params.m2))
    for _ in range(max_iters):
        n1 = grid_best_response(params, x2, 1, grid)
        n2 = grid_best_response(params, n1, 2, grid)
        if abs(n1 - x1) + abs(n2 - x2) <= w:
            return StrategyPair(n1, n2)
        x1, x2 = n1, n2
    return StrategyPair(x1, x2)


def fd_derivative(params: GameParams, s: StrategyPair, pool: int, step: float) -> float:
    """Central finite difference of the pool's average reward in its own strategy."""
    own = s.x1 if pool == 1 else s.x2
    span = params.m1 if pool == 1 else params.m2
    if pool not in (1, 2):
        raise DomainError(f"pool must be 1 or 2, got {pool!r}")
    if not (step > 0 and own - step >= 0.0 and own + step <= span):
        raise DomainError(f"x{pool}={own} is not {step} away from the boundary")

    def r(v):
        x1, x2 = (v, s.x2) if pool == 1 else (s.x1, v)
        return raw_avg_reward(params.m1, params.m2, params.t, params.p, x1, x2, pool)

    return (r(own + step) - r(own - step)) / (2.0 * step)


def fd_second_difference(params: GameParams, s: StrategyPair, pool: int, step: float) -> float:
    """Second central difference ``r(x+h) - 2 r(x) + r(x-h)`` in the pool's own strategy."""
    own = s.x1 if pool == 1 else s.x2
    span = params.m1 if pool == 1 else params.m2
    if not (step > 0 and own - step >= 0.0 and own + step <= span):
        raise DomainError(f"x{pool}={own} is not {step} away from the boundary")

    def r(v):
        x1, x2 = (v, s.x2) if pool == 1 else (s.x1, v)
        return raw_avg_reward(params.m1, params.m2, params.t, params.p, x1, x2, pool)

    return r(own + step) - 2.0 * r(own) + r(own - step)


@dataclass(frozen=True)
class ExhaustiveResult:
    clusters: list          # one StrategyPair per separated equilibrium cluster
    candidates: list        # every refined crossing that passed the regret test
    regrets: list           # worst relative gain from a grid deviation, per candidate
    cell_width: tuple       # final cell widths (pool 1, pool 2)


def _regret(params: GameParams, s: StrategyPair, grid: GridSpec) -> float:
    worst = 0.0
    for pool, other in ((1, s.x2), (2, s.x1)):
        best = grid_best_response(params, other, pool, grid)
        own = s.x1 if pool == 1 else s.x2
        r_best, r_here = _rewards(params, pool, [best, own], other)
        worst = max(worst, float((r_best - r_here) / abs(r_here)))
    return worst


def exhaustive_equilibrium(params: GameParams, grid: GridSpec = DEFAULT_GRID,
                           eps: float = 1e-7, separation_cells: float = 10.0) -> ExhaustiveResult:
    """Locate every pure equilibrium by scanning the whole strategy space.

    For every pool-2 strategy ``b`` on the coarse grid, pool 1's grid best
    response ``a(b)`` is computed, then pool 2's reply to it.  Each sign
    change of ``reply(a(b)) - b`` brackets a fixed point of the joint best
    response; brackets are bisected down to the final cell width.  Profiles
    where some grid deviation gains more than ``eps`` (relative) are dropped,
    and survivors closer than ``separation_cells`` final widths are merged.
    """
    w1, w2 = grid.final_width(params.m1), grid.final_width(params.m2)
    bs = np.linspace(0.0, params.m2, grid.resolution)

    def phi(b):
        a = grid_best_responses(params, b, 1, grid)
        return grid_best_responses(params, a, 2, grid) - b, a

    vals, _ = phi(bs)
    brackets = []
    for k in range(len(bs) - 1):
        if vals[k] == 0.0:
            brackets.append((bs[k], bs[k]))
        elif vals[k] > 0.0 > vals[k + 1]:
            brackets.append((bs[k], bs[k + 1]))
    if vals[-1] == 0.0:
        brackets.append((bs[-1], bs[-1]))

    candidates, regrets = [], []
    for lo, hi in brackets:
        while hi - lo > w2:
            mid = 0.5 * (lo + hi)
            v, _ = phi(np.array([mid]))
            if v[0] > 0.0:
                lo = mid
            elif v[0] < 0.0:
                hi = mid
            else:
                lo = hi = mid
        b = 0.5 * (lo + hi)
        a = float(grid_best_responses(params, [b], 1, grid)[0])
        s = StrategyPair(a, float(b))
        reg = _regret(params, s, grid)
        if reg <= eps:
            candidates.append(s)
            regrets.append(reg)

    clusters: list[StrategyPair] = []
    for s in candidates:
        if not any(abs(s.x1 - c.x1) <= separation_cells * w1 and
                   abs(s.x2 - c.x2) <= separation_cells * w2 for c in clusters):
            clusters.append(s)
    return ExhaustiveResult(clusters, candidates, regrets, (w1, w2))
