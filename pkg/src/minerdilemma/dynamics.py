"""N-pool best-response dynamics.

Each infiltrator takes part in the victim pool's reward distribution and
passes what it earns back to its own pool, so average rewards solve

    r_i (m_i + sum_j x[j, i]) = R_i + sum_j x[i, j] r_j,
    R_i = (m_i - sum_j x[i, j] + p sum_j x[j, i]) / (m - (1 - p) sum x),

which for two pools is exactly the pair of equations behind the closed forms
in :mod:`minerdilemma.game`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError, OptimizationError

DEFAULT_TOL = 2.0**-18
DEFAULT_MAX_ITERS = 10_000
SCHEDULES = ("jacobi", "roundrobin")

ROW_RTOL = 1e-12
MAX_NEWTON_STEPS = 200
MAX_BACKTRACKS = 60
HESSIAN_STEP = 1e-7


@dataclass(frozen=True)
class NGameParams:
    """Pool powers, outside power and betrayal fraction of an N-pool game."""

    pool_powers: tuple
    t: float = 0.0
    p: float = 0.0

    def __post_init__(self):
        powers = tuple(float(v) for v in self.pool_powers)
        if len(powers) < 2:
            raise DomainError(f"need at least two pools, got {len(powers)}")
        for i, v in enumerate(powers):
            if not math.isfinite(v) or v <= 0.0:
                raise DomainError(f"pool power m{i} must be finite and > 0, got {v}")
        object.__setattr__(self, "pool_powers", powers)
        t, p = float(self.t), float(self.p)
        if not math.isfinite(t) or t < 0.0:
            raise DomainError(f"t must be finite and >= 0, got {t}")
        if not 0.0 <= p < 1.0:
            raise DomainError(f"p must lie in [0, 1), got {p}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return len(self.pool_powers)

    @property
    def powers(self) -> np.ndarray:
        return np.array(self.pool_powers)

    @property
    def m(self) -> float:
        return sum(self.pool_powers) + self.t

    def scaled(self, alpha: float) -> "NGameParams":
        return NGameParams(tuple(alpha * v for v in self.pool_powers), alpha * self.t, self.p)


@dataclass(frozen=True)
class DynamicsResult:
    matrix: np.ndarray      # x[i, j]: power pool i sends into pool j
    rewards: np.ndarray     # average reward per pool at ``matrix``
    iterations: int         # completed sweeps
    converged: bool
    ppoa: float
    last_change: float      # L1 change of the final sweep
    schedule: str = "jacobi"


def zero_matrix(n: int) -> np.ndarray:
    return np.zeros((n, n))


def check_matrix(params: NGameParams, x) -> np.ndarray:
    """Validate a strategy matrix and return it as a float array."""
    x = np.asarray(x, dtype=float)
    n = params.n
    if x.shape != (n, n):
        raise DomainError(f"strategy matrix must be {n}x{n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)) or np.any(x < 0.0):
        raise DomainError("strategy matrix entries must be finite and >= 0")
    if np.any(np.diag(x) != 0.0):
        raise DomainError("a pool cannot infiltrate itself; diagonal must be 0")
    rows = x.sum(axis=1)
    bad = np.nonzero(rows > params.powers * (1.0 + 1e-12))[0]
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"pool {i} sends {rows[i]} but owns only {params.pool_powers[i]}")
    return x


# --- rewards --------------------------------------------------------------


def _system(powers, t, p, x):
    """Effective power, direct-reward numerators and the reward matrix."""
    col = x.sum(axis=0)
    eff = powers.sum() + t - (1.0 - p) * x.sum()
    num = powers - x.sum(axis=1) + p * col
    a = np.diag(powers + col) - x
    return eff, num, a


def raw_n_rewards(powers, t: float, p: float, x) -> np.ndarray:
    """Average rewards without validation; accepts ``p = 1``."""
    powers = np.asarray(powers, dtype=float)
    x = np.asarray(x, dtype=float)
    eff, num, a = _system(powers, t, p, x)
    if not eff > 0.0:
        raise DomainError(f"effective mining power {eff} is not positive")
    try:
        return np.linalg.solve(a, num / eff)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("reward system is singular") from exc


def n_rewards(params: NGameParams, x) -> np.ndarray:
    """Average reward per unit mining power of every pool."""
    x = check_matrix(params, x)
    return raw_n_rewards(params.powers, params.t, params.p, x)


def direct_rewards(params: NGameParams, x) -> np.ndarray:
    """Share of block rewards each pool earns from the blocks it finds itself."""
    x = check_matrix(params, x)
    eff, num, _ = _system(params.powers, params.t, params.p, x)
    if not eff > 0.0:
        raise DomainError(f"effective mining power {eff} is not positive")
    return num / eff


def n_ppoa(params: NGameParams, x) -> float:
    """Nominal over effective mining power of the pools."""
    x = check_matrix(params, x)
    nominal = float(params.powers.sum())
    effective = nominal - (1.0 - params.p) * float(x.sum())
    if not effective > 0.0:
        raise DomainError(f"effective pool power {effective} is not positive")
    return nominal / effective


# --- best response --------------------------------------------------------


class _RowProblem:
    """Pool ``i``'s reward as a function of its own row, other rows fixed."""

    def __init__(self, params: NGameParams, x: np.ndarray, i: int):
        self.powers = params.powers
        self.t, self.p = params.t, params.p
        self.x = np.array(x, dtype=float)
        self.i = i
        self.cap = params.pool_powers[i]
        self.cols = [j for j in range(params.n) if j != i]

    def _with(self, row):
        x = self.x
        x[self.i, self.cols] = row
        return x

    def value(self, row) -> float:
        x = self._with(row)
        eff, num, a = _system(self.powers, self.t, self.p, x)
        if not eff > 0.0:
            return -math.inf
        return float(np.linalg.solve(a, num / eff)[self.i])

    def value_and_grad(self, row):
        x = self._with(row)
        eff, num, a = _system(self.powers, self.t, self.p, x)
        if not eff > 0.0:
            return -math.inf, None
        inv = np.linalg.inv(a)
        r = inv @ (num / eff)
        w = inv[self.i]
        i, p = self.i, self.p
        ri = r[i]
        js = self.cols
        grad = (-w[i] + p * w[js] + (1.0 - p) * ri) / eff - r[js] * (w[js] - w[i])
        return float(ri), grad

    def maximize(self, start) -> np.ndarray:
        row = np.array(start, dtype=float)
        tol = ROW_RTOL * self.cap
        h = HESSIAN_STEP * self.cap
        val, grad = self.value_and_grad(row)
        for _ in range(MAX_NEWTON_STEPS):
            free = (row > 0.0) | (grad > 0.0)
            if not free.any():
                break
            direction = np.zeros_like(row)
            hess = self._hessian(row, grad, free, h)
            idx = np.nonzero(free)[0]
            try:
                np.linalg.cholesky(-hess)
                direction[idx] = -np.linalg.solve(hess, grad[idx])
            except np.linalg.LinAlgError:
                direction[idx] = self._coordinate_steps(row, idx)
            new_row, new_val = self._line_search(row, val, direction)
            step = float(np.abs(new_row - row).sum())
            if new_val < val:
                break
            row, val = new_row, new_val
            val, grad = self.value_and_grad(row)
            if step <= tol:
                break
        return row

    def _hessian(self, row, grad, free, h):
        idx = np.nonzero(free)[0]
        k = len(idx)
        hess = np.empty((k, k))
        for a, j in enumerate(idx):
            step = h if row.sum() + h <= self.cap else -h
            if row[j] + step < 0.0:
                step = h
            probe = row.copy()
            probe[j] += step
            _, g2 = self.value_and_grad(probe)
            if g2 is None:
                g2 = grad
            hess[:, a] = (g2[idx] - grad[idx]) / step
        return 0.5 * (hess + hess.T)

    def _coordinate_steps(self, row, idx):
        # one exact line maximization per free coordinate, as a fallback
        # direction when the local Hessian is not negative definite
        out = np.zeros(len(idx))
        for a, j in enumerate(idx):
            others = row.sum() - row[j]
            hi = self.cap - others
            lo_v = self._coord_value(row, j, 0.0)
            best, best_v = 0.0, lo_v
            grid = np.linspace(0.0, hi, 33)
            for v in grid[1:]:
                cur = self._coord_value(row, j, v)
                if cur > best_v:
                    best, best_v = v, cur
            out[a] = best - row[j]
        return out

    def _coord_value(self, row, j, v):
        probe = row.copy()
        probe[j] = v
        return self.value(probe)

    def _feasible_scale(self, row, direction) -> float:
        alpha = 1.0
        neg = direction < 0.0
        if neg.any():
            alpha = min(alpha, float(np.min(-row[neg] / direction[neg])))
        total = direction.sum()
        if total > 0.0:
            alpha = min(alpha, (self.cap - row.sum()) / total)
        return max(alpha, 0.0)

    def _line_search(self, row, val, direction):
        alpha = self._feasible_scale(row, direction)
        slack = 8.0 * np.finfo(float).eps * abs(val)
        for _ in range(MAX_BACKTRACKS):
            cand = np.maximum(row + alpha * direction, 0.0)
            cand_val = self.value(cand)
            if cand_val >= val - slack:
                return cand, max(cand_val, val) if cand_val >= val else cand_val
            alpha *= 0.5
        return row, val


def best_response(params: NGameParams, x, i: int) -> np.ndarray:
    """Row ``i`` maximizing pool ``i``'s average reward, other rows held fixed.

    Returned as a length-N array with a zero at position ``i``.  Starts from
    the incumbent row and from honest mining; ties go to the smaller row sum.
    """
    x = check_matrix(params, x)
    if not 0 <= i < params.n:
        raise DomainError(f"pool index {i} out of range for {params.n} pools")
    prob = _RowProblem(params, x, i)
    incumbent = x[i, prob.cols].copy()
    inc_val = prob.value(incumbent)
    best_row, best_val = None, -math.inf
    for start in (incumbent, np.zeros_like(incumbent)):
        row = prob.maximize(start)
        val = prob.value(row)
        if best_row is None or val > best_val * (1.0 + 4e-16) or (
            abs(val - best_val) <= 4e-16 * abs(best_val) and row.sum() < best_row.sum()
        ):
            best_row, best_val = row, val
    if best_val < inc_val - 1e-12 * abs(inc_val):
        raise OptimizationError(
            f"pool {i}: best response {best_val} is worse than the incumbent {inc_val}"
        )
    out = np.zeros(params.n)
    out[prob.cols] = best_row
    return out


def iterate(params: NGameParams, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS,
            schedule: str = "jacobi", start=None) -> DynamicsResult:
    """Best-response dynamics from honest mining.

    ``jacobi``: every pool responds to the previous sweep's matrix.
    ``roundrobin``: pools respond in index order to the latest matrix.
    Stops once a sweep changes the matrix by at most ``tol`` in L1 norm.
    """
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    if max_iters < 1:
        raise DomainError(f"max_iters must be >= 1, got {max_iters}")
    if schedule not in SCHEDULES:
        raise DomainError(f"schedule must be one of {SCHEDULES}, got {schedule!r}")
    n = params.n
    x = zero_matrix(n) if start is None else check_matrix(params, start).copy()
    change = math.inf
    converged = False
    sweeps = 0
    for sweeps in range(1, max_iters + 1):
        if schedule == "jacobi":
            new = np.vstack([best_response(params, x, i) for i in range(n)])
        else:
            new = x.copy()
            for i in range(n):
                new[i] = best_response(params, new, i)
        change = float(np.abs(new - x).sum())
        x = new
        if change <= tol:
            converged = True
            break
    return DynamicsResult(
        matrix=x,
        rewards=n_rewards(params, x),
        iterations=sweeps,
        converged=converged,
        ppoa=n_ppoa(params, x),
        last_change=change,
        schedule=schedule,
    )
