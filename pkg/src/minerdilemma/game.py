"""Reward model of the two-pool block withholding game with betrayal.

Pool ``i`` owns mining power ``m_i`` and sends ``x_i`` of it to infiltrate the
other pool.  A fraction ``p`` of the infiltrators betray their own pool and
submit full solutions to the victim, so only ``(1 - p) * x_i`` of the
infiltrating power is actually withheld.  ``t`` is the mining power outside
both pools.

The ``raw_*`` functions do no validation and accept numpy arrays for the
profile coordinates; they back the validated API and the grid oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class GameParams:
    """Mining powers of the two pools, outside power and betrayal fraction."""

    m1: float
    m2: float
    t: float = 0.0
    p: float = 0.0

    def __post_init__(self):
        for name in ("m1", "m2", "t", "p"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.m1 <= 0:
            raise DomainError(f"m1 must be > 0, got {self.m1}")
        if self.m2 <= 0:
            raise DomainError(f"m2 must be > 0, got {self.m2}")
        if self.t < 0:
            raise DomainError(f"t must be >= 0, got {self.t}")
        if not 0.0 <= self.p < 1.0:
            raise DomainError(f"p must lie in [0, 1), got {self.p}")

    @property
    def m(self) -> float:
        """Total mining power of the system."""
        return self.m1 + self.m2 + self.t

    def swapped(self) -> "GameParams":
        return GameParams(self.m2, self.m1, self.t, self.p)

    def scaled(self, alpha: float) -> "GameParams":
        return GameParams(alpha * self.m1, alpha * self.m2, alpha * self.t, self.p)


@dataclass(frozen=True)
class StrategyPair:
    """Infiltrating powers ``(x1, x2)`` of a pure strategy profile."""

    x1: float
    x2: float

    def swapped(self) -> "StrategyPair":
        return StrategyPair(self.x2, self.x1)

    def scaled(self, alpha: float) -> "StrategyPair":
        return StrategyPair(alpha * self.x1, alpha * self.x2)

    @property
    def total(self) -> float:
        return self.x1 + self.x2


# --- unchecked formulas ---------------------------------------------------


def raw_effective_power(m1, m2, t, p, x1, x2):
    return m1 + m2 + t - (1.0 - p) * (x1 + x2)


def raw_direct_reward(m1, m2, t, p, x1, x2, pool=1):
    """Fraction of block rewards pool ``pool`` collects from its own mining."""
    if pool == 2:
        m1, m2, x1, x2 = m2, m1, x2, x1
    return (m1 - x1 + p * x2) / raw_effective_power(m1, m2, t, p, x1, x2)


def raw_avg_reward(m1, m2, t, p, x1, x2, pool=1):
    """Closed-form reward per unit of mining power of pool ``pool``."""
    if pool == 2:
        m1, m2, x1, x2 = m2, m1, x2, x1
    q = 1.0 - p
    num = m1 * m2 + m1 * x1 + p * m2 * x2 - q * x1 * x1 - q * x1 * x2
    den = raw_effective_power(m1, m2, t, p, x1, x2) * (m1 * m2 + m1 * x1 + m2 * x2)
    return num / den


def raw_d_avg_reward(m1, m2, t, p, x1, x2, pool=1):
    """Partial derivative of pool ``pool``'s average reward in its own strategy."""
    if pool == 2:
        m1, m2, x1, x2 = m2, m1, x2, x1
    q = 1.0 - p
    m = m1 + m2 + t
    s = x1 + x2
    inner = (
        q * (m2 * x2 * s * s + m1 * m2 * x1 * x1)
        + m1 * m1 * (m2 + x1) ** 2
        + p * m2 * m2 * x2 * x2
        - m * m2 * x2 * (2.0 * x1 + x2)
        + m1 * (m2 * ((1.0 + p) * m2 * x2 + 2.0 * x1 * x2) - m * x1 * (2.0 * m2 + x1))
    )
    den = (m - q * s) ** 2 * (m1 * m2 + m1 * x1 + m2 * x2) ** 2
    return q * inner / den


def raw_avg_rewards_linear(m1, m2, t, p, x1, x2):
    """Average rewards obtained by solving the 2x2 reward-sharing system.

    ``r1 (m1 + x2) = R1 + x1 r2`` and ``r2 (m2 + x1) = R2 + x2 r1``.
    Independent of the closed forms; used only for cross-checks.
    """
    big_r1 = raw_direct_reward(m1, m2, t, p, x1, x2, 1)
    big_r2 = raw_direct_reward(m1, m2, t, p, x1, x2, 2)
    a11, a12 = m1 + x2, -x1
    a21, a22 = -x2, m2 + x1
    det = a11 * a22 - a12 * a21
    r1 = (big_r1 * a22 - a12 * big_r2) / det
    r2 = (a11 * big_r2 - a21 * big_r1) / det
    return r1, r2


# --- validated API ----------------------------------------------------------


def _check(params: GameParams, s: StrategyPair, pool: int) -> None:
    if pool not in (1, 2):
        raise DomainError(f"pool must be 1 or 2, got {pool!r}")
    if not (0.0 <= s.x1 <= params.m1):
        raise DomainError(f"x1={s.x1} outside [0, m1={params.m1}]")
    if not (0.0 <= s.x2 <= params.m2):
        raise DomainError(f"x2={s.x2} outside [0, m2={params.m2}]")
    eff = raw_effective_power(params.m1, params.m2, params.t, params.p, s.x1, s.x2)
    if not eff > 0.0:
        raise DomainError(
            "effective mining power m - (1-p)(x1+x2) must be positive; "
            "the profile (m1, m2) with t = p = 0 leaves nobody mining"
        )


def effective_power(params: GameParams, s: StrategyPair) -> float:
    return raw_effective_power(params.m1, params.m2, params.t, params.p, s.x1, s.x2)


def direct_reward(params: GameParams, s: StrategyPair, pool: int) -> float:
    """Share of the block reward pool ``pool`` earns from its own blocks."""
    _check(params, s, pool)
    return raw_direct_reward(params.m1, params.m2, params.t, params.p, s.x1, s.x2, pool)


def avg_reward(params: GameParams, s: StrategyPair, pool: int) -> float:
    """Reward per unit mining power of ``pool``, infiltration income included."""
    _check(params, s, pool)
    return raw_avg_reward(params.m1, params.m2, params.t, params.p, s.x1, s.x2, pool)


def d_avg_reward(params: GameParams, s: StrategyPair, pool: int) -> float:
    """Derivative of ``avg_reward(params, s, pool)`` in the pool's own strategy."""
    _check(params, s, pool)
    return raw_d_avg_reward(params.m1, params.m2, params.t, params.p, s.x1, s.x2, pool)
