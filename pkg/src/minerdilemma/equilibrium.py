"""Unique pure Nash equilibrium of the two-pool game and its price of anarchy.

The equilibrium is found by case analysis rather than search:

* one pool stays honest (extreme equilibrium) exactly when the cubic ``g``
  is nonpositive for that orientation;
* equal pools play the symmetric closed form;
* without outside power (``t = 0``) the binary closed form applies;
* otherwise the total infiltration ``y* = x1* + x2*`` is the unique root of
  a quartic ``f`` in ``(0, (m1 + m2) / 2)`` and ``x1*`` follows from ``y*``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError, InternalError, NumericalError, PreconditionError
from .game import GameParams, StrategyPair, raw_d_avg_reward

MAX_BISECTIONS = 200
MAX_NEWTON = 20
BRACKET_RTOL = 1e-14
SNAP_SYMMETRIC_RTOL = 1e-12
# below this relative gap, x1 from y* loses too many digits to cancellation
NEAR_SYMMETRIC_RTOL = 1e-6
STATIONARY_TOL = 1e-6
BOUNDARY_TOL = 1e-10
ROUNDING_SLACK = 64 * 2.0**-52


class Kind(enum.Enum):
    EXTREME_X1_ZERO = "extreme-x1-zero"
    EXTREME_X2_ZERO = "extreme-x2-zero"
    SYMMETRIC = "symmetric"
    BINARY = "binary"
    GENERAL = "general"

    @property
    def is_extreme(self) -> bool:
        return self in (Kind.EXTREME_X1_ZERO, Kind.EXTREME_X2_ZERO)


@dataclass(frozen=True)
class Equilibrium:
    kind: Kind
    profile: StrategyPair
    y_star: float
    ppoa: float

    @property
    def x1(self) -> float:
        return self.profile.x1

    @property
    def x2(self) -> float:
        return self.profile.x2


@dataclass(frozen=True)
class GPolynomial:
    """``g`` as a cubic in the outside power: ``c3 t^3 + c2 t^2 + c1 t + c0``."""

    c3: float
    c2: float
    c1: float
    c0: float

    def __call__(self, t: float) -> float:
        return ((self.c3 * t + self.c2) * t + self.c1) * t + self.c0

    def derivative(self, t: float) -> float:
        return (3.0 * self.c3 * t + 2.0 * self.c2) * t + self.c1


@dataclass(frozen=True)
class FQuartic:
    """Quartic in the total infiltration; coefficients from ``y^4`` down."""

    a4: float
    a3: float
    a2: float
    a1: float
    a0: float

    @property
    def coefficients(self) -> tuple[float, float, float, float, float]:
        return (self.a4, self.a3, self.a2, self.a1, self.a0)

    def __call__(self, y: float) -> float:
        return (((self.a4 * y + self.a3) * y + self.a2) * y + self.a1) * y + self.a0

    def derivative(self, y: float) -> float:
        return ((4.0 * self.a4 * y + 3.0 * self.a3) * y + 2.0 * self.a2) * y + self.a1


# --- g and the extreme region ---------------------------------------------


def g_polynomial(p: float, m1: float, m2: float) -> GPolynomial:
    q = 1.0 - p
    return GPolynomial(
        4.0,
        4.0 * (3.0 * m1 + m2),
        12.0 * m1 * m1 + (2.0 + 8.0 * p - 2.0 * p * p) * m1 * m2 - q * q * m2 * m2,
        m1 * (m1 + p * m2) * (4.0 * m1 - q * q * m2),
    )


def eval_g(params: GameParams, swapped: bool = False) -> float:
    """Value of ``g(t, p, m1, m2)``, or ``g(t, p, m2, m1)`` when ``swapped``.

    Pool 1 (pool 2 if swapped) stays honest in equilibrium iff this is <= 0.
    """
    m1, m2 = (params.m2, params.m1) if swapped else (params.m1, params.m2)
    return g_polynomial(params.p, m1, m2)(params.t)


def t_star(p: float, m1: float, m2: float) -> float:
    """Largest outside power for which pool 1 stays honest.

    Requires ``m1 <= (1-p)^2 m2 / 4``; returns the unique nonnegative root of
    ``g(., p, m1, m2)``.
    """
    if not 0.0 <= p < 1.0:
        raise DomainError(f"p must lie in [0, 1), got {p}")
    if m1 <= 0 or m2 <= 0:
        raise DomainError("pool powers must be positive")
    if m1 > (1.0 - p) ** 2 * m2 / 4.0:
        raise PreconditionError(
            f"t* exists only when m1 <= (1-p)^2 m2 / 4; got m1={m1}, m2={m2}, p={p}"
        )
    g = g_polynomial(p, m1, m2)
    if g(0.0) >= 0.0:
        return 0.0
    scale = m1 + m2
    hi = scale
    while g(hi) <= 0.0:
        hi *= 2.0
    root = _bracketed_root(g, 0.0, hi, scale)
    return root


def _bracketed_root(fn, lo: float, hi: float, scale: float) -> float:
    """Root of ``fn`` with ``fn(lo) < 0 < fn(hi)``: bisection, then Newton."""
    f_lo = fn(lo)
    f_hi = fn(hi)
    if not (f_lo < 0.0 < f_hi):
        raise NumericalError(f"no sign change on [{lo}, {hi}]: f={f_lo}, {f_hi}")
    width_tol = BRACKET_RTOL * scale
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= width_tol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if f_mid < 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(MAX_NEWTON):
        slope = fn.derivative(x)
        if slope == 0.0:
            break
        step = fn(x) / slope
        nxt = x - step
        if not lo <= nxt <= hi or nxt == x:
            break
        x = nxt
    return x


def _extreme_partner(p: float, t: float, m_idle: float, m_active: float) -> float:
    """Infiltration of the active pool when the other pool stays honest."""
    if t == 0.0 and p == 0.0:
        return m_active / 2.0
    a = m_idle + t
    # rationalized root of the first-order condition; no cancellation and
    # continuous into the t = p = 0 branch
    return m_idle * m_active / (a + math.sqrt(a * a + m_active * (t + p * m_idle)))


def solve_extreme(params: GameParams, which: int = 1, *, check: bool = True) -> Equilibrium:
    """Extreme equilibrium in which pool ``which`` infiltrates nothing."""
    if which not in (1, 2):
        raise DomainError(f"which must be 1 or 2, got {which!r}")
    if check and eval_g(params, swapped=(which == 2)) > 0.0:
        raise PreconditionError(
            f"pool {which} is not idle in equilibrium (g > 0) for {params}"
        )
    if which == 1:
        x2 = _extreme_partner(params.p, params.t, params.m1, params.m2)
        profile = StrategyPair(0.0, x2)
        kind = Kind.EXTREME_X1_ZERO
    else:
        x1 = _extreme_partner(params.p, params.t, params.m2, params.m1)
        profile = StrategyPair(x1, 0.0)
        kind = Kind.EXTREME_X2_ZERO
    return _make(params, kind, profile)


# --- interior cases -------------------------------------------------------


def _symmetric_x(p: float, t: float, mi: float) -> float:
    b = 2.0 * t + (3.0 - p) * mi
    disc = b * b - 8.0 * (1.0 - p) * mi * mi
    # smaller root of 2(1-p) x^2 - b x + mi^2, written without 1/(1-p);
    # it never exceeds mi / 2, which rounding alone could otherwise break
    return min(2.0 * mi * mi / (b + math.sqrt(disc)), 0.5 * mi)


def solve_symmetric(params: GameParams) -> Equilibrium:
    """Equilibrium of two equally strong pools; both infiltrate the same amount."""
    if params.m1 != params.m2:
        raise PreconditionError(f"solve_symmetric needs m1 == m2, got {params.m1}, {params.m2}")
    x = _symmetric_x(params.p, params.t, params.m1)
    return _make(params, Kind.SYMMETRIC, StrategyPair(x, x))


def _binary_x(p: float, m1: float, m2: float) -> tuple[float, float]:
    s1, s2 = math.sqrt(m1), math.sqrt(m2)
    y = s1 * s2
    den = (1.0 + p) * (s1 + s2)
    return y * (2.0 * s1 - (1.0 - p) * s2) / den, y * (2.0 * s2 - (1.0 - p) * s1) / den


def solve_binary(params: GameParams) -> Equilibrium:
    """Equilibrium without outside mining power."""
    if params.t != 0.0:
        raise PreconditionError(f"solve_binary needs t == 0, got t={params.t}")
    q2 = (1.0 - params.p) ** 2
    if params.m1 <= q2 * params.m2 / 4.0:
        return solve_extreme(params, 1)
    if params.m2 <= q2 * params.m1 / 4.0:
        return solve_extreme(params, 2)
    x1, x2 = _binary_x(params.p, params.m1, params.m2)
    return _make(params, Kind.BINARY, StrategyPair(x1, x2))


def build_f(params: GameParams) -> FQuartic:
    """Quartic whose root in ``(0, (m1+m2)/2)`` is the total infiltration."""
    m1, m2, t, p = params.m1, params.m2, params.t, params.p
    if m1 == m2:
        raise PreconditionError("build_f needs m1 != m2; use solve_symmetric")
    if not t > 0.0:
        raise PreconditionError("build_f needs t > 0; use solve_binary")
    q = 1.0 - p
    pp2 = (1.0 + p) ** 2
    s = m1 + m2
    mm = m1 * m2
    return FQuartic(
        q * q * t,
        -q * (4.0 * t * t + 4.0 * s * t + pp2 * mm),
        4.0 * t**3
        + 8.0 * s * t * t
        + (4.0 * m1 * m1 + 4.0 * m2 * m2 + (11.0 + 3.0 * p * p - 2.0 * p) * mm) * t
        + pp2 * mm * s,
        q * mm * (pp2 * mm - 4.0 * s * t - 4.0 * t * t),
        -mm * mm * (pp2 * s + 4.0 * p * t),
    )


def root_f(q: FQuartic, m1: float, m2: float) -> float:
    """Unique root of the quartic in ``(0, (m1+m2)/2)``."""
    half = 0.5 * (m1 + m2)
    noise = ROUNDING_SLACK * sum(abs(a) * half**k for k, a in enumerate(reversed(q.coefficients)))
    if q(0.0) < 0.0 and -noise <= q(half) <= 0.0:
        # f(half) is lost in rounding, so the root sits at the end of the
        # bracket to working precision (tiny t with nearly equal pools)
        return half
    if not (q(0.0) < 0.0 < q(half)):
        raise NumericalError(
            f"quartic has no sign change on (0, {half}): f(0)={q(0.0)}, f(half)={q(half)}"
        )
    return _bracketed_root(q, 0.0, half, m1 + m2)


def x1_from_y(params: GameParams, y: float) -> float:
    """Pool 1's infiltration given the total ``y`` (stationarity identity)."""
    m1, m2, t, p = params.m1, params.m2, params.t, params.p
    if m1 == m2:
        raise DomainError("x1_from_y divides by m2 - m1; use solve_symmetric")
    q = 1.0 - p
    num = q * y * y - (2.0 * m1 + q * m2 + 2.0 * t) * y + 2.0 * m1 * m2
    return num / ((m2 - m1) * (1.0 + p))


def _gap_from_y(params: GameParams, y: float) -> float:
    """``x1 - x2`` given the total ``y``, stable when ``m1`` is close to ``m2``.

    Small root of the second stationarity identity rewritten in the
    difference ``d``; every coefficient carries ``m1 - m2`` explicitly.
    """
    m1, m2, t, p = params.m1, params.m2, params.t, params.p
    a1 = 1.0 + p + 2.0 * t / m2
    a2 = 1.0 + p + 2.0 * t / m1
    b_sum = (2.0 * m2 - (1.0 - p) * m1 + 2.0 * t) + (2.0 * m1 - (1.0 - p) * m2 + 2.0 * t)
    gap = m2 - m1
    c2 = 2.0 * t * gap / (m1 * m2)
    c1 = -2.0 * (y * (a1 + a2) + b_sum)
    c0 = c2 * y * y - 2.0 * y * (3.0 - p) * gap
    disc = c1 * c1 - 4.0 * c2 * c0
    return 2.0 * c0 / (-c1 + math.sqrt(disc))


def _solve_general(params: GameParams) -> Equilibrium:
    m1, m2 = params.m1, params.m2
    y = root_f(build_f(params), m1, m2)
    if abs(m2 - m1) < NEAR_SYMMETRIC_RTOL * (m1 + m2):
        d = _gap_from_y(params, y)
        x1 = 0.5 * (y + d)
    else:
        x1 = x1_from_y(params, y)
    x2 = y - x1
    slack = 1e-9 * params.m
    if x1 <= 0.0 or x2 <= 0.0:
        # only reachable on the g = 0 boundary, where both branches coincide
        if x1 <= 0.0 and x1 > -slack:
            return solve_extreme(params, 1, check=False)
        if x2 <= 0.0 and x2 > -slack:
            return solve_extreme(params, 2, check=False)
        raise InternalError(f"interior solution ({x1}, {x2}) out of range for {params}")
    return _make(params, Kind.GENERAL, StrategyPair(x1, x2))


# --- dispatch ---------------------------------------------------------------


def ppoa(params: GameParams, profile: StrategyPair) -> float:
    """Pure price of anarchy: nominal over effective power of the two pools."""
    nominal = params.m1 + params.m2
    effective = nominal - (1.0 - params.p) * (profile.x1 + profile.x2)
    if not effective > 0.0:
        raise DomainError(f"effective pool power {effective} is not positive")
    return nominal / effective


def _make(params: GameParams, kind: Kind, profile: StrategyPair) -> Equilibrium:
    return Equilibrium(kind, profile, profile.x1 + profile.x2, ppoa(params, profile))


def solve(params: GameParams) -> Equilibrium:
    """The unique pure Nash equilibrium of the two-pool game."""
    g1 = eval_g(params, swapped=False)
    g2 = eval_g(params, swapped=True)
    if g1 <= 0.0 and g2 <= 0.0:
        raise InternalError(f"both pools flagged idle (g={g1}, {g2}) for {params}")
    if g1 <= 0.0:
        eq = solve_extreme(params, 1)
    elif g2 <= 0.0:
        eq = solve_extreme(params, 2)
    elif params.m1 == params.m2 or abs(params.m2 - params.m1) < SNAP_SYMMETRIC_RTOL * (
        params.m1 + params.m2
    ):
        if params.m1 == params.m2:
            eq = solve_symmetric(params)
        else:
            x = _symmetric_x(params.p, params.t, 0.5 * (params.m1 + params.m2))
            eq = _make(params, Kind.SYMMETRIC, StrategyPair(x, x))
    elif params.t == 0.0:
        eq = solve_binary(params)
    else:
        eq = _solve_general(params)
    check_equilibrium(params, eq)
    return eq


def check_equilibrium(params: GameParams, eq: Equilibrium) -> None:
    """Raise InternalError unless ``eq`` meets the first-order equilibrium conditions."""
    m1, m2, t, p = params.m1, params.m2, params.t, params.p
    x1, x2 = eq.profile.x1, eq.profile.x2
    if not (0.0 <= x1 < m1 and 0.0 <= x2 < m2):
        raise InternalError(f"profile ({x1}, {x2}) outside the strategy space")
    if x1 == 0.0 and x2 == 0.0:
        raise InternalError("honest mining is never an equilibrium")
    if eq.y_star > 0.5 * (m1 + m2) * (1.0 + 1e-12):
        raise InternalError(f"total infiltration {eq.y_star} exceeds (m1+m2)/2")
    if not 1.0 < eq.ppoa <= 2.0 * (1.0 + 1e-12):
        raise InternalError(f"price of anarchy {eq.ppoa} outside (1, 2]")
    norm = params.m**2
    d1 = raw_d_avg_reward(m1, m2, t, p, x1, x2, 1) * norm
    d2 = raw_d_avg_reward(m1, m2, t, p, x1, x2, 2) * norm
    for d, x in ((d1, x1), (d2, x2)):
        if x == 0.0:
            if d > BOUNDARY_TOL:
                raise InternalError(f"idle pool could gain by attacking (slope {d})")
        elif abs(d) > STATIONARY_TOL:
            raise InternalError(f"interior coordinate is not stationary (slope {d})")
