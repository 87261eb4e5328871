"""Exact closed-form layer.

Regime classification, optimal phase durations, the sum-SDoF lower bound,
the security constraints on the artificial-noise phase length, and the
transmit-antenna threshold.  Everything here is exact rational arithmetic
(`fractions.Fraction`); the irrational regime boundary theta = (7+sqrt(33))/8
is decided through an integer quadratic sign test, never through floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

__all__ = [
    "RegimeError",
    "AntennaConfig",
    "Regime",
    "PhasePlan",
    "phase_plan",
    "classify_regime",
    "sdof_lower_bound",
    "optimal_phase_plan",
    "scheme_sdof",
    "ConstraintCheck",
    "ConstraintReport",
    "security_constraints_ok",
    "antenna_threshold",
    "ceil_threshold",
    "THETA",
]

# Ratio M/N above which widening the arrays stops helping; floats are for
# display only, decisions use ratio_vs_threshold.
THETA = (7.0 + math.sqrt(33.0)) / 8.0


class RegimeError(ValueError):
    """An operation was asked for outside its antenna regime."""


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts: M per transmitter, N per receiver."""

    m: int
    n: int

    def __post_init__(self):
        if not (isinstance(self.m, int) and isinstance(self.n, int)):
            raise TypeError("antenna counts must be integers")
        if self.m < 1 or self.n < 1:
            raise ValueError("antenna counts must be >= 1")


class Regime(Enum):
    SILENT = "silent"  # M <= N: no secure transmission possible
    LOW_RATIO = "low-ratio"  # N < M <= theta*N
    HIGH_RATIO = "high-ratio"  # theta*N < M <= 2N
    SATURATED = "saturated"  # M > 2N: extra antennas are idle


def ratio_vs_threshold(m: int, n: int) -> int:
    """Sign of 4M^2 - 7MN + N^2, which for M > N matches sign(M/N - theta).

    Exact integer arithmetic; the quadratic has roots (7 +- sqrt(33))/8 and
    the lower root is below 1, so for M > N only the upper root matters.
    """
    q = 4 * m * m - 7 * m * n + n * n
    return (q > 0) - (q < 0)


def classify_regime(cfg: AntennaConfig) -> Regime:
    """Unique regime tag for an antenna configuration."""
    if cfg.m <= cfg.n:
        return Regime.SILENT
    if cfg.m > 2 * cfg.n:
        return Regime.SATURATED
    if ratio_vs_threshold(cfg.m, cfg.n) <= 0:
        return Regime.LOW_RATIO
    return Regime.HIGH_RATIO


def sdof_lower_bound(cfg: AntennaConfig) -> Fraction:
    """Achievable sum-SDoF as an exact rational.

    Piecewise in M/N: 0 when M <= N, 3N(M-N)/(2M-N) up to theta*N,
    6MN/(8M-N) up to 2N, and 4N/5 beyond (where only 2N antennas are used).
    """
    m, n = cfg.m, cfg.n
    regime = classify_regime(cfg)
    if regime is Regime.SILENT:
        return Fraction(0)
    if regime is Regime.LOW_RATIO:
        return Fraction(3 * n * (m - n), 2 * m - n)
    if regime is Regime.HIGH_RATIO:
        return Fraction(6 * m * n, 8 * m - n)
    return Fraction(4 * n, 5)


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True)
class PhasePlan:
    """Durations of the four distinct phase lengths, as exact rationals.

    tau1: artificial-noise phases (I and II, each).
    tau2: joint data phases (III and V, each).
    tau3: single-transmitter data phases (IV and VI, each).
    tau4: interference-recurrence phase (VII).
    scale: minimal positive integer L with all L*tau_k integral.
    """

    tau1: Fraction
    tau2: Fraction
    tau3: Fraction
    tau4: Fraction
    scale: int

    @property
    def taus(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.tau1, self.tau2, self.tau3, self.tau4)

    @property
    def is_integral(self) -> bool:
        return all(t.denominator == 1 for t in self.taus)

    def integerized(self) -> "PhasePlan":
        """The plan scaled by L so that every duration is an integer slot count."""
        return phase_plan(*(t * self.scale for t in self.taus))

    def as_ints(self) -> tuple[int, int, int, int]:
        """Integer durations; raises if the plan has not been integerized."""
        if not self.is_integral:
            raise ValueError(
                "plan has fractional durations; call integerized() before simulating"
            )
        return tuple(int(t) for t in self.taus)

    def total_duration(self) -> Fraction:
        """Time slots spent by a full run: 2*tau1 + 2*tau2 + 2*tau3 + tau4."""
        return 2 * self.tau1 + 2 * self.tau2 + 2 * self.tau3 + self.tau4

    def scaled(self, factor) -> "PhasePlan":
        """A new plan with every duration multiplied by a positive rational."""
        factor = Fraction(factor)
        if factor <= 0:
            raise ValueError("scaling factor must be positive")
        return phase_plan(*(t * factor for t in self.taus))


def phase_plan(tau1, tau2, tau3, tau4) -> PhasePlan:
    """Build a PhasePlan from rationals, computing the minimal integerizer."""
    taus = tuple(Fraction(t) for t in (tau1, tau2, tau3, tau4))
    if any(t < 0 for t in taus):
        raise ValueError("phase durations must be nonnegative")
    scale = 1
    for t in taus:
        scale = _lcm(scale, t.denominator)
    return PhasePlan(*taus, scale=scale)


def optimal_phase_plan(cfg: AntennaConfig) -> PhasePlan:
    """Optimal durations for N < M <= 2N.

    The data phases are fixed at (tau2, tau3, tau4) = (2N-M, 2M-N, 2M-N);
    the AN phase is the smallest tau1 satisfying the security constraints:
    N(M+N)/(2(M-N)) in the low-ratio regime, 2M-N in the high-ratio regime.
    """
    regime = classify_regime(cfg)
    if regime not in (Regime.LOW_RATIO, Regime.HIGH_RATIO):
        raise RegimeError(
            f"optimal plan requires N < M <= 2N, got M={cfg.m}, N={cfg.n} ({regime.value})"
        )
    m, n = cfg.m, cfg.n
    tau2 = Fraction(2 * n - m)
    tau3 = Fraction(2 * m - n)
    if regime is Regime.LOW_RATIO:
        tau1 = Fraction(n * (m + n), 2 * (m - n))
    else:
        tau1 = Fraction(2 * m - n)
    return phase_plan(tau1, tau2, tau3, tau3)


def scheme_sdof(plan: PhasePlan, cfg: AntennaConfig) -> Fraction:
    """Data symbols delivered per time slot: 2M(2 tau2 + tau3) over the total duration.

    Invariant under uniform scaling of all four durations.
    """
    total = plan.total_duration()
    if total == 0:
        raise ValueError("plan has zero total duration")
    return Fraction(2 * cfg.m) * (2 * plan.tau2 + plan.tau3) / total


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    lhs: Fraction
    rhs: Fraction
    ok: bool

    def __str__(self):
        mark = "ok" if self.ok else "VIOLATED"
        return f"{self.name}: {self.lhs} <= {self.rhs} [{mark}]"


@dataclass(frozen=True)
class ConstraintReport:
    """Outcome of the three security constraints on the AN phase length."""

    checks: tuple[ConstraintCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "; ".join(str(c) for c in self.checks)


def security_constraints_ok(plan: PhasePlan, cfg: AntennaConfig) -> ConstraintReport:
    """Check tau2 <= tau1, tau3 <= tau1, and N(2 tau1 + tau2 + tau3) <= 2M tau1.

    These are exactly the conditions under which the artificial noise keeps
    the cross-receiver leakage bounded (rank of the eavesdropper's mixing
    matrix saturates); see the analysis module for the matrix-rank side.
    """
    t1, t2, t3, _ = plan.taus
    n, m = Fraction(cfg.n), Fraction(cfg.m)
    checks = (
        ConstraintCheck("tau2 <= tau1", t2, t1, t2 <= t1),
        ConstraintCheck("tau3 <= tau1", t3, t1, t3 <= t1),
        ConstraintCheck(
            "N(2 tau1 + tau2 + tau3) <= 2M tau1",
            n * (2 * t1 + t2 + t3),
            2 * m * t1,
            n * (2 * t1 + t2 + t3) <= 2 * m * t1,
        ),
    )
    return ConstraintReport(checks)


def ceil_threshold(n: int) -> int:
    """Smallest integer M with M > theta*N, decided exactly.

    theta*N is irrational for every N >= 1, so the strict/non-strict
    distinction never bites for integers.
    """
    if n < 1:
        raise ValueError("N must be >= 1")
    m = n + 1
    while ratio_vs_threshold(m, n) <= 0:
        m += 1
    return m


def antenna_threshold(n: int) -> tuple[float, int]:
    """Continuous threshold theta*N and the integer argmax of the bound.

    The argmax is over M in (N, 2N], computed by exact enumeration with
    ties broken toward smaller M (fewer transmit antennas).
    """
    if n < 1:
        raise ValueError("N must be >= 1")
    best_m = n + 1
    best = sdof_lower_bound(AntennaConfig(best_m, n))
    for m in range(n + 2, 2 * n + 1):
        value = sdof_lower_bound(AntennaConfig(m, n))
        if value > best:
            best, best_m = value, m
    return (THETA * n, best_m)
