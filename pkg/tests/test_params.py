import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xsdof.params import (
    THETA,
    AntennaConfig,
    Regime,
    RegimeError,
    antenna_threshold,
    ceil_threshold,
    classify_regime,
    optimal_phase_plan,
    phase_plan,
    ratio_vs_threshold,
    scheme_sdof,
    sdof_lower_bound,
    security_constraints_ok,
)

scheme_configs = st.integers(1, 12).flatmap(
    lambda n: st.tuples(st.integers(n + 1, 2 * n), st.just(n))
)


def test_antenna_config_validation():
    with pytest.raises(ValueError):
        AntennaConfig(0, 1)
    with pytest.raises(TypeError):
        AntennaConfig(2.0, 1)


class TestRegime:
    def test_examples(self):
        assert classify_regime(AntennaConfig(2, 2)) is Regime.SILENT
        assert classify_regime(AntennaConfig(3, 2)) is Regime.LOW_RATIO
        assert classify_regime(AntennaConfig(4, 2)) is Regime.HIGH_RATIO
        assert classify_regime(AntennaConfig(5, 2)) is Regime.SATURATED

    def test_quadratic_sign_examples(self):
        # 4M^2 - 7MN + N^2 at the spec's probe points
        assert ratio_vs_threshold(3, 2) < 0  # 36 - 42 + 4 = -2
        assert ratio_vs_threshold(4, 2) > 0  # 64 - 56 + 4 = 12

    @settings(max_examples=200, deadline=None)
    @given(m=st.integers(1, 400), n=st.integers(1, 400))
    def test_quadratic_agrees_with_float_threshold(self, m, n):
        if m > n:  # the sign test encodes M/N vs theta only above the lower root
            assert (ratio_vs_threshold(m, n) > 0) == (m / n > THETA)

    @settings(max_examples=100, deadline=None)
    @given(m=st.integers(1, 60), n=st.integers(1, 60))
    def test_exactly_one_tag(self, m, n):
        regime = classify_regime(AntennaConfig(m, n))
        tags = [
            m <= n,
            n < m and ratio_vs_threshold(m, n) <= 0,
            n < m <= 2 * n and ratio_vs_threshold(m, n) > 0,
            m > 2 * n,
        ]
        # membership matches exactly one interval of the piecewise definition
        assert sum(tags) == 1
        index = tags.index(True)
        assert regime is (Regime.SILENT, Regime.LOW_RATIO, Regime.HIGH_RATIO, Regime.SATURATED)[index]


class TestBound:
    def test_examples(self):
        assert sdof_lower_bound(AntennaConfig(2, 2)) == 0
        assert sdof_lower_bound(AntennaConfig(3, 2)) == Fraction(3, 2)
        assert sdof_lower_bound(AntennaConfig(4, 2)) == Fraction(8, 5)
        assert sdof_lower_bound(AntennaConfig(5, 2)) == Fraction(8, 5)

    def test_continuity_at_double(self):
        # the high-ratio branch meets 4N/5 exactly at M = 2N
        for n in range(1, 30):
            assert Fraction(6 * 2 * n * n, 8 * 2 * n - n) == Fraction(4 * n, 5)

    def test_continuity_at_equal_antennas(self):
        for n in range(1, 30):
            assert Fraction(3 * n * (n - n), 2 * n - n) == 0

    def test_branch_gap_sign_matches_quadratic(self):
        # low-ratio minus high-ratio value has the sign of 4M^2-7MN+N^2
        for n in range(1, 12):
            for m in range(n + 1, 2 * n + 1):
                low = Fraction(3 * n * (m - n), 2 * m - n)
                high = Fraction(6 * m * n, 8 * m - n)
                gap = low - high
                q = ratio_vs_threshold(m, n)
                assert (gap > 0) == (q > 0) and (gap == 0) == (q == 0)

    @settings(max_examples=60, deadline=None)
    @given(scheme_configs)
    def test_monotone_around_threshold(self, mn):
        m, n = mn
        k = ceil_threshold(n)
        values = [sdof_lower_bound(AntennaConfig(mm, n)) for mm in range(n + 1, 2 * n + 1)]
        rising = values[: k - n - 1]
        falling = values[k - n - 1 :]
        assert all(b >= a for a, b in zip(rising, rising[1:]))
        assert all(b <= a for a, b in zip(falling, falling[1:]))


class TestOptimalPlan:
    def test_low_ratio_example(self):
        plan = optimal_phase_plan(AntennaConfig(3, 2))
        assert plan.taus == (5, 1, 4, 4) and plan.scale == 1

    def test_fractional_example(self):
        plan = optimal_phase_plan(AntennaConfig(4, 3))
        assert plan.taus == (Fraction(21, 2), 2, 5, 5)
        assert plan.scale == 2
        assert plan.integerized().as_ints() == (21, 4, 10, 10)

    def test_degenerate_high_ratio_example(self):
        plan = optimal_phase_plan(AntennaConfig(4, 2))
        assert plan.taus == (6, 0, 6, 6) and plan.scale == 1

    def test_regime_errors(self):
        with pytest.raises(RegimeError):
            optimal_phase_plan(AntennaConfig(2, 2))
        with pytest.raises(RegimeError):
            optimal_phase_plan(AntennaConfig(5, 2))

    @settings(max_examples=60, deadline=None)
    @given(scheme_configs)
    def test_counting_equals_bound(self, mn):
        m, n = mn
        cfg = AntennaConfig(m, n)
        plan = optimal_phase_plan(cfg)
        assert scheme_sdof(plan, cfg) == sdof_lower_bound(cfg)

    @settings(max_examples=60, deadline=None)
    @given(scheme_configs)
    def test_constraints_hold_at_optimum(self, mn):
        m, n = mn
        cfg = AntennaConfig(m, n)
        assert security_constraints_ok(optimal_phase_plan(cfg), cfg).ok


class TestSchemeSdof:
    def test_examples(self, cfg32):
        assert scheme_sdof(phase_plan(5, 1, 4, 4), cfg32) == Fraction(3, 2)
        assert scheme_sdof(phase_plan(6, 0, 6, 6), AntennaConfig(4, 2)) == Fraction(8, 5)
        assert scheme_sdof(phase_plan(10, 2, 8, 8), cfg32) == Fraction(3, 2)

    def test_zero_duration(self, cfg32):
        with pytest.raises(ValueError):
            scheme_sdof(phase_plan(0, 0, 0, 0), cfg32)

    @settings(max_examples=50, deadline=None)
    @given(
        num=st.integers(1, 40),
        den=st.integers(1, 40),
        taus=st.tuples(*[st.integers(0, 9)] * 4),
    )
    def test_scale_invariance(self, num, den, taus):
        if sum(taus) == 0:
            return
        cfg = AntennaConfig(3, 2)
        plan = phase_plan(*taus)
        scaled = plan.scaled(Fraction(num, den))
        assert scheme_sdof(plan, cfg) == scheme_sdof(scaled, cfg)


class TestConstraints:
    def test_optimal_is_tight(self, cfg32):
        report = security_constraints_ok(phase_plan(5, 1, 4, 4), cfg32)
        assert report.ok and bool(report)
        lhs, rhs = report.checks[2].lhs, report.checks[2].rhs
        assert lhs == rhs == 30

    def test_small_tau1_fails(self, cfg32):
        report = security_constraints_ok(phase_plan(2, 1, 4, 4), cfg32)
        assert not report.ok
        assert not report.checks[1].ok  # tau3 > tau1

    def test_mixed_violation(self):
        cfg = AntennaConfig(5, 3)
        report = security_constraints_ok(phase_plan(6, 1, 7, 7), cfg)
        assert not report.ok
        assert report.checks[0].ok          # tau2 <= tau1
        assert not report.checks[1].ok      # tau3 = 7 > 6
        assert report.checks[2].ok          # 3*20 = 60 <= 60

    @settings(max_examples=60, deadline=None)
    @given(scheme_configs, st.fractions(min_value=Fraction(1, 100), max_value=Fraction(3, 1)))
    def test_low_ratio_tau1_is_minimal(self, mn, delta):
        m, n = mn
        cfg = AntennaConfig(m, n)
        if classify_regime(cfg) is not Regime.LOW_RATIO:
            return
        plan = optimal_phase_plan(cfg)
        if delta > plan.tau1:
            return
        shrunk = phase_plan(plan.tau1 - delta, plan.tau2, plan.tau3, plan.tau4)
        assert not security_constraints_ok(shrunk, cfg).ok


class TestThreshold:
    def brute_argmax(self, n):
        best_m, best = n + 1, sdof_lower_bound(AntennaConfig(n + 1, n))
        for m in range(n + 2, 2 * n + 1):
            v = sdof_lower_bound(AntennaConfig(m, n))
            if v > best:
                best, best_m = v, m
        return best_m

    def test_examples(self):
        theta_n, best = antenna_threshold(8)
        assert theta_n == pytest.approx(12.7446, abs=1e-3)
        assert best == 13
        assert antenna_threshold(1)[1] == 2
        # enumeration: 8/5 at M=4 beats 3/2 at M=3
        assert antenna_threshold(2)[1] == 4

    def test_matches_enumeration(self):
        for n in range(1, 24):
            assert antenna_threshold(n)[1] == self.brute_argmax(n)

    def test_ceil_threshold_exact(self):
        for n in range(1, 200):
            assert ceil_threshold(n) == math.ceil(THETA * n)


class TestPhasePlan:
    def test_validation(self):
        with pytest.raises(ValueError):
            phase_plan(-1, 0, 1, 1)

    def test_integerization(self):
        plan = phase_plan(Fraction(21, 2), 2, 5, 5)
        assert not plan.is_integral
        with pytest.raises(ValueError):
            plan.as_ints()
        assert plan.integerized().as_ints() == (21, 4, 10, 10)
        assert plan.integerized().scale == 1

    def test_total_duration(self):
        assert phase_plan(5, 1, 4, 4).total_duration() == 24
