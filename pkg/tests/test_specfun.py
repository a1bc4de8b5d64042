import math

import mpmath
import numpy as np
import pytest

from fracstab.errors import DomainError, NonConvergence, PoleError
from fracstab.specfun import (MlParams, gamma_fn, ml, ml_asymptotic,
                              mittag_leffler, rgamma)


def ml_brute(alpha, z, beta=1.0, dps=120, terms=1500):
    """Independent oracle: plain partial sum at high precision with exact
    mp-formed gamma arguments."""
    with mpmath.workdps(dps):
        a, b, zm = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpf(z)
        s, zp = mpmath.mpf(0), mpmath.mpf(1)
        for k in range(terms):
            s += zp / mpmath.gamma(a * k + b)
            zp *= zm
        return float(s)


class TestGamma:
    def test_integers(self):
        assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-14)
        assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-14)

    def test_half(self):
        assert gamma_fn(0.5) == pytest.approx(1.772453850905516, rel=1e-14)

    def test_4_3_against_table(self):
        # mpmath at 40 digits: 8.85534336045403701886788
        assert gamma_fn(4.3) == pytest.approx(8.855343360454037, rel=1e-14)

    def test_relative_error_over_range(self):
        xs = np.concatenate([np.linspace(0.05, 2.0, 200),
                             np.linspace(2.0, 170.0, 600)])
        worst = max(abs(gamma_fn(float(x)) - float(mpmath.gamma(float(x))))
                    / float(mpmath.gamma(float(x))) for x in xs)
        assert worst <= 1e-13

    def test_negative_arguments(self):
        for x in (-0.5, -1.5, -6.5, -10.3):
            ref = float(mpmath.gamma(x))
            assert gamma_fn(x) == pytest.approx(ref, rel=1e-12)

    def test_poles(self):
        for x in (0.0, -1.0, -2.0, -7.0):
            with pytest.raises(PoleError):
                gamma_fn(x)
        assert rgamma(0.0) == 0.0
        assert rgamma(-3.0) == 0.0


class TestMittagLeffler:
    def test_value_at_zero(self):
        for alpha in (0.3, 0.5, 0.7, 0.95, 1.0):
            assert ml(alpha, 0.0) == pytest.approx(1.0, abs=1e-14)

    def test_alpha_one_is_exp(self):
        for z in np.linspace(-30.0, 5.0, 36):
            assert ml(1.0, float(z)) == pytest.approx(math.exp(z), abs=1e-12)

    def test_half_at_minus_one_closed_form(self):
        # E_{1/2}(z) = exp(z^2) erfc(-z); independent erfc oracle from libm
        ref = math.e * math.erfc(1.0)
        assert ml(0.5, -1.0) == pytest.approx(ref, abs=1e-9)

    def test_frozen_points(self):
        assert ml(0.85, -2.5) == pytest.approx(0.1295295491025126, abs=1e-10)
        assert ml(0.7, -8.0) == pytest.approx(0.04606999238536239, abs=1e-10)

    def test_report_fields(self):
        r = mittag_leffler(MlParams(0.5), -1.0)
        assert r.method == "series"
        assert r.terms_used <= 200
        assert r.est_error >= 0.0
        r = mittag_leffler(MlParams(0.5), -14.0)
        assert r.method == "asymptotic"

    def test_est_error_is_honest(self):
        cases = [(0.5, -1.0), (0.5, -4.5), (0.5, -10.0), (0.7, -8.0),
                 (0.85, -30.0), (0.95, -17.0), (0.95, -150.0)]
        for a, z in cases:
            r = mittag_leffler(MlParams(a), z)
            true = abs(r.value - ml_brute(a, z))
            assert true <= max(2.0 * r.est_error, 1e-13)

    def test_monotone_decrease_on_negative_axis(self):
        # t -> E_alpha(-t^alpha) strictly decreasing on [0, 50]
        for alpha in (0.5, 0.7, 0.85, 0.95):
            ts = np.linspace(0.0, 50.0, 101)
            vals = [ml(alpha, -float(t) ** alpha if t > 0 else 0.0) for t in ts]
            diffs = np.diff(vals)
            assert np.all(diffs < 0.0), f"not strictly decreasing for alpha={alpha}"

    def test_branch_consistency(self):
        # Compare the two branches where each one individually meets the
        # tolerance; they must agree within 10x the configured tolerance.
        tol = 1e-10
        # Points where the series fits the 200-term budget AND the
        # asymptotic truncation error is below tol for that alpha.
        points = {0.5: -5.0, 0.7: -12.0, 0.85: -18.0, 0.95: -25.0}
        for alpha, z in points.items():
            big = mittag_leffler(MlParams(alpha), z, z_switch=1e9)   # force series
            small = mittag_leffler(MlParams(alpha), z, z_switch=0.0)  # force asymptotic
            assert big.method == "series"
            assert small.method == "asymptotic"
            assert abs(big.value - small.value) <= 10.0 * tol

    def test_asymptotic_tail_order(self):
        # |E_alpha(-t^alpha) - t^(-alpha)/Gamma(1-alpha)| = O(t^(-2 alpha)):
        # the ratio stays bounded over t in [20, 200].
        for alpha in (0.5, 0.7, 0.85, 0.95):
            ratios = []
            for t in np.geomspace(20.0, 200.0, 12):
                e = ml(alpha, -float(t) ** alpha)
                lead = ml_asymptotic(alpha, float(t))
                ratios.append(abs(e - lead) / t ** (-2.0 * alpha))
            assert max(ratios) < 1.0

    def test_nonconvergence_raised(self):
        # Large positive argument: series out of budget, no asymptotic branch.
        with pytest.raises(NonConvergence):
            mittag_leffler(MlParams(0.5), 400.0)

    def test_param_validation(self):
        with pytest.raises(DomainError):
            MlParams(0.0)
        with pytest.raises(DomainError):
            MlParams(2.5)
        with pytest.raises(DomainError):
            MlParams(0.5, 0.0)
        with pytest.raises(DomainError):
            mittag_leffler(MlParams(0.5), float("nan"))


class TestMlAsymptotic:
    def test_direct_substitution(self):
        assert ml_asymptotic(0.5, 100.0) == pytest.approx(0.05641895835477563, rel=1e-12)
        assert ml_asymptotic(0.5, 1.0) == pytest.approx(0.5641895835477563, rel=1e-12)

    def test_derived_gamma_oracle(self):
        # 50^-0.7 / Gamma(0.3), mpmath at 40 digits
        assert ml_asymptotic(0.7, 50.0) == pytest.approx(0.021618321664621263, rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            ml_asymptotic(1.0, 2.0)
        with pytest.raises(DomainError):
            ml_asymptotic(0.5, 0.0)
        with pytest.raises(DomainError):
            ml_asymptotic(0.5, -1.0)
