import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symheat.errors import DomainError
from symheat.exact import (
    BlowupOracle,
    BlowupSpec,
    BoostedOracle,
    FundamentalOracle,
    HopfOracle,
    InvariantSolutionSpec,
    LinearInvariantOracle,
    SemilinearOracle,
    blowup_profile,
    blowup_time_step,
    blowup_times,
    fundamental_solution,
    limit_profile,
    linear_exact,
    linear_mesh_trajectory,
    profile_residual,
    semilinear_exact,
    semilinear_log_amplitude,
    semilinear_log_amplitude_closed,
    semilinear_mesh,
)

LIN = InvariantSolutionSpec("LINEAR", alpha=1.0, f0=1.0)


def heat_defect(u, x, t, d=1e-3):
    """u_t - u_xx by fourth-order central differences."""
    ut = (-u(x, t + 2 * d) + 8 * u(x, t + d) - 8 * u(x, t - d) + u(x, t - 2 * d)) / (12 * d)
    uxx = (-u(x + 2 * d, t) + 16 * u(x + d, t) - 30 * u(x, t) + 16 * u(x - d, t) - u(x - 2 * d, t)) / (12 * d**2)
    return ut - uxx


class TestLinear:
    @pytest.mark.parametrize("x,t,expected", [(0, 0, 1.0), (0, 3, 0.5), (2, 0, math.exp(-1))])
    def test_values(self, x, t, expected):
        assert linear_exact(LIN, x, t) == pytest.approx(expected, rel=1e-15)

    def test_trajectory(self):
        assert linear_mesh_trajectory(LIN, 1.0, 1.0) == 2.0
        np.testing.assert_array_equal(linear_mesh_trajectory(LIN, 0.0, np.linspace(0, 5, 6)), 0.0)

    @pytest.mark.parametrize("x,t,expected", [(0, 1, 1.0), (0, 4, 0.5), (2, 1, math.exp(-1))])
    def test_fundamental(self, x, t, expected):
        assert fundamental_solution(1.0, x, t) == pytest.approx(expected, rel=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            linear_exact(LIN, 0, -1)
        with pytest.raises(DomainError):
            fundamental_solution(1, 0, 0)
        with pytest.raises(DomainError):
            InvariantSolutionSpec("LINEAR", alpha=0.0)
        with pytest.raises(DomainError):
            InvariantSolutionSpec("LINEAR", alpha=1.0, f0=-1)

    def test_heat_equation(self):
        x = np.linspace(-3, 3, 13)
        for u in (lambda x, t: linear_exact(LIN, x, t), lambda x, t: fundamental_solution(2.0, x, t)):
            assert np.max(np.abs(heat_defect(u, x, 1.5))) < 1e-8

    def test_fundamental_grid_law(self):
        o = FundamentalOracle(1.0)
        np.testing.assert_allclose(o.advance(np.array([-2.0, 1.0]), 10.0, 10.05), [-2.01, 1.005], rtol=1e-15)


class TestSemilinear:
    @pytest.mark.parametrize("delta", [1, -1])
    @pytest.mark.parametrize("f0", [0.0, 0.7])
    def test_recursion_matches_partial_sum(self, delta, f0):
        spec = InvariantSolutionSpec("SEMILINEAR", alpha=1.0, f0=f0, delta=delta, tau=0.02)
        f = semilinear_log_amplitude(spec, 50)
        closed = np.array([semilinear_log_amplitude_closed(spec, j) for j in range(51)])
        np.testing.assert_allclose(closed, f, rtol=1e-12, atol=1e-12)

    def test_mesh(self):
        spec = InvariantSolutionSpec("SEMILINEAR", alpha=1.0, delta=1, tau=0.1)
        assert semilinear_mesh(spec, 1.0, math.log(3)) == pytest.approx(2.0, rel=1e-15)

    def test_cauchy_datum_and_center(self):
        spec = InvariantSolutionSpec("SEMILINEAR", alpha=1.0, f0=0.3, delta=1, tau=0.05)
        x = np.linspace(-2, 2, 9)
        # t = 0: ln u = f(0) - x^2/8 for alpha = 1
        np.testing.assert_allclose(np.log(semilinear_exact(spec, x, 0)), 0.3 - x**2 / 8, rtol=1e-14)
        f = semilinear_log_amplitude(spec, 10)
        assert semilinear_exact(spec, 0.0, 10) == pytest.approx(math.exp(f[10]), rel=1e-15)

    @pytest.mark.parametrize("delta", [1, -1])
    def test_pde_to_first_order(self, delta):
        # the discrete solution approaches a solution of u_t = u_xx + delta u ln u as tau -> 0
        def defect(tau):
            spec = InvariantSolutionSpec("SEMILINEAR", alpha=1.0, f0=0.2, delta=delta, tau=tau)
            j = round(0.5 / tau)
            x = 0.7
            u = lambda k, x: semilinear_exact(spec, x, k)  # noqa: E731
            h = 1e-3
            ut = (u(j + 1, x) - u(j - 1, x)) / (2 * tau)
            uxx = (u(j, x + h) - 2 * u(j, x) + u(j, x - h)) / h**2
            return abs(ut - uxx - delta * u(j, x) * math.log(u(j, x)))
        assert defect(0.005) < defect(0.01) < 0.05

    def test_oracle_grid(self):
        o = SemilinearOracle(1.0, 0.0, 1, 0.1)
        assert o.index(0.3) == 3
        with pytest.raises(DomainError):
            o.u(0.0, 0.15)
        x0 = np.array([-1.0, 2.0])
        np.testing.assert_allclose(o.advance(o.advance(x0, 0.0, 0.1), 0.1, 0.2), o.advance(x0, 0.0, 0.2))


class TestBlowup:
    SPEC = BlowupSpec(rho=2.0, M=5)

    def test_derived_constants(self):
        s = self.SPEC
        assert s.h == pytest.approx(math.sqrt(2), rel=1e-15)
        assert s.localization_length == pytest.approx(6 * math.sqrt(2), rel=1e-14)
        assert s.wavenumber == pytest.approx(0.370240, abs=5e-7)
        assert s.blowup_time == pytest.approx(1 / 3, rel=1e-15)

    def test_profile_shape(self):
        theta = blowup_profile(self.SPEC)
        assert theta.size == 7
        assert theta[0] == 0 and abs(theta[-1]) < 1e-15
        assert np.all(theta[1:-1] > 0)

    @pytest.mark.parametrize("M", [2, 3, 5, 10, 40, 200])
    def test_profile_equation(self, M):
        s = BlowupSpec(2.0, M)
        theta = blowup_profile(s)
        assert np.max(np.abs(profile_residual(theta, s.h))) <= 1e-9 * np.max(theta**3)

    def test_limit(self):
        # large M: discrete arch approaches sqrt(3/4) sin(x/3), l_h -> 3 pi
        s = BlowupSpec(2.0, 400)
        assert s.localization_length == pytest.approx(3 * math.pi, rel=1e-4)
        assert np.max(np.abs(blowup_profile(s) - limit_profile(s.nodes))) < 1e-4

    def test_time_steps(self):
        assert blowup_time_step(self.SPEC, 0) == 0.25
        assert blowup_time_step(self.SPEC, 1) == 0.0625
        t = blowup_times(self.SPEC, 60)
        assert t[-1] == pytest.approx(1 / 3, rel=1e-15)
        with pytest.raises(DomainError):
            blowup_time_step(self.SPEC, -1)

    @given(st.floats(1.01, 10), st.floats(1, 4))
    def test_separable_identity(self, rho, sigma):
        s = BlowupSpec(rho, 5, sigma)
        for j in range(5):
            lhs = (rho ** (j + 1) - rho**j) / blowup_time_step(s, j)
            assert lhs == pytest.approx(rho ** ((j + 1) * (sigma + 1)) / sigma, rel=1e-12)

    def test_T_continuous_near_one(self):
        # T -> 1 as rho -> 1 for sigma = 2
        Ts = [BlowupSpec(1 + e, 5).blowup_time for e in (1e-2, 1e-4, 1e-6)]
        assert abs(Ts[2] - 1) < abs(Ts[1] - 1) < abs(Ts[0] - 1) < 0.02

    def test_amplitude_matches_time_law(self):
        o = BlowupOracle(self.SPEC)
        for j, t in enumerate(blowup_times(self.SPEC, 8)):
            assert o.amplitude_at(t) == 2.0**j
            assert (1 - t / self.SPEC.blowup_time) ** -0.5 == pytest.approx(2.0**j, rel=1e-12)
        with pytest.raises(DomainError):
            o.amplitude_at(0.4)

    def test_spec_domain(self):
        with pytest.raises(DomainError):
            BlowupSpec(1.0, 5)
        with pytest.raises(DomainError):
            BlowupSpec(2.0, 1)


class TestOracles:
    def test_boosted_solves_heat(self):
        o = BoostedOracle(LinearInvariantOracle(1.0), 0.3)
        assert np.max(np.abs(heat_defect(o.u, np.linspace(-2, 2, 9), 0.8))) < 1e-8

    def test_boosted_trajectory(self):
        base = FundamentalOracle(1.0)
        o = BoostedOracle(base, 0.2)
        x = np.array([-1.0, 0.5])
        # image of a base trajectory point is on the boosted trajectory
        xb = base.advance(x, 10.0, 11.0)
        np.testing.assert_allclose(o.advance(x + 4.0, 10.0, 11.0), xb + 4.4, rtol=1e-15)

    def test_hopf(self):
        o = HopfOracle(FundamentalOracle(1.0))
        assert o.u(0.0, 1.0) == 0.0
        assert o.u(2.0, 1.0) == pytest.approx(2.0)

    @given(st.floats(-5, 5), st.floats(0.01, 20))
    def test_positive(self, x, t):
        assert fundamental_solution(1.0, x, t) > 0 or x * x / (4 * t) > 700
        assert linear_exact(LIN, x, t) > 0 or x * x / (4 * (t + 1)) > 700
