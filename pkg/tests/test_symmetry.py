import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import random_stencil, stencils
from symheat.errors import DegenerateExponent, DivisionByZero, GeometryViolation, MissingFlow, NonPositiveValue, UnknownSet
from symheat.exact import LinearInvariantOracle, SemilinearOracle
from symheat.grid import MeshLayer, Stencil, SymmetryOperator, layer_stencil
from symheat.schemes import Family, SchemeKind, dirichlet, oracle_boundary, residual, step
from symheat.symmetry import (
    apply_boost,
    apply_flow,
    linear_algebra,
    linear_invariants,
    ode_algebra,
    ode_invariants,
    operator_set,
    powerlaw_algebra,
    powerlaw_invariants,
    semilinear_algebra,
    semilinear_invariants,
    transform_stencil,
    verify_scheme_invariance,
)

LI = SchemeKind(Family.LINEAR_INVARIANT)
LO = SchemeKind(Family.LINEAR_ORTHOGONAL)
PROPS = settings(max_examples=100, deadline=None)


def assert_same(a, b, rtol=1e-10):
    np.testing.assert_allclose(a.values, b.values, rtol=rtol, atol=rtol)


class TestOde:
    def test_values(self):
        inv = ode_invariants(0, 1, 1, 1, 2, 2)
        np.testing.assert_array_equal(inv.values, [1, 2, 2, 1])
        assert inv["I2"] + inv["I3"] - 2 - inv["I4"] == 1
        assert inv.family == "ODE" and len(inv) == 4

    def test_constant_state(self):
        inv = ode_invariants(0, 0.5, 0.5, 3.0, 3.0, 3.0)
        assert inv["I2"] == inv["I3"] == 1
        assert inv["I4"] != 0

    def test_scaling(self):
        args = (0.3, 0.4, 0.7, 1.3, 2.1, 0.6)
        lam = 2.0
        x, hp, hm, u, up, um = args
        scaled = (lam * x, lam * hp, lam * hm, u / lam**2, up / lam**2, um / lam**2)
        assert_same(ode_invariants(*args), ode_invariants(*scaled), 1e-15)

    def test_zero(self):
        with pytest.raises(DivisionByZero):
            ode_invariants(0, 1, 1, 0, 1, 1)

    def test_representation(self):
        from symheat.schemes import solve_ode_bvp
        u = solve_ode_bvp(9, 0.25, 3.0, 1.0)
        inv = ode_invariants(0, 0.25, 0.25, u[1:-1], u[2:], u[:-2])
        np.testing.assert_allclose(inv["I1"], 1)
        np.testing.assert_allclose(inv["I2"] + inv["I3"] - 2, inv["I4"], atol=1e-12)


class TestPowerLaw:
    def test_trivial(self):
        s = Stencil.from_steps(tau=1, h_plus=1, h_minus=1)
        np.testing.assert_array_equal(powerlaw_invariants(s, 2, 3).values, 1)

    def test_direct(self):
        s = Stencil.from_steps(tau=4, h_plus=1, h_minus=1)
        inv = powerlaw_invariants(s, 2, 3)
        assert (inv["I1"], inv["I2"]) == (1, 4)
        assert len(inv) == 7

    def test_degenerate(self):
        with pytest.raises(DegenerateExponent):
            powerlaw_invariants(Stencil.from_steps(tau=1, h_plus=1, h_minus=1), 2, 1)

    @PROPS
    @given(stencils(orthogonal=True), st.floats(0, 3), st.floats(1.5, 5), st.floats(-0.5, 0.5))
    def test_flows(self, s, sigma, n, a):
        before = powerlaw_invariants(s, sigma, n)
        for op in powerlaw_algebra(sigma, n):
            assert_same(before, powerlaw_invariants(transform_stencil(op, s, a), sigma, n))


class TestSemilinear:
    def test_constant(self):
        s = Stencil.from_steps(tau=0.2, h_plus=0.3, h_minus=0.4, h_plus_new=0.5, h_minus_new=0.6)
        inv = semilinear_invariants(s, 1)
        np.testing.assert_allclose(inv.values[:5], [0.2, 0.3, 0.4, 0.5, 0.6])
        np.testing.assert_array_equal(inv.values[5:], 0)
        assert len(inv) == 10

    def test_positive(self):
        with pytest.raises(NonPositiveValue):
            semilinear_invariants(Stencil.from_steps(tau=1, h_plus=1, h_minus=1, u=-1), 1)

    @PROPS
    @given(stencils(), st.sampled_from([1, -1]), st.floats(-0.5, 0.5))
    def test_flows(self, s, delta, a):
        before = semilinear_invariants(s, delta)
        for op in semilinear_algebra(delta):
            assert_same(before, semilinear_invariants(transform_stencil(op, s, a), delta))

    @pytest.mark.parametrize("delta", [1, -1])
    def test_representation(self, delta):
        rng = np.random.default_rng(1)
        x = np.linspace(-1, 1, 12) + rng.uniform(-0.02, 0.02, 12)
        old = MeshLayer(0.3, x, np.exp(rng.uniform(-1, 1, 12)))
        new = step(SchemeKind(Family.SEMILINEAR, delta=delta), old, 0.01, dirichlet(1, 1))
        s = layer_stencil(old, new)
        inv = semilinear_invariants(s, delta)
        np.testing.assert_allclose(inv["I8"], 0, atol=1e-12)
        rhs = 8 / delta * np.expm1(delta * inv["I1"]) ** 2 / (inv["I2"] + inv["I3"]) * inv["I6"]
        np.testing.assert_allclose(inv["I10"], rhs, rtol=1e-10, atol=1e-12)


class TestLinear:
    def test_constant(self):
        h, tau = 0.5, 0.1
        inv = linear_invariants(Stencil.from_steps(tau=tau, h_plus=h, h_minus=h, u=3))
        expected = [1, 1, h * h / tau, math.sqrt(tau) / h, h * h / (4 * tau), h * h / (4 * tau), 0, 0]
        np.testing.assert_allclose(inv.values, expected, rtol=1e-15)
        assert inv.as_dict()["I3"] == pytest.approx(2.5)

    @PROPS
    @given(stencils(t_min=0.0), st.floats(-0.05, 0.05))
    def test_flows(self, s, a):
        before = linear_invariants(s)
        for op in linear_algebra():
            assert_same(before, linear_invariants(transform_stencil(op, s, a)))

    def test_projective_domain(self):
        s = Stencil.from_steps(tau=0.5, h_plus=1, h_minus=1, t=1.0)
        with pytest.raises(GeometryViolation):
            transform_stencil(linear_algebra()[4], s, 1.0)


class TestFlows:
    @pytest.mark.parametrize("ops", [ode_algebra(), powerlaw_algebra(2, 3), powerlaw_algebra(0.5, 4),
                                     semilinear_algebra(1), semilinear_algebra(-1), linear_algebra()])
    def test_generator_matches_flow(self, ops):
        rng = np.random.default_rng(7)
        t, x, u = rng.uniform(0.1, 1, 20), rng.uniform(-1, 1, 20), rng.uniform(0.5, 2, 20)
        eps = 1e-5
        for op in ops:
            plus, minus = op.flow(t, x, u, eps), op.flow(t, x, u, -eps)
            deriv = [(np.broadcast_to(p, t.shape) - np.broadcast_to(m, t.shape)) / (2 * eps)
                     for p, m in zip(plus, minus)]
            for d, c in zip(deriv, op.coefficients(t, x, u)):
                np.testing.assert_allclose(d, c, rtol=1e-8, atol=1e-8, err_msg=op.name)

    def test_boost_values(self):
        layer = MeshLayer(1.0, [-1, 0, 1], [1, 1, 1])
        (b,) = apply_boost([layer], 1.0)
        assert b.t == 1 and b.xs[1] == 2 and b.us[1] == pytest.approx(math.exp(-1))
        assert apply_boost([layer], 0.0)[0] == layer

    @PROPS
    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 3))
    def test_boost_group_law(self, a, b, t):
        xs = np.linspace(-2, 2, 7)
        layer = MeshLayer(t, xs, np.exp(-xs**2))
        two = apply_boost(apply_boost([layer], a), b)[0]
        one = apply_boost([layer], a + b)[0]
        np.testing.assert_allclose(two.xs, one.xs, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(two.us, one.us, rtol=1e-12)
        back = apply_boost(apply_boost([layer], a), -a)[0]
        np.testing.assert_allclose(back.us, layer.us, rtol=1e-12)

    def test_apply_flow_examples(self):
        layer = MeshLayer(0.2, [0, 1, 2], [1, 2, 3])
        assert apply_flow(linear_algebra()[0], [layer], 0.5)[0].t == pytest.approx(0.7)
        a = 0.3
        sc = apply_flow(powerlaw_algebra(2, 4)[2], [layer], a)[0]
        assert sc.t == pytest.approx(0.2 * math.exp(6 * a))
        np.testing.assert_allclose(sc.xs, layer.xs * math.exp(a))
        np.testing.assert_allclose(sc.us, layer.us * math.exp(-2 * a))
        d4 = apply_flow(semilinear_algebra(-1)[3], [layer], a)[0]
        np.testing.assert_allclose(d4.us, layer.us * math.exp(a * math.exp(-0.2)))

    def test_missing_flow_and_tilt(self):
        layer = MeshLayer(0, [0, 1, 2], [1, 1, 1])
        f = lambda t, x, u: 0 * t  # noqa: E731
        with pytest.raises(MissingFlow):
            apply_flow(SymmetryOperator("Z", f, f, f), [layer], 1.0)
        tilt = SymmetryOperator("T", lambda t, x, u: x, f, f, lambda t, x, u, a: (t + a * x, x, u))
        with pytest.raises(GeometryViolation):
            apply_flow(tilt, [layer], 0.1)

    def test_operator_set(self):
        assert [o.name for o in operator_set("linear")] == ["X1", "X2", "X3", "X4", "X5", "X6"]
        with pytest.raises(UnknownSet):
            operator_set("HEAT")


def gaussian_history(scheme, steps=20, tau=0.05):
    o = LinearInvariantOracle(1.0)
    x = np.linspace(-4, 4, 33)
    hist = [MeshLayer(0, x, o.u(x, 0))]
    bc = oracle_boundary(o, moving=scheme.moving)
    for _ in range(steps):
        hist.append(step(scheme, hist[-1], tau if scheme.moving else 0.02, bc))
    return hist


class TestSchemeInvariance:
    def test_invariant_scheme(self):
        hist = gaussian_history(LI)
        for a in (0.3, -0.3):
            rep = verify_scheme_invariance(LI, hist, "boost", a)
            assert rep.residual_after <= 1e-10 and rep.invariant(1e-10)

    def test_invariant_under_whole_algebra(self):
        hist = gaussian_history(LI)
        for op in linear_algebra():
            assert verify_scheme_invariance(LI, hist, op, 0.02).residual_after <= 1e-10, op.name

    def test_orthogonal_scheme(self):
        hist = gaussian_history(LO)
        zero = verify_scheme_invariance(LO, hist, "boost", 0.0)
        assert zero.residual_after == zero.residual_before
        rep = verify_scheme_invariance(LO, hist, "boost", 0.3)
        assert rep.residual_after > 1e3 * max(rep.residual_before, 1e-16)
        assert not rep.invariant(1e-10)

    @pytest.mark.parametrize("delta", [1, -1])
    def test_semilinear_scheme(self, delta):
        kind = SchemeKind(Family.SEMILINEAR, delta=delta)
        o = SemilinearOracle(1.0, 0.0, delta, 0.01)
        x = np.linspace(-2, 2, 21)
        hist = [MeshLayer(0, x, o.u(x, 0))]
        for _ in range(10):
            hist.append(step(kind, hist[-1], 0.01, oracle_boundary(o)))
        for op in semilinear_algebra(delta):
            assert verify_scheme_invariance(kind, hist, op, 0.2).residual_after <= 1e-10, op.name

    def test_requires_solution(self):
        hist = gaussian_history(LI)
        broken = hist[:-1] + [hist[-1].replace(us=hist[-1].us * 1.01)]
        with pytest.raises(ValueError):
            verify_scheme_invariance(LI, broken, "boost", 0.1)


class TestHopfIdentity:
    def test_random_stencils(self):
        rng = np.random.default_rng(2024)
        s = random_stencil(rng, 1000)
        w = Stencil.from_points(s.points()[0], s.points()[1], -2 * np.log(s.points()[2]))
        rl = residual(LI, s)
        rb = residual(SchemeKind(Family.BURGERS_POTENTIAL), w)
        scale = np.maximum(1, np.abs(rl))
        assert np.max(np.abs(rb - rl) / scale) <= 1e-12
