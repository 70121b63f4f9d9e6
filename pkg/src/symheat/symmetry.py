"""Difference invariants, operator algebras with closed-form flows, and invariance checks.

Each equation family comes with its Lie algebra of point operators (as
:class:`~symheat.grid.SymmetryOperator` with exact one-parameter flows) and
the complete list of difference invariants on the corresponding stencil.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DegenerateExponent, DivisionByZero, GeometryViolation, MissingFlow, UnknownSet
from .grid import MeshLayer, Stencil, SymmetryOperator
from .schemes import SchemeKind, _require_positive, max_residual


@dataclass(frozen=True)
class InvariantSet:
    family: str
    names: tuple
    values: np.ndarray

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.values[self.names.index(key)]
        return self.values[key]

    def __len__(self) -> int:
        return len(self.names)

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values.tolist()))


def _named(family: str, values) -> InvariantSet:
    vals = np.array(np.broadcast_arrays(*values), dtype=float)
    names = tuple(f"I{i + 1}" for i in range(len(values)))
    return InvariantSet(family, names, vals)


def ode_invariants(x, h_plus, h_minus, u, u_plus, u_minus) -> InvariantSet:
    """Invariants of ``d/dx`` and ``x d/dx - 2u d/du`` on the three-point stencil.

    The model ``(u+ - 2u + u-)/h^2 = u^2``, ``h+ = h-`` reads ``I2 + I3 - 2 = I4``, ``I1 = 1``.
    """
    if np.any(np.asarray(u) == 0) or np.any(np.asarray(h_minus) == 0):
        raise DivisionByZero("ODE invariants need u != 0 and h- != 0")
    return _named("ODE", (h_plus / h_minus, u_plus / u, u_minus / u, h_plus**2 * u))


def powerlaw_invariants(st: Stencil, sigma: float, n: float) -> InvariantSet:
    """The seven invariants of ``u_t = (u^sigma u_x)_x +- u^n`` on the orthogonal stencil."""
    if n == 1:
        raise DegenerateExponent("n = 1 leaves the exponent of tau undefined")
    _require_positive(st.u, st.u_new)
    p = (n - sigma - 1) / (2 * (n - 1))
    return _named("POWERLAW", (
        st.tau**p / st.h_plus,
        st.tau * st.u ** (n - 1),
        st.u_new / st.u,
        st.u_plus / st.u,
        st.u_minus / st.u,
        st.u_plus_new / st.u_new,
        st.u_minus_new / st.u_new,
    ))


def semilinear_invariants(st: Stencil, delta: int) -> InvariantSet:
    """The ten invariants of ``u_t = u_xx + delta u ln u`` on the evolutionary stencil."""
    _require_positive(*st.values())
    tau, dx = st.tau, st.dx
    hp, hm, hpn, hmn = st.h_plus, st.h_minus, st.h_plus_new, st.h_minus_new
    lx, lxb = np.log(st.u_plus / st.u) / hp, np.log(st.u / st.u_minus) / hm
    lxn, lxbn = np.log(st.u_plus_new / st.u_new) / hpn, np.log(st.u_new / st.u_minus_new) / hmn
    E = np.expm1(delta * tau)
    G = -np.expm1(-delta * tau)
    return _named("SEMILINEAR", (
        tau, hp, hm, hpn, hmn,
        lx - lxb,
        lxn - lxbn,
        delta * dx + 2 * E * (hm * lx + hp * lxb) / (hp + hm),
        delta * dx + 2 * G * (hmn * lxn + hpn * lxbn) / (hpn + hmn),
        delta * dx**2 + 4 * G * (np.log(st.u_new) - np.exp(delta * tau) * np.log(st.u)),
    ))


def linear_invariants(st: Stencil) -> InvariantSet:
    """The eight invariants of the heat equation's six-parameter group."""
    _require_positive(*st.values())
    tau, dx = st.tau, st.dx
    hp, hm, hpn, hmn = st.h_plus, st.h_minus, st.h_plus_new, st.h_minus_new
    lp, lm = np.log(st.u_plus / st.u), np.log(st.u_minus / st.u)
    lpn, lmn = np.log(st.u_plus_new / st.u_new), np.log(st.u_minus_new / st.u_new)
    return _named("LINEAR", (
        hp / hm,
        hpn / hmn,
        hpn * hp / tau,
        np.sqrt(tau) / hp * (st.u_new / st.u) * np.exp(dx**2 / (4 * tau)),
        hp**2 / (4 * tau) - hp**2 / (hp + hm) * (lp / hp + lm / hm),
        hpn**2 / (4 * tau) + hpn**2 / (hpn + hmn) * (lpn / hpn + lmn / hmn),
        dx * hp / tau + 2 * hp / (hp + hm) * (hm / hp * lp - hp / hm * lm),
        dx * hpn / tau + 2 * hpn / (hpn + hmn) * (hmn / hpn * lpn - hpn / hmn * lmn),
    ))


# --- operator algebras ---------------------------------------------------------

def _const(c):
    return lambda t, x, u: np.full(np.broadcast(t, x, u).shape, float(c))


_ZERO = _const(0.0)
_ONE = _const(1.0)


def _translate_t(t, x, u, a):
    return t + a, x, u


def _translate_x(t, x, u, a):
    return t, x + a, u


def ode_algebra() -> list[SymmetryOperator]:
    """``X1 = d/dx``, ``X2 = x d/dx - 2u d/du`` of ``u_xx = u^2``."""
    return [
        SymmetryOperator("X1", _ZERO, _ONE, _ZERO, _translate_x),
        SymmetryOperator("X2", _ZERO, lambda t, x, u: x, lambda t, x, u: -2 * u,
                         lambda t, x, u, a: (t, x * math.exp(a), u * math.exp(-2 * a))),
    ]


def powerlaw_algebra(sigma: float, n: float) -> list[SymmetryOperator]:
    """Translations and the scaling ``2(n-1)t d/dt + (n-sigma-1)x d/dx - 2u d/du``."""
    ct, cx = 2 * (n - 1), n - sigma - 1

    def scale(t, x, u, a):
        return t * math.exp(ct * a), x * math.exp(cx * a), u * math.exp(-2 * a)

    return [
        SymmetryOperator("X1", _ONE, _ZERO, _ZERO, _translate_t),
        SymmetryOperator("X2", _ZERO, _ONE, _ZERO, _translate_x),
        SymmetryOperator("X3", lambda t, x, u: ct * t, lambda t, x, u: cx * x,
                         lambda t, x, u: -2 * u, scale),
    ]


def semilinear_algebra(delta: int) -> list[SymmetryOperator]:
    """Four operators of ``u_t = u_xx + delta u ln u``."""
    d = delta

    def galilean(t, x, u, a):
        e = np.exp(d * t)
        return t, x + 2 * a * e, u * np.exp(-d * e * (a * x + a**2 * e))

    def dilate(t, x, u, a):
        return t, x, u * np.exp(a * np.exp(d * t))

    return [
        SymmetryOperator("X1", _ONE, _ZERO, _ZERO, _translate_t),
        SymmetryOperator("X2", _ZERO, _ONE, _ZERO, _translate_x),
        SymmetryOperator("X3", _ZERO, lambda t, x, u: 2 * np.exp(d * t),
                         lambda t, x, u: -d * np.exp(d * t) * x * u, galilean),
        SymmetryOperator("X4", _ZERO, _ZERO, lambda t, x, u: np.exp(d * t) * u, dilate),
    ]


def boost_flow(t, x, u, a):
    """``x + 2ta``, ``u e^{-xa - ta^2}``: flow of ``2t d/dx - xu d/du``."""
    return t, x + 2 * t * a, u * np.exp(-x * a - t * a**2)


def _projective_flow(t, x, u, a):
    s = 1 - 4 * a * t
    if np.any(s <= 0):
        raise GeometryViolation("projective flow leaves its domain (1 - 4at <= 0)")
    return t / s, x / s, u * np.sqrt(s) * np.exp(-a * x**2 / s)


def linear_algebra() -> list[SymmetryOperator]:
    """The six point operators of ``u_t = u_xx`` (superposition excluded)."""
    return [
        SymmetryOperator("X1", _ONE, _ZERO, _ZERO, _translate_t),
        SymmetryOperator("X2", _ZERO, _ONE, _ZERO, _translate_x),
        SymmetryOperator("X3", _ZERO, lambda t, x, u: 2 * t, lambda t, x, u: -x * u, boost_flow),
        SymmetryOperator("X4", lambda t, x, u: 2 * t, lambda t, x, u: x, _ZERO,
                         lambda t, x, u, a: (t * math.exp(2 * a), x * math.exp(a), u)),
        SymmetryOperator("X5", lambda t, x, u: 4 * t**2, lambda t, x, u: 4 * t * x,
                         lambda t, x, u: -(x**2 + 2 * t) * u, _projective_flow),
        SymmetryOperator("X6", _ZERO, _ZERO, lambda t, x, u: u,
                         lambda t, x, u, a: (t, x, u * math.exp(a))),
    ]


def operator_set(name: str, sigma: float = 2.0, n: float = 3.0, delta: int = 1) -> list[SymmetryOperator]:
    key = name.upper()
    if key == "ODE":
        return ode_algebra()
    if key == "POWERLAW":
        return powerlaw_algebra(sigma, n)
    if key == "SEMILINEAR":
        return semilinear_algebra(delta)
    if key == "LINEAR":
        return linear_algebra()
    raise UnknownSet(f"unknown operator set {name!r}; choose ODE, POWERLAW, SEMILINEAR or LINEAR")


# --- acting on stencils and histories ----------------------------------------------

def transform_stencil(op: SymmetryOperator, st: Stencil, a: float) -> Stencil:
    if op.flow is None:
        raise MissingFlow(f"operator {op.name} has no closed-form flow")
    t, x, u = op.flow(*st.points(), a)
    t = np.broadcast_to(t, np.shape(x))
    return Stencil.from_points(t, x, u)


def apply_flow(op: SymmetryOperator, history: Sequence[MeshLayer], a: float) -> list[MeshLayer]:
    """Pointwise image of every layer; raises if a layer stops being flat."""
    if op.flow is None:
        raise MissingFlow(f"operator {op.name} has no closed-form flow")
    out = []
    for layer in history:
        t, x, u = op.flow(np.full(len(layer), layer.t), layer.xs, layer.us, a)
        t = np.broadcast_to(np.asarray(t, dtype=float), layer.xs.shape)
        if np.ptp(t) > 1e-12 * max(1.0, float(np.max(np.abs(t)))):
            raise GeometryViolation(f"{op.name} tilts the time layer at t={layer.t}")
        out.append(MeshLayer(float(t[0]), x, u))
    return out


_BOOST = SymmetryOperator("boost", _ZERO, lambda t, x, u: 2 * t, lambda t, x, u: -x * u, boost_flow)


def apply_boost(history: Sequence[MeshLayer], alpha: float) -> list[MeshLayer]:
    return apply_flow(_BOOST, history, alpha)


@dataclass(frozen=True)
class InvarianceReport:
    residual_before: float
    residual_after: float

    def invariant(self, tol: float) -> bool:
        return self.residual_after <= tol


def verify_scheme_invariance(scheme: SchemeKind, history: Sequence[MeshLayer],
                             transform: Union[SymmetryOperator, str, None] = "boost",
                             a: float = 0.0, tol: float = 1e-10) -> InvarianceReport:
    """Scheme residual on a discrete solution before and after a group action.

    The transformed history is evaluated node by node with the scheme's own
    formula, without the orthogonal-geometry check, so a scheme that is not
    invariant shows up as a residual rather than an exception.
    """
    op = _BOOST if transform in (None, "boost") else transform
    before = max_residual(scheme, history, strict=False)
    if before > tol:
        raise ValueError(f"history is not a discrete solution: residual {before:.3e} > {tol:.1e}")
    after = max_residual(scheme, apply_flow(op, history, a), strict=False)
    return InvarianceReport(before, after)
