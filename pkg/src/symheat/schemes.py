"""Residuals and time steppers for the discrete models.

Every residual is assembled from signed terms (left side minus right side),
so the same term lists give raw residuals and residuals normalized by the
largest term of each equation. All formulas broadcast over array stencils.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .errors import (
    GeometryViolation,
    NegativePower,
    NewtonDivergence,
    NonPositiveIterate,
    NonPositiveValue,
    NonUniformMesh,
    StepRejected,
)
from .grid import MeshLayer, Stencil, is_uniform, layer_stencil


class Family(str, enum.Enum):
    ODE_U2 = "ODE_U2"
    POWERLAW_EXPLICIT = "POWERLAW_EXPLICIT"
    POWERLAW_IMPLICIT = "POWERLAW_IMPLICIT"
    SEMILINEAR = "SEMILINEAR"
    LINEAR_INVARIANT = "LINEAR_INVARIANT"
    LINEAR_ORTHOGONAL = "LINEAR_ORTHOGONAL"
    BURGERS_POTENTIAL = "BURGERS_POTENTIAL"


_REQUIRED = {
    Family.ODE_U2: (),
    Family.POWERLAW_EXPLICIT: ("sigma", "n", "sign"),
    Family.POWERLAW_IMPLICIT: ("sigma", "n"),
    Family.SEMILINEAR: ("delta",),
    Family.LINEAR_INVARIANT: (),
    Family.LINEAR_ORTHOGONAL: (),
    Family.BURGERS_POTENTIAL: (),
}

MOVING = {Family.SEMILINEAR, Family.LINEAR_INVARIANT, Family.BURGERS_POTENTIAL}
ORTHOGONAL = {Family.ODE_U2, Family.POWERLAW_EXPLICIT, Family.POWERLAW_IMPLICIT,
              Family.LINEAR_ORTHOGONAL}


@dataclass(frozen=True)
class SchemeKind:
    """A discrete model and its parameters.

    ``sign`` is the source sign of the explicit power-law scheme: ``+1``,
    ``-1``, or ``0`` to switch the source off.
    """

    family: Family
    sigma: Optional[float] = None
    n: Optional[float] = None
    sign: Optional[int] = None
    delta: Optional[int] = None

    def __post_init__(self) -> None:
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        need = _REQUIRED[fam]
        for name in ("sigma", "n", "sign", "delta"):
            present = getattr(self, name) is not None
            if present != (name in need):
                verb = "requires" if name in need else "does not take"
                raise ValueError(f"{fam.value} {verb} parameter {name!r}")
        if self.sign is not None and self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")
        if self.delta is not None and self.delta not in (-1, 1):
            raise ValueError("delta must be -1 or +1")

    @property
    def moving(self) -> bool:
        return self.family in MOVING

    def params(self) -> dict:
        return {k: getattr(self, k) for k in _REQUIRED[self.family]}


@dataclass(frozen=True)
class NewtonOptions:
    max_iter: int = 50
    abs_tol: float = 1e-10
    damping: float = 1.0

    def __post_init__(self) -> None:
        if self.max_iter < 1 or self.abs_tol <= 0 or not 0 < self.damping <= 1:
            raise ValueError("need max_iter >= 1, abs_tol > 0, 0 < damping <= 1")


# --- residual terms ----------------------------------------------------------

def _require_positive(*values) -> None:
    for v in values:
        if np.any(np.asarray(v) <= 0):
            raise NonPositiveValue("values entering a logarithm or fractional power must be positive")


def _log_slopes(u, u_plus, u_minus, h_plus, h_minus):
    """One-sided slopes of ``ln u``: ``(ln u)_x`` and ``(ln u)_xbar``."""
    return np.log(u_plus / u) / h_plus, np.log(u / u_minus) / h_minus


def _uniform_step(st: Stencil, strict: bool):
    if strict:
        if not st.is_orthogonal():
            raise GeometryViolation("orthogonal scheme evaluated on a moving stencil")
        if not np.allclose(st.h_plus, st.h_minus, rtol=1e-9, atol=0):
            raise NonUniformMesh("orthogonal scheme needs h+ == h-")
    return st.h_plus


def _power(v, p):
    v = np.asarray(v, dtype=float)
    if float(p) != int(p) and np.any(v < 0):
        raise NegativePower("fractional power of a negative value")
    return v**p


def residual_terms(kind: SchemeKind, st: Stencil, strict: bool = True) -> list[list]:
    """Signed terms of each scheme equation; ``sum(terms)`` is left minus right.

    ``strict=False`` evaluates orthogonal schemes on stencils whose new layer
    has moved, which is how a transformed history is tested against them.
    """
    f = kind.family
    tau = st.tau
    if f is Family.ODE_U2:
        h = st.h_plus
        if strict and not np.allclose(st.h_plus, st.h_minus, rtol=1e-9, atol=0):
            raise NonUniformMesh("the u_xx = u^2 model lives on h+ == h-")
        return [[st.u_plus / h**2, -2 * st.u / h**2, st.u_minus / h**2, -np.square(st.u)]]

    if f is Family.POWERLAW_EXPLICIT:
        h = _uniform_step(st, strict)
        s = kind.sigma
        k_plus = _power((st.u_plus + st.u) / 2, s)
        k_minus = _power((st.u + st.u_minus) / 2, s)
        return [[
            st.u_new / tau, -st.u / tau,
            -k_plus * (st.u_plus - st.u) / h**2,
            k_minus * (st.u - st.u_minus) / h**2,
            -kind.sign * _power(st.u, kind.n),
        ]]

    if f is Family.POWERLAW_IMPLICIT:
        h = _uniform_step(st, strict)
        p = kind.sigma + 1
        return [[
            st.u_new / tau, -st.u / tau,
            -_power(st.u_plus_new, p) / h**2,
            2 * _power(st.u_new, p) / h**2,
            -_power(st.u_minus_new, p) / h**2,
            -_power(st.u_new, kind.n),
        ]]

    if f is Family.LINEAR_ORTHOGONAL:
        h = _uniform_step(st, strict)
        return [[st.u_new / tau, -st.u / tau,
                 -st.u_plus / h**2, 2 * st.u / h**2, -st.u_minus / h**2]]

    hp, hm = st.h_plus, st.h_minus
    H = hp + hm
    dx = st.dx

    if f is Family.SEMILINEAR:
        d = kind.delta
        _require_positive(*st.values())
        lx, lxb = _log_slopes(st.u, st.u_plus, st.u_minus, hp, hm)
        E = np.expm1(d * tau)
        G = -np.expm1(-d * tau)
        q = np.exp(d * tau)
        c = 8.0 / d * E**2 / H
        return [
            [d * dx, 2 * E * hm / H * lx, 2 * E * hp / H * lxb],
            [d * dx**2, 4 * G * np.log(st.u_new), -4 * G * q * np.log(st.u), -c * lx, c * lxb],
        ]

    if f is Family.LINEAR_INVARIANT:
        _require_positive(*st.values())
        lp, lm = np.log(st.u_plus / st.u), np.log(st.u_minus / st.u)
        return [
            [dx, 2 * tau / H * hm / hp * lp, -2 * tau / H * hp / hm * lm],
            [np.square(st.u / st.u_new) * np.exp(-dx**2 / (2 * tau)), -np.ones_like(dx),
             4 * tau / H * lp / hp, 4 * tau / H * lm / hm],
        ]

    if f is Family.BURGERS_POTENTIAL:
        wx = (st.u_plus - st.u) / hp
        wxb = (st.u - st.u_minus) / hm
        return [
            [dx, -tau * hm / H * wx, -tau * hp / H * wxb],
            [np.exp(st.u_new - st.u - dx**2 / (2 * tau)), -np.ones_like(dx),
             -2 * tau / H * wx, 2 * tau / H * wxb],
        ]

    raise ValueError(f"unknown family {f}")


def residual(kind: SchemeKind, st: Stencil, strict: bool = True) -> np.ndarray:
    """Left-minus-right residual of each equation, shape ``(k,)`` or ``(k, m)``."""
    return np.array([sum(eq) for eq in residual_terms(kind, st, strict)])


def normalized_residual(kind: SchemeKind, st: Stencil, strict: bool = True) -> np.ndarray:
    """Residual of each equation divided by the magnitude of its largest term."""
    out = []
    for eq in residual_terms(kind, st, strict):
        terms = np.array(np.broadcast_arrays(*eq), dtype=float)
        scale = np.max(np.abs(terms), axis=0)
        total = np.sum(terms, axis=0)
        out.append(np.divide(np.abs(total), scale, out=np.zeros_like(total), where=scale > 0))
    return np.array(out)


def max_residual(kind: SchemeKind, history: Sequence[MeshLayer], strict: bool = True) -> float:
    """Largest normalized residual over every stencil of a layer history."""
    worst = 0.0
    for old, new in zip(history[:-1], history[1:]):
        r = normalized_residual(kind, layer_stencil(old, new), strict)
        worst = max(worst, float(np.max(r)) if r.size else 0.0)
    return worst


# --- boundary closures -------------------------------------------------------

class BoundaryValues(NamedTuple):
    u_left: float
    u_right: float
    x_left: Optional[float] = None
    x_right: Optional[float] = None


BoundaryClosure = Callable[[MeshLayer, float], BoundaryValues]


def dirichlet(u_left: float, u_right: float) -> BoundaryClosure:
    """Fixed end values on fixed end nodes."""
    return lambda layer, t_new: BoundaryValues(u_left, u_right)


def oracle_boundary(oracle, moving: bool = True) -> BoundaryClosure:
    """End values from an exact solution; ends follow its trajectory law when ``moving``."""

    def closure(layer: MeshLayer, t_new: float) -> BoundaryValues:
        ends = layer.xs[[0, -1]]
        if moving:
            ends = oracle.advance(ends, layer.t, t_new)
        u = oracle.u(ends, t_new)
        return BoundaryValues(float(u[0]), float(u[1]), float(ends[0]), float(ends[1]))

    return closure


def _assemble(layer: MeshLayer, t_new, interior_x, interior_u, bv: BoundaryValues,
              moving: bool) -> MeshLayer:
    xs = np.empty(len(layer))
    us = np.empty(len(layer))
    xs[1:-1], us[1:-1] = interior_x, interior_u
    us[0], us[-1] = bv.u_left, bv.u_right
    if moving and bv.x_left is not None:
        xs[0], xs[-1] = bv.x_left, bv.x_right
    else:
        xs[0], xs[-1] = layer.xs[0], layer.xs[-1]
    return MeshLayer(t_new, xs, us)


def _interior(layer: MeshLayer):
    x, u = layer.xs, layer.us
    return x[1:-1], x[2:] - x[1:-1], x[1:-1] - x[:-2], u[1:-1], u[2:], u[:-2]


def _check_uniform(layer: MeshLayer) -> float:
    if not is_uniform(layer):
        raise NonUniformMesh("scheme needs a uniform static mesh")
    return float(layer.steps[0])


# --- tridiagonal Newton -------------------------------------------------------

def _newton_tridiagonal(F, J, v0, opts: NewtonOptions, admissible=None):
    """Damped Newton for ``F(v) = 0`` with ``J(v) -> (lower, diag, upper)``."""
    v = np.array(v0, dtype=float)
    r = F(v)
    for _ in range(opts.max_iter):
        if np.max(np.abs(r), initial=0.0) <= opts.abs_tol:
            return v
        lower, diag, upper = J(v)
        ab = np.zeros((3, v.size))
        ab[0, 1:] = upper
        ab[1] = diag
        ab[2, :-1] = lower
        step = solve_banded((1, 1), ab, -r)
        lam = opts.damping
        trial = v + lam * step
        while admissible is not None and not admissible(trial):
            lam /= 2
            if lam < 1e-8:
                raise NonPositiveIterate("Newton iterate left the admissible cone")
            trial = v + lam * step
        v = trial
        r = F(v)
    if np.max(np.abs(r), initial=0.0) <= opts.abs_tol:
        return v
    raise NewtonDivergence(f"no convergence in {opts.max_iter} iterations, |F| = {np.max(np.abs(r)):.3e}")


def solve_ode_bvp(N: int, h: float, left_bc: float, right_bc: float,
                  opts: NewtonOptions = NewtonOptions(), guess=None) -> np.ndarray:
    """Solve ``(u+ - 2u + u-)/h^2 = u^2`` on ``N`` uniform nodes with Dirichlet ends.

    The default initial iterate is the straight line between the end values.
    """
    if N < 3 or h <= 0:
        raise ValueError("need N >= 3 and h > 0")
    if guess is None:
        guess = np.linspace(left_bc, right_bc, N)
    guess = np.asarray(guess, dtype=float)
    ends = (float(left_bc), float(right_bc))

    def full(v):
        return np.concatenate([[ends[0]], v, [ends[1]]])

    def F(v):
        u = full(v)
        return (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2 - u[1:-1] ** 2

    def J(v):
        m = v.size
        off = np.full(m - 1, 1 / h**2)
        return off, -2 / h**2 - 2 * v, off

    return full(_newton_tridiagonal(F, J, guess[1:-1], opts))


# --- steppers ------------------------------------------------------------------

def step_powerlaw_explicit(layer: MeshLayer, tau: float, sigma: float, n: float, sign: int,
                           bc: BoundaryClosure) -> MeshLayer:
    """``(u^ - u)/tau = [k+ u_x - k- u_xbar]/h + sign u^n`` with ``k+- = (mean of u)^sigma``."""
    h = _check_uniform(layer)
    x, _, _, u, up, um = _interior(layer)
    k_plus = _power((up + u) / 2, sigma)
    k_minus = _power((u + um) / 2, sigma)
    source = sign * _power(u, n) if sign else 0.0
    new_u = u + tau * ((k_plus * (up - u) - k_minus * (u - um)) / h**2 + source)
    t_new = layer.t + tau
    return _assemble(layer, t_new, x, new_u, bc(layer, t_new), moving=False)


def step_powerlaw_implicit(layer: MeshLayer, tau: float, sigma: float, n: float,
                           bc: BoundaryClosure, opts: NewtonOptions = NewtonOptions(),
                           guess=None) -> MeshLayer:
    """``(u^ - u)/tau = (P+ - 2P + P-)/h^2 + u^^n`` with ``P = u^^(sigma+1)``, by Newton.

    The initial iterate is the old layer unless ``guess`` (a full layer of
    values) is given. For large steps the system has more than one positive
    root and the guess selects the branch; the blow-up solution on its
    geometric time mesh is not the root continued from the old layer.
    The Newton step is halved until the iterate stays in the positive cone
    (non-negative where the data is zero).
    """
    h = _check_uniform(layer)
    u_old = layer.us[1:-1]
    if np.any(layer.us < 0):
        raise NonPositiveValue("implicit power-law step needs u >= 0")
    t_new = layer.t + tau
    bv = bc(layer, t_new)
    ends = (float(bv.u_left), float(bv.u_right))
    p = sigma + 1
    strict = bool(np.all(u_old > 0))

    def full(v):
        return np.concatenate([[ends[0]], v, [ends[1]]])

    def F(v):
        P = _power(full(v), p)
        return (v - u_old) / tau - (P[2:] - 2 * P[1:-1] + P[:-2]) / h**2 - _power(v, n)

    def J(v):
        dP = p * _power(v, sigma)
        diag = 1 / tau + 2 * dP / h**2 - n * _power(v, n - 1)
        return -dP[:-1] / h**2, diag, -dP[1:] / h**2

    def admissible(v):
        return bool(np.all(v > 0)) if strict else bool(np.all(v >= 0))

    v0 = u_old if guess is None else np.asarray(guess, dtype=float)[1:-1]
    v = _newton_tridiagonal(F, J, v0, opts, admissible)
    return _assemble(layer, t_new, layer.xs[1:-1], v, bv, moving=False)


def step_semilinear(layer: MeshLayer, tau: float, delta: int, bc: BoundaryClosure) -> MeshLayer:
    """Explicit moving-mesh step for ``u_t = u_xx + delta u ln u``.

    Both the node shift and ``ln u^`` are closed-form in old-layer data.
    """
    x, hp, hm, u, up, um = _interior(layer)
    _require_positive(layer.us)
    H = hp + hm
    lx, lxb = _log_slopes(u, up, um, hp, hm)
    E = math.expm1(delta * tau)
    G = -math.expm1(-delta * tau)
    dx = -2.0 / delta * E * (hm * lx + hp * lxb) / H
    rhs = 8.0 / delta * E**2 / H * (lx - lxb)
    log_new = math.exp(delta * tau) * np.log(u) + (rhs - delta * dx**2) / (4 * G)
    t_new = layer.t + tau
    return _assemble(layer, t_new, x + dx, np.exp(log_new), bc(layer, t_new), moving=True)


def linear_invariant_update(layer: MeshLayer, tau: float):
    """Node shifts ``dx`` and right side ``R`` of the second equation, interior nodes."""
    x, hp, hm, u, up, um = _interior(layer)
    _require_positive(layer.us)
    H = hp + hm
    lp, lm = np.log(up / u), np.log(um / u)
    dx = 2 * tau / H * (-hm / hp * lp + hp / hm * lm)
    R = 1 - 4 * tau / H * (lp / hp + lm / hm)
    return dx, R


def step_linear_invariant(layer: MeshLayer, tau: float, bc: BoundaryClosure) -> MeshLayer:
    """Invariant moving-mesh step for ``u_t = u_xx``; ``u^ = u exp(-dx^2/4tau) / sqrt(R)``."""
    dx, R = linear_invariant_update(layer, tau)
    if np.any(R <= 0):
        i = int(np.argmin(R)) + 1
        raise StepRejected(f"R = {R.min():.3e} <= 0 at node {i}; tau = {tau} too large")
    u = layer.us[1:-1]
    new_u = u * np.exp(-dx**2 / (4 * tau)) / np.sqrt(R)
    t_new = layer.t + tau
    return _assemble(layer, t_new, layer.xs[1:-1] + dx, new_u, bc(layer, t_new), moving=True)


def step_linear_orthogonal(layer: MeshLayer, tau: float, bc: BoundaryClosure) -> MeshLayer:
    """Classical explicit heat step on a static uniform mesh."""
    h = _check_uniform(layer)
    x, _, _, u, up, um = _interior(layer)
    t_new = layer.t + tau
    return _assemble(layer, t_new, x, u + tau * (up - 2 * u + um) / h**2,
                     bc(layer, t_new), moving=False)


def step_burgers_potential(layer: MeshLayer, tau: float, bc: BoundaryClosure) -> MeshLayer:
    """Moving-mesh step for ``w_t + w_x^2/2 = w_xx``; ``w^ = w + dx^2/2tau + ln(1 + tau w_xxbar)``."""
    x, hp, hm, w, wp, wm = _interior(layer)
    H = hp + hm
    wx, wxb = (wp - w) / hp, (w - wm) / hm
    dx = tau * (hm * wx + hp * wxb) / H
    R = 1 + tau * 2 / H * (wx - wxb)
    if np.any(R <= 0):
        raise StepRejected(f"1 + tau w_xxbar = {R.min():.3e} <= 0; tau = {tau} too large")
    t_new = layer.t + tau
    new_w = w + dx**2 / (2 * tau) + np.log(R)
    return _assemble(layer, t_new, x + dx, new_w, bc(layer, t_new), moving=True)


def hopf_map(history: Sequence[MeshLayer]) -> list[MeshLayer]:
    """``w = -2 ln u`` node by node, same meshes."""
    out = []
    for layer in history:
        _require_positive(layer.us)
        out.append(layer.replace(us=-2.0 * np.log(layer.us)))
    return out


def step(kind: SchemeKind, layer: MeshLayer, tau: float, bc: BoundaryClosure,
         opts: NewtonOptions = NewtonOptions(), guess=None) -> MeshLayer:
    f = kind.family
    if f is Family.POWERLAW_EXPLICIT:
        return step_powerlaw_explicit(layer, tau, kind.sigma, kind.n, kind.sign, bc)
    if f is Family.POWERLAW_IMPLICIT:
        return step_powerlaw_implicit(layer, tau, kind.sigma, kind.n, bc, opts, guess)
    if f is Family.SEMILINEAR:
        return step_semilinear(layer, tau, kind.delta, bc)
    if f is Family.LINEAR_INVARIANT:
        return step_linear_invariant(layer, tau, bc)
    if f is Family.LINEAR_ORTHOGONAL:
        return step_linear_orthogonal(layer, tau, bc)
    if f is Family.BURGERS_POTENTIAL:
        return step_burgers_potential(layer, tau, bc)
    raise ValueError(f"{f.value} is not a time-stepping scheme")
