"""Mesh layers, six-point stencils, and mesh-geometry conditions for Lie operators.

A run is a sequence of flat time layers. Node ``i`` on one layer is carried to
node ``i`` on the next, so two consecutive layers define one stencil per
interior node::

    (x^-_new, t_new) ---- (x_new, t_new) ---- (x^+_new, t_new)
                          /
    (x^-, t) ---------- (x, t) ---------------- (x^+, t)

The orthogonal stencil is the special case ``x_new == x`` with equal steps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import LayerMismatch, NonMonotoneMesh

Coefficient = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
Flow = Callable[[np.ndarray, np.ndarray, np.ndarray, float], tuple]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MeshLayer:
    """One flat time layer: node positions ``xs`` and values ``us`` at time ``t``."""

    t: float
    xs: np.ndarray
    us: np.ndarray

    def __post_init__(self) -> None:
        xs = _frozen(self.xs)
        us = _frozen(self.us)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "us", us)
        if xs.ndim != 1 or us.ndim != 1:
            raise LayerMismatch("xs and us must be one-dimensional")
        if xs.size != us.size:
            raise LayerMismatch(f"len(xs)={xs.size} != len(us)={us.size}")
        if xs.size < 3:
            raise LayerMismatch("a layer needs at least 3 nodes")
        if not np.all(np.isfinite(xs)):
            raise NonMonotoneMesh("non-finite node position")
        if not np.all(np.diff(xs) > 0):
            raise NonMonotoneMesh(f"node positions not strictly increasing at t={self.t}")

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.xs)

    def __len__(self) -> int:
        return self.xs.size

    def replace(self, t=None, xs=None, us=None) -> "MeshLayer":
        return MeshLayer(
            self.t if t is None else t,
            self.xs if xs is None else xs,
            self.us if us is None else us,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, MeshLayer):
            return NotImplemented
        return (
            self.t == other.t
            and np.array_equal(self.xs, other.xs)
            and np.array_equal(self.us, other.us)
        )

    __hash__ = None


def uniform_layer(t: float, x_min: float, x_max: float, nodes: int, u) -> MeshLayer:
    """Uniform layer on ``[x_min, x_max]``; ``u`` is a callable ``u(x, t)`` or an array."""
    xs = np.linspace(x_min, x_max, nodes)
    us = u(xs, t) if callable(u) else u
    return MeshLayer(t, xs, us)


def is_uniform(layer: MeshLayer, rtol: float = 1e-9) -> bool:
    h = layer.steps
    return bool(np.all(np.abs(h - h[0]) <= rtol * abs(h[0])))


@dataclass(frozen=True)
class Stencil:
    """Six-point stencil on two flat layers.

    Fields may be floats or equally-shaped arrays; array stencils hold all
    interior nodes of a layer pair at once and every formula in the package
    broadcasts over them. Node positions are stored and steps derived, so
    reassembling layers from stencils is exact.
    """

    t: object
    t_new: object
    x_minus: object
    x: object
    x_plus: object
    x_minus_new: object
    x_new: object
    x_plus_new: object
    u_minus: object
    u: object
    u_plus: object
    u_minus_new: object
    u_new: object
    u_plus_new: object

    def __post_init__(self) -> None:
        if not np.all(np.asarray(self.t_new) - np.asarray(self.t) > 0):
            raise NonMonotoneMesh("stencil needs t_new > t")
        for name in ("h_plus", "h_minus", "h_plus_new", "h_minus_new"):
            if not np.all(np.asarray(getattr(self, name)) > 0):
                raise NonMonotoneMesh(f"stencil step {name} must be positive")

    @classmethod
    def from_steps(cls, *, tau, h_plus, h_minus, h_plus_new=None, h_minus_new=None,
                   dx=0.0, t=0.0, x=0.0, u=1.0, u_plus=None, u_minus=None,
                   u_new=None, u_plus_new=None, u_minus_new=None) -> "Stencil":
        """Build from steps; omitted new-layer steps copy the old ones, omitted values copy ``u``."""
        h_plus_new = h_plus if h_plus_new is None else h_plus_new
        h_minus_new = h_minus if h_minus_new is None else h_minus_new
        pick = lambda v: u if v is None else v  # noqa: E731
        return cls(
            t=t, t_new=t + tau,
            x_minus=x - h_minus, x=x, x_plus=x + h_plus,
            x_minus_new=x + dx - h_minus_new, x_new=x + dx, x_plus_new=x + dx + h_plus_new,
            u_minus=pick(u_minus), u=u, u_plus=pick(u_plus),
            u_minus_new=pick(u_minus_new), u_new=pick(u_new), u_plus_new=pick(u_plus_new),
        )

    @property
    def tau(self):
        return self.t_new - self.t

    @property
    def dx(self):
        return self.x_new - self.x

    @property
    def h_plus(self):
        return self.x_plus - self.x

    @property
    def h_minus(self):
        return self.x - self.x_minus

    @property
    def h_plus_new(self):
        return self.x_plus_new - self.x_new

    @property
    def h_minus_new(self):
        return self.x_new - self.x_minus_new

    def values(self) -> tuple:
        return (self.u_minus, self.u, self.u_plus, self.u_minus_new, self.u_new, self.u_plus_new)

    def points(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(t, x, u)`` of the six points, ordered old (-, 0, +) then new (-, 0, +)."""
        t = np.array([self.t, self.t, self.t, self.t_new, self.t_new, self.t_new], dtype=float)
        x = np.array([self.x_minus, self.x, self.x_plus,
                      self.x_minus_new, self.x_new, self.x_plus_new], dtype=float)
        return t, x, np.array(self.values(), dtype=float)

    @classmethod
    def from_points(cls, t, x, u) -> "Stencil":
        return cls(t[0], t[3], *x, *u)

    def is_orthogonal(self, rtol: float = 1e-12) -> bool:
        scale = np.maximum(np.abs(self.h_plus), np.abs(self.h_minus))
        return bool(
            np.all(np.abs(self.dx) <= rtol * scale)
            and np.all(np.abs(self.h_plus_new - self.h_plus) <= rtol * scale)
            and np.all(np.abs(self.h_minus_new - self.h_minus) <= rtol * scale)
        )


def layer_stencil(old: MeshLayer, new: MeshLayer) -> Stencil:
    """Vectorized stencil covering all interior nodes of a layer pair."""
    if len(old) != len(new):
        raise LayerMismatch(f"node counts differ: {len(old)} vs {len(new)}")
    if not new.t > old.t:
        raise NonMonotoneMesh(f"new layer time {new.t} not after {old.t}")
    xo, uo, xn, un = old.xs, old.us, new.xs, new.us
    m = len(old) - 2
    return Stencil(
        np.full(m, old.t), np.full(m, new.t),
        xo[:-2], xo[1:-1], xo[2:], xn[:-2], xn[1:-1], xn[2:],
        uo[:-2], uo[1:-1], uo[2:], un[:-2], un[1:-1], un[2:],
    )


def extract_stencils(old: MeshLayer, new: MeshLayer) -> list[Stencil]:
    """The ``N - 2`` scalar stencils centred at interior nodes."""
    vec = layer_stencil(old, new)
    cols = [getattr(vec, k) for k in Stencil.__dataclass_fields__]
    return [Stencil(*(float(c[i]) for c in cols)) for i in range(len(old) - 2)]


def assemble_layers(stencils: Sequence[Stencil]) -> tuple[MeshLayer, MeshLayer]:
    """Inverse of :func:`extract_stencils`."""
    if not stencils:
        raise LayerMismatch("no stencils to assemble")
    first, last = stencils[0], stencils[-1]
    old = MeshLayer(
        first.t,
        [first.x_minus] + [s.x for s in stencils] + [last.x_plus],
        [first.u_minus] + [s.u for s in stencils] + [last.u_plus],
    )
    new = MeshLayer(
        first.t_new,
        [first.x_minus_new] + [s.x_new for s in stencils] + [last.x_plus_new],
        [first.u_minus_new] + [s.u_new for s in stencils] + [last.u_plus_new],
    )
    return old, new


# --- Lie operators and mesh-geometry conditions -----------------------------

@dataclass(frozen=True)
class SymmetryOperator:
    """``X = xi_t d/dt + xi_x d/dx + eta d/du`` with an optional closed-form flow.

    ``flow(t, x, u, a)`` returns ``(t*, x*, u*)`` after group parameter ``a``.
    """

    name: str
    xi_t: Coefficient
    xi_x: Coefficient
    eta: Coefficient
    flow: Optional[Flow] = field(default=None, compare=False)

    def coefficients(self, t, x, u):
        shape = np.broadcast(t, x, u).shape
        return tuple(np.broadcast_to(np.asarray(c(t, x, u), dtype=float), shape)
                     for c in (self.xi_t, self.xi_x, self.eta))


@dataclass(frozen=True)
class ProbeGrid:
    """Uniform orthogonal probe grid; defaults to 8x8 points on [0, 1]^2."""

    t0: float = 0.0
    x0: float = 0.0
    size: int = 8
    tau: float = 1.0 / 7.0
    h: float = 1.0 / 7.0
    u: float = 1.0

    def mesh(self):
        t = self.t0 + self.tau * np.arange(self.size)
        x = self.x0 + self.h * np.arange(self.size)
        T, X = np.meshgrid(t, x, indexing="ij")
        return T, X, np.full_like(T, self.u)


DEFAULT_PROBE = ProbeGrid()
DEFAULT_TOL = 1e-10


def _scaled_tol(op: SymmetryOperator, probe: ProbeGrid, tol: float) -> float:
    T, X, U = probe.mesh()
    xt, xx, _ = op.coefficients(T, X, U)
    return tol * max(1.0, float(np.max(np.abs(xt))), float(np.max(np.abs(xx))))


def _xi(op, probe):
    T, X, U = probe.mesh()
    xt, xx, _ = op.coefficients(T, X, U)
    return xt, xx


def check_time_uniformity(op: SymmetryOperator, probe: ProbeGrid = DEFAULT_PROBE,
                          tol: float = DEFAULT_TOL) -> bool:
    """``D+tau D-tau xi_t == 0`` at interior probe points."""
    xt, _ = _xi(op, probe)
    d2 = (xt[2:, :] - 2 * xt[1:-1, :] + xt[:-2, :]) / probe.tau**2
    return bool(np.all(np.abs(d2) <= _scaled_tol(op, probe, tol)))


def check_space_uniformity(op: SymmetryOperator, probe: ProbeGrid = DEFAULT_PROBE,
                           tol: float = DEFAULT_TOL) -> bool:
    """``D+h D-h xi_x == 0`` at interior probe points."""
    _, xx = _xi(op, probe)
    d2 = (xx[:, 2:] - 2 * xx[:, 1:-1] + xx[:, :-2]) / probe.h**2
    return bool(np.all(np.abs(d2) <= _scaled_tol(op, probe, tol)))


def check_orthogonality(op: SymmetryOperator, probe: ProbeGrid = DEFAULT_PROBE,
                        tol: float = DEFAULT_TOL) -> bool:
    """``D+h(xi_t) == -D+tau(xi_x)`` wherever both forward differences exist."""
    xt, xx = _xi(op, probe)
    dh_xt = (xt[:-1, 1:] - xt[:-1, :-1]) / probe.h
    dt_xx = (xx[1:, :-1] - xx[:-1, :-1]) / probe.tau
    return bool(np.all(np.abs(dh_xt + dt_xx) <= _scaled_tol(op, probe, tol)))


def check_flat_time_layers(op: SymmetryOperator, probe: ProbeGrid = DEFAULT_PROBE,
                           tol: float = DEFAULT_TOL) -> bool:
    """``D+h D+tau xi_t == 0``: time layers stay flat under the flow."""
    xt, _ = _xi(op, probe)
    mixed = (xt[1:, 1:] - xt[1:, :-1] - xt[:-1, 1:] + xt[:-1, :-1]) / (probe.h * probe.tau)
    return bool(np.all(np.abs(mixed) <= _scaled_tol(op, probe, tol)))


MESH_CONDITIONS = {
    "time_uniform": check_time_uniformity,
    "space_uniform": check_space_uniformity,
    "orthogonal": check_orthogonality,
    "flat_layers": check_flat_time_layers,
}


def mesh_conditions(op: SymmetryOperator, probe: ProbeGrid = DEFAULT_PROBE,
                    tol: float = DEFAULT_TOL) -> dict[str, bool]:
    return {name: check(op, probe, tol) for name, check in MESH_CONDITIONS.items()}
