"""Closed-form invariant solutions, their mesh trajectories, and blow-up data.

Every scheme in :mod:`symheat.schemes` is validated against one of these.
The oracle classes at the bottom bundle a solution ``u(x, t)`` with the
trajectory law that carries mesh nodes from one time layer to the next.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError


# --- linear heat equation ---------------------------------------------------

@dataclass(frozen=True)
class InvariantSolutionSpec:
    """Parameters of an invariant solution.

    ``family`` is ``"LINEAR"`` or ``"SEMILINEAR"``. ``tau`` is only used by the
    semilinear family, whose amplitude is defined by a recursion on the
    uniform time grid ``t_j = j * tau``.
    """

    family: str
    alpha: float
    f0: float = 1.0
    delta: int = 1
    tau: float | None = None

    def __post_init__(self) -> None:
        if self.family not in ("LINEAR", "SEMILINEAR"):
            raise DomainError(f"unknown family {self.family!r}")
        if self.f0 <= 0 and self.family == "LINEAR":
            raise DomainError("amplitude f0 must be positive")
        if self.family == "LINEAR" and self.alpha == 0:
            raise DomainError("alpha = 0 is the fundamental solution; use fundamental_solution")
        if self.family == "SEMILINEAR":
            if self.delta not in (-1, 1):
                raise DomainError("delta must be +1 or -1")
            if self.tau is None or self.tau <= 0:
                raise DomainError("semilinear solution needs a positive time step tau")


def _shifted_time(spec: InvariantSolutionSpec, t):
    s = np.asarray(t, dtype=float) + spec.alpha
    if np.any(s <= 0):
        raise DomainError("t + alpha must be positive")
    return s


def linear_exact(spec: InvariantSolutionSpec, x, t):
    """``f0 * sqrt(alpha / (t + alpha)) * exp(-x^2 / (4 (t + alpha)))``."""
    s = _shifted_time(spec, t)
    return spec.f0 * np.sqrt(spec.alpha / s) * np.exp(-np.square(x) / (4.0 * s))


def linear_mesh_trajectory(spec: InvariantSolutionSpec, x0, t):
    """Node that starts at ``x0`` at ``t = 0``: ``x0 (t + alpha) / alpha``."""
    s = _shifted_time(spec, t)
    return np.asarray(x0, dtype=float) * s / spec.alpha


def fundamental_solution(C: float, x, t):
    """``C t^{-1/2} exp(-x^2 / 4t)``, defined for ``t > 0``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("fundamental solution needs t > 0")
    return C / np.sqrt(t) * np.exp(-np.square(x) / (4.0 * t))


# --- semilinear equation u_t = u_xx + delta u ln u ---------------------------

def _check_semilinear(spec: InvariantSolutionSpec) -> None:
    if spec.family != "SEMILINEAR":
        raise DomainError("expected a SEMILINEAR spec")


def semilinear_log_amplitude(spec: InvariantSolutionSpec, steps: int) -> np.ndarray:
    """``f(t_j)`` for ``j = 0..steps`` from the first-order recursion

    ``f(t + tau) = e^{d tau} f(t) - 1/2 e^{d tau}(e^{d tau} - 1) e^{d t} / (alpha + e^{d t})``.
    """
    _check_semilinear(spec)
    d, tau, alpha = spec.delta, spec.tau, spec.alpha
    q = math.exp(d * tau)
    f = np.empty(steps + 1)
    f[0] = _f0(spec)
    for j in range(steps):
        e = math.exp(d * j * tau)
        if alpha + e <= 0:
            raise DomainError("alpha + exp(delta t) must be positive")
        f[j + 1] = q * f[j] - 0.5 * q * (q - 1.0) * e / (alpha + e)
    return f


def _f0(spec: InvariantSolutionSpec) -> float:
    # for this family f0 is the log-amplitude f(0) itself
    return float(spec.f0)


def semilinear_log_amplitude_closed(spec: InvariantSolutionSpec, j: int) -> float:
    """Partial-sum form ``e^{d t_j} (f(0) - (e^{d tau} - 1)/2 sum_{i<j} e^{-d t_i}/(1 + alpha e^{-d t_i}))``."""
    _check_semilinear(spec)
    d, tau, alpha = spec.delta, spec.tau, spec.alpha
    ti = tau * np.arange(j)
    terms = np.exp(-d * ti) / (1.0 + alpha * np.exp(-d * ti))
    return math.exp(d * j * tau) * (_f0(spec) - 0.5 * math.expm1(d * tau) * float(np.sum(terms)))


def semilinear_mesh(spec: InvariantSolutionSpec, x0, t):
    """``x0 (e^{d t} + alpha) / (1 + alpha)``."""
    e = np.exp(spec.delta * np.asarray(t, dtype=float))
    if np.any(e + spec.alpha <= 0) or 1 + spec.alpha == 0:
        raise DomainError("alpha + exp(delta t) must be positive")
    return np.asarray(x0, dtype=float) * (e + spec.alpha) / (1.0 + spec.alpha)


def semilinear_gaussian_rate(spec: InvariantSolutionSpec, t):
    """Coefficient ``d e^{d t} / (alpha + e^{d t})`` of ``-x^2/4`` in ``ln u``."""
    e = np.exp(spec.delta * np.asarray(t, dtype=float))
    return spec.delta * e / (spec.alpha + e)


def semilinear_exact(spec: InvariantSolutionSpec, x, j: int):
    """Invariant solution at ``t_j = j tau``: ``exp(f(t_j) - rate(t_j) x^2 / 4)``."""
    if j < 0:
        raise DomainError("time index must be non-negative")
    f = semilinear_log_amplitude(spec, j)[j]
    rate = semilinear_gaussian_rate(spec, j * spec.tau)
    return np.exp(f - rate * np.square(x) / 4.0)


# --- blow-up for the implicit power-law scheme -------------------------------

@dataclass(frozen=True)
class BlowupSpec:
    """Discrete blow-up data for ``sigma = 2``, ``n = sigma + 1``."""

    rho: float
    M: int
    sigma: float = 2.0

    def __post_init__(self) -> None:
        if self.rho <= 1:
            raise DomainError("mesh ratio rho must exceed 1")
        if self.M < 2:
            raise DomainError("profile needs M >= 2 so that the sine arch closes at k = M + 1")

    @property
    def n(self) -> float:
        return self.sigma + 1

    @cached_property
    def h(self) -> float:
        return 2.0 * math.sin(3.0 * math.pi / (2.0 * (self.M + 1)))

    @cached_property
    def localization_length(self) -> float:
        return 1.5 * math.pi * self.h / math.asin(self.h / 2.0)

    @cached_property
    def wavenumber(self) -> float:
        return math.pi / self.localization_length

    @cached_property
    def blowup_time(self) -> float:
        s, r = self.sigma, self.rho
        return s / r * (r - 1.0) / (r**s - 1.0)

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(self.M + 2)


def blowup_profile_amplitude(spec: BlowupSpec) -> float:
    if spec.sigma != 2:
        raise DomainError("closed-form profile exists only for sigma = 2")
    a, h = spec.wavenumber, spec.h
    bracket = 1.0 - 4.0 / h**2 * math.sin(a * h / 2.0) ** 2
    if bracket <= 0:
        raise DomainError("profile bracket is non-positive")
    return math.sqrt(2.0) / math.sqrt(3.0 * bracket)


def blowup_profile(spec: BlowupSpec) -> np.ndarray:
    """``theta_k`` at ``x_k = k h`` for ``k = 0..M+1``."""
    A = blowup_profile_amplitude(spec)
    return A * np.sin(spec.wavenumber * spec.nodes)


def profile_residual(theta, h: float, sigma: float = 2.0) -> np.ndarray:
    """Interior residual of ``(theta^{s+1})_{xx} + theta^{s+1} - theta / s``."""
    p = np.asarray(theta, dtype=float) ** (sigma + 1)
    return (p[2:] - 2 * p[1:-1] + p[:-2]) / h**2 + p[1:-1] - theta[1:-1] / sigma


def limit_profile(x):
    """Continuum profile ``sqrt(3/4) sin(x / 3)`` on ``0 < x < 3 pi``."""
    return math.sqrt(0.75) * np.sin(np.asarray(x, dtype=float) / 3.0)


def blowup_time_step(spec: BlowupSpec, j: int) -> float:
    """``tau_j = sigma (rho - 1) rho^{-sigma-1} rho^{-sigma j}``."""
    if j < 0:
        raise DomainError("step index must be non-negative")
    s, r = spec.sigma, spec.rho
    return s * (r - 1.0) * r ** (-s - 1.0) * r ** (-s * j)


def blowup_time_mesh(spec: BlowupSpec, j: int) -> float:
    return blowup_time_step(spec, j)


def blowup_times(spec: BlowupSpec, steps: int) -> np.ndarray:
    """``t_0 = 0, t_1, ..., t_steps``."""
    taus = [blowup_time_step(spec, j) for j in range(steps)]
    return np.concatenate([[0.0], np.cumsum(taus)])


# --- oracles -----------------------------------------------------------------

class Oracle:
    """Exact solution plus the node-trajectory law used for moving-mesh boundaries."""

    name = "oracle"

    def u(self, x, t):
        raise NotImplementedError

    def advance(self, x, t_old: float, t_new: float):
        """Position at ``t_new`` of the node that sits at ``x`` at ``t_old``."""
        return np.asarray(x, dtype=float)

    def initial_mesh(self):
        """Natural node set, or ``None`` when any mesh will do."""
        return None


class FundamentalOracle(Oracle):
    name = "fundamental"

    def __init__(self, C: float = 1.0):
        self.C = C

    def u(self, x, t):
        return fundamental_solution(self.C, x, t)

    def advance(self, x, t_old, t_new):
        return np.asarray(x, dtype=float) * (t_new / t_old)


class LinearInvariantOracle(Oracle):
    name = "linear"

    def __init__(self, alpha: float, f0: float = 1.0):
        self.spec = InvariantSolutionSpec("LINEAR", alpha, f0)

    def u(self, x, t):
        return linear_exact(self.spec, x, t)

    def advance(self, x, t_old, t_new):
        a = self.spec.alpha
        return np.asarray(x, dtype=float) * ((t_new + a) / (t_old + a))


class BoostedOracle(Oracle):
    """Image of a heat-equation oracle under ``x -> x + 2 a t``, ``u -> u e^{-a x - a^2 t}``."""

    name = "boosted"

    def __init__(self, base: Oracle, a: float):
        self.base, self.a = base, a

    def u(self, x, t):
        x0 = np.asarray(x, dtype=float) - 2 * self.a * t
        return self.base.u(x0, t) * np.exp(-self.a * x0 - self.a**2 * t)

    def advance(self, x, t_old, t_new):
        x0 = np.asarray(x, dtype=float) - 2 * self.a * t_old
        return self.base.advance(x0, t_old, t_new) + 2 * self.a * t_new


class HopfOracle(Oracle):
    """Potential ``w = -2 ln u`` of a positive heat-equation oracle."""

    name = "hopf"

    def __init__(self, base: Oracle):
        self.base = base

    def u(self, x, t):
        return -2.0 * np.log(self.base.u(x, t))

    def advance(self, x, t_old, t_new):
        return self.base.advance(x, t_old, t_new)


class SemilinearOracle(Oracle):
    name = "semilinear"

    def __init__(self, alpha: float, f0: float, delta: int, tau: float):
        self.spec = InvariantSolutionSpec("SEMILINEAR", alpha, f0, delta, tau)
        self._f = semilinear_log_amplitude(self.spec, 0)

    def index(self, t: float) -> int:
        j = int(round(t / self.spec.tau))
        if j < 0 or abs(t - j * self.spec.tau) > 1e-9 * max(1.0, abs(t)):
            raise DomainError(f"t={t} is not on the time grid of step {self.spec.tau}")
        return j

    def log_amplitude(self, j: int) -> float:
        if j >= self._f.size:
            self._f = semilinear_log_amplitude(self.spec, max(j, 2 * self._f.size))
        return float(self._f[j])

    def u(self, x, t):
        j = self.index(t)
        rate = semilinear_gaussian_rate(self.spec, j * self.spec.tau)
        return np.exp(self.log_amplitude(j) - rate * np.square(x) / 4.0)

    def advance(self, x, t_old, t_new):
        d, a = self.spec.delta, self.spec.alpha
        return np.asarray(x, dtype=float) * ((math.exp(d * t_new) + a) / (math.exp(d * t_old) + a))


class BlowupOracle(Oracle):
    """``u = rho^j theta`` on the blow-up time mesh; static nodes ``x_k = k h``."""

    name = "blowup"

    def __init__(self, spec: BlowupSpec):
        self.spec = spec
        self.amplitude = blowup_profile_amplitude(spec)

    def amplitude_at(self, t: float) -> float:
        T, s, r = self.spec.blowup_time, self.spec.sigma, self.spec.rho
        if t >= T:
            raise DomainError(f"t={t} is past the blow-up time {T}")
        y = (1.0 - t / T) ** (-1.0 / s)
        j = round(math.log(y) / math.log(r))
        tj = T * (1.0 - r ** (-s * j))
        if abs(t - tj) <= 1e-12 * T:
            return r**j
        return y

    def u(self, x, t):
        return self.amplitude_at(t) * self.amplitude * np.sin(self.spec.wavenumber * np.asarray(x))

    def initial_mesh(self):
        return self.spec.nodes
