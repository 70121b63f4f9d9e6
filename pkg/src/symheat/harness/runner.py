"""Experiment orchestration: runs, comparisons, mesh-condition tables."""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import OracleMismatch, ParseError, StepRejected
from ..exact import BlowupSpec, blowup_time_step
from ..grid import MeshLayer, Stencil, mesh_conditions
from ..schemes import Family, dirichlet, max_residual, oracle_boundary, step
from ..symmetry import (
    linear_invariants,
    ode_invariants,
    operator_set,
    powerlaw_invariants,
    semilinear_invariants,
)
from . import output
from .config import ExperimentConfig, build_oracle, initial_layer_arrays

log = logging.getLogger(__name__)


def layer_error(layer: MeshLayer, oracle, kind: str = "relative") -> float:
    """Max-norm error of one layer; relative pointwise where the oracle is nonzero."""
    exact = oracle.u(layer.xs, layer.t)
    diff = np.abs(layer.us - exact)
    if kind == "relative":
        mag = np.abs(exact)
        diff = np.divide(diff, mag, out=diff.copy(), where=mag > 0)
    return float(np.max(diff))


@dataclass
class RunReport:
    times: list
    errors: Optional[list]
    residuals: list
    wall_time: float
    rejections: int = 0
    final_error: Optional[float] = None

    def __post_init__(self) -> None:
        if self.errors:
            self.final_error = self.errors[-1]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass
class RunResult:
    config: ExperimentConfig
    history: list
    report: RunReport
    files: list = field(default_factory=list)


def _tau(cfg: ExperimentConfig, layer: MeshLayer, j: int, blowup: Optional[BlowupSpec]) -> float:
    pol = cfg.time
    if pol.kind == "fixed":
        return pol.tau
    if pol.kind == "h2":
        return pol.c * float(np.min(layer.steps)) ** 2
    return blowup_time_step(blowup, j)


def simulate(cfg: ExperimentConfig) -> tuple[list, RunReport]:
    """Drive the full two-layer scheme for ``cfg.steps`` steps; no files written."""
    start = time.perf_counter()
    tau0 = cfg.time.tau if cfg.time.kind == "fixed" else None
    oracle = build_oracle(cfg.oracle, tau0) if cfg.oracle else None
    t0, xs, us = initial_layer_arrays(cfg, oracle)
    layer = MeshLayer(t0, xs, us)
    kind = cfg.scheme

    if cfg.boundary == "oracle":
        bc = oracle_boundary(oracle, moving=kind.moving)
    else:
        bc = dirichlet(float(layer.us[0]), float(layer.us[-1]))

    blowup = None
    if cfg.time.kind == "blowup":
        blowup = BlowupSpec(cfg.time.rho, M=max(2, len(layer) - 2), sigma=kind.sigma)

    history = [layer]
    residuals = []
    rejections = 0
    for j in range(cfg.steps):
        tau = _tau(cfg, layer, j, blowup)
        # the blow-up mesh is built for amplitude growth rho per step; predict along it
        guess = cfg.time.rho * layer.us if blowup is not None else None
        try:
            new = step(kind, layer, tau, bc, cfg.newton, guess)
            pieces = [new]
        except StepRejected:
            if rejections >= cfg.time.max_rejections:
                raise
            rejections += 1
            log.info("step %d rejected at tau=%g; retrying as two half steps", j, tau)
            half = step(kind, layer, tau / 2, bc, cfg.newton)
            pieces = [half, step(kind, half, tau / 2, bc, cfg.newton)]
        for piece in pieces:
            residuals.append(max_residual(kind, [layer, piece]))
            history.append(piece)
            layer = piece

    errors = [layer_error(L, oracle, cfg.error) for L in history] if oracle else None
    report = RunReport(
        times=[L.t for L in history], errors=errors, residuals=residuals,
        wall_time=time.perf_counter() - start, rejections=rejections,
    )
    return history, report


def run(cfg: ExperimentConfig, write: bool = True) -> RunResult:
    history, report = simulate(cfg)
    result = RunResult(cfg, history, report)
    if write:
        result.files = _emit(cfg, history, report)
    return result


def _emit(cfg: ExperimentConfig, history, report: RunReport) -> list:
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    files = []
    if "csv" in cfg.emit:
        files.append(output.write_layers(out / "layers.csv", history))
        rows = []
        for k, t in enumerate(report.times):
            err = report.errors[k] if report.errors else ""
            res = report.residuals[k - 1] if k > 0 else 0.0
            rows.append((k, float(t), err, float(res)))
        files.append(output.write_table(out / "errors.csv", ("step", "t", "error", "residual"), rows))
    if "svg" in cfg.emit:
        oracle = build_oracle(cfg.oracle, cfg.time.tau) if cfg.oracle else None
        layers = cfg.plot_layers or sorted({0, len(history) // 2, len(history) - 1})
        ylabel = "w" if cfg.scheme.family is Family.BURGERS_POTENTIAL else "u"
        files.append(output.plot_profiles(out / "solution.svg", history, layers, oracle, ylabel))
        files.append(output.plot_mesh(out / "mesh.svg", history))
        if report.errors:
            files.append(output.plot_errors(out / "error.svg",
                                             {cfg.scheme.family.value: (report.times, report.errors)}))
    if "summary" in cfg.emit:
        path = out / "summary.json"
        path.write_text(report.to_json() + "\n")
        files.append(path)
    return files


# --- comparison ----------------------------------------------------------------------

@dataclass
class Comparison:
    times: list
    errors_a: list
    errors_b: list
    ratio: list
    labels: tuple = ("A", "B")

    def dominated(self) -> bool:
        """True when A's error is never above B's."""
        return all(a <= b for a, b in zip(self.errors_a, self.errors_b))


def _ratio(a: float, b: float) -> float:
    if a == 0:
        return 1.0 if b == 0 else float("inf")
    return b / a


def align(times_a, errs_a, times_b, errs_b, rtol: float = 1e-9) -> Comparison:
    """Pair layers that share a time value."""
    tb = np.asarray(times_b)
    rows = []
    for t, ea in zip(times_a, errs_a):
        k = int(np.argmin(np.abs(tb - t)))
        if abs(tb[k] - t) <= rtol * max(1.0, abs(t)):
            rows.append((t, ea, errs_b[k]))
    if not rows:
        raise ParseError("the two runs share no time layers")
    t, a, b = map(list, zip(*rows))
    return Comparison(t, a, b, [_ratio(x, y) for x, y in zip(a, b)])


def compare(cfg_a: ExperimentConfig, cfg_b: ExperimentConfig, out_dir=None) -> Comparison:
    """Run both configs against the same oracle and tabulate the per-layer errors.

    ``ratio`` is error(B) / error(A).
    """
    if cfg_a.oracle is None or cfg_a.oracle != cfg_b.oracle:
        raise OracleMismatch("compare needs both configs to name the same oracle")
    with ThreadPoolExecutor(max_workers=2) as pool:
        ra, rb = pool.map(simulate, (cfg_a, cfg_b))
    (_, rep_a), (_, rep_b) = ra, rb
    cmp = align(rep_a.times, rep_a.errors, rep_b.times, rep_b.errors)
    cmp.labels = (cfg_a.name, cfg_b.name)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        output.write_table(
            out / "comparison.csv", ("t", "error_a", "error_b", "ratio"),
            zip(map(float, cmp.times), map(float, cmp.errors_a),
                map(float, cmp.errors_b), map(float, cmp.ratio)),
        )
        output.plot_errors(out / "comparison.svg", {
            f"{cfg_a.name} ({cfg_a.scheme.family.value})": (rep_a.times, rep_a.errors),
            f"{cfg_b.name} ({cfg_b.scheme.family.value})": (rep_b.times, rep_b.errors),
        }, title="error against the exact solution")
    return cmp


# --- tables ------------------------------------------------------------------------------

def check_mesh(set_name: str, sigma: float = 2.0, n: float = 3.0, delta: int = 1) -> list[dict]:
    """The four mesh-geometry conditions for every operator of a named algebra."""
    rows = []
    for op in operator_set(set_name, sigma=sigma, n=n, delta=delta):
        rows.append({"operator": op.name, **mesh_conditions(op)})
    return rows


STENCIL_KEYS = tuple(Stencil.__dataclass_fields__)


def stencil_from_dict(data: dict) -> Stencil:
    """Stencil from explicit node data, or from steps when ``tau`` is given."""
    try:
        if "tau" in data:
            return Stencil.from_steps(**{k: float(v) for k, v in data.items()})
        return Stencil(**{k: float(data[k]) for k in STENCIL_KEYS})
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad stencil description: {exc}") from exc


def load_stencil(path) -> Stencil:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot parse stencil file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a JSON object")
    return stencil_from_dict(data)


def invariants_for(family: str, st: Stencil, sigma=None, n=None, delta=None):
    fam = family.upper()
    if fam == "ODE":
        return ode_invariants(st.x, st.h_plus, st.h_minus, st.u, st.u_plus, st.u_minus)
    if fam == "POWERLAW":
        if sigma is None or n is None:
            raise ParseError("POWERLAW invariants need sigma and n")
        return powerlaw_invariants(st, sigma, n)
    if fam == "SEMILINEAR":
        if delta is None:
            raise ParseError("SEMILINEAR invariants need delta")
        return semilinear_invariants(st, delta)
    if fam == "LINEAR":
        return linear_invariants(st)
    raise ParseError(f"unknown invariant family {family!r}")
