"""Experiment configuration files.

One INI-style file per experiment. Sections::

    [scheme]    family, plus sigma / n / sign / delta as the family needs
    [oracle]    name = fundamental | linear | semilinear | blowup, its parameters,
                optional boost = <a> and hopf = true
    [initial]   source = oracle | table; t0, x_min, x_max, nodes (or xs, us)
    [boundary]  source = oracle | fixed
    [time]      steps; policy = fixed | h2 | blowup; tau, c or rho; max_rejections
    [newton]    max_iter, abs_tol, damping
    [output]    dir; emit = csv, svg, summary; plot_layers; error = relative | absolute

Physical parameters have no defaults: a missing sigma, n, delta or alpha is
a parse error.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ParseError
from ..exact import (
    BlowupOracle,
    BlowupSpec,
    BoostedOracle,
    FundamentalOracle,
    HopfOracle,
    LinearInvariantOracle,
    Oracle,
    SemilinearOracle,
)
from ..schemes import Family, NewtonOptions, SchemeKind

OUTPUT_ENV = "SYMHEAT_OUTPUT_DIR"
EMIT_CHOICES = {"csv", "svg", "summary"}


@dataclass(frozen=True)
class TimePolicy:
    kind: str  # fixed | h2 | blowup
    tau: Optional[float] = None
    c: Optional[float] = None
    rho: Optional[float] = None
    max_rejections: int = 0


@dataclass
class ExperimentConfig:
    scheme: SchemeKind
    steps: int
    time: TimePolicy
    oracle: Optional[dict] = None
    initial: dict = field(default_factory=lambda: {"source": "oracle"})
    boundary: str = "oracle"
    output: Path = Path("out")
    emit: frozenset = frozenset({"csv", "summary"})
    plot_layers: Optional[list] = None
    error: str = "relative"
    newton: NewtonOptions = NewtonOptions()
    name: str = "run"

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise ParseError("steps must be non-negative")
        if self.time.kind == "blowup" and self.scheme.family is not Family.POWERLAW_IMPLICIT:
            raise ParseError("the blow-up time mesh is only valid for POWERLAW_IMPLICIT")
        if self.boundary not in ("oracle", "fixed"):
            raise ParseError(f"boundary source must be oracle or fixed, not {self.boundary!r}")
        if self.boundary == "oracle" and self.oracle is None:
            raise ParseError("boundary source 'oracle' needs an [oracle] section")
        if not set(self.emit) <= EMIT_CHOICES:
            raise ParseError(f"emit must be a subset of {sorted(EMIT_CHOICES)}")
        if self.error not in ("relative", "absolute"):
            raise ParseError("error must be relative or absolute")


def _number(section, key, cast=float, required=True, default=None):
    if key not in section:
        if required:
            raise ParseError(f"[{section.name}] missing required key {key!r}")
        return default
    try:
        return cast(section[key])
    except ValueError as exc:
        raise ParseError(f"[{section.name}] {key} = {section[key]!r}: {exc}") from exc


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ParseError(f"bad number list {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ParseError(f"bad integer list {text!r}") from exc


def _scheme(section) -> SchemeKind:
    try:
        fam = Family(section.get("family", "").strip().upper())
    except ValueError as exc:
        raise ParseError(f"unknown scheme family {section.get('family')!r}") from exc
    kw = {}
    for key, cast in (("sigma", float), ("n", float), ("sign", int), ("delta", int)):
        if key in section:
            kw[key] = _number(section, key, cast)
    try:
        return SchemeKind(fam, **kw)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def _oracle_params(section) -> dict:
    name = section.get("name", "").strip().lower()
    required = {
        "fundamental": ("C",),
        "linear": ("alpha", "f0"),
        "semilinear": ("alpha", "f0", "delta"),
        "blowup": ("rho", "M"),
    }
    if name not in required:
        raise ParseError(f"unknown oracle {name!r}; choose {sorted(required)}")
    params = {"name": name}
    for key in required[name]:
        params[key] = _number(section, key.lower(), int if key in ("M", "delta") else float)
    if name == "semilinear" and "tau" in section:
        params["tau"] = _number(section, "tau")
    if "boost" in section:
        params["boost"] = _number(section, "boost")
    if section.getboolean("hopf", fallback=False):
        params["hopf"] = True
    return params


def build_oracle(params: dict, tau: Optional[float] = None) -> Oracle:
    """Instantiate an oracle from its parameter dict (as parsed from ``[oracle]``)."""
    name = params["name"]
    if name == "fundamental":
        oracle: Oracle = FundamentalOracle(params["C"])
    elif name == "linear":
        oracle = LinearInvariantOracle(params["alpha"], params["f0"])
    elif name == "semilinear":
        step = params.get("tau", tau)
        if step is None:
            raise ParseError("semilinear oracle needs tau (its time grid)")
        oracle = SemilinearOracle(params["alpha"], params["f0"], params["delta"], step)
    elif name == "blowup":
        oracle = BlowupOracle(BlowupSpec(params["rho"], params["M"]))
    else:
        raise ParseError(f"unknown oracle {name!r}")
    if params.get("boost"):
        if name not in ("fundamental", "linear"):
            raise ParseError("boost applies to heat-equation oracles only")
        oracle = BoostedOracle(oracle, params["boost"])
    if params.get("hopf"):
        oracle = HopfOracle(oracle)
    return oracle


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str.lower
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ParseError(f"{source}: {exc}") from exc
    for required in ("scheme", "time"):
        if not cp.has_section(required):
            raise ParseError(f"{source}: missing [{required}] section")

    scheme = _scheme(cp["scheme"])
    oracle = _oracle_params(cp["oracle"]) if cp.has_section("oracle") else None

    ts = cp["time"]
    kind = ts.get("policy", "fixed").strip().lower()
    if kind == "fixed":
        policy = TimePolicy(kind, tau=_number(ts, "tau"))
    elif kind == "h2":
        policy = TimePolicy(kind, c=_number(ts, "c"))
    elif kind == "blowup":
        policy = TimePolicy(kind, rho=_number(ts, "rho"))
    else:
        raise ParseError(f"unknown time policy {kind!r}")
    policy = TimePolicy(policy.kind, policy.tau, policy.c, policy.rho,
                        _number(ts, "max_rejections", int, required=False, default=0))

    initial: dict = {"source": "oracle"}
    if cp.has_section("initial"):
        sec = cp["initial"]
        initial["source"] = sec.get("source", "oracle").strip().lower()
        if initial["source"] == "table":
            initial["t0"] = _number(sec, "t0")
            initial["xs"] = _floats(sec.get("xs", ""))
            initial["us"] = _floats(sec.get("us", ""))
        elif initial["source"] == "oracle":
            initial["t0"] = _number(sec, "t0", required=False, default=0.0)
            for key, cast in (("x_min", float), ("x_max", float), ("nodes", int)):
                if key in sec:
                    initial[key] = _number(sec, key, cast)
        else:
            raise ParseError(f"unknown initial source {initial['source']!r}")

    boundary = "oracle" if oracle is not None else "fixed"
    if cp.has_section("boundary"):
        boundary = cp["boundary"].get("source", boundary).strip().lower()

    newton = NewtonOptions()
    if cp.has_section("newton"):
        sec = cp["newton"]
        newton = NewtonOptions(
            _number(sec, "max_iter", int, required=False, default=newton.max_iter),
            _number(sec, "abs_tol", required=False, default=newton.abs_tol),
            _number(sec, "damping", required=False, default=newton.damping),
        )

    out = cp["output"] if cp.has_section("output") else {}
    out_dir = Path(os.environ.get(OUTPUT_ENV) or out.get("dir", "out"))
    emit = frozenset(e.strip().lower() for e in out.get("emit", "csv, summary").split(",") if e.strip())
    plot_layers = _ints(out["plot_layers"]) if "plot_layers" in out else None

    try:
        steps = int(ts.get("steps", ""))
    except ValueError as exc:
        raise ParseError("[time] steps must be an integer") from exc

    return ExperimentConfig(
        scheme=scheme, steps=steps, time=policy, oracle=oracle, initial=initial,
        boundary=boundary, output=out_dir, emit=emit, plot_layers=plot_layers,
        error=out.get("error", "relative").strip().lower(), newton=newton,
        name=Path(source).stem if source != "<config>" else "run",
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, source=str(path))


def initial_layer_arrays(cfg: ExperimentConfig, oracle: Optional[Oracle]):
    """``(t0, xs, us)`` of the starting layer."""
    init = cfg.initial
    if init["source"] == "table":
        return init["t0"], np.asarray(init["xs"]), np.asarray(init["us"])
    if oracle is None:
        raise ParseError("initial source 'oracle' needs an [oracle] section")
    t0 = init.get("t0", 0.0)
    if "x_min" in init:
        try:
            xs = np.linspace(init["x_min"], init["x_max"], init["nodes"])
        except KeyError as exc:
            raise ParseError(f"[initial] missing {exc}") from exc
    else:
        xs = oracle.initial_mesh()
        if xs is None:
            raise ParseError("[initial] needs x_min, x_max and nodes for this oracle")
    return t0, xs, oracle.u(xs, t0)
