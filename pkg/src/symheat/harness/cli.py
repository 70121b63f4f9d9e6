"""Command-line entry point.

Exit status: 0 on success, 1 on a numerical failure (rejected step, Newton
divergence), 2 on a usage or input error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ..errors import InputError, NumericalFailure, ParseError
from . import runner
from .config import OUTPUT_ENV, build_oracle, load_config

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2

_INT_PARAMS = {"M", "delta"}
_ORACLE_KEYS = {
    "fundamental": ("C",),
    "linear": ("alpha", "f0"),
    "semilinear": ("alpha", "f0", "delta", "tau"),
    "blowup": ("rho", "M"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ParseError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="symheat", description="Symmetry-preserving difference schemes for heat equations.",
                epilog=f"{OUTPUT_ENV} overrides the output directory of every config.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("config")

    c = sub.add_parser("compare", help="run two configs against the same exact solution")
    c.add_argument("config_a")
    c.add_argument("config_b")
    c.add_argument("--out", help="directory for comparison.csv/svg (default: output dir of A)")

    m = sub.add_parser("check-mesh", help="mesh-geometry conditions of an operator algebra")
    m.add_argument("set", help="ODE, POWERLAW, SEMILINEAR or LINEAR")
    m.add_argument("--sigma", type=float, default=2.0)
    m.add_argument("--n", type=float, default=3.0)
    m.add_argument("--delta", type=int, default=1)

    i = sub.add_parser("invariants", help="difference invariants of a stencil given as JSON")
    i.add_argument("family", help="ODE, POWERLAW, SEMILINEAR or LINEAR")
    i.add_argument("stencil_file")
    i.add_argument("--sigma", type=float)
    i.add_argument("--n", type=float)
    i.add_argument("--delta", type=int)

    e = sub.add_parser("exact", help="evaluate a closed-form solution")
    e.add_argument("name", choices=sorted(_ORACLE_KEYS))
    e.add_argument("--eval", nargs=2, type=float, metavar=("T", "X"), required=True)
    e.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    return p


def _exact_params(name: str, pairs: list[str]) -> dict:
    params: dict = {"name": name}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ParseError(f"--param expects KEY=VALUE, got {pair!r}")
        key = key.strip()
        if key not in _ORACLE_KEYS[name] and key not in ("boost", "hopf"):
            raise ParseError(f"{name} takes parameters {_ORACLE_KEYS[name]}, not {key!r}")
        try:
            params[key] = int(value) if key in _INT_PARAMS else float(value)
        except ValueError as exc:
            raise ParseError(f"--param {pair}: {exc}") from exc
    missing = [k for k in _ORACLE_KEYS[name] if k not in params]
    if missing:
        raise ParseError(f"{name} needs --param for {missing}")
    return params


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    result = runner.run(cfg)
    rep = result.report
    print(f"steps={len(rep.times) - 1} t_final={rep.times[-1]:.17g} "
          f"wall_time={rep.wall_time:.3f}s rejections={rep.rejections}")
    if rep.final_error is not None:
        print(f"final_error={rep.final_error:.6e} max_error={max(rep.errors):.6e}")
    if rep.residuals:
        print(f"max_residual={max(rep.residuals):.3e}")
    for path in result.files:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    a, b = load_config(args.config_a), load_config(args.config_b)
    out = Path(args.out) if args.out else a.output
    cmp = runner.compare(a, b, out)
    print(f"{'t':>12} {'error_a':>14} {'error_b':>14} {'ratio':>12}")
    for t, ea, eb, r in zip(cmp.times, cmp.errors_a, cmp.errors_b, cmp.ratio):
        print(f"{t:12.6g} {ea:14.6e} {eb:14.6e} {r:12.4e}")
    print(f"A dominated by B at every layer: {cmp.dominated()}")
    print(f"wrote {out / 'comparison.csv'}")
    return EXIT_OK


def _cmd_check_mesh(args) -> int:
    rows = runner.check_mesh(args.set, args.sigma, args.n, args.delta)
    cols = ("time_uniform", "space_uniform", "orthogonal", "flat_layers")
    print(f"{'operator':<10}" + "".join(f"{c:>15}" for c in cols))
    for row in rows:
        print(f"{row['operator']:<10}" + "".join(f"{str(row[c]):>15}" for c in cols))
    return EXIT_OK


def _cmd_invariants(args) -> int:
    st = runner.load_stencil(args.stencil_file)
    inv = runner.invariants_for(args.family, st, args.sigma, args.n, args.delta)
    for name, value in inv.as_dict().items():
        print(f"{name} = {value:.17g}")
    return EXIT_OK


def _cmd_exact(args) -> int:
    params = _exact_params(args.name, args.param)
    t, x = args.eval
    oracle = build_oracle(params, params.get("tau"))
    print(f"{float(np.asarray(oracle.u(np.array([x]), t))[0]):.17g}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "compare": _cmd_compare,
    "check-mesh": _cmd_check_mesh,
    "invariants": _cmd_invariants,
    "exact": _cmd_exact,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except NumericalFailure as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InputError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
