"""Command-line front end.

Subcommands ``eval``, ``verify``, ``sweep`` and ``spectrum``. Exit status is
0 on success, 1 when a verification item fails or a computation does not
converge, and 2 for usage and validation errors. Errors are written to
stderr as one JSON object, ``{"error": {"class": ..., "message": ...}}``.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import datetime as _dt
import io
import json
import platform
import sys

import numpy as np

from . import __version__, kernel, spectral, verify
from .core import Grid1D, OscParams
from .errors import ArgumentError, CausticError, ProplabError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# sweepable options and the suite item each one drives by default
SWEEP_PARAMS = {
    "D": "fock.bch",
    "terms": "spectral.partition_spectral",
    "quad-order": "kernel.composition",
    "slices": "pathint.chain_exact",
    "grid-n": "pathint.chain_numeric",
}


class UsageError(ProplabError):
    error_class = "usage"


class SweepError(ProplabError):
    error_class = "sweep"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(parser):
    g = parser.add_argument_group("oscillator")
    g.add_argument("--m", type=float, default=1.0)
    g.add_argument("--omega", type=float, default=1.0)
    g.add_argument("--hbar", type=float, default=1.0)
    o = parser.add_argument_group("numerics")
    o.add_argument("--epsilon", type=float)
    o.add_argument("--terms", type=int)
    o.add_argument("--D", dest="D", type=int)
    o.add_argument("--d", dest="d", type=int)
    o.add_argument("--quad-order", type=int)
    o.add_argument("--slices", type=int)
    o.add_argument("--grid-min", type=float)
    o.add_argument("--grid-max", type=float)
    o.add_argument("--grid-n", type=int)
    out = parser.add_argument_group("output")
    out.add_argument("--format", choices=("csv", "json"))
    out.add_argument("--out", metavar="PATH")
    parser.add_argument("--seedless", action="store_true", help="reserved; nothing here is random, so it is rejected")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="proplab", description="Harmonic-oscillator propagator: evaluation and cross-checks.")
    parser.add_argument("--version", action="version", version=f"proplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="evaluate the real-time or Euclidean kernel")
    _common(ev)
    ev.add_argument("--x1", type=float, default=0.0)
    ev.add_argument("--x2", type=float, default=0.0)
    ev.add_argument("--tau", type=float)
    ev.add_argument("--beta", type=float)
    ev.add_argument("--euclidean", action="store_true")

    ve = sub.add_parser("verify", help="run the cross-method verification suite")
    _common(ve)
    ve.add_argument("--only", action="append", metavar="ITEM")
    ve.add_argument("--thresholds", metavar="PATH")
    ve.add_argument("--list", action="store_true", help="list suite items and exit")

    sw = sub.add_parser("sweep", help="residual of one suite item against a resolution parameter")
    _common(sw)
    sw.add_argument("--param", required=True, choices=sorted(SWEEP_PARAMS))
    sw.add_argument("--values", required=True, help="comma-separated values, e.g. 20,40,80")
    sw.add_argument("--item", help="suite item to sweep (defaults depend on --param)")

    sp = sub.add_parser("spectrum", help="energies and eigenfunctions")
    _common(sp)
    sp.add_argument("--n-max", type=int, default=5, help="number of levels, n = 0 .. n_max - 1")
    return parser


def _params(args):
    try:
        return OscParams(args.m, args.omega, args.hbar)
    except ArgumentError as exc:
        raise UsageError(str(exc)) from exc


def _config(args, **overrides):
    fields = dict(
        epsilon=args.epsilon,
        terms=args.terms,
        D=args.D,
        d=args.d,
        quad_order=args.quad_order,
        slices=args.slices,
        grid_min=args.grid_min,
        grid_max=args.grid_max,
        grid_n=args.grid_n,
    )
    fields.update(overrides)
    return verify.RunConfig(params=_params(args), **fields)


def _complex(z):
    return {"re": z.real, "im": z.imag}


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _meta():
    return {
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "numpy": np.__version__,
        "proplab": __version__,
        "python": platform.python_version(),
    }


def cmd_eval(args):
    p = _params(args)
    if args.euclidean:
        if args.beta is None:
            raise UsageError("--euclidean needs --beta")
        value = kernel.propagator_euclidean(p, args.x2, args.x1, args.beta)
        inputs = {"beta": args.beta, "x1": args.x1, "x2": args.x2}
        results = {"kernel": "euclidean", "value": value}
    else:
        if args.tau is None:
            raise UsageError("eval needs --tau (or --euclidean --beta)")
        q = kernel.KernelQuery(args.x2, args.x1, args.tau, args.epsilon or 0.0)
        if p.omega == 0:
            k, kind = kernel.free_propagator(p, q), "free"
        else:
            k, kind = kernel.propagator(p, q), "harmonic"
        inputs = {"epsilon": q.epsilon, "tau": q.tau, "x1": q.x1, "x2": q.x2}
        results = {"abs": abs(k), "kernel": kind, "phase": cmath.phase(k), "value": _complex(k)}
    inputs["params"] = {"hbar": p.hbar, "m": p.m, "omega": p.omega}
    report = {"command": "eval", "inputs": inputs, "results": results}
    if args.format == "csv":
        flat = []
        for key, val in sorted(results.items()):
            if isinstance(val, dict):
                flat.extend((f"{key}.{k}", v) for k, v in sorted(val.items()))
            else:
                flat.append((key, val))
        _emit(_csv(["key", "value"], flat), args.out)
    else:
        _emit(_json(report), args.out)
    return EXIT_OK


def cmd_verify(args):
    if args.list:
        _emit("".join(f"{name}\t{desc}\n" for name, (_, desc) in sorted(verify.SUITE.items())), args.out)
        return EXIT_OK
    cfg = _config(args)
    thresholds = verify.load_thresholds(args.thresholds)
    entries = verify.run_suite(cfg, args.only, thresholds)
    ok = all(e["passed"] for e in entries)
    report = {
        "command": "verify",
        "inputs": cfg.echo(),
        "residuals": entries,
        "pass": ok,
        "failed": [e["name"] for e in entries if not e["passed"]],
    }
    if args.format == "csv":
        rows = [(e["name"], e["value"], e["threshold"], e["passed"]) for e in entries]
        _emit(_csv(["name", "value", "threshold", "pass"], rows), args.out)
    else:
        _emit(_json(report), args.out)
    for name in report["failed"]:
        print(f"FAIL {name}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def _parse_values(text, param):
    parts = [t.strip() for t in text.split(",") if t.strip()]
    if not parts:
        raise SweepError("empty sweep range")
    try:
        values = [int(t) for t in parts]
    except ValueError as exc:
        raise SweepError(f"--{param} values must be integers: {text!r}") from exc
    if any(v < 1 for v in values):
        raise SweepError("sweep values must be positive")
    return values


def cmd_sweep(args):
    values = _parse_values(args.values, args.param)
    item = args.item or SWEEP_PARAMS[args.param]
    if item not in verify.SUITE:
        raise SweepError(f"unknown suite item {item!r}")
    key = args.param.replace("-", "_")
    func = verify.SUITE[item][0]
    rows = []
    for v in values:
        cfg = _config(args, **{key: v})
        rows.append((v, float(func(cfg))))
    if args.format == "json":
        report = {"command": "sweep", "item": item, "param": args.param, "rows": [list(r) for r in rows]}
        _emit(_json(report), args.out)
    else:
        _emit(_csv(["param", "residual"], rows), args.out)
    if args.out:
        sidecar = {
            "config": _config(args).echo(),
            "item": item,
            "meta": _meta(),
            "param": args.param,
            "values": values,
        }
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            fh.write(_json(sidecar))
    return EXIT_OK


def cmd_spectrum(args):
    p = _params(args)
    if args.n_max < 1:
        raise UsageError("--n-max must be at least 1")
    if p.omega == 0:
        raise UsageError("the spectrum needs --omega > 0")
    if args.grid_n is not None:
        lo = -3.0 if args.grid_min is None else args.grid_min
        hi = 3.0 if args.grid_max is None else args.grid_max
        xs = [float(x) for x in Grid1D(lo, hi, args.grid_n).points()]
    else:
        xs = [0.0]
    levels = []
    for n in range(args.n_max):
        phi = spectral.eigenfunction(spectral.EigenState(n, p), np.array(xs))
        levels.append({"n": n, "energy": spectral.energy(n, p), "phi": [float(v) for v in phi]})
    if args.format == "csv":
        header = ["n", "energy"] + [f"phi({x!r})" for x in xs]
        rows = [[lv["n"], lv["energy"], *lv["phi"]] for lv in levels]
        _emit(_csv(header, rows), args.out)
    else:
        report = {
            "command": "spectrum",
            "inputs": {"n_max": args.n_max, "params": {"hbar": p.hbar, "m": p.m, "omega": p.omega}, "x": xs},
            "results": levels,
        }
        _emit(_json(report), args.out)
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "sweep": cmd_sweep, "spectrum": cmd_spectrum}


def _exit_code(exc):
    if isinstance(exc, (ArgumentError, CausticError, UsageError, SweepError)):
        return EXIT_USAGE
    return EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.seedless:
            raise UsageError("--seedless is reserved: no operation here uses random numbers")
        return COMMANDS[args.command](args)
    except ProplabError as exc:
        sys.stderr.write(json.dumps({"error": {"class": exc.error_class, "message": str(exc)}}, sort_keys=True) + "\n")
        return _exit_code(exc)
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": {"class": "io", "message": str(exc)}}, sort_keys=True) + "\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
