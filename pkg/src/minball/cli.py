"""Command-line front end.

Exit status: 0 success, 1 verification failure, 2 usage error. Output goes
to ``--output``, else to ``$MINBALL_OUTPUT_DIR/<command>.<ext>`` when that
variable is set, else to stdout. Rational parameters accept ``a/b``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import conditions as cond
from .fr_integrals import (FRQuery, classify_asymptotics, expected_class, mc_estimator,
                           series_estimator)
from .geometry import DomainError
from .operators import OperatorParams, ratio_probe, reproducing_check
from .sampling import RngState, sample_ball_star, sample_M, sample_streams
from .transfer import isometric_mass_constant, verify_isometry

OUTPUT_ENV = "MINBALL_OUTPUT_DIR"
PARAM_NAMES = ("p", "q", "b1", "b2", "c", "r", "s", "lam", "lam_t")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    n: int = 2
    seed: int = 42
    samples: int = 100_000
    radial_nodes: int = 64
    tol: float = 3.0
    fmt: str = "json"
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise UsageError("--n must be >= 2")
        if self.samples < 1000:
            raise UsageError("--samples must be >= 1000")
        if self.tol <= 0:
            raise UsageError("--tol must be positive")
        if self.radial_nodes < 4:
            raise UsageError("--radial-nodes must be >= 4")


def rational(text: str) -> Fraction:
    try:
        return cond.as_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def rational_list(text: str) -> list[Fraction]:
    return [rational(t) for t in text.split(",") if t.strip()]


def float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ output


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _cell(x) -> str:
    if x is None:
        return "undefined"
    if isinstance(x, (complex, np.complexfloating)):
        return repr(complex(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def render(payload, fmt: str, columns: list[str] | None = None) -> str:
    if fmt == "json":
        return json.dumps(payload, default=_jsonable, sort_keys=True, indent=2) + "\n"
    rows = payload if isinstance(payload, list) else payload.get("rows", [payload])
    buf = io.StringIO()
    cols = columns or list(rows[0].keys())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def emit(text: str, cfg: RunConfig, command: str) -> None:
    path = cfg.output
    if path is None and os.environ.get(OUTPUT_ENV):
        path = str(Path(os.environ[OUTPUT_ENV]) / f"{command}.{cfg.fmt}")
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


# ------------------------------------------------------------------ inputs


def _condition_input(args) -> cond.ConditionInput:
    vals = {k: getattr(args, k, None) for k in PARAM_NAMES}
    if vals["p"] is None:
        raise UsageError("--p is required")
    if vals["q"] is None:
        vals["q"] = vals["p"]
    return cond.ConditionInput(args.n, **vals)


def _operator_input(args) -> cond.ConditionInput:
    inp = _condition_input(args)
    missing = [k for k in ("b1", "b2", "r", "s") if getattr(inp, k) is None]
    if missing:
        raise UsageError("missing " + ", ".join(f"--{m.replace('_', '-')}" for m in missing))
    if inp.c is None:
        inp = cond.replace(inp, c=cond.critical_c(inp))
    return inp


# ---------------------------------------------------------------- commands


def cmd_check(args, cfg: RunConfig) -> int:
    report = cond.verdict_report(_condition_input(args))
    emit(render(report, "json"), cfg, "check")
    return 0


def cmd_certificate(args, cfg: RunConfig) -> int:
    inp = _operator_input(args)
    out = cond.synthesize_certificate(inp)
    report = {"input": inp.to_json(), "verdict": cond.check_operator(inp)}
    status = 0
    if isinstance(out, cond.Certificate):
        report["certificate"] = out.to_json()
        report["margins"] = report["certificate"]["margins"]
        if not args.no_verify:
            ver = cond.verify_certificate(out, inp)
            report["verification"] = ver
            status = 0 if ver["ok"] else 1
    else:
        report["infeasible"] = out.to_json()
    if isinstance(out, cond.Certificate) != report["verdict"]:
        report["consistency"] = "certificate feasibility disagrees with the condition check"
        status = 1
    emit(render(report, "json"), cfg, "certificate")
    return status


FR_COLUMNS = ["n", "c", "s", "d", "integral", "radius", "estimate", "stderr", "compensated_value", "class"]


def cmd_fr_scan(args, cfg: RunConfig) -> int:
    rows, status = [], 0
    for c in args.c:
        q = FRQuery(c, args.s, args.d, radii=tuple(args.radii), n=cfg.n, pairing=args.pairing)
        if args.estimator == "series":
            est = series_estimator(q, args.integral)
        else:
            est = mc_estimator(q, args.integral, RngState(cfg.seed), cfg.samples, cfg.radial_nodes)
        res = classify_asymptotics(q, est)
        if res.label != expected_class(c):
            status = 1
        for row in res.rows:
            rows.append({"n": cfg.n, "c": c, "s": args.s, "d": args.d, "integral": args.integral,
                         "radius": row["radius"], "estimate": row["estimate"], "stderr": row["stderr"],
                         "compensated_value": row["compensated_value"], "class": row["class"]})
    emit(render(rows, cfg.fmt if args.format else "csv", FR_COLUMNS), cfg, "fr-scan")
    return status


PROBE_COLUMNS = ["family_param", "source_norm", "target_norm", "ratio", "stderr"]


def cmd_norm_probe(args, cfg: RunConfig) -> int:
    inp = _operator_input(args)
    op = OperatorParams.from_condition(inp)
    rows = ratio_probe(op, args.family, args.ladder, nodes=cfg.radial_nodes)
    emit(render(rows, cfg.fmt if args.format else "csv", PROBE_COLUMNS), cfg, "norm-probe")
    return 0


REPRO_COLUMNS = ["domain", "s", "function", "point", "value", "exact", "stderr", "sigmas"]


def cmd_reproduce(args, cfg: RunConfig) -> int:
    rows = []
    for dom in args.domain:
        for s in args.s:
            rows += reproducing_check(dom, cfg.n, s, cfg.samples, cfg.seed, args.points, workers=cfg.workers)
    status = 0 if all(r["sigmas"] < cfg.tol for r in rows) else 1
    emit(render(rows, cfg.fmt if args.format else "csv", REPRO_COLUMNS), cfg, "reproduce")
    return status


ISOMETRY_BATTERY = {
    "1": lambda z: np.ones(z.shape[0]),
    "z1": lambda z: z[:, 0],
    "z1*z2": lambda z: z[:, 0] * z[:, 1],
    "conj(z1)": lambda z: np.conj(z[:, 0]),
    "|z1|^2+z2": lambda z: np.abs(z[:, 0]) ** 2 + z[:, 1],
}


def cmd_isometry(args, cfg: RunConfig) -> int:
    mn = isometric_mass_constant(cfg.n)
    results = []
    for lam in args.lam:
        cM = sample_streams(sample_M, cfg.seed, cfg.samples, workers=cfg.workers, n=cfg.n, s=lam, m_n=mn)
        cB = sample_streams(sample_ball_star, cfg.seed + 1, cfg.samples, workers=cfg.workers, n=cfg.n, s=lam)
        for p in args.p:
            for name, f in ISOMETRY_BATTERY.items():
                rep = verify_isometry(f, p, lam, cM, cB).to_json()
                rep["function"] = name
                results.append(rep)
    ok = all(r["sigmas"] < cfg.tol for r in results)
    report = {"n": cfg.n, "m_n": mn, "samples": cfg.samples, "seed": cfg.seed, "tol_sigmas": cfg.tol,
              "ok": ok, "rows": results}
    emit(render(report, cfg.fmt), cfg, "isometry")
    return 0 if ok else 1


def cmd_region_scan(args, cfg: RunConfig) -> int:
    base = _condition_input(args)
    rows = cond.region_scan(base, args.x, args.xs, args.y, args.ys)
    emit(render(rows, cfg.fmt if args.format else "csv", [args.x, args.y, "verdict", "status"]), cfg,
         "region-scan")
    return 0


# ------------------------------------------------------------------ parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=2, help="complex dimension parameter (default 2)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--radial-nodes", type=int, default=64)
    p.add_argument("--tol", type=float, default=3.0, help="pass threshold in standard errors")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--output", default=None, help=f"output file (default: ${OUTPUT_ENV} or stdout)")
    p.add_argument("--workers", type=int, default=1)


def _add_params(p: argparse.ArgumentParser, operator: bool = True, theorem_c: bool = True) -> None:
    p.add_argument("--p", type=rational)
    p.add_argument("--q", type=rational, help="defaults to p")
    p.add_argument("--s", type=rational)
    if operator:
        for name in ("b1", "b2", "c", "r"):
            p.add_argument(f"--{name}", type=rational)
    if theorem_c:
        p.add_argument("--lambda", dest="lam", type=rational)
        p.add_argument("--lambda-tilde", dest="lam_t", type=rational)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minball", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("check", help="exact verdict for the operator (A/B) or projection (C) conditions",
                       description="JSON {input, theorem, verdict[, reduced, reduced_verdict, caveat]}. "
                                   "Give --lambda/--lambda-tilde for the projection theorem.")
    _add_common(p)
    _add_params(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("certificate", help="synthesize and verify a Schur-test certificate",
                       description="JSON {input, verdict, certificate|infeasible, margins, verification}. "
                                   "--c defaults to the critical exponent.")
    _add_common(p)
    _add_params(p, theorem_c=False)
    p.add_argument("--no-verify", action="store_true")
    p.set_defaults(func=cmd_certificate)

    p = sub.add_parser("fr-scan", help="classify boundary growth of I_c / J_{c,s}",
                       description="CSV columns: " + ", ".join(FR_COLUMNS))
    _add_common(p)
    p.add_argument("--c", type=float_list, required=True, help="comma-separated c values")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--d", type=int, default=0)
    p.add_argument("--integral", choices=("I", "J"), default="I")
    p.add_argument("--radii", type=float_list, default=[0.9, 0.99, 0.999, 0.9999])
    p.add_argument("--estimator", choices=("series", "mc"), default="series")
    p.add_argument("--pairing", choices=("hermitian", "bilinear"), default="hermitian")
    p.set_defaults(func=cmd_fr_scan)

    p = sub.add_parser("norm-probe", help="L^p -> L^q ratio table along a test-function ladder",
                       description="CSV columns: " + ", ".join(PROBE_COLUMNS))
    _add_common(p)
    _add_params(p, theorem_c=False)
    p.add_argument("--family", choices=("xi", "power", "zero"), default="xi")
    p.add_argument("--ladder", type=float_list, default=[0.5, 0.9, 0.99])
    p.set_defaults(func=cmd_norm_probe)

    p = sub.add_parser("reproduce", help="reproducing property of the calibrated projections",
                       description="CSV columns: " + ", ".join(REPRO_COLUMNS))
    _add_common(p)
    p.add_argument("--domain", choices=("M", "ball"), action="append")
    p.add_argument("--s", type=float_list, default=[0.0])
    p.add_argument("--points", type=int, default=20)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("isometry", help="norm preservation of the lift from B* to M",
                       description="JSON {n, m_n, ok, rows[{function, p, lambda, norm_M, norm_B, "
                                   "relative_error, relative_stderr, sigmas}]}")
    _add_common(p)
    p.add_argument("--p", type=float_list, default=[1.0, 2.0, 3.0])
    p.add_argument("--lambda", dest="lam", type=float_list, default=[0.0, 1.0])
    p.set_defaults(func=cmd_isometry)

    p = sub.add_parser("region-scan", help="verdicts over a grid of two parameters",
                       description="CSV columns: <x>, <y>, verdict, status")
    _add_common(p)
    _add_params(p)
    p.add_argument("--x", choices=PARAM_NAMES, required=True)
    p.add_argument("--xs", type=rational_list, required=True)
    p.add_argument("--y", choices=PARAM_NAMES, required=True)
    p.add_argument("--ys", type=rational_list, required=True)
    p.set_defaults(func=cmd_region_scan)
    return parser


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "reproduce" and not args.domain:
            args.domain = ["M", "ball"]
        cfg = RunConfig(n=args.n, seed=args.seed, samples=args.samples, radial_nodes=args.radial_nodes,
                        tol=args.tol, fmt=args.format or "json", output=args.output, workers=args.workers)
        return args.func(args, cfg)
    except (UsageError, cond.HypothesisError, DomainError) as exc:
        sys.stderr.write(f"minball: error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())
