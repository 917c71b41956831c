"""Command-line front end.

Exit codes: 0 when every reported property passes, 2 when something is
violated, 1 for usage, input or I/O errors.  Reports are JSON on stdout;
``--format human`` renders the same JSON as indented ``key: value`` lines.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import axioms, capacities, core, functionals, io, lotteries
from .axioms import DEFAULT_SEED, SearchBudget
from .report import jsonable

EXIT_PASS, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2
SEED_ENV = "ANTIMONO_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _int(text):
    return int(text, 0)


def resolve_seed(arg):
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise UsageError(f"{SEED_ENV} is not an integer: {env!r}") from None
    return DEFAULT_SEED


def _budget(args, samples=None):
    return SearchBudget(
        samples=args.samples if samples is None else samples,
        seed=args.seed,
        value_range=tuple(args.range) if getattr(args, "range", None) else None,
        grid=getattr(args, "grid", None),
        tol=args.tol,
        full_scan=getattr(args, "full_scan", False),
        threads=args.threads,
    )


def _config(args):
    skip = {"func", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _human(obj, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            nested = isinstance(v, dict) or (isinstance(v, list) and any(isinstance(x, (dict, list)) for x in v))
            if nested and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_human(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_human(v, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(v)}")
    else:
        lines.append(f"{pad}{json.dumps(obj)}")
    return lines


def _emit(args, payload, rows=None):
    """Write a report; ``rows`` is the table used by ``--format csv``."""
    payload = jsonable(payload)
    if args.format == "csv":
        if rows is None:
            raise UsageError(f"{args.command} has no csv output; use json or human")
        lines = [f"# {k}={json.dumps(v)}" for k, v in payload.get("config", {}).items()]
        lines += [",".join(repr(float(v)) if not isinstance(v, str) else v for v in r) for r in rows]
        sys.stdout.write("\n".join(lines) + "\n")
    elif args.format == "human":
        sys.stdout.write("\n".join(_human(payload)) + "\n")
    else:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _code(*reports):
    return EXIT_VIOLATION if any(not r.passed for r in reports) else EXIT_PASS


def _measure_arg(values):
    try:
        P = [io.number(v) for v in values]
    except io.FormatError as e:
        raise UsageError(str(e)) from None
    if len(P) == 1:
        P = [P[0], 1 - P[0]]
    return core.ProbabilityMeasure(P)


# --- subcommands -----------------------------------------------------------------


AXIOMS = {
    "additivity": ("general", "comonotonic", "antimonotonic"),
    "homogeneity": ("positive", "full"),
    "monotonicity": (None,),
    "normalization": (None,),
    "law-based": (None,),
    "affinity": ("general", "antimonotonic"),
    "ce-am-additivity": ("antimonotonic",),
    "convexity": ("general", "antimonotonic"),
    "uncertainty-reduction": (None,),
    "utility-concavity": (None,),
    "expectation-representation": (None,),
}


def run_check(spec, axiom, mode, budget):
    axiom = axiom.replace("_", "-")
    if axiom not in AXIOMS:
        raise UsageError(f"unknown axiom {axiom!r}; choose from {', '.join(AXIOMS)}")
    modes = AXIOMS[axiom]
    if mode is None:
        mode = modes[0]
    elif mode not in modes:
        raise UsageError(f"axiom {axiom} takes modes {modes}")
    if axiom == "additivity":
        return axioms.check_additivity(spec, budget, mode)
    if axiom == "homogeneity":
        return axioms.check_homogeneity(spec, budget, positive_only=(mode == "positive"))
    if axiom == "monotonicity":
        return axioms.check_monotonicity(spec, budget)
    if axiom == "normalization":
        return axioms.check_normalization(spec, budget.tol)
    if axiom == "law-based":
        P = getattr(spec, "P", None)
        if P is None:
            raise UsageError("law-based check needs a spec with a measure P")
        return axioms.check_law_based(spec, P, budget)
    if axiom == "affinity":
        return axioms.check_affinity(spec, budget, mode)
    if axiom == "ce-am-additivity":
        return axioms.check_ce_am_additivity(spec, budget)
    if axiom == "convexity":
        return axioms.check_preference_convexity(spec, budget, mode)
    if axiom == "uncertainty-reduction":
        return axioms.check_uncertainty_reduction(spec, budget)
    if axiom == "utility-concavity":
        if spec.U is None:
            raise UsageError("utility-concavity needs a spec with a utility U")
        return axioms.check_utility_concavity(spec.U)
    return axioms.verify_expectation_representation(spec, budget)


def cmd_check(args):
    spec = io.parse_spec(io.load_json(args.spec))
    report = run_check(spec, args.axiom, args.mode, _budget(args))
    _emit(args, {"command": "check", "config": _config(args), "report": report.to_dict()})
    return _code(report)


def cmd_eval(args):
    spec = io.parse_spec(io.load_json(args.spec))
    X = np.atleast_2d(io.read_acts(args.acts))
    values = np.atleast_1d(functionals.evaluate(spec, X))
    out = {"command": "eval", "config": _config(args), "values": values.tolist()}
    if args.ce:
        out["certainty_equivalents"] = np.atleast_1d(functionals.certainty_equivalent(spec, X)).tolist()
        rows = list(zip(out["values"], out["certainty_equivalents"]))
    else:
        rows = [(v,) for v in out["values"]]
    _emit(args, out, rows)
    return EXIT_PASS


def cmd_decompose(args):
    X = np.atleast_2d(io.read_acts(args.acts))
    rows = []
    for x in X:
        if args.exact:
            d = core.monotone_decompose_exact(x)
            rows.append({
                "act": x.tolist(),
                "up": [str(v) for v in d.up_fractions()],
                "down": [str(v) for v in d.down_fractions()],
                "exact": bool(d.reproduces(x)),
            })
        else:
            up, down = core.monotone_decompose(x)
            rows.append({"act": x.tolist(), "up": up.tolist(), "down": down.tolist()})
    table = [list(r["up"]) + list(r["down"]) for r in rows]
    _emit(args, {"command": "decompose", "config": _config(args), "decompositions": rows}, table)
    return EXIT_PASS


def cmd_extract(args):
    spec = io.parse_spec(io.load_json(args.spec))
    Q, report = axioms.extract_measure(spec, args.tol, args.seed)
    _emit(args, {"command": "extract-measure", "config": _config(args), "Q": Q.tolist(), "report": report.to_dict()})
    return _code(report)


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_example1(args):
    n = args.n
    g = capacities.example1_distortion()
    P = core.ProbabilityMeasure.uniform(n)
    W = capacities.capacity_from_distortion(g, P)
    spec = functionals.Distortion(g, P)
    budget = _budget(args)
    pseudo = capacities.is_pseudo_convex(W)
    convex = capacities.is_convex_capacity(W)
    general = axioms.check_preference_convexity(spec, budget, "general")
    am_conv = axioms.check_preference_convexity(spec, budget, "antimonotonic")
    X, Y = np.array([1.0, 1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0, 1.0])
    spec4 = functionals.Distortion(g, core.ProbabilityMeasure.uniform(4))
    lhs, rhs = functionals.evaluate(spec4, X + Y), functionals.evaluate(spec4, X) + functionals.evaluate(spec4, Y)
    am_add = {
        "check": "additivity",
        "mode": "antimonotonic",
        "states": 4,
        "witness": {"X": X.tolist(), "Y": Y.tolist(), "lhs": float(lhs), "rhs": float(rhs), "magnitude": float(abs(lhs - rhs))},
    }
    reports = {
        "pseudo_convexity": pseudo.to_dict(),
        "convexity": convex.to_dict(),
        "preference_convexity_general": general.to_dict(),
        "am_convexity": am_conv.to_dict(),
        "am_additivity": am_add,
    }
    files = []
    if args.out:
        out = Path(args.out)
        for name, rep in reports.items():
            _write(out / f"{name}.json", json.dumps(jsonable(rep), indent=2, sort_keys=True) + "\n")
            files.append(str(out / f"{name}.json"))
        if args.emit_curve:
            ps = np.linspace(0.0, 1.0, args.emit_curve + 1)
            lines = ["p,g"] + [f"{p!r},{float(v)!r}" for p, v in zip(ps.tolist(), np.atleast_1d(g(ps)).tolist())]
            _write(out / "g_curve.csv", "\n".join(lines) + "\n")
            files.append(str(out / "g_curve.csv"))
    reproduced = pseudo.passed and not convex.passed and not general.passed and am_conv.passed
    payload = {
        "command": "example1",
        "config": _config(args),
        "verdicts": {k: v.get("verdict", "violated") for k, v in reports.items()},
        "reproduced": reproduced,
        "files": files,
        "reports": reports,
    }
    _emit(args, payload)
    return EXIT_PASS if reproduced else EXIT_VIOLATION


def cmd_savage(args):
    P = _measure_arg(args.p)
    U = io.parse_utility(io.load_json(args.utility))
    result = axioms.savage_equivalence_harness(P, U, _budget(args))
    _emit(args, {"command": "savage", "config": _config(args), **result.to_dict()})
    return EXIT_PASS if result.verdicts == ("pass",) * 3 else EXIT_VIOLATION


def cmd_standard_seq(args):
    P = _measure_arg(args.p)
    U = io.parse_utility(io.load_json(args.utility))
    m, M = io.number(args.m), io.number(args.M)
    A = args.event if args.event else [0]
    seq = axioms.standard_sequence(P, U, A, m, M)
    out = {"command": "standard-seq", "config": _config(args), "sequence": [float(v) for v in seq]}
    if seq and isinstance(seq[0], Fraction):
        out["exact"] = [str(v) for v in seq]
    _emit(args, out, [(v,) for v in out["sequence"]])
    return EXIT_PASS


def cmd_aa_recover(args):
    oracle = io.parse_aa_model(io.load_json(args.model))
    m = io.parse_lottery(io.load_json(args.band[0]))
    M = io.parse_lottery(io.load_json(args.band[1]))
    rec = lotteries.recover_representation(oracle, m, M, _budget(args))
    _emit(args, {
        "command": "aa recover",
        "config": _config(args),
        "P": rec.P.weights.tolist() if rec.P is not None else None,
        "u": rec.u.tolist(),
        "report": rec.report.to_dict(),
    })
    return _code(rec.report)


def cmd_aa_check(args):
    model = io.parse_aa_model(io.load_json(args.model))
    report = lotteries.check_am_independence(model, _budget(args))
    _emit(args, {"command": "aa check", "config": _config(args), "report": report.to_dict()})
    return _code(report)


# --- parser ----------------------------------------------------------------------------


def _common(p, samples=10_000):
    p.add_argument("--seed", type=_int, default=None, help=f"search seed (default {DEFAULT_SEED:#x}, or ${SEED_ENV})")
    p.add_argument("--samples", type=int, default=samples)
    p.add_argument("--tol", type=float, default=axioms.DEFAULT_TOL)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=("json", "human", "csv"), default="json")


def build_parser():
    parser = _Parser(prog="antimono", description="Antimonotonicity axioms for preference functionals.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="falsification search for an axiom")
    p.add_argument("--spec", required=True)
    p.add_argument("--axiom", required=True)
    p.add_argument("--mode")
    p.add_argument("--grid", type=int)
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--full-scan", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", help="evaluate a functional on acts")
    p.add_argument("--spec", required=True)
    p.add_argument("--acts", required=True, help="JSON list(s) or CSV rows")
    p.add_argument("--ce", action="store_true", help="also print certainty equivalents")
    _common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("decompose", help="split acts into nondecreasing plus nonincreasing parts")
    p.add_argument("--acts", required=True)
    p.add_argument("--exact", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("extract-measure", help="read off Q(w_i) = I(1_{w_i})")
    p.add_argument("--spec", required=True)
    _common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("example1", help="reproduce the piecewise-linear distortion example")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--out")
    p.add_argument("--emit-curve", type=int, default=1000, metavar="N", help="mesh intervals for g_curve.csv (0 disables)")
    _common(p, samples=100_000)
    p.set_defaults(func=cmd_example1)

    p = sub.add_parser("savage", help="convexity / am-convexity / concavity equivalence harness")
    p.add_argument("--p", nargs="+", required=True)
    p.add_argument("--utility", required=True)
    _common(p)
    p.set_defaults(func=cmd_savage)

    p = sub.add_parser("standard-seq", help="standard sequence for an event A")
    p.add_argument("--p", nargs="+", required=True, help="P(A) for two states, or the full measure")
    p.add_argument("--m", required=True)
    p.add_argument("--M", required=True)
    p.add_argument("--utility", required=True)
    p.add_argument("--event", type=int, nargs="*", help="states in A (default: state 0)")
    _common(p)
    p.set_defaults(func=cmd_standard_seq)

    p = sub.add_parser("aa", help="Anscombe-Aumann lottery acts")
    aa = p.add_subparsers(dest="aa_command", required=True, parser_class=_Parser)
    q = aa.add_parser("recover", help="recover P and prize utilities from a hidden model")
    q.add_argument("--model", required=True)
    q.add_argument("--band", nargs=2, required=True, metavar=("m.json", "M.json"))
    _common(q)
    q.set_defaults(func=cmd_aa_recover)
    q = aa.add_parser("check", help="am-independence search")
    q.add_argument("--model", required=True)
    _common(q)
    q.set_defaults(func=cmd_aa_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.seed = resolve_seed(args.seed)
        return args.func(args)
    except (UsageError, OSError, KeyError, ValueError, ArithmeticError, TypeError) as e:
        msg = f"missing field {e}" if isinstance(e, KeyError) else str(e)
        sys.stderr.write(f"antimono {args.command}: error: {msg}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
