"""JSON and CSV formats for acts, measures, utilities, capacities and specs.

Numbers may be written as JSON numbers or as strings such as ``"2/3"``;
strings and JSON integers are read as exact rationals.  See the README for
the schema of each object.
"""

from __future__ import annotations

import csv
import io as _io
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .capacities import Capacity, DistortionFunction, example1_distortion, identity_distortion
from .core import ProbabilityMeasure
from .functionals import Choquet, Distortion, Expectation, ExpectedUtility, UtilityFunction
from .lotteries import AAModel, Lottery, LotteryAct

_NAMED_FUNCTIONS = {
    "identity": lambda x: x,
    "sqrt": np.sqrt,
    "square": np.square,
    "log1p": np.log1p,
    "exp": np.exp,
}


class FormatError(ValueError):
    pass


def number(v):
    """A JSON scalar as an exact rational when possible, else a float."""
    if isinstance(v, bool):
        raise FormatError("booleans are not numbers")
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            raise FormatError(f"not a number: {v!r}") from None
    raise FormatError(f"not a number: {v!r}")


def _floats(seq):
    try:
        return np.asarray([[float(number(x)) for x in row] if isinstance(row, list) else float(number(row)) for row in seq], dtype=float)
    except TypeError:
        raise FormatError("expected a list of numbers") from None


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON ({e})") from None


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True)


# --- parsing --------------------------------------------------------------------


def parse_measure(obj):
    if isinstance(obj, dict):
        if "uniform" in obj:
            return ProbabilityMeasure.uniform(int(obj["uniform"]))
        obj = obj.get("P", obj.get("weights"))
    if not isinstance(obj, list):
        raise FormatError("measure must be a list of weights or {'uniform': n}")
    return ProbabilityMeasure([number(v) for v in obj])


def parse_utility(obj):
    if obj is None:
        return None
    if isinstance(obj, dict):
        if "identity" in obj:
            lo, hi = obj["identity"]
            return UtilityFunction.identity(number(lo), number(hi))
        if "breakpoints" in obj:
            return UtilityFunction([(number(x), number(u)) for x, u in obj["breakpoints"]])
        if "function" in obj:
            fn = _NAMED_FUNCTIONS.get(obj["function"])
            if fn is None:
                raise FormatError(f"unknown utility function {obj['function']!r}")
            lo, hi = float(number(obj.get("lo", 0))), float(number(obj.get("hi", 1)))
            xs = np.linspace(lo, hi, int(obj.get("points", 101)))
            return UtilityFunction.sampled(fn, xs)
    if isinstance(obj, list):
        return UtilityFunction([(number(x), number(u)) for x, u in obj])
    raise FormatError("utility must be {'identity': [lo, hi]}, {'breakpoints': [...]} or {'function': name}")


def parse_distortion(obj):
    if obj == "example1":
        return example1_distortion()
    if obj == "identity":
        return identity_distortion()
    if isinstance(obj, dict):
        obj = obj.get("breakpoints")
    if not isinstance(obj, list):
        raise FormatError("distortion must be 'example1', 'identity' or a breakpoint list")
    return DistortionFunction([(number(p), number(g)) for p, g in obj])


def parse_capacity(obj):
    if not isinstance(obj, dict):
        raise FormatError("capacity must be an object")
    if "additive" in obj:
        return Capacity.additive(parse_measure(obj["additive"]))
    validate = bool(obj.get("validate", True))
    if "table" in obj:
        return Capacity([float(number(v)) for v in obj["table"]], validate=validate)
    if "values" in obj:
        n = int(obj["n"])
        table = np.full(1 << n, np.nan)
        table[0], table[-1] = 0.0, 1.0
        for key, v in obj["values"].items():
            mask = int(key, 0)
            if not 0 <= mask < 1 << n:
                raise FormatError(f"event mask {key} out of range")
            table[mask] = float(number(v))
        if np.any(np.isnan(table)):
            raise FormatError("capacity 'values' must give every event")
        return Capacity(table, validate=validate)
    raise FormatError("capacity needs 'table', 'values' or 'additive'")


def parse_spec(obj):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise FormatError("spec must be an object with a 'kind'")
    kind = obj["kind"]
    U = parse_utility(obj.get("U"))
    if kind == "expectation":
        return Expectation(parse_measure(obj["P"]))
    if kind == "expected_utility":
        if U is None:
            raise FormatError("expected_utility needs 'U'")
        return ExpectedUtility(parse_measure(obj["P"]), U)
    if kind == "choquet":
        return Choquet(parse_capacity(obj["W"]), U)
    if kind == "distortion":
        return Distortion(parse_distortion(obj["g"]), parse_measure(obj["P"]), U)
    raise FormatError(f"unknown functional kind {kind!r}")


def parse_acts(obj):
    """One act (list of numbers) or a batch (list of lists)."""
    if isinstance(obj, dict):
        obj = obj.get("acts", obj.get("act"))
    if not isinstance(obj, list) or not obj:
        raise FormatError("acts must be a nonempty list")
    return _floats(obj)


def read_acts_csv(text):
    rows = [r for r in csv.reader(_io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
    try:
        return np.asarray([[float(number(x)) for x in r] for r in rows], dtype=float)
    except FormatError:
        raise
    except ValueError as e:
        raise FormatError(str(e)) from None


def read_acts(path):
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_acts_csv(path.read_text(encoding="utf-8"))
    return parse_acts(load_json(path))


def parse_lottery(obj):
    if isinstance(obj, dict):
        obj = obj.get("probs")
    return Lottery(_floats(obj))


def parse_lottery_act(obj):
    if isinstance(obj, dict):
        obj = obj.get("act")
    return LotteryAct(_floats(obj))


def parse_aa_model(obj):
    if not isinstance(obj, dict) or "P" not in obj or "u" not in obj:
        raise FormatError("AA model needs 'P' and 'u'")
    return AAModel(parse_measure(obj["P"]), _floats(obj["u"]))


# --- serialization ------------------------------------------------------------------


def _num_out(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    return float(v)


def measure_to_json(P):
    return [_num_out(w) for w in (P.exact if P.exact is not None else P.weights)]


def utility_to_json(U):
    return {"breakpoints": [[_num_out(x), _num_out(u)] for x, u in U.exact]}


def capacity_to_json(W):
    return {"table": [float(v) for v in W.table]}


def distortion_to_json(g):
    return [[float(p), float(v)] for p, v in g.breakpoints]


def spec_to_json(spec):
    out = {"kind": spec.kind}
    if spec.kind in ("expectation", "expected_utility", "distortion"):
        out["P"] = measure_to_json(spec.P)
    if spec.kind == "choquet":
        out["W"] = capacity_to_json(spec.W)
    if spec.kind == "distortion":
        out["g"] = distortion_to_json(spec.g)
    if spec.U is not None:
        out["U"] = utility_to_json(spec.U)
    return out


def acts_to_csv(X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in X:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


__all__ = [
    "FormatError",
    "number",
    "load_json",
    "dumps",
    "parse_measure",
    "parse_utility",
    "parse_distortion",
    "parse_capacity",
    "parse_spec",
    "parse_acts",
    "read_acts",
    "read_acts_csv",
    "parse_lottery",
    "parse_lottery_act",
    "parse_aa_model",
    "measure_to_json",
    "utility_to_json",
    "capacity_to_json",
    "distortion_to_json",
    "spec_to_json",
    "acts_to_csv",
]
