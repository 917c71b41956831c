import json
from fractions import Fraction

import numpy as np
import pytest

from antimono import io
from antimono.capacities import example1_distortion
from antimono.core import ProbabilityMeasure
from antimono.functionals import Choquet, Distortion, ExpectedUtility, UtilityFunction, evaluate


def test_numbers():
    assert io.number("2/3") == Fraction(2, 3)
    assert io.number(3) == 3 and io.number(0.5) == 0.5
    with pytest.raises(io.FormatError):
        io.number("two")
    with pytest.raises(io.FormatError):
        io.number(True)


def test_measure_forms():
    assert io.parse_measure(["1/3", "2/3"]).exact == (Fraction(1, 3), Fraction(2, 3))
    assert io.parse_measure({"uniform": 4}).is_equally_likely()
    assert io.parse_measure({"P": [0.5, 0.5]}).weights.tolist() == [0.5, 0.5]
    with pytest.raises(io.FormatError):
        io.parse_measure("uniform")


def test_utility_forms():
    assert io.parse_utility({"identity": [0, 2]}).domain == (0.0, 2.0)
    U = io.parse_utility({"function": "sqrt", "lo": 0, "hi": 4, "points": 5})
    assert U(4.0) == 2.0 and U(1.0) == 1.0
    assert io.parse_utility([[0, 0], [1, 2]])(0.5) == 1.0
    with pytest.raises(io.FormatError):
        io.parse_utility({"function": "nope"})


def test_capacity_forms():
    W = io.parse_capacity({"n": 2, "values": {"1": 0.3, "0b10": 0.5}})
    assert W.table.tolist() == [0.0, 0.3, 0.5, 1.0]
    with pytest.raises(io.FormatError):
        io.parse_capacity({"n": 2, "values": {"1": 0.3}})
    bad = io.parse_capacity({"table": [0, 0.6, 0.2, 0.5], "validate": False})
    assert not bad.is_monotone()


@pytest.mark.parametrize(
    "spec",
    [
        Distortion(example1_distortion(), ProbabilityMeasure.uniform(4)),
        ExpectedUtility(ProbabilityMeasure([Fraction(1, 3), Fraction(2, 3)]), UtilityFunction([(0, 0), (1, 2), (3, 3)])),
        Choquet(io.parse_capacity({"table": [0, 0.2, 0.3, 1]}), UtilityFunction.identity(-1, 1)),
    ],
)
def test_spec_roundtrip(spec):
    text = json.dumps(io.spec_to_json(spec))
    back = io.parse_spec(json.loads(text))
    X = np.random.default_rng(0).uniform(0, 1, size=(50, spec.n))
    assert np.array_equal(evaluate(spec, X), evaluate(back, X))


def test_example1_shorthand():
    spec = io.parse_spec({"kind": "distortion", "g": "example1", "P": {"uniform": 10}})
    assert spec.g.breakpoints == example1_distortion().breakpoints


def test_bad_spec():
    with pytest.raises(io.FormatError):
        io.parse_spec({"kind": "maxmin"})
    with pytest.raises(io.FormatError):
        io.parse_spec({"kind": "expected_utility", "P": [1]})


def test_acts_csv_roundtrip():
    X = np.random.default_rng(1).normal(size=(5, 3))
    assert np.array_equal(io.read_acts_csv(io.acts_to_csv(X)), X)
    assert io.read_acts_csv("# header\n1,2\n3,1/2\n").tolist() == [[1, 2], [3, 0.5]]


def test_lottery_objects():
    assert io.parse_lottery([0.5, 0.5]).k == 2
    assert io.parse_lottery_act({"act": [[1, 0], [0, 1]]}).n == 2
    mdl = io.parse_aa_model({"P": ["1/4", "3/4"], "u": [0, 1]})
    assert mdl.P.exact == (Fraction(1, 4), Fraction(3, 4))
