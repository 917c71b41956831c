import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from antimono.capacities import Capacity, capacity_from_distortion, example1_distortion, random_capacity
from antimono.core import ProbabilityMeasure, sample_comonotonic_batch
from antimono.functionals import (
    Choquet,
    Distortion,
    DomainError,
    Expectation,
    ExpectedUtility,
    PreferenceOracle,
    UtilityFunction,
    certainty_equivalent,
    diversification_benefit,
    evaluate,
)


def level_set_choquet(table, values):
    """Choquet integral by level sets, in exact rationals.

    Integrates ``t -> W({V >= t})`` over ``[0, inf)`` and ``W({V >= t}) - 1``
    over ``(-inf, 0)``; no sorting or tie-breaking is involved.
    """
    V = [Fraction(v) for v in values]
    W = [Fraction(w) for w in table]
    levels = sorted(set(V) | {Fraction(0)})
    total = Fraction(0)
    for lo, hi in zip(levels, levels[1:]):
        upper = sum(1 << i for i, v in enumerate(V) if v >= hi)
        if lo >= 0:
            total += (hi - lo) * W[upper]
        else:
            total += (hi - lo) * (W[upper] - 1)
    return total


def sqrt_mesh(points=41):
    return UtilityFunction.sampled(math.sqrt, np.linspace(0, 4, points))


class TestEvaluate:
    def test_indicator_and_step(self):
        W = Capacity([0.0, 0.3, 0.5, 1.0])
        spec = Choquet(W)
        assert evaluate(spec, [1, 0]) == 0.3
        assert math.isclose(evaluate(spec, [2, 1]), 1.3, abs_tol=1e-15)

    @pytest.mark.parametrize("c", [-2.5, 0.0, 0.7, 3.0])
    def test_constants(self, c):
        rng = np.random.default_rng(0)
        specs = [
            Expectation(ProbabilityMeasure([0.2, 0.3, 0.5])),
            Choquet(random_capacity(rng, 3)),
            Distortion(example1_distortion(), ProbabilityMeasure.uniform(3)),
        ]
        for spec in specs:
            assert math.isclose(evaluate(spec, [c] * 3), c, abs_tol=1e-14)

    def test_matches_level_set_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n = int(rng.integers(1, 6))
            W = random_capacity(rng, n) if n > 1 else Capacity([0.0, 1.0])
            X = np.round(rng.uniform(-2, 3, size=n), 2)
            X[rng.uniform(size=n) < 0.3] = X[0]  # force ties
            expected = level_set_choquet(W.table, X)
            assert abs(evaluate(Choquet(W), X) - float(expected)) <= 1e-12

    def test_ties_do_not_change_value(self):
        rng = np.random.default_rng(2)
        W = random_capacity(rng, 4)
        X = np.array([1.0, 2.0, 2.0, 0.5])
        perm = [0, 2, 1, 3]
        # swap the tied states in both X and the capacity labelling
        tbl = np.array([W.table[sum(1 << perm[i] for i in range(4) if m >> i & 1)] for m in range(16)])
        assert evaluate(Choquet(W), X) == evaluate(Choquet(Capacity(tbl)), X[perm])

    def test_distortion_equals_dense_choquet(self):
        rng = np.random.default_rng(3)
        P = ProbabilityMeasure(rng.dirichlet(np.ones(6)))
        g = example1_distortion()
        X = rng.uniform(-1, 1, size=(500, 6))
        assert np.array_equal(evaluate(Distortion(g, P), X), evaluate(Choquet(capacity_from_distortion(g, P)), X))

    def test_batch_matches_single(self):
        rng = np.random.default_rng(4)
        spec = Choquet(random_capacity(rng, 5))
        X = rng.uniform(size=(50, 5))
        batch = evaluate(spec, X)
        assert all(batch[i] == evaluate(spec, X[i]) for i in range(50))

    def test_additive_capacity_is_expectation(self):
        rng = np.random.default_rng(5)
        P = ProbabilityMeasure(rng.dirichlet(np.ones(7)))
        X = rng.uniform(-3, 3, size=(10_000, 7))
        diff = evaluate(Choquet(Capacity.additive(P)), X) - evaluate(Expectation(P), X)
        assert np.max(np.abs(diff)) <= 1e-12

    def test_domain_error(self):
        spec = ExpectedUtility(ProbabilityMeasure.uniform(2), UtilityFunction.identity(0, 1))
        with pytest.raises(DomainError):
            evaluate(spec, [0.5, 1.5])

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            evaluate(Expectation(ProbabilityMeasure.uniform(3)), [1, 2])


class TestChoquetProperties:
    rng = np.random.default_rng(6)

    def test_comonotonic_additive(self):
        W = random_capacity(self.rng, 5)
        X, Y = sample_comonotonic_batch(self.rng, 5000, 5, -1.0, 1.0)
        spec = Choquet(W)
        d = evaluate(spec, X + Y) - evaluate(spec, X) - evaluate(spec, Y)
        assert np.max(np.abs(d)) <= 1e-9

    def test_positive_homogeneity_and_translation(self):
        W = random_capacity(self.rng, 4)
        spec = Choquet(W)
        X = self.rng.uniform(-1, 1, size=(2000, 4))
        a = self.rng.uniform(0, 5, size=(2000, 1))
        c = self.rng.uniform(-2, 2, size=(2000, 1))
        assert np.max(np.abs(evaluate(spec, a * X) - a[:, 0] * evaluate(spec, X))) <= 1e-9
        assert np.max(np.abs(evaluate(spec, X + c) - evaluate(spec, X) - c[:, 0])) <= 1e-9

    def test_monotone(self):
        spec = Choquet(random_capacity(self.rng, 4))
        X = self.rng.uniform(size=(2000, 4))
        Y = X - self.rng.uniform(size=(2000, 4)) * 0.3
        assert np.all(evaluate(spec, X) >= evaluate(spec, Y) - 1e-12)


class TestCertaintyEquivalent:
    def test_expectation(self):
        assert certainty_equivalent(Expectation(ProbabilityMeasure([0.5, 0.5])), [0, 2]) == 1

    def test_expected_utility_sqrt(self):
        U = sqrt_mesh()
        spec = ExpectedUtility(ProbabilityMeasure([0.5, 0.5]), U)
        ce = certainty_equivalent(spec, [0, 4])
        # independent bisection on the constant act
        a, b = 0.0, 4.0
        for _ in range(100):
            mid = (a + b) / 2
            a, b = (mid, b) if evaluate(spec, [mid, mid]) < 1.0 else (a, mid)
        assert abs(ce - a) <= 1e-12
        assert abs(U(ce) - 1.0) <= 1e-12

    def test_distortion_uniform2(self):
        spec = Distortion(example1_distortion(), ProbabilityMeasure.uniform(2))
        assert math.isclose(certainty_equivalent(spec, [1, 0]), 1 / 14, abs_tol=1e-15)

    def test_choquet_with_utility_bisects(self):
        U = sqrt_mesh()
        spec = Distortion(example1_distortion(), ProbabilityMeasure.uniform(3), U)
        X = [0.5, 3.0, 1.0]
        ce = certainty_equivalent(spec, X)
        assert abs(evaluate(spec, [ce] * 3) - evaluate(spec, X)) <= 1e-11

    def test_flat_utility_rejected(self):
        U = UtilityFunction([(0, 0), (1, 1), (2, 1), (3, 2)])
        spec = ExpectedUtility(ProbabilityMeasure.uniform(2), U)
        with pytest.raises(ValueError):
            certainty_equivalent(spec, [1.5, 1.5])


class TestDiversification:
    def test_example1(self):
        spec = Distortion(example1_distortion(), ProbabilityMeasure.uniform(4))
        b = diversification_benefit(spec, [1, 1, 0, 0], [0, 0, 1, 1])
        assert math.isclose(b, 1 / 7 - 1, abs_tol=1e-15)

    @settings(max_examples=50)
    @given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.lists(st.floats(-10, 10), min_size=3, max_size=3))
    def test_expectation_has_none(self, X, Y):
        spec = Expectation(ProbabilityMeasure([0.2, 0.3, 0.5]))
        assert abs(diversification_benefit(spec, X, Y)) <= 1e-12

    def test_comonotonic_zero(self):
        rng = np.random.default_rng(7)
        spec = Choquet(random_capacity(rng, 4))
        X = np.array([0.1, 0.5, 0.3, 0.9])
        assert abs(diversification_benefit(spec, X, X ** 2)) <= 1e-12


class TestUtility:
    def test_exact_inverse(self):
        U = UtilityFunction([(0, 0), (1, 2), (3, 3)])
        assert U.inverse_exact(Fraction(5, 2)) == 2
        assert U.value_exact(Fraction(1, 2)) == 1
        assert U.inverse(2.5) == 2.0

    def test_declared_monotonicity_is_validated(self):
        with pytest.raises(ValueError):
            UtilityFunction([(0, 0), (1, 0)], strictly_increasing=True)

    def test_oracle(self):
        o = PreferenceOracle(Expectation(ProbabilityMeasure([0.5, 0.5])))
        assert o.indifferent([0, 1], [1, 0])
        assert o.weakly_prefers([1, 1], [0, 1]) and o.strictly_prefers([1, 1], [0, 1])
        assert not o.strictly_prefers([0, 1], [1, 0 + 1e-12])
