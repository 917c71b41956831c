import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from antimono.capacities import (
    Capacity,
    CapacityError,
    DistortionFunction,
    capacity_from_distortion,
    distortion_pseudoconvexity,
    eval_distortion,
    example1_distortion,
    identity_distortion,
    is_convex_capacity,
    is_pseudo_convex,
    random_belief_capacity,
    random_capacity,
    sampled_distortion,
)
from antimono.core import ProbabilityMeasure

# example1 breakpoints as exact rationals, for independent interpolation
EX1 = [(Fraction(0), Fraction(0)), (Fraction(7, 10), Fraction(1, 10)), (Fraction(8, 10), Fraction(1, 4)),
       (Fraction(9, 10), Fraction(3, 10)), (Fraction(1), Fraction(1))]


def interp_exact(pts, x):
    x = Fraction(x)
    for (a, ga), (b, gb) in zip(pts, pts[1:]):
        if a <= x <= b:
            return ga + (gb - ga) * (x - a) / (b - a)
    raise ValueError(x)


def brute_pseudo_convex(t, n, tol=1e-9):
    full = (1 << n) - 1
    for A in range(1 << n):
        for B in range(1 << n):
            if A & B:
                continue
            gain = t[A | B] - t[B]
            if t[A] > gain + tol or gain > 1 - t[full ^ A] + tol:
                return False
    return True


def brute_convex(t, n, tol=1e-9):
    return all(t[A | B] + t[A & B] >= t[A] + t[B] - tol for A in range(1 << n) for B in range(1 << n))


class TestDistortion:
    @pytest.mark.parametrize("p, expected", [(0.8, 0.25), (0.7, 0.1), (0.9, 0.3), (1.0, 1.0), (0.0, 0.0)])
    def test_breakpoints(self, p, expected):
        assert eval_distortion(example1_distortion(), p) == expected

    @pytest.mark.parametrize("p", ["0.75", "0.35", "0.5", "0.95", "0.85"])
    def test_interpolation(self, p):
        assert math.isclose(eval_distortion(example1_distortion(), float(p)), float(interp_exact(EX1, p)), abs_tol=1e-15)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            eval_distortion(example1_distortion(), 1.5)

    def test_invariants(self):
        with pytest.raises(ValueError):
            DistortionFunction([(0, 0), (0.5, 0.7), (0.6, 0.6), (1, 1)])
        with pytest.raises(ValueError):
            DistortionFunction([(0, 0.1), (1, 1)])
        with pytest.raises(ValueError):
            DistortionFunction([(0, 0), (0.5, 0.2), (0.5, 0.3), (1, 1)])


class TestCapacityFromDistortion:
    def test_identity_gives_measure(self):
        W = capacity_from_distortion(identity_distortion(), ProbabilityMeasure([0.2, 0.8]))
        assert W(0b01) == 0.2 and W(0b10) == 0.8 and W(0b11) == 1.0

    @pytest.mark.parametrize("size, expected", [(8, 0.25), (7, 0.1), (9, 0.3), (10, 1.0)])
    def test_example1_uniform10(self, size, expected):
        W = capacity_from_distortion(example1_distortion(), ProbabilityMeasure.uniform(10))
        assert W((1 << size) - 1) == expected
        # any event of the same size gets the same weight
        assert W(((1 << size) - 1) << (10 - size)) == expected

    def test_identity_is_additive_on_all_events(self):
        P = ProbabilityMeasure([0.1, 0.2, 0.3, 0.4])
        W = capacity_from_distortion(identity_distortion(), P)
        for E in range(16):
            assert math.isclose(W(E), sum(P.weights[i] for i in range(4) if E >> i & 1), abs_tol=1e-15)

    def test_monotone_iff_nondecreasing(self):
        P = ProbabilityMeasure.uniform(4)
        bad = DistortionFunction([(0, 0), (0.5, 0.6), (0.75, 0.4), (1, 1)], validate=False)
        with pytest.raises(CapacityError):
            capacity_from_distortion(bad, P)
        W = capacity_from_distortion(bad, P, validate=False)
        assert not W.is_monotone()
        assert capacity_from_distortion(example1_distortion(), P).is_monotone()

    def test_dense_limit(self):
        with pytest.raises(CapacityError):
            capacity_from_distortion(identity_distortion(), ProbabilityMeasure.uniform(21))


class TestPredicates:
    def test_example1_not_convex(self):
        W = capacity_from_distortion(example1_distortion(), ProbabilityMeasure.uniform(10))
        r = is_convex_capacity(W)
        assert not r.passed
        w = r.witness
        A, B = set(w["A"]), set(w["B"])
        assert len(A) == len(B) == 8 and len(A & B) == 7 and len(A | B) == 9
        assert abs(w["deficit"] - 0.1) <= 1e-12

    def test_example1_pseudo_convex(self):
        W = capacity_from_distortion(example1_distortion(), ProbabilityMeasure.uniform(10))
        r = is_pseudo_convex(W)
        assert r.passed and r.samples_checked == 3 ** 10

    def test_additive_and_unanimity(self):
        W = Capacity.additive(ProbabilityMeasure([0.1, 0.2, 0.3, 0.4]))
        assert is_convex_capacity(W).passed and is_pseudo_convex(W).passed
        assert is_convex_capacity(Capacity.unanimity(5)).passed

    def test_sqrt_not_pseudo_convex(self):
        t = [math.sqrt(bin(E).count("1") / 4) for E in range(16)]
        W = Capacity(t)
        r = is_pseudo_convex(W)
        assert not r.passed and not brute_pseudo_convex(t, 4)
        assert r.witness["deficit"] > 1e-9

    def test_matches_brute_force_on_random_capacities(self):
        rng = np.random.default_rng(0)
        for n in (2, 3, 4):
            for _ in range(30):
                W = random_capacity(rng, n)
                assert is_convex_capacity(W).passed == brute_convex(W.table, n)
                assert is_pseudo_convex(W).passed == brute_pseudo_convex(W.table, n)

    def test_convex_implies_pseudo_convex(self):
        rng = np.random.default_rng(1)
        for n in (2, 3, 4, 5):
            for _ in range(20):
                W = random_belief_capacity(rng, n)
                assert is_convex_capacity(W).passed
                assert is_pseudo_convex(W).passed

    def test_witness_is_lexicographically_first(self):
        rng = np.random.default_rng(2)
        seen = 0
        for _ in range(20):
            W = random_capacity(rng, 4)
            t = W.table
            bad = [(A, B) for A in range(16) for B in range(16) if t[A | B] + t[A & B] < t[A] + t[B] - 1e-9]
            r = is_convex_capacity(W)
            if not bad:
                assert r.passed
                continue
            seen += 1
            got = (sum(1 << i for i in r.witness["A"]), sum(1 << i for i in r.witness["B"]))
            assert got == bad[0]
        assert seen > 0

    def test_pair_limit(self):
        with pytest.raises(CapacityError):
            is_convex_capacity(Capacity.unanimity(13))


class TestDistortionPseudoConvexity:
    def test_example1_passes(self):
        assert distortion_pseudoconvexity(example1_distortion(), 1000).passed

    def test_identity_and_square(self):
        assert distortion_pseudoconvexity(identity_distortion(), 100).passed
        assert distortion_pseudoconvexity(sampled_distortion(lambda p: p * p, 100), 100).passed

    def test_sqrt_fails(self):
        r = distortion_pseudoconvexity(sampled_distortion(math.sqrt, 100), 100)
        assert not r.passed and r.witness["inequality"] == "superadditivity"

    def test_breakpoint_vertices_catch_off_mesh_violations(self):
        # superadditivity fails only between mesh points: g has a bump at 0.105
        g = DistortionFunction([(0, 0), (0.1, 0.0), (0.105, 0.05), (0.11, 0.05), (0.2, 0.05), (1, 1)])
        r = distortion_pseudoconvexity(g, 4)
        assert not r.passed and r.witness["source"] == "breakpoints"

    @pytest.mark.parametrize("n", range(4, 11))
    def test_mesh_result_transfers_to_uniform_capacities(self, n):
        g = example1_distortion()
        rep = distortion_pseudoconvexity(g, 10 * n)
        W = capacity_from_distortion(g, ProbabilityMeasure.uniform(n))
        assert rep.passed and is_pseudo_convex(W).passed

    def test_mesh_validation(self):
        with pytest.raises(ValueError):
            distortion_pseudoconvexity(identity_distortion(), 1)


def test_capacity_validation():
    with pytest.raises(CapacityError):
        Capacity([0.0, 0.5, 0.4, 0.9])
    with pytest.raises(CapacityError):
        Capacity([0.0, 0.5, 0.6])
    assert Capacity([0.0, 0.5, 0.4, 1.0]).is_monotone()
    bad = Capacity([0.0, 0.6, 0.2, 0.5], validate=False)
    assert not bad.is_monotone()


def test_exhaustive_pairs_match_combinatorics():
    # 3**n disjoint ordered pairs
    for n in range(1, 7):
        count = sum(1 for A, B in itertools.product(range(1 << n), repeat=2) if not A & B)
        assert count == 3 ** n
