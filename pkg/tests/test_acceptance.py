"""Acceptance gate: one test (and one summary line) per acceptance criterion.

Run ``pytest tests/test_acceptance.py -v``; the per-criterion PASS/FAIL lines
are printed in the "acceptance criteria" section of the terminal summary.
"""

import time

import numpy as np
import pytest

from antimono.axioms import (
    SearchBudget,
    check_additivity,
    check_preference_convexity,
    extract_measure,
    replay_witness,
    savage_equivalence_harness,
    verify_expectation_representation,
)
from antimono.capacities import (
    Capacity,
    capacity_from_distortion,
    example1_distortion,
    is_convex_capacity,
    is_pseudo_convex,
    random_capacity,
)
from antimono.core import ProbabilityMeasure, is_antimonotonic, monotone_decompose, monotone_decompose_exact
from antimono.functionals import Choquet, Distortion, Expectation, ExpectedUtility, UtilityFunction, evaluate
from antimono.lotteries import (
    ChoquetAAModel,
    Lottery,
    check_am_independence,
    random_aa_model,
    recover_representation,
)

TOL = 1e-9


def example1(n):
    return Distortion(example1_distortion(), ProbabilityMeasure.uniform(n))


def random_measure(rng, n):
    return ProbabilityMeasure(rng.dirichlet(np.ones(n)))


def test_criterion_1_example1_capacity(acceptance_line):
    t0 = time.perf_counter()
    W = capacity_from_distortion(example1_distortion(), ProbabilityMeasure.uniform(10))
    pseudo = is_pseudo_convex(W)
    t_pseudo = time.perf_counter() - t0
    convex = is_convex_capacity(W)
    elapsed = time.perf_counter() - t0
    # deficit from the breakpoint values g(0.8)=0.25, g(0.9)=0.3, g(0.7)=0.1
    expected_deficit = (0.25 + 0.25) - (0.3 + 0.1)
    w = convex.witness or {}
    A, B = set(w.get("A", ())), set(w.get("B", ())),
    ok = (
        pseudo.passed
        and pseudo.samples_checked == 3 ** 10
        and t_pseudo < 5
        and not convex.passed
        and abs(w["deficit"] - expected_deficit) <= 1e-12
        and len(A) == len(B) == 8
        and len(A & B) == 7
        and elapsed < 10
    )
    acceptance_line(
        "1 example distortion capacity", ok,
        f"pseudo-convex={pseudo.verdict} over {pseudo.samples_checked} pairs in {t_pseudo:.2f}s; "
        f"convex={convex.verdict} deficit={float(w.get('deficit', 'nan')):.15f} |A|={len(A)} |B|={len(B)} |A&B|={len(A & B)}; "
        f"total {elapsed:.2f}s",
    )
    assert ok


def test_criterion_2_additivity_falsification(acceptance_line):
    t0 = time.perf_counter()
    spec = example1(4)
    rep = check_additivity(spec, SearchBudget(samples=10_000, full_scan=True), "antimonotonic")
    worst = rep.worst["magnitude"] if rep.worst else 0.0
    target = 1 - 1 / 7 - 1e-9
    replay_ok = not rep.passed and replay_witness(spec, rep) == rep.witness["magnitude"]
    rng = np.random.default_rng(20)
    ev_results = []
    for n in (3, 6):
        ev = Expectation(random_measure(rng, n))
        for mode in ("general", "comonotonic", "antimonotonic"):
            r = check_additivity(ev, SearchBudget(samples=1_000_000, tol=TOL), mode)
            ev_results.append((n, mode, r.verdict, r.samples_checked))
    elapsed = time.perf_counter() - t0
    ev_ok = all(v == "pass" and c == 1_000_000 for _, _, v, c in ev_results)
    ok = (not rep.passed) and worst >= target and replay_ok and ev_ok and elapsed < 30
    acceptance_line(
        "2 am-additivity falsification", ok,
        f"example1 witness at sample {rep.witness['sample_index'] if rep.witness else None}, "
        f"worst magnitude {worst:.12f} (need >= {target:.12f}); "
        f"expectation: {sum(v == 'pass' for _, _, v, _ in ev_results)}/{len(ev_results)} mode runs clean at 1e6 pairs; "
        f"{elapsed:.1f}s",
    )
    assert ok


def test_criterion_3_measure_extraction(acceptance_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(30)
    worst_err, verified = 0.0, 0
    sizes = list(range(1, 11))
    for n in sizes:
        P = random_measure(rng, n)
        Q, rep = extract_measure(Expectation(P))
        worst_err = max(worst_err, float(np.max(np.abs(Q - P.weights))))
        v = verify_expectation_representation(Expectation(P), SearchBudget(samples=10_000))
        verified += rep.passed and v.passed and v.samples_checked == 10_000
    ex = verify_expectation_representation(example1(4), SearchBudget(samples=10_000))
    stage = ex.details.get("failed_stage")
    elapsed = time.perf_counter() - t0
    ok = worst_err <= 1e-12 and verified == len(sizes) and stage == "am_additivity" and elapsed < 10
    acceptance_line(
        "3 measure extraction", ok,
        f"max |Q-P| = {worst_err:.2e} over n=1..10; {verified}/{len(sizes)} representations verified; "
        f"example1 fails at stage {stage!r}; {elapsed:.1f}s",
    )
    assert ok


def _piecewise(rng, slopes):
    xs = np.concatenate([[0.0], np.sort(rng.uniform(0.0, 10.0, size=len(slopes) - 1)), [10.0]])
    xs = np.unique(xs)
    if xs.size != len(slopes) + 1:
        xs = np.linspace(0.0, 10.0, len(slopes) + 1)
    us = np.concatenate([[0.0], np.cumsum(slopes * np.diff(xs))])
    return UtilityFunction(list(zip(xs.tolist(), us.tolist())))


def random_concave_utility(rng):
    k = int(rng.integers(1, 9))
    slopes = np.sort(rng.uniform(0.05, 3.0, size=k))[::-1]
    return _piecewise(rng, slopes)


def random_nonconcave_utility(rng):
    k = int(rng.integers(2, 9))
    slopes = rng.uniform(0.05, 3.0, size=k)
    j = int(rng.integers(1, k))
    slopes[j] = slopes[j - 1] + 0.1 + rng.uniform(0.0, 1.0)
    return _piecewise(rng, slopes)


def test_criterion_4_savage_harness(acceptance_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(40)
    budget = SearchBudget(samples=10_000)
    concave_ok, found, escalated, replayed = 0, 0, 0, 0
    for _ in range(20):
        P = random_measure(rng, int(rng.integers(2, 6)))
        s = savage_equivalence_harness(P, random_concave_utility(rng), budget)
        concave_ok += s.verdicts == ("pass", "pass", "pass")
    for _ in range(20):
        P = random_measure(rng, int(rng.integers(2, 6)))
        U = random_nonconcave_utility(rng)
        s = savage_equivalence_harness(P, U, budget)
        am = s.am_convexity
        if not am.passed:
            found += 1
            escalated += s.escalated
            replayed += replay_witness(ExpectedUtility(P, U), am) == am.witness["magnitude"]
    elapsed = time.perf_counter() - t0
    ok = concave_ok == 20 and found == 20 and replayed == 20 and elapsed < 300
    acceptance_line(
        "4 convexity/concavity equivalence", ok,
        f"concave: {concave_ok}/20 (pass,pass,pass); non-concave: am-convexity witness in {found}/20 "
        f"({escalated} via guided escalation, {replayed} replayed); {elapsed:.1f}s",
    )
    assert ok


def test_criterion_5_example1_convexity_split(acceptance_line):
    t0 = time.perf_counter()
    spec = example1(10)
    general = check_preference_convexity(spec, SearchBudget(samples=100_000), "general")
    am = check_preference_convexity(spec, SearchBudget(samples=1_000_000, tol=TOL), "antimonotonic")
    elapsed = time.perf_counter() - t0
    ok = (not general.passed) and am.passed and am.samples_checked == 1_000_000 and elapsed < 120
    acceptance_line(
        "5 example distortion convexity split", ok,
        f"general={general.verdict} (witness at sample {general.witness['sample_index'] if general.witness else None}); "
        f"antimonotonic={am.verdict} over {am.samples_checked} samples ({am.samples_skipped} skipped); {elapsed:.1f}s",
    )
    assert ok


def riemann_choquet(W, V, mesh=1_000_000, top=1.0):
    """Midpoint rule for the integral of t -> W({V >= t}) over [0, top]."""
    t = (np.arange(mesh) + 0.5) * (top / mesh)
    masks = np.zeros(mesh, dtype=np.int64)
    for i, v in enumerate(V):
        masks |= (v >= t).astype(np.int64) << i
    return float(W.table[masks].sum() * (top / mesh))


def test_criterion_6_choquet_oracle(acceptance_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(60)
    worst = 0.0
    for j in range(1000):
        n = int(rng.integers(2, 7))
        W = random_capacity(rng, n)
        if j % 2:
            xs = np.linspace(0.0, 1.0, 6)
            us = np.concatenate([[0.0], np.sort(rng.uniform(0.0, 1.0, size=4)), [1.0]])
            U = UtilityFunction(list(zip(xs.tolist(), us.tolist())))
        else:
            U = None
        X = rng.uniform(0.0, 1.0, size=n)
        V = X if U is None else U(X)
        worst = max(worst, abs(evaluate(Choquet(W, U), X) - riemann_choquet(W, V)))
    P = random_measure(rng, 8)
    X = rng.uniform(-5.0, 5.0, size=(100_000, 8))
    additive_gap = float(np.max(np.abs(evaluate(Choquet(Capacity.additive(P)), X) - evaluate(Expectation(P), X))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and additive_gap <= 1e-12 and elapsed < 60
    acceptance_line(
        "6 Choquet oracle equivalence", ok,
        f"max |Choquet - Riemann| = {worst:.2e} on 1000 acts; additive vs expectation {additive_gap:.2e} "
        f"on 1e5 acts; {elapsed:.1f}s",
    )
    assert ok


def test_criterion_7_aa_recovery(acceptance_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(70)
    p_err, eu_err, indep = 0.0, 0.0, 0
    models = 8
    for _ in range(models):
        n, k = int(rng.integers(2, 7)), int(rng.integers(2, 6))
        mdl = random_aa_model(rng, n, k)
        order = np.argsort(mdl.u)
        lo, hi = order[0], order[-1]
        rec = recover_representation(mdl, Lottery.degenerate(lo, k), Lottery.degenerate(hi, k), SearchBudget(samples=10_000))
        p_err = max(p_err, float(np.max(np.abs(rec.P.weights - mdl.P.weights))))
        acts = rng.dirichlet(np.ones(k), size=(10_000, n))
        truth = (mdl.evaluate(acts) - mdl.u[lo]) / (mdl.u[hi] - mdl.u[lo])
        eu_err = max(eu_err, float(np.max(np.abs(rec.model.evaluate(acts) - truth))))
        indep += check_am_independence(mdl, SearchBudget(samples=100_000)).passed
    controls = 0
    for _ in range(5):
        n = int(rng.integers(2, 5))
        oracle = ChoquetAAModel(random_capacity(rng, n), rng.uniform(0.0, 1.0, size=3))
        controls += not check_am_independence(oracle, SearchBudget(samples=10_000)).passed
    elapsed = time.perf_counter() - t0
    ok = p_err <= 1e-8 and eu_err <= 1e-8 and indep == models and controls == 5 and elapsed < 60
    acceptance_line(
        "7 Anscombe-Aumann recovery", ok,
        f"max |P_hat-P| = {p_err:.2e}; max EU residual = {eu_err:.2e} on 1e4 acts per model; "
        f"am-independence passes {indep}/{models} models at 1e5; control rejected {controls}/5; {elapsed:.1f}s",
    )
    assert ok


def test_criterion_8_decomposition(acceptance_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(80)
    total, exact, monotone, anti = 100_000, 0, 0, 0
    ns = rng.integers(1, 65, size=total)
    float_exact = 0
    for n in range(1, 65):
        count = int(np.sum(ns == n))
        scales = 10.0 ** rng.integers(-3, 4, size=(count, 1))
        X = rng.uniform(-1.0, 1.0, size=(count, n)) * scales
        d = monotone_decompose_exact(X)
        exact += int(np.sum(d.reproduces(X)))
        monotone += int(np.sum(d.is_monotone()))
        anti += int(np.sum(is_antimonotonic(X, -X)))
    elapsed = time.perf_counter() - t0
    # informational: the float variant is not exact in general
    rng = np.random.default_rng(81)
    for n in (2, 8, 64):
        X = rng.uniform(-1.0, 1.0, size=(1000, n))
        up, down = monotone_decompose(X)
        float_exact += int(np.sum(np.all(up + down == X, axis=-1)))
    ok = exact == total and monotone == total and anti == total and elapsed < 5
    acceptance_line(
        "8 decomposition invariant", ok,
        f"exact sum {exact}/{total}, monotone {monotone}/{total}, is_antimonotonic(X,-X) {anti}/{total}; "
        f"float variant bit-exact on {float_exact}/3000; {elapsed:.2f}s",
    )
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
