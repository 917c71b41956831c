"""Read a probability off a pricing functional and verify it represents it."""

import numpy as np

from antimono import (
    Distortion,
    Expectation,
    ProbabilityMeasure,
    SearchBudget,
    example1_distortion,
    extract_measure,
    verify_expectation_representation,
)

rng = np.random.default_rng(3)
P = ProbabilityMeasure(rng.dirichlet(np.ones(6)))
hidden = Expectation(P)

Q, report = extract_measure(hidden)
print("hidden P   :", np.round(P.weights, 6))
print("extracted Q:", np.round(Q, 6), f"(max error {np.max(np.abs(Q - P.weights)):.1e})")
print("measure conditions:", report.verdict)

rep = verify_expectation_representation(hidden, SearchBudget(samples=10_000))
print("representation:", rep.verdict)

rep = verify_expectation_representation(Distortion(example1_distortion(), ProbabilityMeasure.uniform(4)))
print("distortion functional:", rep.verdict, "at stage", rep.details["failed_stage"])
