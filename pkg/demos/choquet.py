"""Choquet evaluation against a slow level-set sum, and additive capacities."""

import numpy as np

from antimono import Capacity, Choquet, Expectation, ProbabilityMeasure, evaluate
from antimono.capacities import random_capacity

rng = np.random.default_rng(5)
W = random_capacity(rng, 3)
X = rng.uniform(0.0, 1.0, size=3)

mesh = 200_000
t = (np.arange(mesh) + 0.5) / mesh
masks = sum(((x >= t).astype(int) << i) for i, x in enumerate(X))
riemann = W.table[masks].mean()
print(f"Choquet {evaluate(Choquet(W), X):.8f}  level-set sum {riemann:.8f}")

P = ProbabilityMeasure([0.2, 0.5, 0.3])
acts = rng.normal(size=(5, 3))
gap = np.max(np.abs(evaluate(Choquet(Capacity.additive(P)), acts) - evaluate(Expectation(P), acts)))
print(f"additive capacity vs expectation: max gap {gap:.1e}")
