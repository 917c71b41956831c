"""Recover beliefs and utilities from a lottery-act preference oracle."""

import numpy as np

from antimono import ChoquetAAModel, Lottery, SearchBudget, check_am_independence, recover_representation
from antimono.capacities import random_capacity
from antimono.lotteries import random_aa_model

rng = np.random.default_rng(7)
hidden = random_aa_model(rng, 4, 3)
lo, hi = Lottery.degenerate(hidden.worst, 3), Lottery.degenerate(hidden.best, 3)

P, u, report = recover_representation(hidden, lo, hi, SearchBudget(samples=5_000))
print("hidden P   :", np.round(hidden.P.weights, 6))
print("recovered P:", np.round(P.weights, 6))
print("recovered u:", np.round(u, 6), "(normalized so worst=0, best=1)")
print("reconstruction:", report.verdict)

print("am-independence, EU oracle:", check_am_independence(hidden, SearchBudget(samples=20_000)).verdict)
control = ChoquetAAModel(random_capacity(rng, 3), [0.0, 0.4, 1.0])
print("am-independence, rank-dependent oracle:", check_am_independence(control, SearchBudget(samples=20_000)).verdict)
