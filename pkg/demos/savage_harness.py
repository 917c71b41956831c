"""Under expected utility, convexity, antimonotonic convexity and concave
utility stand or fall together.  A convex kink in U is exposed through a
standard sequence when random search alone misses it.
"""

from fractions import Fraction

import numpy as np

from antimono import ProbabilityMeasure, SearchBudget, UtilityFunction, savage_equivalence_harness, standard_sequence

P = ProbabilityMeasure([0.3, 0.7])
xs = np.linspace(0.0, 4.0, 41)
budget = SearchBudget(samples=10_000)

for name, us in (("sqrt", np.sqrt(xs)), ("square", xs ** 2)):
    U = UtilityFunction(list(zip(xs.tolist(), us.tolist())))
    s = savage_equivalence_harness(P, U, budget)
    print(f"{name:>6}: verdicts={s.verdicts} consistent={s.consistent} escalated={s.escalated}")

# a single convex kink at 1
U = UtilityFunction([(0, 0), (1, 1), (2, 3)])
s = savage_equivalence_harness(P, U, budget)
print("  kink:", s.verdicts)

# exact standard sequence for p = 2/3 under linear utility: equal steps of 1/2
exact = ProbabilityMeasure([Fraction(2, 3), Fraction(1, 3)])
print("sequence:", [str(x) for x in standard_sequence(exact, UtilityFunction.identity(0, 1), [0], 0, 1)])
