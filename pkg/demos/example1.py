"""The piecewise-linear distortion on ten equally likely states.

Its capacity is pseudo-convex but not convex, and the resulting preference
satisfies convexity for antimonotonic pairs while failing it in general.
"""

from antimono import (
    Distortion,
    ProbabilityMeasure,
    SearchBudget,
    capacity_from_distortion,
    check_preference_convexity,
    example1_distortion,
    is_convex_capacity,
    is_pseudo_convex,
)

g = example1_distortion()
P = ProbabilityMeasure.uniform(10)
W = capacity_from_distortion(g, P)

print("g at 0.7, 0.8, 0.9:", g(0.7), g(0.8), g(0.9))

pseudo = is_pseudo_convex(W)
print(f"pseudo-convex: {pseudo.verdict} ({pseudo.samples_checked} disjoint pairs)")

convex = is_convex_capacity(W)
w = convex.witness
print(f"convex: {convex.verdict}, |A|={len(w['A'])} |B|={len(w['B'])} deficit={w['deficit']:.12f}")

spec = Distortion(g, P)
general = check_preference_convexity(spec, SearchBudget(samples=20_000), "general")
am = check_preference_convexity(spec, SearchBudget(samples=100_000), "antimonotonic")
print("preference convexity, general:", general.verdict, "at sample", general.witness["sample_index"])
print("preference convexity, antimonotonic:", am.verdict, "over", am.samples_checked, "samples")
