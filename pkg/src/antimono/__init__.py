"""Antimonotonic acts, Choquet-type functionals and falsification checks for their axioms."""

from .core import (
    DyadicDecomposition,
    Event,
    ProbabilityMeasure,
    StateSpace,
    as_act,
    constant,
    indicator,
    is_antimonotonic,
    is_comonotonic,
    law,
    law_equal,
    monotone_decompose,
    monotone_decompose_exact,
    sample_antimonotonic_pair,
)
from .capacities import (
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
)
from .functionals import (
    Choquet,
    Distortion,
    DomainError,
    Expectation,
    ExpectedUtility,
    PreferenceOracle,
    UtilityFunction,
    certainty_equivalent,
    choquet_integral,
    diversification_benefit,
    evaluate,
)
from .report import PropertyReport
from .axioms import (
    SearchBudget,
    check_additivity,
    check_affinity,
    check_ce_am_additivity,
    check_homogeneity,
    check_law_based,
    check_monotonicity,
    check_normalization,
    check_preference_convexity,
    check_uncertainty_reduction,
    check_utility_concavity,
    extract_measure,
    replay_witness,
    savage_equivalence_harness,
    standard_sequence,
    standard_sequence_witness,
    verify_expectation_representation,
)
from .lotteries import (
    AAModel,
    ChoquetAAModel,
    Lottery,
    LotteryAct,
    check_am_independence,
    lottery_antimonotonic,
    matching_probability,
    mix,
    recover_representation,
)

__version__ = "0.1.0"
