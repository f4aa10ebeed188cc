"""Fairness analysis through the lens of equality of opportunity.

The package provides statistical fairness gap metrics, exact EOP
condition checkers with executable equivalence statements, brute-force
verification of the optimal-prediction trade-off table, and a convex
max-min group-utility training method with its cross-validated sweep
harness.
"""

from .core import (
    Dataset,
    GroupCoefficients,
    Instance,
    LinearModel,
    UtilitySpec,
    advantage,
    coefficients_from_benefit_table,
    crime_utility_spec,
    evaluate_utility,
)
from .eop import (
    EopVerdict,
    FiniteJointDistribution,
    check_luck_egalitarian_eop,
    check_rawlsian_eop,
    enumerate_joint_distributions,
    verify_accuracy_parity_equivalence,
    verify_equality_of_odds_equivalence,
    verify_pvp_equivalence,
    verify_statistical_parity_equivalence,
)
from .metrics import (
    MetricReport,
    accuracy_parity_gap,
    equality_of_odds_gap,
    group_average_utility,
    mean_difference,
    min_group_average_utility,
    negative_residual_difference,
    positive_residual_difference,
    predictive_value_parity_gap,
    statistical_parity_gap,
)

__version__ = "0.1.0"
