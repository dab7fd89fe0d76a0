"""Spectrum sensing when the transmitter uses multiple discrete power levels.

Core pipeline: a Scenario fixes the statistical model; build_regions turns
it into MAP decision regions for either sensing strategy; decision_matrix
and friends score the regions analytically; simkit validates them by Monte
Carlo; the fusion module combines several sensors' votes.
"""

from .fusion import (
    FusionRule,
    ResourceCapError,
    enumerate_votes,
    majority_decide,
    majority_matrix,
    majority_matrix_closed,
    make_majority_rule,
    make_optimal_rule,
    optimal_decide,
    optimal_matrix,
    vote_prob,
    vote_prob_hetero,
)
from .gammafn import ConvergenceError, inv_reg_lower_gamma, log_gamma, reg_lower_gamma
from .metrics import (
    DecisionMatrix,
    bayes_risk_decide,
    decision_matrix,
    discrimination,
    offset_error,
    pfa_pd,
    zero_one_costs,
)
from .regions import (
    DecisionRegions,
    DegenerateThresholdError,
    Strategy,
    build_regions,
    classify,
    np_threshold,
    phi_onoff,
    presence_balance,
    solve_theta_onoff,
    theta_pair,
)
from .scenario import Scenario, log_joint, make_scenario, posterior
from .simkit import SamplingMode, TrialPlan, draw_energy, empirical_matrix

__all__ = [
    "ConvergenceError",
    "DecisionMatrix",
    "DecisionRegions",
    "DegenerateThresholdError",
    "FusionRule",
    "ResourceCapError",
    "SamplingMode",
    "Scenario",
    "Strategy",
    "TrialPlan",
    "bayes_risk_decide",
    "build_regions",
    "classify",
    "decision_matrix",
    "discrimination",
    "draw_energy",
    "empirical_matrix",
    "enumerate_votes",
    "inv_reg_lower_gamma",
    "log_gamma",
    "log_joint",
    "majority_decide",
    "majority_matrix",
    "majority_matrix_closed",
    "make_majority_rule",
    "make_optimal_rule",
    "make_scenario",
    "np_threshold",
    "offset_error",
    "optimal_decide",
    "optimal_matrix",
    "pfa_pd",
    "phi_onoff",
    "posterior",
    "presence_balance",
    "reg_lower_gamma",
    "solve_theta_onoff",
    "theta_pair",
    "vote_prob",
    "vote_prob_hetero",
    "zero_one_costs",
]
