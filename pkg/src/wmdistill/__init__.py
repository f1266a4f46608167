"""Weak-measurement filtering and entanglement distillation over
amplitude-damping channels: closed forms, a density-matrix oracle, and
sweep tooling."""

__version__ = "0.1.0"

from .bell_edp import (
    BellScenario,
    EfficiencyReport,
    TwoCopyRoundParams,
    bell_filtered_state,
    bisection_efficiency,
    bisection_outcome_stats,
    nonmax_initial_pipeline,
    two_copy_efficiency,
    two_copy_round,
)
from .channels import ad_kraus, filter_all, nrwm_operator, transmit
from .exceptions import (
    ConfigError,
    InvalidFilterError,
    KrausError,
    NotDistillableError,
    QuadratureError,
    RegisterCapError,
)
from .multipartite_edp import (
    asymptotic_ratio,
    boundary_inequality,
    efficiency_ratio,
    ghz_efficiency,
    ghz_noisy_and_filtered,
    optimal_w,
    region_boundaries,
    w_filtered,
    w_round,
    w_threshold_strength,
    w_trajectory,
)
from .qstate import DensityMatrix, PureState
