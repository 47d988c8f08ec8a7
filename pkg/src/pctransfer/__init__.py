"""Piecewise-constant signal estimation with transfer from higher-frequency sources."""

from .alignment import (
    average,
    average_multi,
    averaging_matrix,
    block_bounds,
    expand,
    expand_multi,
    expansion_matrix,
    interleave_all,
    interleave_pair,
    multi_block_bounds,
)
from .estimators import (
    EstimatorKind,
    LeftInverseMatrix,
    estimate_affine,
    estimate_multisource,
    estimate_target_multisource,
    estimate_target_only,
    estimate_target_unisource,
    estimate_unisource,
    theoretical_lambda,
)
from .exceptions import DimensionError, PreconditionError
from .selection import (
    SelectionConfig,
    detect_informative,
    frequency_curve,
    refine_subset,
    theoretical_screen_width,
    theoretical_threshold,
)
from .signal import (
    Penalty,
    PenaltySpec,
    SourceDataset,
    as_signal,
    changepoints_of,
    difference_apply,
    mse_loss,
)
from .simulation import (
    ConfigurationSpec,
    ScenarioSpec,
    TrialResult,
    gen_sources,
    gen_target,
    run_monte_carlo,
    summarize,
)
from .solvers import objective_value, solve, solve_l0, solve_l1
from .tuning import CvSpec, PermutationSpec, cv_select_lambda, permutation_threshold

__version__ = "0.1.0"
