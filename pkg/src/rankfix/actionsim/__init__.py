"""Isometric testbeds and empirical checks of the contraction estimates."""

from .testbeds import (
    ActionInstance,
    GeometricSL3Action,
    PermutationAction,
    PhaseRepresentation,
    SchrodingerAction,
    lp_norm,
    make_action,
    wrapped_lattice_weights,
)
from .averaging import (
    AverageResult,
    average,
    average_difference,
    average_exact,
    average_exact_difference,
    displacement,
    displacement_grid,
)
from .contraction import (
    EmpiricalConstants,
    Q0Estimator,
    SweepReport,
    check_change_of_middle,
    check_commutator_growth,
    check_flip_h,
    estimate_q0,
)
from .convexity import (
    IteratedReport,
    calibration_table,
    check_uc_iterated,
    epsilon_iterated,
    epsilon_single,
    inverse_modulus,
    modulus,
    random_uc_trials,
)
from .cauchy import (
    InterpolationDefectError,
    LadderReport,
    cauchy_diagnostic,
    fit_distortion_constant,
    theta_ladder,
    word_defect,
    xi_lambda,
)
