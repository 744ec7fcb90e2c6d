"""Adversarially robust classification for two-component Gaussian mixtures.

Exact robust-risk calculus for linear classifiers, the robust Bayes-optimal
direction via a constrained convex program, plug-in estimators of it, and a
Monte-Carlo harness for excess-risk rates.
"""

__version__ = "0.1.0"

from .errors import (
    AdvGaussError,
    ConvergenceError,
    InvalidInputError,
    NoClosedFormProjectionError,
    NotPositiveDefiniteError,
    ParseError,
    SingularCovarianceError,
)
from .estimators import (
    DeltaReport,
    FitResult,
    delta_decomposition,
    fit_known_sigma,
    fit_mean_baseline,
    fit_plugin,
)
from .experiment import ExperimentConfig, TrialRecord, run_figure1, run_rate_study
from .linalg import SpdMatrix, cholesky, identity, mahalanobis_sq, sigma_norm, solve_spd
from .model import Dataset, GaussianMixture, empirical_moments, make_adv_instance, sample
from .norms import L1_BALL, L2_BALL, LINF_BALL, Ball, LpBall, dual_norm, lmo, norm, parse_ball, project
from .risk import (
    LinearClassifier,
    RiskReport,
    adv_snr,
    classify,
    excess_risk,
    optimal_robust_risk,
    phi_bar,
    rate_log_ratio,
    robust_risk_linear,
    standard_risk_linear,
)
from .solver import SolveCertificate, brute_force_z, solve_z
