"""Closed-form risks for linear classifiers under the conditional Gaussian model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .linalg import mahalanobis_sq, sigma_norm, solve_spd
from .model import Dataset, GaussianMixture
from .norms import L2_BALL, Ball, _as_vector, _check_eps
from .solver import DEFAULT_TOL, SolveCertificate, solve_z

_SQRT2 = math.sqrt(2.0)


def phi_bar(t: float) -> float:
    """Upper standard normal tail 1 - Phi(t) = erfc(t / sqrt 2) / 2.

    libm's erfc is accurate to a few ulps over the whole line, which keeps
    the absolute error far below 1e-12 and the relative error small in the
    far tail where 1 - Phi(t) would cancel.
    """
    t = float(t)
    if math.isnan(t):
        raise InvalidInputError("phi_bar of NaN")
    return 0.5 * math.erfc(t / _SQRT2)


@dataclass(frozen=True)
class LinearClassifier:
    """f_w(x) = sgn(w^T x), with sgn(0) = +1. w = 0 is the constant classifier."""

    w: np.ndarray

    def __post_init__(self):
        w = _as_vector(self.w, "w")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def degenerate(self) -> bool:
        return not np.any(self.w)

    def decision(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.w

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision(X) >= 0.0, 1, -1)


def classify(clf: LinearClassifier, x):
    """Label(s) sgn(w^T x); ties go to +1."""
    out = clf.predict(x)
    return int(out) if np.ndim(out) == 0 else out


def _check_dims(clf, model):
    if clf.w.shape != model.mu.shape:
        raise InvalidInputError(f"classifier has dimension {clf.w.shape[0]}, model has {model.dim}")


def robust_margin(clf: LinearClassifier, model: GaussianMixture, ball: Ball, eps: float) -> float:
    """(w^T mu - eps ||w||_{B*}) / ||w||_Sigma; 0 for the constant classifier."""
    _check_dims(clf, model)
    eps = _check_eps(eps)
    if clf.degenerate:
        return 0.0
    num = float(clf.w @ model.mu)
    if eps > 0:
        num -= eps * ball.dual_norm(clf.w)
    return num / sigma_norm(clf.w, model.sigma)


def robust_risk_linear(clf: LinearClassifier, model: GaussianMixture, ball: Ball, eps: float) -> float:
    if clf.degenerate:
        _check_dims(clf, model)
        return 0.5
    return phi_bar(robust_margin(clf, model, ball, eps))


def standard_risk_linear(clf: LinearClassifier, model: GaussianMixture) -> float:
    return robust_risk_linear(clf, model, L2_BALL, 0.0)


def robust_shift(model: GaussianMixture, ball: Ball, eps: float, tol: float = DEFAULT_TOL) -> SolveCertificate:
    """Solve for z(mu); raises ConvergenceError if the solver gives up."""
    return solve_z(model.mu, model.sigma, ball, eps, tol).raise_if_failed()


def optimal_classifier(model: GaussianMixture, ball: Ball, eps: float, tol: float = DEFAULT_TOL):
    """w0 = Sigma^{-1}(mu - z(mu)) together with the solver certificate."""
    cert = robust_shift(model, ball, eps, tol)
    return LinearClassifier(solve_spd(model.sigma, model.mu - cert.z)), cert


def adv_snr(model: GaussianMixture, ball: Ball, eps: float, tol: float = DEFAULT_TOL) -> float:
    """2 ||mu - z(mu)||_{Sigma^{-1}}; equals std_snr at eps = 0."""
    cert = robust_shift(model, ball, eps, tol)
    return 2.0 * math.sqrt(max(mahalanobis_sq(model.mu - cert.z, model.sigma), 0.0))


def std_snr(model: GaussianMixture) -> float:
    return 2.0 * math.sqrt(mahalanobis_sq(model.mu, model.sigma))


def optimal_robust_risk(model: GaussianMixture, ball: Ball, eps: float, tol: float = DEFAULT_TOL) -> float:
    return phi_bar(0.5 * adv_snr(model, ball, eps, tol))


def excess_risk(clf: LinearClassifier, model: GaussianMixture, ball: Ball, eps: float,
                tol: float = DEFAULT_TOL) -> float:
    return robust_risk_linear(clf, model, ball, eps) - optimal_robust_risk(model, ball, eps, tol)


def rate_log_ratio(model: GaussianMixture, ball: Ball, eps: float, tol: float = DEFAULT_TOL) -> float:
    """log(adversarial rate / standard rate) = (||mu||^2 - ||mu - z(mu)||^2) / 2 in Sigma^{-1} norm.

    For l2 with Sigma = I and eps < ||mu||_2 this is eps ||mu|| - eps^2 / 2.
    """
    cert = robust_shift(model, ball, eps, tol)
    return 0.5 * (mahalanobis_sq(model.mu, model.sigma) - mahalanobis_sq(model.mu - cert.z, model.sigma))


@dataclass(frozen=True)
class RiskReport:
    robust_risk: float
    standard_risk: float
    optimal_robust_risk: float
    excess_risk: float
    adv_snr: float
    std_snr: float

    def as_dict(self):
        return dict(self.__dict__)


def risk_report(clf: LinearClassifier, model: GaussianMixture, ball: Ball, eps: float,
                tol: float = DEFAULT_TOL) -> RiskReport:
    rob = robust_risk_linear(clf, model, ball, eps)
    snr = adv_snr(model, ball, eps, tol)
    opt = phi_bar(0.5 * snr)
    return RiskReport(
        robust_risk=rob,
        standard_risk=standard_risk_linear(clf, model),
        optimal_robust_risk=opt,
        excess_risk=rob - opt,
        adv_snr=snr,
        std_snr=std_snr(model),
    )


def worst_case_perturbation(clf: LinearClassifier, data: Dataset, ball: Ball, eps: float) -> np.ndarray:
    """Optimal attack on a linear classifier: delta_i = -y_i * argmax_{||d||_B <= eps} w^T d."""
    direction = ball.lmo(clf.w, eps)
    return -data.y[:, None] * direction[None, :]


def empirical_robust_error(clf: LinearClassifier, data: Dataset, ball: Ball, eps: float) -> float:
    """Fraction of points misclassified after the worst-case perturbation."""
    attacked = data.X + worst_case_perturbation(clf, data, ball, eps)
    return float(np.mean(clf.predict(attacked) != data.y))
