"""Plug-in estimators of the robust Bayes direction w0 = Sigma^{-1}(mu - z(mu))."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NotPositiveDefiniteError, SingularCovarianceError
from .linalg import SpdMatrix, cholesky, identity, mahalanobis_sq, sigma_norm, solve_spd
from .model import Dataset, GaussianMixture, empirical_moments
from .norms import Ball
from .risk import LinearClassifier, optimal_classifier
from .solver import DEFAULT_TOL, SolveCertificate, solve_z

ESTIMATORS = ("plugin", "known_sigma", "mean_baseline")


@dataclass
class FitResult:
    classifier: LinearClassifier
    mu_hat: np.ndarray
    sigma_hat_used: SpdMatrix
    z_hat: np.ndarray
    solver: SolveCertificate
    ridge_applied: float = 0.0
    estimator: str = "plugin"

    @property
    def w(self) -> np.ndarray:
        return self.classifier.w


def _fit_from_moments(mu_hat, sigma_used: SpdMatrix, ball, eps, tol, ridge, name):
    cert = solve_z(mu_hat, sigma_used, ball, eps, tol).raise_if_failed()
    w = solve_spd(sigma_used, mu_hat - cert.z)
    return FitResult(LinearClassifier(w), mu_hat, sigma_used, cert.z, cert, ridge, name)


def fit_plugin(data: Dataset, ball: Ball, eps: float, ridge: float = 0.0, tol: float = DEFAULT_TOL) -> FitResult:
    """Empirical moments, then the robust shift on them, then w = Sigma_hat^{-1}(mu_hat - z_hat).

    With ``ridge > 0`` the sample covariance is replaced by Sigma_hat + ridge * I.
    """
    if data.n < 2:
        raise InvalidInputError("the plug-in estimator needs n >= 2")
    if ridge < 0:
        raise InvalidInputError("ridge must be >= 0")
    mu_hat, sigma_hat = empirical_moments(data)
    if ridge > 0:
        sigma_hat = sigma_hat + ridge * np.eye(data.dim)
    try:
        sigma_used = cholesky(sigma_hat)
    except NotPositiveDefiniteError:
        if ridge == 0:
            raise SingularCovarianceError("singular sample covariance; pass ridge or more data") from None
        raise
    return _fit_from_moments(mu_hat, sigma_used, ball, eps, tol, float(ridge), "plugin")


def fit_known_sigma(data: Dataset, sigma: SpdMatrix, ball: Ball, eps: float, tol: float = DEFAULT_TOL) -> FitResult:
    """Same as :func:`fit_plugin` with the true covariance in place of Sigma_hat."""
    if data.dim != sigma.dim:
        raise InvalidInputError(f"data has dimension {data.dim}, Sigma has {sigma.dim}")
    mu_hat, _ = empirical_moments(data)
    return _fit_from_moments(mu_hat, sigma, ball, eps, tol, 0.0, "known_sigma")


def fit_mean_baseline(data: Dataset) -> FitResult:
    """sgn(mu_hat^T x): the standard-setting direction, blind to the adversary."""
    mu_hat, _ = empirical_moments(data)
    z = np.zeros(data.dim)
    cert = SolveCertificate(z, 0.0, 0.0, 0, True, "none")
    return FitResult(LinearClassifier(mu_hat), mu_hat, identity(data.dim), z, cert, 0.0, "mean_baseline")


def fit(name: str, data: Dataset, ball: Ball, eps: float, *, sigma: SpdMatrix | None = None,
        ridge: float = 0.0, tol: float = DEFAULT_TOL) -> FitResult:
    if name == "plugin":
        return fit_plugin(data, ball, eps, ridge, tol)
    if name == "known_sigma":
        if sigma is None:
            raise InvalidInputError("known_sigma needs the true covariance")
        return fit_known_sigma(data, sigma, ball, eps, tol)
    if name == "mean_baseline":
        return fit_mean_baseline(data)
    raise InvalidInputError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATORS)}")


@dataclass(frozen=True)
class DeltaReport:
    delta_n: float
    T1: float
    T2: float
    T3: float
    T4: float
    residual: float
    scale: float

    @property
    def total(self) -> float:
        return self.T1 + self.T2 + self.T3 + self.T4


def delta_decomposition(fit: FitResult, truth: GaussianMixture, ball: Ball, eps: float,
                        tol: float = 1e-10) -> DeltaReport:
    """Split the margin deficit of a fitted direction into four terms.

    delta_n = ||w0||_S - (w^T mu - eps ||w||_{B*}) / ||w||_S and

        ||w||_S delta_n = T1 + T2 + T3 + T4
        T1 = -(||w0||_S - ||w||_S)^2 / 2
        T2 = w0^T (z_hat - z)
        T3 = -||z_hat - z||^2_{S^-1} / 2
        T4 = ||(S - S_hat) w + (mu_hat - mu)||^2_{S^-1} / 2

    with S the true covariance and S_hat the one the fit used. The identity
    is exact when z_hat solves the fitted problem, so ``residual`` measures
    solver inexactness plus rounding. ``scale`` is 1 + |delta_n| ||w||_S.
    """
    w = fit.classifier.w
    if fit.classifier.degenerate:
        raise InvalidInputError("delta_n is undefined for w = 0")
    w0_clf, cert = optimal_classifier(truth, ball, eps, tol)
    w0, z0 = w0_clf.w, cert.z
    S = truth.sigma
    nw0 = sigma_norm(w0, S)
    nw = sigma_norm(w, S)
    margin = (w @ truth.mu - eps * ball.dual_norm(w)) / nw if eps > 0 else (w @ truth.mu) / nw
    delta = nw0 - margin
    dz = fit.z_hat - z0
    t1 = -0.5 * (nw0 - nw) ** 2
    t2 = float(w0 @ dz)
    t3 = -0.5 * mahalanobis_sq(dz, S)
    u = (S.matrix - fit.sigma_hat_used.matrix) @ w + (fit.mu_hat - truth.mu)
    t4 = 0.5 * mahalanobis_sq(u, S)
    lhs = nw * delta
    return DeltaReport(delta, t1, t2, t3, t4, abs(lhs - (t1 + t2 + t3 + t4)), 1.0 + abs(lhs))
