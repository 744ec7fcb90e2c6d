"""Solver for the robust mean shift

    z(mu) = argmin_{||z||_B <= eps} (mu - z)^T Sigma^{-1} (mu - z),

returned with a Frank-Wolfe duality-gap certificate.

Two algorithms are available:

* ``"fw"``  Frank-Wolfe with exact line search. Needs only the linear
  maximization oracle of the ball, so it covers every lp ball (and any custom
  :class:`~advgauss.norms.Ball`).
* ``"pgd"`` accelerated projected gradient (FISTA with gradient restart),
  step 1/L with L from power iteration on Sigma^{-1}. Only for p in
  {1, 2, inf}, where projections are closed form. Converges linearly where
  Frank-Wolfe zig-zags on polytope faces.

``"auto"`` picks ``pgd`` when a projection exists and ``fw`` otherwise.
Whatever the algorithm, the stopping rule and the certificate are the same:

    gap(z) = max_{||s||_B <= eps} (s - z)^T Sigma^{-1} (mu - z)

which is half the Frank-Wolfe gap of the objective and upper-bounds its
suboptimality divided by two. Because ``gap >= (z' - z)^T Sigma^{-1}(mu - z)``
for every feasible z', ``gap <= tol`` is also the first-order optimality
residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import NUMBA_ENABLED, kernel
from .errors import ConvergenceError, InvalidInputError
from .linalg import SpdMatrix
from .norms import L1, L2, LINF, LP, Ball, LpBall, _as_vector, _check_eps, lp_lmo, lp_project

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000
POWER_ITERATIONS = 50
# fresh gradient every this many incremental updates
_REFRESH = 64


@dataclass
class SolveCertificate:
    z: np.ndarray
    objective: float
    fw_gap: float
    iterations: int
    converged: bool
    method: str = "fw"
    history: np.ndarray | None = field(default=None, repr=False)

    def raise_if_failed(self):
        if not self.converged:
            raise ConvergenceError(
                f"{self.method} stopped after {self.iterations} iterations with gap {self.fw_gap:.3e}"
            )
        return self


@kernel
def fw_kernel(A, mu, z0, kind, p, eps, tol, max_iter, keep_history):
    z = z0.copy()
    g = np.dot(A, mu - z)
    obj = np.dot(mu - z, g)
    hist = np.empty(max_iter + 1 if keep_history else 1)
    it = 0
    gap = np.inf
    while True:
        s = lp_lmo(g, kind, p, eps)
        D = s - z
        gap = np.dot(g, D)
        if keep_history:
            hist[it] = obj
        if gap <= tol or it >= max_iter:
            break
        AD = np.dot(A, D)
        curv = np.dot(D, AD)
        if not curv > 0.0:
            break
        gamma = min(gap / curv, 1.0)
        z = z + gamma * D
        it += 1
        if it % _REFRESH == 0:
            g = np.dot(A, mu - z)
            obj = np.dot(mu - z, g)
        else:
            g = g - gamma * AD
            obj = obj - gamma * (2.0 * gap - gamma * curv)
    n_hist = it + 1 if keep_history else 0
    return z, gap, it, hist[:n_hist]


@kernel
def power_lambda_max(A, n_iter):
    d = A.shape[0]
    v = np.empty(d)
    for i in range(d):
        v[i] = 1.0 + 0.5 * np.sin(1.0 + 7.0 * i)
    v = v / np.sqrt(np.dot(v, v))
    lam = 0.0
    for _ in range(n_iter):
        w = np.dot(A, v)
        lam = np.dot(v, w)
        nw = np.sqrt(np.dot(w, w))
        if nw == 0.0:
            return 0.0
        v = w / nw
    return max(lam, np.dot(v, np.dot(A, v)))


@kernel
def apg_kernel(A, mu, z0, kind, p, eps, tol, max_iter, lipschitz):
    L = lipschitz
    x = z0.copy()
    y = x.copy()
    t = 1.0
    gx = np.dot(A, mu - x)
    gap = np.dot(gx, lp_lmo(gx, kind, p, eps) - x)
    obj = np.dot(mu - x, gx)
    it = 0
    while gap > tol and it < max_iter:
        gy = np.dot(A, mu - y)
        x_new = lp_project(y + gy / L, kind, eps)
        g_new = np.dot(A, mu - x_new)
        obj_new = np.dot(mu - x_new, g_new)
        it += 1
        if not obj_new <= 2.0 * obj + 1.0:
            # power iteration underestimated L; back off and restart
            L = 2.0 * L
            y = x.copy()
            t = 1.0
            continue
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        if np.dot(gy, x_new - x) < 0.0:
            t_new = 1.0
            y = x_new.copy()
        else:
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        t = t_new
        x = x_new
        gx = g_new
        obj = obj_new
        gap = np.dot(gx, lp_lmo(gx, kind, p, eps) - x)
    return x, gap, it


def _brute_force_numpy(A, mu, kind, p, eps, res):
    d = mu.shape[0]
    axis = np.linspace(-eps, eps, res)
    best_obj, best = np.inf, np.zeros(d)
    lead = axis if d > 1 else axis[:1]
    for a0 in lead:
        if d == 1:
            pts = axis[:, None]
        else:
            rest = np.stack(np.meshgrid(*([axis] * (d - 1)), indexing="ij"), axis=-1).reshape(-1, d - 1)
            pts = np.column_stack([np.full(len(rest), a0), rest])
        if kind == LP:
            m = np.max(np.abs(pts), axis=1, keepdims=True)
            m[m == 0] = 1.0
            nrm = m[:, 0] * np.sum((np.abs(pts) / m) ** p, axis=1) ** (1.0 / p)
        else:
            nrm = np.linalg.norm(pts, ord={0: 1, 1: 2, 2: np.inf}[kind], axis=1)
        pts = pts[nrm <= eps * (1.0 + 1e-12)]
        if len(pts) == 0:
            continue
        r = mu - pts
        obj = np.einsum("ij,jk,ik->i", r, A, r)
        k = int(np.argmin(obj))
        if obj[k] < best_obj:
            best_obj, best = obj[k], pts[k].copy()
    return best


@kernel
def _brute_force_loops(A, mu, kind, p, eps, res):
    d = mu.shape[0]
    step = 2.0 * eps / (res - 1)
    total = res**d
    z = np.zeros(d)
    r = np.zeros(d)
    best = np.zeros(d)
    best_obj = np.inf
    for idx in range(total):
        k = idx
        for j in range(d):
            z[j] = -eps + step * (k % res)
            k //= res
        # scalar norm: no temporaries in the innermost loop
        m = 0.0
        acc = 0.0
        for j in range(d):
            a = abs(z[j])
            if kind == L1:
                acc += a
            elif kind == L2:
                acc += a * a
            elif a > m:
                m = a
        if kind == L1:
            nrm = acc
        elif kind == L2:
            nrm = np.sqrt(acc)
        elif kind == LINF or m == 0.0:
            nrm = m
        else:
            for j in range(d):
                acc += (abs(z[j]) / m) ** p
            nrm = m * acc ** (1.0 / p)
        if nrm > eps * (1.0 + 1e-12):
            continue
        for j in range(d):
            r[j] = mu[j] - z[j]
        obj = 0.0
        for i in range(d):
            acc = 0.0
            for j in range(d):
                acc += A[i, j] * r[j]
            obj += r[i] * acc
        if obj < best_obj:
            best_obj = obj
            best[:] = z
    return best


def _initial_point(mu, ball, eps):
    if ball.has_projection:
        return ball.project(mu, eps)
    nrm = ball.norm(mu)
    if nrm <= eps:
        return mu.copy()
    return mu * (eps / nrm)


def objective(mu, z, sigma: SpdMatrix) -> float:
    r = np.asarray(mu, dtype=np.float64) - z
    return float(r @ sigma.precision @ r)


def fw_gap(mu, z, sigma: SpdMatrix, ball: Ball, eps: float) -> float:
    g = sigma.precision @ (mu - z)
    return float(g @ (ball.lmo(g, eps) - z))


def _generic_fw(A, mu, z0, ball, eps, tol, max_iter, keep_history):
    z = z0.copy()
    hist = []
    it = 0
    while True:
        g = A @ (mu - z)
        if keep_history:
            hist.append(float((mu - z) @ g))
        D = ball.lmo(g, eps) - z
        gap = float(g @ D)
        if gap <= tol or it >= max_iter:
            break
        curv = float(D @ A @ D)
        if not curv > 0:
            break
        z = z + min(gap / curv, 1.0) * D
        it += 1
    return z, gap, it, np.array(hist)


def solve_z(
    mu,
    sigma: SpdMatrix,
    ball: Ball,
    eps: float,
    tol: float = DEFAULT_TOL,
    *,
    method: str = "auto",
    max_iter: int = DEFAULT_MAX_ITER,
    record_history: bool = False,
) -> SolveCertificate:
    """Minimize ||mu - z||^2_{Sigma^{-1}} over the eps-ball of ``ball``.

    Hitting ``max_iter`` is not an error: the best iterate comes back with
    ``converged=False`` and the caller decides (see
    :meth:`SolveCertificate.raise_if_failed`).
    """
    mu = _as_vector(mu, "mu")
    eps = _check_eps(eps)
    if mu.shape != (sigma.dim,):
        raise InvalidInputError(f"mu has shape {mu.shape}, Sigma is {sigma.dim}x{sigma.dim}")
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    if method not in ("auto", "fw", "pgd"):
        raise InvalidInputError(f"unknown method {method!r}")
    if method == "auto":
        method = "pgd" if ball.has_projection else "fw"
    if method == "pgd" and not ball.has_projection:
        ball.project(mu, eps)  # raises NoClosedFormProjectionError

    A = sigma.precision
    if eps == 0.0:
        z = np.zeros_like(mu)
        return SolveCertificate(z, objective(mu, z, sigma), 0.0, 0, True, method,
                                np.array([objective(mu, z, sigma)]) if record_history else None)

    z0 = _initial_point(mu, ball, eps)
    hist = None
    if not isinstance(ball, LpBall):
        if method != "fw":
            raise InvalidInputError("custom balls are only supported by the Frank-Wolfe solver")
        z, _, it, hist = _generic_fw(A, mu, z0, ball, eps, tol, max_iter, record_history)
    elif method == "fw":
        z, _, it, hist = fw_kernel(A, mu, z0, ball.kind, ball.p, eps, tol, max_iter, record_history)
    else:
        lip = 1.05 * power_lambda_max(A, POWER_ITERATIONS)
        z, _, it = apg_kernel(A, mu, z0, ball.kind, ball.p, eps, tol, max_iter, lip)

    gap = fw_gap(mu, z, sigma, ball, eps)
    return SolveCertificate(
        z=z,
        objective=objective(mu, z, sigma),
        fw_gap=gap,
        iterations=int(it),
        converged=bool(gap <= tol),
        method=method,
        history=hist if record_history else None,
    )


def brute_force_z(mu, sigma: SpdMatrix, ball: LpBall, eps: float, grid_res: int = 201) -> np.ndarray:
    """Exhaustive grid search over [-eps, eps]^d restricted to the ball (d <= 3).

    Test oracle only. Returns the feasible grid point with the smallest
    objective; an odd ``grid_res`` keeps the origin on the grid.
    """
    mu = _as_vector(mu, "mu")
    eps = _check_eps(eps)
    d = mu.shape[0]
    if d > 3 or d < 1:
        raise InvalidInputError(f"brute force supports 1 <= d <= 3, got {d}")
    if not 2 <= grid_res <= 401:
        raise InvalidInputError("grid_res must lie in [2, 401]")
    if eps == 0.0:
        return np.zeros(d)
    A = np.ascontiguousarray(sigma.precision)
    if NUMBA_ENABLED:
        return _brute_force_loops(A, mu, ball.kind, ball.p, eps, int(grid_res))
    return _brute_force_numpy(A, mu, ball.kind, ball.p, eps, int(grid_res))
