"""Threat-model geometry: lp norms, dual norms, linear minimization oracles
and Euclidean projections onto norm balls.

A ball is described by a :class:`Ball`. Only :class:`LpBall` ships; other
origin-symmetric convex bodies can subclass :class:`Ball` and will be solved
through the generic Frank-Wolfe path, which needs nothing but ``lmo``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ._accel import kernel
from .errors import InvalidInputError, NoClosedFormProjectionError, ParseError

# kernel codes for LpBall.kind
L1, L2, LINF, LP = 0, 1, 2, 3

#: p at or above this is treated as the max-norm (|x|**p overflows otherwise)
P_INF_THRESHOLD = 1e6


@kernel
def lp_norm(x, kind, p):
    if x.shape[0] == 0:
        return 0.0
    if kind == L1:
        return np.sum(np.abs(x))
    if kind == L2:
        return np.sqrt(np.dot(x, x))
    m = np.max(np.abs(x))
    if kind == LINF or m == 0.0:
        return m
    u = np.abs(x) / m
    return m * np.sum(u**p) ** (1.0 / p)


@kernel
def lp_dual_norm(x, kind, p):
    if kind == L1:
        return lp_norm(x, LINF, np.inf)
    if kind == L2:
        return lp_norm(x, L2, 2.0)
    if kind == LINF:
        return lp_norm(x, L1, 1.0)
    q = p / (p - 1.0)
    if q >= P_INF_THRESHOLD:
        return lp_norm(x, LINF, np.inf)
    return lp_norm(x, LP, q)


@kernel
def lp_lmo(g, kind, p, eps):
    """argmax of g.z over the eps-ball (ties: see LpBall.lmo)."""
    d = g.shape[0]
    z = np.zeros(d)
    if eps == 0.0 or d == 0:
        return z
    if kind == L1:
        i = np.argmax(np.abs(g))
        z[i] = eps * np.sign(g[i])
        return z
    if kind == L2:
        nrm = np.sqrt(np.dot(g, g))
        if nrm > 0.0:
            z[:] = (eps / nrm) * g
        return z
    if kind == LINF:
        z[:] = eps * np.sign(g)
        return z
    q = p / (p - 1.0)
    m = np.max(np.abs(g))
    if m == 0.0:
        return z
    if q >= P_INF_THRESHOLD:
        # dual is numerically l_inf: p is effectively 1
        i = np.argmax(np.abs(g))
        z[i] = eps * np.sign(g[i])
        return z
    u = np.abs(g) / m
    t = u ** (q - 1.0)
    scale = np.sum(u**q) ** ((q - 1.0) / q)
    z[:] = eps * np.sign(g) * t / scale
    return z


@kernel
def project_l1(x, eps):
    d = x.shape[0]
    ax = np.abs(x)
    if np.sum(ax) <= eps:
        return x.copy()
    if eps == 0.0:
        return np.zeros(d)
    srt = np.sort(ax)[::-1]
    css = np.cumsum(srt)
    rho = 0
    for j in range(d):
        if srt[j] - (css[j] - eps) / (j + 1.0) > 0.0:
            rho = j
    theta = (css[rho] - eps) / (rho + 1.0)
    return np.sign(x) * np.maximum(ax - theta, 0.0)


@kernel
def lp_project(x, kind, eps):
    if kind == L2:
        nrm = np.sqrt(np.dot(x, x))
        if nrm <= eps:
            return x.copy()
        return x * (eps / nrm)
    if kind == LINF:
        return np.minimum(np.maximum(x, -eps), eps)
    return project_l1(x, eps)


def _as_vector(x, name="x"):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def _check_eps(eps):
    eps = float(eps)
    if not (eps >= 0.0 and math.isfinite(eps)):
        raise InvalidInputError(f"eps must be finite and >= 0, got {eps}")
    return eps


class Ball(ABC):
    """Origin-symmetric convex body defining the adversary's norm ||.||_B.

    Subclasses supply the norm, its dual and a linear maximization oracle.
    ``project`` is optional; solvers fall back to Frank-Wolfe without it.
    """

    @abstractmethod
    def norm(self, x: np.ndarray) -> float: ...

    @abstractmethod
    def dual_norm(self, x: np.ndarray) -> float: ...

    @abstractmethod
    def lmo(self, g: np.ndarray, eps: float) -> np.ndarray:
        """Return argmax_{||z||_B <= eps} g.z."""

    def project(self, x: np.ndarray, eps: float) -> np.ndarray:
        raise NoClosedFormProjectionError(
            f"no closed-form Euclidean projection onto {self}; use the Frank-Wolfe solver"
        )

    @property
    def has_projection(self) -> bool:
        return False


@dataclass(frozen=True)
class LpBall(Ball):
    """The lp unit ball, 1 <= p <= inf.

    Values of p at or above 1e6 are routed to the max-norm code path.

    Tie-breaking in ``lmo``: for l_inf, coordinates with zero gradient get 0;
    for l1 the lowest index among the largest |g_i| takes all the mass.
    """

    p: float

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p < 1.0:
            raise InvalidInputError(f"lp ball needs p >= 1, got {self.p}")
        object.__setattr__(self, "p", p)

    @property
    def kind(self) -> int:
        if self.p == 1.0:
            return L1
        if self.p == 2.0:
            return L2
        if self.p >= P_INF_THRESHOLD:
            return LINF
        return LP

    @property
    def q(self) -> float:
        """Dual exponent, 1/p + 1/q = 1."""
        if self.kind == L1:
            return math.inf
        if self.kind == LINF:
            return 1.0
        return self.p / (self.p - 1.0)

    def dual(self) -> "LpBall":
        return LpBall(self.q)

    def norm(self, x):
        return float(lp_norm(_as_vector(x), self.kind, self.p))

    def dual_norm(self, x):
        return float(lp_dual_norm(_as_vector(x), self.kind, self.p))

    def lmo(self, g, eps):
        return lp_lmo(_as_vector(g, "g"), self.kind, self.p, _check_eps(eps))

    @property
    def has_projection(self):
        return self.kind != LP

    def project(self, x, eps):
        if self.kind == LP:
            return super().project(x, eps)
        return lp_project(_as_vector(x), self.kind, _check_eps(eps))

    def __str__(self):
        return {L1: "l1", L2: "l2", LINF: "linf"}.get(self.kind, f"lp:{self.p:g}")


LINF_BALL = LpBall(math.inf)
L2_BALL = LpBall(2.0)
L1_BALL = LpBall(1.0)


def parse_ball(text: str) -> LpBall:
    """Parse ``linf``, ``l2``, ``l1`` or ``lp:<p>`` (p >= 1)."""
    s = text.strip().lower()
    fixed = {"linf": LINF_BALL, "l2": L2_BALL, "l1": L1_BALL}
    if s in fixed:
        return fixed[s]
    if s.startswith("lp:"):
        try:
            p = float(s[3:])
        except ValueError:
            raise ParseError(f"bad exponent in ball spec {text!r}") from None
        if not p >= 1.0:
            raise ParseError(f"ball spec {text!r}: p must be >= 1")
        return LpBall(p)
    raise ParseError(f"unknown ball spec {text!r}; expected linf, l2, l1 or lp:<p>")


def norm(x, ball: Ball) -> float:
    return ball.norm(x)


def dual_norm(x, ball: Ball) -> float:
    return ball.dual_norm(x)


def lmo(g, ball: Ball, eps: float) -> np.ndarray:
    return ball.lmo(g, eps)


def project(x, ball: Ball, eps: float) -> np.ndarray:
    return ball.project(x, eps)
