"""Conditional Gaussian model: y uniform on {-1, +1}, x | y ~ N(y * mu, Sigma).

Randomness
----------
All sampling uses numpy's Philox4x64 counter-based generator keyed by a
64-bit seed; standard normals are produced from its uniforms with the
Box-Muller transform. Per-trial seeds come from :func:`derive_seed`, a hash of
``(master_seed, *indices)``, so results never depend on execution order.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, ParseError
from .linalg import SpdMatrix, identity, solve_spd
from .norms import Ball, _as_vector, _check_eps


class DegenerateInstanceWarning(UserWarning):
    """The constructed instance has AdvSNR 0 (mu' = 0)."""


@dataclass(frozen=True)
class GaussianMixture:
    mu: np.ndarray
    sigma: SpdMatrix

    def __post_init__(self):
        mu = _as_vector(self.mu, "mu")
        if mu.shape != (self.sigma.dim,):
            raise InvalidInputError(f"mu has dimension {mu.shape[0]}, Sigma has {self.sigma.dim}")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @classmethod
    def isotropic(cls, mu) -> "GaussianMixture":
        mu = np.asarray(mu, dtype=np.float64)
        return cls(mu, identity(mu.shape[0]))


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise InvalidInputError(f"inconsistent dataset shapes X{X.shape}, y{y.shape}")
        if not np.all((y == 1) | (y == -1)):
            raise InvalidInputError("labels must be +1 or -1")
        if not np.all(np.isfinite(X)):
            raise InvalidInputError("features contain non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y.astype(np.int64))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.n


def derive_seed(master_seed: int, *indices: int) -> int:
    """64-bit seed for the trial identified by ``indices``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, np.uint64)[0])


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def box_muller(gen: np.random.Generator, size: int) -> np.ndarray:
    m = (size + 1) // 2
    u1 = 1.0 - gen.random(m)  # (0, 1]
    u2 = gen.random(m)
    rad = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * np.pi * u2
    return np.concatenate([rad * np.cos(ang), rad * np.sin(ang)])[:size]


def sample(model: GaussianMixture, n: int, seed: int) -> Dataset:
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    gen = _generator(seed)
    y = np.where(gen.random(n) < 0.5, 1, -1)
    g = box_muller(gen, n * model.dim).reshape(n, model.dim)
    X = y[:, None] * model.mu + g @ model.sigma.chol.T
    return Dataset(X, y)


def empirical_moments(data: Dataset):
    """mu_hat = mean(y_i x_i) and Sigma_hat = mean(x_i x_i^T) - mu_hat mu_hat^T.

    Sigma_hat is not checked for definiteness; with n <= d it is singular.
    """
    if data.n == 0:
        raise InvalidInputError("empty dataset")
    X, n = data.X, data.n
    mu_hat = (data.y[:, None] * X).sum(axis=0) / n
    sigma_hat = X.T @ X / n - np.outer(mu_hat, mu_hat)
    sigma_hat = 0.5 * (sigma_hat + sigma_hat.T)
    return mu_hat, sigma_hat


def make_adv_instance(mu_prime, sigma: SpdMatrix, ball: Ball, eps: float) -> GaussianMixture:
    """Model whose robust mean shift maps back to ``mu_prime``.

    Takes mu = mu' + z~ with z~ = argmax_{||z||_B <= eps} mu'^T Sigma^{-1} z,
    so that mu - z(mu) = mu' and AdvSNR(mu) = StdSNR(mu') = 2 ||mu'||_{Sigma^{-1}}.
    """
    mu_prime = _as_vector(mu_prime, "mu_prime")
    eps = _check_eps(eps)
    if not np.any(mu_prime):
        warnings.warn("mu' = 0 gives a degenerate instance with AdvSNR 0", DegenerateInstanceWarning, stacklevel=2)
    z_tilde = ball.lmo(solve_spd(sigma, mu_prime), eps)
    return GaussianMixture(mu_prime + z_tilde, sigma)


def figure1_mean(r: float, eps: float, d: int) -> np.ndarray:
    """mu = (r + eps, eps, ..., eps); under l_inf with Sigma = I, mu - z(mu) = (r, 0, ..., 0)."""
    mu = np.full(d, float(eps))
    mu[0] += r
    return mu


# -- dataset CSV: header "y,x1,...,xd" ----------------------------------------


def format_dataset(data: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["y"] + [f"x{j + 1}" for j in range(data.dim)])
    for yi, xi in zip(data.y, data.X):
        w.writerow([int(yi)] + [repr(float(v)) for v in xi])
    return buf.getvalue()


def write_dataset(path, data: Dataset) -> None:
    Path(path).write_text(format_dataset(data))


def parse_dataset(text: str, path=None) -> Dataset:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ParseError("empty dataset file", path)
    header = [h.strip() for h in rows[0]]
    d = len(header) - 1
    if d < 1 or header != ["y"] + [f"x{j + 1}" for j in range(d)]:
        raise ParseError("header must be y,x1,...,xd", path, 1)
    ys, xs = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != d + 1:
            raise ParseError(f"expected {d + 1} fields, found {len(row)}", path, lineno)
        try:
            yv = float(row[0])
            xv = [float(c) for c in row[1:]]
        except ValueError:
            raise ParseError("non-numeric field", path, lineno) from None
        if yv not in (1.0, -1.0):
            raise ParseError(f"label must be 1 or -1, got {row[0].strip()}", path, lineno)
        if not np.all(np.isfinite(xv)):
            raise ParseError("non-finite feature", path, lineno)
        ys.append(int(yv))
        xs.append(xv)
    if not ys:
        raise ParseError("dataset has no rows", path)
    return Dataset(np.array(xs), np.array(ys))


def read_dataset(path) -> Dataset:
    path = Path(path)
    return parse_dataset(path.read_text(), path)
