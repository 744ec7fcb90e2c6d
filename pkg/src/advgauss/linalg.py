"""Dense symmetric positive definite matrices.

Supported envelope: d up to ~1e3 and condition numbers up to ~1e8. No
pivoting is done; anything closer to singular is rejected by the pivot check
in :func:`cholesky`.
"""

from __future__ import annotations

from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InvalidInputError, NotPositiveDefiniteError, ParseError

SYMMETRY_RTOL = 1e-10
PIVOT_RTOL = 1e-12


class SpdMatrix:
    """Immutable SPD matrix with its cached lower Cholesky factor (Sigma = L L^T)."""

    def __init__(self, matrix: np.ndarray, chol: np.ndarray):
        self.matrix = matrix
        self.chol = chol
        self.matrix.setflags(write=False)
        self.chol.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def precision(self) -> np.ndarray:
        """Sigma^{-1}, formed once from the factor (used by the solver kernels)."""
        linv = solve_triangular(self.chol, np.eye(self.dim), lower=True)
        prec = linv.T @ linv
        prec = 0.5 * (prec + prec.T)
        prec.setflags(write=False)
        return prec

    def solve(self, b) -> np.ndarray:
        return solve_spd(self, b)

    def __repr__(self):
        return f"SpdMatrix(dim={self.dim})"


def cholesky(m) -> SpdMatrix:
    """Factor a symmetric positive definite matrix.

    Raises :class:`NotPositiveDefiniteError` when a pivot falls below
    ``1e-12 * trace / d``; the usual remedy is a small ridge ``m + lam * I``.
    """
    a = np.array(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidInputError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix contains non-finite entries")
    scale = np.max(np.abs(a))
    if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * max(scale, 1e-300):
        raise InvalidInputError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    d = a.shape[0]
    floor = PIVOT_RTOL * np.trace(a) / d
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(
            "matrix is not positive definite; consider adding a ridge (m + lam*I)"
        ) from None
    piv = np.diag(chol) ** 2
    if not floor > 0 or np.any(piv <= floor):
        raise NotPositiveDefiniteError(
            "matrix is numerically singular (Cholesky pivot below 1e-12*trace/d); "
            "consider adding a ridge (m + lam*I)"
        )
    return SpdMatrix(a, chol)


def identity(d: int) -> SpdMatrix:
    return cholesky(np.eye(d))


def _check_vec(x, m: SpdMatrix, name="vector"):
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (m.dim,):
        raise InvalidInputError(f"{name} has shape {v.shape}, expected ({m.dim},)")
    return v


def solve_spd(m: SpdMatrix, b) -> np.ndarray:
    """Solve m x = b with two triangular solves."""
    b = _check_vec(b, m, "right-hand side")
    y = solve_triangular(m.chol, b, lower=True)
    return solve_triangular(m.chol, y, lower=True, trans="T")


def mahalanobis_sq(x, m: SpdMatrix) -> float:
    """x^T Sigma^{-1} x, via ||L^{-1} x||^2."""
    y = solve_triangular(m.chol, _check_vec(x, m), lower=True)
    return float(y @ y)


def sigma_norm(w, m: SpdMatrix) -> float:
    """||w||_Sigma = sqrt(w^T Sigma w) = ||L^T w||."""
    y = m.chol.T @ _check_vec(w, m)
    return float(np.sqrt(y @ y))


# -- text format: one row per line, comma separated ---------------------------


def parse_matrix(text: str, path=None) -> np.ndarray:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise ParseError(f"could not parse numbers in {raw.strip()!r}", path, lineno) from None
        if not all(np.isfinite(row)):
            raise ParseError("non-finite value", path, lineno)
        if rows and len(row) != len(rows[0]):
            raise ParseError(f"expected {len(rows[0])} columns, found {len(row)}", path, lineno)
        rows.append(row)
    if not rows:
        raise ParseError("no data", path)
    return np.array(rows, dtype=np.float64)


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    return parse_matrix(path.read_text(), path)


def read_vector(path) -> np.ndarray:
    """A vector file is a single row or a single column."""
    a = read_matrix(path)
    if a.shape[0] != 1 and a.shape[1] != 1:
        raise ParseError(f"expected a single row or column, got shape {a.shape}", path)
    return a.ravel()


def format_matrix(a) -> str:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in a)


def write_matrix(path, a) -> None:
    Path(path).write_text(format_matrix(a))
