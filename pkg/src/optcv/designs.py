"""Design matrices and ordinary least squares machinery.

Polynomial designs use the with-intercept orthogonal normalization: the first
column is all ones and the remaining columns are mutually orthogonal with unit
Euclidean norm, so that X'X = diag(n, 1, ..., 1) and
trace((X'X)^-1) = degree + 1/n.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DimensionError, SingularDesign
from .smoothers import LinearSmoother

# Reciprocal-condition threshold below which a design is reported singular.
RCOND_SINGULAR = 1e-12


@dataclass(frozen=True)
class DesignMatrix:
    """An n x p real design matrix, optionally flagged as having an intercept."""

    values: np.ndarray
    has_intercept: bool = True
    degree: int | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DimensionError(f"design must be 2-d, got shape {values.shape}")
        n, p = values.shape
        if not (n >= p >= 1):
            raise DimensionError(f"need n >= p >= 1, got n={n}, p={p}")
        if not np.all(np.isfinite(values)):
            raise DegenerateInput("design contains non-finite entries")
        if self.has_intercept and not np.allclose(values[:, 0], 1.0):
            raise DegenerateInput("has_intercept set but column 0 is not all ones")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def to_csv(self, path) -> None:
        """Write the matrix row-major with header x0,x1,..."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{j}" for j in range(self.p)])
            for row in self.values:
                writer.writerow([repr(float(v)) for v in row])


def orthogonal_polynomial_features(points, degree: int) -> DesignMatrix:
    """Orthogonal polynomial design on the given points.

    Columns 1..degree are built by the three-term (Stieltjes) recurrence on the
    monomial sequence, re-orthogonalized once, and scaled to unit norm; column 0
    is the raw all-ones intercept.
    """
    x = np.asarray(points, dtype=float).ravel()
    n = x.size
    if degree < 0:
        raise DegenerateInput(f"degree must be >= 0, got {degree}")
    if degree + 1 > n:
        raise DimensionError(f"degree {degree} needs at least {degree + 1} points, got {n}")
    if np.unique(x).size < degree + 1:
        raise DegenerateInput(
            f"need at least {degree + 1} distinct points for degree {degree}"
        )

    cols = np.empty((n, degree + 1))
    cols[:, 0] = 1.0
    if degree >= 1:
        prev = np.ones(n)
        cur = x - x.mean()
        for j in range(1, degree + 1):
            nrm = np.linalg.norm(cur)
            if nrm == 0.0:
                raise DegenerateInput("polynomial recurrence collapsed (points degenerate)")
            cols[:, j] = cur / nrm
            sq = cur @ cur
            alpha = (x * cur * cur).sum() / sq
            beta = sq / (prev @ prev)
            prev, cur = cur, (x - alpha) * cur - beta * prev
        # One re-orthogonalization sweep keeps X'X diagonal to ~1e-15 even at
        # high degree, where the raw recurrence drifts.
        norms_sq = np.r_[float(n), np.ones(degree)]
        for j in range(1, degree + 1):
            c = cols[:, j]
            c = c - cols[:, :j] @ ((cols[:, :j].T @ c) / norms_sq[:j])
            cols[:, j] = c / np.linalg.norm(c)
    return DesignMatrix(cols, has_intercept=True, degree=degree)


def reproduction_grid(n: int = 100, spacing: float = 0.01) -> np.ndarray:
    """Equally spaced points in [0, n*spacing) used by the reproduction presets."""
    return np.arange(n) * spacing


def _svd_full_rank(X: DesignMatrix):
    u, s, vt = np.linalg.svd(X.values, full_matrices=False)
    if s[0] == 0.0 or s[-1] / s[0] < RCOND_SINGULAR:
        raise SingularDesign(
            f"reciprocal condition {0.0 if s[0] == 0 else s[-1] / s[0]:.3e} < {RCOND_SINGULAR:g}"
        )
    return u, s, vt


def hat_matrix(X: DesignMatrix) -> LinearSmoother:
    """Projection H = X (X'X)^-1 X' onto the column space of X."""
    u, _, _ = _svd_full_rank(X)
    return LinearSmoother(u @ u.T, label="ols")


def ols_fit(X: DesignMatrix, y) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares coefficients and fitted values for a full-rank design."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size != X.n:
        raise DimensionError(f"response length {y.size} != design rows {X.n}")
    u, s, vt = _svd_full_rank(X)
    coefficients = vt.T @ ((u.T @ y) / s)
    fitted = u @ (u.T @ y)
    return coefficients, fitted
