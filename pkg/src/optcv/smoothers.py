"""Linear smoothers: estimators whose fitted values are a fixed map y_hat = H y."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DimensionError


@dataclass(frozen=True)
class LinearSmoother:
    """An n x n smoothing matrix together with a descriptive label."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        H = np.asarray(self.matrix, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionError(f"smoothing matrix must be square, got {H.shape}")
        if not np.all(np.isfinite(H)):
            raise DegenerateInput("smoothing matrix contains non-finite entries")
        object.__setattr__(self, "matrix", H)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def ols_smoother(X) -> LinearSmoother:
    """Hat matrix of a design, as a smoother."""
    from .designs import hat_matrix

    return hat_matrix(X)


def knn_smoother(n: int, k: int, ordering=None) -> LinearSmoother:
    """Symmetric k-nearest-neighbor averaging along an ordering.

    Row t puts weight 1/m on each of the m neighbors within k/2 positions on
    either side of t (t itself excluded); at the boundaries only the neighbors
    that exist are used, so endpoints of a 2-NN degrade to 1-NN. The diagonal
    is identically zero.
    """
    if k < 2 or k % 2 != 0:
        raise DegenerateInput(f"k must be a positive even integer, got {k}")
    half = k // 2
    if n <= half:
        raise DimensionError(f"need n > k/2, got n={n}, k={k}")
    if ordering is None:
        order = np.arange(n)
    else:
        order = np.asarray(ordering, dtype=int)
        if order.size != n or set(order.tolist()) != set(range(n)):
            raise DimensionError("ordering must be a permutation of 0..n-1")
    H = np.zeros((n, n))
    for pos in range(n):
        lo, hi = max(0, pos - half), min(n - 1, pos + half)
        neighbors = [p for p in range(lo, hi + 1) if p != pos]
        w = 1.0 / len(neighbors)
        for p in neighbors:
            H[order[pos], order[p]] = w
    return LinearSmoother(H, label=f"{k}nn")


def apply_smoother(smoother: LinearSmoother, y) -> np.ndarray:
    """Fitted values H y."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size != smoother.n:
        raise DimensionError(f"response length {y.size} != smoother size {smoother.n}")
    return smoother.matrix @ y


def degrees_of_freedom(smoother: LinearSmoother) -> float:
    """trace(H), the effective degrees of freedom of the smoother."""
    return float(np.trace(smoother.matrix))
