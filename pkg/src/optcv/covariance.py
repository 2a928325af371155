"""Structured covariance models for correlated responses.

Supported variants: iid, equicorrelated, first-order autoregressive (Toeplitz),
group-block equicorrelation, and the paired train/test cross structure used
for fixed-design Monte Carlo. Arbitrary user-supplied dense matrices and
heteroskedastic general structures are deliberately out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import toeplitz

from .errors import InvalidSpec


@dataclass(frozen=True)
class IID:
    sigma2: float
    n: int


@dataclass(frozen=True)
class Equicorrelated:
    """Common variance sigma2 and common pairwise correlation rho.

    rho is bounded below by -1/(n-1); below that the matrix loses positive
    definiteness.
    """

    sigma2: float
    rho: float
    n: int


@dataclass(frozen=True)
class AR1:
    """Stationary first-order autoregression; sigma2 is the innovation variance."""

    sigma2: float
    phi: float
    n: int


@dataclass(frozen=True)
class GroupBlock:
    """Equicorrelation within labeled groups, zero covariance across groups."""

    sigma2: float
    rho_within: float
    groups: tuple

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))


@dataclass(frozen=True)
class PairedCross:
    """2n-dimensional structure for paired train/test draws.

    Two equicorrelated blocks of size n on the diagonal, with constant
    cross-covariance cross_rho * sigma2 between every train/test pair.
    """

    inner: Equicorrelated
    cross_rho: float


CovarianceSpec = Union[IID, Equicorrelated, AR1, GroupBlock, PairedCross]


def ar1_autocovariance(phi: float, sigma2: float, h: int) -> float:
    """Autocovariance gamma(h) = sigma2 * phi^|h| / (1 - phi^2) of a stationary AR(1)."""
    if abs(phi) >= 1.0:
        raise InvalidSpec(f"AR(1) requires |phi| < 1, got phi={phi}")
    if sigma2 <= 0.0:
        raise InvalidSpec(f"sigma2 must be positive, got {sigma2}")
    return sigma2 * phi ** abs(int(h)) / (1.0 - phi * phi)


def validate(spec: CovarianceSpec):
    """Return None if the spec is valid, otherwise an InvalidSpec describing why.

    Variants without closed-form positive-definiteness bounds are confirmed by
    attempting a Cholesky factorization of the materialized matrix.
    """
    sigma2 = spec.inner.sigma2 if isinstance(spec, PairedCross) else spec.sigma2
    if not np.isfinite(sigma2) or sigma2 <= 0.0:
        return InvalidSpec(f"sigma2 must be positive and finite, got {sigma2}")

    if isinstance(spec, IID):
        if spec.n < 1:
            return InvalidSpec(f"n must be >= 1, got {spec.n}")
        return None

    if isinstance(spec, Equicorrelated):
        return _validate_equicorrelated(spec.rho, spec.n)

    if isinstance(spec, AR1):
        if spec.n < 1:
            return InvalidSpec(f"n must be >= 1, got {spec.n}")
        if abs(spec.phi) >= 1.0:
            return InvalidSpec(f"AR(1) is stationary only for |phi| < 1, got phi={spec.phi}")
        return None

    if isinstance(spec, GroupBlock):
        if len(spec.groups) < 1:
            return InvalidSpec("groups must be nonempty")
        sizes = {}
        for g in spec.groups:
            sizes[g] = sizes.get(g, 0) + 1
        largest = max(sizes.values())
        rho = spec.rho_within
        if rho >= 1.0:
            return InvalidSpec(f"rho_within must be < 1, got {rho}")
        if largest > 1 and rho <= -1.0 / (largest - 1):
            return InvalidSpec(
                f"rho_within={rho} makes a block of size {largest} lose positive "
                f"definiteness (needs rho > {-1.0 / (largest - 1):.6g})"
            )
        return _cholesky_check(materialize(spec, _validated=True))

    if isinstance(spec, PairedCross):
        inner = spec.inner
        bad = _validate_equicorrelated(inner.rho, inner.n)
        if bad is not None:
            return bad
        # Block eigenvalues: sigma2*(1 - rho) and sigma2*(1 + (n-1) rho +- n cross_rho).
        if 1.0 + (inner.n - 1) * inner.rho <= inner.n * abs(spec.cross_rho):
            return InvalidSpec(
                f"cross_rho={spec.cross_rho} exceeds the positive-definiteness bound "
                f"|cross_rho| < (1 + (n-1) rho)/n for rho={inner.rho}, n={inner.n}"
            )
        return None

    return InvalidSpec(f"unknown covariance spec {type(spec).__name__}")


def _validate_equicorrelated(rho: float, n: int):
    if n < 1:
        return InvalidSpec(f"n must be >= 1, got {n}")
    if rho >= 1.0:
        return InvalidSpec(f"rho must be < 1, got {rho}")
    if n > 1 and rho < -1.0 / (n - 1):
        return InvalidSpec(
            f"rho={rho} below the lower bound -1/(n-1) = {-1.0 / (n - 1):.6g} for n={n}"
        )
    if n > 1 and rho == -1.0 / (n - 1):
        return InvalidSpec(
            f"rho={rho} sits exactly on the -1/(n-1) boundary; matrix is singular"
        )
    return None


def _cholesky_check(matrix: np.ndarray):
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        return InvalidSpec("materialized covariance is not positive definite")
    return None


def materialize(spec: CovarianceSpec, _validated: bool = False) -> np.ndarray:
    """Dense symmetric covariance matrix for the spec; raises InvalidSpec if invalid."""
    if not _validated:
        bad = validate(spec)
        if bad is not None:
            raise bad

    if isinstance(spec, IID):
        return spec.sigma2 * np.eye(spec.n)

    if isinstance(spec, Equicorrelated):
        s2, rho, n = spec.sigma2, spec.rho, spec.n
        return s2 * ((1.0 - rho) * np.eye(n) + rho * np.ones((n, n)))

    if isinstance(spec, AR1):
        gammas = np.array(
            [ar1_autocovariance(spec.phi, spec.sigma2, h) for h in range(spec.n)]
        )
        return toeplitz(gammas)

    if isinstance(spec, GroupBlock):
        labels = np.asarray(spec.groups)
        same = labels[:, None] == labels[None, :]
        n = labels.size
        out = np.where(same, spec.rho_within * spec.sigma2, 0.0)
        np.fill_diagonal(out, spec.sigma2)
        return out

    if isinstance(spec, PairedCross):
        inner = materialize(spec.inner, _validated=True)
        n = spec.inner.n
        cross = spec.cross_rho * spec.inner.sigma2 * np.ones((n, n))
        return np.block([[inner, cross], [cross, inner]])

    raise InvalidSpec(f"unknown covariance spec {type(spec).__name__}")
