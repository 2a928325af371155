"""Deterministic, seedable sampling from the supported data-generating processes.

Randomness comes from the counter-based Philox 4x64 generator keyed by
(seed, stream_id); distinct stream ids give independent streams, and
replication r of an experiment always uses stream_id = r so results do not
depend on execution order or thread count. Standard normals are produced by
the inverse normal CDF applied to (j + 0.5) / 2^53 with j a uniform 53-bit
integer, which is reproducible bit-for-bit across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.special import ndtri

from .covariance import Equicorrelated, PairedCross, materialize, validate
from .errors import DimensionError, InvalidSpec, NotPositiveDefinite

DEFAULT_SEED = 20240 + 1


class SeededStream:
    """A named, keyed random stream. Not to be shared mutably across threads."""

    algorithm = "philox4x64"

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise InvalidSpec("seed and stream_id must be non-negative integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def spawn(self, stream_id: int) -> "SeededStream":
        """Independent stream with the same seed and a different stream id."""
        return SeededStream(self.seed, stream_id)

    def normals(self, size) -> np.ndarray:
        """Standard normals via inverse-CDF on open-interval uniforms."""
        j = self._gen.integers(0, 1 << 53, size=size, dtype=np.uint64)
        return ndtri((j + 0.5) * 2.0**-53)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def choice_without_replacement(self, n: int, size: int) -> np.ndarray:
        return self._gen.choice(n, size=size, replace=False, shuffle=False)

    def __repr__(self):
        return f"SeededStream(seed={self.seed}, stream_id={self.stream_id})"


@dataclass(frozen=True)
class PairedDraw:
    """Jointly drawn train and test responses over one shared design."""

    y_train: np.ndarray
    y_test: np.ndarray
    design: object


def cholesky_factor(sigma: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; raises NotPositiveDefinite on failure."""
    try:
        return np.linalg.cholesky(np.asarray(sigma, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("covariance is not positive definite") from exc


def sample_mvn(mean, sigma, stream: SeededStream, size: int | None = None) -> np.ndarray:
    """Draw mean + L z with L the lower Cholesky factor of sigma.

    With ``size`` given, returns a (size, n) array of independent draws from the
    same stream; otherwise a single n-vector.
    """
    mean = np.asarray(mean, dtype=float).ravel()
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (mean.size, mean.size):
        raise DimensionError(f"sigma shape {sigma.shape} != ({mean.size}, {mean.size})")
    L = cholesky_factor(sigma)
    if size is None:
        return mean + L @ stream.normals(mean.size)
    z = stream.normals((size, mean.size))
    return mean + z @ L.T


def sample_paired(X, beta, sigma2: float, rho: float, stream: SeededStream) -> PairedDraw:
    """One joint draw of train and test responses from the paired fixed-design model.

    The 2n-vector (Y1, Y2) is multivariate normal with mean (X beta, X beta) and
    covariance [[Sigma, rho sigma2 11'], [rho sigma2 11', Sigma]], Sigma
    equicorrelated.
    """
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size != X.p:
        raise DimensionError(f"beta length {beta.size} != design columns {X.p}")
    spec = PairedCross(Equicorrelated(sigma2=sigma2, rho=rho, n=X.n), cross_rho=rho)
    bad = validate(spec)
    if bad is not None:
        raise bad
    mu = X.values @ beta
    draw = sample_mvn(np.concatenate([mu, mu]), materialize(spec), stream)
    return PairedDraw(y_train=draw[: X.n], y_test=draw[X.n :], design=X)


def sample_ar1(n: int, phi: float, sigma2: float, stream: SeededStream) -> np.ndarray:
    """Strictly stationary AR(1) path Y_t = phi Y_{t-1} + eps_t.

    The first observation is drawn from the stationary marginal
    N(0, sigma2 / (1 - phi^2)), so autocovariance identities hold at every
    index with no burn-in.
    """
    if n < 1:
        raise DimensionError(f"need n >= 1, got {n}")
    if abs(phi) >= 1.0:
        raise InvalidSpec(f"AR(1) is stationary only for |phi| < 1, got phi={phi}")
    if sigma2 <= 0.0:
        raise InvalidSpec(f"sigma2 must be positive, got {sigma2}")
    z = stream.normals(n)
    e = np.sqrt(sigma2) * z
    e[0] = np.sqrt(sigma2 / (1.0 - phi * phi)) * z[0]
    if n == 1:
        return e
    return lfilter([1.0], [1.0, -phi], e)
