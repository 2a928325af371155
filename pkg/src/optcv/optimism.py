"""Expected-error decompositions and optimism penalties for linear smoothers.

The decomposition of the expected out-of-sample error is

    expected_oos = tr(Sigma)/n + ||mu - H mu||^2 / n + tr(H Sigma H')/n,

the training error under-estimates it by the training optimism
(2/n) tr(H Sigma), and a test set that shares cross-covariance C with the
training responses under-estimates it by the test optimism (2/n) tr(C H').
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .covariance import Equicorrelated, PairedCross, materialize, validate
from .errors import DegenerateInput, DimensionError, InvalidSpec, NotPositiveDefinite
from .parallel import run_replications
from .sampling import SeededStream, cholesky_factor
from .smoothers import LinearSmoother


@dataclass(frozen=True)
class ErrorDecomposition:
    """All terms in squared response units; the identities below hold exactly.

    expected_oos = irreducible + squared_bias + estimator_variance
    expected_train = expected_oos - optimism_train
    expected_test = expected_oos - optimism_test
    """

    irreducible: float
    squared_bias: float
    estimator_variance: float
    optimism_train: float
    optimism_test: float
    expected_train: float
    expected_test: float
    expected_oos: float

    def as_lines(self) -> list[str]:
        return [
            f"irreducible {self.irreducible!r}",
            f"squared_bias {self.squared_bias!r}",
            f"estimator_variance {self.estimator_variance!r}",
            f"optimism_train {self.optimism_train!r}",
            f"optimism_test {self.optimism_test!r}",
            f"expected_train {self.expected_train!r}",
            f"expected_test {self.expected_test!r}",
            f"expected_oos {self.expected_oos!r}",
        ]


def _assemble(irreducible, squared_bias, estimator_variance, optimism_train, optimism_test):
    expected_oos = irreducible + squared_bias + estimator_variance
    return ErrorDecomposition(
        irreducible=float(irreducible),
        squared_bias=float(squared_bias),
        estimator_variance=float(estimator_variance),
        optimism_train=float(optimism_train),
        optimism_test=float(optimism_test),
        expected_train=float(expected_oos - optimism_train),
        expected_test=float(expected_oos - optimism_test),
        expected_oos=float(expected_oos),
    )


def analytic_decomposition(
    mu, smoother: LinearSmoother, sigma, cross_cov=None
) -> ErrorDecomposition:
    """Exact decomposition for a linear smoother under covariance sigma.

    cross_cov is Cov(Y_test, Y_train); omitted it is taken as zero, which is
    the true out-of-sample case.
    """
    mu = np.asarray(mu, dtype=float).ravel()
    sigma = np.asarray(sigma, dtype=float)
    H = smoother.matrix
    n = smoother.n
    if mu.size != n or sigma.shape != (n, n):
        raise DimensionError(
            f"shape mismatch: mu {mu.size}, sigma {sigma.shape}, smoother {n}"
        )
    if not np.allclose(sigma, sigma.T, atol=1e-10):
        raise NotPositiveDefinite("sigma is not symmetric")
    cholesky_factor(sigma)  # PD check

    resid_mean = mu - H @ mu
    hs = H @ sigma
    if cross_cov is None:
        optimism_test = 0.0
    else:
        cross_cov = np.asarray(cross_cov, dtype=float)
        if cross_cov.shape != (n, n):
            raise DimensionError(f"cross_cov shape {cross_cov.shape} != ({n}, {n})")
        optimism_test = 2.0 * np.trace(cross_cov @ H.T) / n
    return _assemble(
        irreducible=np.trace(sigma) / n,
        squared_bias=float(resid_mean @ resid_mean) / n,
        estimator_variance=np.trace(hs @ H.T) / n,
        optimism_train=2.0 * np.trace(hs) / n,
        optimism_test=optimism_test,
    )


def closed_form_equicorrelated_ols(
    n: int, d: int, rho: float, sigma2: float
) -> ErrorDecomposition:
    """Closed-form decomposition for OLS on an orthogonal with-intercept design
    of degree d under an equicorrelated response with paired train/test draws.

    Uses tr(H Sigma) = tr(H Sigma H') = sigma2 ((1 - rho)(d + 1) + rho n) and
    test optimism 2 rho sigma2 (row sums of a hat matrix with intercept are one).
    """
    if d < 0 or d + 1 > n:
        raise DimensionError(f"need 0 <= d <= n - 1, got d={d}, n={n}")
    bad = validate(Equicorrelated(sigma2=sigma2, rho=rho, n=n))
    if bad is not None:
        raise bad
    trace_h_sigma = sigma2 * ((1.0 - rho) * (d + 1) + rho * n)
    return _assemble(
        irreducible=sigma2,
        squared_bias=0.0,
        estimator_variance=trace_h_sigma / n,
        optimism_train=2.0 * trace_h_sigma / n,
        optimism_test=2.0 * rho * sigma2,
    )


def closed_form_ar1_knn_covariance(phi: float, sigma2: float, k: int) -> float:
    """Per-point covariance between a held-out AR(1) value and its neighbor average.

    The symmetric window keeps the one-half prefactor of the two-neighbor
    average as it widens (each of the k neighbors carries weight 1/2), giving
    sigma2 (phi + ... + phi^(k/2)) / (1 - phi^2): sigma2 phi / (1 - phi^2) for
    k = 2 and sigma2 (phi + phi^2) / (1 - phi^2) for k = 4.
    """
    if k not in (2, 4):
        raise InvalidSpec(f"supported window sizes are k in {{2, 4}}, got {k}")
    if abs(phi) >= 1.0:
        raise InvalidSpec(f"AR(1) requires |phi| < 1, got phi={phi}")
    if sigma2 <= 0.0:
        raise InvalidSpec(f"sigma2 must be positive, got {sigma2}")
    return sigma2 * sum(phi**j for j in range(1, k // 2 + 1)) / (1.0 - phi * phi)


@dataclass(frozen=True)
class MonteCarloErrors:
    """Per-replication mean squared errors and their summaries."""

    train: np.ndarray
    test: np.ndarray
    oos: np.ndarray

    @property
    def reps(self) -> int:
        return self.train.size

    def mean(self, which: str) -> float:
        return float(getattr(self, which).mean())

    def mc_se(self, which: str) -> float:
        v = getattr(self, which)
        return float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else float("nan")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rep", "train_mse", "test_mse", "oos_mse"])
            for r in range(self.reps):
                writer.writerow(
                    [r, repr(float(self.train[r])), repr(float(self.test[r])), repr(float(self.oos[r]))]
                )


def monte_carlo_errors(
    X,
    beta,
    cov: PairedCross,
    smoother: LinearSmoother,
    reps: int,
    seed: int,
    threads: int = 1,
) -> MonteCarloErrors:
    """Simulate paired train/test draws and an independent out-of-sample draw.

    Replication r draws (Y1, Y2) jointly from the paired model on stream r,
    fits y_hat = H Y1, and scores mean squared error against Y1 (train), Y2
    (test) and an independent fresh draw Y* from N(X beta, Sigma) taken from
    the same stream. Y* deliberately carries no cross-covariance with Y1, so
    its mean matches the zero-covariance out-of-sample decomposition.
    """
    if reps < 1:
        raise DegenerateInput(f"reps must be >= 1, got {reps}")
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size != X.p:
        raise DimensionError(f"beta length {beta.size} != design columns {X.p}")
    if smoother.n != X.n:
        raise DimensionError(f"smoother size {smoother.n} != design rows {X.n}")
    bad = validate(cov)
    if bad is not None:
        raise bad
    if cov.inner.n != X.n:
        raise DimensionError(f"covariance size {cov.inner.n} != design rows {X.n}")

    n = X.n
    mu = X.values @ beta
    mu2 = np.concatenate([mu, mu])
    L_pair = cholesky_factor(materialize(cov))
    L_single = cholesky_factor(materialize(cov.inner))
    H = smoother.matrix

    # Matches sample_paired / sample_mvn draw-for-draw: 2n normals for the
    # pair, then n normals for the fresh draw, all on stream (seed, r).
    def one_rep(r: int):
        stream = SeededStream(seed, r)
        pair = mu2 + L_pair @ stream.normals(2 * n)
        y_star = mu + L_single @ stream.normals(n)
        fitted = H @ pair[:n]
        train = pair[:n] - fitted
        test = pair[n:] - fitted
        oos = y_star - fitted
        return train @ train / n, test @ test / n, oos @ oos / n

    res = run_replications(reps, 3, one_rep, threads=threads)
    return MonteCarloErrors(train=res[:, 0].copy(), test=res[:, 1].copy(), oos=res[:, 2].copy())
