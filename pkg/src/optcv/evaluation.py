"""Estimator evaluation over split plans, scheme comparison, and auxiliary tests.

A scheme's error estimate is the unweighted mean of per-plan test errors. The
true out-of-sample referent is always the error of the *full-data* fit against
an independent fresh draw from the same process, which is what a practitioner
extrapolates from a cross-validation number.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .covariance import CovarianceSpec, materialize, validate
from .designs import DesignMatrix, ols_fit
from .errors import DegenerateInput, DimensionError, InvalidSpec, SingularDesign
from .parallel import run_replications
from .sampling import SeededStream, cholesky_factor, sample_ar1
from .smoothers import knn_smoother
from .splitters import (
    SplitPlan,
    kfold,
    leave_one_group_out,
    network_neighborhood_split,
    non_dependent_cv,
    temporal_block,
)

# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OlsEstimator:
    """Least squares on the rows of a fixed design."""


@dataclass(frozen=True)
class KnnEstimator:
    """Time-ordered symmetric nearest-neighbor average; held-out points are
    predicted from their k nearest *training* neighbors."""

    k: int = 2


@dataclass(frozen=True)
class Lag1Estimator:
    """Linear autoregression of each value on its predecessor, fit on training
    pairs; held-out points are scored one step ahead from their actual
    predecessor value."""


Estimator = OlsEstimator | KnnEstimator | Lag1Estimator


def _nearest_train_mean(train_sorted: np.ndarray, y: np.ndarray, t: int, k: int) -> float:
    cand = train_sorted[train_sorted != t]
    if cand.size == 0:
        raise DegenerateInput(f"point {t} has no training neighbor")
    dist = np.abs(cand - t)
    order = np.lexsort((cand, dist))[: min(k, cand.size)]
    return float(y[cand[order]].mean())


def _knn_errors(y, plan: SplitPlan, k: int) -> tuple[float, float]:
    train = np.asarray(plan.train)
    if train.size < 2:
        raise DegenerateInput("knn needs at least 2 training points")
    train_fit = [_nearest_train_mean(train, y, t, k) for t in plan.train]
    test_fit = [_nearest_train_mean(train, y, t, k) for t in plan.test]
    train_err = float(np.mean((y[train] - np.asarray(train_fit)) ** 2))
    test_err = float(np.mean((y[np.asarray(plan.test)] - np.asarray(test_fit)) ** 2))
    return train_err, test_err


def _ols_errors(X: DesignMatrix, y, plan: SplitPlan) -> tuple[float, float]:
    train = np.asarray(plan.train)
    test = np.asarray(plan.test)
    if train.size < X.p:
        raise SingularDesign(
            f"training subset of size {train.size} cannot identify {X.p} coefficients"
        )
    sub = DesignMatrix(X.values[train], has_intercept=X.has_intercept, degree=X.degree)
    coef, fitted = ols_fit(sub, y[train])
    train_err = float(np.mean((y[train] - fitted) ** 2))
    pred = X.values[test] @ coef
    test_err = float(np.mean((y[test] - pred) ** 2))
    return train_err, test_err


def _lag1_coefficients(y: np.ndarray, train: set) -> np.ndarray:
    rows = [t for t in range(1, y.size) if t in train and (t - 1) in train]
    if len(rows) < 2:
        raise DegenerateInput("lag-1 fit needs at least 2 consecutive training pairs")
    A = np.column_stack([np.ones(len(rows)), y[np.asarray(rows) - 1]])
    b, *_ = np.linalg.lstsq(A, y[rows], rcond=None)
    return b


def _lag1_errors(y, plan: SplitPlan) -> tuple[float, float]:
    train = set(plan.train)
    a, b = _lag1_coefficients(y, train)
    fit_rows = [t for t in range(1, y.size) if t in train and (t - 1) in train]
    train_err = float(np.mean((y[fit_rows] - a - b * y[np.asarray(fit_rows) - 1]) ** 2))
    test_rows = [t for t in plan.test if t >= 1]
    if not test_rows:
        raise DegenerateInput("no test point has a predecessor to forecast from")
    test_rows = np.asarray(test_rows)
    test_err = float(np.mean((y[test_rows] - a - b * y[test_rows - 1]) ** 2))
    return train_err, test_err


def _knn_test_error(y, plan: SplitPlan, k: int) -> float:
    train = np.asarray(plan.train)
    fit = [_nearest_train_mean(train, y, t, k) for t in plan.test]
    return float(np.mean((y[np.asarray(plan.test)] - np.asarray(fit)) ** 2))


def _test_error(X, y, plan: SplitPlan, estimator: Estimator) -> float:
    # test-side only; skips the train-error work evaluate_split also does
    if isinstance(estimator, KnnEstimator):
        return _knn_test_error(y, plan, estimator.k)
    return evaluate_split(X, y, plan, estimator)[1]


def evaluate_split(X, y, plan: SplitPlan, estimator: Estimator) -> tuple[float, float]:
    """Fit on the plan's train rows only; return (train MSE, test MSE).

    X may be None for estimators that ignore features (knn, lag-1).
    """
    y = np.asarray(y, dtype=float).ravel()
    used = plan.train + plan.test + plan.discarded
    if max(used) >= y.size:
        raise DimensionError(f"plan index {max(used)} out of range for n={y.size}")
    if isinstance(estimator, OlsEstimator):
        if X is None:
            raise DimensionError("ols estimator needs a design matrix")
        if X.n != y.size:
            raise DimensionError(f"design rows {X.n} != response length {y.size}")
        return _ols_errors(X, y, plan)
    if isinstance(estimator, KnnEstimator):
        return _knn_errors(y, plan, estimator.k)
    if isinstance(estimator, Lag1Estimator):
        return _lag1_errors(y, plan)
    raise InvalidSpec(f"unknown estimator {type(estimator).__name__}")


# ---------------------------------------------------------------------------
# Scheme comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ar1Dgp:
    """Stationary AR(1) series of length n."""

    n: int
    phi: float
    sigma2: float


@dataclass(frozen=True)
class FixedDesignDgp:
    """Gaussian response over a fixed design: Y ~ N(X beta, Sigma)."""

    design: DesignMatrix
    beta: np.ndarray
    cov: CovarianceSpec

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).ravel()
        if beta.size != self.design.p:
            raise DimensionError(f"beta length {beta.size} != design columns {self.design.p}")
        bad = validate(self.cov)
        if bad is not None:
            raise bad
        object.__setattr__(self, "beta", beta)


Dgp = Ar1Dgp | FixedDesignDgp


@dataclass(frozen=True)
class Scheme:
    """A named split scheme: builds its plans for a series of length n."""

    tag: str
    build: Callable[[int, SeededStream], list[SplitPlan]]


def scheme_kfold(k: int) -> Scheme:
    return Scheme(tag=f"kfold_{k}", build=lambda n, stream: kfold(n, k, stream))


def scheme_loo() -> Scheme:
    return Scheme(tag="loo", build=lambda n, stream: kfold(n, n, stream))


def scheme_temporal_block(test_fraction: float = 0.2, gap: int = 0) -> Scheme:
    return Scheme(
        tag="temporal_block",
        build=lambda n, stream: [temporal_block(n, test_fraction, gap)],
    )


def scheme_non_dependent(k: int, gap: int) -> Scheme:
    return Scheme(
        tag=f"non_dependent_{k}",
        build=lambda n, stream: non_dependent_cv(n, k, gap),
    )


def scheme_leave_one_group_out(groups) -> Scheme:
    groups = tuple(groups)
    return Scheme(
        tag="leave_one_group_out",
        build=lambda n, stream: leave_one_group_out(groups),
    )


def scheme_network(adjacency, test_fraction: float, buffer: bool) -> Scheme:
    return Scheme(
        tag="network_buffered" if buffer else "network",
        build=lambda n, stream: [
            network_neighborhood_split(adjacency, test_fraction, buffer, stream)
        ],
    )


@dataclass(frozen=True)
class EstimateWithSE:
    mean: float
    se: float


@dataclass(frozen=True)
class SchemeComparison:
    """Mean error estimate per scheme versus the true out-of-sample mean."""

    schemes: dict
    true_oos: EstimateWithSE
    reps: int

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scheme", "mean_estimate", "mc_se"])
            for tag, est in self.schemes.items():
                writer.writerow([tag, repr(est.mean), repr(est.se)])
            writer.writerow(["true_oos", repr(self.true_oos.mean), repr(self.true_oos.se)])


def _true_error(dgp: Dgp, estimator: Estimator, y: np.ndarray, y_new: np.ndarray, cache: dict) -> float:
    if isinstance(estimator, OlsEstimator):
        _, fitted = ols_fit(dgp.design, y)
        return float(np.mean((y_new - fitted) ** 2))
    if isinstance(estimator, KnnEstimator):
        key = ("knn_H", y.size, estimator.k)
        if key not in cache:
            cache[key] = knn_smoother(y.size, estimator.k).matrix
        return float(np.mean((y_new - cache[key] @ y) ** 2))
    if isinstance(estimator, Lag1Estimator):
        a, b = _lag1_coefficients(y, set(range(y.size)))
        return float(np.mean((y_new[1:] - a - b * y_new[:-1]) ** 2))
    raise InvalidSpec(f"unknown estimator {type(estimator).__name__}")


def compare_schemes(
    dgp: Dgp,
    estimator: Estimator,
    schemes: list[Scheme],
    reps: int,
    seed: int,
    threads: int = 1,
) -> SchemeComparison:
    """Monte Carlo comparison of split schemes against true out-of-sample error.

    Per replication: simulate a fresh dataset, record each scheme's estimate
    (mean of its plans' test errors), and record the true error of the
    full-data fit on an independent second draw.
    """
    if reps < 1:
        raise DegenerateInput(f"reps must be >= 1, got {reps}")
    if not schemes:
        raise DegenerateInput("need at least one scheme")
    if isinstance(estimator, OlsEstimator) and not isinstance(dgp, FixedDesignDgp):
        raise InvalidSpec("ols estimator requires a fixed-design process")
    if isinstance(estimator, Lag1Estimator) and not isinstance(dgp, Ar1Dgp):
        raise InvalidSpec("lag-1 autoregression applies to the AR(1) process")
    tags = [s.tag for s in schemes]
    if len(set(tags)) != len(tags):
        raise InvalidSpec(f"duplicate scheme tags in {tags}")

    n = dgp.n if isinstance(dgp, Ar1Dgp) else dgp.design.n
    design = dgp.design if isinstance(dgp, FixedDesignDgp) else None
    cache: dict = {}
    if isinstance(dgp, FixedDesignDgp):
        cache["L"] = cholesky_factor(materialize(dgp.cov))
        cache["mu"] = dgp.design.values @ dgp.beta

    def draw(stream):
        if isinstance(dgp, Ar1Dgp):
            return sample_ar1(n, dgp.phi, dgp.sigma2, stream)
        return cache["mu"] + cache["L"] @ stream.normals(n)

    def one_rep(r: int):
        stream = SeededStream(seed, r)
        y = draw(stream)
        y_new = draw(stream)
        row = []
        for scheme in schemes:
            plans = scheme.build(n, stream)
            row.append(float(np.mean([_test_error(design, y, p, estimator) for p in plans])))
        row.append(_true_error(dgp, estimator, y, y_new, cache))
        return row

    res = run_replications(reps, len(schemes) + 1, one_rep, threads=threads)

    def summarize(col: np.ndarray) -> EstimateWithSE:
        se = float(col.std(ddof=1) / math.sqrt(reps)) if reps > 1 else float("nan")
        return EstimateWithSE(mean=float(col.mean()), se=se)

    return SchemeComparison(
        schemes={tag: summarize(res[:, j]) for j, tag in enumerate(tags)},
        true_oos=summarize(res[:, -1]),
        reps=reps,
    )


# ---------------------------------------------------------------------------
# Paired-comparison significance test
# ---------------------------------------------------------------------------


def mcnemar_test(b: int, c: int, mode: str = "chi_square_corrected") -> tuple[float, float]:
    """Paired-comparison test on the discordant counts of a 2x2 table.

    chi_square_corrected: statistic (|b - c| - 1)^2 / (b + c) against the
    upper tail of chi-square with 1 degree of freedom. exact_binomial:
    two-sided binomial test of b successes in b + c trials at rate 1/2
    (the statistic reported is b).
    """
    if b < 0 or c < 0:
        raise DegenerateInput(f"counts must be non-negative, got b={b}, c={c}")
    if b + c == 0:
        raise DegenerateInput("b + c must be at least 1")
    if mode == "chi_square_corrected":
        statistic = (abs(b - c) - 1) ** 2 / (b + c)
        # chi2(1) survival function via the complementary error function
        p_value = math.erfc(math.sqrt(statistic / 2.0))
        return float(statistic), float(p_value)
    if mode == "exact_binomial":
        m = b + c
        tail = sum(Fraction(math.comb(m, i), 2**m) for i in range(min(b, c) + 1))
        p_value = min(Fraction(1), 2 * tail)
        return float(b), float(p_value)
    raise InvalidSpec(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Survey-error identity (quality x quantity x difficulty)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MengDecomposition:
    """error = data_quality * data_quantity * difficulty, exactly.

    data_quality is the finite-population correlation between responding and
    the value; data_quantity is sqrt((N - n)/n); difficulty is the population
    standard deviation (divisor N). quality_defined is False in the degenerate
    cases n = N or zero population variance, where the error is exactly zero
    and the correlation is undefined.
    """

    data_quality: float
    data_quantity: float
    difficulty: float
    error: float
    quality_defined: bool = True


def meng_decomposition(population, responded) -> MengDecomposition:
    pop = np.asarray(population, dtype=float).ravel()
    resp = np.asarray(responded).ravel().astype(bool)
    if pop.size != resp.size:
        raise DimensionError(f"lengths differ: {pop.size} vs {resp.size}")
    if pop.size == 0:
        raise DegenerateInput("population is empty")
    N = pop.size
    n = int(resp.sum())
    if n == 0:
        raise DegenerateInput("no responders: error undefined")

    difficulty = float(pop.std())  # divisor N
    quantity = math.sqrt((N - n) / n)
    if n == N or difficulty == 0.0:
        return MengDecomposition(
            data_quality=float("nan"),
            data_quantity=quantity,
            difficulty=difficulty,
            error=0.0,
            quality_defined=False,
        )
    error = float(pop[resp].mean() - pop.mean())
    r = resp.astype(float)
    cov = float((r * pop).mean() - r.mean() * pop.mean())
    sd_r = math.sqrt(r.mean() * (1.0 - r.mean()))
    quality = cov / (sd_r * difficulty)
    return MengDecomposition(
        data_quality=quality,
        data_quantity=quantity,
        difficulty=difficulty,
        error=error,
        quality_defined=True,
    )
