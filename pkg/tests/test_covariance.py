import numpy as np
import pytest

from optcv.covariance import (
    AR1,
    Equicorrelated,
    GroupBlock,
    IID,
    PairedCross,
    ar1_autocovariance,
    materialize,
    validate,
)
from optcv.errors import InvalidSpec


def gamma(phi, sigma2, h):
    # independent restatement of the stationary AR(1) autocovariance
    return sigma2 * phi ** abs(h) / (1.0 - phi * phi)


def test_zero_correlation_is_iid():
    np.testing.assert_array_equal(
        materialize(Equicorrelated(sigma2=1.0, rho=0.0, n=3)), np.eye(3)
    )
    np.testing.assert_array_equal(materialize(IID(sigma2=2.0, n=2)), 2.0 * np.eye(2))


def test_ar1_toeplitz_entries():
    got = materialize(AR1(sigma2=1.0, phi=0.5, n=3))
    expected = np.array(
        [
            [4.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0],
            [2.0 / 3.0, 4.0 / 3.0, 2.0 / 3.0],
            [1.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0],
        ]
    )
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-15)


def test_ar1_entries_equal_autocovariance_exactly():
    spec = AR1(sigma2=0.7, phi=-0.6, n=8)
    sigma = materialize(spec)
    for i in range(8):
        for j in range(8):
            assert sigma[i, j] == ar1_autocovariance(spec.phi, spec.sigma2, abs(i - j))


def test_equicorrelated_lower_bound_rejected():
    spec = Equicorrelated(sigma2=1.0, rho=-0.5, n=100)
    assert isinstance(validate(spec), InvalidSpec)
    with pytest.raises(InvalidSpec):
        materialize(spec)


def test_just_inside_the_bound_is_positive_definite():
    spec = Equicorrelated(sigma2=1.0, rho=-1.0 / 99.0 + 1e-6, n=100)
    assert validate(spec) is None
    np.linalg.cholesky(materialize(spec))  # must succeed


def test_ar1_stationarity_bound():
    assert isinstance(validate(AR1(sigma2=1.0, phi=1.0, n=5)), InvalidSpec)
    assert isinstance(validate(AR1(sigma2=1.0, phi=-1.0, n=5)), InvalidSpec)
    with pytest.raises(InvalidSpec):
        ar1_autocovariance(1.0, 1.0, 0)


def test_group_block_positive_definite():
    spec = GroupBlock(sigma2=1.0, rho_within=0.9, groups=("a",) * 5 + ("b",) * 5)
    assert validate(spec) is None
    sigma = materialize(spec)
    eigs = np.sort(np.linalg.eigvalsh(sigma))
    # each size-5 block has eigenvalues 1 + 4 rho (once) and 1 - rho (x4)
    np.testing.assert_allclose(eigs[:8], 0.1, atol=1e-10)
    np.testing.assert_allclose(eigs[8:], 4.6, atol=1e-10)
    bad = GroupBlock(sigma2=1.0, rho_within=-0.3, groups=("a",) * 5)
    assert isinstance(validate(bad), InvalidSpec)


def test_paired_cross_structure_and_bound():
    inner = Equicorrelated(sigma2=1.0, rho=0.5, n=4)
    spec = PairedCross(inner=inner, cross_rho=0.5)
    assert validate(spec) is None
    sigma = materialize(spec)
    assert sigma.shape == (8, 8)
    np.testing.assert_array_equal(sigma[:4, :4], materialize(inner))
    np.testing.assert_array_equal(sigma[4:, :4], 0.5 * np.ones((4, 4)))
    np.linalg.cholesky(sigma)
    # cross correlation beyond (1 + (n-1) rho)/n breaks positive definiteness
    too_big = PairedCross(inner=inner, cross_rho=0.7)
    assert isinstance(validate(too_big), InvalidSpec)


def test_paired_cross_with_matching_rho_is_2n_equicorrelated():
    spec = PairedCross(inner=Equicorrelated(sigma2=2.0, rho=0.3, n=5), cross_rho=0.3)
    sigma = materialize(spec)
    np.testing.assert_allclose(sigma, materialize(Equicorrelated(sigma2=2.0, rho=0.3, n=10)))


def test_autocovariance_values():
    assert abs(ar1_autocovariance(0.5, 1.0, 0) - 4.0 / 3.0) < 1e-15
    assert abs(ar1_autocovariance(0.5, 1.0, 1) - 2.0 / 3.0) < 1e-15
    assert ar1_autocovariance(0.5, 1.0, -1) == ar1_autocovariance(0.5, 1.0, 1)
    assert ar1_autocovariance(0.0, 1.0, 3) == 0.0


def test_autocovariance_against_simulated_path():
    # independent oracle: plain numpy AR recursion, not the package sampler
    rng = np.random.default_rng(11)
    n = 500_000
    phi, sigma2 = 0.5, 1.0
    e = rng.standard_normal(n)
    y = np.empty(n)
    y[0] = e[0] / np.sqrt(1 - phi * phi)
    for t in range(1, n):
        y[t] = phi * y[t - 1] + e[t]
    assert abs(np.mean(y * y) - gamma(phi, sigma2, 0)) < 0.02
    assert abs(np.mean(y[1:] * y[:-1]) - gamma(phi, sigma2, 1)) < 0.02


@pytest.mark.parametrize(
    "spec",
    [
        IID(sigma2=0.5, n=6),
        Equicorrelated(sigma2=1.3, rho=0.45, n=9),
        Equicorrelated(sigma2=1.0, rho=-0.05, n=12),
        AR1(sigma2=2.0, phi=0.8, n=15),
        AR1(sigma2=1.0, phi=-0.9, n=7),
        GroupBlock(sigma2=1.0, rho_within=0.5, groups=(0, 0, 1, 1, 1, 2)),
        PairedCross(inner=Equicorrelated(sigma2=1.0, rho=0.2, n=6), cross_rho=0.1),
    ],
)
def test_every_valid_spec_materializes_symmetric_pd(spec):
    assert validate(spec) is None
    sigma = materialize(spec)
    np.testing.assert_array_equal(sigma, sigma.T)
    np.linalg.cholesky(sigma)


def test_equicorrelated_eigenvalues():
    n, rho, s2 = 40, 0.35, 1.7
    eigs = np.sort(np.linalg.eigvalsh(materialize(Equicorrelated(s2, rho, n))))
    assert abs(eigs[-1] - s2 * (1 + (n - 1) * rho)) <= 1e-8
    assert np.abs(eigs[:-1] - s2 * (1 - rho)).max() <= 1e-8


def test_sigma2_must_be_positive():
    assert isinstance(validate(Equicorrelated(sigma2=0.0, rho=0.1, n=3)), InvalidSpec)
    assert isinstance(validate(AR1(sigma2=-1.0, phi=0.2, n=3)), InvalidSpec)
