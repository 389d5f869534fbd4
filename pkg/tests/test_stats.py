import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quantcs.exceptions import DomainError
from quantcs.stats import (RandomStream, derive_seed, log_normal_interval, normal_cdf,
                           normal_pdf, normal_quantile, normal_sf, sample_gaussians,
                           truncated_svd)

mp.mp.dps = 40


def _phi_oracle(x):
    return float(mp.ncdf(mp.mpf(x)))


@pytest.mark.parametrize("x", [-37.0, -8.0, -3.3, -0.5, 0.0, 0.9816, 1.7, 6.0])
def test_normal_cdf_matches_mpmath(x):
    want = _phi_oracle(x)
    assert normal_cdf(x) == pytest.approx(want, rel=1e-13, abs=1e-300)


def test_normal_cdf_examples():
    assert normal_cdf(0.0) == 0.5
    # high-precision value is 0.8368515..., see decisions ledger
    assert abs(normal_cdf(0.9816) - 0.8368515262528525) < 1e-12
    assert normal_cdf(-8.0) < 1e-14
    assert normal_cdf(-8.0) <= normal_pdf(8.0) / 8.0


def test_normal_sf_tail():
    assert normal_sf(10.0) == pytest.approx(float(mp.ncdf(-10)), rel=1e-13)
    assert normal_sf(0.0) == 0.5


def test_normal_quantile_examples():
    assert normal_quantile(0.5) == 0.0
    assert normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-5)
    assert normal_quantile(0.69146) == pytest.approx(0.5, abs=1e-4)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_normal_quantile_domain(p):
    with pytest.raises(DomainError):
        normal_quantile(p)


@given(st.floats(min_value=1e-300, max_value=1 - 1e-16))
def test_quantile_cdf_roundtrip(p):
    x = normal_quantile(p)
    assert normal_cdf(x) == pytest.approx(p, rel=1e-9)


# widths below ~1e-4 lose relative accuracy (eps / width); bins are O(1) wide
@given(st.floats(-30, 30), st.floats(1e-4, 20.0))
@settings(max_examples=200)
def test_log_normal_interval_oracle(lo, width):
    hi = lo + width
    got = log_normal_interval(lo, hi)
    if lo > 0:
        lo, hi = -hi, -lo
    with mp.workdps(80):
        mass = mp.ncdf(hi) - mp.ncdf(lo)
    if mass == 0:
        assert got == -math.inf
    else:
        assert got == pytest.approx(float(mp.log(mass)), rel=1e-9, abs=1e-12)


def test_log_normal_interval_infinite_ends():
    assert log_normal_interval(-np.inf, np.inf) == 0.0
    assert log_normal_interval(0.0, np.inf) == pytest.approx(math.log(0.5))
    assert log_normal_interval(40.0, np.inf) == pytest.approx(float(mp.log(mp.ncdf(-40))), rel=1e-12)
    assert log_normal_interval(1.0, 1.0) == -math.inf


def test_derive_seed_reference_values():
    # SplitMix64 chain; pinned so ports can reproduce streams
    assert derive_seed(0) == 0xE220A8397B1DCDAF
    assert derive_seed(7, 1, 2) == derive_seed(7, 1, 2)
    assert derive_seed(7, 1, 2) != derive_seed(7, 2, 1)
    assert 0 <= derive_seed(2 ** 64 - 1, 3) < 2 ** 64


def test_sample_gaussians_determinism_and_empty():
    a = sample_gaussians(RandomStream(11), 100)
    b = sample_gaussians(RandomStream(11), 100)
    assert np.array_equal(a, b)
    assert sample_gaussians(RandomStream(11), 0).shape == (0,)
    with pytest.raises(DomainError):
        sample_gaussians(RandomStream(1), -1)


def test_sample_gaussians_moments():
    x = sample_gaussians(RandomStream(2024), 10 ** 6)
    assert abs(x.mean()) < 0.005
    assert abs(x.var() - 1.0) < 0.01


def test_spawn_is_independent_of_parent_state():
    s = RandomStream(5)
    c1 = s.spawn(3).normal(4)
    s.normal(10)
    c2 = s.spawn(3).normal(4)
    assert np.array_equal(c1, c2)


def test_random_stream_rejects_bad_seed():
    with pytest.raises(DomainError):
        RandomStream(-1)


def test_truncated_svd_examples():
    u, v = np.array([1.0, 2.0, -1.0]), np.array([0.5, 3.0])
    U, s, V = truncated_svd(np.outer(u, v), 1)
    assert np.linalg.norm((U * s) @ V.T - np.outer(u, v)) < 1e-10
    _, s, _ = truncated_svd(np.diag([3.0, 2.0, 1.0]), 2)
    assert np.allclose(s, [3.0, 2.0])


def test_truncated_svd_against_gram_eigen_oracle():
    M = RandomStream(9).normal(24).reshape(6, 4)
    U, s, V = truncated_svd(M, 4)
    assert np.linalg.norm((U * s) @ V.T - M) < 1e-9
    w, _ = np.linalg.eigh(M.T @ M)
    assert np.allclose(np.sort(s ** 2)[::-1], w[::-1], atol=1e-10)
    assert np.allclose(U.T @ U, np.eye(4), atol=1e-12)


def test_truncated_svd_best_rank_r():
    M = RandomStream(10).normal(35).reshape(7, 5)
    U, s, V = truncated_svd(M, 2)
    best = np.linalg.norm((U * s) @ V.T - M)
    full = np.linalg.svd(M, compute_uv=False)
    assert best == pytest.approx(math.sqrt(np.sum(full[2:] ** 2)), rel=1e-12)


@pytest.mark.parametrize("r", [0, 5])
def test_truncated_svd_rank_domain(r):
    with pytest.raises(DomainError):
        truncated_svd(np.eye(4), r)
