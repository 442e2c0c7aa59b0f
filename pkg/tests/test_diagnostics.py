import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from metropolis_epi.diagnostics import (
    autocorrelation, autocorrelations, effective_sample_size, map_estimate, mc_standard_error, percentiles, summarize,
)
from metropolis_epi.errors import DegenerateSeriesError


def ar1(rho, n, rng):
    e = rng.standard_normal(n)
    v = np.empty(n)
    v[0] = e[0] / math.sqrt(1 - rho * rho)
    for j in range(1, n):
        v[j] = rho * v[j - 1] + e[j]
    return v


def ess_oracle(v):
    # loop form of the estimator, autocorrelations from the direct sum
    n = len(v)
    c = [x - sum(v) / n for x in v]
    denom = sum(x * x for x in c)

    def rho(lag):
        return sum(c[j] * c[j + lag] for j in range(n - lag)) / denom

    total, k = 0.0, 1
    while 2 * k < n:
        pair = rho(2 * k - 1) + rho(2 * k)
        if pair <= 0:
            break
        total += pair
        k += 1
    return min(n / (1 + 2 * total), n)


def test_lag_zero_is_one(rng):
    assert autocorrelation(rng.standard_normal(50), 0) == pytest.approx(1.0)


def test_alternating_series():
    v = np.tile([1.0, -1.0], 500)
    assert autocorrelation(v, 1) == pytest.approx(-0.999, abs=1e-3)


def test_white_noise_lag1(rng):
    assert abs(autocorrelation(rng.standard_normal(10_000), 1)) < 0.05


def test_fft_matches_direct(rng):
    v = ar1(0.7, 500, rng)
    rho = autocorrelations(v)
    for lag in (0, 1, 2, 7, 50, 499):
        assert rho[lag] == pytest.approx(autocorrelation(v, lag), abs=1e-12)


def test_degenerate_series():
    with pytest.raises(DegenerateSeriesError):
        autocorrelation(np.ones(20), 1)
    with pytest.raises(DegenerateSeriesError):
        effective_sample_size(np.full(20, 3.0))


def test_short_series():
    with pytest.raises(ValueError):
        effective_sample_size(np.arange(9.0))


def test_ess_iid(rng):
    assert effective_sample_size(rng.standard_normal(10_000)) == pytest.approx(10_000, rel=0.15)


def test_ess_ar1(rng):
    assert effective_sample_size(ar1(0.9, 100_000, rng)) == pytest.approx(100_000 / 19, rel=0.20)


@pytest.mark.parametrize("seed", range(5))
def test_ess_matches_loop_oracle(seed):
    v = ar1(0.5, 300, np.random.default_rng(seed))
    assert effective_sample_size(v) == pytest.approx(ess_oracle(v.tolist()), rel=1e-10)


def test_ess_bounds(rng):
    for rho in (-0.5, 0.0, 0.95):
        e = effective_sample_size(ar1(rho, 2000, rng))
        assert 0 < e <= 2000


def test_mcse_iid(rng):
    assert mc_standard_error(rng.standard_normal(10_000)) == pytest.approx(0.01, rel=0.20)


@settings(max_examples=40)
@given(arrays(np.float64, 40, elements=st.floats(-100, 100)).filter(lambda a: np.ptp(a) > 1e-3),
       st.floats(-50, 50).filter(lambda k: abs(k) > 1e-3), st.floats(-100, 100))
def test_affine_invariance(v, k, b):
    assert effective_sample_size(k * v + b) == pytest.approx(effective_sample_size(v), rel=1e-6)
    assert mc_standard_error(k * v + b) == pytest.approx(abs(k) * mc_standard_error(v), rel=1e-6)


def test_mcse_coverage():
    # the mean of an AR(1) series should sit within 1.96 MCSE of zero ~95% of the time
    rng = np.random.default_rng(2024)
    hits = sum(abs(v.mean()) < 1.96 * mc_standard_error(v) for v in (ar1(0.8, 4000, rng) for _ in range(400)))
    assert 0.91 <= hits / 400 <= 0.98


def test_percentiles_linear():
    lo, hi = percentiles(np.arange(1.0, 1001.0))
    assert lo == pytest.approx(1 + 0.025 * 999)
    assert hi == pytest.approx(1 + 0.975 * 999)


def test_summarize_small():
    s = summarize([1.0, 2.0, 3.0])
    assert (s.mean, s.median, s.sd) == (2.0, 2.0, 1.0)
    assert math.isnan(s.ess) and math.isnan(s.mcse)
    assert s.pct2_5 <= s.median <= s.pct97_5


def test_summarize_ordering(rng):
    s = summarize(rng.standard_normal(5000) ** 3)
    assert s.pct2_5 <= s.median <= s.pct97_5
    assert 0 < s.ess <= 5000


def test_map_estimate():
    class C:
        draws = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
        log_posts = np.array([-3.0, -1.0, -1.0])

    np.testing.assert_array_equal(map_estimate(C), [2.0, 3.0])
