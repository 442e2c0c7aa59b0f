"""Chain diagnostics: autocorrelation, effective sample size, MCSE, summaries."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateSeriesError

__all__ = [
    "PosteriorSummary",
    "autocorrelation",
    "autocorrelations",
    "effective_sample_size",
    "mc_standard_error",
    "percentiles",
    "summarize",
    "map_estimate",
]

MIN_ESS_LENGTH = 10


@dataclass(frozen=True)
class PosteriorSummary:
    mean: float
    median: float
    sd: float
    pct2_5: float
    pct97_5: float
    ess: float
    mcse: float
    mode: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def _as_series(series) -> np.ndarray:
    v = np.asarray(series, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a one-dimensional series, got shape {v.shape}")
    return v


def _check_variance(v: np.ndarray):
    if v.shape[0] < 2 or np.all(v == v[0]):
        raise DegenerateSeriesError("series has zero variance; autocorrelation is undefined")


def autocorrelation(series, lag: int) -> float:
    """Lag-``lag`` autocorrelation with the biased (length ``M``) normalisation."""
    v = _as_series(series)
    if not 0 <= lag < v.shape[0]:
        raise ValueError(f"lag must be in [0, {v.shape[0]}), got {lag}")
    _check_variance(v)
    c = v - v.mean()
    return float(np.dot(c[: c.shape[0] - lag], c[lag:]) / np.dot(c, c))


def autocorrelations(series) -> np.ndarray:
    """All lags ``0..M-1`` at once via a zero-padded FFT."""
    v = _as_series(series)
    _check_variance(v)
    n = v.shape[0]
    c = v - v.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(c, size)
    acov = np.fft.irfft(f * np.conjugate(f), size)[:n]
    return acov / acov[0]


def effective_sample_size(series) -> float:
    """``M / (1 + 2 sum rho_l)`` with Geyer's initial positive sequence.

    Autocorrelations are summed in pairs ``rho_{2k-1} + rho_{2k}``,
    stopping at the first non-positive pair.
    """
    v = _as_series(series)
    n = v.shape[0]
    if n < MIN_ESS_LENGTH:
        raise ValueError(f"effective sample size needs at least {MIN_ESS_LENGTH} values, got {n}")
    rho = autocorrelations(v)
    total = 0.0
    k = 1
    while 2 * k < n:
        pair = rho[2 * k - 1] + rho[2 * k]
        if not pair > 0.0:
            break
        total += pair
        k += 1
    ess = n / (1.0 + 2.0 * total)
    return float(min(max(ess, np.finfo(float).tiny), n))


def mc_standard_error(series) -> float:
    """Sample SD over the square root of the effective sample size."""
    v = _as_series(series)
    return float(np.std(v, ddof=1) / math.sqrt(effective_sample_size(v)))


def percentiles(series, q=(2.5, 97.5)) -> np.ndarray:
    """Percentiles by linear interpolation between order statistics."""
    return np.percentile(_as_series(series), q, method="linear")


def summarize(series) -> PosteriorSummary:
    """Moments, median, 95% percentile interval, ESS and MCSE.

    ESS and MCSE are NaN when the series is too short or constant; the
    remaining fields are always filled in.
    """
    v = _as_series(series)
    if v.shape[0] == 0:
        raise ValueError("cannot summarise an empty series")
    lo, hi = percentiles(v)
    sd = float(np.std(v, ddof=1)) if v.shape[0] > 1 else math.nan
    try:
        ess = effective_sample_size(v)
        mcse = sd / math.sqrt(ess)
    except (DegenerateSeriesError, ValueError):
        ess = mcse = math.nan
    return PosteriorSummary(
        mean=float(np.mean(v)),
        median=float(np.median(v)),
        sd=sd,
        pct2_5=float(lo),
        pct97_5=float(hi),
        ess=ess,
        mcse=mcse,
    )


def map_estimate(chain) -> np.ndarray:
    """Draw with the highest stored log posterior (first one on ties)."""
    log_posts = np.asarray(chain.log_posts)
    if log_posts.shape[0] == 0:
        raise ValueError("chain is empty")
    return np.array(chain.draws[int(np.argmax(log_posts))])
