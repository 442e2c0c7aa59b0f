"""Odds ratios, incidence-calibrated risk differences, and the ML comparator.

Case-control data identify the odds ratio but not absolute risks.  A risk
difference needs one extra number, the population incidence ``I``: the
intercept is shifted by an offset ``delta`` until the model's marginal
risk ``(1 - p1) expit(b0 + delta) + p1 expit(b0 + delta + b1)`` matches
``I``, with ``p1`` the population exposure prevalence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend, _pykernel
from .diagnostics import PosteriorSummary, percentiles, summarize
from .errors import CalibrationRangeError, SeparationError
from .target import Dataset, expit

__all__ = [
    "TwoByTwo",
    "MLEResult",
    "RDPosterior",
    "BootstrapReport",
    "DEFAULT_INCIDENCE",
    "OFFSET_BRACKET",
    "mle_2x2",
    "calibrate_offset",
    "calibrate_offsets",
    "calibration_residual",
    "risk_difference",
    "rd_posterior",
    "odds_ratio_summary",
    "bootstrap_mle",
]

DEFAULT_INCIDENCE = 4.8e-5
OFFSET_BRACKET = (-40.0, 10.0)
Z_975 = 1.959963984540054


@dataclass(frozen=True)
class TwoByTwo:
    """Case-control counts: ``a``/``b`` exposed/unexposed cases, ``c``/``d`` controls."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in "abcd":
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"cell {name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.a + self.b == 0 or self.c + self.d == 0:
            raise ValueError("both the case and the control margins must be positive")

    @classmethod
    def from_dataset(cls, data: Dataset) -> "TwoByTwo":
        return cls(data.count(1, 1), data.count(1, 0), data.count(0, 1), data.count(0, 0))

    def to_dataset(self) -> Dataset:
        cells = ((1, 1, self.a), (1, 0, self.b), (0, 1, self.c), (0, 0, self.d))
        return Dataset(tuple(cell for cell in cells if cell[2] > 0))

    @property
    def cases(self) -> int:
        return self.a + self.b

    @property
    def controls(self) -> int:
        return self.c + self.d

    @property
    def control_exposure_prevalence(self) -> float:
        return self.c / self.controls


@dataclass(frozen=True)
class MLEResult:
    beta: np.ndarray
    se_beta1: float

    @property
    def odds_ratio(self) -> float:
        return math.exp(self.beta[1])

    def wald_ci(self) -> tuple[float, float]:
        """95% Wald interval for the odds ratio."""
        b1 = self.beta[1]
        return math.exp(b1 - Z_975 * self.se_beta1), math.exp(b1 + Z_975 * self.se_beta1)


def mle_2x2(table: TwoByTwo) -> MLEResult:
    """Closed-form logistic MLE for a single binary exposure.

    The model is saturated, so ``b1`` is the log cross-product ratio and
    ``b0`` the log case/control odds among the unexposed.
    """
    for name in "abcd":
        if getattr(table, name) == 0:
            raise SeparationError(name)
    a, b, c, d = table.a, table.b, table.c, table.d
    beta = np.array([math.log(b / d), math.log(a * d / (b * c))])
    se = math.sqrt(1 / a + 1 / b + 1 / c + 1 / d)
    return MLEResult(beta, se)


def calibration_residual(beta, delta: float, incidence: float, exposure_prevalence: float) -> float:
    b0, b1 = float(beta[0]), float(beta[1])
    p1 = exposure_prevalence
    return (1.0 - p1) * expit(b0 + delta) + p1 * expit(b0 + delta + b1) - incidence


def _check_calibration_inputs(incidence, exposure_prevalence):
    if not 0.0 < incidence < 1.0:
        raise ValueError(f"incidence must lie in (0, 1), got {incidence!r}")
    if not 0.0 <= exposure_prevalence <= 1.0:
        raise ValueError(f"exposure prevalence must lie in [0, 1], got {exposure_prevalence!r}")


def calibrate_offset(beta, incidence: float = DEFAULT_INCIDENCE, exposure_prevalence: float = 0.0,
                     bracket: tuple[float, float] = OFFSET_BRACKET) -> float:
    """Intercept shift matching the marginal risk to ``incidence`` (bisection).

    The marginal risk is strictly increasing in the offset, so the root in
    ``bracket`` is unique; bisection runs until the bracket stops shrinking.
    """
    _check_calibration_inputs(incidence, exposure_prevalence)
    lo, hi = bracket
    if not (calibration_residual(beta, lo, incidence, exposure_prevalence) < 0.0
            < calibration_residual(beta, hi, incidence, exposure_prevalence)):
        raise CalibrationRangeError(
            f"incidence {incidence!r} is not attainable for offsets in [{lo}, {hi}] at beta={list(beta)}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if calibration_residual(beta, mid, incidence, exposure_prevalence) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def calibrate_offsets(draws, incidence: float = DEFAULT_INCIDENCE, exposure_prevalence: float = 0.0,
                      backend: str = "auto") -> np.ndarray:
    """Per-draw offsets for an ``(n, 2)`` array of ``(b0, b1)`` draws."""
    _check_calibration_inputs(incidence, exposure_prevalence)
    draws = np.asarray(draws, dtype=np.float64)
    b0 = np.ascontiguousarray(draws[:, 0])
    b1 = np.ascontiguousarray(draws[:, 1])
    lo, hi = OFFSET_BRACKET
    kernel = _backend.compiled() if _backend.use_compiled(backend) else _pykernel
    offsets, ok = kernel.calibrate_offsets(b0, b1, float(incidence), float(exposure_prevalence), lo, hi)
    if not np.all(ok):
        bad = int(np.flatnonzero(~np.asarray(ok))[0])
        raise CalibrationRangeError(
            f"incidence {incidence!r} is not attainable for offsets in [{lo}, {hi}] "
            f"at beta={draws[bad].tolist()}",
            index=bad,
        )
    return np.asarray(offsets)


def risk_difference(beta, delta: float) -> float:
    """Exposed minus unexposed risk at the calibrated intercept (natural scale)."""
    b0, b1 = float(beta[0]), float(beta[1])
    return expit(b0 + delta + b1) - expit(b0 + delta)


@dataclass(frozen=True)
class RDPosterior:
    summary: PosteriorSummary
    rd: np.ndarray
    offsets: np.ndarray
    residuals: np.ndarray
    offset_mode: str


def _draws_of(chain_or_draws) -> np.ndarray:
    draws = getattr(chain_or_draws, "draws", chain_or_draws)
    draws = np.asarray(draws, dtype=np.float64)
    if draws.ndim != 2 or draws.shape[1] != 2 or draws.shape[0] == 0:
        raise ValueError(f"expected a non-empty (n, 2) array of draws, got shape {draws.shape}")
    return draws


def rd_posterior(chain, incidence: float = DEFAULT_INCIDENCE, exposure_prevalence: float = 0.0,
                 offset: str = "per-draw", reference_beta=None, backend: str = "auto") -> RDPosterior:
    """Risk-difference draws and their summary (natural scale).

    ``offset="per-draw"`` solves the calibration for every draw.
    ``offset="fixed"`` solves it once at ``reference_beta`` (usually the
    MLE) and applies that single offset to every draw.
    """
    draws = _draws_of(chain)
    p1 = exposure_prevalence
    if offset == "per-draw":
        offsets = calibrate_offsets(draws, incidence, p1, backend=backend)
    elif offset == "fixed":
        if reference_beta is None:
            raise ValueError("offset='fixed' needs reference_beta")
        offsets = np.full(draws.shape[0], calibrate_offset(reference_beta, incidence, p1))
    else:
        raise ValueError(f"offset must be 'per-draw' or 'fixed', got {offset!r}")
    kernel = _backend.compiled() if _backend.use_compiled(backend) else _pykernel
    rd, residuals = kernel.rd_draws(
        np.ascontiguousarray(draws[:, 0]), np.ascontiguousarray(draws[:, 1]),
        np.ascontiguousarray(offsets, dtype=np.float64), float(incidence), float(p1),
    )
    return RDPosterior(summarize(rd), rd, offsets, residuals, offset)


def odds_ratio_summary(chain) -> PosteriorSummary:
    """Summary of ``exp(b1)``; its median is the point estimate."""
    return summarize(np.exp(_draws_of(chain)[:, 1]))


@dataclass(frozen=True)
class BootstrapReport:
    """Stratified bootstrap of the 2x2 MLE.

    ``beta1`` and ``rd`` hold NaN for separated resamples.  When any
    resample separated, ``reliable`` is False: the percentile intervals
    then describe only the surviving resamples and are biased.
    """

    resamples: int
    tables: np.ndarray
    beta1: np.ndarray
    rd: np.ndarray
    separated: int
    or_ci: tuple[float, float]
    rd_ci: tuple[float, float]

    @property
    def separated_fraction(self) -> float:
        return self.separated / self.resamples

    @property
    def reliable(self) -> bool:
        return self.separated == 0


def bootstrap_mle(table: TwoByTwo, B: int, seed: int, incidence: float = DEFAULT_INCIDENCE,
                  exposure_prevalence: float | None = None) -> BootstrapReport:
    """Resample cases and controls separately, refitting each with ``mle_2x2``.

    Resampling ``n`` subjects with replacement from a stratum and counting
    the exposed is a binomial draw, which is how the tables are generated.
    """
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    if exposure_prevalence is None:
        exposure_prevalence = table.control_exposure_prevalence
    rng = np.random.default_rng(seed)
    a = rng.binomial(table.cases, table.a / table.cases, size=B)
    c = rng.binomial(table.controls, table.c / table.controls, size=B)
    tables = np.column_stack([a, table.cases - a, c, table.controls - c])
    beta1 = np.full(B, np.nan)
    rd = np.full(B, np.nan)
    separated = 0
    for i, cells in enumerate(tables):
        try:
            fit = mle_2x2(TwoByTwo(*cells))
        except SeparationError:
            separated += 1
            continue
        beta1[i] = fit.beta[1]
        delta = calibrate_offset(fit.beta, incidence, exposure_prevalence)
        rd[i] = risk_difference(fit.beta, delta)
    ok = ~np.isnan(beta1)
    if ok.any():
        or_lo, or_hi = np.exp(percentiles(beta1[ok]))
        rd_lo, rd_hi = percentiles(rd[ok])
    else:
        or_lo = or_hi = rd_lo = rd_hi = math.nan
    return BootstrapReport(B, tables, beta1, rd, separated, (float(or_lo), float(or_hi)),
                           (float(rd_lo), float(rd_hi)))
