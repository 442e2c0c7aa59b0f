"""Logistic-model log densities for binary outcome / binary exposure data.

All densities are returned on the log scale and only up to an additive
constant: the sampler works with differences of log densities, so
normalising constants (including that of an improper flat prior) cancel.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Dataset",
    "Flat",
    "Normal",
    "Prior",
    "LogisticPosterior",
    "expit",
    "log_expit",
    "log_likelihood",
    "log_prior",
    "log_posterior",
]


def expit(x: float) -> float:
    """Inverse logit, evaluated without overflow for any finite ``x``."""
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def log_expit(x: float) -> float:
    """``log(expit(x))``; the branch at zero keeps ``exp`` from overflowing."""
    if x >= 0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


@dataclass(frozen=True)
class Dataset:
    """Aggregated binary data: ``rows`` holds ``(y, x, count)`` cells.

    Cells are merged and sorted on construction, so two datasets holding
    the same observations compare equal however they were built.
    """

    rows: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        merged: Counter = Counter()
        for y, x, count in self.rows:
            if y not in (0, 1) or x not in (0, 1):
                raise ValueError(f"y and x must be 0 or 1, got y={y!r}, x={x!r}")
            if int(count) != count or count < 1:
                raise ValueError(f"counts must be positive integers, got {count!r}")
            merged[(int(y), int(x))] += int(count)
        object.__setattr__(
            self, "rows", tuple((y, x, n) for (y, x), n in sorted(merged.items()))
        )

    @classmethod
    def from_records(cls, records: Iterable[tuple[int, int]]) -> "Dataset":
        """Collapse record-level ``(y, x)`` pairs into weighted cells."""
        return cls(tuple((y, x, 1) for y, x in records))

    def expand(self) -> list[tuple[int, int]]:
        """Record-level view; inverse of :meth:`from_records` up to ordering."""
        return [(y, x) for y, x, n in self.rows for _ in range(n)]

    @property
    def total(self) -> int:
        return sum(n for _, _, n in self.rows)

    @property
    def cases(self) -> int:
        return sum(n for y, _, n in self.rows if y == 1)

    def count(self, y: int, x: int) -> int:
        for yy, xx, n in self.rows:
            if (yy, xx) == (y, x):
                return n
        return 0

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(y, x, count)`` as float64 arrays, in canonical cell order."""
        if not self.rows:
            empty = np.empty(0)
            return empty, empty.copy(), empty.copy()
        y, x, n = (np.array(col, dtype=np.float64) for col in zip(*self.rows))
        return y, x, n


@dataclass(frozen=True)
class Flat:
    """Improper uniform prior on the real line."""

    def __str__(self):
        return "flat"


@dataclass(frozen=True)
class Normal:
    mean: float
    variance: float

    def __post_init__(self):
        if not (self.variance > 0 and math.isfinite(self.variance)):
            raise ValueError(f"normal prior variance must be positive, got {self.variance!r}")
        if not math.isfinite(self.mean):
            raise ValueError(f"normal prior mean must be finite, got {self.mean!r}")

    def __str__(self):
        return f"normal({self.mean!r}, {self.variance!r})"


@dataclass(frozen=True)
class Prior:
    """Independent per-component priors, each :class:`Flat` or :class:`Normal`."""

    components: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        for c in self.components:
            if not isinstance(c, (Flat, Normal)):
                raise TypeError(f"prior components must be Flat or Normal, got {c!r}")

    @classmethod
    def flat(cls, d: int = 2) -> "Prior":
        return cls((Flat(),) * d)

    def __len__(self):
        return len(self.components)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(is_normal, mean, variance)``; flat slots hold mean 0, variance 1."""
        is_normal = np.array([isinstance(c, Normal) for c in self.components], dtype=np.uint8)
        mean = np.array([getattr(c, "mean", 0.0) for c in self.components], dtype=np.float64)
        var = np.array([getattr(c, "variance", 1.0) for c in self.components], dtype=np.float64)
        return is_normal, mean, var


def log_likelihood(beta: Sequence[float], data: Dataset) -> float:
    """Binomial log-likelihood of ``expit(beta0 + beta1 * x)``.

    Sums ``count * log P(y | x)`` over cells.  The operation order is
    mirrored exactly by the compiled kernel so both give identical bits.
    """
    b0 = float(beta[0])
    b1 = float(beta[1])
    s = 0.0
    for y, x, n in data.rows:
        eta = b0 + b1 * x
        if y == 1:
            s += n * log_expit(eta)
        else:
            s += n * log_expit(-eta)
    return s


def log_prior(beta: Sequence[float], prior: Prior) -> float:
    """Sum of normal log-kernels; flat components contribute exactly zero."""
    s = 0.0
    for b, c in zip(beta, prior.components):
        if isinstance(c, Normal):
            dev = float(b) - c.mean
            s -= dev * dev / (2.0 * c.variance)
    return s


def log_posterior(beta: Sequence[float], data: Dataset, prior: Prior) -> float:
    return log_likelihood(beta, data) + log_prior(beta, prior)


class LogisticPosterior:
    """Callable target ``beta -> log_posterior(beta, data, prior)``.

    The sampler recognises this class and hands it to the compiled kernel
    when one is available; any other callable runs on the Python path.
    """

    def __init__(self, data: Dataset, prior: Prior | None = None):
        if prior is None:
            prior = Prior.flat(2)
        if len(prior) != 2:
            raise ValueError(f"the logistic model has 2 parameters, prior has {len(prior)}")
        self.data = data
        self.prior = prior
        self.dim = 2

    def __call__(self, beta: Sequence[float]) -> float:
        return log_likelihood(beta, self.data) + log_prior(beta, self.prior)

    def __repr__(self):
        return f"LogisticPosterior(n={self.data.total}, prior={[str(c) for c in self.prior.components]})"
