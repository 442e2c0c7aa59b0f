"""Metropolis chains: random-walk, guided, and guided-adaptive variants.

The random-walk variant proposes a joint move ``current + L z`` from a
multivariate normal with covariance ``proposal_cov = L L^T`` and accepts or
rejects it as a whole.

The guided variants follow Gustafson's guided walk and update one
component at a time.  Each component ``k`` carries a direction
``s_k in {-1, +1}`` and proposes ``current_k + s_k |sqrt(cov_kk) z|``; the
direction is kept after an acceptance and reversed after a rejection.
One iteration is a sweep over all components.  The guided-adaptive
variant additionally replaces the proposal covariance during burn-in with
``(2.38^2 / d) (S + 1e-6 I)``, where ``S`` is the empirical covariance of
the burn-in draws so far, and freezes it once burn-in ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import _backend, _pykernel
from .errors import ConfigError
from .target import LogisticPosterior

__all__ = [
    "Variant",
    "SamplerConfig",
    "ChainState",
    "Chain",
    "DEFAULT_PROPOSAL_COV",
    "DEFAULT_SEED",
    "ADAPT_SCALE",
    "ADAPT_RIDGE",
    "proposal_factor",
    "propose",
    "log_acceptance",
    "metropolis_step",
    "adapt_covariance",
    "advance",
    "run_chain",
    "two_state_chain",
    "discrete_chain",
]

DEFAULT_PROPOSAL_COV = ((0.1, 0.0), (0.0, 0.1))
DEFAULT_SEED = 2021
ADAPT_SCALE = 2.38**2
ADAPT_RIDGE = 1e-6

Target = Callable[[np.ndarray], float]


class Variant(str, Enum):
    RANDOM_WALK = "random-walk"
    GUIDED = "guided"
    GUIDED_ADAPTIVE = "guided-adaptive"

    @property
    def guided(self) -> bool:
        return self is not Variant.RANDOM_WALK

    @property
    def label(self) -> str:
        return {"random-walk": "Random Walk", "guided": "Guided", "guided-adaptive": "Guided, Adaptive"}[self.value]

    @classmethod
    def parse(cls, text) -> "Variant":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("_", "-").replace(" ", "")
        aliases = {
            "random-walk": cls.RANDOM_WALK,
            "randomwalk": cls.RANDOM_WALK,
            "rw": cls.RANDOM_WALK,
            "guided": cls.GUIDED,
            "guided-adaptive": cls.GUIDED_ADAPTIVE,
            "guidedadaptive": cls.GUIDED_ADAPTIVE,
            "guided,adaptive": cls.GUIDED_ADAPTIVE,
            "ga": cls.GUIDED_ADAPTIVE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown sampler variant {text!r}") from None


def proposal_factor(cov) -> np.ndarray:
    """Lower Cholesky factor of ``cov``; the all-zero matrix maps to zeros.

    The zero matrix is accepted so tests can pin the chain in place.
    """
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError(f"proposal covariance must be square, got shape {cov.shape}")
    if not np.any(cov):
        return np.zeros_like(cov)
    return np.linalg.cholesky(cov)


@dataclass(frozen=True, eq=False)
class SamplerConfig:
    variant: Variant = Variant.GUIDED_ADAPTIVE
    proposal_cov: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_PROPOSAL_COV))
    iterations: int = 100_000
    burnin: int = 1_000
    adapt_interval: int = 100
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        cov = np.array(self.proposal_cov, dtype=np.float64)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ConfigError(f"must be a square matrix, got shape {cov.shape}", key="proposal_cov")
        if not np.all(np.isfinite(cov)) or not np.array_equal(cov, cov.T):
            raise ConfigError("must be finite and symmetric", key="proposal_cov")
        if np.any(cov):
            if np.any(np.diag(cov) <= 0):
                raise ConfigError("diagonal entries must be positive", key="proposal_cov")
            try:
                np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise ConfigError("must be positive definite", key="proposal_cov") from None
        cov.setflags(write=False)
        object.__setattr__(self, "proposal_cov", cov)
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ConfigError(f"must be a positive integer, got {self.iterations!r}", key="iterations")
        if int(self.burnin) != self.burnin or self.burnin < 0:
            raise ConfigError(f"must be a non-negative integer, got {self.burnin!r}", key="burnin")
        if int(self.adapt_interval) != self.adapt_interval or self.adapt_interval < 1:
            raise ConfigError(f"must be a positive integer, got {self.adapt_interval!r}", key="adapt_interval")
        if self.variant is Variant.GUIDED_ADAPTIVE and self.adapt_interval > self.burnin:
            raise ConfigError(
                f"adapt_interval ({self.adapt_interval}) exceeds burnin ({self.burnin})", key="adapt_interval"
            )
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigError(f"must be an unsigned 64-bit integer, got {self.seed!r}", key="seed")
        for name in ("iterations", "burnin", "adapt_interval", "seed"):
            object.__setattr__(self, name, int(getattr(self, name)))

    @property
    def dim(self) -> int:
        return self.proposal_cov.shape[0]

    def with_(self, **changes) -> "SamplerConfig":
        return replace(self, **changes)


@dataclass
class ChainState:
    current: np.ndarray
    current_log_post: float
    signs: np.ndarray
    iteration: int = 0
    moves: np.ndarray | None = None  # per-component acceptance in the last iteration

    def copy(self) -> "ChainState":
        return ChainState(
            self.current.copy(),
            self.current_log_post,
            self.signs.copy(),
            self.iteration,
            None if self.moves is None else self.moves.copy(),
        )


@dataclass
class Chain:
    """Retained draws plus the burn-in audit trail.

    ``accepted[j]`` is True when any component moved at iteration ``j``;
    ``moves`` holds the per-component outcome (identical columns for the
    random-walk variant, whose moves are joint).
    """

    draws: np.ndarray
    log_posts: np.ndarray
    accepted: np.ndarray
    moves: np.ndarray
    burnin_draws: np.ndarray
    burnin_log_posts: np.ndarray
    burnin_accepted: np.ndarray
    config: SamplerConfig
    init: np.ndarray
    proposal_cov: np.ndarray
    adaptations: list = field(default_factory=list)
    final_state: ChainState | None = None
    backend: str = "python"

    def __len__(self):
        return self.draws.shape[0]

    @property
    def dim(self) -> int:
        return self.draws.shape[1]

    @property
    def acceptance_rate(self) -> float:
        """Fraction of accepted proposals (per component for guided variants)."""
        if self.config.variant.guided:
            return float(self.moves.mean())
        return float(self.accepted.mean())

    @property
    def rejections(self) -> int:
        if self.config.variant.guided:
            return int(self.moves.size - self.moves.sum())
        return int(len(self.accepted) - self.accepted.sum())


def log_acceptance(candidate_log_post: float, current_log_post: float) -> float:
    """``min(0, candidate - current)``: the log of the acceptance probability."""
    return _pykernel.log_acceptance(candidate_log_post, current_log_post)


def propose(state: ChainState, cov, rng, variant=Variant.RANDOM_WALK, component: int | None = None):
    """Draw one candidate.

    Random walk: ``current + L z`` for all components at once.  Guided:
    only ``component`` moves, by ``signs[k] * |sqrt(cov_kk) z|``.
    """
    variant = Variant.parse(variant)
    cov = np.asarray(cov, dtype=np.float64)
    cand = state.current.astype(np.float64, copy=True)
    if variant.guided:
        if component is None:
            raise ValueError("guided proposals move one component; pass component=k")
        k = int(component)
        scale = math.sqrt(cov[k, k])
        z = rng.standard_normal()
        cand[k] = state.current[k] + state.signs[k] * abs(scale * z)
        return cand
    chol = proposal_factor(cov)
    z = rng.standard_normal(cand.shape[0])
    for k in range(cand.shape[0]):
        acc = 0.0
        for m in range(k + 1):
            acc += chol[k, m] * z[m]
        cand[k] = state.current[k] + acc
    return cand


def _kernel_args(target: LogisticPosterior):
    args = getattr(target, "_kernel_args", None)
    if args is None:
        y, x, w = target.data.arrays()
        is_normal, mean, var = target.prior.arrays()
        args = (y, x, w, is_normal, mean, var)
        target._kernel_args = args
    return args


def advance(target: Target, state: ChainState, cov, variant, n: int, rng, backend: str = "auto"):
    """Run ``n`` iterations from ``state`` with a fixed proposal covariance.

    Returns ``(new_state, draws, log_posts, moves)``; ``state`` itself is
    not modified.  Restarting from a saved state and a saved
    ``rng.bit_generator.state`` replays the continuation exactly.
    """
    variant = Variant.parse(variant)
    cov = np.asarray(cov, dtype=np.float64)
    d = state.current.shape[0]
    chol = np.ascontiguousarray(proposal_factor(cov))
    scale = np.sqrt(np.diag(cov)).copy()
    cur = np.array(state.current, dtype=np.float64)
    signs = np.array(state.signs, dtype=np.float64)
    draws = np.empty((n, d))
    lps = np.empty(n)
    moves = np.zeros((n, d), dtype=np.uint8)
    compiled = isinstance(target, LogisticPosterior) and _backend.use_compiled(backend)
    if backend == "compiled" and not isinstance(target, LogisticPosterior):
        raise ValueError("the compiled kernel only evaluates LogisticPosterior targets")
    if n > 0:
        if compiled:
            lp = _backend.compiled().run_logistic_segment(
                cur, float(state.current_log_post), signs, chol, scale, variant.guided, n,
                *_kernel_args(target), rng, draws, lps, moves,
            )
        else:
            lp = _pykernel.run_segment(
                target, cur, float(state.current_log_post), signs, chol, scale, variant.guided, n,
                rng, draws, lps, moves,
            )
    else:
        lp = state.current_log_post
    moves = moves.astype(bool)
    new_state = ChainState(cur, lp, signs, state.iteration + n, moves[-1].copy() if n else None)
    return new_state, draws, lps, moves


def metropolis_step(state: ChainState, target: Target, config: SamplerConfig, rng, cov=None) -> ChainState:
    """One iteration (a full component sweep for guided variants).

    Always runs on the Python path so arbitrary targets are accepted.
    """
    if cov is None:
        cov = config.proposal_cov
    new_state, _, _, _ = advance(target, state, cov, config.variant, 1, rng, backend="python")
    return new_state


def adapt_covariance(history, d: int | None = None, previous=None):
    """Scaled empirical covariance of ``history`` rows.

    Returns ``(cov, adapted)``.  With fewer than ``d + 2`` rows the estimate
    is skipped: ``previous`` comes back unchanged and ``adapted`` is False.
    """
    history = np.asarray(history, dtype=np.float64)
    if history.ndim == 1:
        history = history[:, None]
    if d is None:
        d = history.shape[1]
    if history.shape[0] < d + 2:
        return previous, False
    S = np.atleast_2d(np.cov(history, rowvar=False))
    cov = (ADAPT_SCALE / d) * (S + ADAPT_RIDGE * np.eye(d))
    cov = 0.5 * (cov + cov.T)
    return cov, True


def initial_state(target: Target, init: Sequence[float], variant, rng) -> ChainState:
    x = np.array(init, dtype=np.float64)
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise ConfigError(f"initial values must be a finite vector, got {init!r}", key="init")
    lp = float(target(x))
    if not math.isfinite(lp):
        raise ConfigError(f"target density is not finite at the initial values (log density {lp})", key="init")
    if Variant.parse(variant).guided:
        signs = np.where(rng.random(x.shape[0]) < 0.5, -1.0, 1.0)
    else:
        signs = np.ones(x.shape[0])
    return ChainState(x, lp, signs, 0)


def run_chain(target: Target, config: SamplerConfig, init: Sequence[float], backend: str = "auto") -> Chain:
    """Burn in, then collect ``config.iterations`` retained draws.

    Identical ``(config, init)`` pairs give bit-identical chains on a given
    backend; the two backends agree with each other for the logistic target.
    """
    rng = np.random.default_rng(config.seed)
    state = initial_state(target, init, config.variant, rng)
    if state.current.shape[0] != config.dim:
        raise ConfigError(
            f"proposal covariance is {config.dim}x{config.dim} but init has {state.current.shape[0]} entries",
            key="proposal_cov",
        )
    init_arr = state.current.copy()
    cov = np.array(config.proposal_cov)
    adaptations = []

    burn_draws, burn_lps, burn_moves = [], [], []
    if config.variant is Variant.GUIDED_ADAPTIVE:
        done = 0
        while done < config.burnin:
            n = min(config.adapt_interval, config.burnin - done)
            state, dr, lp, mv = advance(target, state, cov, config.variant, n, rng, backend)
            burn_draws.append(dr)
            burn_lps.append(lp)
            burn_moves.append(mv)
            done += n
            if n == config.adapt_interval:
                cov, adapted = adapt_covariance(np.concatenate(burn_draws), config.dim, previous=cov)
                adaptations.append((done, cov.copy(), adapted))
    elif config.burnin:
        state, dr, lp, mv = advance(target, state, cov, config.variant, config.burnin, rng, backend)
        burn_draws.append(dr)
        burn_lps.append(lp)
        burn_moves.append(mv)

    state, draws, lps, moves = advance(target, state, cov, config.variant, config.iterations, rng, backend)
    compiled = isinstance(target, LogisticPosterior) and _backend.use_compiled(backend)
    d = config.dim
    return Chain(
        draws=draws,
        log_posts=lps,
        accepted=moves.any(axis=1),
        moves=moves,
        burnin_draws=np.concatenate(burn_draws) if burn_draws else np.empty((0, d)),
        burnin_log_posts=np.concatenate(burn_lps) if burn_lps else np.empty(0),
        burnin_accepted=np.concatenate(burn_moves).any(axis=1) if burn_moves else np.empty(0, dtype=bool),
        config=config,
        init=init_arr,
        proposal_cov=cov,
        adaptations=adaptations,
        final_state=state,
        backend="compiled" if compiled else "python",
    )


def discrete_chain(masses: Sequence[float], steps: int, rng, start: int | None = None) -> np.ndarray:
    """Metropolis on states ``0..K-1`` with (unnormalised) ``masses``.

    Proposes a uniformly chosen *other* state each step (symmetric), and
    returns the empirical visit frequencies of the ``steps`` states after
    the start.  ``start`` defaults to the heaviest state.
    """
    masses = np.asarray(masses, dtype=np.float64)
    K = masses.shape[0]
    if K < 2 or np.any(masses <= 0) or not np.all(np.isfinite(masses)):
        raise ValueError("need at least two states with positive finite masses")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    log_m = np.log(masses).tolist()
    cur = int(np.argmax(masses)) if start is None else int(start)
    offsets = rng.integers(0, K - 1, size=steps).tolist() if K > 2 else [0] * steps
    log_u = np.log(rng.random(steps)).tolist()
    counts = [0] * K
    for off, lu in zip(offsets, log_u):
        cand = off if off < cur else off + 1
        if lu < min(0.0, log_m[cand] - log_m[cur]):
            cur = cand
        counts[cur] += 1
    return np.array(counts, dtype=np.float64) / steps


def two_state_chain(mass_ratio: float, steps: int, rng) -> float:
    """Frequency of state ``b`` when ``h(b) = mass_ratio * h(a)``; tends to r/(1+r)."""
    if not mass_ratio > 0:
        raise ValueError(f"mass_ratio must be positive, got {mass_ratio!r}")
    return float(discrete_chain([1.0, float(mass_ratio)], steps, rng, start=1)[1])
