"""``key = value`` run configuration.

One setting per line; ``#`` starts a comment.  Unknown keys are errors.
Defaults reproduce the guided-adaptive, flat-prior analysis: 100,000
retained iterations after 1,000 burn-in, proposal variances 0.1, start
at (2, -3), population incidence 4.8 per 100,000.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import ConfigError
from .estimands import DEFAULT_INCIDENCE
from .sampler import DEFAULT_SEED, SamplerConfig, Variant
from .target import Flat, Normal, Prior

__all__ = ["RunConfig", "parse_config", "parse_prior", "KEYS"]

_NORMAL_RE = re.compile(r"^normal\s*\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)$", re.IGNORECASE)
OFFSET_MODES = ("per-draw", "fixed")


def parse_prior(text: str):
    t = text.strip()
    if t.lower() in ("flat", "uniform"):
        return Flat()
    m = _NORMAL_RE.match(t)
    if not m:
        raise ValueError(f"expected 'flat' or 'normal(mean, variance)', got {text!r}")
    return Normal(float(m.group(1)), float(m.group(2)))


def _parse_window(text: str):
    a, sep, b = text.partition(":")
    if not sep:
        raise ValueError(f"expected 'start:end', got {text!r}")
    start, end = int(a), int(b)
    if end < start:
        raise ValueError(f"window end {end} precedes start {start}")
    return (start, end)


def _parse_init(text: str):
    vals = tuple(float(v) for v in text.replace(" ", "").split(","))
    if len(vals) != 2:
        raise ValueError(f"expected two comma-separated values, got {text!r}")
    return vals


def _parse_optional_float(text: str):
    return None if text.strip().lower() in ("", "auto", "none") else float(text)


@dataclass(frozen=True)
class RunConfig:
    data: str | None = None
    variant: Variant = Variant.GUIDED_ADAPTIVE
    iterations: int = 100_000
    burnin: int = 1_000
    seed: int = DEFAULT_SEED
    adapt_interval: int = 100
    proposal_beta0: float = 0.1
    proposal_beta1: float = 0.1
    prior_beta0: object = Flat()
    prior_beta1: object = Flat()
    init: tuple = (2.0, -3.0)
    incidence: float = DEFAULT_INCIDENCE
    exposure_prevalence: float | None = None
    output_dir: str = "out"
    rd_offset: str = "per-draw"
    thin: int = 1
    window: tuple | None = None

    @property
    def prior(self) -> Prior:
        return Prior((self.prior_beta0, self.prior_beta1))

    def sampler_config(self, variant=None, seed=None) -> SamplerConfig:
        return SamplerConfig(
            variant=self.variant if variant is None else variant,
            proposal_cov=np.diag([self.proposal_beta0, self.proposal_beta1]),
            iterations=self.iterations,
            burnin=self.burnin,
            adapt_interval=self.adapt_interval,
            seed=self.seed if seed is None else seed,
        )

    def validate(self, lines: dict | None = None) -> "RunConfig":
        lines = lines or {}

        def fail(key, msg):
            raise ConfigError(msg, key=key, line=lines.get(key))

        if self.iterations < 1:
            fail("iterations", f"must be >= 1, got {self.iterations}")
        if self.burnin < 0:
            fail("burnin", f"must be >= 0, got {self.burnin}")
        if self.adapt_interval < 1:
            fail("adapt_interval", f"must be >= 1, got {self.adapt_interval}")
        if self.variant is Variant.GUIDED_ADAPTIVE and self.adapt_interval > self.burnin:
            fail("adapt_interval", f"({self.adapt_interval}) must not exceed burnin ({self.burnin})")
        if not 0 <= self.seed < 2**64:
            fail("seed", f"must be an unsigned 64-bit integer, got {self.seed}")
        for key in ("proposal.beta0", "proposal.beta1"):
            v = getattr(self, key.replace(".", "_"))
            if not (v > 0 and np.isfinite(v)):
                fail(key, f"must be a positive variance, got {v}")
        if not 0.0 < self.incidence < 1.0:
            fail("incidence", f"must lie in (0, 1), got {self.incidence}")
        if self.exposure_prevalence is not None and not 0.0 <= self.exposure_prevalence <= 1.0:
            fail("exposure_prevalence", f"must lie in [0, 1], got {self.exposure_prevalence}")
        if not all(np.isfinite(self.init)):
            fail("init", f"must be finite, got {self.init}")
        if self.rd_offset not in OFFSET_MODES:
            fail("rd_offset", f"must be one of {OFFSET_MODES}, got {self.rd_offset!r}")
        if self.thin < 1:
            fail("thin", f"must be >= 1, got {self.thin}")
        return self

    def to_text(self) -> str:
        """Config-file rendering that :func:`parse_config` reads back."""
        out = []
        for key, (attr, _) in KEYS.items():
            v = getattr(self, attr)
            if v is None:
                if key in ("data", "window"):
                    continue
                text = "auto"
            elif isinstance(v, Variant):
                text = v.value
            elif key == "init":
                text = ", ".join(repr(x) for x in v)
            elif key == "window":
                text = f"{v[0]}:{v[1]}"
            elif isinstance(v, (Flat, Normal)):
                text = str(v)
            else:
                text = repr(v) if isinstance(v, float) else str(v)
            out.append(f"{key} = {text}")
        return "\n".join(out) + "\n"


KEYS = {
    "data": ("data", str),
    "variant": ("variant", Variant.parse),
    "iterations": ("iterations", int),
    "burnin": ("burnin", int),
    "seed": ("seed", int),
    "adapt_interval": ("adapt_interval", int),
    "proposal.beta0": ("proposal_beta0", float),
    "proposal.beta1": ("proposal_beta1", float),
    "prior.beta0": ("prior_beta0", parse_prior),
    "prior.beta1": ("prior_beta1", parse_prior),
    "init": ("init", _parse_init),
    "incidence": ("incidence", float),
    "exposure_prevalence": ("exposure_prevalence", _parse_optional_float),
    "output_dir": ("output_dir", str),
    "rd_offset": ("rd_offset", str),
    "thin": ("thin", int),
    "window": ("window", _parse_window),
}


def _convert(key, raw, line=None):
    attr, conv = KEYS[key]
    try:
        return attr, conv(raw.strip())
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse {raw.strip()!r}: {exc}", key=key, line=line) from None


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse config text, then apply ``overrides`` (key -> raw string)."""
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        if key not in KEYS:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in lines:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key=key, line=lineno)
        attr, val = _convert(key, value, lineno)
        values[attr] = val
        lines[key] = lineno
    for key, raw in (overrides or {}).items():
        if key not in KEYS:
            raise ConfigError("unknown key", key=key)
        attr, val = _convert(key, str(raw))
        values[attr] = val
        lines.pop(key, None)
    known = {f.name for f in fields(RunConfig)}
    assert set(values) <= known
    return replace(RunConfig(), **values).validate(lines)
