"""Beta-distribution primitives and reproducible RNG streams.

Every design and policy in this package works with Beta(m+1, n-m+1)
posteriors over a per-dose toxicity rate, so the numerical surface is
small: CDF, quantile, sampling, and truncated sampling.  The CDF and
quantile delegate to scipy's regularized incomplete beta, which is
accurate to well below the 1e-10 tolerance we need (elimination
decisions compare posterior tail mass against a 0.95 threshold, where
1e-3 errors could flip a decision).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, betaincinv


@dataclass(frozen=True)
class BetaParams:
    """Shape parameters of a Beta distribution (alpha, beta > 0)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"Beta shapes must be positive, got ({self.alpha}, {self.beta})")

    @classmethod
    def posterior(cls, n: int, m: int) -> "BetaParams":
        """Posterior under a uniform prior after m toxicities in n patients."""
        return cls(m + 1.0, n - m + 1.0)


class RngStream:
    """A reproducible, independently seeded random stream.

    Two streams constructed with the same (master_seed, stream_id) yield
    identical draw sequences; distinct stream_ids give statistically
    independent streams (numpy SeedSequence spawning guarantees).  A
    stream is single-owner: never share one across concurrent tasks.
    """

    __slots__ = ("master_seed", "stream_id", "generator")

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = master_seed
        self.stream_id = stream_id
        self.generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([master_seed, stream_id]))
        )

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"


def _check_unit(x: float, name: str) -> None:
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"{name} must be in [0, 1], got {x}")


def beta_cdf(x: float, p: BetaParams) -> float:
    """Pr(P <= x) for P ~ Beta(p.alpha, p.beta)."""
    _check_unit(x, "x")
    return float(betainc(p.alpha, p.beta, x))


def beta_quantile(u: float, p: BetaParams) -> float:
    """Inverse of beta_cdf: the x with Pr(P <= x) = u."""
    _check_unit(u, "u")
    return float(betaincinv(p.alpha, p.beta, u))


def beta_sample(p: BetaParams, rng: RngStream) -> float:
    """One draw from Beta(p.alpha, p.beta)."""
    return float(rng.generator.beta(p.alpha, p.beta))


def beta_sample_truncated(p: BetaParams, lo: float, hi: float, rng: RngStream) -> float:
    """One draw from Beta(p.alpha, p.beta) conditioned on [lo, hi].

    Implemented by inverse-CDF on a uniform over [cdf(lo), cdf(hi)]:
    distributionally identical to rejection resampling but with bounded
    cost even when the interval carries tiny posterior mass.
    """
    lo = max(0.0, lo)
    hi = min(1.0, hi)
    if not lo < hi:
        raise ValueError(f"empty truncation interval [{lo}, {hi}]")
    c_lo = beta_cdf(lo, p)
    c_hi = beta_cdf(hi, p)
    if c_hi - c_lo <= 1e-300:
        raise ValueError(
            f"truncation interval [{lo}, {hi}] has no posterior mass under {p}"
        )
    u = rng.generator.uniform(c_lo, c_hi)
    x = beta_quantile(u, p)
    # betaincinv can round just outside the interval at extreme masses
    return min(max(x, lo), hi)
