"""Bandit policies over per-dose toxicity posteriors, and the dose-selection rule.

A policy turns the per-dose counts (n_k, m_k) for every administered
dose into a vector of decision values p*_k.  The selection rule then
classifies each value against the design's retainment interval (BOIN)
or target key (Keyboard) and picks the next dose by branch priority:
treat a target-region dose, else escalate from the best under-toxic
dose, else back off from the least over-toxic dose.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betainc, betaincinv

from .designs import Region
from .numerics import RngStream


class PolicyKind(enum.Enum):
    THOMPSON = "ts"
    THOMPSON_EPS = "ts-eps"
    GREEDY = "greedy"
    MEDIAN = "median"


@dataclass(frozen=True)
class Policy:
    kind: PolicyKind
    epsilon: float | None = None

    def __post_init__(self):
        if self.kind is PolicyKind.THOMPSON_EPS:
            if self.epsilon is None or not 0.0 < self.epsilon <= 1.0:
                raise ValueError(f"epsilon must be in (0, 1], got {self.epsilon}")
        elif self.epsilon is not None:
            raise ValueError(f"epsilon is only meaningful for {PolicyKind.THOMPSON_EPS}")

    @classmethod
    def thompson(cls) -> "Policy":
        return cls(PolicyKind.THOMPSON)

    @classmethod
    def thompson_eps(cls, epsilon: float) -> "Policy":
        return cls(PolicyKind.THOMPSON_EPS, epsilon)

    @classmethod
    def greedy(cls) -> "Policy":
        return cls(PolicyKind.GREEDY)

    @classmethod
    def median(cls) -> "Policy":
        return cls(PolicyKind.MEDIAN)

    @property
    def deterministic(self) -> bool:
        return self.kind in (PolicyKind.GREEDY, PolicyKind.MEDIAN)

    def label(self) -> str:
        if self.kind is PolicyKind.THOMPSON_EPS:
            return f"ts-eps:{self.epsilon:g}"
        return self.kind.value


@lru_cache(maxsize=None)
def _truncation_cdf_bounds(n: int, m: int, epsilon: float) -> tuple[float, float, float, float]:
    """(lo, hi, cdf(lo), cdf(hi)) for the posterior truncated to [m/n - eps, m/n + eps]."""
    p_hat = m / n
    lo = max(0.0, p_hat - epsilon)
    hi = min(1.0, p_hat + epsilon)
    a, b = m + 1.0, n - m + 1.0
    return lo, hi, float(betainc(a, b, lo)), float(betainc(a, b, hi))


def policy_values(counts: list[tuple[int, int]], policy: Policy, rng: RngStream) -> list[float]:
    """Decision values p*_k for doses 1..k_max given per-dose (n_k, m_k).

    Every dose up to the frontier must have been administered (n_k >= 1).
    """
    if any(n < 1 for n, _ in counts):
        raise ValueError("every dose up to the frontier needs at least one patient")
    kind = policy.kind
    if kind is PolicyKind.GREEDY:
        return [(m + 1) / (n + 2) for n, m in counts]
    if kind is PolicyKind.MEDIAN:
        return [m / n for n, m in counts]
    if kind is PolicyKind.THOMPSON:
        a = [m + 1.0 for _, m in counts]
        b = [n - m + 1.0 for n, m in counts]
        return rng.generator.beta(a, b).tolist()
    # Thompson sampling constrained to within epsilon of the observed rate,
    # via inverse-CDF (same conditional law as rejection resampling).
    eps = policy.epsilon
    bounds = [_truncation_cdf_bounds(n, m, eps) for n, m in counts]
    c_lo = [b_[2] for b_ in bounds]
    c_hi = [b_[3] for b_ in bounds]
    u = rng.generator.uniform(c_lo, c_hi)
    a = np.array([m + 1.0 for _, m in counts])
    b = np.array([n - m + 1.0 for n, m in counts])
    x = betaincinv(a, b, u)
    return [min(max(float(xi), b_[0]), b_[1]) for xi, b_ in zip(x, bounds)]


def bandit_select(
    values: list[float],
    regions: list[Region],
    admissible_max: int,
    escalation_reference: str = "selected",
) -> int:
    """Next dose level (1-based) from decision values and their regions.

    Branch priority:
      1. any target-region dose: treat the one with the largest value;
      2. every dose under-toxic: escalate one level above the administered
         frontier (or above the best under-toxic dose when
         escalation_reference is "selected");
      3. otherwise: treat the least over-toxic dose itself, letting its
         posterior accumulate evidence instead of freezing it forever.

    Ties go to the lower dose level.  The result never exceeds
    admissible_max and never drops below dose 1.
    """
    if not values:
        raise ValueError("empty policy draw")
    if len(values) != len(regions):
        raise ValueError("values and regions must align")
    k_max = len(values)

    target = [i for i, r in enumerate(regions) if r is Region.TARGET]
    if target:
        khat = max(target, key=lambda i: (values[i], -i))
        return min(khat + 1, admissible_max)

    if all(r is Region.LOWER for r in regions):
        if escalation_reference == "selected":
            khat = max(range(k_max), key=lambda i: (values[i], -i))
            return min(khat + 2, admissible_max)
        return min(k_max + 1, admissible_max)

    upper = [i for i, r in enumerate(regions) if r is Region.UPPER]
    khat = min(upper, key=lambda i: (values[i], i))
    return min(khat + 1, admissible_max)
