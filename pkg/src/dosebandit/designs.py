"""Static decision machinery of the BOIN and Keyboard designs.

Boundaries, key partitions, region classification of a single toxicity
value, the two baseline dose-assignment rules, and the over-toxicity
elimination rule.  Everything here is pure and stateless; the hot
simulation loop relies on the lru_caches at the bottom.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

from .numerics import BetaParams, beta_cdf


class Region(enum.Enum):
    LOWER = "lower"
    TARGET = "target"
    UPPER = "upper"


class Decision(enum.Enum):
    ESCALATE = "escalate"
    RETAIN = "retain"
    DEESCALATE = "deescalate"


@dataclass(frozen=True)
class Boundaries:
    """BOIN escalation / de-escalation boundaries with 0 < lambda_e < phi < lambda_d < 1."""

    phi: float
    lambda_e: float
    lambda_d: float


@dataclass(frozen=True)
class KeyPartition:
    """Equal-width toxicity intervals around the target key (phi-0.05, phi+0.05).

    lower_keys / upper_keys hold only full-width (0.1) keys, ordered by
    increasing toxicity; edge strips narrower than 0.1 are excluded.
    """

    phi: float
    target_lo: float
    target_hi: float
    lower_keys: tuple[tuple[float, float], ...]
    upper_keys: tuple[tuple[float, float], ...]

    def all_keys(self) -> tuple[tuple[float, float], ...]:
        """Every full key, ordered by increasing toxicity, target included."""
        return self.lower_keys + ((self.target_lo, self.target_hi),) + self.upper_keys


def boin_boundaries(phi: float, phi1_factor: float = 0.6, phi2_factor: float = 1.4) -> Boundaries:
    """Optimal interval boundaries for target rate phi.

    phi1 = phi1_factor*phi and phi2 = phi2_factor*phi are the highest
    sub-toxic and lowest over-toxic rates treated as decision errors;
    the defaults give the conventional (0.236, 0.358) interval at
    phi = 0.3.
    """
    if not 0.0 < phi < 1.0:
        raise ValueError(f"phi must be in (0, 1), got {phi}")
    phi1 = phi1_factor * phi
    phi2 = phi2_factor * phi
    if not 0.0 < phi1 < phi < phi2 < 1.0:
        raise ValueError(f"need 0 < phi1 < phi < phi2 < 1, got {phi1}, {phi}, {phi2}")
    lambda_e = math.log((1 - phi1) / (1 - phi)) / math.log(phi * (1 - phi1) / (phi1 * (1 - phi)))
    lambda_d = math.log((1 - phi) / (1 - phi2)) / math.log(phi2 * (1 - phi) / (phi * (1 - phi2)))
    return Boundaries(phi=phi, lambda_e=lambda_e, lambda_d=lambda_d)


def keyboard_partition(phi: float) -> KeyPartition:
    """Tile [0, 1] with width-0.1 keys outward from the target key."""
    if not 0.05 < phi < 0.95:
        raise ValueError(f"phi must be in (0.05, 0.95), got {phi}")
    target_lo = round(phi - 0.05, 10)
    target_hi = round(phi + 0.05, 10)
    lower = []
    hi = target_lo
    while round(hi - 0.1, 10) >= 0.0:
        lo = round(hi - 0.1, 10)
        lower.append((lo, hi))
        hi = lo
    lower.reverse()
    upper = []
    lo = target_hi
    while round(lo + 0.1, 10) <= 1.0:
        hi = round(lo + 0.1, 10)
        upper.append((lo, hi))
        lo = hi
    return KeyPartition(
        phi=phi,
        target_lo=target_lo,
        target_hi=target_hi,
        lower_keys=tuple(lower),
        upper_keys=tuple(upper),
    )


def classify_region_boin(pstar: float, boundaries: Boundaries) -> Region:
    """BOIN point classification; the boundaries themselves fall outside the target."""
    if pstar <= boundaries.lambda_e:
        return Region.LOWER
    if pstar >= boundaries.lambda_d:
        return Region.UPPER
    return Region.TARGET


def classify_region_keyboard(pstar: float, partition: KeyPartition) -> Region:
    """Keyboard point classification; values off the full keys merge into LOWER/UPPER."""
    if pstar <= partition.target_lo:
        return Region.LOWER
    if pstar >= partition.target_hi:
        return Region.UPPER
    return Region.TARGET


def boin_baseline_decision(n: int, m: int, boundaries: Boundaries) -> Decision:
    """Classic BOIN rule: compare the observed rate m/n with the interval."""
    if n < 1:
        raise ValueError("boin_baseline_decision requires n >= 1")
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    region = classify_region_boin(m / n, boundaries)
    return _REGION_TO_DECISION[region]


def keyboard_baseline_decision(n: int, m: int, partition: KeyPartition) -> Decision:
    """Classic Keyboard rule: move toward the full key with maximal posterior mass."""
    if n < 1:
        raise ValueError("keyboard_baseline_decision requires n >= 1")
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    post = BetaParams.posterior(n, m)
    keys = partition.all_keys()
    masses = [beta_cdf(hi, post) - beta_cdf(lo, post) for lo, hi in keys]
    best = max(range(len(keys)), key=masses.__getitem__)
    target_index = len(partition.lower_keys)
    if best == target_index:
        return Decision.RETAIN
    return Decision.ESCALATE if best < target_index else Decision.DEESCALATE


def key_masses(n: int, m: int, partition: KeyPartition) -> list[float]:
    """Posterior Beta(m+1, n-m+1) mass of every full key, in all_keys() order."""
    post = BetaParams.posterior(n, m)
    return [beta_cdf(hi, post) - beta_cdf(lo, post) for lo, hi in partition.all_keys()]


def elimination_check(
    n: int, m: int, phi: float, threshold: float = 0.95, min_n: int = 3
) -> bool:
    """True when the dose is demonstrably over-toxic: Pr(p > phi | n, m) > threshold.

    Requires at least min_n observations so a single unlucky cohort
    cannot kill a dose with no corroborating data.
    """
    if n < min_n:
        return False
    over_prob = 1.0 - beta_cdf(phi, BetaParams.posterior(n, m))
    return over_prob > threshold


_REGION_TO_DECISION = {
    Region.LOWER: Decision.ESCALATE,
    Region.TARGET: Decision.RETAIN,
    Region.UPPER: Decision.DEESCALATE,
}


# Cached variants for the simulation hot loop: (n, m) pairs repeat
# millions of times across replicates, the underlying betainc calls do not
# come cheap.

@lru_cache(maxsize=None)
def cached_keyboard_decision(n: int, m: int, partition: KeyPartition) -> Decision:
    return keyboard_baseline_decision(n, m, partition)


@lru_cache(maxsize=None)
def cached_elimination(n: int, m: int, phi: float, threshold: float, min_n: int) -> bool:
    return elimination_check(n, m, phi, threshold, min_n)


@lru_cache(maxsize=None)
def cached_boin_decision(n: int, m: int, boundaries: Boundaries) -> Decision:
    return boin_baseline_decision(n, m, boundaries)
