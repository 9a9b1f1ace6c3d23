"""Sequential dose-finding trial state machine.

Covers all ten designs: {BOIN, Keyboard} x {baseline rule, Thompson
sampling, Thompson sampling-eps, greedy, median}.  TrialState is an
immutable value; every operation returns a new state, so a trial's
history can always be replayed to reproduce its terminal state.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, TextIO

from .designs import (
    Boundaries,
    Decision,
    KeyPartition,
    Region,
    boin_boundaries,
    cached_boin_decision,
    cached_elimination,
    cached_keyboard_decision,
    classify_region_boin,
    classify_region_keyboard,
    keyboard_partition,
)
from .numerics import RngStream
from .policies import Policy, bandit_select, policy_values


class Family(enum.Enum):
    BOIN = "boin"
    KEYBOARD = "keyboard"


class Status(enum.Enum):
    ACTIVE = "active"
    COMPLETED = "completed"
    STOPPED_TOXICITY = "stopped_toxicity"


@dataclass(frozen=True)
class DesignParams:
    """Full configuration of one design instance.

    policy=None selects the classic baseline rule (current-dose only);
    a Policy makes the design evaluate all administered doses per cohort.
    """

    phi: float = 0.30
    K: int = 6
    N: int = 36
    cohort_size: int = 3
    family: Family = Family.BOIN
    policy: Optional[Policy] = None
    elimination_threshold: float = 0.95
    elimination_min_n: int = 3
    escalation_reference: str = "frontier"
    phi1_factor: float = 0.6
    phi2_factor: float = 1.4
    # When False, the lowest dose is exempt from elimination and the trial
    # always runs to N patients; elimination then only caps escalation.
    # The published operating characteristics were generated this way
    # (selection rows sum to 100% with all N patients treated).
    stop_on_toxicity: bool = True

    def __post_init__(self):
        if not 0.0 < self.phi < 1.0:
            raise ValueError(f"phi must be in (0, 1), got {self.phi}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.cohort_size < 1:
            raise ValueError(f"cohort_size must be >= 1, got {self.cohort_size}")
        if self.N < 1 or self.N % self.cohort_size != 0:
            raise ValueError(f"N must be a positive multiple of cohort_size, got N={self.N}")
        if self.escalation_reference not in ("selected", "frontier"):
            raise ValueError(f"unknown escalation_reference {self.escalation_reference!r}")
        if not 0.0 < self.elimination_threshold < 1.0:
            raise ValueError("elimination_threshold must be in (0, 1)")

    def boundaries(self) -> Boundaries:
        return _cached_boundaries(self.phi, self.phi1_factor, self.phi2_factor)

    def partition(self) -> KeyPartition:
        return _cached_partition(self.phi)


@lru_cache(maxsize=None)
def _cached_boundaries(phi: float, phi1_factor: float, phi2_factor: float) -> Boundaries:
    return boin_boundaries(phi, phi1_factor, phi2_factor)


@lru_cache(maxsize=None)
def _cached_partition(phi: float) -> KeyPartition:
    return keyboard_partition(phi)


class CohortOutcome(NamedTuple):
    dose: int  # 1-based
    dlt_count: int


class TrialState(NamedTuple):
    n: tuple[int, ...]
    m: tuple[int, ...]
    eliminated: tuple[bool, ...]
    current_dose: int
    history: tuple[CohortOutcome, ...]
    status: Status

    @property
    def k_max(self) -> int:
        """Highest dose level administered so far (0 before the first cohort)."""
        k = 0
        for i, ni in enumerate(self.n):
            if ni > 0:
                k = i + 1
        return k

    @property
    def total_patients(self) -> int:
        return sum(self.n)

    def admissible_max(self, K: int) -> int:
        """Highest dose that may still be administered."""
        for i, e in enumerate(self.eliminated):
            if e:
                return i  # dose below the lowest eliminated one
        return K


def new_trial(params: DesignParams) -> TrialState:
    K = params.K
    return TrialState(
        n=(0,) * K,
        m=(0,) * K,
        eliminated=(False,) * K,
        current_dose=1,
        history=(),
        status=Status.ACTIVE,
    )


def record_cohort(state: TrialState, params: DesignParams, outcome: CohortOutcome) -> TrialState:
    """Fold one cohort's outcome into the state, applying elimination and termination."""
    if state.status is not Status.ACTIVE:
        raise ValueError(f"cannot record a cohort on a {state.status.value} trial")
    if outcome.dose != state.current_dose:
        raise ValueError(
            f"cohort dose {outcome.dose} does not match current dose {state.current_dose}"
        )
    if not 0 <= outcome.dlt_count <= params.cohort_size:
        raise ValueError(f"dlt_count must be in [0, {params.cohort_size}]")

    k = outcome.dose - 1
    n = list(state.n)
    m = list(state.m)
    n[k] += params.cohort_size
    m[k] += outcome.dlt_count

    eliminated = list(state.eliminated)
    if cached_elimination(
        n[k], m[k], params.phi, params.elimination_threshold, params.elimination_min_n
    ):
        first = k if params.stop_on_toxicity else max(k, 1)
        for j in range(first, params.K):
            eliminated[j] = True

    if eliminated[0]:
        status = Status.STOPPED_TOXICITY
    elif sum(n) >= params.N:
        status = Status.COMPLETED
    else:
        status = Status.ACTIVE

    return TrialState(
        n=tuple(n),
        m=tuple(m),
        eliminated=tuple(eliminated),
        current_dose=state.current_dose,
        history=state.history + (outcome,),
        status=status,
    )


def next_dose(state: TrialState, params: DesignParams, rng: RngStream) -> int:
    """Dose for the next cohort; never an eliminated dose."""
    return next_dose_explained(state, params, rng)[0]


def next_dose_explained(
    state: TrialState, params: DesignParams, rng: RngStream
) -> tuple[int, dict]:
    """Like next_dose, but also returns the rationale behind the recommendation.

    The rationale dict carries the rule applied, the per-dose decision
    values with their region classification (bandit designs), or the
    baseline decision taken.
    """
    if state.status is not Status.ACTIVE:
        raise ValueError(f"cannot pick a dose on a {state.status.value} trial")
    k_max = state.k_max
    if k_max == 0:
        return 1, {"rule": "start", "detail": "first cohort is treated at the lowest dose"}
    admissible = state.admissible_max(params.K)

    if params.policy is None:
        return _baseline_next_dose(state, params, admissible)

    k_max = min(k_max, admissible)  # eliminated doses are not candidates
    counts = [(state.n[i], state.m[i]) for i in range(k_max)]
    values = policy_values(counts, params.policy, rng)
    if params.family is Family.BOIN:
        bounds = params.boundaries()
        regions = [classify_region_boin(v, bounds) for v in values]
    else:
        part = params.partition()
        regions = [classify_region_keyboard(v, part) for v in values]
    dose = bandit_select(values, regions, admissible, params.escalation_reference)
    if any(r is Region.TARGET for r in regions):
        branch = "target"
    elif all(r is Region.LOWER for r in regions):
        branch = "lower"
    else:
        branch = "upper"
    return dose, {
        "rule": "bandit",
        "policy": params.policy.label(),
        "branch": branch,
        "values": [round(v, 6) for v in values],
        "regions": [r.value for r in regions],
    }


def _baseline_next_dose(
    state: TrialState, params: DesignParams, admissible: int
) -> tuple[int, dict]:
    k = state.current_dose
    i = k - 1
    if params.family is Family.BOIN:
        decision = cached_boin_decision(state.n[i], state.m[i], params.boundaries())
    else:
        decision = cached_keyboard_decision(state.n[i], state.m[i], params.partition())
    if decision is Decision.ESCALATE:
        dose = min(k + 1, admissible)
    elif decision is Decision.DEESCALATE:
        dose = max(k - 1, 1)
    else:
        dose = min(k, admissible)
    info = {
        "rule": "baseline",
        "decision": decision.value,
        "p_hat": round(state.m[i] / state.n[i], 6),
    }
    return dose, info


def select_mtd(state: TrialState, params: DesignParams) -> Optional[int]:
    """Dose whose observed toxicity rate is closest to phi, or None after a safety stop.

    Candidates are administered, non-eliminated doses; ties break toward
    more data, then toward the lower dose.
    """
    if state.status is Status.ACTIVE:
        raise ValueError("cannot select an MTD on an active trial")
    if state.status is Status.STOPPED_TOXICITY:
        return None
    best = None
    best_key = None
    for i in range(params.K):
        if state.n[i] == 0 or state.eliminated[i]:
            continue
        p_hat = state.m[i] / state.n[i]
        key = (abs(p_hat - params.phi), -state.n[i], i)
        if best_key is None or key < best_key:
            best, best_key = i + 1, key
    return best


def simulate_trial(
    params: DesignParams, true_tox: tuple[float, ...], rng: RngStream
) -> TrialState:
    """Run one full trial against a true toxicity curve."""
    if len(true_tox) != params.K:
        raise ValueError(f"scenario length {len(true_tox)} != K={params.K}")
    if any(not 0.0 <= p <= 1.0 for p in true_tox):
        raise ValueError("true toxicity rates must be probabilities")
    state = new_trial(params)
    gen = rng.generator
    while state.status is Status.ACTIVE:
        dose = next_dose(state, params, rng)
        state = state._replace(current_dose=dose)
        dlts = int(gen.binomial(params.cohort_size, true_tox[dose - 1]))
        state = record_cohort(state, params, CohortOutcome(dose, dlts))
    return state


# --- event log (line-delimited JSON, shared with the recommender service) ---

def event_log_records(state: TrialState, params: DesignParams) -> list[dict]:
    """Re-derive the per-cohort event records by replaying the history."""
    records = []
    replay = new_trial(params)
    for idx, outcome in enumerate(state.history):
        replay = replay._replace(current_dose=outcome.dose)
        replay = record_cohort(replay, params, outcome)
        records.append(
            {
                "cohort_index": idx,
                "dose": outcome.dose,
                "dlt_count": outcome.dlt_count,
                "eliminated_after": [i + 1 for i, e in enumerate(replay.eliminated) if e],
                "status_after": replay.status.value,
            }
        )
    return records


def write_event_log(state: TrialState, params: DesignParams, fh: TextIO) -> None:
    for rec in event_log_records(state, params):
        fh.write(json.dumps(rec) + "\n")


def replay_event_log(lines: list[str], params: DesignParams) -> TrialState:
    """Rebuild a TrialState from event-log lines."""
    state = new_trial(params)
    for line in lines:
        if not line.strip():
            continue
        rec = json.loads(line)
        state = state._replace(current_dose=rec["dose"])
        state = record_cohort(state, params, CohortOutcome(rec["dose"], rec["dlt_count"]))
    return state
