"""HTTP trial-conduct service.

Each trial session owns a line-delimited JSON event log under the data
directory; restarting the service replays the logs, so views survive a
crash byte-for-byte.  Recommendations for stochastic policies are frozen
per (session, pending cohort index): refreshing the page never changes
the recommended dose.
"""

from __future__ import annotations

import datetime
import json
import os
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .numerics import RngStream
from .policies import Policy
from .trial import (
    CohortOutcome,
    DesignParams,
    Family,
    Status,
    TrialState,
    new_trial,
    next_dose_explained,
    record_cohort,
    select_mtd,
)

DATA_DIR_ENV = "DOSEFIND_DATA_DIR"


# --- DesignParams <-> JSON ---

def params_to_dict(params: DesignParams) -> dict:
    return {
        "phi": params.phi,
        "K": params.K,
        "N": params.N,
        "cohort_size": params.cohort_size,
        "family": params.family.value,
        "policy": params.policy.label() if params.policy else None,
        "elimination_threshold": params.elimination_threshold,
        "elimination_min_n": params.elimination_min_n,
        "escalation_reference": params.escalation_reference,
        "phi1_factor": params.phi1_factor,
        "phi2_factor": params.phi2_factor,
        "stop_on_toxicity": params.stop_on_toxicity,
    }


def _policy_from_label(label: str | None) -> Policy | None:
    if label is None:
        return None
    if label == "ts":
        return Policy.thompson()
    if label.startswith("ts-eps:"):
        return Policy.thompson_eps(float(label.split(":", 1)[1]))
    if label == "greedy":
        return Policy.greedy()
    if label == "median":
        return Policy.median()
    raise ValueError(f"unknown policy {label!r}")


def params_from_dict(d: dict) -> DesignParams:
    defaults = DesignParams()
    return DesignParams(
        phi=float(d.get("phi", defaults.phi)),
        K=int(d.get("K", defaults.K)),
        N=int(d.get("N", defaults.N)),
        cohort_size=int(d.get("cohort_size", defaults.cohort_size)),
        family=Family(d.get("family", "boin")),
        policy=_policy_from_label(d.get("policy")),
        elimination_threshold=float(
            d.get("elimination_threshold", defaults.elimination_threshold)
        ),
        elimination_min_n=int(d.get("elimination_min_n", defaults.elimination_min_n)),
        escalation_reference=d.get("escalation_reference", defaults.escalation_reference),
        phi1_factor=float(d.get("phi1_factor", defaults.phi1_factor)),
        phi2_factor=float(d.get("phi2_factor", defaults.phi2_factor)),
        stop_on_toxicity=bool(d.get("stop_on_toxicity", defaults.stop_on_toxicity)),
    )


# --- sessions ---

@dataclass
class Session:
    id: str
    params: DesignParams
    state: TrialState
    policy_seed: int
    created: str
    updated: str
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def log_path(self, data_dir: str) -> str:
        return os.path.join(data_dir, f"{self.id}.jsonl")


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _pending_cohort_index(state: TrialState) -> int:
    return len(state.history)


def _recommendation(session: Session) -> dict:
    """Frozen recommendation for the pending cohort; pure, repeatable."""
    state, params = session.state, session.params
    if state.status is Status.STOPPED_TOXICITY:
        return {
            "action": "stop",
            "rationale": {
                "rule": "safety",
                "detail": "the lowest dose is over-toxic; the trial stopped with no MTD",
            },
        }
    if state.status is Status.COMPLETED:
        return {
            "action": "complete",
            "mtd": select_mtd(state, params),
            "rationale": {"rule": "completion", "detail": "all N patients treated"},
        }
    rng = RngStream(session.policy_seed, _pending_cohort_index(state))
    dose, rationale = next_dose_explained(state, params, rng)
    if params.family is Family.BOIN:
        bounds = params.boundaries()
        rationale["boundaries"] = {
            "lambda_e": bounds.lambda_e,
            "lambda_d": bounds.lambda_d,
        }
    else:
        part = params.partition()
        rationale["target_key"] = [part.target_lo, part.target_hi]
    return {"action": "treat", "next_dose": dose, "rationale": rationale}


def _design_info(params: DesignParams) -> dict:
    info: dict = {"family": params.family.value}
    bounds = params.boundaries()
    info["boundaries"] = {"lambda_e": bounds.lambda_e, "lambda_d": bounds.lambda_d}
    part = params.partition()
    info["partition"] = {
        "target_lo": part.target_lo,
        "target_hi": part.target_hi,
        "keys": [list(k) for k in part.all_keys()],
    }
    return info


def session_view(session: Session) -> dict:
    state, params = session.state, session.params
    return {
        "id": session.id,
        "params": params_to_dict(params),
        "status": state.status.value,
        "current_dose": state.current_dose,
        "k_max": state.k_max,
        "total_patients": state.total_patients,
        "doses": [
            {
                "level": i + 1,
                "n": state.n[i],
                "m": state.m[i],
                "p_hat": (state.m[i] / state.n[i]) if state.n[i] else None,
                "eliminated": state.eliminated[i],
            }
            for i in range(params.K)
        ],
        "history": [
            {"cohort_index": i, "dose": o.dose, "dlt_count": o.dlt_count}
            for i, o in enumerate(state.history)
        ],
        "recommendation": _recommendation(session),
        "design": _design_info(params),
        "created": session.created,
        "updated": session.updated,
    }


# --- persistence ---

def _persist_create(session: Session, data_dir: str) -> None:
    header = {
        "type": "session",
        "id": session.id,
        "params": params_to_dict(session.params),
        "policy_seed": session.policy_seed,
        "created": session.created,
    }
    with open(session.log_path(data_dir), "w") as fh:
        fh.write(json.dumps(header) + "\n")


def _persist_cohort(session: Session, data_dir: str, outcome: CohortOutcome) -> None:
    state = session.state
    record = {
        "type": "cohort",
        "cohort_index": len(state.history) - 1,
        "dose": outcome.dose,
        "dlt_count": outcome.dlt_count,
        "eliminated_after": [i + 1 for i, e in enumerate(state.eliminated) if e],
        "status_after": state.status.value,
        "recorded": session.updated,
    }
    with open(session.log_path(data_dir), "a") as fh:
        fh.write(json.dumps(record) + "\n")


def load_session(path: str) -> Session:
    with open(path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("type") != "session":
        raise ValueError(f"malformed session log {path}: missing header")
    header = lines[0]
    params = params_from_dict(header["params"])
    state = new_trial(params)
    updated = header["created"]
    for rec in lines[1:]:
        state = state._replace(current_dose=rec["dose"])
        state = record_cohort(state, params, CohortOutcome(rec["dose"], rec["dlt_count"]))
        updated = rec.get("recorded", updated)
    return Session(
        id=header["id"],
        params=params,
        state=state,
        policy_seed=int(header["policy_seed"]),
        created=header["created"],
        updated=updated,
    )


# --- HTTP layer ---

class CreateTrialRequest(BaseModel):
    phi: float = 0.30
    K: int = 6
    N: int = 36
    cohort_size: int = 3
    family: str = "boin"
    policy: str | None = None
    elimination_threshold: float = 0.95
    elimination_min_n: int = 3
    escalation_reference: str = "frontier"
    stop_on_toxicity: bool = True
    seed: int | None = None


class CohortRequest(BaseModel):
    dlt_count: int


def create_app(data_dir: str | None = None) -> FastAPI:
    data_dir = data_dir or os.environ.get(DATA_DIR_ENV) or "dosefind-data"
    os.makedirs(data_dir, exist_ok=True)

    app = FastAPI(title="dosebandit recommender", version="0.1.0")
    sessions: dict[str, Session] = {}
    for name in sorted(os.listdir(data_dir)):
        if name.endswith(".jsonl"):
            session = load_session(os.path.join(data_dir, name))
            sessions[session.id] = session

    def get_session_or_404(trial_id: str) -> Session:
        session = sessions.get(trial_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown trial {trial_id!r}")
        return session

    @app.post("/trials", status_code=201)
    def create_trial(req: CreateTrialRequest):
        try:
            params = params_from_dict(req.model_dump(exclude={"seed"}))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        session_id = uuid.uuid4().hex
        policy_seed = req.seed if req.seed is not None else int.from_bytes(os.urandom(8), "big")
        now = _now()
        session = Session(
            id=session_id,
            params=params,
            state=new_trial(params),
            policy_seed=policy_seed,
            created=now,
            updated=now,
        )
        _persist_create(session, data_dir)
        sessions[session_id] = session
        return session_view(session)

    @app.get("/trials/{trial_id}")
    def get_trial(trial_id: str):
        return session_view(get_session_or_404(trial_id))

    @app.post("/trials/{trial_id}/cohorts")
    def post_cohort(trial_id: str, req: CohortRequest):
        session = get_session_or_404(trial_id)
        with session.lock:
            if session.state.status is not Status.ACTIVE:
                raise HTTPException(
                    status_code=409,
                    detail=f"trial is {session.state.status.value}, not active",
                )
            if not 0 <= req.dlt_count <= session.params.cohort_size:
                raise HTTPException(
                    status_code=422,
                    detail=f"dlt_count must be in [0, {session.params.cohort_size}]",
                )
            rec = _recommendation(session)
            dose = rec["next_dose"]
            outcome = CohortOutcome(dose, req.dlt_count)
            state = session.state._replace(current_dose=dose)
            session.state = record_cohort(state, session.params, outcome)
            session.updated = _now()
            _persist_cohort(session, data_dir, outcome)
            return session_view(session)

    @app.get("/trials/{trial_id}/recommendation")
    def get_recommendation(trial_id: str):
        return _recommendation(get_session_or_404(trial_id))

    @app.get("/trials/{trial_id}/whatif")
    def get_whatif(trial_id: str):
        session = get_session_or_404(trial_id)
        if session.state.status is not Status.ACTIVE:
            raise HTTPException(
                status_code=409,
                detail=f"trial is {session.state.status.value}, not active",
            )
        rec = _recommendation(session)
        dose = rec["next_dose"]
        projections = {}
        for dlt in range(session.params.cohort_size + 1):
            state = session.state._replace(current_dose=dose)
            state = record_cohort(state, session.params, CohortOutcome(dose, dlt))
            shadow = Session(
                id=session.id,
                params=session.params,
                state=state,
                policy_seed=session.policy_seed,
                created=session.created,
                updated=session.updated,
            )
            projections[str(dlt)] = {
                "recommendation": _recommendation(shadow),
                "eliminated": [i + 1 for i, e in enumerate(state.eliminated) if e],
                "mtd_preview": _mtd_preview(state, session.params),
            }
        return {"pending_dose": dose, "projections": projections}

    @app.get("/trials/{trial_id}/mtd")
    def get_mtd(trial_id: str):
        session = get_session_or_404(trial_id)
        return {"mtd": _mtd_preview(session.state, session.params)}

    return app


def _mtd_preview(state: TrialState, params: DesignParams) -> int | None:
    """select_mtd as if the trial ended now (safety stops still yield no MTD)."""
    if state.status is Status.ACTIVE:
        state = state._replace(status=Status.COMPLETED)
    return select_mtd(state, params)
