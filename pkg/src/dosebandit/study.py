"""Deterministic parallel Monte Carlo study: execution, aggregation, reports.

Each replicate owns an RNG stream derived by hashing (design, scenario,
replicate) against the master seed, so results are bit-identical for any
worker count and adding a design or scenario never perturbs the random
numbers of existing cells.  Aggregation is integer counting, hence
order-independent.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .numerics import RngStream
from .policies import Policy
from .scenarios import Scenario
from .trial import DesignParams, Family, Status, select_mtd, simulate_trial

DEFAULT_DESIGNS = [
    "boin",
    "boin-ts",
    "boin-ts-eps:0.05",
    "boin-greedy",
    "boin-median",
    "keyboard",
    "keyboard-ts",
    "keyboard-ts-eps:0.05",
    "keyboard-greedy",
    "keyboard-median",
]


def make_design(name: str, base: DesignParams) -> DesignParams:
    """Resolve a design name like "boin-ts-eps:0.05" against shared trial settings."""
    parts = name.lower().split("-", 1)
    family = {"boin": Family.BOIN, "keyboard": Family.KEYBOARD}.get(parts[0])
    if family is None:
        raise ValueError(f"unknown design family in {name!r}")
    policy: Policy | None = None
    if len(parts) == 2:
        tag = parts[1]
        if tag == "ts":
            policy = Policy.thompson()
        elif tag.startswith("ts-eps:"):
            policy = Policy.thompson_eps(float(tag.split(":", 1)[1]))
        elif tag == "greedy":
            policy = Policy.greedy()
        elif tag == "median":
            policy = Policy.median()
        else:
            raise ValueError(f"unknown policy tag {tag!r} in {name!r}")
    return replace(base, family=family, policy=policy)


def replicate_stream(master_seed: int, design: str, scenario: str, replicate: int) -> RngStream:
    """Independent stream for one replicate, stable under re-chunking."""
    digest = hashlib.blake2b(
        f"{design}|{scenario}|{replicate}".encode(), digest_size=8
    ).digest()
    return RngStream(master_seed, int.from_bytes(digest, "big"))


@dataclass
class CellResult:
    """Aggregated outcomes of one (design, scenario) cell."""

    design: str
    scenario: str
    replicates: int
    selection_counts: list[int]  # per dose, MTD selections
    no_mtd_count: int  # safety-stopped replicates
    patients_total: list[int]  # per dose, patients treated, summed over replicates

    @property
    def selection_pct(self) -> list[float]:
        return [100.0 * c / self.replicates for c in self.selection_counts]

    @property
    def pct_no_mtd(self) -> float:
        return 100.0 * self.no_mtd_count / self.replicates

    @property
    def avg_patients(self) -> list[float]:
        return [t / self.replicates for t in self.patients_total]

    def pcmi(self, true_mtd: int) -> float:
        return self.selection_pct[true_mtd - 1]

    def merge(self, other: "CellResult") -> "CellResult":
        assert (self.design, self.scenario) == (other.design, other.scenario)
        return CellResult(
            design=self.design,
            scenario=self.scenario,
            replicates=self.replicates + other.replicates,
            selection_counts=[a + b for a, b in zip(self.selection_counts, other.selection_counts)],
            no_mtd_count=self.no_mtd_count + other.no_mtd_count,
            patients_total=[a + b for a, b in zip(self.patients_total, other.patients_total)],
        )


@dataclass
class StudyMetrics:
    master_seed: int
    base: DesignParams
    scenarios: dict[str, Scenario]
    cells: dict[tuple[str, str], CellResult] = field(default_factory=dict)

    def cell(self, design: str, scenario: str) -> CellResult:
        return self.cells[(design, scenario)]

    def pcmi(self, design: str, scenario: str) -> float:
        return self.cell(design, scenario).pcmi(self.scenarios[scenario].true_mtd)


def _run_chunk(args) -> CellResult:
    design_name, params, scenario, rep_lo, rep_hi, master_seed = args
    K = params.K
    sel = [0] * K
    pat = [0] * K
    no_mtd = 0
    for r in range(rep_lo, rep_hi):
        rng = replicate_stream(master_seed, design_name, scenario.name, r)
        final = simulate_trial(params, scenario.true_tox, rng)
        for i in range(K):
            pat[i] += final.n[i]
        if final.status is Status.STOPPED_TOXICITY:
            no_mtd += 1
        else:
            mtd = select_mtd(final, params)
            if mtd is None:
                no_mtd += 1
            else:
                sel[mtd - 1] += 1
    return CellResult(design_name, scenario.name, rep_hi - rep_lo, sel, no_mtd, pat)


def run_study(
    designs: list[str],
    scenarios: list[Scenario],
    replicates: int,
    master_seed: int,
    base: DesignParams | None = None,
    n_jobs: int | None = None,
    chunk_size: int = 2500,
) -> StudyMetrics:
    """Simulate every (design, scenario) cell; bit-identical for any n_jobs."""
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    base = base if base is not None else DesignParams()
    if n_jobs is None:
        n_jobs = os.cpu_count() or 1

    tasks = []
    for name in designs:
        params = make_design(name, base)
        for scenario in scenarios:
            if len(scenario.true_tox) != params.K:
                raise ValueError(
                    f"scenario {scenario.name} has {len(scenario.true_tox)} doses, K={params.K}"
                )
            for lo in range(0, replicates, chunk_size):
                hi = min(lo + chunk_size, replicates)
                tasks.append((name, params, scenario, lo, hi, master_seed))

    if n_jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_chunk, tasks, chunksize=1))
    else:
        results = [_run_chunk(t) for t in tasks]

    metrics = StudyMetrics(
        master_seed=master_seed,
        base=base,
        scenarios={s.name: s for s in scenarios},
    )
    for res in results:
        key = (res.design, res.scenario)
        metrics.cells[key] = metrics.cells[key].merge(res) if key in metrics.cells else res
    return metrics


def epsilon_sweep(
    eps_values: list[float],
    scenarios: list[Scenario],
    replicates: int,
    master_seed: int,
    base: DesignParams | None = None,
    families: tuple[str, ...] = ("boin", "keyboard"),
    n_jobs: int | None = None,
) -> StudyMetrics:
    """Run the constrained-Thompson designs across a grid of epsilon values."""
    designs = [f"{fam}-ts-eps:{eps:g}" for fam in families for eps in eps_values]
    return run_study(designs, scenarios, replicates, master_seed, base=base, n_jobs=n_jobs)


def sweep_table(metrics: StudyMetrics, eps_values: list[float], family: str) -> dict[float, list[float]]:
    """Per-epsilon correct-selection percentages, one row per epsilon."""
    names = sorted(metrics.scenarios)
    return {
        eps: [metrics.pcmi(f"{family}-ts-eps:{eps:g}", s) for s in names] for eps in eps_values
    }


# --- report emission ---

CSV_FIELDS = [
    "design",
    "scenario",
    "dose",
    "selection_pct",
    "avg_patients",
    "pcmi",
    "pct_no_mtd",
    "replicates",
    "master_seed",
]


def emit_report(metrics: StudyMetrics, formats: list[str], outdir: str) -> list[str]:
    """Write the requested report files; returns the paths written."""
    os.makedirs(outdir, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "csv":
            path = os.path.join(outdir, "results.csv")
            _emit_csv(metrics, path)
        elif fmt == "json":
            path = os.path.join(outdir, "results.json")
            _emit_json(metrics, path)
        elif fmt == "table-text":
            path = os.path.join(outdir, "results.txt")
            _emit_table_text(metrics, path)
        elif fmt == "plot-data":
            path = os.path.join(outdir, "plot_data.json")
            _emit_plot_data(metrics, path)
        else:
            raise ValueError(f"unknown report format {fmt!r}")
        written.append(path)
    return written


def _emit_csv(metrics: StudyMetrics, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for (design, scen), cell in sorted(metrics.cells.items()):
            for dose in range(1, len(cell.selection_counts) + 1):
                writer.writerow(
                    {
                        "design": design,
                        "scenario": scen,
                        "dose": dose,
                        "selection_pct": repr(cell.selection_pct[dose - 1]),
                        "avg_patients": repr(cell.avg_patients[dose - 1]),
                    }
                )
            writer.writerow(
                {
                    "design": design,
                    "scenario": scen,
                    "pcmi": repr(cell.pcmi(metrics.scenarios[scen].true_mtd)),
                    "pct_no_mtd": repr(cell.pct_no_mtd),
                    "replicates": cell.replicates,
                    "master_seed": metrics.master_seed,
                }
            )


def parse_csv_report(path: str) -> dict[tuple[str, str], dict]:
    """Read back a results.csv into {(design, scenario): {...}} for round-trip checks."""
    out: dict[tuple[str, str], dict] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["design"], row["scenario"])
            entry = out.setdefault(
                key, {"selection_pct": {}, "avg_patients": {}, "summary": {}}
            )
            if row["dose"]:
                dose = int(row["dose"])
                entry["selection_pct"][dose] = float(row["selection_pct"])
                entry["avg_patients"][dose] = float(row["avg_patients"])
            else:
                entry["summary"] = {
                    "pcmi": float(row["pcmi"]),
                    "pct_no_mtd": float(row["pct_no_mtd"]),
                    "replicates": int(row["replicates"]),
                    "master_seed": int(row["master_seed"]),
                }
    return out


def _metrics_dict(metrics: StudyMetrics) -> dict:
    return {
        "master_seed": metrics.master_seed,
        "replicates": {f"{d}/{s}": c.replicates for (d, s), c in metrics.cells.items()},
        "cells": [
            {
                "design": d,
                "scenario": s,
                "selection_pct": c.selection_pct,
                "avg_patients": c.avg_patients,
                "pcmi": c.pcmi(metrics.scenarios[s].true_mtd),
                "pct_no_mtd": c.pct_no_mtd,
            }
            for (d, s), c in sorted(metrics.cells.items())
        ],
    }


def _emit_json(metrics: StudyMetrics, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(_metrics_dict(metrics), fh, indent=2)


def _emit_table_text(metrics: StudyMetrics, path: str) -> None:
    designs = sorted({d for d, _ in metrics.cells})
    with open(path, "w") as fh:
        for scen_name in sorted(metrics.scenarios):
            scenario = metrics.scenarios[scen_name]
            tox = "  ".join(f"{100 * p:.0f}" for p in scenario.true_tox)
            fh.write(f"{scen_name} (%Tox) {tox}   true MTD: dose {scenario.true_mtd}\n")
            header = "design".ljust(22) + "%MTD per dose".ljust(40) + "#patients per dose"
            fh.write(header + "\n")
            for design in designs:
                if (design, scen_name) not in metrics.cells:
                    continue
                cell = metrics.cells[(design, scen_name)]
                sel = "  ".join(f"{v:5.1f}" for v in cell.selection_pct)
                pat = "  ".join(f"{v:5.1f}" for v in cell.avg_patients)
                fh.write(f"{design.ljust(22)}{sel}    {pat}\n")
            fh.write("\n")


def _emit_plot_data(metrics: StudyMetrics, path: str) -> None:
    # grouped-bar input: one group per scenario, one bar per design (PCMI)
    designs = sorted({d for d, _ in metrics.cells})
    data = {
        "designs": designs,
        "scenarios": sorted(metrics.scenarios),
        "pcmi": {
            scen: [
                metrics.pcmi(d, scen) if (d, scen) in metrics.cells else None for d in designs
            ]
            for scen in sorted(metrics.scenarios)
        },
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
