"""Command-line interface: simulate, sweep-eps, boundaries, serve.

Exit codes: 0 on success, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import sys

from .designs import boin_boundaries, keyboard_partition
from .scenarios import builtin_scenarios, load_scenarios
from .study import (
    DEFAULT_DESIGNS,
    emit_report,
    epsilon_sweep,
    run_study,
    sweep_table,
)
from .trial import DesignParams, Family


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dosebandit",
        description="BOIN/Keyboard dose-finding designs with bandit dose selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_protocol_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--scenarios", default="builtin",
                       help="'builtin' or a path to a JSON scenario file")
        p.add_argument("--replicates", type=int, default=10000)
        p.add_argument("--seed", type=int, default=20240101)
        p.add_argument("--phi", type=float, default=0.30)
        p.add_argument("--n", type=int, default=36, help="maximum sample size N")
        p.add_argument("--cohort", type=int, default=3, help="cohort size")
        p.add_argument("--doses", type=int, default=6, help="number of dose levels K")
        p.add_argument("--stop-on-toxicity", action=argparse.BooleanOptionalAction,
                       default=False,
                       help="stop the trial when dose 1 is eliminated (default: off, "
                            "the protocol used for the published tables)")
        p.add_argument("--out", default="results")
        p.add_argument("--format", default="csv,json",
                       help="comma list of csv,json,table-text,plot-data")
        p.add_argument("--threads", default="auto",
                       help="worker process count, or 'auto'")

    sim = sub.add_parser("simulate", help="run the Monte Carlo operating-characteristics study")
    sim.add_argument("--designs", default=",".join(DEFAULT_DESIGNS),
                     help="comma list, e.g. boin,boin-ts,boin-ts-eps:0.05,keyboard-greedy")
    add_protocol_args(sim)

    sweep = sub.add_parser("sweep-eps", help="PCMI stability sweep over TS-eps values")
    sweep.add_argument("--eps", default="0.01,0.03,0.05,0.10",
                       help="comma list of epsilon values")
    sweep.add_argument("--families", default="boin,keyboard")
    add_protocol_args(sweep)

    bnd = sub.add_parser("boundaries", help="print BOIN boundaries and the Keyboard key partition")
    bnd.add_argument("--phi", type=float, default=0.30)

    srv = sub.add_parser("serve", help="run the trial-conduct HTTP service")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--data-dir", default=None,
                     help="session event-log directory (or env DOSEFIND_DATA_DIR)")
    return parser


def _base_params(args: argparse.Namespace) -> DesignParams:
    return DesignParams(
        phi=args.phi,
        K=args.doses,
        N=args.n,
        cohort_size=args.cohort,
        family=Family.BOIN,
        stop_on_toxicity=args.stop_on_toxicity,
    )


def _load_scenarios(spec: str):
    if spec == "builtin":
        return builtin_scenarios()
    return load_scenarios(spec)


def _n_jobs(threads: str) -> int | None:
    if threads == "auto":
        return None
    return int(threads)


def _cmd_simulate(args: argparse.Namespace) -> int:
    scenarios = _load_scenarios(args.scenarios)
    designs = [d.strip() for d in args.designs.split(",") if d.strip()]
    metrics = run_study(
        designs, scenarios, args.replicates, args.seed,
        base=_base_params(args), n_jobs=_n_jobs(args.threads),
    )
    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    for path in emit_report(metrics, formats, args.out):
        print(f"wrote {path}")
    for scen in sorted(metrics.scenarios):
        for design in designs:
            print(f"{design:24s} {scen}  PCMI {metrics.pcmi(design, scen):5.1f}%")
    return 0


def _cmd_sweep_eps(args: argparse.Namespace) -> int:
    scenarios = _load_scenarios(args.scenarios)
    eps_values = [float(e) for e in args.eps.split(",") if e.strip()]
    families = tuple(f.strip() for f in args.families.split(",") if f.strip())
    metrics = epsilon_sweep(
        eps_values, scenarios, args.replicates, args.seed,
        base=_base_params(args), families=families, n_jobs=_n_jobs(args.threads),
    )
    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    for path in emit_report(metrics, formats, args.out):
        print(f"wrote {path}")
    names = sorted(metrics.scenarios)
    for family in families:
        print(f"{family}: PCMI per scenario {names}")
        table = sweep_table(metrics, eps_values, family)
        for eps, row in table.items():
            print(f"  eps={eps:<5g} " + "  ".join(f"{v:5.1f}" for v in row))
        spreads = [max(r) - min(r) for r in zip(*table.values())]
        print("  spread   " + "  ".join(f"{s:5.1f}" for s in spreads))
    return 0


def _cmd_boundaries(args: argparse.Namespace) -> int:
    bounds = boin_boundaries(args.phi)
    print(f"phi = {args.phi}")
    print(f"BOIN lambda_e = {bounds.lambda_e:.6f}")
    print(f"BOIN lambda_d = {bounds.lambda_d:.6f}")
    part = keyboard_partition(args.phi)
    print(f"Keyboard target key = ({part.target_lo}, {part.target_hi})")
    print(f"Keyboard lower keys = {list(part.lower_keys)}")
    print(f"Keyboard upper keys = {list(part.upper_keys)}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "sweep-eps": _cmd_sweep_eps,
        "boundaries": _cmd_boundaries,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:  # JSONDecodeError subclasses ValueError
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
