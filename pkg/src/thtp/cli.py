"""Command-line entry point: ``thtp {run,sweep,spread-demo,validate}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import fields
from pathlib import Path

import numpy as np

from .config import ConfigError, SimConfig, parse_config
from .experiments import SWEEP_VALUES, SweepSpec, run_sweep, summarize
from .geometry import Network
from .metrics import write_rows_csv
from .routing import write_delivery_log
from .simulation import TARGET_ID, Simulation, coverage_simulation
from .traces import write_snapshots_csv

log = logging.getLogger("thtp")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value config file")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    g = p.add_argument_group("simulation parameters (override the config file)")
    for f in fields(SimConfig):
        flag = "--" + f.name.replace("_", "-")
        g.add_argument(flag, dest=f.name, default=None, metavar=f.type.upper(),
                       help=f"default: {f.default!r}")


def _resolve(args) -> SimConfig:
    overrides = {f.name: getattr(args, f.name) for f in fields(SimConfig)}
    return parse_config(args.config, overrides)


def cmd_validate(args) -> int:
    cfg = _resolve(args)
    sys.stdout.write(cfg.to_text())
    return 0


def cmd_run(args) -> int:
    cfg = _resolve(args)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    sim = Simulation(cfg, record=args.export, snapshot_every=args.snapshot_every)
    rows = sim.run()
    summary = summarize(sim, rows)
    stem = f"run_{cfg.seed}"
    write_rows_csv(out / f"{stem}.csv", rows)
    (out / f"{stem}_config.txt").write_text(cfg.to_text(), encoding="utf-8")
    (out / f"{stem}_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if args.export:
        sim.network.write_edge_list(out / f"{stem}_edges.txt")
        sim.write_spread_tree(out / f"{stem}_spread_tree.txt")
        sim.write_trajectories(out / f"{stem}_agents.csv")
        write_delivery_log(out / f"{stem}_deliveries.csv", sim.messages)
    if sim.snapshots:
        write_snapshots_csv(out / f"{stem}_traces.csv", sim.snapshots)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    base = _resolve(args)
    spec = SweepSpec(args.param, list(SWEEP_VALUES[args.param]), args.seeds_per_value, base)
    table, outcomes = run_sweep(spec, args.out, workers=args.workers)
    failed = sum(o.error is not None for o in outcomes)
    for row in table:
        print(
            f"{args.param}={row['value']:.6g}  localizations={row['median_localizations']:g}  "
            f"localized={row['median_localized_fraction']:.3f}  spread={row['median_msgs_spread']:g} "
            f"[{row['q1']:g}, {row['q3']:g}]  per-node={row['median_msgs_per_node']:.1f}"
        )
    if failed:
        print(f"{failed} run(s) failed; see log", file=sys.stderr)
    return 0


def cmd_spread_demo(args) -> int:
    cfg = _resolve(args)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    net = Network.random(args.nodes, args.side, cfg.d_trx, rng)
    origin = net.nearest_node((args.side / 2, args.side / 2))
    sim = coverage_simulation(net, origin, cfg, record=True)
    reached = len(sim.reached[TARGET_ID])
    comp = net.component_of(origin)
    net.write_edge_list(out / "spread_demo_edges.txt")
    sim.write_spread_tree(out / "spread_demo_tree.txt", TARGET_ID)
    np.savetxt(out / "spread_demo_positions.txt", net.positions, fmt="%.6f")
    print(json.dumps({
        "origin": origin,
        "reached": reached,
        "messages": sim.counts["spread"],
        "component_size": len(comp),
        "reached_fraction_of_component": reached / len(comp),
    }, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thtp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one simulation; writes a time-series CSV")
    _add_config_flags(p)
    p.add_argument("--export", action="store_true",
                   help="also write edge list, spread tree, agent trajectories and delivery log")
    p.add_argument("--snapshot-every", type=float, default=0.0, metavar="S",
                   help="dump trace tables every S seconds (0 = off)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="one of the four parameter sweeps")
    p.add_argument("--param", required=True, choices=sorted(SWEEP_VALUES))
    p.add_argument("--seeds-per-value", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spread-demo", help="spread one trace from the centre of a static network")
    p.add_argument("--nodes", type=int, default=2500)
    p.add_argument("--side", type=float, default=1000.0)
    _add_config_flags(p)
    p.set_defaults(func=cmd_spread_demo)

    p = sub.add_parser("validate", help="resolve and check a configuration")
    _add_config_flags(p)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return args.func(args)
    except ConfigError as exc:
        print(f"thtp: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"thtp: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
