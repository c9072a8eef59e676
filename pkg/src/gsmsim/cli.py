"""Command-line entry point: ``gsmsim {run,lp,delay,geometry}``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace
from pathlib import Path

from gsmsim.config import ExperimentConfig, load_config, parse_seeds
from gsmsim.core_model import Network
from gsmsim.delay_calculus import ring_delay_bounds, token_bucket
from gsmsim.errors import ConfigurationError, GsmSimError, ModelingError
from gsmsim.geometry import TrajectoryKind, build_trajectory, geometry_csv, partition_field
from gsmsim.lifetime_lp import build_lifetime_lp, export_lp, schedule_sojourns, solve_lp
from gsmsim.protocol_gsm import node_cells
from gsmsim.sim_engine import PROTOCOLS, compare
from gsmsim.simplex import LpStatus

EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _seeds_arg(text: str):
    try:
        return parse_seeds(text)
    except ConfigurationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--seeds", type=_seeds_arg, metavar="A..B",
                        help="seed range A..B (inclusive) or comma list; overrides the config")
    common.add_argument("--out", metavar="DIR", help="output directory (default: out_dir from config, else ./out)")

    parser = argparse.ArgumentParser(prog="gsmsim", description="Joint mobile-sink WSN simulator with LEACH/SEP baselines.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[common], help="simulate protocols over seeds and write metrics CSVs")
    p_run.add_argument("--protocol", action="append", choices=PROTOCOLS,
                       help="protocol to run; repeat for several (default: all)")
    p_run.add_argument("--rounds", type=int, metavar="N", help="maximum rounds per run")

    p_lp = sub.add_parser("lp", parents=[common], help="build the lifetime program for the first seed's deployment")
    p_lp.add_argument("--export", action="store_true", help="write lifetime.lp in LP text format")
    p_lp.add_argument("--solve", action="store_true", help="solve with the internal simplex and print T*")

    sub.add_parser("delay", parents=[common], help="per-node delay bounds for the first seed's deployment")
    sub.add_parser("geometry", parents=[common], help="dump cells and trajectories as CSV")
    return parser


def _config(args) -> ExperimentConfig:
    overrides = {"seeds": args.seeds, "out_dir": args.out}
    if getattr(args, "protocol", None):
        overrides["protocols"] = tuple(dict.fromkeys(args.protocol))
    if getattr(args, "rounds", None) is not None:
        overrides["max_rounds"] = args.rounds
    return load_config(args.config, overrides)


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def cmd_run(cfg: ExperimentConfig) -> int:
    result = compare(cfg.network, cfg.protocols, cfg.seeds, cfg.max_rounds, cfg.run_options)
    out = _out_dir(cfg)
    for r in result.runs:
        _write(out / f"run_{r.protocol}_seed{r.seed}.csv", r.metrics_csv())
    _write(out / "summary.csv", result.summary_csv())
    print(result.table())
    print(f"wrote {len(result.runs)} run CSVs and summary.csv to {out}")
    return 0


def _first_seed_network(cfg: ExperimentConfig) -> Network:
    return Network.deploy(replace(cfg.network, rng_seed=cfg.seeds[0]))


def cmd_lp(cfg: ExperimentConfig, export: bool, solve: bool) -> int:
    geometry = partition_field(cfg.network.field_side, cfg.divisions)
    network = _first_seed_network(cfg)
    sojourns = schedule_sojourns(geometry, [build_trajectory(geometry, k) for k in TrajectoryKind])
    instance = build_lifetime_lp(network, geometry, sojourns, cfg.energy, cfg.network.packet_bits,
                                 cfg.packets_per_epoch, cfg.link_capacity)
    if export or not solve:
        path = _out_dir(cfg) / "lifetime.lp"
        _write(path, export_lp(instance))
        print(f"wrote {path}")
    if solve:
        sol = solve_lp(instance)
        print(f"status: {sol.status.value}")
        if sol.status is LpStatus.OPTIMAL:
            print(f"T* = {sol.objective_value!r}")
            for s in sojourns:
                name = f"t_{s.name}"
                print(f"{name} = {sol.variable_values[name]!r}")
    return 0


def cmd_delay(cfg: ExperimentConfig) -> int:
    geometry = partition_field(cfg.network.field_side, cfg.divisions)
    network = _first_seed_network(cfg)
    ring_of = {}
    for kind in TrajectoryKind:
        traj = build_trajectory(geometry, kind)
        for cell in traj.stops:
            ring_of[cell] = (kind.value, len(traj))
    rings = [ring_of.get(int(c), ("none", None)) for c in node_cells(network, geometry)]
    bound = ring_delay_bounds([length for _, length in rings], token_bucket(cfg.arrival_rate, cfg.arrival_burst),
                              cfg.link_rate, cfg.epoch_duration)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["node_id", "ring", "D_i", "D_bar_i"])
    for i, ((ring, _), d, dbar) in enumerate(zip(rings, bound.per_node, bound.per_path)):
        writer.writerow([i, ring, repr(d), repr(dbar)])
    path = _out_dir(cfg) / "delay.csv"
    _write(path, buf.getvalue())
    print(f"wrote {path}")
    print(f"network D_bar = {bound.network!r}")
    return 0


def cmd_geometry(cfg: ExperimentConfig) -> int:
    path = _out_dir(cfg) / "geometry.csv"
    _write(path, geometry_csv(partition_field(cfg.network.field_side, cfg.divisions)))
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
    except ConfigurationError as exc:
        print(f"gsmsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "lp":
            return cmd_lp(cfg, args.export, args.solve)
        if args.command == "delay":
            return cmd_delay(cfg)
        return cmd_geometry(cfg)
    except ConfigurationError as exc:
        print(f"gsmsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelingError as exc:
        print(f"gsmsim: modeling error (node {exc.node_id}): {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (GsmSimError, OSError) as exc:
        print(f"gsmsim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
