"""Round loop, per-round metrics and multi-seed protocol comparison."""

from __future__ import annotations

import csv
import io
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from gsmsim.core_model import PROTOCOL_STREAM, EnergyParams, Network, NetworkConfig, seeded_rng
from gsmsim.errors import ConfigurationError
from gsmsim.geometry import partition_field
from gsmsim.protocol_clustering import ClusterConfig, ClusterProtocol, Variant
from gsmsim.protocol_gsm import GsmProtocol

PROTOCOLS = ("gsm", "leach", "sep")
METRICS_HEADER = ["round", "alive", "dead", "packets", "cum_packets", "residual_j"]
SUMMARY_HEADER = ["protocol", "seed", "first_death", "half_death", "last_death", "total_packets"]


@dataclass(frozen=True)
class RunOptions:
    """Everything about a run except the network and the protocol."""

    energy: EnergyParams = field(default_factory=EnergyParams)
    divisions: int = 4
    p_opt: float = 0.1
    bs_position: tuple[float, float] | None = None
    gsm_drain: bool = False


@dataclass(frozen=True)
class RoundMetrics:
    round: int
    alive: int
    dead: int
    packets_this_round: int
    packets_cumulative: int
    total_residual_energy: float


@dataclass
class RunSummary:
    protocol: str
    seed: int
    n_nodes: int
    packet_bits: int
    first_death_round: int | None
    half_death_round: int | None
    last_death_round: int | None
    total_packets: int
    initial_energy: float
    final_energy: float
    debited_energy: float
    alive: np.ndarray
    packets: np.ndarray
    residual: np.ndarray

    @property
    def rounds(self) -> int:
        return len(self.alive)

    @property
    def series(self) -> list[RoundMetrics]:
        cum = np.cumsum(self.packets)
        return [
            RoundMetrics(r + 1, int(a), self.n_nodes - int(a), int(p), int(c), float(e))
            for r, (a, p, c, e) in enumerate(zip(self.alive, self.packets, cum, self.residual))
        ]

    def packets_until(self, round_no: int) -> int:
        """Cumulative packets delivered in rounds ``1..round_no``."""
        return int(self.packets[:round_no].sum())

    @property
    def total_bits(self) -> int:
        return self.total_packets * self.packet_bits

    def metrics_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        cum = 0
        for r, (a, p, e) in enumerate(zip(self.alive.tolist(), self.packets.tolist(), self.residual.tolist())):
            cum += p
            writer.writerow([r + 1, a, self.n_nodes - a, p, cum, repr(e)])
        return buf.getvalue()


def _make_protocol(network: Network, protocol: str, config: NetworkConfig, options: RunOptions):
    if protocol == "gsm":
        geometry = partition_field(config.field_side, options.divisions)
        return GsmProtocol(network, geometry, options.energy, config.packet_bits, options.gsm_drain)
    variant = Variant(protocol)
    bs = options.bs_position or (config.field_side / 2, config.field_side / 2)
    cluster = ClusterConfig(options.p_opt, config.alpha, config.adv_fraction, bs, variant)
    rng = seeded_rng(config.rng_seed, PROTOCOL_STREAM)
    return ClusterProtocol(network, options.energy, config.packet_bits, cluster, rng)


def run(config: NetworkConfig, protocol: str, max_rounds: int = 5000, options: RunOptions | None = None) -> RunSummary:
    """Deploy with ``config.rng_seed`` and drive ``protocol`` until extinction or ``max_rounds``."""
    options = options or RunOptions()
    if protocol not in PROTOCOLS:
        raise ConfigurationError("protocol", f"unknown protocol {protocol!r}; choose from {', '.join(PROTOCOLS)}")
    if not isinstance(max_rounds, int) or max_rounds < 1:
        raise ConfigurationError("max_rounds", f"must be an integer >= 1, got {max_rounds!r}")
    network = Network.deploy(config)
    driver = _make_protocol(network, protocol, config, options)
    n = len(network)
    half = math.ceil(n / 2)

    alive, packets, residual = [], [], []
    first = half_round = last = None
    for r in range(1, max_rounds + 1):
        outcome = driver.step()
        n_alive = network.n_alive
        alive.append(n_alive)
        packets.append(outcome.packets_delivered)
        residual.append(float(network.energy.sum()))
        dead = n - n_alive
        if first is None and dead >= 1:
            first = r
        if half_round is None and dead >= half:
            half_round = r
        if n_alive == 0:
            last = r
            break

    packets_arr = np.asarray(packets, dtype=np.int64)
    return RunSummary(
        protocol=protocol,
        seed=config.rng_seed,
        n_nodes=n,
        packet_bits=config.packet_bits,
        first_death_round=first,
        half_death_round=half_round,
        last_death_round=last,
        total_packets=int(packets_arr.sum()),
        initial_energy=network.initial_total,
        final_energy=network.residual,
        debited_energy=network.ledger.total,
        alive=np.asarray(alive, dtype=np.int64),
        packets=packets_arr,
        residual=np.asarray(residual),
    )


def _run_cell(args):
    config, protocol, max_rounds, options = args
    return run(config, protocol, max_rounds, options)


def worker_count(requested: int | None = None) -> int:
    """Replicate parallelism: explicit value, else ``GSM_SIM_THREADS`` (0 = all cores)."""
    if requested is None:
        raw = os.environ.get("GSM_SIM_THREADS", "1")
        try:
            requested = int(raw)
        except ValueError:
            raise ConfigurationError("GSM_SIM_THREADS", f"must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ConfigurationError("GSM_SIM_THREADS", "must be >= 0")
    return requested or (os.cpu_count() or 1)


@dataclass(frozen=True)
class ProtocolStats:
    protocol: str
    runs: int
    first_mean: float
    first_std: float
    half_mean: float
    half_std: float
    last_mean: float
    last_std: float
    packets_mean: float
    packets_std: float
    censored: int


def _mean_std(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return math.nan, math.nan
    return statistics.fmean(vals), (statistics.stdev(vals) if len(vals) > 1 else 0.0)


@dataclass
class Comparison:
    runs: list[RunSummary]

    def by_protocol(self, protocol: str) -> list[RunSummary]:
        return [r for r in self.runs if r.protocol == protocol]

    def paired(self, protocol: str) -> dict[int, RunSummary]:
        return {r.seed: r for r in self.by_protocol(protocol)}

    @property
    def stats(self) -> list[ProtocolStats]:
        out = []
        for proto in dict.fromkeys(r.protocol for r in self.runs):
            rs = self.by_protocol(proto)
            fm, fs = _mean_std([r.first_death_round for r in rs])
            hm, hs = _mean_std([r.half_death_round for r in rs])
            lm, ls = _mean_std([r.last_death_round for r in rs])
            pm, ps = _mean_std([r.total_packets for r in rs])
            censored = sum(r.last_death_round is None for r in rs)
            out.append(ProtocolStats(proto, len(rs), fm, fs, hm, hs, lm, ls, pm, ps, censored))
        return out

    def summary_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for r in self.runs:
            writer.writerow([
                r.protocol, r.seed,
                "" if r.first_death_round is None else r.first_death_round,
                "" if r.half_death_round is None else r.half_death_round,
                "" if r.last_death_round is None else r.last_death_round,
                r.total_packets,
            ])
        return buf.getvalue()

    def table(self) -> str:
        """Human-readable per-protocol summary (half-death is an added robustness metric)."""
        head = (f"{'protocol':<8} {'runs':>4} {'first_death':>18} {'half_death*':>18} "
                f"{'last_death':>18} {'packets':>20} {'bits':>14} {'censored':>8}")
        lines = [head]
        for s in self.stats:
            bits = s.packets_mean * self.runs[0].packet_bits if self.runs else math.nan
            lines.append(
                f"{s.protocol:<8} {s.runs:>4} {s.first_mean:>10.1f} ±{s.first_std:>6.1f} "
                f"{s.half_mean:>10.1f} ±{s.half_std:>6.1f} {s.last_mean:>10.1f} ±{s.last_std:>6.1f} "
                f"{s.packets_mean:>12.1f} ±{s.packets_std:>6.1f} {bits:>14.4g} {s.censored:>8}"
            )
        lines.append("* half_death is not part of the original comparison; added for robustness")
        return "\n".join(lines)


def compare(config: NetworkConfig, protocols, seeds, max_rounds: int = 5000, options: RunOptions | None = None,
            workers: int | None = None) -> Comparison:
    """Run every (protocol, seed) pair on the same per-seed deployment."""
    protocols = list(protocols)
    seeds = list(seeds)
    if not protocols:
        raise ConfigurationError("protocol", "at least one protocol is required")
    if not seeds:
        raise ConfigurationError("seeds", "at least one seed is required")
    options = options or RunOptions()
    cells = [(replace(config, rng_seed=s), p, max_rounds, options) for p in protocols for s in seeds]
    n_workers = min(worker_count(workers), len(cells))
    if n_workers <= 1:
        results = [_run_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_cell, cells))
    return Comparison(results)
