"""LEACH and SEP baselines against a static base station.

Both protocols elect cluster heads with the rotating threshold
``T = p / (1 - p * (r mod ceil(1/p)))``. LEACH gives every node the same
``p``; SEP weights it by initial energy so advanced nodes head clusters
``1 + alpha`` times as often as normal ones.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from gsmsim.core_model import EnergyParams, Network, Node, NodeClass, rx_energy, tx_energy, tx_energy_array
from gsmsim.errors import ConfigurationError

BASE_STATION = -1


class Variant(enum.Enum):
    LEACH = "leach"
    SEP = "sep"


@dataclass(frozen=True)
class ClusterConfig:
    p_opt: float = 0.1
    alpha: float = 1.0
    m: float = 0.1
    bs_position: tuple[float, float] = (50.0, 50.0)
    variant: Variant = Variant.LEACH

    def __post_init__(self):
        if not 0.0 < self.p_opt < 1.0:
            raise ConfigurationError("p_opt", f"must lie in (0, 1), got {self.p_opt!r}")
        if self.alpha < 0:
            raise ConfigurationError("alpha", f"must be >= 0, got {self.alpha!r}")
        if not 0.0 <= self.m <= 1.0:
            raise ConfigurationError("adv_fraction", f"must lie in [0, 1], got {self.m!r}")
        if not 0.0 < self.p_advanced < 1.0:
            raise ConfigurationError("p_opt", f"advanced-node probability {self.p_advanced:.4g} is not in (0, 1)")

    @property
    def p_normal(self) -> float:
        if self.variant is Variant.LEACH:
            return self.p_opt
        return self.p_opt / (1.0 + self.alpha * self.m)

    @property
    def p_advanced(self) -> float:
        if self.variant is Variant.LEACH:
            return self.p_opt
        return self.p_opt * (1.0 + self.alpha) / (1.0 + self.alpha * self.m)

    def probability(self, node_class: NodeClass) -> float:
        return self.p_advanced if node_class is NodeClass.ADVANCED else self.p_normal


def epoch_length(p: float) -> int:
    # 1/(0.1/1.1) evaluates to 11.000000000000002; don't let that round up to 12
    return math.ceil(1.0 / p - 1e-9)


def _threshold(p: float, r: int) -> float:
    return min(1.0, p / (1.0 - p * (r % epoch_length(p))))


def election_threshold(node: Node, round: int, config: ClusterConfig) -> float:
    """Probability that ``node`` elects itself cluster head in round ``round`` (0-based)."""
    if not node.alive:
        return 0.0
    p = config.probability(node.node_class)
    if node.rounds_since_ch is not None and node.rounds_since_ch <= round % epoch_length(p):
        return 0.0
    return _threshold(p, round)


def thresholds(network: Network, round: int, config: ClusterConfig) -> np.ndarray:
    """Vectorised :func:`election_threshold` over every node of ``network``."""
    out = np.zeros(len(network))
    for cls_mask, p in ((~network.advanced, config.p_normal), (network.advanced, config.p_advanced)):
        e = epoch_length(p)
        epoch_start = round - round % e
        served = network.last_ch_round >= max(epoch_start, 0)
        served &= network.last_ch_round >= 0
        eligible = cls_mask & network.alive & ~served
        out[eligible] = _threshold(p, round)
    return out


def elect_cluster_heads(network: Network, round: int, config: ClusterConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw this round's heads (sorted node ids) and mark them as served.

    One uniform draw is consumed per node per round, alive or not, so the
    random stream does not depend on who has died.
    """
    draws = rng.random(len(network))
    heads = np.flatnonzero(draws < thresholds(network, round, config))
    network.last_ch_round[heads] = round
    return heads


@dataclass(frozen=True)
class ClusterAssignment:
    heads: tuple[int, ...]
    members: tuple[int, ...]
    member_head: tuple[int, ...]

    @property
    def membership(self) -> dict[int, int]:
        """Member id to head id, or :data:`BASE_STATION` for direct senders."""
        return dict(zip(self.members, self.member_head))


def form_clusters(network: Network, heads) -> ClusterAssignment:
    """Attach each alive non-head to its nearest head (lower id wins ties)."""
    heads = np.sort(np.asarray(heads, dtype=np.int64))
    heads = heads[network.alive[heads]]
    is_head = np.zeros(len(network), dtype=bool)
    is_head[heads] = True
    members = np.flatnonzero(network.alive & ~is_head)
    if heads.size == 0:
        target = np.full(members.size, BASE_STATION, dtype=np.int64)
    else:
        diff = network.positions[members, None, :] - network.positions[None, heads, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        target = heads[np.argmin(d2, axis=1)] if members.size else np.zeros(0, dtype=np.int64)
    return ClusterAssignment(tuple(int(h) for h in heads), tuple(int(m) for m in members), tuple(int(t) for t in target))


@dataclass(frozen=True)
class ClusterRoundOutcome:
    packets_delivered: int
    energy_spent: float
    deaths: tuple[int, ...]
    heads: tuple[int, ...]


def run_cluster_round(network: Network, assignment: ClusterAssignment, params: EnergyParams, k: int,
                      bs_position: tuple[float, float]) -> ClusterRoundOutcome:
    """Members -> heads -> base station, with aggregation at each head.

    A packet whose transmission exhausts its sender is lost, so a head that
    dies before finishing its uplink delivers nothing for its cluster.
    """
    before = network.ledger.total
    alive_before = network.alive.copy()
    bs = np.asarray(bs_position, dtype=float)
    members = np.asarray(assignment.members, dtype=np.int64)
    target = np.asarray(assignment.member_head, dtype=np.int64)
    packets = 0

    direct = target == BASE_STATION
    if members.size:
        dest = np.where(direct[:, None], bs[None, :], network.positions[np.where(direct, 0, target)])
        dist = np.hypot(*(network.positions[members] - dest).T)
        sent_ok = network.debit_many(members, tx_energy_array(params, k, dist), "member_tx")
        packets += int(np.count_nonzero(sent_ok & direct))
        received = np.bincount(target[sent_ok & ~direct], minlength=len(network)) if np.any(~direct) else None
    else:
        received = None

    rx_cost = rx_energy(params, k)
    for h in assignment.heads:
        n_rx = int(received[h]) if received is not None else 0
        if n_rx and not network.debit(h, n_rx * rx_cost, "head_rx"):
            continue
        if not network.debit(h, (n_rx + 1) * params.e_da * k, "head_agg"):
            continue
        d_bs = math.hypot(network.positions[h, 0] - bs[0], network.positions[h, 1] - bs[1])
        if network.debit(h, tx_energy(params, k, d_bs), "head_tx"):
            packets += 1

    deaths = tuple(int(i) for i in np.flatnonzero(alive_before & ~network.alive))
    return ClusterRoundOutcome(packets, network.ledger.total - before, deaths, assignment.heads)


class ClusterProtocol:
    """Round driver for LEACH / SEP over a deployed network."""

    def __init__(self, network: Network, params: EnergyParams, k: int, config: ClusterConfig,
                 rng: np.random.Generator):
        self.network = network
        self.params = params
        self.k = k
        self.config = config
        self.rng = rng
        self.round = 0

    def step(self) -> ClusterRoundOutcome:
        self.network.round = self.round
        heads = elect_cluster_heads(self.network, self.round, self.config, self.rng)
        assignment = form_clusters(self.network, heads)
        outcome = run_cluster_round(self.network, assignment, self.params, self.k, self.config.bs_position)
        self.round += 1
        return outcome
