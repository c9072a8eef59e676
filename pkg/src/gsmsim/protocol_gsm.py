"""Joint mobile-sink collection over the inner and outer trajectories.

Each epoch both sinks sit at the centre of one cell of their ring. Nodes in
those two cells wake up and send straight to the sink; every other node
sleeps at no cost. Then both sinks step to the next stop together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from gsmsim.core_model import EnergyParams, Network, tx_energy, tx_energy_array
from gsmsim.errors import ProtocolError
from gsmsim.geometry import (
    FieldGeometry,
    Trajectory,
    TrajectoryKind,
    build_trajectory,
    cell_of,
    node_sink_distance,
)


@dataclass(frozen=True)
class SinkState:
    trajectory: Trajectory
    position: tuple[float, float]
    sojourn_index: int = 0
    epoch: int = 0

    @classmethod
    def start(cls, geometry: FieldGeometry, kind: TrajectoryKind) -> "SinkState":
        trajectory = build_trajectory(geometry, kind)
        return cls(trajectory, geometry.center(trajectory.stops[0]))

    @property
    def cell(self) -> int:
        return self.trajectory.stops[self.sojourn_index]


@dataclass(frozen=True)
class GsmRoundOutcome:
    awake_cells: frozenset[int]
    packets_delivered: int
    energy_spent: float
    deaths: tuple[int, ...]
    packets_generated: int = 0

    @property
    def packets_lost(self) -> int:
        return self.packets_generated - self.packets_delivered


def _check_sinks(sinks) -> None:
    kinds = [s.trajectory.kind for s in sinks]
    if len(set(kinds)) != len(kinds):
        raise ProtocolError(f"each sink needs its own trajectory kind, got {[k.value for k in kinds]}")
    epochs = {s.epoch for s in sinks}
    if len(epochs) > 1:
        raise ProtocolError(f"sinks are out of lockstep: epochs {sorted(epochs)}")


def node_cells(network: Network, geometry: FieldGeometry) -> np.ndarray:
    return np.array([cell_of((x, y), geometry) for x, y in network.positions], dtype=np.int64)


def assign_modes(network: Network, geometry: FieldGeometry, sinks) -> np.ndarray:
    """Wake exactly the alive nodes whose cell currently hosts a sink.

    Writes the result into ``network.awake`` and returns it.
    """
    _check_sinks(sinks)
    hosted = [s.cell for s in sinks]
    awake = np.isin(node_cells(network, geometry), hosted) & network.alive
    network.awake[:] = awake
    return awake


def _transmit(network: Network, senders, costs, packets) -> tuple[int, int, float, list[int]]:
    """Send ``packets[j]`` packets of cost ``costs[j]`` from each sender in order.

    A sender stops at the packet that exhausts it; that packet is lost.
    Returns delivered and generated counts, energy drawn, and the dead.
    """
    delivered = 0
    generated = 0
    drawn = []
    deaths = []
    energy = network.energy
    for i, cost, n in zip(senders, costs, packets):
        generated += n
        for _ in range(n):
            left = float(energy[i])
            if network.debit(i, cost, "gsm_tx"):
                delivered += 1
                drawn.append(cost)
            else:
                drawn.append(left)
                deaths.append(int(i))
                break
    return delivered, generated, math.fsum(drawn), deaths


def run_sojourn(network: Network, geometry: FieldGeometry, sinks, params: EnergyParams, k: int) -> GsmRoundOutcome:
    """Every awake alive node sends one ``k``-bit packet to the sink in its cell."""
    _check_sinks(sinks)
    by_cell = {s.cell: s for s in sinks}
    senders, costs = [], []
    for i in np.flatnonzero(network.awake & network.alive):
        sink = by_cell.get(cell_of(tuple(network.positions[i]), geometry))
        if sink is None:
            raise ProtocolError(f"node {i} is awake but no sink occupies its cell")
        senders.append(int(i))
        costs.append(tx_energy(params, k, node_sink_distance(tuple(network.positions[i]), sink.position)))
    delivered, generated, spent, deaths = _transmit(network, senders, costs, [1] * len(senders))
    return GsmRoundOutcome(
        awake_cells=frozenset(by_cell),
        packets_delivered=delivered,
        energy_spent=spent,
        deaths=tuple(deaths),
        packets_generated=generated,
    )


def advance_sinks(sinks, geometry: FieldGeometry):
    """Move every sink to its next stop and bump the shared epoch counter."""
    _check_sinks(sinks)
    out = []
    for s in sinks:
        idx = (s.sojourn_index + 1) % len(s.trajectory)
        out.append(replace(s, sojourn_index=idx, epoch=s.epoch + 1, position=geometry.center(s.trajectory.stops[idx])))
    return tuple(out)


class GsmProtocol:
    """Round driver with per-cell membership and per-node costs precomputed.

    Nodes never move and sinks always stop at cell centres, so each node's
    packet cost is fixed for the whole run. Sink positions are tracked as
    plain stop indices; :attr:`sinks` materialises the equivalent states.

    With ``drain_backlog`` a node senses one packet every epoch while asleep
    and flushes its whole backlog when its cell is visited, instead of
    sending a single packet per visit.
    """

    def __init__(self, network: Network, geometry: FieldGeometry, params: EnergyParams, k: int,
                 drain_backlog: bool = False):
        self.network = network
        self.geometry = geometry
        self.params = params
        self.k = k
        self.drain_backlog = drain_backlog
        self.trajectories = (
            build_trajectory(geometry, TrajectoryKind.INNER),
            build_trajectory(geometry, TrajectoryKind.OUTER),
        )
        self.stop_index = [0, 0]
        self.epoch = 0
        cells = node_cells(network, geometry)
        centers = np.array([geometry.center(c) for c in cells]).reshape(-1, 2)
        dist = np.hypot(*(network.positions - centers).T)
        self.node_cell = cells
        self.cost = tx_energy_array(params, k, dist).tolist()
        self.members = {c: np.flatnonzero(cells == c).tolist() for c in range(len(geometry.cells))}
        self.last_visit = [0] * len(network)

    @property
    def sinks(self) -> tuple[SinkState, ...]:
        return tuple(
            SinkState(t, self.geometry.center(t.stops[i]), i, self.epoch)
            for t, i in zip(self.trajectories, self.stop_index)
        )

    def step(self) -> GsmRoundOutcome:
        net = self.network
        alive = net.alive
        hosted = [t.stops[i] for t, i in zip(self.trajectories, self.stop_index)]
        net.awake[:] = False
        senders = [i for c in hosted for i in self.members[c] if alive[i]]
        net.awake[senders] = True
        self.epoch += 1
        if self.drain_backlog:
            packets = [self.epoch - self.last_visit[i] for i in senders]
            for i in senders:
                self.last_visit[i] = self.epoch
        else:
            packets = [1] * len(senders)
        costs = [self.cost[i] for i in senders]
        delivered, generated, spent, deaths = _transmit(net, senders, costs, packets)
        self.stop_index = [(i + 1) % len(t) for t, i in zip(self.trajectories, self.stop_index)]
        return GsmRoundOutcome(
            awake_cells=frozenset(hosted),
            packets_delivered=delivered,
            energy_spent=spent,
            deaths=tuple(deaths),
            packets_generated=generated,
        )
