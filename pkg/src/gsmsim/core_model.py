"""Nodes, network state and the first-order radio energy model.

Energy is only spent on transmission and reception (plus aggregation for
the clustering baselines). Sensing and sleeping are free.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from gsmsim.errors import ConfigurationError

DEPLOY_STREAM = 0
PROTOCOL_STREAM = 1


class NodeClass(enum.Enum):
    NORMAL = "normal"
    ADVANCED = "advanced"


class Mode(enum.Enum):
    SLEEP = "sleep"
    AWAKE = "awake"


@dataclass(frozen=True)
class Node:
    id: int
    position: tuple[float, float]
    node_class: NodeClass
    energy: float
    alive: bool = True
    mode: Mode = Mode.SLEEP
    rounds_since_ch: int | None = None

    def __post_init__(self):
        if self.energy < 0:
            raise ValueError(f"node {self.id}: negative energy {self.energy}")
        if self.alive != (self.energy > 0):
            raise ValueError(f"node {self.id}: alive flag disagrees with energy")


@dataclass(frozen=True)
class EnergyParams:
    """First-order radio model constants (per bit)."""

    e_elec: float = 50e-9
    eps_fs: float = 10e-12
    eps_mp: float = 0.0013e-12
    e_da: float = 5e-9

    def __post_init__(self):
        for name in ("e_elec", "eps_fs", "eps_mp", "e_da"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigurationError(name, f"must be a positive finite number, got {value!r}")

    @property
    def d0(self) -> float:
        """Crossover distance between the free-space and multipath regimes."""
        return math.sqrt(self.eps_fs / self.eps_mp)


@dataclass(frozen=True)
class NetworkConfig:
    n_nodes: int = 100
    field_side: float = 100.0
    adv_fraction: float = 0.1
    alpha: float = 1.0
    e0: float = 0.5
    packet_bits: int = 4000
    rng_seed: int = 0

    def __post_init__(self):
        if not isinstance(self.n_nodes, int) or self.n_nodes < 1:
            raise ConfigurationError("n_nodes", f"must be an integer >= 1, got {self.n_nodes!r}")
        if not (math.isfinite(self.field_side) and self.field_side > 0):
            raise ConfigurationError("field_side", f"must be > 0, got {self.field_side!r}")
        if not 0.0 <= self.adv_fraction <= 1.0:
            raise ConfigurationError("adv_fraction", f"must lie in [0, 1], got {self.adv_fraction!r}")
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ConfigurationError("alpha", f"must be >= 0, got {self.alpha!r}")
        if not (math.isfinite(self.e0) and self.e0 > 0):
            raise ConfigurationError("e0", f"must be > 0, got {self.e0!r}")
        if not isinstance(self.packet_bits, int) or self.packet_bits <= 0:
            raise ConfigurationError("packet_bits", f"must be a positive integer, got {self.packet_bits!r}")
        if not isinstance(self.rng_seed, int) or not 0 <= self.rng_seed < 2**64:
            raise ConfigurationError("rng_seed", f"must be an unsigned 64-bit integer, got {self.rng_seed!r}")

    @property
    def n_advanced(self) -> int:
        # half-up rounding, not Python's banker's round()
        return int(math.floor(self.adv_fraction * self.n_nodes + 0.5))


def seeded_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for one purpose (deployment, election...) of a run."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def tx_energy(params: EnergyParams, bits: int, distance: float) -> float:
    if bits <= 0:
        raise ValueError(f"bits must be > 0, got {bits}")
    if distance < 0:
        raise ValueError(f"distance must be >= 0, got {distance}")
    d2 = distance * distance
    if distance <= params.d0:
        return params.e_elec * bits + params.eps_fs * bits * d2
    return params.e_elec * bits + params.eps_mp * bits * (d2 * d2)


def tx_energy_array(params: EnergyParams, bits: int, distance: np.ndarray) -> np.ndarray:
    """Vectorised :func:`tx_energy` (no argument checks)."""
    d2 = distance * distance
    amp = np.where(distance <= params.d0, params.eps_fs * bits * d2, params.eps_mp * bits * (d2 * d2))
    return params.e_elec * bits + amp


def rx_energy(params: EnergyParams, bits: int) -> float:
    if bits <= 0:
        raise ValueError(f"bits must be > 0, got {bits}")
    return params.e_elec * bits


def debit(node: Node, amount: float) -> Node:
    """Return ``node`` with ``amount`` joules drawn, clamped at zero."""
    if amount < 0:
        raise ValueError(f"debit amount must be >= 0, got {amount}")
    if not node.alive:
        return node
    energy = node.energy - amount
    if energy <= 0:
        return replace(node, energy=0.0, alive=False, mode=Mode.SLEEP)
    return replace(node, energy=energy)


def _deploy_arrays(config: NetworkConfig):
    rng = seeded_rng(config.rng_seed, DEPLOY_STREAM)
    positions = rng.uniform(0.0, config.field_side, size=(config.n_nodes, 2))
    advanced = np.zeros(config.n_nodes, dtype=bool)
    advanced[rng.permutation(config.n_nodes)[: config.n_advanced]] = True
    energy = np.where(advanced, (1.0 + config.alpha) * config.e0, config.e0)
    return positions, advanced, energy


def deploy(config: NetworkConfig) -> list[Node]:
    """Uniform random deployment; the same seed always yields the same nodes."""
    positions, advanced, energy = _deploy_arrays(config)
    return [
        Node(
            id=i,
            position=(float(positions[i, 0]), float(positions[i, 1])),
            node_class=NodeClass.ADVANCED if advanced[i] else NodeClass.NORMAL,
            energy=float(energy[i]),
        )
        for i in range(config.n_nodes)
    ]


@dataclass
class EnergyLedger:
    """Running totals of every joule drawn from the nodes, by category."""

    by_kind: dict[str, float] = field(default_factory=dict)

    def record(self, kind: str, amount: float) -> None:
        self.by_kind[kind] = self.by_kind.get(kind, 0.0) + amount

    @property
    def total(self) -> float:
        return math.fsum(self.by_kind.values())


class Network:
    """Mutable array-backed state of a deployed network.

    Protocols mutate energies only through :meth:`debit`, which keeps the
    alive flags, the alive count and the energy ledger consistent.
    """

    def __init__(self, positions, node_class, energy, field_side: float):
        self.positions = np.asarray(positions, dtype=float).reshape(-1, 2)
        self.advanced = np.asarray(
            [c is NodeClass.ADVANCED for c in node_class] if not isinstance(node_class, np.ndarray) else node_class,
            dtype=bool,
        )
        self.energy = np.array(energy, dtype=float)
        self.initial_energy = self.energy.copy()
        self.alive = self.energy > 0
        self.field_side = float(field_side)
        self.last_ch_round = np.full(len(self.energy), -1, dtype=np.int64)
        self.awake = np.zeros(len(self.energy), dtype=bool)
        self.n_alive = int(self.alive.sum())
        self.round = 0
        self.ledger = EnergyLedger()
        if np.any(self.positions < 0) or np.any(self.positions > self.field_side):
            raise ConfigurationError("positions", "every node must lie inside the field")

    @classmethod
    def deploy(cls, config: NetworkConfig) -> "Network":
        positions, advanced, energy = _deploy_arrays(config)
        return cls(positions, advanced, energy, config.field_side)

    @classmethod
    def from_nodes(cls, nodes: list[Node], field_side: float) -> "Network":
        return cls(
            [n.position for n in nodes],
            np.array([n.node_class is NodeClass.ADVANCED for n in nodes], dtype=bool),
            [n.energy for n in nodes],
            field_side,
        )

    def __len__(self) -> int:
        return len(self.energy)

    def debit(self, i: int, amount: float, kind: str) -> bool:
        """Draw energy from node ``i``; return whether it is still alive."""
        if amount < 0:
            raise ValueError(f"debit amount must be >= 0, got {amount}")
        if not self.alive[i]:
            return False
        energy = self.energy[i]
        if amount >= energy:
            self.ledger.record(kind, float(energy))
            self.energy[i] = 0.0
            self.alive[i] = False
            self.awake[i] = False
            self.n_alive -= 1
            return False
        self.ledger.record(kind, amount)
        self.energy[i] = energy - amount
        return True

    def debit_many(self, idx: np.ndarray, amounts: np.ndarray, kind: str) -> np.ndarray:
        """Vectorised :meth:`debit` over distinct node indices; returns survivors mask."""
        idx = np.asarray(idx, dtype=np.int64)
        amounts = np.asarray(amounts, dtype=float)
        if idx.size == 0:
            return np.zeros(0, dtype=bool)
        if np.any(amounts < 0):
            raise ValueError("debit amounts must be >= 0")
        live = self.alive[idx]
        before = self.energy[idx]
        drawn = np.where(live, np.minimum(amounts, before), 0.0)
        after = before - drawn
        survives = live & (amounts < before)
        after[~survives] = 0.0
        self.energy[idx] = after
        died = live & ~survives
        self.alive[idx[died]] = False
        self.awake[idx[died]] = False
        self.n_alive -= int(died.sum())
        self.ledger.record(kind, math.fsum(drawn))
        return survives

    def node(self, i: int) -> Node:
        return Node(
            id=i,
            position=(float(self.positions[i, 0]), float(self.positions[i, 1])),
            node_class=NodeClass.ADVANCED if self.advanced[i] else NodeClass.NORMAL,
            energy=float(self.energy[i]),
            alive=bool(self.alive[i]),
            mode=Mode.AWAKE if self.awake[i] else Mode.SLEEP,
            rounds_since_ch=int(self.round - self.last_ch_round[i]) if self.last_ch_round[i] >= 0 else None,
        )

    def nodes(self) -> Iterator[Node]:
        for i in range(len(self)):
            yield self.node(i)

    @property
    def residual(self) -> float:
        return math.fsum(self.energy)

    @property
    def initial_total(self) -> float:
        return math.fsum(self.initial_energy)
