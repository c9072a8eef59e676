"""Delay-tolerant WSN simulator: joint geometric sink mobility vs. LEACH and SEP."""

from gsmsim.core_model import EnergyParams, Network, NetworkConfig, Node, NodeClass, deploy, rx_energy, tx_energy
from gsmsim.geometry import FieldGeometry, TrajectoryKind, build_trajectory, characteristic_distances, partition_field
from gsmsim.sim_engine import RunOptions, RunSummary, compare, run

__all__ = [
    "EnergyParams", "Network", "NetworkConfig", "Node", "NodeClass", "deploy", "rx_energy", "tx_energy",
    "FieldGeometry", "TrajectoryKind", "build_trajectory", "characteristic_distances", "partition_field",
    "RunOptions", "RunSummary", "compare", "run",
]

__version__ = "0.1.0"
