"""Plain ``key = value`` experiment configuration.

Blank lines and ``#`` comments are ignored. Keys mirror the field names of
:class:`NetworkConfig` and :class:`EnergyParams`; unknown or repeated keys
are errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from gsmsim.core_model import EnergyParams, NetworkConfig
from gsmsim.errors import ConfigurationError
from gsmsim.sim_engine import PROTOCOLS, RunOptions


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"1..20"`` (inclusive), ``"3,5,8"`` or a single ``"7"``."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = (int(p) for p in text.split("..", 1))
            if hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1))
        seeds = tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigurationError("seeds", f"expected A..B or a comma list of integers, got {text!r}") from None
    if not seeds:
        raise ConfigurationError("seeds", "no seeds given")
    return seeds


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _protocols(text: str) -> tuple[str, ...]:
    out = tuple(p.strip().lower() for p in text.split(",") if p.strip())
    bad = [p for p in out if p not in PROTOCOLS]
    if bad or not out:
        raise ValueError(f"protocols must be drawn from {', '.join(PROTOCOLS)}")
    return out


_PARSERS = {
    "n_nodes": int,
    "field_side": float,
    "adv_fraction": float,
    "alpha": float,
    "e0": float,
    "packet_bits": int,
    "e_elec": float,
    "eps_fs": float,
    "eps_mp": float,
    "e_da": float,
    "divisions": int,
    "protocols": _protocols,
    "seeds": parse_seeds,
    "rng_seed": int,
    "max_rounds": int,
    "out_dir": str,
    "p_opt": float,
    "bs_x": float,
    "bs_y": float,
    "gsm_drain": _bool,
    "packets_per_epoch": float,
    "link_capacity": float,
    "arrival_rate": float,
    "arrival_burst": float,
    "link_rate": float,
    "epoch_duration": float,
}


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    energy: EnergyParams = field(default_factory=EnergyParams)
    divisions: int = 4
    protocols: tuple[str, ...] = PROTOCOLS
    seeds: tuple[int, ...] = tuple(range(1, 21))
    max_rounds: int = 5000
    out_dir: str = "out"
    p_opt: float = 0.1
    bs_position: tuple[float, float] | None = None
    gsm_drain: bool = False
    # lifetime program: packets generated per awake epoch, link capacity in packets per epoch
    packets_per_epoch: float = 1.0
    link_capacity: float = 1.0
    # delay report, bits and seconds
    arrival_rate: float = 4000.0
    arrival_burst: float = 4000.0
    link_rate: float = 250_000.0
    epoch_duration: float = 1.0

    @property
    def run_options(self) -> RunOptions:
        return RunOptions(self.energy, self.divisions, self.p_opt, self.bs_position, self.gsm_drain)


def _positive(name: str, value: float, line: int | None) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ConfigurationError(name, f"must be > 0, got {value!r}", line)


def build_config(values: dict[str, object], lines: dict[str, int] | None = None) -> ExperimentConfig:
    """Assemble and validate an :class:`ExperimentConfig` from parsed values."""
    lines = lines or {}
    v = dict(values)
    net_keys = ("n_nodes", "field_side", "adv_fraction", "alpha", "e0", "packet_bits")
    energy_keys = ("e_elec", "eps_fs", "eps_mp", "e_da")
    try:
        network = NetworkConfig(**{k: v.pop(k) for k in net_keys if k in v})
        energy = EnergyParams(**{k: v.pop(k) for k in energy_keys if k in v})
    except ConfigurationError as exc:
        raise ConfigurationError(exc.field, str(exc).split(": ", 1)[-1], lines.get(exc.field)) from None

    if "rng_seed" in v:
        if "seeds" in v:
            raise ConfigurationError("rng_seed", "give either rng_seed or seeds, not both", lines.get("rng_seed"))
        v["seeds"] = (v.pop("rng_seed"),)
    bs = None
    if "bs_x" in v or "bs_y" in v:
        side = network.field_side
        bs = (float(v.pop("bs_x", side / 2)), float(v.pop("bs_y", side / 2)))
    divisions = v.get("divisions", 4)
    if divisions < 4 or divisions % 2:
        raise ConfigurationError("divisions", f"must be an even integer >= 4, got {divisions}", lines.get("divisions"))
    if v.get("max_rounds", 1) < 1:
        raise ConfigurationError("max_rounds", "must be >= 1", lines.get("max_rounds"))
    p_opt = v.get("p_opt", 0.1)
    if not 0 < p_opt < 1:
        raise ConfigurationError("p_opt", f"must lie in (0, 1), got {p_opt}", lines.get("p_opt"))
    for key in ("packets_per_epoch", "link_capacity", "link_rate", "epoch_duration"):
        if key in v:
            _positive(key, v[key], lines.get(key))
    for key in ("arrival_rate", "arrival_burst"):
        if key in v and not (math.isfinite(v[key]) and v[key] >= 0):
            raise ConfigurationError(key, f"must be >= 0, got {v[key]!r}", lines.get(key))
    return ExperimentConfig(network=network, energy=energy, bs_position=bs, **v)


def parse_config_text(text: str, source: str = "<config>") -> tuple[dict[str, object], dict[str, int]]:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigurationError(key or "?", f"{source}: expected 'key = value'", lineno)
        if key not in _PARSERS:
            raise ConfigurationError(key, f"{source}: unknown key", lineno)
        if key in values:
            raise ConfigurationError(key, f"{source}: duplicate key (first on line {lines[key]})", lineno)
        try:
            values[key] = _PARSERS[key](value.strip())
        except ConfigurationError as exc:
            raise ConfigurationError(key, f"{source}: {str(exc).split(': ', 1)[-1]}", lineno) from None
        except ValueError as exc:
            raise ConfigurationError(key, f"{source}: bad value {value.strip()!r} ({exc})", lineno) from None
        lines[key] = lineno
    return values, lines


def load_config(path: str | Path | None, overrides: dict[str, object] | None = None) -> ExperimentConfig:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigurationError("config", f"cannot read {p}: {exc.strerror or exc}") from None
        values, lines = parse_config_text(text, str(p))
    for key, value in (overrides or {}).items():
        if value is not None:
            if key == "seeds":
                values.pop("rng_seed", None)
            values[key] = value
            lines.pop(key, None)
    return build_config(values, lines)
