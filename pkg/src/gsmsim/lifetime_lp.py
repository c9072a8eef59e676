"""Lifetime-maximisation linear program for a fixed sink schedule.

Variables
    ``t_<m>``      time (epochs) the sinks spend at sojourn ``m``
    ``x_<i>_<m>``  packets per epoch node ``i`` sends to the sink at ``m``
    ``C_<m>``      placement indicator of sojourn ``m`` (fixed to 1 by the schedule)

Objective: maximise the sum of all ``t_<m>``.

Rows are named ``c_<tag>_<index>`` with tags
    ``place``   each scheduled location hosts exactly one sink
    ``flow``    packets a node forwards per awake epoch equal what it generates
    ``energy``  transmit energy over all sojourns stays within the node's budget
    ``rate``    per-link rate never exceeds the link capacity
    ``sched``   a sink spends equal time at every stop of its ring
    ``sync``    both sinks move together, so every ring gets the same total time

The last two tie the sojourn times to the cyclic schedule; without them a
sojourn over an empty cell would make the program unbounded.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gsmsim.core_model import EnergyParams, Network, tx_energy
from gsmsim.errors import ModelingError
from gsmsim.geometry import FieldGeometry, Trajectory, TrajectoryKind, cell_of, node_sink_distance
from gsmsim.simplex import LpSolution, LpStatus, solve_standard

_NAME_RE = re.compile(r"[^A-Za-z0-9_]")


def sanitize(name: str) -> str:
    clean = _NAME_RE.sub("_", name)
    if not clean or clean[0].isdigit():
        clean = "v_" + clean
    return clean


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float = 0.0
    upper: float = math.inf


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: tuple[tuple[str, float], ...]
    sense: str
    rhs: float

    def __post_init__(self):
        if self.sense not in ("<=", ">=", "="):
            raise ValueError(f"constraint {self.name}: unknown sense {self.sense!r}")

    def activity(self, values: dict[str, float]) -> float:
        return math.fsum(a * values[v] for v, a in self.coeffs)

    def satisfied(self, values: dict[str, float], tol: float = 1e-7) -> bool:
        lhs = self.activity(values)
        scale = max(1.0, abs(self.rhs))
        if self.sense == "<=":
            return lhs <= self.rhs + tol * scale
        if self.sense == ">=":
            return lhs >= self.rhs - tol * scale
        return abs(lhs - self.rhs) <= tol * scale


@dataclass(frozen=True)
class LpInstance:
    variables: tuple[Variable, ...]
    objective: tuple[tuple[str, float], ...]
    constraints: tuple[Constraint, ...]
    comments: tuple[str, ...] = ()

    def __post_init__(self):
        declared = {v.name for v in self.variables}
        if len(declared) != len(self.variables):
            raise ValueError("duplicate variable names")
        for name, _ in self.objective:
            if name not in declared:
                raise ValueError(f"objective references undeclared variable {name}")
        for c in self.constraints:
            for name, _ in c.coeffs:
                if name not in declared:
                    raise ValueError(f"constraint {c.name} references undeclared variable {name}")

    @property
    def variable_names(self) -> list[str]:
        return [v.name for v in self.variables]

    def constraint(self, name: str) -> Constraint:
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)

    def with_constraints(self, constraints: Sequence[Constraint]) -> "LpInstance":
        return LpInstance(self.variables, self.objective, tuple(constraints), self.comments)


@dataclass(frozen=True)
class Sojourn:
    """One scheduled stop: the ring it belongs to and the cell it serves."""

    name: str
    ring: TrajectoryKind
    cell: int
    position: tuple[float, float]


def schedule_sojourns(geometry: FieldGeometry, trajectories: Sequence[Trajectory]) -> list[Sojourn]:
    out = []
    for traj in trajectories:
        for order, cell in enumerate(traj.stops):
            out.append(Sojourn(f"{traj.kind.value}{order}", traj.kind, cell, geometry.center(cell)))
    return out


def build_lifetime_lp(network: Network, geometry: FieldGeometry, sojourns: Sequence[Sojourn],
                      params: EnergyParams, k: int, packets_per_epoch: float = 1.0,
                      link_capacity: float = 1.0) -> LpInstance:
    """Lifetime program for ``network`` served by the fixed ``sojourns``.

    A node is covered by a sojourn when it lies in that sojourn's cell; it
    then sends ``packets_per_epoch`` packets per epoch of that sojourn at
    its true distance to the sink. Energies are the nodes' current ones.
    """
    if not sojourns:
        raise ModelingError("the sojourn set is empty")
    if packets_per_epoch <= 0 or link_capacity <= 0:
        raise ModelingError("packets_per_epoch and link_capacity must be > 0")

    t_names = [sanitize(f"t_{s.name}") for s in sojourns]
    c_names = [sanitize(f"C_{s.name}") for s in sojourns]
    by_cell: dict[int, list[int]] = {}
    for m, s in enumerate(sojourns):
        by_cell.setdefault(s.cell, []).append(m)

    energy_rows, flow_rows, rate_rows = [], [], []
    x_vars = []
    for i in np.flatnonzero(network.alive):
        pos = (float(network.positions[i, 0]), float(network.positions[i, 1]))
        covering = by_cell.get(cell_of(pos, geometry), [])
        if not covering:
            raise ModelingError(f"node {i} at {pos} is not covered by any sojourn", node_id=int(i))
        terms = []
        for m in covering:
            x = sanitize(f"x_{i}_{sojourns[m].name}")
            x_vars.append(Variable(x))
            cost = tx_energy(params, k, node_sink_distance(pos, sojourns[m].position))
            terms.append((t_names[m], packets_per_epoch * cost))
            flow_rows.append((((x, 1.0),), "=", float(packets_per_epoch)))
            rate_rows.append((((x, 1.0),), "<=", float(link_capacity)))
        energy_rows.append((tuple(terms), "<=", float(network.energy[i])))

    sched_rows, sync_rows = [], []
    rings: dict[TrajectoryKind, list[int]] = {}
    for m, s in enumerate(sojourns):
        rings.setdefault(s.ring, []).append(m)
    for members in rings.values():
        for a, b in zip(members, members[1:]):
            sched_rows.append((((t_names[a], 1.0), (t_names[b], -1.0)), "=", 0.0))
    ring_list = list(rings.values())
    for first, other in zip(ring_list, ring_list[1:]):
        coeffs = tuple((t_names[m], 1.0) for m in first) + tuple((t_names[m], -1.0) for m in other)
        sync_rows.append((coeffs, "=", 0.0))

    place_rows = [(((c, 1.0),), "=", 1.0) for c in c_names]

    constraints = []
    for tag, rows in (("energy", energy_rows), ("flow", flow_rows), ("rate", rate_rows),
                      ("place", place_rows), ("sched", sched_rows), ("sync", sync_rows)):
        constraints.extend(Constraint(f"c_{tag}_{j}", coeffs, sense, rhs) for j, (coeffs, sense, rhs) in enumerate(rows))

    variables = (
        tuple(Variable(t) for t in t_names)
        + tuple(x_vars)
        + tuple(Variable(c, 0.0, 1.0) for c in c_names)
    )
    comments = (
        "flow rows: packets generated at a node minus packets it forwards equals zero,"
        " i.e. forwarded x equals generated X per awake epoch (incoming minus outgoing)",
    )
    return LpInstance(variables, tuple((t, 1.0) for t in t_names), tuple(constraints), comments)


def solve_lp(instance: LpInstance) -> LpSolution:
    """Solve with the internal simplex; bounds become shifts and extra rows."""
    names = instance.variable_names
    col = {n: j for j, n in enumerate(names)}
    lower = np.array([v.lower for v in instance.variables])
    if np.any(~np.isfinite(lower)):
        raise ValueError("free variables are not supported")
    c = np.zeros(len(names))
    for n, a in instance.objective:
        c[col[n]] += a

    blocks = {"<=": ([], []), "=": ([], []), ">=": ([], [])}
    order = []
    for con in instance.constraints:
        row = np.zeros(len(names))
        for n, a in con.coeffs:
            row[col[n]] += a
        A, b = blocks[con.sense]
        A.append(row)
        b.append(con.rhs - row @ lower)
        order.append((con.sense, len(A) - 1, con.name))
    for j, v in enumerate(instance.variables):
        if math.isfinite(v.upper):
            row = np.zeros(len(names))
            row[j] = 1.0
            blocks["<="][0].append(row)
            blocks["<="][1].append(v.upper - v.lower)

    status, y, _, duals, iters = solve_standard(
        c,
        A_ub=blocks["<="][0], b_ub=blocks["<="][1],
        A_eq=blocks["="][0], b_eq=blocks["="][1],
        A_ge=blocks[">="][0], b_ge=blocks[">="][1],
    )
    if status == "infeasible":
        return LpSolution(LpStatus.INFEASIBLE, iterations=iters)
    if status == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, objective_value=math.inf, iterations=iters)

    values = {n: float(y[j] + lower[j]) for j, n in enumerate(names)}
    offset = {"<=": 0, "=": len(blocks["<="][0]), ">=": len(blocks["<="][0]) + len(blocks["="][0])}
    dual_map = {name: float(duals[offset[sense] + idx]) for sense, idx, name in order}
    objective = math.fsum(a * values[n] for n, a in instance.objective)
    return LpSolution(LpStatus.OPTIMAL, objective, values, dual_map, iters)


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _expr(coeffs) -> str:
    parts = []
    for j, (name, a) in enumerate(coeffs):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        term = name if mag == 1.0 else f"{_fmt(mag)} {name}"
        if j == 0:
            parts.append(term if sign == "+" else f"- {term}")
        else:
            parts.append(f"{sign} {term}")
    return " ".join(parts) if parts else "0"


def export_lp(instance: LpInstance) -> str:
    """CPLEX-style LP text: Maximize, Subject To, Bounds, End."""
    lines = [f"\\ {c}" for c in instance.comments]
    lines += ["Maximize", f" obj: {_expr(instance.objective)}", "Subject To"]
    for con in instance.constraints:
        lines.append(f" {con.name}: {_expr(con.coeffs)} {con.sense} {_fmt(con.rhs)}")
    used = {n for n, _ in instance.objective} | {n for c in instance.constraints for n, _ in c.coeffs}
    bound_lines = []
    for v in instance.variables:
        lo, hi = v.lower, v.upper
        if lo == hi:
            bound_lines.append(f" {v.name} = {_fmt(lo)}")
        elif lo == 0.0 and math.isinf(hi):
            if v.name not in used:
                bound_lines.append(f" {v.name} >= 0")
        elif math.isinf(hi):
            bound_lines.append(f" {v.name} >= {_fmt(lo)}")
        elif lo == 0.0:
            bound_lines.append(f" {v.name} <= {_fmt(hi)}")
        else:
            bound_lines.append(f" {_fmt(lo)} <= {v.name} <= {_fmt(hi)}")
    if bound_lines:
        lines += ["Bounds"] + bound_lines
    lines.append("End")
    return "\n".join(lines) + "\n"


def _parse_expr(text: str) -> tuple[tuple[str, float], ...]:
    text = text.strip()
    if text == "0":
        return ()
    terms = []
    pos = 0
    for m in re.finditer(r"\s*([+-])?\s*(?:([0-9][0-9.]*(?:[eE][+-]?[0-9]+)?)\s+)?([A-Za-z_][A-Za-z0-9_]*)", text):
        if m.start() != pos:
            raise ValueError(f"cannot parse expression near {text[pos:]!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        terms.append((m.group(3), sign * coef))
        pos = m.end()
    if text[pos:].strip():
        raise ValueError(f"trailing text in expression: {text[pos:]!r}")
    return tuple(terms)


def parse_lp(text: str) -> LpInstance:
    """Read back what :func:`export_lp` writes."""
    comments, objective = [], ()
    constraints = []
    bounds: dict[str, tuple[float, float]] = {}
    order: list[str] = []

    def note(names):
        for n in names:
            if n not in order:
                order.append(n)

    section = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            comments.append(line[1:].strip())
            continue
        low = line.lower()
        if low in ("maximize", "maximise", "max", "subject to", "st", "s.t.", "bounds", "end"):
            section = low
            continue
        if section in ("maximize", "maximise", "max"):
            _, _, expr = line.partition(":")
            objective = _parse_expr(expr)
            note(n for n, _ in objective)
        elif section in ("subject to", "st", "s.t."):
            name, _, body = line.partition(":")
            m = re.match(r"(.*?)(<=|>=|=)\s*(\S+)$", body.strip())
            if not m:
                raise ValueError(f"cannot parse constraint line {raw!r}")
            coeffs = _parse_expr(m.group(1))
            note(n for n, _ in coeffs)
            constraints.append(Constraint(name.strip(), coeffs, m.group(2), float(m.group(3))))
        elif section == "bounds":
            parts = line.split()
            if len(parts) == 5:
                lo, _, name, _, hi = parts
                bounds[name] = (float(lo), float(hi))
            elif len(parts) == 3:
                name, op, val = parts
                lo, hi = bounds.get(name, (0.0, math.inf))
                if op == "=":
                    lo = hi = float(val)
                elif op == ">=":
                    lo = float(val)
                elif op == "<=":
                    hi = float(val)
                bounds[name] = (lo, hi)
            else:
                raise ValueError(f"cannot parse bound line {raw!r}")
            note([name])
        elif section == "end":
            break
        else:
            raise ValueError(f"text outside any section: {raw!r}")
    variables = tuple(Variable(n, *bounds.get(n, (0.0, math.inf))) for n in order)
    return LpInstance(variables, objective, tuple(constraints), tuple(comments))
