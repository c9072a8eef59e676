"""Worst-case FIFO delay from piecewise-linear arrival and service curves.

The delay bound of a node is the horizontal deviation between its arrival
curve and its service curve,

    h(alpha, beta) = sup_{s >= 0} inf { tau >= 0 : alpha(s) <= beta(s + tau) },

computed exactly on the finite set of breakpoints where the sup can occur.
Per-hop bounds add along a path and the network bound is the worst path.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass
from typing import Sequence

INF = math.inf


class CurveRole(enum.Enum):
    ARRIVAL = "arrival"
    SERVICE = "service"


@dataclass(frozen=True)
class Segment:
    start: float
    value: float
    slope: float


@dataclass(frozen=True)
class PwlCurve:
    """Non-decreasing, left-continuous piecewise-linear curve on ``[0, inf)``.

    Segment ``k`` covers ``(start_k, start_{k+1}]`` and equals
    ``value_k + slope_k * (s - start_k)`` there; ``value_k`` is therefore
    the right limit at ``start_k``. The value at exactly 0 is ``at_zero``.
    """

    segments: tuple[Segment, ...]
    role: CurveRole
    at_zero: float = 0.0

    def __post_init__(self):
        segs = self.segments
        if not segs or segs[0].start != 0.0:
            raise ValueError("first segment must start at 0")
        if self.at_zero < 0 or self.at_zero > segs[0].value:
            raise ValueError("value at 0 must lie in [0, first segment value]")
        for a, b in zip(segs, segs[1:]):
            if b.start <= a.start:
                raise ValueError("segment starts must be strictly increasing")
            if b.value < a.value + a.slope * (b.start - a.start) - 1e-12:
                raise ValueError("curve must be non-decreasing")
        if any(s.slope < 0 or s.value < 0 for s in segs):
            raise ValueError("curve must be non-negative and non-decreasing")

    @property
    def breakpoints(self) -> list[float]:
        return [s.start for s in self.segments]

    @property
    def final_slope(self) -> float:
        return self.segments[-1].slope

    def _segment_for(self, s: float) -> Segment:
        # left-continuous: s == start_k belongs to segment k-1
        k = bisect.bisect_left(self.breakpoints, s) - 1
        return self.segments[max(k, 0)]

    def __call__(self, s: float) -> float:
        if s < 0:
            raise ValueError(f"curves are defined on s >= 0, got {s}")
        if s == 0:
            return self.at_zero
        seg = self._segment_for(s)
        return seg.value + seg.slope * (s - seg.start)

    def right_limit(self, s: float) -> float:
        seg = self.segment_after(s)
        return seg.value + seg.slope * (s - seg.start)

    def segment_after(self, s: float) -> Segment:
        return self.segments[bisect.bisect_right(self.breakpoints, s) - 1]

    def strict_inverse(self, y: float) -> float:
        """``inf { t >= 0 : curve(t) > y }`` (``inf`` if never exceeded)."""
        if self.at_zero > y:
            return 0.0
        segs = self.segments
        for k, seg in enumerate(segs):
            if seg.value > y:
                return seg.start
            end = segs[k + 1].start if k + 1 < len(segs) else INF
            if seg.slope > 0:
                t = seg.start + (y - seg.value) / seg.slope
                if t < end:
                    return t
        return INF

    def lower_inverse(self, y: float) -> float:
        """Smallest ``t >= 0`` with ``curve(t) >= y`` (``inf`` if never reached)."""
        if y <= self.at_zero:
            return 0.0
        segs = self.segments
        for k, seg in enumerate(segs):
            if seg.value >= y:
                return seg.start
            end = segs[k + 1].start if k + 1 < len(segs) else INF
            if seg.slope > 0:
                t = seg.start + (y - seg.value) / seg.slope
                if t <= end:
                    return t
        return INF


def token_bucket(rate: float, burst: float) -> PwlCurve:
    """Arrival curve ``b + r*s`` for ``s > 0``, zero at ``s = 0``."""
    if rate < 0 or burst < 0:
        raise ValueError(f"token bucket needs rate >= 0 and burst >= 0, got ({rate}, {burst})")
    return PwlCurve((Segment(0.0, float(burst), float(rate)),), CurveRole.ARRIVAL)


def rate_latency(rate: float, latency: float) -> PwlCurve:
    """Service curve ``max(0, R * (s - T))``."""
    if rate <= 0:
        raise ValueError(f"service rate must be > 0, got {rate}")
    if latency < 0:
        raise ValueError(f"latency must be >= 0, got {latency}")
    if latency == 0:
        return PwlCurve((Segment(0.0, 0.0, float(rate)),), CurveRole.SERVICE)
    return PwlCurve((Segment(0.0, 0.0, 0.0), Segment(float(latency), 0.0, float(rate))), CurveRole.SERVICE)


def horizontal_deviation(arrival: PwlCurve, service: PwlCurve) -> float:
    """Exact worst-case delay, or ``inf`` if the service cannot keep up.

    Between consecutive candidate points both the arrival value and the
    service inverse are affine in ``s``, so the gap ``beta^-1(alpha(s)) - s``
    is affine too and its sup is reached at a candidate, possibly only as a
    right limit (arrival jumps, or arrival rising off a flat service level).
    """
    if arrival.final_slope > service.final_slope:
        return INF

    levels = set()
    for bp in service.breakpoints:
        levels.add(service.right_limit(bp))
        levels.add(service(bp))
    candidates = set(arrival.breakpoints)
    a_segs = arrival.segments
    for k, seg in enumerate(a_segs):
        if seg.slope <= 0:
            continue
        end = a_segs[k + 1].start if k + 1 < len(a_segs) else INF
        for y in levels:
            s = seg.start + (y - seg.value) / seg.slope
            if seg.start <= s <= end:
                candidates.add(s)
    candidates.add(max(max(candidates), max(service.breakpoints)) + 1.0)

    worst = 0.0
    for s in sorted(candidates):
        after = arrival.right_limit(s)
        gaps = [service.lower_inverse(arrival(s)), service.lower_inverse(after)]
        if arrival.segment_after(s).slope > 0:
            gaps.append(service.strict_inverse(after))
        t = max(gaps)
        if t == INF:
            return INF
        worst = max(worst, t - s)
    return worst


def path_delay(bounds: Sequence[float]) -> float:
    """End-to-end bound: per-hop bounds add; one infinite hop makes it infinite."""
    if any(b < 0 for b in bounds):
        raise ValueError("per-hop delay bounds must be >= 0")
    if any(math.isinf(b) for b in bounds):
        return INF
    return math.fsum(bounds)


def network_delay(path_bounds: Sequence[float]) -> float:
    if not path_bounds:
        raise ValueError("network delay needs at least one path bound")
    return max(path_bounds)


@dataclass(frozen=True)
class DelayBound:
    per_node: tuple[float, ...]
    per_path: tuple[float, ...]
    network: float


def ring_service_curve(link_rate: float, ring_length: int, epoch: float) -> PwlCurve:
    """Lower service curve of a node whose cell is visited once every ``ring_length`` epochs.

    The worst case is data arriving just after the sink leaves: it waits
    ``ring_length - 1`` epochs, then gets the full link for one epoch per
    cycle. The rate-latency curve with the duty-cycled rate touches that
    staircase at the end of each gap and stays below it elsewhere.
    """
    if ring_length < 1:
        raise ValueError("ring_length must be >= 1")
    return rate_latency(link_rate / ring_length, (ring_length - 1) * epoch)


def ring_delay_bounds(ring_lengths: Sequence[int | None], arrival: PwlCurve, link_rate: float,
                      epoch: float) -> DelayBound:
    """Per-node single-hop bounds for nodes served by rings of the given lengths.

    ``None`` marks a node no sink ever visits; its bound is infinite.
    """
    cache: dict[int, float] = {}
    per_node = []
    for length in ring_lengths:
        if length is None:
            per_node.append(INF)
            continue
        if length not in cache:
            cache[length] = horizontal_deviation(arrival, ring_service_curve(link_rate, length, epoch))
        per_node.append(cache[length])
    per_path = [path_delay([d]) for d in per_node]
    return DelayBound(tuple(per_node), tuple(per_path), network_delay(per_path))
