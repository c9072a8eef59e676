import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import grid_deviation

from gsmsim.delay_calculus import (
    INF,
    CurveRole,
    PwlCurve,
    Segment,
    horizontal_deviation,
    network_delay,
    path_delay,
    rate_latency,
    ring_delay_bounds,
    ring_service_curve,
    token_bucket,
)


def tb(r, b):
    return lambda s: np.where(s > 0, b + r * s, 0.0)


def rl(R, T):
    return lambda t: R * np.maximum(0.0, t - T)


def test_token_bucket_values():
    assert token_bucket(0, 5)(0.0) == 0 and token_bucket(0, 5)(1e-9) == 5 and token_bucket(0, 5)(100) == 5
    assert token_bucket(1, 0)(3.5) == 3.5
    assert token_bucket(2, 3)(4) == 11


def test_rate_latency_values():
    assert rate_latency(2, 3)(3) == 0
    assert rate_latency(2, 3)(5) == 4
    assert rate_latency(1, 0)(7.25) == 7.25


@pytest.mark.parametrize("bad", [(-1, 0), (0, -1)])
def test_token_bucket_rejects_negative(bad):
    with pytest.raises(ValueError):
        token_bucket(*bad)


@pytest.mark.parametrize("bad", [(0, 1), (-1, 1), (1, -0.5)])
def test_rate_latency_rejects_bad(bad):
    with pytest.raises(ValueError):
        rate_latency(*bad)


def test_classic_pair():
    assert horizontal_deviation(token_bucket(1, 5), rate_latency(2, 3)) == pytest.approx(5.5, abs=1e-12)


def test_classic_pair_against_grid():
    assert grid_deviation(tb(1, 5), rl(2, 3), 20.0) == pytest.approx(5.5, abs=1e-3)


def test_identical_curves():
    assert horizontal_deviation(rate_latency(1, 0), rate_latency(1, 0)) == 0.0


def test_unstable_pair():
    assert horizontal_deviation(token_bucket(3, 1), rate_latency(2, 0)) == INF


def test_zero_burst():
    assert horizontal_deviation(token_bucket(1, 0), rate_latency(2, 3)) == pytest.approx(3.0)


@given(st.floats(0, 10), st.floats(0, 10), st.floats(0.01, 10), st.floats(0, 10))
def test_closed_form(r, b, extra, T):
    if r == b == 0:
        return  # nothing ever arrives; see test_silent_source
    R = r + extra
    assert horizontal_deviation(token_bucket(r, b), rate_latency(R, T)) == pytest.approx(T + b / R, abs=1e-9)


def test_silent_source():
    assert horizontal_deviation(token_bucket(0, 0), rate_latency(2, 3)) == 0.0


def test_closed_form_hundred_draws():
    rng = np.random.default_rng(7)
    for _ in range(100):
        r, b, T = rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10)
        R = rng.uniform(r, r + 10)
        assert abs(horizontal_deviation(token_bucket(r, b), rate_latency(R, T)) - (T + b / R)) <= 1e-9


def _pwl(points, role):
    segs = []
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        segs.append(Segment(x0, y0, (y1 - y0) / (x1 - x0)))
    x0, y0 = points[-1]
    segs.append(Segment(x0, y0, segs[-1].slope if segs else 1.0))
    return PwlCurve(tuple(segs), role, at_zero=points[0][1])


@st.composite
def concave_arrival(draw):
    # concave, increasing, through (0, b)
    b = draw(st.floats(0, 3))
    slopes = sorted(draw(st.lists(st.floats(0.05, 3), min_size=1, max_size=3)), reverse=True)
    xs = [0.0]
    for _ in slopes[:-1]:
        xs.append(xs[-1] + draw(st.floats(0.2, 2)))
    pts = [(0.0, b)]
    for x, sl in zip(xs[1:], slopes):
        pts.append((x, pts[-1][1] + sl * (x - pts[-1][0])))
    segs = tuple(Segment(x, y, sl) for (x, y), sl in zip(pts, slopes))
    return PwlCurve(segs, CurveRole.ARRIVAL, at_zero=b)


@st.composite
def convex_service(draw):
    T = draw(st.floats(0, 3))
    slopes = sorted(draw(st.lists(st.floats(0.1, 4), min_size=1, max_size=3)))
    segs = [Segment(0.0, 0.0, 0.0)] if T > 0 else []
    x, y = T, 0.0
    for sl in slopes:
        segs.append(Segment(x, y, sl))
        span = draw(st.floats(0.3, 2))
        x, y = x + span, y + sl * span
    return PwlCurve(tuple(segs), CurveRole.SERVICE)


def _vec(curve):
    return lambda s: np.array([curve(float(v)) for v in np.atleast_1d(s)])


@given(concave_arrival(), convex_service())
def test_piecewise_against_grid(alpha, beta):
    if alpha.final_slope > beta.final_slope:
        assert horizontal_deviation(alpha, beta) == INF
        return
    exact = horizontal_deviation(alpha, beta)
    horizon = max(alpha.breakpoints + beta.breakpoints) + exact + 3.0
    # coarser grid for speed; the tolerance scales with the step
    approx = grid_deviation(_vec(alpha), _vec(beta), horizon, step=2e-3)
    assert exact == pytest.approx(approx, abs=5e-3 * max(1.0, alpha.final_slope / beta.final_slope) + 2e-3)


def test_staircase_service_against_fine_grid():
    # a service that pauses: rate 2 on (1,2], flat to 4, then rate 2
    beta = PwlCurve((Segment(0, 0, 0), Segment(1, 0, 2), Segment(2, 2, 0), Segment(4, 2, 2)), CurveRole.SERVICE)
    alpha = token_bucket(0.5, 1.0)
    exact = horizontal_deviation(alpha, beta)
    assert grid_deviation(_vec(alpha), _vec(beta), 10.0) == pytest.approx(exact, abs=1e-3)


@given(st.floats(0, 1000), st.floats(0, 1000), st.floats(1, 1e3), st.floats(0, 100))
def test_deviation_nonnegative_and_monotone_in_burst(r, b, extra, T):
    R = r + extra
    d = horizontal_deviation(token_bucket(r, b), rate_latency(R, T))
    assert d >= 0
    assert horizontal_deviation(token_bucket(r, b + 1), rate_latency(R, T)) >= d


def test_curve_validation():
    with pytest.raises(ValueError):
        PwlCurve((Segment(1.0, 0, 1),), CurveRole.SERVICE)
    with pytest.raises(ValueError):
        PwlCurve((Segment(0.0, 2, 1), Segment(1.0, 1, 1)), CurveRole.SERVICE)
    with pytest.raises(ValueError):
        token_bucket(1, 1)(-1.0)


def test_inverses():
    c = rate_latency(2, 3)
    assert c.lower_inverse(0) == 0 and c.lower_inverse(4) == 5
    assert c.strict_inverse(0) == 3
    assert token_bucket(0, 5).lower_inverse(6) == INF


def test_path_delay():
    assert path_delay([5.5]) == 5.5
    assert path_delay([1, 2, 3]) == 6
    assert path_delay([1, INF]) == INF
    with pytest.raises(ValueError):
        path_delay([-1.0])


def test_network_delay():
    assert network_delay([5.5, 3.2]) == 5.5
    assert network_delay([2.0, 2.0, 2.0]) == 2.0
    with pytest.raises(ValueError):
        network_delay([])


def test_inner_ring_waits_less():
    alpha = token_bucket(4000, 4000)
    inner = horizontal_deviation(alpha, ring_service_curve(250000, 4, 1.0))
    outer = horizontal_deviation(alpha, ring_service_curve(250000, 12, 1.0))
    assert inner == pytest.approx(3.064) and outer == pytest.approx(11.192)
    assert inner < outer


def test_ring_curve_below_visit_staircase():
    rate, L = 10.0, 5
    curve = ring_service_curve(rate, L, 1.0)
    for t in np.linspace(0, 40, 4001):
        # worst phase: the node's first visit starts L-1 epochs from now
        cycles, rem = divmod(t, L)
        staircase = rate * (cycles + max(0.0, rem - (L - 1)))
        assert curve(t) <= staircase + 1e-9


def test_ring_bounds_report():
    bound = ring_delay_bounds([4, 12, None, 4], token_bucket(1, 1), 100, 1.0)
    assert bound.per_node[0] == bound.per_node[3] < bound.per_node[1]
    assert bound.per_node[2] == INF and bound.network == INF
    single = ring_delay_bounds([12], token_bucket(1, 1), 100, 1.0)
    assert single.network == single.per_node[0]


def test_ring_bounds_unstable():
    assert ring_delay_bounds([4], token_bucket(100, 1), 100, 1.0).network == INF
