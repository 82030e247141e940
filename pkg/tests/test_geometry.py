import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covhole.geometry import (
    ConfigurationError,
    Deployment,
    DeploymentFormatError,
    ParameterError,
    Point,
    RngStream,
    deployment_from_points,
    is_covered,
    point_in_triangle,
    sample_deployment,
    sample_poisson_ball,
    uniform_in_ball,
)


def test_zero_intensity_ball_is_empty():
    assert sample_poisson_ball(0.0, 20.0, RngStream(1)) == []


def test_poisson_ball_mean_count():
    # 10^5 independent streams; expected count 0.01 * pi * 400
    counts = [len(sample_poisson_ball(0.01, 20.0, RngStream(5, i))) for i in range(100_000)]
    expected = 0.01 * math.pi * 400
    assert abs(np.mean(counts) - expected) < 0.01 * expected


def test_poisson_ball_points_inside_and_deterministic():
    a = sample_poisson_ball(0.05, 20.0, RngStream(9, 3))
    b = sample_poisson_ball(0.05, 20.0, RngStream(9, 3))
    assert a == b and len(a) > 0
    assert all(p.x * p.x + p.y * p.y <= 400.0 for p in a)


def test_poisson_ball_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        sample_poisson_ball(float("nan"), 20.0, RngStream(0))
    with pytest.raises(ParameterError):
        sample_poisson_ball(0.01, float("inf"), RngStream(0))


def test_uniform_in_ball_radial_law():
    gen = np.random.default_rng(0)
    pts = uniform_in_ball(200_000, 10.0, gen)
    r = np.hypot(pts[:, 0], pts[:, 1])
    # P(r <= 5) = 1/4 for a uniform disk
    assert abs((r <= 5).mean() - 0.25) < 0.005


def test_streams_differ_by_index():
    assert RngStream(1, 0).seed64() != RngStream(1, 1).seed64()
    assert RngStream(1, 0).seed64() == RngStream(1, 0).seed64()


def test_fence_ring_counts_and_order():
    dep = sample_deployment((100, 100), 0.0, 10, 20, 20, RngStream(0))
    fence = [n for n in dep.nodes if n.is_fence]
    assert len(fence) == 20 == len(dep.nodes)
    assert [n.id for n in fence] == list(range(20))
    corners = {(0.0, 0.0), (100.0, 0.0), (100.0, 100.0), (0.0, 100.0)}
    assert corners <= {(n.pos.x, n.pos.y) for n in fence}


def test_internal_count_mean():
    counts = [len(sample_deployment((100, 100), 0.01, 10, 20, 20, RngStream(2, i)).nodes) - 20 for i in range(400)]
    # Poisson(100): the mean of 400 draws has sd 0.5
    assert abs(np.mean(counts) - 100) < 2.0


def test_internal_nodes_follow_fence_ids():
    dep = sample_deployment((100, 100), 0.01, 10, 20, 20, RngStream(3))
    ids = [n.id for n in dep.nodes]
    assert ids == sorted(ids)
    assert all(not n.is_fence for n in dep.nodes[20:])


def test_fence_spacing_beyond_rc_is_rejected():
    with pytest.raises(ConfigurationError):
        sample_deployment((100, 100), 0.01, 10, 20, 25, RngStream(0))


def test_deployment_reproducible_from_seed():
    a = sample_deployment((100, 100), 0.01, 10, 20, 20, RngStream(77, 4))
    b = sample_deployment((100, 100), 0.01, 10, 20, 20, RngStream(77, 4))
    assert a == b


def test_fence_node_off_border_is_rejected():
    with pytest.raises(ConfigurationError):
        deployment_from_points([(5, 5)], 10, 20, fence=[True])


def test_point_in_triangle_examples():
    a, b, c = Point(0, 0), Point(10, 0), Point(3, 8)
    centroid = Point(13 / 3, 8 / 3)
    assert point_in_triangle(centroid, a, b, c)
    assert point_in_triangle(a, a, b, c)
    assert point_in_triangle(Point(5, 0), a, b, c)  # on an edge
    assert not point_in_triangle(Point(50, 50), a, b, c)


def test_degenerate_triangle_is_its_segment():
    a, b, c = Point(0, 0), Point(5, 0), Point(10, 0)
    assert point_in_triangle(Point(7, 0), a, b, c)
    assert not point_in_triangle(Point(11, 0), a, b, c)
    assert not point_in_triangle(Point(5, 1e-9), a, b, c)
    same = Point(1, 1)
    assert point_in_triangle(same, same, same, same)
    assert not point_in_triangle(Point(1, 2), same, same, same)


coord = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(coord, coord), min_size=4, max_size=4), coord, coord)
def test_translation_leaves_containment_unchanged(pts, dx, dy):
    p, a, b, c = (Point(x, y) for x, y in pts)
    # shift by a dyadic-friendly amount so translated coordinates stay exact
    dx, dy = round(dx), round(dy)
    q, a2, b2, c2 = (Point(x + dx, y + dy) for x, y in pts)
    assert point_in_triangle(p, a, b, c) == point_in_triangle(q, a2, b2, c2)


def test_is_covered_examples():
    dep = deployment_from_points([(50, 50)], 10, 20)
    assert is_covered(Point(50, 50), dep)
    assert is_covered(Point(60, 50), dep)  # closed disk boundary
    assert not is_covered(Point(60.001, 50), dep)
    empty = deployment_from_points([], 10, 20)
    assert not is_covered(Point(1, 1), empty)


def test_json_round_trip_is_exact():
    dep = sample_deployment((100, 100), 0.01, 10, 20, 20, RngStream(11))
    back = Deployment.from_json(dep.to_json())
    assert back == dep
    assert np.array_equal(back.positions, dep.positions)


def test_json_missing_field_is_named():
    dep = deployment_from_points([(1, 2)], 10, 20)
    data = dep.to_dict()
    del data["r_c"]
    with pytest.raises(DeploymentFormatError, match="r_c"):
        Deployment.from_dict(data)
    data = dep.to_dict()
    del data["nodes"][0]["x"]
    with pytest.raises(DeploymentFormatError, match="'x'"):
        Deployment.from_dict(data)
