import json
import math

import numpy as np
import pytest

from covhole.complexes import build_rips
from covhole.fixtures import dense_deployment, square_hole_deployment
from covhole.geometry import ConfigurationError, RngStream, deployment_from_points, points_in_triangle, sample_deployment
from covhole.oracle import (
    NON_TRIANGULAR,
    TRIANGULAR,
    extract_holes,
    hole_report_json,
    match_cycles,
    points_in_polygon,
    rasterize,
)


def holes_of(dep, resolution=0.25, **kw):
    grid = rasterize(dep, resolution)
    return grid, extract_holes(grid, dep, build_rips(dep), **kw)


def test_single_node_coverage_fraction():
    dep = deployment_from_points([(50, 50)], 10, 20, field=(100, 100))
    grid = rasterize(dep, 0.25)
    expected = 1 - math.pi * 100 / 10_000
    assert abs(grid.uncovered_fraction() - expected) < 0.01 * expected
    assert grid.shape == (400, 400)


def test_fence_only_leaves_middle_open():
    dep = sample_deployment((100, 100), 0.0, 10, 20, 20, RngStream(0))
    grid = rasterize(dep, 0.5)
    # centre cell of the field
    assert not grid.covered[100, 100]
    assert grid.covered[0, 0]


def test_dense_cover_has_no_uncovered_cell():
    dep = dense_deployment()
    grid = rasterize(dep, 0.25)
    assert grid.covered.all()
    assert extract_holes(grid, dep, build_rips(dep)) == []


def test_resolution_too_coarse():
    dep = deployment_from_points([(50, 50)], 10, 20, field=(100, 100))
    with pytest.raises(ConfigurationError):
        rasterize(dep, 1.5)
    with pytest.raises(ConfigurationError):
        rasterize(dep, 0.0)


def test_equilateral_pocket_is_triangular():
    h = 20 * math.sqrt(3) / 2
    dep = deployment_from_points([(40, 40), (60, 40), (50, 40 + h)], 10, 25, field=(100, 100))
    _, holes = holes_of(dep)
    assert len(holes) == 1
    (hole,) = holes
    assert hole.kind == TRIANGULAR and hole.witness_triangle == (0, 1, 2)
    assert hole.area == len(hole.cells) * 0.0625


def test_square_pocket_is_nontriangular():
    dep = deployment_from_points([(40, 40), (55, 40), (55, 55), (40, 55)], 10, 20, field=(100, 100))
    _, holes = holes_of(dep)
    assert [h.kind for h in holes] == [NON_TRIANGULAR]
    assert holes[0].witness_triangle is None
    x0, y0, x1, y1 = holes[0].bbox
    assert x0 < 47.5 < x1 and y0 < 47.5 < y1


def test_border_holes_dropped_by_default():
    dep = deployment_from_points([(40, 40), (55, 40), (55, 55), (40, 55)], 10, 20, field=(100, 100))
    _, kept = holes_of(dep)
    _, every = holes_of(dep, include_border=True)
    assert len(every) == len(kept) + 1
    assert sum(h.touches_border for h in every) == 1


def two_squares():
    pts = [(20, 20), (35, 20), (35, 35), (20, 35), (60, 20), (75, 20), (75, 35), (60, 35)]
    return deployment_from_points(pts, 10, 20, field=(100, 60))


def test_match_one_hole_one_cycle():
    dep, corners = square_hole_deployment()
    grid, holes = holes_of(dep)
    rep = match_cycles(holes, [list(corners)], dep, grid)
    assert (rep.total_nontriangular, rep.matched, rep.missed) == (1, 1, 0)
    assert rep.spurious_cycles == [] and rep.unmatched_holes == []


def test_cycle_around_two_holes_matches_neither():
    dep = two_squares()
    grid, holes = holes_of(dep)
    assert len(holes) == 2
    rep = match_cycles(holes, [[0, 5, 6, 3]], dep, grid)
    assert rep.matched == 0 and rep.spurious_cycles == [0] and len(rep.unmatched_holes) == 2
    both = match_cycles(holes, [[0, 1, 2, 3], [4, 5, 6, 7]], dep, grid)
    assert both.matched == 2 and both.spurious_cycles == []


def test_match_nothing():
    dep = dense_deployment()
    grid, holes = holes_of(dep)
    rep = match_cycles(holes, [], dep, grid)
    assert (rep.total_nontriangular, rep.matched, rep.unmatched_holes, rep.spurious_cycles) == (0, 0, [], [])


def test_match_unknown_id():
    dep, corners = square_hole_deployment()
    grid, holes = holes_of(dep)
    with pytest.raises(KeyError):
        match_cycles(holes, [[999, 12, 13]], dep, grid)


def test_points_in_polygon_concave():
    poly = np.array([(0, 0), (10, 0), (10, 10), (5, 3), (0, 10)])
    pts = np.array([(5, 1), (5, 8), (2, 5), (11, 5)])
    assert points_in_polygon(pts, poly).tolist() == [True, False, True, False]


def test_halving_resolution_keeps_hole_areas():
    checked = 0
    for k in range(4):
        dep = sample_deployment((100, 100), 0.01, 10, 20, 20, RngStream(40, k))
        _, coarse = holes_of(dep, 0.25)
        _, fine = holes_of(dep, 0.125)
        for h in coarse:
            if h.area < 4:
                continue
            mine = {tuple(c) for c in h.cells}
            owner = [f for f in fine if any(tuple(c) in mine for c in f.cells // 2)]
            assert len(owner) == 1
            assert abs(owner[0].area - h.area) < 0.05 * h.area
            checked += 1
    assert checked > 5


def test_triangular_holes_respect_the_point_criterion():
    seen = 0
    for k in range(8):
        dep = sample_deployment((100, 100), 0.012, 10, 25, 20, RngStream(41, k))
        grid, holes = holes_of(dep)
        pos = dep.positions
        for h in holes:
            if h.kind != TRIANGULAR:
                continue
            seen += 1
            centres = grid.centers(h.cells)
            d = np.min(np.hypot(*(centres[:, None, :] - pos[None, :, :]).transpose(2, 0, 1)), axis=1)
            assert np.all(d > dep.r_s)
            a, b, c = (dep.position(i) for i in h.witness_triangle)
            assert max(math.dist(a, b), math.dist(b, c), math.dist(a, c)) <= dep.r_c
            assert points_in_triangle(centres, a, b, c).all()
    assert seen


def test_no_triangular_holes_at_small_gamma():
    for k in range(5):
        dep = sample_deployment((100, 100), 0.01, 10, 15, 15, RngStream(42, k))
        _, holes = holes_of(dep, 0.5)
        assert all(h.kind == NON_TRIANGULAR for h in holes)


def test_exports(tmp_path):
    dep, _ = square_hole_deployment()
    grid, holes = holes_of(dep)
    report = json.loads(hole_report_json(holes))
    assert list(report[0]) == ["kind", "area", "witness", "bbox"]
    assert report[0]["kind"] == NON_TRIANGULAR and report[0]["witness"] == []
    out = tmp_path / "grid.pgm"
    grid.to_pgm(out)
    data = out.read_bytes()
    ny, nx = grid.shape
    header = f"P5\n{nx} {ny}\n255\n".encode()
    assert data.startswith(header) and len(data) == len(header) + nx * ny
