import math

import numpy as np
import pytest

from covhole.bounds import BoundSpec, estimate_proportion, residual_term_mc
from covhole.bounds.montecarlo import (
    HOLE_WITH_CLOSEST,
    HOLE_WITHOUT_CLOSEST,
    ProportionEstimate,
    classify_trials,
    origin_in_triangular_hole,
    simulate_counts,
)


def triangle_around_origin(d):
    """Equilateral triangle with circumradius ``d`` centred on the origin."""
    return [(d * math.cos(a), d * math.sin(a)) for a in (math.pi / 2, math.pi / 2 + 2 * math.pi / 3, math.pi / 2 + 4 * math.pi / 3)]


def test_equilateral_hole():
    # gamma = 2.5: side 25 = r_c, circumradius 14.43 > r_s
    assert origin_in_triangular_hole(triangle_around_origin(25 / math.sqrt(3)), 10.0, 25.0)


def test_side_longer_than_rc_is_no_triangle():
    assert not origin_in_triangular_hole(triangle_around_origin(26 / math.sqrt(3)), 10.0, 25.0)


def test_covered_origin_is_no_hole():
    pts = triangle_around_origin(25 / math.sqrt(3)) + [(3.0, 4.0)]
    assert not origin_in_triangular_hole(pts, 10.0, 25.0)


def test_too_few_points():
    assert not origin_in_triangular_hole([], 10.0, 20.0)
    assert not origin_in_triangular_hole([(12.0, 0.0), (-12.0, 0.0)], 10.0, 20.0)


def test_origin_outside_the_triangle():
    pts = [(11.0, 1.0), (20.0, 1.0), (15.0, 8.0)]
    assert not origin_in_triangular_hole(pts, 10.0, 20.0)


def test_hole_without_the_closest_node():
    # the closest node (0, -10.5) is > r_c from the apex and its only triangle sits below the origin
    pts = triangle_around_origin(11.0) + [(0.0, -10.5)]
    codes = classify_trials([np.array(pts), np.array(triangle_around_origin(11.0))], 10.0, 20.0)
    assert codes.tolist() == [HOLE_WITHOUT_CLOSEST, HOLE_WITH_CLOSEST]
    assert origin_in_triangular_hole(pts, 10.0, 20.0)


def test_gamma_below_sqrt3_never_hits():
    hits, residual = simulate_counts(0.02, 1.5, 10.0, 100_000, seed=3)
    assert hits == 0 and residual == 0


def test_estimate_deterministic_in_seed():
    spec = BoundSpec(0.008, 2.0, trials=200_000, seed=11)
    assert estimate_proportion(spec) == estimate_proportion(spec)
    other = estimate_proportion(BoundSpec(0.008, 2.0, trials=200_000, seed=12))
    assert other.trials == 200_000


def test_residual_is_part_of_total():
    for lam in (0.006, 0.012):
        hits, residual = simulate_counts(lam, 3.0, 10.0, 300_000, seed=5)
        assert 0 <= residual <= hits


def test_ci_formula():
    est = ProportionEstimate.from_count(30, 100_000)
    p = 30 / 100_000
    assert est.p_hat == p
    assert est.ci95_halfwidth == pytest.approx(1.96 * math.sqrt(p * (1 - p) / 100_000))
    with pytest.raises(ValueError):
        ProportionEstimate.from_count(0, 0)


def test_larger_gamma_more_holes():
    lams = (0.004, 0.008, 0.012)
    at2 = max(estimate_proportion(BoundSpec(l, 2.0, trials=300_000, seed=1)).p_hat for l in lams)
    at3 = max(estimate_proportion(BoundSpec(l, 3.0, trials=300_000, seed=1)).p_hat for l in lams)
    assert at3 > at2


def test_residual_mc_spec():
    est = residual_term_mc(BoundSpec(0.012, 3.0, trials=200_000, seed=2))
    assert 0 <= est.p_hat < 0.0015 + 3 * est.ci95_halfwidth
