import math

import numpy as np
import pytest

from covhole.bounds import (
    RESIDUAL_CAP,
    BoundSpec,
    NumericalError,
    bound_integral,
    bounds_sweep,
    estimate_proportion,
    lower_bound,
    upper_bound,
)
from covhole.bounds.integrals import converged_integral

LAMS = np.round(np.arange(1, 21) * 0.001, 3)
QUAD = (32, 32, 32)


def mc(lam, gamma, trials=1_000_000, seed=0):
    return estimate_proportion(BoundSpec(float(lam), gamma, trials=trials, seed=seed))


@pytest.mark.parametrize("gamma", [1.0, 1.5, math.sqrt(3)])
def test_no_triangular_holes_up_to_sqrt3(gamma):
    spec = BoundSpec(0.01, gamma)
    assert lower_bound(spec) == 0.0
    assert upper_bound(spec) == 0.0
    assert not bound_integral(LAMS, gamma, 10.0, QUAD, upper=False).any()


@pytest.mark.parametrize("gamma", [2.0, 2.6, 3.0])
def test_upper_main_term_dominates_lower(gamma):
    lo, hi = bounds_sweep(LAMS, gamma, quadrature=QUAD)
    assert np.all(hi >= lo)
    assert np.all(lo >= 0)


def test_lower_bound_below_estimate():
    spec = BoundSpec(0.010, 2.0, quadrature=QUAD)
    est = mc(0.010, 2.0)
    assert lower_bound(spec) <= est.p_hat + 3 * est.ci95_halfwidth


def test_estimate_below_upper_bound_gamma_2_6():
    _, main = bounds_sweep(LAMS, 2.6, quadrature=QUAD)
    for lam, m in zip(LAMS, main):
        est = mc(lam, 2.6, trials=300_000)
        assert est.p_hat <= m + RESIDUAL_CAP + 3 * est.ci95_halfwidth


def test_cap_mode_adds_the_cap():
    spec = BoundSpec(0.01, 2.4, quadrature=QUAD)
    main = float(bound_integral(0.01, 2.4, 10.0, QUAD, upper=True)[0])
    assert upper_bound(spec, check_convergence=False) == pytest.approx(main + RESIDUAL_CAP, rel=1e-12)


def test_mc_mode_uses_residual_estimate():
    spec = BoundSpec(0.01, 2.4, quadrature=QUAD, trials=100_000)
    assert upper_bound(spec, "mc") <= upper_bound(spec, "cap") + 1e-3


def test_non_convergence_reports_history():
    with pytest.raises(NumericalError) as info:
        converged_integral([0.01], 2.4, 10.0, (16, 16, 16), upper=False, rtol=1e-14, cap=32)
    assert len(info.value.history) >= 2
    assert "history" in str(info.value)


def test_quadrature_refinement_is_small():
    coarse = bound_integral(LAMS, 2.4, 10.0, (32, 32, 32), upper=False)
    fine = bound_integral(LAMS, 2.4, 10.0, (64, 64, 64), upper=False)
    assert np.all(np.abs(fine - coarse) <= 0.005 * fine)


def test_spec_validation():
    with pytest.raises(ValueError):
        BoundSpec(-0.01, 2.0)
    with pytest.raises(ValueError):
        BoundSpec(0.01, float("nan"))
    with pytest.raises(ValueError):
        BoundSpec(0.01, 2.0, quadrature=(4, 64, 64))
    with pytest.raises(ValueError):
        BoundSpec(0.01, 2.0, residual_mode="exact")


def profile(gamma):
    return np.array([mc(l, gamma).p_hat for l in LAMS])


@pytest.mark.parametrize("gamma", [2.2, 2.6, 3.0])
def test_profile_peaks_inside_sweep(gamma):
    p = profile(gamma)
    k = int(np.argmax(p))
    assert 0 < k < len(LAMS) - 1


def test_peak_intensity_falls_with_gamma():
    peaks = [LAMS[int(np.argmax(profile(g)))] for g in (2.2, 2.6, 3.0)]
    assert peaks[0] >= peaks[1] >= peaks[2]
    assert peaks[0] > peaks[2]
