"""Triangular-hole proportion: Monte Carlo estimate and integral bounds."""

from .integrals import (
    RESIDUAL_CAP,
    BoundSpec,
    NumericalError,
    bound_integral,
    bounds_sweep,
    lower_bound,
    upper_bound,
)
from .montecarlo import ProportionEstimate, estimate_proportion, residual_term_mc
from .regions import DomainError, RegionQuery, region_area_s_minus, region_area_s_plus

__all__ = [
    "RESIDUAL_CAP",
    "BoundSpec",
    "DomainError",
    "NumericalError",
    "ProportionEstimate",
    "RegionQuery",
    "bound_integral",
    "bounds_sweep",
    "estimate_proportion",
    "lower_bound",
    "region_area_s_minus",
    "region_area_s_plus",
    "residual_term_mc",
    "upper_bound",
]
