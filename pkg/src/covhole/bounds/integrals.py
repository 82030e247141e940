"""Quadrature of the lower and upper bounds on the triangular-hole proportion."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .regions import SQRT3, alpha0, alpha1, gauss_legendre, radial_limit, s_minus_area, s_plus_area

log = logging.getLogger(__name__)

# simulated cap on the event "closest node is in no hole-bounding triangle"
RESIDUAL_CAP = 0.0015
CONVERGENCE_RTOL = 0.005
MAX_SUBDIVISIONS = 256


class NumericalError(RuntimeError):
    """Quadrature failed to converge within the subdivision cap."""

    def __init__(self, message: str, history: list[tuple[int, float]]):
        super().__init__(f"{message}; history={history}")
        self.history = history


@dataclass(frozen=True)
class BoundSpec:
    lam: float
    gamma: float
    r_s: float = 10.0
    quadrature: tuple[int, int, int] = (64, 64, 64)
    trials: int = 1_000_000
    seed: int = 0
    residual_mode: str = "cap"
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.r_s > 0:
            raise ValueError("r_s must be positive")
        if min(self.quadrature) < 8:
            raise ValueError("quadrature needs at least 8 subdivisions per axis")
        if self.residual_mode not in ("cap", "mc"):
            raise ValueError("residual_mode must be 'cap' or 'mc'")

    @property
    def r_c(self) -> float:
        return self.gamma * self.r_s


def _panel(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = gauss_legendre(n)
    return a + (b - a) * x, (b - a) * w


@dataclass(frozen=True)
class _Grid:
    """Node geometry shared by every intensity at a fixed (gamma, r_s, n)."""

    r0: np.ndarray  # (P,)
    w_r0: np.ndarray  # (P,)
    w_theta: np.ndarray  # (P, T)
    s_plus: np.ndarray  # (P, T)
    half_span: np.ndarray  # (P, T): (R1^2 - r0^2) / 2
    s_minus_r0: np.ndarray  # (P, T)
    r1: np.ndarray  # (P, T, K)
    w_r1: np.ndarray  # (P, T, K)
    s_minus: np.ndarray  # (P, T, K)


@lru_cache(maxsize=32)
def _grid(gamma: float, r_s: float, n_r0: int, n_theta: int, n_r1: int) -> _Grid:
    r_c = gamma * r_s
    top = r_c / SQRT3
    # the closest node's admissible range splits where B(0, r0) leaves B(tau0, r_c)
    cuts = [r_s, top] if r_c / 2 <= r_s else [r_s, r_c / 2, top]
    r0_parts, w0_parts = zip(*(_panel(a, b, n_r0) for a, b in zip(cuts[:-1], cuts[1:])))
    r0 = np.concatenate(r0_parts)
    w_r0 = np.concatenate(w0_parts)

    a0 = alpha0(r0, r_c)
    a1 = np.maximum(alpha1(r0, r_c), a0)
    mid = np.clip(0.5 * (np.pi - a0), a0, a1)
    x, w = gauss_legendre(n_theta)
    # two theta panels per r0, split where the outer boundary switches circles
    theta = np.concatenate([a0[:, None] + (mid - a0)[:, None] * x, mid[:, None] + (a1 - mid)[:, None] * x], axis=1)
    w_theta = np.concatenate([(mid - a0)[:, None] * w, (a1 - mid)[:, None] * w], axis=1)

    r0b = np.broadcast_to(r0[:, None], theta.shape)
    s_plus = s_plus_area(r0b, theta, r_c)
    r1_top = np.maximum(radial_limit(r0b, theta, r_c), r0b)
    half_span = 0.5 * (r1_top**2 - r0b**2)
    s_minus_r0 = s_minus_area(r0b, r0b, theta, r_c)

    xk, wk = gauss_legendre(n_r1)
    span = (r1_top - r0b)[..., None]
    r1 = r0b[..., None] + span * xk
    w_r1 = span * wk
    s_minus = s_minus_area(r0b[..., None], r1, theta[..., None], r_c)
    return _Grid(r0, w_r0, w_theta, s_plus, half_span, s_minus_r0, r1, w_r1, s_minus)


def _integrate(lams: np.ndarray, g: _Grid, upper: bool) -> np.ndarray:
    out = np.empty(lams.shape)
    for i, lam in enumerate(lams):
        if upper:
            inner = g.half_span * -np.expm1(-lam * g.s_minus_r0)
        else:
            inner = np.sum(g.w_r1 * g.r1 * -np.expm1(-lam * g.s_minus), axis=2)
        mid = np.sum(g.w_theta * np.exp(-lam * g.s_plus) * inner, axis=1)
        outer = np.sum(g.w_r0 * g.r0 * np.exp(-lam * np.pi * g.r0**2) * mid)
        out[i] = 2.0 * np.pi * lam * lam * outer
    return out


def bound_integral(lams, gamma: float, r_s: float, quadrature: tuple[int, int, int], upper: bool) -> np.ndarray:
    """Main triple integral (no residual term) for each intensity; zero when gamma <= sqrt(3)."""
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if gamma <= SQRT3:
        return np.zeros(lams.shape)
    return _integrate(lams, _grid(float(gamma), float(r_s), *quadrature), upper)


def converged_integral(lams, gamma, r_s, quadrature, upper, rtol=CONVERGENCE_RTOL, cap=MAX_SUBDIVISIONS):
    """Value at the requested resolution, accepted once the step from half resolution moves it by < ``rtol``.

    If that step is too large the grid keeps doubling up to ``cap``.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if gamma <= SQRT3:
        return np.zeros(lams.shape)
    n = tuple(max(8, k // 2) for k in quadrature)
    prev = bound_integral(lams, gamma, r_s, n, upper)
    history = [(n[0], float(prev.max()))]
    n2 = tuple(quadrature)
    while True:
        if max(n2) > cap:
            raise NumericalError(f"bound did not converge to rtol={rtol} (gamma={gamma})", history)
        cur = bound_integral(lams, gamma, r_s, n2, upper)
        history.append((n2[0], float(cur.max())))
        scale = np.maximum(np.abs(cur), 1e-300)
        if np.all(np.abs(cur - prev) <= rtol * scale):
            log.debug("bound converged: %s", history)
            return cur
        prev, n2 = cur, tuple(2 * k for k in n2)


def lower_bound(spec: BoundSpec, check_convergence: bool = True) -> float:
    if check_convergence:
        return float(converged_integral(spec.lam, spec.gamma, spec.r_s, spec.quadrature, upper=False)[0])
    return float(bound_integral(spec.lam, spec.gamma, spec.r_s, spec.quadrature, upper=False)[0])


def upper_bound(spec: BoundSpec, residual_mode: str | None = None, check_convergence: bool = True) -> float:
    """Main integral with the unconstrained lower region, plus the residual term."""
    if spec.gamma <= SQRT3:
        return 0.0
    mode = residual_mode or spec.residual_mode
    if check_convergence:
        main = float(converged_integral(spec.lam, spec.gamma, spec.r_s, spec.quadrature, upper=True)[0])
    else:
        main = float(bound_integral(spec.lam, spec.gamma, spec.r_s, spec.quadrature, upper=True)[0])
    if mode == "cap":
        return main + RESIDUAL_CAP
    from .montecarlo import residual_term_mc

    return main + residual_term_mc(spec).p_hat


def bounds_sweep(lams, gamma: float, r_s: float = 10.0, quadrature=(64, 64, 64), check_convergence: bool = True):
    """Lower bound and upper-bound main term for a whole intensity sweep; reuses the cached geometry."""
    f = converged_integral if check_convergence else bound_integral
    return f(lams, gamma, r_s, quadrature, upper=False), f(lams, gamma, r_s, quadrature, upper=True)


def with_quadrature(spec: BoundSpec, n: int) -> BoundSpec:
    return replace(spec, quadrature=(n, n, n))
