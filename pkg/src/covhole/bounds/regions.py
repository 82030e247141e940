"""Areas of the regions that parameterize the triangular-hole bounds.

Polar frame: the origin is the probed point, the closest node sits at
``(r0, pi)`` and the candidate node with the smallest polar angle in the
upper half plane at ``(r1, theta1)``. All regions are intersections of
disks containing the origin with the exterior of ``B(0, r0)``, so each one
is star-shaped: along a ray at angle ``theta`` it is the interval
``(r0, rho(theta)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT3 = math.sqrt(3.0)


class DomainError(ValueError):
    """Raised when a region query falls outside the integration domain."""


@dataclass(frozen=True)
class RegionQuery:
    r0: float
    r1: float
    theta1: float
    r_c: float

    def validate(self, r_s: float | None = None) -> None:
        tol = 1e-12 * self.r_c
        if r_s is not None and not self.r0 > r_s:
            raise DomainError(f"r0={self.r0} must exceed r_s={r_s}")
        if not 0 < self.r0 <= self.r_c / SQRT3 + tol:
            raise DomainError(f"r0={self.r0} outside (0, r_c/sqrt(3)]")
        if self.r1 < self.r0 - tol or self.r1 > self.r_c + tol:
            raise DomainError(f"r1={self.r1} outside [r0, r_c]")
        if not -1e-12 <= self.theta1 <= math.pi + 1e-12:
            raise DomainError(f"theta1={self.theta1} outside [0, pi]")


def alpha0(r0, r_c):
    """Smallest admissible polar angle of the second node; zero once ``r0 <= r_c/2``."""
    c = np.minimum(1.0, r_c / (2.0 * np.asarray(r0, dtype=float)))
    return 2.0 * np.arccos(c)


def alpha1(r0, r_c):
    c = np.minimum(1.0, r_c / (2.0 * np.asarray(r0, dtype=float)))
    return 2.0 * np.arcsin(c) - 2.0 * np.arccos(c)


def _ray_to_circle(rho_c, phi_c, radius, theta):
    """Distance from the origin along direction ``theta`` to the circle C((rho_c, phi_c), radius).

    The origin must lie inside the circle, so the ray crosses it once.
    """
    d = theta - phi_c
    s = rho_c * np.sin(d)
    return rho_c * np.cos(d) + np.sqrt(np.maximum(radius * radius - s * s, 0.0))


def radial_limit(r0, theta, r_c):
    """Outer radius of the admissible region along ray ``theta``.

    Minimum of the exits from B(closest node, r_c) and B(M2, r_c), where M2
    is the lower crossing of C(0, r0) with C(closest node, r_c) (or the
    point ``(r0, 0)`` when the circles do not cross).
    """
    r0 = np.asarray(r0, dtype=float)
    theta = np.asarray(theta, dtype=float)
    a0 = alpha0(r0, r_c)
    s1 = r0 * np.sin(theta)
    s2 = r0 * np.sin(theta + a0)
    first = np.sqrt(np.maximum(r_c * r_c - s1 * s1, 0.0)) - r0 * np.cos(theta)
    second = np.sqrt(np.maximum(r_c * r_c - s2 * s2, 0.0)) + r0 * np.cos(theta + a0)
    return np.minimum(first, second)


def wedge_antiderivative(theta, r0, r_c):
    """Antiderivative in ``theta`` of (R1(theta)**2 - r0**2) / 2 on the branch bounded by C(closest node, r_c)."""
    st = np.sin(theta)
    ct = np.cos(theta)
    return (
        0.5 * r0 * r0 * st * ct
        + 0.5 * r_c * r_c * theta
        - 0.5 * r_c * r_c * np.arcsin(np.clip(r0 * st / r_c, -1.0, 1.0))
        - 0.5 * r0 * st * np.sqrt(np.maximum(r_c * r_c - r0 * r0 * st * st, 0.0))
        - 0.5 * r0 * r0 * theta
    )


def s_plus_area(r0, theta1, r_c):
    """Closed-form area of the empty wedge swept up to angle ``theta1`` (vectorized).

    Below the symmetry angle ``(pi - alpha0)/2`` the outer boundary is the
    circle around the closest node; beyond it the mirror-image branch is
    folded back onto the first one.
    """
    r0 = np.asarray(r0, dtype=float)
    theta1 = np.asarray(theta1, dtype=float)
    a0 = alpha0(r0, r_c)
    mid = 0.5 * (np.pi - a0)
    base = wedge_antiderivative(a0, r0, r_c)

    def lower_branch(t):
        return wedge_antiderivative(t, r0, r_c) - base

    mirrored = np.maximum(np.pi - a0 - theta1, a0)
    out = np.where(
        theta1 <= mid,
        lower_branch(np.minimum(theta1, mid)),
        2.0 * lower_branch(mid) - lower_branch(mirrored),
    )
    return np.where(theta1 <= a0, 0.0, out)


def region_area_s_plus(q: RegionQuery, r_s: float | None = None) -> float:
    q.validate(r_s)
    a0 = float(alpha0(q.r0, q.r_c))
    a1 = float(alpha1(q.r0, q.r_c))
    slack = 1e-12
    if not a0 - slack <= q.theta1 <= a1 + slack:
        raise DomainError(f"theta1={q.theta1} outside [alpha0, alpha1]=[{a0}, {a1}]")
    return float(s_plus_area(q.r0, q.theta1, q.r_c))


# the area of the lower region ------------------------------------------------


def _circle_crossing_angles(c1, r1, c2, r2):
    """Polar angles of the (up to two) crossing points of two circles; NaN where absent."""
    (x1, y1), (x2, y2) = c1, c2
    dx = x2 - x1
    dy = y2 - y1
    d2 = dx * dx + dy * dy
    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.sqrt(d2)
        a = (d2 + r1 * r1 - r2 * r2) / (2.0 * d)
        h = np.sqrt(r1 * r1 - a * a)
        ux, uy = dx / d, dy / d
        mx, my = x1 + a * ux, y1 + a * uy
        p = np.arctan2(my + h * ux, mx - h * uy)
        m = np.arctan2(my - h * ux, mx + h * uy)
    return p, m


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[n]


def s_minus_area(r0, r1, theta1, r_c, nodes: int = 12, include_tau1: bool = True, chunk: int = 16384):
    """Area of the lower-half region that can close a hole-bounding triangle.

    Region: lower half plane, polar angle above ``theta1 - pi``, within
    ``r_c`` of the origin, of the closest node and (unless
    ``include_tau1`` is false) of the node at ``(r1, theta1)``, and outside
    ``B(0, r0)``. The radial extent along each ray is exact; the angular
    integral is composite Gauss-Legendre split at every angle where the
    active boundary circle changes, so each panel is smooth.
    """
    r0, r1, theta1 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r0, r1, theta1)))
    shape = r0.shape
    r0, r1, theta1 = r0.ravel(), r1.ravel(), theta1.ravel()
    out = np.empty(r0.size)
    for s in range(0, r0.size, chunk):
        sl = slice(s, s + chunk)
        out[sl] = _s_minus_block(r0[sl], r1[sl], theta1[sl], float(r_c), nodes, include_tau1)
    return out.reshape(shape)


def _s_minus_block(r0, r1, theta1, r_c, nodes, include_tau1):
    lo = theta1 - np.pi
    hi = np.zeros_like(lo)
    zero = np.zeros_like(r0)
    origin = (zero, zero)
    tau0 = (-r0, zero)
    tau1 = (r1 * np.cos(theta1), r1 * np.sin(theta1))
    rc = np.full_like(r0, r_c)
    pairs = [(origin, rc, tau0, rc), (origin, r0, tau0, rc)]
    if include_tau1:
        pairs += [(origin, rc, tau1, rc), (tau0, rc, tau1, rc), (origin, r0, tau1, rc)]
    cuts = [lo, hi]
    for c1, ra, c2, rb in pairs:
        cuts.extend(_circle_crossing_angles(c1, ra, c2, rb))
    br = np.stack(cuts, axis=1)
    br = np.where(np.isnan(br), hi[:, None], br)
    br = np.sort(np.clip(br, lo[:, None], hi[:, None]), axis=1)
    left = br[:, :-1]
    width = br[:, 1:] - br[:, :-1]
    x, w = gauss_legendre(nodes)
    theta = left[:, :, None] + width[:, :, None] * x  # (n, panels, nodes)
    rho = np.minimum(r_c, _ray_to_circle(r0[:, None, None], np.pi, r_c, theta))
    if include_tau1:
        rho = np.minimum(rho, _ray_to_circle(r1[:, None, None], theta1[:, None, None], r_c, theta))
    f = 0.5 * (np.maximum(rho, r0[:, None, None]) ** 2 - r0[:, None, None] ** 2)
    return np.einsum("npk,k,np->n", f, w, width)


def region_area_s_minus(q: RegionQuery, r_s: float | None = None, nodes: int = 12) -> float:
    q.validate(r_s)
    return float(s_minus_area(q.r0, q.r1, q.theta1, q.r_c, nodes=nodes))


# membership predicates (used by independent checks) -------------------------


def _polar_angle(x, y):
    return np.arctan2(y, x)


def in_a_plus(x, y, r0, r_c):
    """Membership in the upper admissible region for the second node."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a0 = float(alpha0(r0, r_c))
    m2x, m2y = r0 * math.cos(-a0), r0 * math.sin(-a0)
    rr = x * x + y * y
    return (
        (y > 0)
        & (rr > r0 * r0)
        & (rr <= r_c * r_c)
        & ((x + r0) ** 2 + y * y <= r_c * r_c)
        & ((x - m2x) ** 2 + (y - m2y) ** 2 <= r_c * r_c)
    )


def in_s_plus(x, y, r0, theta1, r_c):
    theta = _polar_angle(x, y)
    return in_a_plus(x, y, r0, r_c) & (theta < theta1) & (theta > theta1 - np.pi)


def in_s_minus(x, y, r0, r1, theta1, r_c, include_tau1: bool = True):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    theta = _polar_angle(x, y)
    rr = x * x + y * y
    ok = (
        (y < 0)
        & (theta > theta1 - np.pi)
        & (rr > r0 * r0)
        & (rr <= r_c * r_c)
        & ((x + r0) ** 2 + y * y <= r_c * r_c)
    )
    if include_tau1:
        tx, ty = r1 * math.cos(theta1), r1 * math.sin(theta1)
        ok &= (x - tx) ** 2 + (y - ty) ** 2 <= r_c * r_c
    return ok
