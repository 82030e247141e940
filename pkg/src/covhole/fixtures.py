"""Hand-built deployments with known hole structure."""

from __future__ import annotations

import math

import numpy as np

from .geometry import Deployment, Point, SensorNode, fence_positions


def _lattice(width: float, height: float, spacing: float) -> np.ndarray:
    """Triangular lattice clipped to the open field; rows alternate by half a step."""
    dy = spacing * math.sqrt(3) / 2
    pts = []
    for j in range(int(height / dy) + 2):
        y = j * dy
        off = spacing / 2 if j % 2 else 0.0
        for i in range(int(width / spacing) + 2):
            x = off + i * spacing
            if 0 < x < width and 0 < y < height:
                pts.append((x, y))
    return np.array(pts)


def _assemble(interior: np.ndarray, field, r_s, r_c, fence_spacing) -> Deployment:
    w, h = field
    nodes = [SensorNode(i, Point(x, y), True) for i, (x, y) in enumerate(fence_positions(w, h, fence_spacing))]
    base = len(nodes)
    nodes += [SensorNode(base + i, Point(float(x), float(y)), False) for i, (x, y) in enumerate(interior)]
    return Deployment(tuple(nodes), float(r_s), float(r_c), (float(w), float(h)))


def dense_deployment(
    field=(100.0, 100.0), r_s: float = 10.0, r_c: float = 20.0, spacing: float = 8.0, fence_spacing: float = 20.0
) -> Deployment:
    """Fence ring plus a triangular lattice fine enough to leave no hole."""
    return _assemble(_lattice(field[0], field[1], spacing), field, r_s, r_c, fence_spacing)


def square_hole_deployment(
    side: float = 15.0, r_s: float = 10.0, r_c: float = 20.0
) -> tuple[Deployment, tuple[int, int, int, int]]:
    """A 3x3 block of square cells with one pocket in the middle cell; returns the deployment and the pocket's corner ids.

    The field is 3*side wide with fence nodes every ``side`` metres. Every
    cell but the middle one gets a node at its centre, so the only gap in
    coverage is around the middle cell's centre. That needs
    side <= r_c < side*sqrt(2) (sides linked, diagonals not) and
    side/sqrt(2) > r_s (centre uncovered).
    """
    if not (side <= r_c < side * math.sqrt(2) and side / math.sqrt(2) > r_s):
        raise ValueError(f"side {side} gives no isolated pocket for r_s={r_s}, r_c={r_c}")
    w = 3 * side
    corners = [(side, side), (2 * side, side), (2 * side, 2 * side), (side, 2 * side)]
    centres = [((i + 0.5) * side, (j + 0.5) * side) for i in range(3) for j in range(3) if (i, j) != (1, 1)]
    dep = _assemble(np.array(corners + centres), (w, w), r_s, r_c, side)
    base = len(dep.fence_ids)
    return dep, (base, base + 1, base + 2, base + 3)
