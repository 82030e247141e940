"""Location-aware ground truth: rasterized coverage, true holes and cycle matching."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .complexes import RipsComplex, cech_simplex
from .geometry import ConfigurationError, Deployment, points_in_triangle

TRIANGULAR = "Triangular"
NON_TRIANGULAR = "NonTriangular"
DEFAULT_RESOLUTION = 0.25


@dataclass(frozen=True)
class CoverageGrid:
    """``covered[row, col]`` refers to the cell centred at ((col + .5) * res, (row + .5) * res)."""

    resolution: float
    covered: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.covered.shape

    def centers(self, cells: np.ndarray) -> np.ndarray:
        """Cell (row, col) pairs to (x, y) centre coordinates."""
        cells = np.asarray(cells).reshape(-1, 2)
        return (cells[:, ::-1] + 0.5) * self.resolution

    def uncovered_fraction(self) -> float:
        return float(1.0 - self.covered.mean())

    def to_pgm(self, path: str | Path) -> None:
        """Binary PGM, covered cells white, north up."""
        img = np.where(self.covered[::-1], 255, 0).astype(np.uint8)
        h, w = img.shape
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(img.tobytes())


@dataclass(frozen=True)
class TrueHole:
    cells: np.ndarray = field(repr=False)  # (k, 2) row/col
    area: float
    kind: str
    witness_triangle: tuple[int, int, int] | None
    bbox: tuple[float, float, float, float]  # x_min, y_min, x_max, y_max in meters
    touches_border: bool = False

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "area": self.area,
            "witness": list(self.witness_triangle) if self.witness_triangle else [],
            "bbox": list(self.bbox),
        }


@dataclass
class MatchReport:
    total_nontriangular: int
    matched: int
    unmatched_holes: list[int]
    spurious_cycles: list[int]

    @property
    def missed(self) -> int:
        return self.total_nontriangular - self.matched

    def to_dict(self) -> dict:
        return {
            "total_nontriangular": self.total_nontriangular,
            "matched": self.matched,
            "unmatched_holes": self.unmatched_holes,
            "spurious_cycles": self.spurious_cycles,
        }


def rasterize(deployment: Deployment, resolution: float = DEFAULT_RESOLUTION) -> CoverageGrid:
    if not 0 < resolution <= deployment.r_s / 10:
        raise ConfigurationError(f"resolution {resolution} must be in (0, r_s/10 = {deployment.r_s / 10}]")
    w, h = deployment.field
    nx = int(round(w / resolution))
    ny = int(round(h / resolution))
    if len(deployment.nodes) == 0:
        return CoverageGrid(resolution, np.zeros((ny, nx), dtype=bool))
    xs = (np.arange(nx) + 0.5) * resolution
    ys = (np.arange(ny) + 0.5) * resolution
    gx, gy = np.meshgrid(xs, ys)
    tree = cKDTree(deployment.positions)
    dist, _ = tree.query(np.column_stack([gx.ravel(), gy.ravel()]))
    return CoverageGrid(resolution, (dist <= deployment.r_s).reshape(ny, nx))


def _empty_cech_triangles(deployment: Deployment, rips: RipsComplex) -> list[tuple[int, int, int]]:
    return [t for t in sorted(rips.triangles) if not cech_simplex(t, deployment)]


def extract_holes(
    grid: CoverageGrid, deployment: Deployment, rips: RipsComplex, include_border: bool = False
) -> list[TrueHole]:
    """Uncovered 4-connected components; border-touching ones are dropped unless asked for."""
    labels, n = ndimage.label(~grid.covered)
    if n == 0:
        return []
    labels = _merge_channels(labels, grid, deployment)
    witnesses = _empty_cech_triangles(deployment, rips)
    tri_pts = {t: [deployment.position(i) for i in t] for t in witnesses}
    tri_arr = np.array([[tuple(p) for p in tri_pts[t]] for t in witnesses]).reshape(-1, 3, 2)
    ny, nx = grid.shape
    res = grid.resolution
    holes = []
    for k, sl in enumerate(ndimage.find_objects(labels), start=1):
        rows, cols = np.nonzero(labels[sl] == k)
        cells = np.column_stack([rows + sl[0].start, cols + sl[1].start])
        border = bool(
            cells[:, 0].min() == 0 or cells[:, 1].min() == 0 or cells[:, 0].max() == ny - 1 or cells[:, 1].max() == nx - 1
        )
        if border and not include_border:
            continue
        centers = grid.centers(cells)
        witness = _find_witness(centers, witnesses, tri_arr)
        bbox = (
            float(cells[:, 1].min() * res),
            float(cells[:, 0].min() * res),
            float((cells[:, 1].max() + 1) * res),
            float((cells[:, 0].max() + 1) * res),
        )
        holes.append(
            TrueHole(
                cells=cells,
                area=len(cells) * res * res,
                kind=TRIANGULAR if witness else NON_TRIANGULAR,
                witness_triangle=witness,
                bbox=bbox,
                touches_border=border,
            )
        )
    return holes


REFINE = 15  # odd, so each coarse centre is itself a fine sample


NEAR = 2  # Chebyshev reach, in cells, of contacts checked by local refinement
CONTACT_TRIES = 8


def _near_contacts(labels: np.ndarray) -> dict[tuple[int, int], list[tuple[int, int, int, int]]]:
    """Cell pairs within NEAR (Chebyshev) carrying different non-zero labels, grouped by label pair."""
    ny, nx = labels.shape
    out: dict[tuple[int, int], list[tuple[int, int, int, int]]] = {}
    for dr in range(0, NEAR + 1):
        for dc in range(-NEAR, NEAR + 1):
            if (dr == 0 and dc <= 0) or abs(dr) + abs(dc) == 1:
                continue
            a = labels[: ny - dr, max(0, -dc) : nx - max(0, dc)]
            b = labels[dr:, max(0, dc) : nx - max(0, -dc) if dc < 0 else nx]
            b = b[:, : a.shape[1]]
            hit = (a > 0) & (b > 0) & (a != b)
            for r, k in zip(*np.nonzero(hit)):
                r0, k0 = int(r), int(k) + max(0, -dc)
                key = (min(a[r, k], b[r, k]), max(a[r, k], b[r, k]))
                lst = out.setdefault((int(key[0]), int(key[1])), [])
                if len(lst) < CONTACT_TRIES:
                    lst.append((r0, k0, dr, dc))
    return out


def _channel_open(grid: CoverageGrid, tree: cKDTree, r_s: float, cell: tuple[int, int], step: tuple[int, int]) -> bool:
    """Re-rasterize the box spanning both cells at 1/REFINE of the cell size; test 4-connectivity of their centres."""
    res = grid.resolution
    (r, k), (dr, dc) = cell, step
    r_lo, k_lo = min(r, r + dr), min(k, k + dc)
    h_cells, w_cells = abs(dr) + 1, abs(dc) + 1
    fine = res / REFINE
    gx, gy = np.meshgrid(k_lo * res + (np.arange(w_cells * REFINE) + 0.5) * fine, r_lo * res + (np.arange(h_cells * REFINE) + 0.5) * fine)
    dist, _ = tree.query(np.column_stack([gx.ravel(), gy.ravel()]))
    lab, _ = ndimage.label((dist > r_s).reshape(gx.shape))
    half = REFINE // 2
    p = lab[(r - r_lo) * REFINE + half, (k - k_lo) * REFINE + half]
    q = lab[(r + dr - r_lo) * REFINE + half, (k + dc - k_lo) * REFINE + half]
    return p > 0 and p == q


GAP_MARGIN = 1.0  # pairs within this of 2 r_s leave cusps or channels thinner than a cell


def _bisector_runs(labels: np.ndarray, grid: CoverageGrid, tree: cKDTree, a, b, r_s: float) -> list[set[int]]:
    """Label sets met along uncovered stretches of the perpendicular bisector of nodes a, b.

    Beyond the crossing points of the two circles (or from the gap midpoint
    when the disks are disjoint) the bisector lies outside both disks, so it
    follows the thin cusp or channel between them. A stretch ends at the
    first sample covered by any other disk.
    """
    half = 0.5 * np.hypot(*(b - a))
    m = 0.5 * (a + b)
    u = (b - a) / (2 * half)
    n = np.array([-u[1], u[0]])
    h = math.sqrt(max(r_s * r_s - half * half, 0.0)) + 1e-9
    res = grid.resolution
    t = h + np.arange(0, int(2 * r_s / (res / 4)) + 1) * (res / 4)
    ny, nx = labels.shape
    runs = []
    for sign in (1.0, -1.0):
        pts = m + sign * t[:, None] * n
        cols = np.floor(pts[:, 0] / res).astype(int)
        rows = np.floor(pts[:, 1] / res).astype(int)
        ok = (rows >= 0) & (rows < ny) & (cols >= 0) & (cols < nx)
        ok &= tree.query(pts)[0] > r_s
        stop = np.nonzero(~ok)[0]
        end = stop[0] if len(stop) else len(t)
        lab = labels[rows[:end], cols[:end]]
        runs.append({int(x) for x in lab[lab > 0]})
    if half > r_s and tree.query(m)[0] > r_s:
        # disjoint disks: both directions meet at the midpoint
        return [runs[0] | runs[1]]
    return runs


def _merge_channels(labels: np.ndarray, grid: CoverageGrid, deployment: Deployment) -> np.ndarray:
    """Join raster components that the continuous uncovered set connects through a thin channel.

    Two disks that are nearly tangent leave a channel or cusp narrower than
    a cell, which the 4-connected labelling cuts. Components are joined
    when either a finer raster of a diagonal contact or a walk along the
    pair's bisector certifies an uncovered path; nothing is joined across
    covered ground.
    """
    tree = cKDTree(deployment.positions)
    parent = list(range(labels.max() + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        x, y = find(x), find(y)
        if x != y:
            parent[max(x, y)] = min(x, y)

    for (la, lb), tries in sorted(_near_contacts(labels).items()):
        for r, k, dr, dc in tries:
            if find(la) == find(lb):
                break
            if _channel_open(grid, tree, deployment.r_s, (r, k), (dr, dc)):
                union(la, lb)
    pos = deployment.positions
    r_s = deployment.r_s
    for i, j in sorted(tree.query_pairs(2 * r_s + GAP_MARGIN)):
        if np.hypot(*(pos[i] - pos[j])) < 2 * r_s - GAP_MARGIN:
            continue
        for reached in _bisector_runs(labels, grid, tree, pos[i], pos[j], r_s):
            reached = sorted(reached)
            for x in reached[1:]:
                union(reached[0], x)
    root = np.array([find(x) for x in range(len(parent))])
    # compact relabel; background stays 0
    _, inv = np.unique(root[labels], return_inverse=True)
    return inv.reshape(labels.shape)


def _find_witness(centers: np.ndarray, witnesses, tri_arr: np.ndarray):
    if not witnesses:
        return None
    lo = centers.min(axis=0)
    hi = centers.max(axis=0)
    # a triangle's bbox must cover the component's bbox
    ok = np.all(tri_arr.min(axis=1) <= lo, axis=1) & np.all(tri_arr.max(axis=1) >= hi, axis=1)
    for idx in np.nonzero(ok)[0]:
        a, b, c = tri_arr[idx]
        if points_in_triangle(centers, a, b, c).all():
            return witnesses[idx]
    return None


def points_in_polygon(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd rule for each point against a closed polygon given without repeating the first vertex."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    poly = np.asarray(poly, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    for (x1, y1), (x2, y2) in zip(poly, np.roll(poly, -1, axis=0)):
        if y1 == y2:
            continue
        crosses = (y1 > y) != (y2 > y)
        xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xint)
    return inside


def containment(
    holes: Sequence[TrueHole], cycles: Sequence[Sequence[int]], deployment: Deployment, grid: CoverageGrid
) -> np.ndarray:
    """Boolean (cycles, holes) matrix: the majority of the hole's cell centres lie inside the cycle (even-odd rule)."""
    out = np.zeros((len(cycles), len(holes)), dtype=bool)
    centres = [grid.centers(h.cells) for h in holes]
    for ci, cyc in enumerate(cycles):
        poly = np.array([tuple(deployment.position(v)) for v in cyc])
        for hj, pts in enumerate(centres):
            out[ci, hj] = points_in_polygon(pts, poly).mean() > 0.5
    return out


def match_cycles(
    holes: Sequence[TrueHole], cycles: Sequence[Sequence[int]], deployment: Deployment, grid: CoverageGrid
) -> MatchReport:
    """Hole H is matched iff exactly one cycle contains H and that cycle contains no other non-triangular hole.

    Holes touching the field border are not scored.
    """
    targets = [i for i, h in enumerate(holes) if h.kind == NON_TRIANGULAR and not h.touches_border]
    contains = containment([holes[i] for i in targets], cycles, deployment, grid)
    matched_holes = []
    good_cycles = set()
    for hj, hi in enumerate(targets):
        owners = np.nonzero(contains[:, hj])[0]
        if len(owners) == 1 and contains[owners[0]].sum() == 1:
            matched_holes.append(hi)
            good_cycles.add(int(owners[0]))
    return MatchReport(
        total_nontriangular=len(targets),
        matched=len(matched_holes),
        unmatched_holes=[hi for hi in targets if hi not in matched_holes],
        spurious_cycles=[ci for ci in range(len(cycles)) if ci not in good_cycles],
    )


def hole_report_json(holes: Sequence[TrueHole]) -> str:
    return json.dumps([h.to_dict() for h in holes])
