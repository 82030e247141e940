"""Planar primitives, sensor deployments and reproducible random streams."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

_MASK64 = (1 << 64) - 1


class ConfigurationError(ValueError):
    """Raised when a deployment or experiment is configured inconsistently."""


class ParameterError(ValueError):
    """Raised for non-finite or out-of-range numeric parameters."""


class DeploymentFormatError(ValueError):
    """Raised when a serialized deployment is malformed."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ParameterError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def dist2(self, other: Point) -> float:
        dx = self.x - other.x
        dy = self.y - other.y
        return dx * dx + dy * dy


@dataclass(frozen=True)
class SensorNode:
    id: int
    pos: Point
    is_fence: bool = False


def splitmix64(x: int) -> int:
    """One round of the SplitMix64 finalizer (64-bit avalanche mixer)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RngStream:
    """Counter-based splittable stream: ``(master_seed, stream_index)`` fixes every draw.

    Distinct indices hash to unrelated 64-bit seeds, so independent workers
    can each own a stream and still produce a reproducible aggregate.
    """

    master_seed: int
    stream_index: int = 0

    def seed64(self) -> int:
        return splitmix64(splitmix64(self.master_seed & _MASK64) ^ (self.stream_index & _MASK64))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed64()))

    def child(self, index: int) -> RngStream:
        return RngStream(self.seed64(), index)


@dataclass(frozen=True)
class Deployment:
    nodes: tuple[SensorNode, ...]
    r_s: float
    r_c: float
    field: tuple[float, float] = (100.0, 100.0)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if not (self.r_s > 0 and self.r_c > 0 and math.isfinite(self.r_s) and math.isfinite(self.r_c)):
            raise ConfigurationError(f"radii must be positive and finite (r_s={self.r_s}, r_c={self.r_c})")
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("duplicate node ids in deployment")
        w, h = self.field
        for n in self.nodes:
            if n.is_fence and not _on_border(n.pos, w, h):
                raise ConfigurationError(f"fence node {n.id} is not on the field border")

    @property
    def gamma(self) -> float:
        return self.r_c / self.r_s

    @cached_property
    def ids(self) -> np.ndarray:
        return np.array([n.id for n in self.nodes], dtype=np.int64)

    @cached_property
    def positions(self) -> np.ndarray:
        if not self.nodes:
            return np.zeros((0, 2))
        return np.array([[n.pos.x, n.pos.y] for n in self.nodes], dtype=float)

    @cached_property
    def index_of(self) -> dict[int, int]:
        return {n.id: i for i, n in enumerate(self.nodes)}

    def node(self, node_id: int) -> SensorNode:
        try:
            return self.nodes[self.index_of[node_id]]
        except KeyError:
            raise KeyError(f"unknown node id {node_id}") from None

    def position(self, node_id: int) -> Point:
        return self.node(node_id).pos

    @property
    def fence_ids(self) -> frozenset[int]:
        return frozenset(n.id for n in self.nodes if n.is_fence)

    def with_r_c(self, r_c: float) -> Deployment:
        return Deployment(self.nodes, self.r_s, r_c, self.field, self.seed)

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "r_s": self.r_s,
            "r_c": self.r_c,
            "field": {"w": self.field[0], "h": self.field[1]},
            "seed": self.seed,
            "nodes": [
                {"id": n.id, "x": n.pos.x, "y": n.pos.y, "fence": n.is_fence} for n in self.nodes
            ],
        }

    def to_json(self, indent: int | None = None) -> str:
        # json emits repr() floats, which round-trip exactly
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> Deployment:
        if not isinstance(data, dict):
            raise DeploymentFormatError("deployment must be a JSON object")
        for key in ("r_s", "r_c", "nodes"):
            if key not in data:
                raise DeploymentFormatError(f"missing required field {key!r}")
        fld = data.get("field", {"w": 100.0, "h": 100.0})
        try:
            w, h = float(fld["w"]), float(fld["h"])
        except (KeyError, TypeError, ValueError):
            raise DeploymentFormatError("field must be an object with numeric 'w' and 'h'") from None
        nodes = []
        for i, raw in enumerate(data["nodes"]):
            for key in ("id", "x", "y"):
                if key not in raw:
                    raise DeploymentFormatError(f"node #{i} missing field {key!r}")
            nodes.append(
                SensorNode(int(raw["id"]), Point(float(raw["x"]), float(raw["y"])), bool(raw.get("fence", False)))
            )
        try:
            r_s, r_c = float(data["r_s"]), float(data["r_c"])
        except (TypeError, ValueError):
            raise DeploymentFormatError("r_s and r_c must be numbers") from None
        return cls(tuple(nodes), r_s, r_c, (w, h), int(data.get("seed", 0)))

    @classmethod
    def from_json(cls, text: str) -> Deployment:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DeploymentFormatError(f"invalid JSON: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path) -> Deployment:
        return cls.from_json(Path(path).read_text())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(indent=1))


def _on_border(p: Point, w: float, h: float) -> bool:
    inside = 0.0 <= p.x <= w and 0.0 <= p.y <= h
    return inside and (p.x in (0.0, w) or p.y in (0.0, h))


def deployment_from_points(
    points: Iterable[Sequence[float]],
    r_s: float,
    r_c: float,
    field: tuple[float, float] = (100.0, 100.0),
    fence: Iterable[bool] | None = None,
) -> Deployment:
    """Build a deployment from raw coordinates; ids follow input order."""
    pts = [tuple(map(float, p)) for p in points]
    flags = list(fence) if fence is not None else [False] * len(pts)
    nodes = tuple(SensorNode(i, Point(x, y), bool(f)) for i, ((x, y), f) in enumerate(zip(pts, flags)))
    return Deployment(nodes, r_s, r_c, field)


def _check_finite(**params: float) -> None:
    for name, value in params.items():
        if not math.isfinite(value):
            raise ParameterError(f"{name} must be finite, got {value}")


def uniform_in_ball(n: int, radius: float, gen: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. points uniform in the disk B(0, radius), as an (n, 2) array."""
    r = radius * np.sqrt(gen.random(n))
    theta = 2.0 * np.pi * gen.random(n)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def sample_poisson_ball(intensity: float, radius: float, rng: RngStream) -> list[Point]:
    """Homogeneous Poisson process of the given intensity restricted to B(0, radius)."""
    _check_finite(intensity=intensity, radius=radius)
    if intensity < 0 or radius <= 0:
        raise ParameterError("need intensity >= 0 and radius > 0")
    gen = rng.generator()
    n = int(gen.poisson(intensity * math.pi * radius * radius))
    return [Point(float(x), float(y)) for x, y in uniform_in_ball(n, radius, gen)]


def fence_positions(width: float, height: float, spacing: float) -> list[tuple[float, float]]:
    """Border positions counter-clockwise from the origin corner, corners included once.

    A side whose length is not a multiple of ``spacing`` is split into the
    fewest equal segments no longer than ``spacing``.
    """
    pts: list[tuple[float, float]] = []
    corners = [(0.0, 0.0), (width, 0.0), (width, height), (0.0, height)]
    for k in range(4):
        (x0, y0), (x1, y1) = corners[k], corners[(k + 1) % 4]
        length = math.hypot(x1 - x0, y1 - y0)
        segs = max(1, math.ceil(length / spacing - 1e-12))
        for j in range(segs):
            t = j / segs
            pts.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
    return pts


def sample_deployment(
    field: tuple[float, float],
    intensity: float,
    r_s: float,
    r_c: float,
    fence_spacing: float,
    rng: RngStream,
) -> Deployment:
    """Fence ring on the border plus Poisson(intensity) internal nodes.

    Fence nodes get ids ``0..F-1`` in counter-clockwise order; internal nodes
    follow in draw order.
    """
    w, h = map(float, field)
    _check_finite(intensity=intensity, r_s=r_s, r_c=r_c, fence_spacing=fence_spacing, w=w, h=h)
    if fence_spacing > r_c:
        raise ConfigurationError(f"fence spacing {fence_spacing} exceeds r_c={r_c}; fence ring would be disconnected")
    if intensity < 0 or fence_spacing <= 0 or w <= 0 or h <= 0:
        raise ParameterError("intensity, spacing and field size must be positive")
    gen = rng.generator()
    nodes = [SensorNode(i, Point(x, y), True) for i, (x, y) in enumerate(fence_positions(w, h, fence_spacing))]
    n = int(gen.poisson(intensity * w * h))
    xy = gen.random((n, 2)) * np.array([w, h])
    base = len(nodes)
    nodes.extend(SensorNode(base + i, Point(float(x), float(y)), False) for i, (x, y) in enumerate(xy))
    return Deployment(tuple(nodes), float(r_s), float(r_c), (w, h), rng.seed64())


def cross(o: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    (ox, oy), (ax, ay), (bx, by) = o, a, b
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def point_in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool:
    """Closed convex-hull membership; a collinear triple contains only its hull segment."""
    d1 = cross(a, b, p)
    d2 = cross(b, c, p)
    d3 = cross(c, a, p)
    if cross(a, b, c) == 0.0:
        if d1 != 0.0 or d2 != 0.0 or d3 != 0.0:
            return False
        xs = (a.x, b.x, c.x)
        ys = (a.y, b.y, c.y)
        return min(xs) <= p.x <= max(xs) and min(ys) <= p.y <= max(ys)
    has_neg = d1 < 0 or d2 < 0 or d3 < 0
    has_pos = d1 > 0 or d2 > 0 or d3 > 0
    return not (has_neg and has_pos)


def points_in_triangle(pts: np.ndarray, a, b, c) -> np.ndarray:
    """Vectorized closed-triangle test for an (n, 2) array; non-degenerate triangles only."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    x, y = pts[:, 0], pts[:, 1]
    d1 = (bx - ax) * (y - ay) - (by - ay) * (x - ax)
    d2 = (cx - bx) * (y - by) - (cy - by) * (x - bx)
    d3 = (ax - cx) * (y - cy) - (ay - cy) * (x - cx)
    has_neg = (d1 < 0) | (d2 < 0) | (d3 < 0)
    has_pos = (d1 > 0) | (d2 > 0) | (d3 > 0)
    return ~(has_neg & has_pos)


def is_covered(p: Point, deployment: Deployment) -> bool:
    if not deployment.nodes:
        return False
    d = deployment.positions - np.array([p.x, p.y])
    return bool(np.any(np.einsum("ij,ij->i", d, d) <= deployment.r_s * deployment.r_s))
