"""Rips/Čech simplices up to dimension 2 and GF(2) Betti numbers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .geometry import Deployment

# containment slack for the Čech triple test, in meters
CECH_SLACK = 1e-9

Edge = tuple[int, int]
Triangle = tuple[int, int, int]


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class SimplicialGraph:
    vertices: frozenset[int]
    edges: frozenset[Edge]

    def __post_init__(self):
        edges = frozenset(_edge(u, v) for u, v in self.edges)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if u not in self.vertices or v not in self.vertices:
                raise ValueError(f"edge {(u, v)} has an endpoint outside the vertex set")
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_adjacency(cls, adj: Mapping[int, Iterable[int]]) -> SimplicialGraph:
        edges = {_edge(u, v) for u, nbrs in adj.items() for v in nbrs}
        return cls(frozenset(adj), frozenset(edges))

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def flag_triangles(self) -> frozenset[Triangle]:
        return flag_triangles(self.adjacency())


@dataclass(frozen=True)
class RipsComplex:
    vertex_ids: tuple[int, ...]
    edges: frozenset[Edge]
    triangles: frozenset[Triangle]

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in self.vertex_ids}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def graph(self) -> SimplicialGraph:
        return SimplicialGraph(frozenset(self.vertex_ids), self.edges)

    def is_face_closed(self) -> bool:
        verts = set(self.vertex_ids)
        if any(u not in verts or v not in verts for u, v in self.edges):
            return False
        return all({(a, b), (a, c), (b, c)} <= self.edges for a, b, c in self.triangles)

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertex_ids),
            "edges": [list(e) for e in sorted(self.edges)],
            "triangles": [list(t) for t in sorted(self.triangles)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> RipsComplex:
        return cls(
            tuple(sorted(int(v) for v in data["vertices"])),
            frozenset(_edge(int(u), int(v)) for u, v in data["edges"]),
            frozenset(tuple(sorted(map(int, t))) for t in data["triangles"]),
        )

    @classmethod
    def flag(cls, vertices: Iterable[int], edges: Iterable[Edge]) -> RipsComplex:
        g = SimplicialGraph(frozenset(vertices), frozenset(edges))
        return cls(tuple(sorted(g.vertices)), g.edges, g.flag_triangles())


@dataclass(frozen=True)
class HomologyReport:
    betti0: int
    betti1: int


def flag_triangles(adj: Mapping[int, set[int]]) -> frozenset[Triangle]:
    """All 3-cliques as sorted id triples."""
    tris = set()
    for u, nu in adj.items():
        for v in nu:
            if v <= u:
                continue
            for w in nu & adj[v]:
                if w > v:
                    tris.add((u, v, w))
    return frozenset(tris)


def rips_at_scale(deployment: Deployment, scale: float) -> RipsComplex:
    """Rips complex (dimension <= 2) with edges at pairwise distance <= ``scale``."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    ids = deployment.ids
    pos = deployment.positions
    edges: set[Edge] = set()
    if len(ids) > 1:
        diff = pos[:, None, :] - pos[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        iu, ju = np.nonzero(np.triu(d2 <= scale * scale, k=1))
        edges = {_edge(int(ids[i]), int(ids[j])) for i, j in zip(iu, ju)}
    return RipsComplex.flag(ids.tolist(), edges)


def build_rips(deployment: Deployment) -> RipsComplex:
    return rips_at_scale(deployment, deployment.r_c)


def min_enclosing_radius(pts: Sequence[Sequence[float]]) -> float:
    """Radius of the smallest disk containing 1, 2 or 3 planar points."""
    p = np.asarray(pts, dtype=float)
    if len(p) == 1:
        return 0.0
    if len(p) == 2:
        return 0.5 * float(np.hypot(*(p[0] - p[1])))
    if len(p) != 3:
        raise ValueError("only up to three points supported")
    a, b, c = p
    la2 = float(np.sum((b - c) ** 2))
    lb2 = float(np.sum((a - c) ** 2))
    lc2 = float(np.sum((a - b) ** 2))
    s = sorted([la2, lb2, lc2])
    # right/obtuse or degenerate: longest side is a diameter
    if s[2] >= s[0] + s[1]:
        return 0.5 * math.sqrt(s[2])
    area2 = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    return math.sqrt(la2 * lb2 * lc2) / (2.0 * area2)


def cech_simplex(ids: Sequence[int], deployment: Deployment) -> bool:
    """True iff the closed sensing disks of the given nodes share a point.

    Equal radii make this a smallest-enclosing-circle question: a common
    point exists iff the centers fit in a disk of radius ``r_s``.
    """
    if len(set(ids)) != len(ids) or not 1 <= len(ids) <= 3:
        raise ValueError("need 1 to 3 distinct node ids")
    pts = [tuple(deployment.position(i)) for i in ids]
    return min_enclosing_radius(pts) <= deployment.r_s + CECH_SLACK


# GF(2) linear algebra ---------------------------------------------------------


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of vectors packed as Python ints."""
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            top = r.bit_length() - 1
            piv = basis.get(top)
            if piv is None:
                basis[top] = r
                break
            r ^= piv
    return len(basis)


def _boundary_ranks(vertices: Sequence[int], edges: Iterable[Edge], triangles: Iterable[Triangle]) -> tuple[int, int, int]:
    vidx = {v: i for i, v in enumerate(vertices)}
    edge_list = sorted(edges)
    eidx = {e: i for i, e in enumerate(edge_list)}
    d1 = ((1 << vidx[u]) | (1 << vidx[v]) for u, v in edge_list)
    d2 = ((1 << eidx[(a, b)]) | (1 << eidx[(a, c)]) | (1 << eidx[(b, c)]) for a, b, c in triangles)
    return len(edge_list), gf2_rank(d1), gf2_rank(d2)


def betti(complex: RipsComplex | SimplicialGraph) -> HomologyReport:
    """Betti-0 and Betti-1 over GF(2); a bare graph is taken with its flag 2-complex."""
    if isinstance(complex, SimplicialGraph):
        vertices = sorted(complex.vertices)
        edges, triangles = complex.edges, complex.flag_triangles()
    else:
        vertices, edges, triangles = list(complex.vertex_ids), complex.edges, complex.triangles
    n_e, r1, r2 = _boundary_ranks(vertices, edges, triangles)
    return HomologyReport(len(vertices) - r1, n_e - r1 - r2)


def is_connected(adj: Mapping[int, Iterable[int]]) -> bool:
    if not adj:
        return True
    start = next(iter(adj))
    seen = {start}
    stack = [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(adj)


def is_simple_connectedness(g: SimplicialGraph | Mapping[int, Iterable[int]]) -> bool:
    """Connected, and every cycle is a GF(2) sum of the graph's 3-cycles."""
    adj = g.adjacency() if isinstance(g, SimplicialGraph) else {v: set(n) for v, n in g.items()}
    if not is_connected(adj):
        return False
    n_e = sum(len(n) for n in adj.values()) // 2
    cycle_dim = n_e - len(adj) + 1
    if cycle_dim == 0:
        return True
    eidx: dict[Edge, int] = {}
    for u, nu in adj.items():
        for v in nu:
            if u < v:
                eidx[(u, v)] = len(eidx)
    rows = []
    for u, v, w in flag_triangles(adj):
        rows.append((1 << eidx[(u, v)]) | (1 << eidx[(u, w)]) | (1 << eidx[(v, w)]))
    return gf2_rank(rows) == cycle_dim
