"""Round-based simulator: the global residual graph lives here, nodes only ever see their NodeView."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ..complexes import Edge, RipsComplex, betti, build_rips, is_connected
from ..geometry import Deployment

log = logging.getLogger(__name__)


class PreconditionError(RuntimeError):
    """The network violates an assumption the algorithm depends on."""


class HomologyViolation(AssertionError):
    pass


@dataclass
class NodeView:
    """Everything a node knows: its own flags plus 1- and 2-hop neighbour tables."""

    id: int
    is_fence: bool
    n1: frozenset[int] = frozenset()
    n2: dict[int, frozenset[int]] = field(default_factory=dict)
    alive: bool = True
    weight: int | None = None
    boundary_edges: set[int] = field(default_factory=set)

    def common(self, u: int) -> frozenset[int]:
        """Common neighbours of the edge (self, u)."""
        return self.n1 & self.n2[u]

    def neighbourhood_graph(self, exclude: Iterable[int] = ()) -> dict[int, set[int]]:
        """Induced graph on n1 (minus ``exclude``), built from the 2-hop tables."""
        drop = set(exclude)
        verts = self.n1 - drop
        return {u: set(self.n2[u] & verts) for u in verts}


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Network:
    """Simulated sensor network; the only writer of node state.

    Stage code reads ``views`` to make node-local decisions and calls the
    mutation methods, which refresh the affected views and count messages.
    """

    def __init__(self, deployment: Deployment, rips: RipsComplex | None = None, check: str = "stage"):
        self.deployment = deployment
        self.rips = rips or build_rips(deployment)
        self.adj: dict[int, set[int]] = self.rips.adjacency()
        fence = deployment.fence_ids
        self.views: dict[int, NodeView] = {v: NodeView(v, v in fence) for v in self.adj}
        self.messages: Counter[str] = Counter()
        self.rounds: Counter[str] = Counter()
        self.check = check  # "off", "stage" or "step"
        self.initial_betti1 = betti(self.rips).betti1
        self.deleted_edges: list[Edge] = []
        self.deleted_vertices: list[int] = []
        self.stage = "init"

    # -- bookkeeping -----------------------------------------------------------
    def alive_ids(self) -> list[int]:
        return sorted(self.adj)

    def residual(self) -> RipsComplex:
        edges = {_edge(u, v) for u, nb in self.adj.items() for v in nb}
        return RipsComplex.flag(self.adj.keys(), edges)

    def betti1(self) -> int:
        return betti(self.residual()).betti1

    def assert_homology(self, where: str) -> None:
        b = self.betti1()
        if b != self.initial_betti1:
            raise HomologyViolation(f"betti1 changed {self.initial_betti1} -> {b} at {where}")

    def _after_step(self, what: str) -> None:
        if self.check == "step":
            self.assert_homology(what)

    def send(self, n: int = 1) -> None:
        self.messages[self.stage] += n

    def _refresh(self, ids: Iterable[int]) -> None:
        for v in ids:
            if v not in self.adj:
                continue
            view = self.views[v]
            view.n1 = frozenset(self.adj[v])
            view.n2 = {u: frozenset(self.adj[u]) for u in self.adj[v]}

    def refresh_all(self) -> None:
        self._refresh(list(self.adj))

    # -- mutations ---------------------------------------------------------------
    def delete_vertex(self, v: int) -> None:
        nbrs = self.adj.pop(v)
        for u in nbrs:
            self.adj[u].discard(v)
        view = self.views[v]
        view.alive = False
        view.weight = None
        view.boundary_edges = set()
        for u in nbrs:
            self.views[u].boundary_edges.discard(v)
        self.deleted_vertices.append(v)
        # deletion notice, then each neighbour re-announces its table
        self.send(1 + len(nbrs))
        self._refresh(self._two_hop(nbrs))
        self._after_step(f"delete vertex {v}")

    def delete_edge(self, u: int, v: int) -> None:
        if v not in self.adj[u]:
            raise KeyError(f"edge {(u, v)} not present")
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        self.views[u].boundary_edges.discard(v)
        self.views[v].boundary_edges.discard(u)
        self.deleted_edges.append(_edge(u, v))
        self.send(2)
        self._refresh(self._two_hop({u, v}))
        self._after_step(f"delete edge {(u, v)}")

    def _two_hop(self, seeds: Iterable[int]) -> set[int]:
        out = set()
        for s in seeds:
            if s in self.adj:
                out.add(s)
                out |= self.adj[s]
        return out


def exchange_neighborhoods(network: Network) -> Network:
    """Two hello rounds: ids, then neighbour lists. Costs 2 messages per node."""
    if not is_connected(network.adj):
        raise PreconditionError("connectivity graph has more than one component")
    network.stage = "exchange"
    network.refresh_all()
    network.send(2 * len(network.adj))
    network.rounds["exchange"] = 2
    return network


def adjacency_of(views: Mapping[int, NodeView]) -> dict[int, set[int]]:
    return {v: set(view.n1) for v, view in views.items() if view.alive}
