"""Coarse boundary cycles and their local shrinking."""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass

from .network import Network

log = logging.getLogger(__name__)

# hop cost of leaving the boundary graph; boundary edges cost 1
FALLBACK_COST = 3


@dataclass(frozen=True)
class BoundaryCycle:
    nodes: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"cycle repeats a vertex: {self.nodes}")

    @property
    def length(self) -> int:
        return len(self.nodes)

    def edges(self) -> list[tuple[int, int]]:
        n = self.nodes
        return [(min(a, b), max(a, b)) for a, b in zip(n, n[1:] + n[:1])]

    def canonical(self) -> tuple[int, ...]:
        """Rotation/reflection-independent form: start at the min id, smaller neighbour second."""
        n = list(self.nodes)
        k = n.index(min(n))
        n = n[k:] + n[:k]
        if len(n) > 2 and n[-1] < n[1]:
            n = [n[0]] + n[1:][::-1]
        return tuple(n)


@dataclass
class CycleSearch:
    cycles: list[BoundaryCycle]
    failures: int
    hops: int


def _shortest_return(
    net: Network, s: int, a: int, bnodes: set[int], max_hops: int, skip_fan: bool = False
) -> list[int] | None:
    """Cheapest walk a -> s that avoids the edge (s, a), preferring boundary edges.

    With ``skip_fan`` the common neighbours of s and a, which span the fan
    on the covered side of the edge, are avoided so the walk comes back
    around the open side.
    Off the boundary graph the message may go to any neighbour; a
    non-boundary relay only forwards to its boundary neighbours.
    """
    views = net.views
    fan = views[s].common(a) if skip_fan else set()
    dist = {a: 0}
    prev: dict[int, int] = {}
    heap = [(0, a)]
    while heap:
        d, x = heapq.heappop(heap)
        if x == s:
            break
        if d > dist.get(x, float("inf")) or d > max_hops * FALLBACK_COST:
            continue
        vx = views[x]
        relay = x not in bnodes
        for y in sorted(vx.n1):
            if y == a or y in fan or (x == a and y == s):
                continue
            if relay:
                if y not in bnodes:
                    continue
                cost = FALLBACK_COST
            elif y in vx.boundary_edges:
                cost = 1
            else:
                cost = FALLBACK_COST
            nd = d + cost
            if nd < dist.get(y, float("inf")):
                dist[y] = nd
                prev[y] = x
                heapq.heappush(heap, (nd, y))
    if s not in prev:
        return None
    path = [s]
    while path[-1] != a:
        path.append(prev[path[-1]])
    path.reverse()  # a ... s
    return path


def coarse_cycle_stage(net: Network) -> CycleSearch:
    """Repeatedly start from the lowest-id node holding two unclaimed boundary edges.

    The message leaves along the lowest unclaimed edge and the cheapest
    return to the initiator closes the cycle; its boundary edges are then
    claimed so no later cycle starts from them.
    """
    net.stage = "coarse_cycles"
    views = net.views
    unclaimed = {(v, u) for v in net.adj for u in views[v].boundary_edges if v < u}
    bnodes = {v for v in net.adj if views[v].boundary_edges}
    max_hops = 4 * len(net.adj)
    cycles: list[BoundaryCycle] = []
    failures = hops = 0
    while True:
        deg: dict[int, list[int]] = {}
        for v, u in unclaimed:
            deg.setdefault(v, []).append(u)
            deg.setdefault(u, []).append(v)
        starts = sorted(v for v, nb in deg.items() if len(nb) >= 2)
        if not starts:
            break
        s = starts[0]
        a = min(deg[s])
        net.rounds["coarse_cycles"] += 1
        path = _shortest_return(net, s, a, bnodes, max_hops, skip_fan=True) or _shortest_return(
            net, s, a, bnodes, max_hops
        )
        if path is None or len(path) - 1 > max_hops:
            log.info("coarse cycle from %d via %d did not return", s, a)
            failures += 1
            unclaimed.discard((min(s, a), max(s, a)))
            continue
        nodes = (s, *path[:-1])
        hops += len(nodes)
        net.send(len(nodes))
        cyc = BoundaryCycle(nodes)
        cycles.append(cyc)
        unclaimed -= set(cyc.edges())
    return CycleSearch(cycles, failures, hops)


def edge_walks(net: Network) -> CycleSearch:
    """Fan variant: one walk per boundary edge (s, a), leaving s along it.

    No edge is claimed; walks closing on an already found vertex set are
    kept once.
    """
    net.stage = "coarse_cycles"
    views = net.views
    bnodes = {v for v in net.adj if views[v].boundary_edges}
    starts = sorted((v, u) for v in bnodes for u in views[v].boundary_edges if v < u)
    max_hops = 4 * len(net.adj)
    cycles: list[BoundaryCycle] = []
    seen: set[frozenset[int]] = set()
    failures = hops = 0
    if starts:
        net.rounds["coarse_cycles"] += 1
    for s, a in starts:
        path = _shortest_return(net, s, a, bnodes, max_hops, skip_fan=True)
        if path is None or len(path) - 1 > max_hops:
            log.debug("walk from %d via %d did not return", s, a)
            failures += 1
            continue
        nodes = (s, *path[:-1])
        hops += len(nodes)
        net.send(len(nodes))
        key = frozenset(nodes)
        if len(nodes) >= 3 and key not in seen:
            seen.add(key)
            cycles.append(BoundaryCycle(nodes))
    return CycleSearch(cycles, failures, hops)


# minimization ---------------------------------------------------------------


def _is_cone(net: Network, cyc: tuple[int, ...]) -> bool:
    """Some node sees the whole cycle in its closed neighbourhood, so it bounds a fan of triangles."""
    cand = set(net.adj[cyc[0]]) | {cyc[0]}
    for y in sorted(cand):
        closed = net.views[y].n1 | {y}
        if all(c in closed for c in cyc):
            return True
    return False


def _shrink_once(net: Network, cyc: tuple[int, ...]) -> tuple[int, ...] | None:
    """One shortening move, or None at a fixpoint.

    A run c_i..c_j inside the closed neighbourhood of some node y is
    homologous to the path c_i, y, c_j (a fan of triangles around y), and to
    the chord c_i c_j when that edge exists.
    """
    n = len(cyc)
    on_cycle = set(cyc)
    cands = sorted({y for c in cyc for y in net.adj[c]} | on_cycle)
    best = None
    for y in cands:
        view = net.views[y]
        closed = view.n1 | {y}
        inside = [c in closed for c in cyc]
        if all(inside):
            continue
        k = inside.index(False)
        # walk maximal runs starting after an outside vertex, wrapping around
        i = 0
        while i < n:
            p = (k + 1 + i) % n
            if not inside[p]:
                i += 1
                continue
            run = []
            while i < n and inside[(k + 1 + i) % n]:
                run.append(cyc[(k + 1 + i) % n])
                i += 1
            if len(run) < 3:
                continue
            first, last = run[0], run[-1]
            # chord between run ends, known to y through its 2-hop table
            if last in net.views[first].n1:
                repl = [first, last]
            elif y in on_cycle:
                if y not in run[1:-1]:
                    continue
                repl = [first, y, last]
            else:
                repl = [first, y, last]
            saved = len(run) - len(repl)
            if saved <= 0:
                continue
            if best is None or saved > best[0]:
                best = (saved, run, repl)
    if best is None:
        return None
    _, run, repl = best
    start = cyc.index(run[0])
    rot = cyc[start:] + cyc[:start]
    new = tuple(repl) + rot[len(run) :]
    return new


class CycleSpace:
    """Edge vectors over GF(2) modulo triangle boundaries of the residual complex."""

    def __init__(self, net: Network):
        res = net.residual()
        self.index = {e: i for i, e in enumerate(sorted(res.edges))}
        self.pivots: dict[int, int] = {}
        for x, y, z in res.triangles:
            self._insert(self._vec(((x, y), (x, z), (y, z))))
        self.rank = 0

    def _vec(self, edges) -> int:
        r = 0
        for e in edges:
            r ^= 1 << self.index[e]
        return r

    def _insert(self, r: int) -> bool:
        while r:
            top = r.bit_length() - 1
            piv = self.pivots.get(top)
            if piv is None:
                self.pivots[top] = r
                return True
            r ^= piv
        return False

    def add(self, cyc: BoundaryCycle) -> bool:
        """Keep the cycle if it is not homologous to a sum of the kept ones."""
        if self._insert(self._vec(cyc.edges())):
            self.rank += 1
            return True
        return False


def _shrink(net: Network, nodes: tuple[int, ...], max_steps: int) -> tuple[int, ...]:
    for _ in range(max_steps):
        if len(nodes) < 4 or _is_cone(net, nodes):
            break
        nxt = _shrink_once(net, nodes)
        net.send(1)
        if nxt is None:
            break
        nodes = nxt
    return nodes


def minimize_cycles(
    net: Network, cycles: list[BoundaryCycle], max_steps: int = 10_000, independent: bool = False
) -> list[BoundaryCycle]:
    """Shrink every coarse cycle to a fixpoint and drop those that bound a fan.

    Shrinking never changes a cycle's homology class. With ``independent``
    the shrunk cycles are taken shortest first and kept only when
    independent of those already kept, so each hole keeps one tight cycle.
    """
    net.stage = "minimize"
    shrunk: dict[frozenset[int], tuple[int, ...]] = {}
    for cyc in cycles:
        nodes = _shrink(net, cyc.nodes, max_steps)
        net.rounds["minimize"] += 1
        if len(nodes) < 4 or _is_cone(net, nodes):
            continue
        shrunk.setdefault(frozenset(nodes), BoundaryCycle(nodes).canonical())
    if not independent:
        return [BoundaryCycle(n) for n in shrunk.values()]
    space = CycleSpace(net)
    out: list[BoundaryCycle] = []
    for nodes in sorted(shrunk.values(), key=lambda n: (len(n), n)):
        cyc = BoundaryCycle(nodes)
        if space.add(cyc):
            out.append(cyc)
    return out
