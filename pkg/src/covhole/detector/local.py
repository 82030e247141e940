"""Decisions a node can make from its own view."""

from __future__ import annotations

import logging
from functools import lru_cache

from ..complexes import is_connected, is_simple_connectedness
from .network import NodeView

log = logging.getLogger(__name__)

HAMILTON_LIMIT = 12


class HamiltonLimitExceeded(RuntimeError):
    pass


def compute_weight(view: NodeView) -> int:
    if view.is_fence:
        return 0
    n1 = view.n1
    for u in n1:
        if not (view.n2[u] & n1):
            return 0
    for u in n1:
        nu = view.n2[u] & n1
        for w in nu:
            if w > u and not (nu & view.n2[w]):
                return 2
    return 3


def _hp_graph_ok(g: dict[int, set[int]]) -> bool:
    return len(g) >= 2 and is_connected(g) and is_simple_connectedness(g)


def hp_deletable_vertex(view: NodeView) -> bool:
    return view.alive and _hp_graph_ok(view.neighbourhood_graph())


def edge_neighbourhood_graph(view: NodeView, u: int) -> dict[int, set[int]]:
    """Graph on the common neighbours of (v, u) together with v and u, minus the edge itself."""
    v = view.id
    common = view.common(u)
    verts = set(common) | {u, v}
    g = {x: set() for x in verts}
    for w in common:
        g[v].add(w)
        g[w].add(v)
        for x in view.n2[w] & verts:
            if x != v:
                g[w].add(x)
                g[x].add(w)
    return g


def hp_deletable_edge(view: NodeView, u: int) -> bool:
    return u in view.n1 and _hp_graph_ok(edge_neighbourhood_graph(view, u))


def special_edges(view: NodeView) -> list[int]:
    """Neighbours u such that (v, u) has exactly one common neighbour."""
    return sorted(u for u in view.n1 if len(view.common(u)) == 1)


def has_hamilton_cycle(g: dict[int, set[int]]) -> bool:
    """Exhaustive bitmask search; graphs above HAMILTON_LIMIT vertices are refused."""
    n = len(g)
    if n > HAMILTON_LIMIT:
        raise HamiltonLimitExceeded(f"{n} vertices")
    if n < 3:
        return False
    order = sorted(g)
    idx = {v: i for i, v in enumerate(order)}
    masks = tuple(sum(1 << idx[w] for w in g[v]) for v in order)
    return _hamilton(n, masks)


@lru_cache(maxsize=4096)
def _hamilton(n: int, masks: tuple[int, ...]) -> bool:
    full = (1 << n) - 1
    # reach[S] = set of end vertices of paths from vertex 0 covering S
    reach = [0] * (1 << n)
    reach[1] = 1
    for s in range(1, full + 1):
        ends = reach[s]
        if not ends or not s & 1:
            continue
        e = ends
        while e:
            low = e & -e
            j = low.bit_length() - 1
            e ^= low
            nxt = masks[j] & ~s
            while nxt:
                b = nxt & -nxt
                nxt ^= b
                reach[s | b] |= b
    return bool(reach[full] & masks[0] & ~1)


def may_delete_special_edge(view: NodeView) -> int | None:
    """The single special edge's far end if dropping it leaves a Hamiltonian neighbourhood."""
    if view.is_fence:
        return None
    sp = special_edges(view)
    if len(sp) != 1:
        return None
    u = sp[0]
    try:
        ok = has_hamilton_cycle(view.neighbourhood_graph(exclude=[u]))
    except HamiltonLimitExceeded as exc:
        log.warning("node %d: skipping Hamilton check (%s)", view.id, exc)
        return None
    return u if ok else None
