"""Deletion and boundary-edge stages."""

from __future__ import annotations

import logging

from .local import compute_weight, hp_deletable_edge, hp_deletable_vertex, may_delete_special_edge
from .network import Network

log = logging.getLogger(__name__)

MAX_ROUNDS = 10_000


def _end_stage(net: Network, name: str) -> None:
    if net.check != "off":
        net.assert_homology(f"end of {name}")


def vertex_deletion_stage(net: Network) -> int:
    """Synchronous rounds of weight-3, HP-deletable, locally-minimal-id deletions. Returns the count."""
    net.stage = "vertex_deletion"
    deleted = 0
    for _ in range(MAX_ROUNDS):
        net.rounds["vertex_deletion"] += 1
        views = net.views
        for v in net.alive_ids():
            views[v].weight = compute_weight(views[v])
        deletable = {v for v in net.alive_ids() if views[v].weight == 3 and hp_deletable_vertex(views[v])}
        # every node announces its status once per round
        net.send(len(net.adj))
        chosen = [v for v in sorted(deletable) if all(u > v for u in views[v].n1 if u in deletable)]
        if not chosen:
            break
        for v in chosen:
            net.delete_vertex(v)
        deleted += len(chosen)
    _end_stage(net, "vertex_deletion")
    return deleted


def edge_deletion_stage(net: Network) -> int:
    """Special-edge deletions interleaved with vertex deletion until neither applies."""
    total = 0
    while True:
        net.stage = "edge_deletion"
        removed = 0
        for _ in range(MAX_ROUNDS):
            net.rounds["edge_deletion"] += 1
            step = 0
            for v in net.alive_ids():
                if v not in net.adj:
                    continue
                u = may_delete_special_edge(net.views[v])
                if u is not None:
                    net.delete_edge(v, u)
                    step += 1
            removed += step
            if not step:
                break
        _end_stage(net, "edge_deletion")
        total += removed
        if not removed or not vertex_deletion_stage(net):
            break
    return total


# boundary edges ---------------------------------------------------------------

BOUNDARY_VARIANTS = ("templates", "fan")


def is_boundary_edge(net: Network, v: int, u: int, lost: int = 0) -> bool:
    """At most one common neighbour; an edge between two fence nodes needs none.

    The fence ring borders the unmonitored exterior, which acts as the
    missing second neighbour of a fence-fence edge. ``lost`` discounts
    common neighbours about to disappear.
    """
    view = net.views[v]
    c = len(view.common(u)) - lost
    if view.is_fence and net.views[u].is_fence:
        return c == 0
    return c <= 1


def is_fan_edge(net: Network, v: int, u: int) -> bool:
    """Boundary test of the fan variant: every triangle on the edge sits on one side.

    The common neighbours then form one connected cluster, which is the
    same as the edge being HP-deletable; an interior edge has clusters on
    both sides. Fence-fence edges follow the plain rule.
    """
    view = net.views[v]
    if view.is_fence and net.views[u].is_fence:
        return not view.common(u)
    return len(view.common(u)) <= 1 or hp_deletable_edge(view, u)


def mark_boundary(net: Network, rule=is_boundary_edge) -> int:
    for v in net.alive_ids():
        view = net.views[v]
        view.boundary_edges = {u for u in view.n1 if rule(net, v, u)}
    net.send(len(net.adj))
    return sum(len(net.views[v].boundary_edges) for v in net.adj) // 2


def _boundary_nodes(net: Network) -> set[int]:
    return {v for v in net.adj if net.views[v].boundary_edges}


def _dangling(net: Network) -> set[int]:
    """Boundary nodes holding a single boundary edge: ends of an unfinished boundary chain."""
    return {v for v in net.adj if len(net.views[v].boundary_edges) == 1}


def _exposes(net: Network, v: int, u: int, at: set[int]) -> bool:
    """Would dropping (v, u) turn some edge at a node of ``at`` into a boundary edge?"""
    views = net.views
    for a, b in ((v, u), (u, v)):
        if a not in at:
            continue
        for x in views[a].common(b):
            if x not in views[a].boundary_edges and is_boundary_edge(net, a, x, lost=1):
                return True
    return False


def _try_delete(net: Network, v: int, u: int, why: str, at: set[int] | None = None) -> bool:
    """HP-deletable removal of (v, u); with ``at`` it must also expose a boundary edge there.

    Fence-fence edges are never removed: the ring closes the exterior.
    """
    views = net.views
    if u not in net.adj.get(v, ()) or (views[v].is_fence and views[u].is_fence):
        return False
    if not hp_deletable_edge(views[v], u):
        return False
    if at is not None and not _exposes(net, v, u, at):
        return False
    log.debug("boundary stage: %s deletes (%d, %d)", why, v, u)
    net.delete_edge(v, u)
    mark_boundary(net)
    return True


def _delete_inner_to_boundary(net: Network) -> int:
    """Edges from a chain end to non-boundary neighbours, dropped when that extends the chain."""
    n = 0
    for u in sorted(_dangling(net)):
        bnodes = _boundary_nodes(net)
        for v in sorted(net.adj.get(u, ())):
            if v not in bnodes and u in _dangling(net) and _try_delete(net, u, v, "inner-boundary", at={u}):
                n += 1
    return n


def _delete_between_boundary(net: Network) -> int:
    """Non-boundary edges between boundary nodes, at least one a chain end."""
    n = 0
    bnodes = _boundary_nodes(net)
    edges = sorted((v, u) for v in bnodes for u in net.adj[v] if v < u and u in bnodes)
    for v, u in edges:
        if v not in net.adj or u not in net.adj[v] or u in net.views[v].boundary_edges:
            continue
        ends = _dangling(net) & {v, u}
        if ends and len(net.views[v].common(u)) >= 2 and _try_delete(net, v, u, "boundary-boundary", at=ends):
            n += 1
    return n


def _vuw_rule(net: Network, settled: set[tuple[int, int]]) -> int:
    """v with boundary neighbours u, w: vu, vw not boundary, wu a newly found boundary edge.

    wu is dropped if that makes vu or vw a boundary edge. Edges marked by
    the one-neighbour rule before any deletion are ``settled`` and kept.
    """
    n = 0
    for v in net.alive_ids():
        if v not in net.adj or net.views[v].is_fence:
            continue
        view = net.views[v]
        bn = sorted(x for x in view.n1 if net.views[x].boundary_edges and x not in view.boundary_edges)
        for i, u in enumerate(bn):
            for w in bn[i + 1 :]:
                if w not in view.n2[u] or w not in net.views[u].boundary_edges or (min(u, w), max(u, w)) in settled:
                    continue
                # after dropping wu, the edge vu loses w as a common neighbour and vice versa
                exposes = len(view.common(u) - {w}) <= 1 or len(view.common(w) - {u}) <= 1
                if exposes and _try_delete(net, u, w, "v/u/w rule"):
                    n += 1
                    view = net.views[v]
    return n


def _crossing_templates(net: Network, settled: set[tuple[int, int]]) -> int:
    """Crossing boundary edges, as connectivity templates.

    A node v whose boundary neighbours include two that are joined by a
    non-boundary path of length 2 avoiding v sits on a crossing: with exactly
    two boundary edges both are dropped, otherwise the lowest-id one. Only
    newly found boundary edges are candidates.
    """
    n = 0
    for v in net.alive_ids():
        if v not in net.adj or net.views[v].is_fence:
            continue
        view = net.views[v]
        be = sorted(view.boundary_edges)
        if len(be) < 2:
            continue
        crossing = False
        for i, a in enumerate(be):
            for b in be[i + 1 :]:
                if b in view.n2[a]:
                    continue
                mids = (view.n2[a] & view.n2[b] & view.n1) - {v}
                if any(m not in net.views[a].boundary_edges and m not in net.views[b].boundary_edges for m in mids):
                    crossing = True
                    break
            if crossing:
                break
        if not crossing:
            continue
        targets = be if len(be) == 2 else be[:1]
        for u in targets:
            if (min(u, v), max(u, v)) in settled:
                continue
            if _try_delete(net, v, u, f"crossing template ({len(be)} boundary edges)"):
                log.info("crossing template fired at node %d (%d boundary edges)", v, len(be))
                n += 1
    return n


def boundary_edge_stage(net: Network, variant: str = "templates", max_passes: int = 50) -> set[tuple[int, int]]:
    """Mark boundary edges.

    "templates" runs the deletion rules: one-neighbour marking, then HP
    deletions around unfinished boundary chains (non-boundary neighbours
    first, then edges between boundary nodes), then the v/u/w rule and the
    crossing templates on newly found edges, to a fixpoint. "fan" deletes
    nothing and marks every edge whose triangles lie on one side.
    """
    if variant not in BOUNDARY_VARIANTS:
        raise ValueError(f"unknown boundary variant {variant!r}")
    net.stage = "boundary"
    net.rounds["boundary"] += 1
    if variant == "fan":
        mark_boundary(net, is_fan_edge)
        _end_stage(net, "boundary")
        return boundary_edge_set(net)
    mark_boundary(net)
    settled = boundary_edge_set(net)
    if _delete_inner_to_boundary(net):
        net.rounds["boundary"] += 1
    if _delete_between_boundary(net):
        net.rounds["boundary"] += 1
    for _ in range(max_passes):
        net.rounds["boundary"] += 1
        if not (_vuw_rule(net, settled) + _crossing_templates(net, settled)):
            break
    mark_boundary(net)
    _end_stage(net, "boundary")
    return boundary_edge_set(net)


def boundary_edge_set(net: Network) -> set[tuple[int, int]]:
    return {(v, u) for v in net.adj for u in net.views[v].boundary_edges if v < u}
