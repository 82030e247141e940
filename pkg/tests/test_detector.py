import json
import logging

import pytest

from covhole.campaign import fence_component
from covhole.complexes import RipsComplex
from covhole.detector import (
    BoundaryCycle,
    Network,
    PreconditionError,
    boundary_edge_stage,
    coarse_cycle_stage,
    compute_weight,
    edge_deletion_stage,
    edge_walks,
    exchange_neighborhoods,
    has_hamilton_cycle,
    hp_deletable_vertex,
    minimize_cycles,
    run_hba,
    vertex_deletion_stage,
)
from covhole.detector.local import may_delete_special_edge
from covhole.detector.stages import boundary_edge_set, is_boundary_edge, mark_boundary
from covhole.fixtures import dense_deployment, square_hole_deployment
from covhole.geometry import RngStream, deployment_from_points, sample_deployment


def make_net(n, edges, fence=(), exchange=True):
    """Network over an abstract graph; positions are placeholders the detector never reads."""
    fence = set(fence)
    pts = [(0.0, 1.0 + i) if i in fence else (1.0 + i % 90, 1.0 + i // 90) for i in range(n)]
    dep = deployment_from_points(pts, 10, 20, field=(100, 100), fence=[i in fence for i in range(n)])
    net = Network(dep, RipsComplex.flag(range(n), edges))
    return exchange_neighborhoods(net) if exchange else net


def ring(ids):
    return [(ids[i], ids[(i + 1) % len(ids)]) for i in range(len(ids))]


def complete(ids):
    return [(a, b) for i, a in enumerate(ids) for b in ids[i + 1 :]]


def wheel(rim):
    """Centre 0 joined to a rim cycle 1..rim."""
    ids = list(range(1, rim + 1))
    return ring(ids) + [(0, i) for i in ids]


# neighbourhood exchange -------------------------------------------------------


def test_exchange_triangle():
    net = make_net(3, ring([0, 1, 2]))
    v = net.views[0]
    assert v.n1 == {1, 2}
    assert v.n2[1] == {0, 2} and v.n2[2] == {0, 1}


def test_exchange_path_shows_two_hop():
    net = make_net(3, [(0, 1), (1, 2)])
    assert net.views[0].n1 == {1}
    assert 2 in net.views[0].n2[1]


def test_exchange_message_count():
    net = make_net(7, wheel(6))
    assert net.messages["exchange"] == 14


def test_disconnected_network_rejected():
    with pytest.raises(PreconditionError):
        make_net(4, [(0, 1), (2, 3)])


# node-local decisions ---------------------------------------------------------


def test_weights():
    assert compute_weight(make_net(4, complete([0, 1, 2, 3]), fence=[0]).views[0]) == 0
    assert compute_weight(make_net(4, ring([0, 1, 2]) + [(0, 3)]).views[0]) == 0  # pendant-like edge
    assert compute_weight(make_net(5, wheel(4)).views[0]) == 2  # rim triangles have no common neighbour
    assert compute_weight(make_net(5, complete(range(5))).views[0]) == 3


def test_hp_deletable_vertex_cases():
    assert hp_deletable_vertex(make_net(4, complete(range(4))).views[0])  # neighbourhood is a triangle
    assert not hp_deletable_vertex(make_net(5, wheel(4)).views[0])  # chordless 4-cycle
    assert not hp_deletable_vertex(make_net(2, [(0, 1)]).views[0])


def test_hamilton_search():
    c4 = {0: {1, 3}, 1: {0, 2}, 2: {1, 3}, 3: {0, 2}}
    path = {0: {1}, 1: {0, 2}, 2: {1}}
    star = {0: {1, 2, 3}, 1: {0}, 2: {0}, 3: {0}}
    assert has_hamilton_cycle(c4)
    assert has_hamilton_cycle({i: set(range(5)) - {i} for i in range(5)})
    assert not has_hamilton_cycle(path) and not has_hamilton_cycle(star)


# deletion stages --------------------------------------------------------------


def test_no_weight3_no_deletion():
    net = make_net(4, ring(range(4)))
    assert vertex_deletion_stage(net) == 0


def test_adjacent_deletable_nodes_take_turns():
    net = make_net(5, complete(range(5)))
    assert vertex_deletion_stage(net) == 2
    # one deletion per round: 0, then 1; the remaining triangle has weight 2
    assert net.deleted_vertices == [0, 1]
    assert net.rounds["vertex_deletion"] == 3


def special_edge_graph(extra=False):
    # node 0 over the 4-cycle 1-2-3-4, plus 5 hanging off 1: (0, 5) has the single common neighbour 1
    edges = ring([1, 2, 3, 4]) + [(0, i) for i in (1, 2, 3, 4, 5)] + [(1, 5)]
    if extra:
        edges += [(0, 6), (3, 6)]
    return make_net(7 if extra else 6, edges)


def test_special_edge_deleted_when_hamiltonian_remains():
    assert may_delete_special_edge(special_edge_graph().views[0]) == 5


def test_two_special_edges_block_deletion():
    assert may_delete_special_edge(special_edge_graph(extra=True).views[0]) is None


def test_hamilton_limit_skips_with_warning(caplog):
    rim = list(range(1, 14))
    net = make_net(15, ring(rim) + [(0, i) for i in rim] + [(0, 14), (1, 14)])
    with caplog.at_level(logging.WARNING):
        assert may_delete_special_edge(net.views[0]) is None
    assert "Hamilton" in caplog.text


def test_edge_stage_keeps_homology():
    net = special_edge_graph()
    vertex_deletion_stage(net)
    edge_deletion_stage(net)
    assert net.betti1() == net.initial_betti1


# boundary edges -----------------------------------------------------------------


@pytest.mark.parametrize("variant", ["templates", "fan"])
def test_chordless_square_all_boundary(variant):
    net = make_net(4, ring(range(4)))
    assert boundary_edge_stage(net, variant) == {(0, 1), (1, 2), (2, 3), (0, 3)}


def test_triangulated_patch_inner_edges_not_boundary():
    net = make_net(7, wheel(6))
    mark_boundary(net)
    marked = boundary_edge_set(net)
    assert all(0 not in e for e in marked)
    assert len(marked) == 6


def annulus_with_hidden_edge():
    """Hexagonal hole 0..5 inside a triangulated ring of fence nodes 6..11.

    Node 12 gives the hole edge (0, 1) a second common neighbour.
    """
    inner = list(range(6))
    outer = list(range(6, 12))
    edges = ring(inner) + ring(outer)
    for i in range(6):
        edges += [(i, 6 + i), ((i + 1) % 6, 6 + i)]
    edges += [(12, 0), (12, 1), (12, 6)]
    return make_net(13, edges, fence=range(6, 12))


def test_hidden_hole_edge_is_missed_by_the_neighbour_rule():
    net = annulus_with_hidden_edge()
    assert not is_boundary_edge(net, 0, 1)
    mark_boundary(net)
    marked = boundary_edge_set(net)
    assert (0, 1) not in marked
    assert {(1, 2), (2, 3), (3, 4), (4, 5), (0, 5)} <= marked


@pytest.mark.parametrize("variant", ["templates", "fan"])
def test_hidden_edge_hole_still_found(variant):
    net = annulus_with_hidden_edge()
    boundary_edge_stage(net, variant)
    search = edge_walks(net) if variant == "fan" else coarse_cycle_stage(net)
    cycles = minimize_cycles(net, search.cycles, independent=True)
    assert len(cycles) == 1
    assert {0, 1} <= set(cycles[0].nodes)
    assert net.betti1() == 1


# coarse cycles and minimization ------------------------------------------------------


def test_single_square_one_cycle():
    net = make_net(4, ring(range(4)))
    boundary_edge_stage(net)
    search = coarse_cycle_stage(net)
    assert [sorted(c.nodes) for c in search.cycles] == [[0, 1, 2, 3]]


def test_two_holes_two_disjoint_cycles():
    net = make_net(8, ring([0, 1, 2, 3]) + ring([4, 5, 6, 7]) + [(3, 4)])
    boundary_edge_stage(net)
    cycles = coarse_cycle_stage(net).cycles
    sets = sorted(sorted(c.nodes) for c in cycles)
    assert sets == [[0, 1, 2, 3], [4, 5, 6, 7]]


def test_minimize_uses_chord():
    net = make_net(5, ring(range(5)) + [(0, 2)])
    (out,) = minimize_cycles(net, [BoundaryCycle((0, 1, 2, 3, 4))])
    assert sorted(out.nodes) == [0, 2, 3, 4]


def test_minimize_two_hop_shrink():
    # x = 7 sees a, b, c, d = 0, 1, 2, 3
    net = make_net(8, ring(range(7)) + [(7, i) for i in range(4)])
    (out,) = minimize_cycles(net, [BoundaryCycle(tuple(range(7)))])
    assert sorted(out.nodes) == [0, 3, 4, 5, 6, 7]
    assert set(out.edges()) <= net.residual().edges


def test_minimal_square_unchanged():
    net = make_net(4, ring(range(4)))
    (out,) = minimize_cycles(net, [BoundaryCycle((0, 1, 2, 3))])
    assert out.nodes == (0, 1, 2, 3)


def test_cone_cycles_dropped():
    net = make_net(7, wheel(6))
    assert minimize_cycles(net, [BoundaryCycle(tuple(range(1, 7)))]) == []


def test_cycle_rejects_repeated_vertex():
    with pytest.raises(ValueError):
        BoundaryCycle((0, 1, 0, 2))


# end to end -----------------------------------------------------------------------


@pytest.mark.parametrize("variant", ["templates", "fan"])
def test_dense_field_no_cycles(variant):
    assert run_hba(dense_deployment(), variant=variant).cycles == []


@pytest.mark.parametrize("variant", ["templates", "fan"])
def test_square_pocket_one_cycle(variant):
    dep, corners = square_hole_deployment()
    report = run_hba(dep, variant=variant)
    assert report.cycle_lists() == [list(corners)]


def random_deployments(count, base=50):
    out = []
    for k in range(count):
        lam = (0.008, 0.010, 0.012)[k % 3]
        dep = sample_deployment((100, 100), lam, 10, 20, 20, RngStream(base, k))
        out.append(fence_component(dep)[0])
    return out


@pytest.mark.parametrize("variant", ["templates", "fan"])
def test_every_deletion_keeps_homology(variant):
    for dep in random_deployments(3):
        report = run_hba(dep, check="step", variant=variant)
        assert set(report.betti1_by_stage.values()) == {report.betti1_initial}


def test_reports_are_sound_and_keep_fences():
    for dep in random_deployments(6, base=51):
        report = run_hba(dep)
        res = report.residual
        assert dep.fence_ids <= set(res.vertex_ids)
        for cyc in report.cycles:
            assert cyc.length >= 4
            assert set(cyc.edges()) <= res.edges


def test_deterministic_report():
    dep = random_deployments(1, base=52)[0]
    a, b = run_hba(dep), run_hba(dep)
    assert a.to_json() == b.to_json()
    assert json.loads(a.to_json()).keys() == {"cycles", "rounds", "messages"}


def test_unknown_variant():
    with pytest.raises(ValueError):
        run_hba(dense_deployment(), variant="magic")


def test_residual_classes_bounded_by_cycles():
    # the reported cycles are independent in the residual homology
    for dep in random_deployments(3, base=53):
        report = run_hba(dep, variant="fan")
        assert len(report.cycles) <= report.betti1_initial
