import dataclasses

import pytest
from hypothesis import given, settings

from conftest import instances
from visroute.cones import build_constrained_half_theta6, build_constrained_theta
from visroute.fixtures import hidden_closer_example, theta_stuck_example
from visroute.instance import GeomGraph, make_instance, random_instance
from visroute.router import (
    MAX_WORDS,
    MalformedNeighborhood,
    ProtocolError,
    Router,
    StepBudgetExceeded,
    check_memory,
    local_half_theta6_edges,
    route_on_H,
    run_router,
    step_face_routing,
)
from visroute.triangulation import build_cdt, extract_H
from visroute.visibility import Neighborhood, build_visibility_graph, neighborhood


def chains(tr):
    vs = tr.vertices
    for k, st in enumerate(tr.steps):
        assert st.frm == vs[k]
    if tr.delivered:
        assert vs[-1] == tr.t


@given(instances(5, 25))
def test_local_matches_global(inst):
    vis = build_visibility_graph(inst)
    g = build_constrained_half_theta6(inst, vis)
    for u in range(inst.n):
        assert set(local_half_theta6_edges(neighborhood(vis, u))) == set(g.adjacency[u])


@pytest.mark.parametrize("blocked", [True, False])
def test_hidden_closer_vertex(blocked):
    # the constraint hides w from u, which makes v the closest visible vertex
    inst, nm = hidden_closer_example(blocked)
    u, v = nm["u"], nm["v"]
    vis = build_visibility_graph(inst)
    g = build_constrained_half_theta6(inst, vis)
    assert g.has_edge(u, v) is blocked
    assert (v in local_half_theta6_edges(neighborhood(vis, u))) is blocked
    assert (u in local_half_theta6_edges(neighborhood(vis, v))) is blocked


def test_asymmetric_neighborhood_rejected():
    inst = make_instance([(0, 0), (1, 5), (-3, 2)])
    vis = build_visibility_graph(inst)
    nb = neighborhood(vis, 0)
    broken = dataclasses.replace(nb, coords={0: nb.coords[0]})
    with pytest.raises(MalformedNeighborhood):
        local_half_theta6_edges(broken)


def test_s_equals_t_is_empty_delivery():
    inst = random_instance(10, seed=3)
    for algo in ("theta", "face1", "face2"):
        tr = run_router(inst, 4, 4, algo)
        assert tr.delivered and tr.steps == [] and tr.total_length == 0


def test_neighbor_target_is_one_step():
    inst = random_instance(15, seed=1)
    theta = build_constrained_theta(inst)
    u = 0
    t = theta.adjacency[u][0]
    tr = run_router(inst, u, t, "theta", theta)
    assert tr.vertices == [u, t]
    half = build_constrained_half_theta6(inst)
    t = half.adjacency[u][0]
    for algo in ("face1", "face2"):
        assert run_router(inst, u, t, algo).vertices == [u, t]


def test_theta_stuck_but_face_delivers():
    inst, s, t = theta_stuck_example()
    assert run_router(inst, s, t, "theta").status == "stuck"
    for algo in ("face1", "face2"):
        tr = run_router(inst, s, t, algo)
        assert tr.delivered and tr.status == "delivered"
        chains(tr)


@pytest.mark.parametrize("seed", range(4))
def test_theta_delivers_without_constraints(seed):
    inst = random_instance(14, seed=seed)
    router = Router(inst, "theta")
    for s in range(inst.n):
        for t in range(inst.n):
            tr = router.route(s, t)
            assert tr.delivered, (s, t, tr.status)


@pytest.mark.parametrize("seed", range(6))
def test_face_routing_delivers_on_half_theta_edges(seed):
    inst = random_instance(12, seed=seed, density=0.5)
    vis = build_visibility_graph(inst)
    allowed = build_constrained_half_theta6(inst, vis).edge_set
    for algo in ("face1", "face2"):
        router = Router(inst, algo, vis)
        for s in range(inst.n):
            for t in range(inst.n):
                tr = router.route(s, t)
                assert tr.delivered, (algo, s, t, tr.status)
                assert all((min(e), max(e)) in allowed for e in tr.directed_edges())
                chains(tr)
                assert all(len(st.memory) <= MAX_WORDS for st in tr.steps)


def test_face1_traversals_regression_bound():
    # empirical: FACE-1 stays within four passes over the half-Theta6 edges
    worst = 0.0
    for seed in range(100):
        inst = random_instance(8 + seed % 10, seed=seed, density=(0.0, 0.3, 0.7)[seed % 3])
        vis = build_visibility_graph(inst)
        m = len(build_constrained_half_theta6(inst, vis).edge_set)
        router = Router(inst, "face1", vis)
        for s, t in [(0, inst.n - 1), (inst.n - 1, 0), (1, inst.n // 2)]:
            tr = router.route(s, t)
            assert tr.delivered
            worst = max(worst, len(tr.steps) / m)
    assert worst <= 4


def test_face_variants_both_deliver_and_are_deterministic():
    inst = random_instance(25, seed=11, density=0.7)
    for algo in ("face1", "face2"):
        a = run_router(inst, 0, 24, algo).to_json(inst)
        b = run_router(inst, 0, 24, algo).to_json(inst)
        assert a == b and a["delivered"]
        assert a["edge_traversals"] == len(a["steps"])


def test_step_function_sees_only_its_packet():
    inst = random_instance(14, seed=5, density=0.3)
    vis = build_visibility_graph(inst)
    seen = []

    def spy(s, u, t, nbhd, memory):
        assert isinstance(nbhd, Neighborhood) and nbhd.u == u
        assert set(nbhd.coords) == {u, *nbhd.neighbors}
        assert set(nbhd.neighbors) == set(vis.adjacency[u])
        assert set(nbhd.constraints) == set(inst.incident_constraints[u])
        # nothing in the packet links back to the instance or the graph
        for f in dataclasses.fields(nbhd):
            assert not isinstance(getattr(nbhd, f.name), type(inst))
        assert isinstance(memory, tuple)
        seen.append(u)
        return step_face_routing(s, u, t, nbhd, memory, "face1")

    tr = Router(inst, "plugin", vis, step=spy).route(0, 13)
    assert tr.delivered and seen == tr.vertices[:-1]
    assert tr.vertices == run_router(inst, 0, 13, "face1", vis).vertices


def test_memory_budget_enforced():
    inst = random_instance(6, seed=2)
    vis = build_visibility_graph(inst)

    def hoarder(s, u, t, nbhd, memory):
        return nbhd.neighbors[0], memory + (0,)

    with pytest.raises(ProtocolError):
        Router(inst, "plugin", vis, step=hoarder).route(0, 5)
    with pytest.raises(ProtocolError):
        check_memory((1, 2, 3, 4, 5), 10)
    with pytest.raises(ProtocolError):
        check_memory((1 << 20,), 10)
    check_memory((3, None, (1, 2), 9), 10)


def test_step_to_non_neighbor_rejected():
    inst, s, t = theta_stuck_example()
    vis = build_visibility_graph(inst)
    assert not vis.has_edge(s, t)
    with pytest.raises(ProtocolError):
        Router(inst, "plugin", vis, step=lambda s, u, t, nb, m: (t[0], m)).route(s, t)


def test_step_budget_carries_trace():
    inst = random_instance(8, seed=2)
    vis = build_visibility_graph(inst)

    def bounce(s, u, t, nbhd, memory):
        return [v for v in nbhd.neighbors if v != t[0]][0], memory

    with pytest.raises(StepBudgetExceeded) as ei:
        Router(inst, "plugin", vis, step=bounce).route(0, 7, max_steps=10)
    assert len(ei.value.trace.steps) == 10 and ei.value.trace.status == "budget"


def test_disconnected_pair_is_unreachable():
    # Vis is always connected, so hand the router two separate clusters
    coords = [(0, 0), (3, 1), (1, 4), (50, 50), (53, 52), (51, 55)]
    inst = make_instance(coords)
    g = GeomGraph.from_edges(inst, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], "visibility")
    for algo in ("face1", "face2"):
        assert run_router(inst, 0, 4, algo, g).status == "unreachable"
        assert run_router(inst, 0, 2, algo, g).delivered


def test_plugin_requires_step_and_graph():
    inst = random_instance(5, seed=0)
    with pytest.raises(ValueError):
        Router(inst, "plugin")
    with pytest.raises(ValueError):
        Router(inst, "dijkstra")


@settings(max_examples=30)
@given(instances(5, 30))
def test_route_on_H_stays_in_H(inst):
    T = build_cdt(inst)
    for s, t in [(0, inst.n - 1), (inst.n // 2, 1)]:
        if s == t:
            continue
        Hs = extract_H(T, s, t)
        tr = route_on_H(inst, T, s, t)
        assert tr.delivered
        assert all((min(e), max(e)) in Hs.H.edge_set for e in tr.directed_edges())


def test_route_on_H_single_edge():
    inst = random_instance(12, seed=4)
    T = build_cdt(inst)
    a, b = T.graph.edges()[0]
    assert route_on_H(inst, T, a, b).vertices == [a, b]
