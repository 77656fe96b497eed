import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import instances
from visroute.bounds import (
    LowerBoundParams,
    all_distances,
    certified_leq,
    gen_lower_bound,
    lower_bound_closed_form,
    measure_routing_ratio,
    shortest_path,
    spanning_ratio,
    verify_every_triangulation_bound,
    verify_augmented_bound,
    verify_detour_bound,
    verify_path_bounds,
    verify_lower_bound,
    vertical_boundary_edges,
)
from visroute.cones import build_constrained_half_theta6
from visroute.geom import properly_intersects
from visroute.instance import GeomGraph, instance_violations, make_instance, random_instance
from visroute.triangulation import build_cdt, convex_hull, extract_H, random_flips
from visroute.visibility import build_visibility_graph


def brute_shortest(g, s, t):
    """Minimum over every simple path, by exhaustive DFS."""
    best = math.inf

    def walk(u, seen, d):
        nonlocal best
        if u == t:
            best = min(best, d)
            return
        for v in g.adjacency[u]:
            if v not in seen:
                walk(v, seen | {v}, d + g.instance.length(u, v))

    walk(s, {s}, 0.0)
    return best


def path_length(inst, vs):
    return sum(inst.length(a, b) for a, b in zip(vs, vs[1:]))


# --- shortest paths ---------------------------------------------------------


def test_shortest_path_same_vertex():
    inst = random_instance(5, seed=0)
    p = shortest_path(build_visibility_graph(inst), 2, 2)
    assert p.vertices == (2,) and p.length == 0


def test_complete_graph_gives_direct_edge():
    inst = random_instance(9, seed=1)
    g = build_visibility_graph(inst)
    assert len(g.edge_set) == 9 * 8 // 2
    for t in range(1, 9):
        assert shortest_path(g, 0, t).vertices == (0, t)


def test_grid_matches_exhaustive_paths():
    # 3x3 grid, slightly sheared for general position, grid neighbors only
    coords = [(Fraction(i) + Fraction(j, 7), Fraction(j) + Fraction(i * i, 11))
              for j in range(3) for i in range(3)]
    inst = make_instance(coords, check_general_position=False)
    edges = [(3 * j + i, 3 * j + i + 1) for j in range(3) for i in range(2)]
    edges += [(3 * j + i, 3 * j + i + 3) for j in range(2) for i in range(3)]
    g = GeomGraph.from_edges(inst, edges, "triangulation")
    for s in range(9):
        for t in range(9):
            assert shortest_path(g, s, t).length == pytest.approx(brute_shortest(g, s, t), rel=1e-12)


@settings(max_examples=25)
@given(instances(4, 9, densities=(0.3, 0.7)))
def test_dijkstra_matches_exhaustive(inst):
    for g in (build_cdt(inst).graph, build_constrained_half_theta6(inst)):
        for s in range(inst.n):
            d = all_distances(g, s)
            for t in range(inst.n):
                p = shortest_path(g, s, t)
                exp = brute_shortest(g, s, t)
                assert p.length == pytest.approx(exp, rel=1e-12)
                assert path_length(inst, p.vertices) == pytest.approx(p.length, rel=1e-12)
                assert d[t] == pytest.approx(exp, rel=1e-12)


def test_unreachable_is_none():
    inst = make_instance([(0, 0), (1, 3), (5, 1)])
    g = GeomGraph.from_edges(inst, [(0, 1)], "visibility")
    assert shortest_path(g, 0, 2) is None
    assert 2 not in all_distances(g, 0)


@settings(max_examples=20)
@given(instances(5, 20), st.data())
def test_distances_obey_triangle_inequality(inst, data):
    g = build_cdt(inst).graph
    a, b, c = (data.draw(st.integers(0, inst.n - 1)) for _ in range(3))
    da, db = all_distances(g, a), all_distances(g, b)
    assert da[c] <= da[b] + db[c] + 1e-9


# --- certified comparisons --------------------------------------------------


def test_certified_leq_decides_and_flags_ties():
    inst = make_instance([(0, 0), (3, 4), (6, 0), (3, 1)], validate=False)
    assert certified_leq(inst, [0, 2], [0, 1, 2]) is True
    assert certified_leq(inst, [0, 1, 2], [0, 2]) is False
    assert certified_leq(inst, [0, 1, 2], [0, 2], factor=2) is True
    # 0-1 and 1-2 both have length exactly 5, so the interval bounds touch
    assert certified_leq(inst, [0, 1], [1, 2]) is True
    # equal irrational lengths on different edges can never be separated
    tie = make_instance([(0, 0), (1, 1), (5, 0), (6, 1)], validate=False)
    assert certified_leq(tie, [0, 1], [2, 3], max_prec=512) is None
    assert certified_leq(inst, [0, 1, 2], [2, 1, 0]) is True


def test_certified_leq_resolves_tiny_gaps():
    # sqrt(10^12 + 1) - 10^6 is about 5e-7, far beyond float noise at this scale
    inst = make_instance([(0, 0), (10 ** 6, 1), (10 ** 6, -10 ** 6 + 1)], check_general_position=False)
    assert certified_leq(inst, [0, 1], [0, 1, 2]) is True
    assert certified_leq(inst, [0, 1, 2], [0, 1]) is False


# --- lower bound -------------------------------------------------------------


@pytest.mark.parametrize("bad", [dict(n=6), dict(n=10), dict(n=4), dict(n=8, eps=Fraction(1, 2)),
                                 dict(n=8, eps=0), dict(n=8, x=Fraction(1, 2))])
def test_lower_bound_params_validated(bad):
    with pytest.raises(ValueError):
        LowerBoundParams(**bad)


def test_lower_bound_n8_layout():
    params = LowerBoundParams(8, 100, Fraction(1, 1000))
    inst, s, t = gen_lower_bound(params)
    assert inst.n == 8 and len(inst.constraints) == 3
    assert (s, t) == (6, 7)
    cs = inst.coords
    for a, b in inst.constraints:
        assert properly_intersects((cs[s], cs[t]), (cs[a], cs[b]))
    assert instance_violations(inst) == []
    assert all(isinstance(c, Fraction) for p in inst.points for c in (p.x, p.y))


def test_lower_bound_n8_x100_ratio():
    rep = verify_lower_bound(LowerBoundParams(8, 100, Fraction(1, 1000)))
    assert rep.ok
    assert rep.ratios["H/G"] == pytest.approx(400 / 203, rel=10 * 1e-3 * 8)


@pytest.mark.parametrize("n", [8, 16, 32])
def test_lower_bound_matches_closed_form(n):
    rep = verify_lower_bound(LowerBoundParams(n, 1000, Fraction(1, 1000)))
    closed = lower_bound_closed_form(n, 1000)
    assert rep.ok and rep.within_tolerance
    assert abs(rep.ratios["H/G"] / closed - 1) <= 10 * 1e-3 * n
    assert rep.ratios["H/G"] <= n - 1


@pytest.mark.parametrize("n", [8, 16])
def test_lower_bound_grows_with_x(n):
    ratios = [verify_lower_bound(LowerBoundParams(n, x)).ratios["H/G"] for x in (10, 100, 1000, 10 ** 4)]
    assert ratios == sorted(ratios) and ratios[0] < ratios[-1]
    assert ratios[-1] < n / 4 * (1 + 10 * 1e-3 * n)


def test_lower_bound_x1_still_bounded_below():
    for n in (8, 16):
        rep = verify_lower_bound(LowerBoundParams(n, 1))
        assert rep.checks["ratio at least closed form"]


@pytest.mark.parametrize("eps", [Fraction(1, 10), Fraction(1, 10 ** 4), Fraction(1, 10 ** 7)])
def test_lower_bound_general_position_for_small_eps(eps):
    inst, _, _ = gen_lower_bound(LowerBoundParams(16, 1000, eps))
    assert instance_violations(inst) == []


@pytest.mark.parametrize("n", [8, 16, 32])
def test_every_triangulation_avoids_boundary(n):
    params = LowerBoundParams(n)
    res = verify_every_triangulation_bound(params, trials=15, seed=n)
    assert res["ok"]
    assert not any(r["H_has_boundary_edge"] for r in res["trials"])


def test_hull_edges_survive_flips():
    params = LowerBoundParams(16)
    inst, s, t = gen_lower_bound(params)
    hull = convex_hull(inst.coords)
    hull_edges = {(min(a, b), max(a, b)) for a, b in zip(hull, hull[1:] + hull[:1])}
    T = build_cdt(inst)
    rng = random.Random(0)
    for _ in range(10):
        T = random_flips(T, 20, rng)
        assert hull_edges <= T.graph.edge_set
        assert vertical_boundary_edges(params) <= T.graph.edge_set


# --- path-length inequalities ----------------------------------------------


@settings(max_examples=40)
@given(instances(5, 30), st.data())
def test_path_inequalities_hold(inst, data):
    T = build_cdt(inst)
    s = data.draw(st.integers(0, inst.n - 1))
    t = data.draw(st.integers(0, inst.n - 1))
    ok5, rep = verify_augmented_bound(inst, T, s, t)
    ok6, _ = verify_detour_bound(inst, T, s, t, rep)
    assert ok5 and ok6, rep.checks
    if s != t:
        assert rep.pi_H_prime.length <= rep.pi_G.length * (1 + 1e-12)
        assert rep.pi_G.length <= rep.pi_H.length * (1 + 1e-12)


def test_path_bounds_on_flipped_triangulations():
    rng = random.Random(7)
    for seed in range(15):
        inst = random_instance(20, seed=seed, density=0.3)
        T = random_flips(build_cdt(inst), 30, rng)
        s, t = rng.sample(range(inst.n), 2)
        assert verify_path_bounds(inst, T, s, t).ok


def test_path_bounds_when_st_is_an_edge():
    inst = random_instance(15, seed=2)
    T = build_cdt(inst)
    a, b = T.graph.edges()[3]
    rep = verify_path_bounds(inst, T, a, b)
    assert rep.ok
    assert rep.pi_G.vertices == rep.pi_H.vertices == (a, b)
    assert rep.ratios["H/G"] == 1


def test_path_bounds_on_lower_bound_instance():
    params = LowerBoundParams(16)
    inst, s, t = gen_lower_bound(params)
    rep = verify_path_bounds(inst, build_cdt(inst), s, t)
    assert rep.ok
    assert rep.ratios["H/G"] <= inst.n - 1


def test_report_json_roundtrip_shape():
    inst = random_instance(12, seed=9, density=0.3)
    rep = verify_path_bounds(inst, build_cdt(inst), 0, 11)
    js = rep.to_json()
    assert js["s"] == 0 and js["t"] == 11
    assert set(js["ratios"]) >= {"H/G", "H'/G", "H/H'"}
    assert all(v >= 0 for v in js["ratios"].values() if v is not None)


# --- measurements -----------------------------------------------------------


def test_measure_single_edge_ratio_one():
    inst = make_instance([(0, 0), (1, 3)])
    m = measure_routing_ratio(inst, build_visibility_graph(inst), "face1")
    assert m["pairs"] == 2 and m["nondelivered"] == 0 and m["max"] == 1


def test_measure_face_routing_on_vis():
    inst = random_instance(15, seed=4, density=0.3)
    vis = build_visibility_graph(inst)
    m = measure_routing_ratio(inst, vis, "face1", pairs=40, seed=1)
    assert m["pairs"] == 40 and m["nondelivered"] == 0
    assert 1 <= m["p50"] <= m["p90"] <= m["p99"] <= m["max"]
    assert m["mean"] <= m["max"]


def test_measure_route_on_H_against_bound():
    rng = random.Random(3)
    for seed in range(5):
        inst = random_instance(14, seed=seed, density=0.3)
        T = build_cdt(inst)
        pairs = [tuple(rng.sample(range(inst.n), 2)) for _ in range(10)]
        m = measure_routing_ratio(inst, T.graph, "face1_on_H", pairs=pairs, route_graph=T.graph)
        assert m["nondelivered"] == 0
        for row in m["rows"]:
            H = extract_H(T, row["s"], row["t"]).H
            assert row["trace_len"] >= shortest_path(H, row["s"], row["t"]).length - 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_half_theta_spans_vis_within_two(seed):
    inst = random_instance(20, seed=seed, density=(0.0, 0.3, 0.7)[seed % 3])
    vis = build_visibility_graph(inst)
    r = spanning_ratio(build_constrained_half_theta6(inst, vis), vis)
    assert 1 <= r <= 2 + 1e-9


def test_spanning_ratio_of_graph_with_itself_is_one():
    inst = random_instance(10, seed=0)
    g = build_cdt(inst).graph
    assert spanning_ratio(g, g) == 1
