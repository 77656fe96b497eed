import json
import math
from fractions import Fraction as F

import pytest
from hypothesis import given

from visroute.bounds import LowerBoundParams, gen_lower_bound
from visroute.cones import build_constrained_theta
from visroute.geom import Point, properly_intersects, validate_general_position
from visroute.instance import (
    GeomGraph,
    InstanceError,
    InstanceParseError,
    Path,
    euclidean_length,
    graph_from_json,
    guess_format,
    load_instance,
    make_instance,
    random_instance,
    save_instance,
)
from visroute.triangulation import build_cdt, convex_hull
from visroute.visibility import build_visibility_graph

from conftest import instances

SQUARE = """# unit square, one diagonal
4 1
0 0 0
1 1 0
2 1 1
3 0 1
0 2
"""


def test_square_with_diagonal_parses():
    # the square is degenerate for six cones (horizontal pairs, cocircular)
    with pytest.raises(InstanceError):
        load_instance(SQUARE)
    inst = load_instance(SQUARE, check_general_position=False)
    assert inst.n == 4 and inst.constraints == ((0, 2),)


def test_crossing_constraints_rejected():
    with pytest.raises(InstanceError, match="constraints properly intersect") as e:
        make_instance([(0, 0), (4, 1), (1, 5), (5, 3)], [(0, 3), (1, 2)])
    assert any(v.kind == "constraints_properly_intersect" for v in e.value.violations)


def test_constraint_through_vertex_rejected():
    with pytest.raises(InstanceError):
        make_instance([(0, 0), (2, 3), (4, 6), (1, 7)], [(0, 2)], check_general_position=False)


def test_parse_errors_carry_position():
    with pytest.raises(InstanceParseError) as e:
        load_instance("2 0\n0 0 0\n1 x 1\n")
    assert e.value.line == 3
    with pytest.raises(InstanceParseError) as e:
        load_instance("2 1\n0 0 0\n1 3 1\n0 7\n")
    assert e.value.line == 4
    with pytest.raises(InstanceParseError):
        load_instance("")
    with pytest.raises(InstanceParseError) as e:
        load_instance('{"points": [', format="json")
    assert e.value.pos is not None


def test_json_refuses_floats_and_accepts_rationals():
    bad = {"points": [{"id": 0, "x": 0.5, "y": 0}, {"id": 1, "x": "1", "y": "2"}], "constraints": []}
    with pytest.raises(InstanceParseError):
        load_instance(json.dumps(bad), format="json")
    good = {"points": [{"id": 5, "x": "1/3", "y": "0.25"}, {"id": 9, "x": 2, "y": "7/2"}],
            "constraints": [[9, 5]]}
    inst = load_instance(json.dumps(good), format="json")
    assert inst.points[0].xy == (F(1, 3), F(1, 4))
    assert inst.constraints == ((0, 1),)  # ids remapped to 0..n-1


def test_decimal_literals_are_exact():
    inst = load_instance("2 0\n0 0.1 0\n1 1/3 0.7\n")
    assert inst.points[0].x == F(1, 10)
    assert inst.points[1].x == F(1, 3)


@pytest.mark.parametrize("fmt", ["text", "json"])
@given(inst=instances())
def test_round_trip_identity(fmt, inst):
    back = load_instance(save_instance(inst, fmt), fmt)
    assert back == inst
    assert save_instance(back, fmt) == save_instance(inst, fmt)


def test_one_third_survives():
    inst = make_instance([(F(1, 3), 0), (1, F(2, 3)), (F(-5, 7), 2)])
    for fmt in ("text", "json"):
        assert load_instance(save_instance(inst, fmt), fmt).points[0].x == F(1, 3)


def test_large_instance_double_save():
    inst = random_instance(1000, seed=3, density=0.0)
    data = save_instance(inst, "text")
    # full validation is cubic; the generator already enforces general position
    back = load_instance(data, validate=False)
    assert save_instance(back, "text") == data
    assert load_instance(save_instance(back, "json"), "json", validate=False) == inst


def test_lower_bound_instance_round_trips():
    inst, _, _ = gen_lower_bound(LowerBoundParams(16))
    for fmt in ("text", "json"):
        assert load_instance(save_instance(inst, fmt), fmt) == inst


def test_euclidean_length():
    o = Point(0, F(0), F(0))
    assert euclidean_length(o, Point(1, F(3), F(4))) == 5
    assert euclidean_length(o, o) == 0
    assert euclidean_length(o, Point(1, F(1), F(1))) == pytest.approx(math.sqrt(2), rel=1e-15)


@given(inst=instances(n_min=2, n_max=25))
def test_random_instances_valid(inst):
    assert validate_general_position(inst.points) == []
    c = inst.coords
    for i, (a, b) in enumerate(inst.constraints):
        for x, y in inst.constraints[i + 1:]:
            assert not properly_intersects((c[a], c[b]), (c[x], c[y]))


def test_random_instance_deterministic():
    assert random_instance(30, seed=7, density=0.5) == random_instance(30, seed=7, density=0.5)
    assert random_instance(30, seed=7) != random_instance(30, seed=8)


def test_density_bounds():
    with pytest.raises(ValueError):
        random_instance(10, density=1.5)
    with pytest.raises(ValueError):
        random_instance(1)
    assert len(random_instance(2, seed=1, density=1.0).constraints) == 1
    assert random_instance(2, seed=1).constraints == ()


@pytest.mark.parametrize("seed", range(5))
def test_full_density_is_maximal(seed):
    inst = random_instance(20, seed=seed, density=1.0)
    c = inst.coords
    h = len(convex_hull(c))
    assert len(inst.constraints) == 3 * inst.n - 3 - h
    cons = set(inst.constraints)
    for a in range(inst.n):
        for b in range(a + 1, inst.n):
            if (a, b) in cons:
                continue
            assert any(properly_intersects((c[a], c[b]), (c[x], c[y])) for x, y in cons)


@given(inst=instances(n_min=3, n_max=12))
def test_constraints_are_edges_of_visibility_and_triangulation(inst):
    for g in (build_visibility_graph(inst), build_cdt(inst).graph):
        assert set(inst.constraints) <= g.edge_set


def test_graph_invariants_and_json():
    inst = random_instance(12, seed=4, density=0.3)
    g = build_constrained_theta(inst)
    for u in range(inst.n):
        for v in g.adjacency[u]:
            assert u in g.adjacency[v]
            assert g.weight(u, v) == inst.length(u, v)
    back = graph_from_json(inst, json.loads(json.dumps(g.to_json())))
    assert back.edge_set == g.edge_set and back.kind == g.kind
    with pytest.raises(ValueError):
        GeomGraph.from_edges(inst, [(0, 0)], "theta")
    with pytest.raises(ValueError):
        GeomGraph.from_edges(inst, [(0, 1)], "nonsense")


def test_path_edges():
    assert Path((3, 1, 2), 1.0).edges == [(1, 3), (1, 2)]


def test_guess_format():
    assert guess_format("a/b.json") == "json"
    assert guess_format("a/b.txt") == "text"
