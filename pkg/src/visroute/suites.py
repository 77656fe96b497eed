"""Seeded verification suites shared by the CLI and the acceptance tests.

Each suite maps a list of integer case seeds to one result dict per case
with at least an ``ok`` key.  Cases are independent, so ``jobs > 1`` fans
them out over processes; results always come back in seed order.
"""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .bounds import (
    LowerBoundParams,
    lower_bound_closed_form,
    spanning_ratio,
    verify_augmented_bound,
    verify_detour_bound,
    verify_path_bounds,
    verify_lower_bound,
)
from .cones import build_constrained_half_theta6
from .geom import properly_intersects
from .instance import Instance, random_instance
from .router import Router, local_half_theta6_edges, route_on_H
from .triangulation import build_cdt, extract_H, random_flips
from .visibility import build_visibility_graph, neighborhood

DENSITIES = (0.0, 0.3, 0.7)


def case_instance(seed: int, n_min: int = 10, n_max: int = 40) -> Instance:
    rng = random.Random(seed)
    n = rng.randint(n_min, n_max)
    return random_instance(n, seed=seed, density=DENSITIES[seed % len(DENSITIES)])


def crossing_pairs(graph) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    c = graph.instance.coords
    edges = graph.edges()
    out = []
    for i, (a, b) in enumerate(edges):
        for d, e in edges[i + 1:]:
            if properly_intersects((c[a], c[b]), (c[d], c[e])):
                out.append(((a, b), (d, e)))
    return out


def local_ident_case(seed: int, n_min: int = 10, n_max: int = 40) -> dict:
    inst = case_instance(seed, n_min, n_max)
    vis = build_visibility_graph(inst)
    g = build_constrained_half_theta6(inst, vis)
    bad = [u for u in range(inst.n)
           if set(local_half_theta6_edges(neighborhood(vis, u))) != set(g.adjacency[u])]
    return {"seed": seed, "n": inst.n, "mismatched_vertices": bad, "ok": not bad}


def planarity_case(seed: int, n_min: int = 10, n_max: int = 40) -> dict:
    inst = case_instance(seed, n_min, n_max)
    g = build_constrained_half_theta6(inst)
    cr = crossing_pairs(g)
    # reported only: constraints are not required to be half-Theta6 edges
    missing = [list(c) for c in inst.constraints if c not in g.edge_set]
    return {"seed": seed, "n": inst.n, "crossings": [list(map(list, p)) for p in cr],
            "constraints_not_edges": missing, "ok": not cr}


def spanning_case(seed: int, n_min: int = 10, n_max: int = 40, bound: float = 2 + 1e-9) -> dict:
    inst = case_instance(seed, n_min, n_max)
    vis = build_visibility_graph(inst)
    r = spanning_ratio(build_constrained_half_theta6(inst, vis), vis)
    return {"seed": seed, "n": inst.n, "ratio": r, "ok": r <= bound}


def delivery_case(seed: int, n_min: int = 10, n_max: int = 30, variants=("face1", "face2")) -> dict:
    """Every ordered pair, every variant; traversed edges must be half-Theta6 edges."""
    inst = case_instance(seed, n_min, n_max)
    vis = build_visibility_graph(inst)
    allowed = build_constrained_half_theta6(inst, vis).edge_set
    failures = []
    pairs = 0
    for algo in variants:
        router = Router(inst, algo, vis)
        for s in range(inst.n):
            for t in range(inst.n):
                if s == t:
                    continue
                pairs += 1
                tr = router.route(s, t)
                stray = [e for e in tr.directed_edges() if (min(e), max(e)) not in allowed]
                if not tr.delivered or stray:
                    failures.append({"algo": algo, "s": s, "t": t, "status": tr.status,
                                     "stray_edges": stray[:5]})
    return {"seed": seed, "n": inst.n, "routes": pairs, "failures": failures, "ok": not failures}


def _triangulation_case(seed: int, n_max: int = 40):
    rng = random.Random(seed)
    inst = case_instance(seed, 5, n_max)
    T = build_cdt(inst)
    s, t = rng.sample(range(inst.n), 2)
    return inst, T, s, t


def path_bound_case(seed: int, n_max: int = 40, which: str = "both") -> dict:
    inst, T, s, t = _triangulation_case(seed, n_max)
    if which == "augmented":
        ok, rep = verify_augmented_bound(inst, T, s, t)
    elif which == "detour":
        ok, rep = verify_detour_bound(inst, T, s, t)
    else:
        rep = verify_path_bounds(inst, T, s, t)
        ok = rep.ok
    undecided = [k for k, v in rep.checks.items() if v is None]
    return {"seed": seed, **rep.to_json(), "undecided": undecided, "ok": ok}


def augmented_bound_case(seed: int, n_max: int = 40) -> dict:
    return path_bound_case(seed, n_max, "augmented")


def detour_bound_case(seed: int, n_max: int = 40) -> dict:
    return path_bound_case(seed, n_max, "detour")


def h_only_case(seed: int, n_max: int = 40, variant: str = "face1") -> dict:
    """route_on_H delivers and every traversed edge lies on a triangle meeting st."""
    inst, T, s, t = _triangulation_case(seed, n_max)
    Hs = extract_H(T, s, t)
    tr = route_on_H(inst, T, s, t, variant)
    stray = [e for e in tr.directed_edges() if (min(e), max(e)) not in Hs.H.edge_set]
    return {"seed": seed, "n": inst.n, "s": s, "t": t, "delivered": tr.delivered,
            "stray_edges": stray, "ok": tr.delivered and not stray}


def flipped_path_bound_case(seed: int, n_max: int = 40, flips: int = 40) -> dict:
    """Same inequalities on a non-Delaunay constrained triangulation."""
    inst, T, s, t = _triangulation_case(seed, n_max)
    T = random_flips(T, flips, random.Random(seed))
    rep = verify_path_bounds(inst, T, s, t)
    return {"seed": seed, **rep.to_json(), "ok": rep.ok}


def lowerbound_case(n: int, x=1000, eps=Fraction(1, 1000)) -> dict:
    params = LowerBoundParams(n, Fraction(x), Fraction(eps))
    rep = verify_lower_bound(params)
    out = rep.to_json()
    out.update({"x": str(params.x), "eps": str(params.eps),
                "ratio": rep.ratios["H/G"], "closed_form": lower_bound_closed_form(n, params.x),
                "ok": rep.ok and bool(rep.within_tolerance)})
    return out


SUITES = {
    "local-ident": local_ident_case,
    "planarity": planarity_case,
    "spanning": spanning_case,
    "delivery": delivery_case,
    "lemma5": augmented_bound_case,
    "lemma6": detour_bound_case,
    "h-only": h_only_case,
}


def _call(args):
    fn, seed, kw = args
    return fn(seed, **kw)


def run_suite(name: str, seeds, jobs: int = 1, **kw) -> list[dict]:
    fn = SUITES[name]
    seeds = list(seeds)
    if jobs <= 1:
        return [fn(s, **kw) for s in seeds]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_call, [(fn, s, kw) for s in seeds]))
