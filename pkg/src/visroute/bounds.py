"""Shortest paths, ratio measurements, the linear lower-bound family and path-length inequality checks."""
from __future__ import annotations

import heapq
import random
import statistics
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .geom import properly_intersects
from .instance import GeomGraph, Instance, Path, make_instance
from .triangulation import (
    Triangulation,
    build_H_prime,
    build_cdt,
    extract_H,
    random_flips,
)


def shortest_path(g: GeomGraph, s: int, t: int) -> Path | None:
    """Dijkstra with Euclidean weights; ``None`` when t is unreachable.

    Equal keys are broken by the smaller vertex id.
    """
    inst = g.instance
    if s == t:
        return Path((s,), 0.0)
    dist = {s: 0.0}
    prev = {}
    heap = [(0.0, s)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == t:
            break
        for v in g.adjacency[u]:
            nd = d + inst.length(u, v)
            if v not in dist or nd < dist[v] or (nd == dist[v] and u < prev.get(v, u)):
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if t not in done:
        return None
    path = [t]
    while path[-1] != s:
        path.append(prev[path[-1]])
    return Path(tuple(reversed(path)), dist[t])


def all_distances(g: GeomGraph, s: int) -> dict[int, float]:
    inst = g.instance
    dist = {s: 0.0}
    heap = [(0.0, s)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v in g.adjacency[u]:
            nd = d + inst.length(u, v)
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


# --- certified comparisons --------------------------------------------------


def _interval_length(inst: Instance, vertices, prec: int):
    iv = mpmath.iv
    iv.prec = prec
    total = iv.mpf(0)
    for a, b in zip(vertices, vertices[1:]):
        pa, pb = inst.points[a], inst.points[b]
        d2 = (pa.x - pb.x) ** 2 + (pa.y - pb.y) ** 2
        total += iv.sqrt(iv.mpf(d2.numerator) / iv.mpf(d2.denominator))
    return total


def certified_leq(inst: Instance, left, right, factor: int = 1, max_prec: int = 4096) -> bool | None:
    """Decide ``len(left) <= factor * len(right)`` for vertex sequences.

    Starts at 128 bits and doubles the precision until the intervals
    separate.  Returns ``None`` (undecided, to be flagged) if the gap stays
    below 1e-30 at every precision tried.
    """
    left, right = tuple(left), tuple(right)
    if factor == 1 and sorted(_edges(left)) == sorted(_edges(right)):
        return True
    prec = 128
    while prec <= max_prec:
        a = _interval_length(inst, left, prec)
        b = _interval_length(inst, right, prec) * factor
        if a.b <= b.a:
            return True
        if a.a > b.b:
            return False
        width = max(a.delta, b.delta)
        if width < mpmath.mpf("1e-30") and abs(a.mid - b.mid) < mpmath.mpf("1e-30"):
            return None
        prec *= 2
    return None


def _edges(vs):
    return [(min(a, b), max(a, b)) for a, b in zip(vs, vs[1:])]


# --- reports ----------------------------------------------------------------


@dataclass
class RatioReport:
    n: int
    s: int
    t: int
    pi_G: Path | None
    pi_H: Path | None
    pi_H_prime: Path | None = None
    trace_length: float | None = None
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    closed_form: float | None = None
    within_tolerance: bool | None = None

    @property
    def ratios(self) -> dict:
        out = {}
        g = self.pi_G.length if self.pi_G else None
        h = self.pi_H.length if self.pi_H else None
        hp = self.pi_H_prime.length if self.pi_H_prime else None

        def div(a, b):
            if a is None or b is None:
                return None
            return 1.0 if a == b == 0 else (a / b if b else float("inf"))

        out["H/G"] = div(h, g)
        out["H'/G"] = div(hp, g)
        out["H/H'"] = div(h, hp)
        if self.trace_length is not None:
            out["trace/G"] = div(self.trace_length, g)
        return out

    @property
    def ok(self) -> bool:
        return all(v is True for v in self.checks.values())

    def to_json(self) -> dict:
        return {
            "n": self.n, "s": self.s, "t": self.t,
            "pi_G": self.pi_G.length if self.pi_G else None,
            "pi_H": self.pi_H.length if self.pi_H else None,
            "pi_H_prime": self.pi_H_prime.length if self.pi_H_prime else None,
            "ratios": self.ratios,
            "checks": dict(self.checks),
            "closed_form": self.closed_form,
            "within_tolerance": self.within_tolerance,
            "notes": list(self.notes),
        }


# --- lower-bound family -----------------------------------------------------


@dataclass(frozen=True)
class LowerBoundParams:
    n: int
    x: Fraction = Fraction(1000)
    eps: Fraction = Fraction(1, 1000)

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.n < 8 or self.n % 4:
            raise ValueError("n must be a multiple of 4 and at least 8")
        if not 0 < self.eps < Fraction(1, 2):
            raise ValueError("eps must lie in (0, 1/2)")
        if self.x < 1:
            raise ValueError("x must be at least 1")


def lower_bound_closed_form(n: int, x) -> float:
    x = float(x)
    return (x * n / 2) / (2 * x + n / 2 - 1)


def gen_lower_bound(params: LowerBoundParams) -> tuple[Instance, int, int]:
    """Two staggered columns of constrained rows with s below and t above.

    Rows ``1..n/2-1`` each hold a horizontal-ish constraint of unit width;
    even rows are shifted right by ``1/2 - eps``.  A tiny outward bow of
    the columns and a tilt of the right endpoints (both far below ``eps``)
    put the points in general position.  Finally x is scaled by ``2x``.
    Returns the instance and the ids of s and t.
    """
    n, eps = params.n, params.eps
    k = n // 2 - 1
    mid = Fraction(k + 1, 2)
    delta = eps / (16 * n * n)
    coords = []
    rows = []
    for r in range(1, k + 1):
        off = Fraction(1, 2) - eps if r % 2 == 0 else Fraction(0)
        bulge = delta * (r - mid) ** 2 + delta * delta * r ** 3
        left = (off + bulge, Fraction(r))
        right = (off + 1 - bulge, r + eps * r / (8 * n) + delta * r * r)
        rows.append((len(coords), len(coords) + 1))
        coords.extend([left, right])
    (a1, b1), (ak, bk) = rows[0], rows[-1]
    s_xy = ((coords[a1][0] + coords[b1][0]) / 2, Fraction(0))
    t_xy = ((coords[ak][0] + coords[bk][0]) / 2, Fraction(k + 1))
    s, t = len(coords), len(coords) + 1
    coords.extend([s_xy, t_xy])
    stretch = 2 * params.x
    coords = [(px * stretch, py) for px, py in coords]
    inst = make_instance(coords, rows)
    return inst, s, t


def vertical_boundary_edges(params: LowerBoundParams) -> set[tuple[int, int]]:
    """The near-vertical edges on the left and right boundary of the construction.

    Row ``r`` (1-based) owns ids ``2r-2`` (left) and ``2r-1`` (right).  The
    left boundary links the left ends of odd rows, the right boundary the
    right ends of even rows.
    """
    k = params.n // 2 - 1
    out = set()
    for r in range(1, k - 1):
        if r % 2 == 1:
            out.add((2 * r - 2, 2 * r + 2))
        else:
            out.add((2 * r - 1, 2 * r + 3))
    return out


def verify_lower_bound(params: LowerBoundParams) -> RatioReport:
    inst, s, t = gen_lower_bound(params)
    T = build_cdt(inst)
    Hs = extract_H(T, s, t)
    pg = shortest_path(T.graph, s, t)
    ph = shortest_path(Hs.H, s, t)
    rep = RatioReport(inst.n, s, t, pg, ph)
    closed = lower_bound_closed_form(params.n, params.x)
    tol = 10 * float(params.eps) * params.n
    ratio = ph.length / pg.length
    rep.checks["st crosses every constraint"] = all(
        properly_intersects((inst.coords[s], inst.coords[t]), (inst.coords[a], inst.coords[b]))
        for a, b in inst.constraints)
    vert = vertical_boundary_edges(params)
    rep.checks["vertical boundary edges in G"] = vert <= T.graph.edge_set
    rep.checks["H avoids vertical boundary edges"] = not (vert & Hs.H.edge_set)
    rep.checks["ratio at least closed form"] = ratio >= closed * (1 - tol)
    rep.closed_form = closed
    rep.within_tolerance = abs(ratio - closed) <= tol * closed
    rep.notes.append(f"closed form {closed:.6f}, measured {ratio:.6f}, relative tolerance {tol:g} "
                     "(eps-dependent terms ignored by the closed form)")
    return rep


def verify_every_triangulation_bound(params: LowerBoundParams, trials: int = 20, seed: int = 0,
                                     flips_per_trial: int = 10) -> dict:
    """Random walk over constrained triangulations of the lower-bound instance."""
    inst, s, t = gen_lower_bound(params)
    rng = random.Random(seed)
    T = build_cdt(inst)
    bnd = vertical_boundary_edges(params)
    closed = lower_bound_closed_form(params.n, params.x)
    tol = 10 * float(params.eps) * params.n
    rows = []
    for k in range(trials + 1):
        if k:
            T = random_flips(T, flips_per_trial, rng)
        Hs = extract_H(T, s, t)
        pg = shortest_path(T.graph, s, t)
        ph = shortest_path(Hs.H, s, t)
        ratio = ph.length / pg.length
        rows.append({
            "trial": k,
            "boundary_edges_present": bnd <= T.graph.edge_set,
            "H_has_boundary_edge": bool(bnd & Hs.H.edge_set),
            "ratio": ratio,
            "ratio_ok": ratio >= closed * (1 - tol),
        })
    ok = all(r["boundary_edges_present"] and not r["H_has_boundary_edge"] and r["ratio_ok"] for r in rows)
    return {"ok": ok, "closed_form": closed, "trials": rows}


# --- path-length inequalities ----------------------------------------------


def _reports(inst: Instance, T: Triangulation, s: int, t: int) -> RatioReport:
    Hs = extract_H(T, s, t)
    Hp = build_H_prime(inst, Hs)
    pg = shortest_path(T.graph, s, t)
    ph = shortest_path(Hs.H, s, t)
    php = shortest_path(Hp.H_prime, s, t)
    return RatioReport(inst.n, s, t, pg, ph, php)


def verify_augmented_bound(inst: Instance, T: Triangulation, s: int, t: int, report: RatioReport | None = None):
    """Check |pi_H'(s,t)| <= |pi_G(s,t)|."""
    rep = report or _reports(inst, T, s, t)
    if s == t:
        rep.checks["H' <= G"] = True
        return True, rep
    ok = certified_leq(inst, rep.pi_H_prime.vertices, rep.pi_G.vertices)
    rep.checks["H' <= G"] = ok
    return ok is True, rep


def verify_detour_bound(inst: Instance, T: Triangulation, s: int, t: int, report: RatioReport | None = None):
    """Check |pi_H| <= (n-1)|pi_H'| and |pi_H| <= (n-1)|pi_G| (plus |pi_G| <= |pi_H|)."""
    rep = report or _reports(inst, T, s, t)
    if s == t:
        rep.checks.update({"H <= (n-1)H'": True, "H <= (n-1)G": True, "G <= H": True})
        return True, rep
    k = inst.n - 1
    rep.checks["H <= (n-1)H'"] = certified_leq(inst, rep.pi_H.vertices, rep.pi_H_prime.vertices, k)
    rep.checks["H <= (n-1)G"] = certified_leq(inst, rep.pi_H.vertices, rep.pi_G.vertices, k)
    rep.checks["G <= H"] = certified_leq(inst, rep.pi_G.vertices, rep.pi_H.vertices)
    ok = all(rep.checks[c] is True for c in ("H <= (n-1)H'", "H <= (n-1)G", "G <= H"))
    return ok, rep


def verify_path_bounds(inst: Instance, T: Triangulation, s: int, t: int) -> RatioReport:
    rep = _reports(inst, T, s, t)
    verify_augmented_bound(inst, T, s, t, rep)
    verify_detour_bound(inst, T, s, t, rep)
    return rep


# --- routing ratio ----------------------------------------------------------


def _percentile(sorted_vals, q):
    if not sorted_vals:
        return None
    k = (len(sorted_vals) - 1) * q
    lo, hi = int(k), min(int(k) + 1, len(sorted_vals) - 1)
    return sorted_vals[lo] + (sorted_vals[hi] - sorted_vals[lo]) * (k - lo)


def measure_routing_ratio(inst: Instance, graph: GeomGraph, algo: str, pairs="all", seed: int = 0,
                          route_graph: GeomGraph | None = None) -> dict:
    """Trace length over shortest-path length in ``graph`` for many pairs.

    ``graph`` is the reference graph (Vis for face routing on the visibility
    graph, the triangulation for routing on H).  ``route_graph`` is the
    graph the router reads, defaulting to the router's own choice.
    """
    from .router import Router, StepBudgetExceeded

    n = inst.n
    if pairs == "all":
        todo = [(s, t) for s in range(n) for t in range(n) if s != t]
    elif isinstance(pairs, int):
        rng = random.Random(seed)
        todo = [tuple(rng.sample(range(n), 2)) for _ in range(pairs)]
    else:
        todo = list(pairs)
    router = Router(inst, algo, route_graph)
    ratios, rows = [], []
    failures = 0
    dist_cache: dict[int, dict] = {}
    for s, t in todo:
        try:
            tr = router.route(s, t)
        except StepBudgetExceeded as e:
            tr = e.trace
        if s not in dist_cache:
            dist_cache[s] = all_distances(graph, s)
        best = dist_cache[s].get(t)
        r = tr.total_length / best if (tr.delivered and best) else None
        if not tr.delivered:
            failures += 1
        else:
            ratios.append(r)
        rows.append({"s": s, "t": t, "delivered": tr.delivered, "status": tr.status,
                     "trace_len": tr.total_length, "pi": best, "ratio": r,
                     "edge_traversals": len(tr.steps)})
    srt = sorted(ratios)
    return {
        "algo": algo,
        "pairs": len(todo),
        "nondelivered": failures,
        "max": srt[-1] if srt else None,
        "mean": statistics.fmean(srt) if srt else None,
        "p50": _percentile(srt, 0.5),
        "p90": _percentile(srt, 0.9),
        "p99": _percentile(srt, 0.99),
        "rows": rows,
    }


def spanning_ratio(sub: GeomGraph, sup: GeomGraph) -> float:
    """Max over connected pairs of dist_sub / dist_sup."""
    worst = 1.0
    for s in range(sub.instance.n):
        ds = all_distances(sub, s)
        dg = all_distances(sup, s)
        for t, d in dg.items():
            if t == s or d == 0:
                continue
            if t not in ds:
                return float("inf")
            worst = max(worst, ds[t] / d)
    return worst
