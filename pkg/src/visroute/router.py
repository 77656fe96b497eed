"""1-local routing: local half-Theta6 identification, face routing, Theta-routing.

A step function has the signature ``step(s, u, t, nbhd, memory)`` where
``s`` and ``t`` are ``(id, xy)`` pairs, ``u`` is the current vertex id,
``nbhd`` the :class:`Neighborhood` packet stored at ``u`` and ``memory``
the tuple of words carried by the message.  It returns the next vertex and
the new memory, or raises :class:`Stuck` / :class:`Unreachable`.  The
engine in :func:`run_router` builds the packets, so a step function never
sees anything beyond them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .cones import POSITIVE_CONES, bisector_projection, build_constrained_theta, cone_of, decompose, subcone_of
from .geom import orient, open_segment_meets_triangle
from .instance import GeomGraph, Instance
from .visibility import Neighborhood, build_visibility_graph, neighborhood

MAX_WORDS = 4
TOUR, RETURN = 1, 2

ALGOS = ("theta", "face1", "face2", "face1_on_H", "face2_on_H", "plugin")


class RoutingError(RuntimeError):
    pass


class Stuck(RoutingError):
    """Theta-routing found no edge in the cone containing the target."""


class Unreachable(RoutingError):
    """A full face tour made no progress: s and t are disconnected."""


class ProtocolError(RoutingError):
    """Inconsistent memory or an illegal move."""


class MalformedNeighborhood(ValueError):
    pass


class StepBudgetExceeded(RoutingError):
    def __init__(self, trace: "RouteTrace"):
        super().__init__(f"step budget exceeded after {len(trace.steps)} steps")
        self.trace = trace


# --- local identification of half-Theta6 edges ------------------------------


def _crosses(p, q, a, b) -> bool:
    o1, o2 = orient(p, q, a), orient(p, q, b)
    if o1 == 0 or o2 == 0 or o1 == o2:
        return False
    o3, o4 = orient(a, b, p), orient(a, b, q)
    return o3 != 0 and o4 != 0 and o3 != o4


_local_cache: dict[int, tuple[Neighborhood, frozenset]] = {}


def local_half_theta6_edges(nbhd: Neighborhood) -> frozenset[int]:
    """Neighbors ``w`` of ``u`` such that ``uw`` is a constrained half-Theta6 edge.

    ``nbhd`` must be the visibility neighborhood of ``u`` with the
    constraints incident to ``u``.
    """
    hit = _local_cache.get(id(nbhd))
    if hit is not None and hit[0] is nbhd:
        return hit[1]
    res = _local_half_theta6_edges(nbhd)
    if len(_local_cache) > 50000:
        _local_cache.clear()
    _local_cache[id(nbhd)] = (nbhd, res)
    return res


def _local_half_theta6_edges(nbhd: Neighborhood) -> frozenset[int]:
    u = nbhd.u
    xy = nbhd.coords
    nb = set(nbhd.neighbors)
    if u in nb or set(xy) != nb | {u}:
        raise MalformedNeighborhood(f"neighborhood of {u} is inconsistent")
    partners = []
    for a, b in nbhd.constraints:
        if u not in (a, b):
            raise MalformedNeighborhood(f"constraint ({a}, {b}) is not incident to {u}")
        w = b if a == u else a
        if w not in nb:
            raise MalformedNeighborhood(f"constraint partner {w} of {u} is not a neighbor")
        partners.append(w)
    pu = xy[u]
    cone = {w: cone_of(pu, xy[w]) for w in nbhd.neighbors}
    out = set()

    # edges u adds in its own positive subcones
    dec = decompose(u, pu, [(w, xy[w]) for w in partners])
    best = {}
    for w in nbhd.neighbors:
        i = cone[w]
        if i not in POSITIVE_CONES:
            continue
        key = bisector_projection(pu, i, xy[w])
        for ref in subcone_of(dec, w, xy[w], i):
            slot = (ref.cone_index, ref.subcone_index)
            if slot not in best or key < best[slot][0]:
                best[slot] = (key, w)
    out.update(w for _, w in best.values())

    # edges added by a neighbor w that has u in one of its positive cones
    cons_xy = [(xy[a], xy[b]) for a, b in nbhd.constraints]
    for w in nbhd.neighbors:
        if cone[w] in POSITIVE_CONES:
            continue
        pw = xy[w]
        i = cone_of(pw, pu)
        mine = bisector_projection(pw, i, pu)
        # a constraint uw puts u on a ray of w, hence in the closed subcones on both sides
        sides = (-1, 1) if w in partners else (None,)
        for side in sides:
            closest = True
            for x in nbhd.neighbors:
                if x == w:
                    continue
                px = xy[x]
                if cone_of(pw, px) != i:
                    continue
                if side is not None and orient(pw, pu, px) != side:
                    continue
                if any(_crosses(pw, px, a, b) for a, b in cons_xy):
                    continue
                if bisector_projection(pw, i, px) < mine:
                    closest = False
                    break
            if closest:
                out.add(w)
                break
    return frozenset(out)


def local_H_edges(nbhd: Neighborhood, s_xy, t_xy) -> frozenset[int]:
    """Neighbors ``w`` of ``u`` in a triangulation such that ``uw`` lies on a triangle met by st.

    Consecutive neighbors around ``u`` spanning an angle below pi bound an
    incident triangle; the wider gap (if any) is the outer face.
    """
    from .triangulation import angular_order

    u = nbhd.u
    xy = nbhd.coords
    order = angular_order(u, nbhd.neighbors, xy)
    out = set()
    k = len(order)
    if k < 2:
        return frozenset()
    for j in range(k):
        a, b = order[j], order[(j + 1) % k]
        if orient(xy[u], xy[a], xy[b]) <= 0:
            continue
        if open_segment_meets_triangle(xy[u], xy[a], xy[b], s_xy, t_xy):
            out.update((a, b))
    return frozenset(out)


# --- face routing -----------------------------------------------------------


def _ccw_cmp(r, a, b) -> int:
    """Compare directions a, b by counterclockwise angle from r in [0, 2pi)."""

    def half(d):
        cr = r[0] * d[1] - r[1] * d[0]
        dt = r[0] * d[0] + r[1] * d[1]
        return 0 if (cr > 0 or (cr == 0 and dt > 0)) else 1

    ha, hb = half(a), half(b)
    if ha != hb:
        return ha - hb
    cr = a[0] * b[1] - a[1] * b[0]
    return -1 if cr > 0 else (1 if cr < 0 else 0)


def next_clockwise(center, ref, candidates, xy):
    """The candidate with the smallest positive clockwise angle from direction ``ref``.

    Candidates pointing exactly along ``ref`` are only returned when nothing
    else is available.
    """
    cx, cy = center
    best = None
    fallback = None
    for v in candidates:
        d = (xy[v][0] - cx, xy[v][1] - cy)
        cr = ref[0] * d[1] - ref[1] * d[0]
        if cr == 0 and ref[0] * d[0] + ref[1] * d[1] > 0:
            fallback = v
            continue
        if best is None or _ccw_cmp(ref, d, best[1]) > 0:
            best = (v, d)
    if best is not None:
        return best[0]
    return fallback


def _lam(p, s, t):
    """Position of p along st, scaled by |st|^2."""
    return (p[0] - s[0]) * (t[0] - s[0]) + (p[1] - s[1]) * (t[1] - s[1])


def _crossing(a, b, s, t):
    """Crossing of edge ab with segment st (transversal, interior to ab)."""
    o1 = (t[0] - s[0]) * (a[1] - s[1]) - (t[1] - s[1]) * (a[0] - s[0])
    o2 = (t[0] - s[0]) * (b[1] - s[1]) - (t[1] - s[1]) * (b[0] - s[0])
    if o1 == 0 or o2 == 0 or (o1 > 0) == (o2 > 0):
        return None
    if orient(a, b, s) == orient(a, b, t):
        return None
    mu = Fraction(o1, o1 - o2)
    return (a[0] + (b[0] - a[0]) * mu, a[1] + (b[1] - a[1]) * mu)


def _strictly_inside(a, b, p) -> bool:
    if orient(a, b, p) != 0 or p == a or p == b:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def _first_out_of_vertex(u, pu, pt, edges, xy):
    return next_clockwise(pu, (pt[0] - pu[0], pt[1] - pu[1]), edges, xy)


def _is_face_start(u, w, anchor, t_xy, edges, xy) -> bool:
    """Is u->w the first half-edge of the face tour that began at ``anchor``?"""
    pu = xy[u]
    if tuple(anchor) == tuple(pu):
        return w == _first_out_of_vertex(u, pu, t_xy, edges, xy)
    return _strictly_inside(pu, xy[w], anchor) and orient(pu, xy[w], t_xy) > 0


def _face_step(s, u, t, nbhd, memory, edges, variant):
    xy = dict(nbhd.coords)
    sid, s_xy = s
    tid, t_xy = t
    xy[tid] = t_xy
    pu = xy[u]
    if tid in edges:
        return tid, memory
    if not edges:
        raise Unreachable(f"vertex {u} has no usable edge")
    if not memory:
        if u != sid:
            raise ProtocolError("empty memory away from the source")
        w = _first_out_of_vertex(u, pu, t_xy, edges, xy)
        return w, (u, TOUR, tuple(pu), None)
    try:
        prev, phase, anchor, best = memory
    except ValueError:
        raise ProtocolError(f"malformed memory {memory!r}") from None
    if prev not in edges:
        raise ProtocolError(f"previous vertex {prev} is not a usable neighbor of {u}")
    if orient(s_xy, t_xy, anchor) != 0:
        raise ProtocolError("anchor is not on segment st")
    lam_anchor = _lam(anchor, s_xy, t_xy)

    if variant == "face2":
        ref = prev
        for _ in range(len(edges) + 1):
            w = next_clockwise(pu, (xy[ref][0] - pu[0], xy[ref][1] - pu[1]), edges, xy)
            if _is_face_start(u, w, anchor, t_xy, edges, xy) and ref == prev:
                raise Unreachable("face tour completed without progress")
            p = _crossing(pu, xy[w], s_xy, t_xy)
            if p is not None and _lam(p, s_xy, t_xy) > lam_anchor:
                anchor, lam_anchor = p, _lam(p, s_xy, t_xy)
                if orient(pu, xy[w], t_xy) < 0:
                    ref = w  # switch to the face across uw
                    continue
            return w, (u, TOUR, anchor, None)
        raise ProtocolError("face switching did not settle")

    # FACE-1: tour the whole face, remember the crossing nearest t, go back there
    w = next_clockwise(pu, (xy[prev][0] - pu[0], xy[prev][1] - pu[1]), edges, xy)
    if phase == TOUR:
        if _is_face_start(u, w, anchor, t_xy, edges, xy):
            if best is None:
                raise Unreachable("face tour completed without crossing st")
            phase = RETURN
        else:
            best = _better(best, pu, xy[w], s_xy, t_xy, lam_anchor)
            return w, (u, TOUR, anchor, best)
    if phase != RETURN:
        raise ProtocolError(f"unknown phase {phase!r}")
    if _strictly_inside(pu, xy[w], best) and orient(pu, xy[w], t_xy) < 0:
        anchor, lam_anchor = best, _lam(best, s_xy, t_xy)
        w2 = next_clockwise(pu, (xy[w][0] - pu[0], xy[w][1] - pu[1]), edges, xy)
        best = _better(None, pu, xy[w2], s_xy, t_xy, lam_anchor)
        return w2, (u, TOUR, anchor, best)
    return w, (u, RETURN, anchor, best)


def _better(best, a, b, s_xy, t_xy, lam_anchor):
    p = _crossing(a, b, s_xy, t_xy)
    if p is None:
        return best
    lp = _lam(p, s_xy, t_xy)
    if lp <= lam_anchor:
        return best
    if best is None or lp > _lam(best, s_xy, t_xy):
        return p
    return best


def step_face_routing(s, u, t, nbhd, memory, variant="face1"):
    """One FACE-1/FACE-2 step on the locally identified half-Theta6 graph."""
    return _face_step(s, u, t, nbhd, memory, local_half_theta6_edges(nbhd), variant)


def step_face_on_H(s, u, t, nbhd, memory, variant="face1"):
    """One face-routing step restricted to triangles of a triangulation meeting st."""
    return _face_step(s, u, t, nbhd, memory, local_H_edges(nbhd, s[1], t[1]), variant)


def step_theta_routing(s, u, t, nbhd, memory):
    """Greedy Theta-routing on a constrained Theta6 neighborhood."""
    tid, t_xy = t
    if tid in nbhd.neighbors:
        return tid, memory
    pu = nbhd.coords[u]
    i = cone_of(pu, t_xy)
    best = None
    for v in nbhd.neighbors:
        if cone_of(pu, nbhd.coords[v]) != i:
            continue
        key = bisector_projection(pu, i, nbhd.coords[v])
        if best is None or key < best[0]:
            best = (key, v)
    if best is None:
        raise Stuck(f"no edge of {u} in cone {i} towards {tid}")
    return best[1], memory


# --- engine -----------------------------------------------------------------


@dataclass
class Step:
    frm: int
    to: int
    memory: tuple


@dataclass
class RouteTrace:
    algo: str
    s: int
    t: int
    steps: list = field(default_factory=list)
    total_length: float = 0.0
    delivered: bool = False
    status: str = "running"

    @property
    def vertices(self) -> list[int]:
        return [self.s] + [st.to for st in self.steps]

    def directed_edges(self) -> list[tuple[int, int]]:
        return [(st.frm, st.to) for st in self.steps]

    def to_json(self, inst: Instance) -> dict:
        sc = inst.scale

        def word(w):
            if w is None or isinstance(w, int):
                return w
            return [str(Fraction(w[0]) / sc), str(Fraction(w[1]) / sc)]

        return {
            "algo": self.algo,
            "s": self.s,
            "t": self.t,
            "delivered": self.delivered,
            "status": self.status,
            "steps": [{"from": st.frm, "to": st.to, "memory": [word(w) for w in st.memory]}
                      for st in self.steps],
            "total_length": self.total_length,
            "edge_traversals": len(self.steps),
        }


def check_memory(memory, n: int, max_words: int = MAX_WORDS) -> None:
    if not isinstance(memory, tuple):
        raise ProtocolError("memory must be a tuple of words")
    if len(memory) > max_words:
        raise ProtocolError(f"memory holds {len(memory)} words, budget is {max_words}")
    bits = max(2, math.ceil(math.log2(max(n, 2))))
    for w in memory:
        if w is None:
            continue
        if isinstance(w, int) and not isinstance(w, bool):
            if w < 0 or w.bit_length() > bits:
                raise ProtocolError(f"integer word {w} exceeds {bits} bits")
        elif isinstance(w, tuple) and len(w) == 2:
            continue
        else:
            raise ProtocolError(f"{w!r} is not a word")


def _graph_for(inst: Instance, algo: str, graph: GeomGraph | None) -> GeomGraph:
    if graph is not None:
        return graph
    if algo == "theta":
        return build_constrained_theta(inst, 6)
    if algo in ("face1", "face2"):
        return build_visibility_graph(inst)
    if algo in ("face1_on_H", "face2_on_H"):
        from .triangulation import build_cdt

        return build_cdt(inst).graph
    raise ValueError(f"algorithm {algo!r} needs an explicit graph")


def _step_for(algo: str) -> Callable:
    if algo == "theta":
        return step_theta_routing
    if algo in ("face1", "face2"):
        return lambda s, u, t, nb, m: step_face_routing(s, u, t, nb, m, algo)
    if algo in ("face1_on_H", "face2_on_H"):
        v = algo.split("_")[0]
        return lambda s, u, t, nb, m: step_face_on_H(s, u, t, nb, m, v)
    raise ValueError(f"unknown algorithm {algo!r}")


class Router:
    """Drives a step function over one graph; caches the per-vertex packets."""

    def __init__(self, inst: Instance, algo: str = "face1", graph: GeomGraph | None = None,
                 step: Callable | None = None, max_words: int = MAX_WORDS):
        if algo not in ALGOS:
            raise ValueError(f"unknown algorithm {algo!r}")
        if algo == "plugin" and (step is None or graph is None):
            raise ValueError("the plugin slot needs both a step function and a graph")
        self.inst = inst
        self.algo = algo
        self.graph = _graph_for(inst, algo, graph)
        self.step = step if algo == "plugin" else _step_for(algo)
        self.max_words = max_words
        self._packets: dict[int, Neighborhood] = {}

    def packet(self, u: int) -> Neighborhood:
        nb = self._packets.get(u)
        if nb is None:
            nb = self._packets[u] = neighborhood(self.graph, u)
        return nb

    def route(self, s: int, t: int, max_steps: int | None = None) -> RouteTrace:
        inst = self.inst
        c = inst.coords
        trace = RouteTrace(self.algo, s, t)
        if s == t:
            trace.delivered, trace.status = True, "delivered"
            return trace
        if max_steps is None:
            max_steps = 16 * inst.n * inst.n + 100
        sp, tp = (s, c[s]), (t, c[t])
        u, memory = s, ()
        while u != t:
            if len(trace.steps) >= max_steps:
                trace.status = "budget"
                raise StepBudgetExceeded(trace)
            nbhd = self.packet(u)
            try:
                v, memory = self.step(sp, u, tp, nbhd, memory)
            except Stuck:
                trace.status = "stuck"
                return trace
            except Unreachable:
                trace.status = "unreachable"
                return trace
            if v not in nbhd.neighbors:
                raise ProtocolError(f"step moved from {u} to non-neighbor {v}")
            check_memory(memory, inst.n, self.max_words)
            trace.steps.append(Step(u, v, memory))
            trace.total_length += inst.length(u, v)
            u = v
        trace.delivered, trace.status = True, "delivered"
        return trace


def run_router(inst: Instance, s: int, t: int, algo: str = "face1", graph: GeomGraph | None = None,
               step: Callable | None = None, max_steps: int | None = None) -> RouteTrace:
    return Router(inst, algo, graph, step).route(s, t, max_steps)


def route_on_H(inst: Instance, T, s: int, t: int, variant: str = "face1") -> RouteTrace:
    """Route from s to t over triangulation ``T`` using only triangles meeting st."""
    from .triangulation import Triangulation, validate_triangulation

    if not isinstance(T, Triangulation):
        T = validate_triangulation(inst, T.edges() if hasattr(T, "edges") else T)
    return run_router(inst, s, t, f"{variant}_on_H", graph=T.graph)
