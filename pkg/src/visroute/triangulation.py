"""Constrained triangulations, the crossed subgraph H and its augmentation H'."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key

from .geom import (
    incircle,
    open_segment_meets_triangle,
    orient,
    properly_intersects,
    segment_crosses_point_interior,
)
from .instance import GeomGraph, Instance
from .visibility import blocked_by


class TriangulationError(ValueError):
    def __init__(self, violations):
        super().__init__("invalid triangulation: " + "; ".join(f"{k} {w}" for k, w in violations[:8]))
        self.violations = list(violations)


def _e(a, b):
    return (a, b) if a < b else (b, a)


def convex_hull(coords, ids=None) -> list[int]:
    """Counterclockwise hull vertex ids (monotone chain, strict turns)."""
    ids = list(range(len(coords))) if ids is None else list(ids)
    pts = sorted(ids, key=lambda i: coords[i])
    if len(pts) <= 2:
        return pts

    def half(seq):
        out = []
        for i in seq:
            while len(out) >= 2 and orient(coords[out[-2]], coords[out[-1]], coords[i]) <= 0:
                out.pop()
            out.append(i)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


def angular_order(center, others, coords) -> list[int]:
    """Ids in ``others`` sorted counterclockwise around ``center`` starting at angle 0."""
    cx, cy = coords[center]

    def key(v):
        dx, dy = coords[v][0] - cx, coords[v][1] - cy
        return 0 if (dy > 0 or (dy == 0 and dx > 0)) else 1

    def cmp(a, b):
        ha, hb = key(a), key(b)
        if ha != hb:
            return ha - hb
        return -orient(coords[center], coords[a], coords[b])

    return sorted(others, key=cmp_to_key(cmp))


def trace_faces(coords, adjacency) -> list[tuple[list[int], int]]:
    """All faces of a plane straight-line graph as (vertex cycle, twice signed area).

    Faces lie to the left of their directed boundary, so bounded faces come
    out counterclockwise (positive area) and outer boundaries clockwise.
    """
    order = {}
    pos = {}
    for v, nb in enumerate(adjacency):
        if nb:
            o = angular_order(v, nb, coords)
            order[v] = o
            pos[v] = {w: k for k, w in enumerate(o)}
    seen = set()
    faces = []
    for u in sorted(order):
        for v in order[u]:
            if (u, v) in seen:
                continue
            cyc = []
            a, b = u, v
            area = 0
            while (a, b) not in seen:
                seen.add((a, b))
                cyc.append(a)
                area += coords[a][0] * coords[b][1] - coords[b][0] * coords[a][1]
                ob = order[b]
                c = ob[(pos[b][a] - 1) % len(ob)]  # next neighbor clockwise from a
                a, b = b, c
            faces.append((cyc, area))
    return faces


@dataclass(frozen=True, eq=False)
class Triangulation:
    graph: GeomGraph
    faces: tuple[tuple[int, int, int], ...]  # counterclockwise triples
    constraint_edges: frozenset = field(default_factory=frozenset)

    @property
    def instance(self) -> Instance:
        return self.graph.instance

    def edges(self):
        return self.graph.edges()


def validate_triangulation(inst: Instance, edges) -> Triangulation:
    """Check a candidate constrained triangulation and rebuild its faces."""
    n = inst.n
    c = inst.coords
    problems = []
    es = set()
    for a, b in edges:
        if not (0 <= a < n and 0 <= b < n) or a == b:
            problems.append(("bad edge", (a, b)))
            continue
        es.add(_e(a, b))
    if problems:
        raise TriangulationError(problems)
    el = sorted(es)
    for k, (a, b) in enumerate(el):
        s1 = (c[a], c[b])
        for x, y in el[k + 1:]:
            if properly_intersects(s1, (c[x], c[y])):
                problems.append(("edges cross", ((a, b), (x, y))))
        for v in range(n):
            if v != a and v != b and segment_crosses_point_interior(s1, c[v]):
                problems.append(("edge through vertex", ((a, b), v)))
    for con in inst.constraints:
        if con not in es:
            problems.append(("constraint missing", con))
    if problems:
        raise TriangulationError(problems)
    g = GeomGraph.from_edges(inst, el, "triangulation")
    faces = trace_faces(c, g.adjacency)
    isolated = [v for v in range(n) if not g.adjacency[v]]
    if isolated and n > 1:
        problems.append(("isolated vertex", tuple(isolated)))
    outer = [f for f in faces if f[1] < 0]
    if len(outer) != 1:
        problems.append(("disconnected", len(outer)))
    hull = convex_hull(c)
    tris = []
    for cyc, area in faces:
        if area < 0:
            ring = list(reversed(cyc))
            if sorted(ring) != sorted(hull) or len(ring) != len(hull):
                problems.append(("outer face is not the convex hull", tuple(ring)))
        elif len(cyc) != 3:
            problems.append(("internal face not a triangle", tuple(cyc)))
        else:
            tris.append(tuple(cyc))
    if problems:
        raise TriangulationError(problems)
    return Triangulation(g, tuple(sorted(_canon(t) for t in tris)), frozenset(inst.constraints))


def _canon(t):
    k = t.index(min(t))
    return t[k:] + t[:k]


# --- construction -----------------------------------------------------------


def greedy_constrained_triangulation(inst: Instance) -> list[tuple[int, int]]:
    """A maximal non-crossing edge set containing all constraints."""
    c = inst.coords
    n = inst.n
    edges = list(inst.constraints)
    cons = inst.constraint_set

    def d2(e):
        a, b = e
        return ((c[a][0] - c[b][0]) ** 2 + (c[a][1] - c[b][1]) ** 2, e)

    cand = sorted(((a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in cons), key=d2)
    for a, b in cand:
        if not blocked_by(c, a, b, edges):
            edges.append((a, b))
    return edges


class _Mesh:
    """Half-edge → opposite vertex map used by the flip routines."""

    def __init__(self, coords, faces, constraints):
        self.c = coords
        self.opp = {}
        self.cons = constraints
        for a, b, cc in faces:
            self.add(a, b, cc)

    def add(self, a, b, c):
        self.opp[(a, b)] = c
        self.opp[(b, c)] = a
        self.opp[(c, a)] = b

    def remove(self, a, b, c):
        del self.opp[(a, b)], self.opp[(b, c)], self.opp[(c, a)]

    def internal_edges(self):
        return sorted(_e(a, b) for a, b in self.opp if a < b and (b, a) in self.opp)

    def flippable(self, a, b) -> bool:
        if _e(a, b) in self.cons or (a, b) not in self.opp or (b, a) not in self.opp:
            return False
        x, y = self.opp[(a, b)], self.opp[(b, a)]
        c = self.c
        # quadrilateral a, y, b, x must be strictly convex
        return orient(c[x], c[y], c[a]) * orient(c[x], c[y], c[b]) < 0

    def illegal(self, a, b) -> bool:
        if _e(a, b) in self.cons or (a, b) not in self.opp or (b, a) not in self.opp:
            return False
        x, y = self.opp[(a, b)], self.opp[(b, a)]
        return incircle(self.c[a], self.c[b], self.c[x], self.c[y]) > 0

    def flip(self, a, b):
        x, y = self.opp[(a, b)], self.opp[(b, a)]
        self.remove(a, b, x)
        self.remove(b, a, y)
        self.add(a, y, x)
        self.add(y, b, x)
        return x, y

    def faces(self):
        out = set()
        for (a, b), c in self.opp.items():
            out.add(_canon((a, b, c)))
        return sorted(out)

    def edges(self):
        return sorted({_e(a, b) for a, b in self.opp})


def lawson_flip(mesh: _Mesh) -> int:
    stack = mesh.internal_edges()
    flips = 0
    while stack:
        a, b = stack.pop()
        if mesh.illegal(a, b):
            x, y = mesh.flip(a, b)
            flips += 1
            stack.extend([_e(a, x), _e(x, b), _e(b, y), _e(y, a)])
    return flips


def _mesh_of(T: Triangulation) -> _Mesh:
    return _Mesh(T.instance.coords, T.faces, T.constraint_edges)


def _from_mesh(inst: Instance, mesh: _Mesh) -> Triangulation:
    g = GeomGraph.from_edges(inst, mesh.edges(), "triangulation")
    return Triangulation(g, tuple(mesh.faces()), frozenset(inst.constraints))


def flip_pass(T: Triangulation) -> tuple[Triangulation, int]:
    """Run restricted Lawson flips; return the result and the flip count."""
    mesh = _mesh_of(T)
    k = lawson_flip(mesh)
    return _from_mesh(T.instance, mesh), k


def build_cdt(inst: Instance, check: bool = False) -> Triangulation:
    """Constrained Delaunay triangulation: greedy start, then restricted flips."""
    start = validate_triangulation(inst, greedy_constrained_triangulation(inst))
    T, _ = flip_pass(start)
    if check:
        T = validate_triangulation(inst, T.edges())
    return T


def is_locally_delaunay(T: Triangulation) -> list[tuple[int, int]]:
    """Non-constraint internal edges failing the empty-circle test."""
    mesh = _mesh_of(T)
    return [e for e in mesh.internal_edges() if mesh.illegal(*e)]


def random_flips(T: Triangulation, steps: int, rng: random.Random) -> Triangulation:
    """Random walk in the flip graph of constrained triangulations."""
    mesh = _mesh_of(T)
    for _ in range(steps):
        cand = [e for e in mesh.internal_edges() if mesh.flippable(*e)]
        if not cand:
            break
        a, b = rng.choice(cand)
        if (a, b) not in mesh.opp:
            a, b = b, a
        mesh.flip(a, b)
    return _from_mesh(T.instance, mesh)


# --- H and H' ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CrossedSubgraph:
    H: GeomGraph
    crossed_faces: tuple[tuple[int, int, int], ...]
    s: int
    t: int

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for f in self.crossed_faces for v in f)


def _entry_param(c, tri, s, t):
    """Smallest parameter along st (scaled by |st|^2) where st meets the triangle."""
    sx, sy = c[s]
    dx, dy = c[t][0] - sx, c[t][1] - sy

    def lam(p):
        return (p[0] - sx) * dx + (p[1] - sy) * dy

    a, b, cc = (c[v] for v in tri)
    from .geom import point_in_closed_triangle

    if point_in_closed_triangle(a, b, cc, c[s]):
        return Fraction(0)
    best = None
    for p, q in ((a, b), (b, cc), (cc, a)):
        op = dx * (p[1] - sy) - dy * (p[0] - sx)
        oq = dx * (q[1] - sy) - dy * (q[0] - sx)
        if op == 0 and oq == 0:
            val = min(Fraction(lam(p)), Fraction(lam(q)))
        elif op == oq or (op > 0 and oq > 0) or (op < 0 and oq < 0):
            continue
        else:
            mu = Fraction(op, op - oq)
            val = Fraction(lam(p)) + mu * (lam(q) - lam(p))
        if best is None or val < best:
            best = val
    return best


def extract_H(T: Triangulation, s: int, t: int) -> CrossedSubgraph:
    """Triangles met by the open segment st, ordered from s to t."""
    inst = T.instance
    c = inst.coords
    crossed = [f for f in T.faces if open_segment_meets_triangle(c[f[0]], c[f[1]], c[f[2]], c[s], c[t])]
    crossed.sort(key=lambda f: (_entry_param(c, f, s, t), f))
    edges = set()
    for a, b, cc in crossed:
        edges.update((_e(a, b), _e(b, cc), _e(cc, a)))
    return CrossedSubgraph(GeomGraph.from_edges(inst, edges, "H"), tuple(crossed), s, t)


@dataclass(frozen=True, eq=False)
class AugmentedSubgraph:
    H_prime: GeomGraph
    added_hull_edges: tuple[tuple[int, int], ...]
    added_visibility_edges: tuple[tuple[int, int], ...]


def build_H_prime(inst: Instance, Hsub: CrossedSubgraph) -> AugmentedSubgraph:
    """H plus its hull edges plus within-face visibility edges.

    Only constraints with both endpoints in H may block the added edges.
    """
    c = inst.coords
    verts = sorted(Hsub.vertices)
    base = set(Hsub.H.edge_set)
    hull = convex_hull(c, verts)
    hull_edges = set()
    if len(hull) >= 2:
        for k in range(len(hull)):
            e = _e(hull[k], hull[(k + 1) % len(hull)])
            if e[0] != e[1] and e not in base:
                hull_edges.add(e)
    with_hull = GeomGraph.from_edges(inst, base | hull_edges, "H_prime")
    vset = set(verts)
    local_cons = [e for e in inst.constraints if e[0] in vset and e[1] in vset]
    local_cons_set = set(local_cons)
    added = set()
    for cyc, area in trace_faces(c, with_hull.adjacency):
        if area <= 0:
            continue
        ring = sorted(set(cyc))
        if len(ring) <= 3:
            continue
        for i, a in enumerate(ring):
            for b in ring[i + 1:]:
                e = (a, b)
                if e in base or e in hull_edges or e in added:
                    continue
                if e in local_cons_set or not blocked_by(c, a, b, local_cons):
                    added.add(e)
    Hp = GeomGraph.from_edges(inst, base | hull_edges | added, "H_prime")
    return AugmentedSubgraph(Hp, tuple(sorted(hull_edges)), tuple(sorted(added)))
