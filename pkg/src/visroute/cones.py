"""Cones, subcones and the global constrained Theta / half-Theta6 constructions.

Cones are numbered clockwise starting with C_0, whose bisector points
straight up.  For six cones all boundary and projection tests are exact in
Q[sqrt 3]; other cone counts go through a 128-bit evaluation that raises
``DegeneracyError`` when it cannot decide.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .geom import DegeneracyError, Sqrt3Scalar, orient
from .instance import GeomGraph, Instance
from .visibility import build_visibility_graph

POSITIVE = "positive"
NEGATIVE = "negative"
UNSIGNED = "unsigned"

# half-Theta6 labels clockwise from the top: C0, -C1, C2, -C0, C1, -C2
HALF_THETA_LABEL = {0: (0, POSITIVE), 1: (1, NEGATIVE), 2: (2, POSITIVE),
                    3: (0, NEGATIVE), 4: (1, POSITIVE), 5: (2, NEGATIVE)}
POSITIVE_CONES = (0, 2, 4)


def _s3(p, q=0) -> Sqrt3Scalar:
    return Sqrt3Scalar(Fraction(p), Fraction(q))


def _cone6(dx, dy) -> int:
    if dx == 0 and dy == 0:
        raise ValueError("cone of a vertex relative to itself")
    # side of the 60-degree line (1, sqrt3) and the 120-degree line (-1, sqrt3)
    b = _s3(dy, -dx).sign()
    c = _s3(-dy, -dx).sign()
    if dy == 0 or b == 0 or c == 0:
        raise DegeneracyError(f"direction ({dx}, {dy}) lies on a cone boundary")
    if dy > 0:
        if b < 0:
            return 1
        if c > 0:
            return 5
        return 0
    if c < 0:
        return 2
    if b > 0:
        return 4
    return 3


def _cone_general(dx, dy, m) -> int:
    import mpmath

    with mpmath.workprec(128):
        phi = mpmath.atan2(dx, dy) % (2 * mpmath.pi)  # clockwise from up
        w = 2 * mpmath.pi / m
        pos = (phi + w / 2) / w
        k = int(mpmath.floor(pos))
        if abs(pos - k) < mpmath.mpf(2) ** -100 or abs(pos - k - 1) < mpmath.mpf(2) ** -100:
            raise DegeneracyError(f"direction ({dx}, {dy}) too close to a cone boundary")
    return k % m


def cone_of(u, v, m: int = 6) -> int:
    """Index of the cone of apex ``u`` that contains ``v``."""
    dx, dy = v[0] - u[0], v[1] - u[1]
    if m == 6:
        return _cone6(dx, dy)
    return _cone_general(dx, dy, m)


# twice the projection on the bisector of C_i, as (p, q) meaning p + q sqrt3
_BISECTOR6 = {
    0: lambda dx, dy: (2 * dy, 0),
    1: lambda dx, dy: (dy, dx),
    2: lambda dx, dy: (-dy, dx),
    3: lambda dx, dy: (-2 * dy, 0),
    4: lambda dx, dy: (-dy, -dx),
    5: lambda dx, dy: (dy, -dx),
}


def bisector_projection(u, i: int, v, m: int = 6):
    """A key ordering vertices by projection on the bisector of cone ``i`` of ``u``."""
    dx, dy = v[0] - u[0], v[1] - u[1]
    if m == 6:
        return _s3(*_BISECTOR6[i](dx, dy))
    import mpmath

    with mpmath.workprec(128):
        beta = 2 * mpmath.pi * i / m
        return mpmath.mpf(dx) * mpmath.sin(beta) + mpmath.mpf(dy) * mpmath.cos(beta)


def _strictly_less(a, b) -> bool:
    if isinstance(a, Sqrt3Scalar):
        d = (a - b).sign()
        if d == 0:
            raise DegeneracyError("equal projections on a cone bisector")
        return d < 0
    import mpmath

    if abs(a - b) < mpmath.mpf(2) ** -100:
        raise DegeneracyError("projections too close to order")
    return a < b


def projection_closer(u, i: int, v, w, m: int = 6) -> bool:
    """Is the projection of ``v`` on the bisector of cone ``i`` of ``u`` closer than ``w``'s?"""
    return _strictly_less(bisector_projection(u, i, v, m), bisector_projection(u, i, w, m))


@dataclass(frozen=True)
class SubconeRef:
    apex: int
    cone_index: int
    subcone_index: int
    polarity: str = UNSIGNED


@dataclass(frozen=True)
class ConeDecomposition:
    apex: int
    apex_xy: tuple
    m: int
    rays: tuple  # rays[i]: constraint endpoints inside cone i, sorted clockwise, as (id, xy)

    def subcones(self) -> list[SubconeRef]:
        return [SubconeRef(self.apex, i, j, self.polarity(i))
                for i in range(self.m) for j in range(len(self.rays[i]) + 1)]

    def polarity(self, i: int) -> str:
        return HALF_THETA_LABEL[i][1] if self.m == 6 else UNSIGNED


def decompose(apex: int, apex_xy, endpoints, m: int = 6) -> ConeDecomposition:
    """Split the cones of ``apex`` by rays towards its constraint partners.

    ``endpoints`` is an iterable of ``(id, xy)`` for the far ends of the
    constraints incident to the apex.
    """
    from functools import cmp_to_key

    per = [[] for _ in range(m)]
    for vid, xy in endpoints:
        per[cone_of(apex_xy, xy, m)].append((vid, xy))

    def cw(a, b):
        # a before b iff b is clockwise of a (cones are narrower than pi)
        return -orient(apex_xy, a[1], b[1]) or (a[0] > b[0]) - (a[0] < b[0])

    rays = tuple(tuple(sorted(r, key=cmp_to_key(cw))) for r in per)
    return ConeDecomposition(apex, apex_xy, m, rays)


def decomposition_for(inst: Instance, u: int, m: int = 6) -> ConeDecomposition:
    c = inst.coords
    ends = [(b if a == u else a) for a, b in inst.incident_constraints[u]]
    return decompose(u, c[u], [(v, c[v]) for v in ends], m)


def subcone_of(dec: ConeDecomposition, v: int, v_xy, i: int | None = None) -> tuple[SubconeRef, ...]:
    """The closed subcone(s) of ``dec`` containing ``v``."""
    if i is None:
        i = cone_of(dec.apex_xy, v_xy, dec.m)
    before = 0
    on_ray = False
    for rid, rxy in dec.rays[i]:
        o = orient(dec.apex_xy, rxy, v_xy)
        if o < 0:
            before += 1
        elif o == 0:
            on_ray = True
    pol = dec.polarity(i)
    if on_ray:
        return (SubconeRef(dec.apex, i, before, pol), SubconeRef(dec.apex, i, before + 1, pol))
    return (SubconeRef(dec.apex, i, before, pol),)


def _closest_per_subcone(inst: Instance, vis: GeomGraph, u: int, m: int, cones) -> dict:
    c = inst.coords
    dec = decomposition_for(inst, u, m)
    best: dict[tuple[int, int], tuple] = {}
    for v in vis.adjacency[u]:
        i = cone_of(c[u], c[v], m)
        if i not in cones:
            continue
        key = bisector_projection(c[u], i, c[v], m)
        for ref in subcone_of(dec, v, c[v], i):
            slot = (ref.cone_index, ref.subcone_index)
            cur = best.get(slot)
            if cur is None or _strictly_less(key, cur[0]):
                best[slot] = (key, v)
    return {slot: v for slot, (_, v) in best.items()}


def build_constrained_theta(inst: Instance, m: int = 6, vis: GeomGraph | None = None) -> GeomGraph:
    vis = vis or build_visibility_graph(inst)
    edges = set()
    for u in range(inst.n):
        for v in _closest_per_subcone(inst, vis, u, m, range(m)).values():
            edges.add((min(u, v), max(u, v)))
    return GeomGraph.from_edges(inst, edges, "theta")


def build_constrained_half_theta6(inst: Instance, vis: GeomGraph | None = None) -> GeomGraph:
    vis = vis or build_visibility_graph(inst)
    edges = set()
    for u in range(inst.n):
        for v in _closest_per_subcone(inst, vis, u, 6, POSITIVE_CONES).values():
            edges.add((min(u, v), max(u, v)))
    return GeomGraph.from_edges(inst, edges, "half_theta6")
