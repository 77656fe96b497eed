"""Constrained visibility graph and the 1-neighborhood packets routers read."""
from __future__ import annotations

from dataclasses import dataclass

from .instance import GeomGraph, Instance


def _crosses(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    o1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    o2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    if o1 == 0 or o2 == 0 or (o1 > 0) == (o2 > 0):
        return False
    o3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    o4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    return o3 != 0 and o4 != 0 and (o3 > 0) != (o4 > 0)


def blocked_by(coords, u: int, v: int, constraints) -> bool:
    """Does segment uv properly cross any of ``constraints``?"""
    ax, ay = coords[u]
    bx, by = coords[v]
    for a, b in constraints:
        cx, cy = coords[a]
        dx, dy = coords[b]
        if _crosses(ax, ay, bx, by, cx, cy, dx, dy):
            return True
    return False


def visible(inst: Instance, u: int, v: int) -> bool:
    if u == v:
        raise ValueError("visibility needs two distinct vertices")
    if (min(u, v), max(u, v)) in inst.constraint_set:
        return True
    return not blocked_by(inst.coords, u, v, inst.constraints)


def build_visibility_graph(inst: Instance) -> GeomGraph:
    n = inst.n
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if visible(inst, u, v)]
    return GeomGraph.from_edges(inst, edges, "visibility")


@dataclass(frozen=True, eq=False)
class Neighborhood:
    """Everything a 1-local router may read at vertex ``u``.

    ``coords`` maps ``u`` and each neighbor to integer-frame coordinates;
    ``constraints`` lists the constraints incident to ``u``.
    """

    u: int
    coords: dict
    neighbors: tuple[int, ...]
    constraints: tuple[tuple[int, int], ...]
    n: int

    def xy(self, v: int):
        return self.coords[v]


def neighborhood(graph: GeomGraph, u: int) -> Neighborhood:
    inst = graph.instance
    c = inst.coords
    nb = graph.adjacency[u]
    coords = {u: c[u]}
    for v in nb:
        coords[v] = c[v]
    return Neighborhood(u, coords, tuple(nb), inst.incident_constraints[u], inst.n)
