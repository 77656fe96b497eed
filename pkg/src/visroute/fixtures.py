"""Small hand-built configurations used by tests, the CLI and the docs."""
from __future__ import annotations

from fractions import Fraction as F

from .instance import Instance, make_instance


def subcone_example() -> tuple[Instance, dict]:
    """Apex u with a constraint to v2 splitting its upper cone.

    v3 is closer to u along the upper bisector than v2 but hidden behind
    the constraint c1-c2; v1 sits on the other side of the split.
    """
    names = ["u", "v1", "v2", "v3", "c1", "c2"]
    coords = [(0, 0), (F(-1, 2), 2), (F(1, 10), 3), (1, F(27, 10)), (3, F(1, 2)), (F(-1, 2), 4)]
    inst = make_instance(coords, [(0, 2), (4, 5)])
    return inst, dict(zip(names, range(len(names))))


def hidden_closer_example(blocked: bool) -> tuple[Instance, dict]:
    """u below v, with a closer vertex w in the same cone of u.

    With ``blocked`` a constraint from v to c hides w from u, so v becomes
    the closest visible vertex and uv is a half-Theta6 edge; without it w
    wins and uv is not an edge.
    """
    names = ["u", "v", "w", "c"]
    coords = [(0, 0), (F(1, 10), 10), (-2, 6), (F(-3, 2), 1)]
    inst = make_instance(coords, [(1, 3)] if blocked else [])
    return inst, dict(zip(names, range(len(names))))


def theta_stuck_example() -> tuple[Instance, int, int]:
    """s has nothing visible in the cone containing t: a constraint spans it."""
    coords = [(0, 0), (F(1, 7), 11), (-5, 5), (5, F(51, 10))]
    inst = make_instance(coords, [(2, 3)])
    return inst, 0, 1
