"""Routing instances (points plus non-crossing constraints) and embedded graphs."""
from __future__ import annotations

import io
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .geom import (
    Point,
    Segment,
    Violation,
    integer_frame,
    properly_intersects,
    segment_crosses_point_interior,
    validate_general_position,
)

GRAPH_KINDS = ("visibility", "theta", "half_theta6", "triangulation", "H", "H_prime")


class InstanceError(ValueError):
    """Invalid instance: carries the list of violations."""

    def __init__(self, message: str, violations: Sequence = ()):
        super().__init__(message)
        self.violations = list(violations)


class InstanceParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, pos: int | None = None):
        where = f"line {line}: " if line is not None else (f"byte {pos}: " if pos is not None else "")
        super().__init__(where + message)
        self.line = line
        self.pos = pos


def _edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Instance:
    points: tuple[Point, ...]
    constraints: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        cons = sorted({_edge(a, b) for a, b in self.constraints})
        object.__setattr__(self, "constraints", tuple(cons))

    @property
    def n(self) -> int:
        return len(self.points)

    @cached_property
    def _frame(self):
        return integer_frame(p.xy for p in self.points)

    @property
    def coords(self) -> list[tuple[int, int]]:
        """Integer coordinates (original coordinates times ``scale``)."""
        return self._frame[0]

    @property
    def scale(self) -> int:
        return self._frame[1]

    @cached_property
    def constraint_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.constraints)

    @cached_property
    def incident_constraints(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        inc = [[] for _ in self.points]
        for a, b in self.constraints:
            inc[a].append((a, b))
            inc[b].append((a, b))
        return tuple(tuple(c) for c in inc)

    def segments(self) -> list[Segment]:
        return [Segment(self.points[a], self.points[b]) for a, b in self.constraints]

    def float_xy(self, v: int) -> tuple[float, float]:
        p = self.points[v]
        return float(p.x), float(p.y)

    def length(self, a: int, b: int) -> float:
        return euclidean_length(self.points[a], self.points[b])


def euclidean_length(a: Point, b: Point) -> float:
    return math.hypot(float(a.x - b.x), float(a.y - b.y))


def instance_violations(inst: Instance, m: int = 6, check_general_position: bool = True,
                        check_cocircular: bool = True) -> list:
    out: list = []
    n = inst.n
    for i, p in enumerate(inst.points):
        if p.id != i:
            out.append(Violation("bad_id", (p.id,)))
    for a, b in inst.constraints:
        if not (0 <= a < n and 0 <= b < n) or a == b:
            out.append(Violation("bad_constraint", (a, b)))
    if out:
        return out
    c = inst.coords
    cons = inst.constraints
    for i in range(len(cons)):
        a, b = cons[i]
        sa = (c[a], c[b])
        for j in range(i + 1, len(cons)):
            x, y = cons[j]
            if properly_intersects(sa, (c[x], c[y])):
                out.append(Violation("constraints_properly_intersect", (a, b, x, y)))
        for v in range(n):
            if v != a and v != b and segment_crosses_point_interior(sa, c[v]):
                out.append(Violation("constraint_through_vertex", (a, b, v)))
    if check_general_position:
        out.extend(validate_general_position(inst.points, m, check_cocircular=check_cocircular))
    return out


def validate_instance(inst: Instance, m: int = 6, **kw) -> Instance:
    v = instance_violations(inst, m, **kw)
    if v:
        kinds = sorted({x.kind for x in v})
        msg = "invalid instance: " + ", ".join(kinds)
        if "constraints_properly_intersect" in kinds:
            msg = "constraints properly intersect; " + msg
        raise InstanceError(msg, v)
    return inst


def make_instance(coords: Iterable[tuple], constraints: Iterable[tuple[int, int]] = (),
                  validate: bool = True, **kw) -> Instance:
    pts = tuple(Point(i, Fraction(x), Fraction(y)) for i, (x, y) in enumerate(coords))
    inst = Instance(pts, tuple(constraints))
    return validate_instance(inst, **kw) if validate else inst


# --- serialization ----------------------------------------------------------


def _parse_coord(tok, line=None) -> Fraction:
    if isinstance(tok, bool) or not isinstance(tok, (str, int)):
        raise InstanceParseError(f"coordinate {tok!r} must be a rational string", line)
    try:
        v = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise InstanceParseError(f"bad coordinate {tok!r}", line) from None
    return v


def _normalize(raw_pts, raw_cons, line_of=None) -> Instance:
    ids = [pid for pid, _, _ in raw_pts]
    if len(set(ids)) != len(ids):
        raise InstanceParseError("duplicate point id")
    remap = {pid: i for i, pid in enumerate(sorted(ids))}
    pts = sorted(((remap[pid], x, y) for pid, x, y in raw_pts))
    cons = []
    for k, (a, b) in enumerate(raw_cons):
        if a not in remap or b not in remap:
            raise InstanceParseError(f"constraint ({a}, {b}) references unknown id",
                                     line_of[k] if line_of else None)
        cons.append((remap[a], remap[b]))
    return Instance(tuple(Point(i, x, y) for i, x, y in pts), tuple(cons))


def _parse_text(text: str) -> Instance:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            rows.append((lineno, body.split()))
    if not rows:
        raise InstanceParseError("empty instance", 1)
    lineno, head = rows[0]
    if len(head) != 2:
        raise InstanceParseError("header must be 'n m'", lineno)
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise InstanceParseError("header must be two integers", lineno) from None
    if len(rows) != 1 + n + m:
        last = rows[-1][0]
        raise InstanceParseError(f"expected {n} points and {m} constraints, found {len(rows) - 1} records", last)
    raw_pts = []
    for lineno, toks in rows[1:1 + n]:
        if len(toks) != 3:
            raise InstanceParseError("point record must be 'id x y'", lineno)
        try:
            pid = int(toks[0])
        except ValueError:
            raise InstanceParseError("point id must be an integer", lineno) from None
        raw_pts.append((pid, _parse_coord(toks[1], lineno), _parse_coord(toks[2], lineno)))
    raw_cons, lines = [], []
    for lineno, toks in rows[1 + n:]:
        if len(toks) != 2:
            raise InstanceParseError("constraint record must be 'a b'", lineno)
        try:
            raw_cons.append((int(toks[0]), int(toks[1])))
        except ValueError:
            raise InstanceParseError("constraint ids must be integers", lineno) from None
        lines.append(lineno)
    return _normalize(raw_pts, raw_cons, lines)


def _parse_json(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceParseError(e.msg, line=e.lineno, pos=e.pos) from None
    if not isinstance(obj, dict) or "points" not in obj:
        raise InstanceParseError("expected an object with 'points' and 'constraints'")
    raw_pts = []
    for p in obj["points"]:
        try:
            raw_pts.append((int(p["id"]), _parse_coord(p["x"]), _parse_coord(p["y"])))
        except (KeyError, TypeError):
            raise InstanceParseError(f"bad point record {p!r}") from None
    raw_cons = []
    for c in obj.get("constraints", []):
        if not (isinstance(c, list) and len(c) == 2 and all(isinstance(v, int) for v in c)):
            raise InstanceParseError(f"bad constraint record {c!r}")
        raw_cons.append(tuple(c))
    return _normalize(raw_pts, raw_cons)


def load_instance(source, format: str = "text", validate: bool = True, **kw) -> Instance:
    """Read an instance from bytes, str, or a binary/text stream."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if format == "text":
        inst = _parse_text(source)
    elif format == "json":
        inst = _parse_json(source)
    else:
        raise ValueError(f"unknown format {format!r}")
    return validate_instance(inst, **kw) if validate else inst


def save_instance(inst: Instance, format: str = "text") -> bytes:
    if format == "text":
        buf = io.StringIO()
        buf.write(f"{inst.n} {len(inst.constraints)}\n")
        for p in inst.points:
            buf.write(f"{p.id} {p.x} {p.y}\n")
        for a, b in inst.constraints:
            buf.write(f"{a} {b}\n")
        return buf.getvalue().encode("utf-8")
    if format == "json":
        obj = {
            "points": [{"id": p.id, "x": str(p.x), "y": str(p.y)} for p in inst.points],
            "constraints": [[a, b] for a, b in inst.constraints],
        }
        return (json.dumps(obj, indent=1) + "\n").encode("utf-8")
    raise ValueError(f"unknown format {format!r}")


def guess_format(path: str) -> str:
    return "json" if str(path).endswith(".json") else "text"


# --- graphs -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GeomGraph:
    instance: Instance
    adjacency: tuple[tuple[int, ...], ...]
    kind: str

    def __post_init__(self):
        if self.kind not in GRAPH_KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}")

    @classmethod
    def from_edges(cls, inst: Instance, edges: Iterable[tuple[int, int]], kind: str) -> "GeomGraph":
        adj = [set() for _ in range(inst.n)]
        for a, b in edges:
            if a == b:
                raise ValueError(f"self loop at {a}")
            adj[a].add(b)
            adj[b].add(a)
        return cls(inst, tuple(tuple(sorted(s)) for s in adj), kind)

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset((u, v) for u, nb in enumerate(self.adjacency) for v in nb if u < v)

    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.edge_set)

    def has_edge(self, a: int, b: int) -> bool:
        return _edge(a, b) in self.edge_set

    def weight(self, a: int, b: int) -> float:
        return self.instance.length(a, b)

    def to_json(self) -> dict:
        return {"kind": self.kind, "n": self.instance.n, "edges": [list(e) for e in self.edges()]}


def graph_from_json(inst: Instance, obj: dict) -> GeomGraph:
    if obj.get("n", inst.n) != inst.n:
        raise ValueError("graph and instance disagree on vertex count")
    return GeomGraph.from_edges(inst, (tuple(e) for e in obj["edges"]), obj["kind"])


@dataclass(frozen=True)
class Path:
    vertices: tuple[int, ...]
    length: float

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [_edge(a, b) for a, b in zip(self.vertices, self.vertices[1:])]


# --- random instances -------------------------------------------------------


def _hull_size(coords) -> int:
    from .triangulation import convex_hull

    return len(convex_hull(coords))


def random_points(n: int, rng: random.Random, grid: int = 10 ** 6,
                  check_cocircular: bool | None = None) -> list[tuple[int, int]]:
    """Integer points in general position for six cones, drawn uniformly."""
    from math import gcd

    if check_cocircular is None:
        check_cocircular = n <= 200
    pts: list[tuple[int, int]] = []
    ys: set[int] = set()
    while len(pts) < n:
        p = (rng.randrange(grid), rng.randrange(grid))
        if p[1] in ys:
            continue
        dirs = set()
        ok = True
        for q in pts:
            dx, dy = q[0] - p[0], q[1] - p[1]
            g = gcd(dx, dy)
            key = (dx // g, dy // g)
            if key[0] < 0 or (key[0] == 0 and key[1] < 0):
                key = (-key[0], -key[1])
            if key in dirs:
                ok = False
                break
            dirs.add(key)
        if ok and check_cocircular:
            ok = not _cocircular_with_existing(p, pts)
        if ok:
            pts.append(p)
            ys.add(p[1])
    return pts


def _cocircular_with_existing(p, pts) -> bool:
    from math import gcd

    px, py = p
    m = len(pts)
    for i in range(m):
        ax, ay = pts[i]
        seen = set()
        for k in range(i + 1, m):
            cx, cy = pts[k]
            ux, uy, vx, vy = ax - cx, ay - cy, px - cx, py - cy
            cr = ux * vy - uy * vx
            if cr == 0:
                continue
            dt = ux * vx + uy * vy
            g = gcd(dt, cr)
            if cr < 0:
                g = -g
            key = (dt // g, cr // g)
            if key in seen:
                return True
            seen.add(key)
    return False


def random_instance(n: int, seed: int = 0, density: float = 0.0, grid: int = 10 ** 6) -> Instance:
    """Seeded random instance.

    ``density`` is the fraction of a maximal non-crossing constraint set to
    keep; constraints are drawn greedily from shuffled vertex pairs, so
    ``density = 1`` yields a maximal set (a triangulation's worth).
    """
    if n < 2:
        raise ValueError("need at least two points")
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"constraint density must lie in [0, 1], got {density}")
    rng = random.Random(seed)
    coords = random_points(n, rng, grid)
    maximal = 3 * n - 3 - _hull_size(coords) if n >= 3 else 1
    target = round(density * maximal)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    rng.shuffle(pairs)
    chosen: list[tuple[int, int]] = []
    for a, b in pairs:
        if len(chosen) >= target:
            break
        seg = (coords[a], coords[b])
        if any(properly_intersects(seg, (coords[x], coords[y])) for x, y in chosen):
            continue
        chosen.append((a, b))
    pts = tuple(Point(i, Fraction(x), Fraction(y)) for i, (x, y) in enumerate(coords))
    return Instance(pts, tuple(chosen))
