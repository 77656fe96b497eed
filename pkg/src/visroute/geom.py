"""Exact geometric primitives.

Every predicate here works on exact numbers (``int`` or ``Fraction``).
Algorithms elsewhere in the package run the predicates on an integer
frame obtained by scaling all coordinates of an instance by a common
denominator, which keeps the arithmetic exact and fast.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence, Tuple, Union

Number = Union[int, Fraction]
XY = Tuple[Number, Number]


class DegeneracyError(ValueError):
    """Raised when an input violates the general-position assumption."""


@dataclass(frozen=True)
class Point:
    id: int
    x: Fraction
    y: Fraction

    @property
    def xy(self) -> tuple[Fraction, Fraction]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        if self.a.id == self.b.id:
            raise ValueError(f"degenerate segment on vertex {self.a.id}")

    @property
    def ends(self) -> tuple[XY, XY]:
        return (self.a.xy, self.b.xy)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


@dataclass(frozen=True)
class Sqrt3Scalar:
    """The number ``p + q*sqrt(3)`` with rational ``p`` and ``q``."""

    p: Fraction = Fraction(0)
    q: Fraction = Fraction(0)

    def sign(self) -> int:
        sp, sq = _sign(self.p), _sign(self.q)
        if sp >= 0 and sq >= 0:
            return 1 if (sp or sq) else 0
        if sp <= 0 and sq <= 0:
            return -1
        # mixed signs: compare p^2 against 3 q^2
        d = _sign(self.p * self.p - 3 * self.q * self.q)
        return d if sp > 0 else -d

    def __add__(self, other: "Sqrt3Scalar") -> "Sqrt3Scalar":
        return Sqrt3Scalar(self.p + other.p, self.q + other.q)

    def __sub__(self, other: "Sqrt3Scalar") -> "Sqrt3Scalar":
        return Sqrt3Scalar(self.p - other.p, self.q - other.q)

    def __neg__(self) -> "Sqrt3Scalar":
        return Sqrt3Scalar(-self.p, -self.q)

    def __lt__(self, other: "Sqrt3Scalar") -> bool:
        return (self - other).sign() < 0

    def __le__(self, other: "Sqrt3Scalar") -> bool:
        return (self - other).sign() <= 0

    def __gt__(self, other: "Sqrt3Scalar") -> bool:
        return (self - other).sign() > 0

    def __ge__(self, other: "Sqrt3Scalar") -> bool:
        return (self - other).sign() >= 0

    def __float__(self) -> float:
        return float(self.p) + float(self.q) * 3 ** 0.5


def cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def orient(p: XY, q: XY, r: XY) -> int:
    """Sign of (q - p) x (r - p): +1 for a left turn, -1 right, 0 collinear."""
    v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (v > 0) - (v < 0)


def properly_intersects(s1: Sequence[XY], s2: Sequence[XY]) -> bool:
    """True iff the segments cross at a point interior to both."""
    a, b = s1
    c, d = s2
    o1 = orient(a, b, c)
    o2 = orient(a, b, d)
    if o1 == 0 or o2 == 0 or o1 == o2:
        return False
    o3 = orient(c, d, a)
    o4 = orient(c, d, b)
    return o3 != 0 and o4 != 0 and o3 != o4


def segment_crosses_point_interior(s: Sequence[XY], p: XY) -> bool:
    a, b = s
    if orient(a, b, p) != 0 or p == a or p == b:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def on_closed_segment(s: Sequence[XY], p: XY) -> bool:
    a, b = s
    if orient(a, b, p) != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def segments_touch(s1: Sequence[XY], s2: Sequence[XY]) -> bool:
    """Closed-segment intersection test (any common point counts)."""
    a, b = s1
    c, d = s2
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4):
        return True
    return (
        (o1 == 0 and on_closed_segment(s1, c))
        or (o2 == 0 and on_closed_segment(s1, d))
        or (o3 == 0 and on_closed_segment(s2, a))
        or (o4 == 0 and on_closed_segment(s2, b))
    )


def point_in_closed_triangle(a: XY, b: XY, c: XY, p: XY) -> bool:
    o = orient(a, b, c)
    o1, o2, o3 = orient(a, b, p), orient(b, c, p), orient(c, a, p)
    return o1 != -o and o2 != -o and o3 != -o


def segment_meets_triangle(a: XY, b: XY, c: XY, s: XY, t: XY) -> bool:
    """Does the closed segment st meet the closed triangle abc?"""
    if point_in_closed_triangle(a, b, c, s) or point_in_closed_triangle(a, b, c, t):
        return True
    seg = (s, t)
    return segments_touch(seg, (a, b)) or segments_touch(seg, (b, c)) or segments_touch(seg, (c, a))


def open_segment_meets_triangle(a: XY, b: XY, c: XY, s: XY, t: XY) -> bool:
    """Does the open segment st meet the closed triangle abc?

    Clips st against the three closed half-planes of the triangle; a contact
    only at s or t does not count.
    """
    if orient(a, b, c) < 0:
        b, c = c, b
    lo, hi = Fraction(0), Fraction(1)
    for p, q in ((a, b), (b, c), (c, a)):
        f0 = cross(p[0], p[1], q[0], q[1], s[0], s[1])
        f1 = cross(p[0], p[1], q[0], q[1], t[0], t[1])
        # need f0 + lam * (f1 - f0) >= 0
        d = f1 - f0
        if d == 0:
            if f0 < 0:
                return False
        elif d > 0:
            lo = max(lo, Fraction(-f0, d))
        else:
            hi = min(hi, Fraction(-f0, d))
        if lo > hi:
            return False
    return hi > 0 and lo < 1 and not (lo == hi and lo in (0, 1))


def incircle(a: XY, b: XY, c: XY, d: XY) -> int:
    """+1 iff d lies strictly inside the circle through a, b, c (ccw)."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    det = (
        adx * (bdy * cd - bd * cdy)
        - ady * (bdx * cd - bd * cdx)
        + ad * (bdx * cdy - bdy * cdx)
    )
    return (det > 0) - (det < 0)


def crossing_point(a: XY, b: XY, s: XY, t: XY) -> tuple[Fraction, Fraction] | None:
    """Intersection of segment ab with line st, if ab crosses it transversally."""
    oa = (t[0] - s[0]) * (a[1] - s[1]) - (t[1] - s[1]) * (a[0] - s[0])
    ob = (t[0] - s[0]) * (b[1] - s[1]) - (t[1] - s[1]) * (b[0] - s[0])
    if oa == ob or (oa > 0 and ob > 0) or (oa < 0 and ob < 0):
        return None
    mu = Fraction(oa, 1) / (oa - ob)
    return (a[0] + (b[0] - a[0]) * mu, a[1] + (b[1] - a[1]) * mu)


# --- general position -------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str  # "duplicate", "collinear", "ray_parallel", "bisector_perpendicular", "cocircular"
    ids: tuple[int, ...]

    def __str__(self):
        return f"{self.kind}{self.ids}"


def _direction_key(dx: int, dy: int) -> tuple[int, int]:
    g = gcd(dx, dy)
    dx, dy = dx // g, dy // g
    if dx < 0 or (dx == 0 and dy < 0):
        dx, dy = -dx, -dy
    return dx, dy


def integer_frame(xys: Iterable[tuple[Fraction, Fraction]]) -> tuple[list[tuple[int, int]], int]:
    """Scale rational coordinates by their common denominator."""
    xys = [(Fraction(x), Fraction(y)) for x, y in xys]
    scale = 1
    for x, y in xys:
        for v in (x, y):
            scale = scale * v.denominator // gcd(scale, v.denominator)
    return [(int(x * scale), int(y * scale)) for x, y in xys], scale


def _six_cone_direction_violations(dx: int, dy: int) -> list[str]:
    """Which m = 6 degeneracies does direction (dx, dy) produce?"""
    out = []
    # ray directions (0, 60, 120 degrees): cross with (1, 0), (1, sqrt3), (-1, sqrt3)
    on_ray = (
        Sqrt3Scalar(Fraction(dy)).sign() == 0
        or Sqrt3Scalar(Fraction(dy), Fraction(-dx)).sign() == 0
        or Sqrt3Scalar(Fraction(-dy), Fraction(-dx)).sign() == 0
    )
    if on_ray:
        out.append("ray_parallel")
    # perpendicular to a bisector (90, 30, 150 degrees): dot product vanishes
    perp = (
        Sqrt3Scalar(Fraction(dy)).sign() == 0
        or Sqrt3Scalar(Fraction(dy), Fraction(dx)).sign() == 0
        or Sqrt3Scalar(Fraction(dy), Fraction(-dx)).sign() == 0
    )
    if perp:
        out.append("bisector_perpendicular")
    return out


def _general_cone_direction_violations(dx: int, dy: int, m: int) -> list[str]:
    import mpmath

    out = []
    with mpmath.workprec(128):
        # angle of the direction modulo pi, measured from the +x axis
        ang = mpmath.atan2(dy, dx) % mpmath.pi
        half = mpmath.pi / m
        tol = mpmath.mpf(2) ** -100
        for k in range(m):
            ray = (mpmath.pi / 2 + half + 2 * k * half) % mpmath.pi
            perp = (mpmath.pi / 2 + 2 * k * half + mpmath.pi / 2) % mpmath.pi
            for kind, ref in (("ray_parallel", ray), ("bisector_perpendicular", perp)):
                d = abs(ang - ref)
                d = min(d, mpmath.pi - d)
                if d < tol and kind not in out:
                    out.append(kind)
    return out


def validate_general_position(points: Sequence[Point], m: int = 6,
                              check_cocircular: bool = True) -> list[Violation]:
    """Report every general-position violation among ``points``.

    Directions are tested exactly in Q[sqrt 3] for ``m == 6``; other cone
    counts use a 128-bit evaluation and are approximate.
    """
    if m < 3:
        raise ValueError("cone count must be at least 3")
    coords, _ = integer_frame(p.xy for p in points)
    ids = [p.id for p in points]
    n = len(coords)
    found: dict[tuple[str, tuple[int, ...]], Violation] = {}

    def report(kind, idx):
        key = (kind, tuple(sorted(ids[i] for i in idx)))
        found.setdefault(key, Violation(*key))

    for i in range(n):
        by_dir = defaultdict(list)
        for j in range(i + 1, n):
            dx = coords[j][0] - coords[i][0]
            dy = coords[j][1] - coords[i][1]
            if dx == 0 and dy == 0:
                report("duplicate", (i, j))
                continue
            kinds = (_six_cone_direction_violations(dx, dy) if m == 6
                     else _general_cone_direction_violations(dx, dy, m))
            for kind in kinds:
                report(kind, (i, j))
            by_dir[_direction_key(dx, dy)].append(j)
        for js in by_dir.values():
            for a in range(len(js)):
                for b in range(a + 1, len(js)):
                    report("collinear", (i, js[a], js[b]))

    if check_cocircular:
        # inscribed-angle key: (a-c).(b-c) / (a-c)x(b-c) is constant on a circle through a, b
        for i in range(n):
            ax, ay = coords[i]
            for j in range(i + 1, n):
                bx, by = coords[j]
                groups = defaultdict(list)
                for k in range(j + 1, n):
                    cx, cy = coords[k]
                    ux, uy, vx, vy = ax - cx, ay - cy, bx - cx, by - cy
                    cr = ux * vy - uy * vx
                    if cr == 0:
                        continue
                    dt = ux * vx + uy * vy
                    g = gcd(dt, cr)
                    if cr < 0:
                        g = -g
                    groups[(dt // g, cr // g)].append(k)
                for ks in groups.values():
                    for a in range(len(ks)):
                        for b in range(a + 1, len(ks)):
                            report("cocircular", (i, j, ks[a], ks[b]))
    return sorted(found.values(), key=lambda v: (v.kind, v.ids))
