"""Exact rational geometric primitives.

All coordinates are exact rationals (gmpy2.mpq).  Nothing in here ever
rounds; floating point is only allowed at the output boundary (CSV/SVG),
which lives elsewhere.
"""

from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq

LEFT = 1
COLLINEAR = 0
RIGHT = -1

_ZERO = mpq(0)
_ONE = mpq(1)


class DegenerateRay(Exception):
    """A ray passes exactly through a segment endpoint it was not aimed at."""


def rat(value) -> mpq:
    """Coerce to an exact rational.

    Accepts int, mpq, Fraction, and strings like "3", "-2.5" or "7/3".
    Decimal strings convert exactly (no binary rounding).
    """
    if isinstance(value, (int, type(mpq(0)))):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        s = value.strip()
        if "/" in s:
            num, den = s.split("/", 1)
            return mpq(int(num), int(den))
        if "." in s or "e" in s or "E" in s:
            return mpq(Fraction(s).numerator, Fraction(s).denominator)
        return mpq(int(s))
    if isinstance(value, float):
        f = Fraction(value)  # exact binary expansion
        return mpq(f.numerator, f.denominator)
    raise TypeError(f"cannot convert {value!r} to a rational")


class Point:
    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x = rat(x)
        self.y = rat(y)

    def __eq__(self, other):
        return isinstance(other, Point) and self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __repr__(self):
        return f"Point({self.x}, {self.y})"

    def key(self):
        return (self.x, self.y)


class Segment:
    __slots__ = ("a", "b", "id")

    def __init__(self, a: Point, b: Point, id: int = -1):
        if a == b:
            raise ValueError("degenerate segment: identical endpoints")
        self.a = a
        self.b = b
        self.id = id

    def __repr__(self):
        return f"Segment({self.a}, {self.b}, id={self.id})"

    def endpoints(self):
        return (self.a, self.b)


def orient(a: Point, b: Point, c: Point) -> int:
    """Sign of the cross product (b-a) x (c-a): LEFT, RIGHT or COLLINEAR."""
    d = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    if d > 0:
        return LEFT
    if d < 0:
        return RIGHT
    return COLLINEAR


def _on_segment_collinear(p: Point, a: Point, b: Point) -> bool:
    # p already known collinear with a,b; is it within the closed box?
    if a.x != b.x:
        lo, hi = (a.x, b.x) if a.x <= b.x else (b.x, a.x)
        return lo <= p.x <= hi
    lo, hi = (a.y, b.y) if a.y <= b.y else (b.y, a.y)
    return lo <= p.y <= hi


def point_on_segment(p: Point, s: Segment) -> bool:
    """True iff p lies on the closed segment s."""
    return orient(s.a, s.b, p) == COLLINEAR and _on_segment_collinear(p, s.a, s.b)


def segment_intersection(s: Segment, t: Segment):
    """Exact classification of the intersection of two closed segments.

    Returns None, a Point, or a Segment (collinear overlap).
    """
    p, q = s.a, s.b
    r, w = t.a, t.b
    d1 = orient(r, w, p)
    d2 = orient(r, w, q)
    d3 = orient(p, q, r)
    d4 = orient(p, q, w)

    if d1 == 0 and d2 == 0 and d3 == 0 and d4 == 0:
        # all collinear: 1-D overlap test along the dominant axis
        if p.x != q.x:
            key = lambda pt: pt.x
        else:
            key = lambda pt: pt.y
        s_lo, s_hi = sorted((p, q), key=key)
        t_lo, t_hi = sorted((r, w), key=key)
        lo = s_lo if key(s_lo) >= key(t_lo) else t_lo
        hi = s_hi if key(s_hi) <= key(t_hi) else t_hi
        if key(lo) > key(hi):
            return None
        if lo == hi:
            return lo
        return Segment(lo, hi)

    if d1 * d2 > 0 or d3 * d4 > 0:
        return None
    # proper or touching intersection: solve exactly
    dx1, dy1 = q.x - p.x, q.y - p.y
    dx2, dy2 = w.x - r.x, w.y - r.y
    denom = dx1 * dy2 - dy1 * dx2
    if denom == 0:
        # parallel non-collinear with alternating orientations: touch at endpoint
        for cand in (p, q):
            if point_on_segment(cand, t):
                return cand
        for cand in (r, w):
            if point_on_segment(cand, s):
                return cand
        return None
    tnum = (r.x - p.x) * dy2 - (r.y - p.y) * dx2
    tt = tnum / denom
    if tt < 0 or tt > 1:
        return None
    x = p.x + tt * dx1
    y = p.y + tt * dy1
    pt = Point(x, y)
    if not point_on_segment(pt, t):
        return None
    return pt


def ray_segment_param(origin: Point, direction_to: Point, s: Segment):
    """Smallest params t >= 0 with origin + t*(direction_to-origin) on s.

    Returns a list of (param, point) for the (<=2) boundary hits of the ray
    with the closed segment; for a collinear overlap the near end of the
    overlap is reported.  Empty list when the ray misses s.
    """
    dx = direction_to.x - origin.x
    dy = direction_to.y - origin.y
    sx = s.b.x - s.a.x
    sy = s.b.y - s.a.y
    denom = dx * sy - dy * sx
    if denom == 0:
        # parallel; collinear?
        if orient(origin, direction_to, s.a) != COLLINEAR:
            return []
        # collinear: project both endpoints on the ray
        hits = []
        for e in (s.a, s.b):
            if dx != 0:
                t = (e.x - origin.x) / dx
            else:
                t = (e.y - origin.y) / dy
            if t >= 0:
                hits.append((t, e))
        hits.sort(key=lambda h: h[0])
        return hits[:1]
    # solve origin + t*d = s.a + u*(s.b - s.a)
    ax = s.a.x - origin.x
    ay = s.a.y - origin.y
    t = (ax * sy - ay * sx) / denom
    u = (ax * dy - ay * dx) / denom
    # u in [0,1] and t >= 0
    if u < 0 or u > 1 or t < 0:
        return []
    return [(t, Point(origin.x + t * dx, origin.y + t * dy))]


class Hit:
    __slots__ = ("owner", "point", "param")

    def __init__(self, owner: int, point: Point, param):
        self.owner = owner
        self.point = point
        self.param = param

    def __repr__(self):
        return f"Hit(owner={self.owner}, point={self.point}, param={self.param})"


def ray_first_hit(origin: Point, through: Point, scene, skip_before,
                  allow_endpoint_hits: bool = False) -> Hit:
    """First intersection of the ray origin->through with the scene.

    Considers scene segments and the four box sides; returns the hit with
    the minimum ray parameter strictly greater than ``skip_before``.  The
    bounding box guarantees a hit exists for origins inside it.

    Raises DegenerateRay when the ray passes exactly through a segment
    endpoint other than ``through`` (at a parameter past ``skip_before``),
    unless ``allow_endpoint_hits`` is set, in which case the endpoint hit is
    treated as an ordinary hit on its segment.
    """
    if origin == through:
        raise ValueError("origin and through must differ")
    skip = rat(skip_before)
    best = None
    for s in list(scene.segments) + list(scene.box_sides()):
        for t, pt in ray_segment_param(origin, through, s):
            if t <= skip:
                continue
            if s.id < scene.n and pt != through and (pt == s.a or pt == s.b):
                if not allow_endpoint_hits:
                    raise DegenerateRay(
                        f"ray through {through} passes endpoint {pt} of segment {s.id}")
            if best is None or t < best.param:
                best = Hit(s.id, pt, t)
    if best is None:
        raise ValueError("ray escaped the bounding box (origin outside?)")
    return best
