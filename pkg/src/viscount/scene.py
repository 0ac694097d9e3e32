"""Scene model: validation, random generation, text persistence."""

from __future__ import annotations

import random

from gmpy2 import mpq

from .geom_core import (COLLINEAR, Point, Segment, orient, point_on_segment,
                        rat, segment_intersection)


class ParseError(Exception):
    def __init__(self, message, line, column=1):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


class GenerationStalled(Exception):
    """Rejection sampling failed to place all segments (density too high)."""


class Scene:
    """A bounding box plus n pairwise-disjoint segments strictly inside it.

    Segments carry ids 0..n-1; the four box sides get ids n..n+3 in the
    order bottom, right, top, left.
    """

    def __init__(self, bbox, segments):
        xmin, ymin, xmax, ymax = (rat(v) for v in bbox)
        if xmin >= xmax or ymin >= ymax:
            raise ValueError("empty bounding box")
        self.bbox = (xmin, ymin, xmax, ymax)
        self.segments = []
        for i, s in enumerate(segments):
            if isinstance(s, Segment):
                self.segments.append(Segment(s.a, s.b, i))
            else:
                a, b = s
                pa = a if isinstance(a, Point) else Point(*a)
                pb = b if isinstance(b, Point) else Point(*b)
                self.segments.append(Segment(pa, pb, i))
        self.n = len(self.segments)
        self._sides = None
        self._corners = None

    def corners(self):
        """Box corners, CCW: corner k joins side k and side (k+1) % 4."""
        if self._corners is None:
            xmin, ymin, xmax, ymax = self.bbox
            self._corners = (Point(xmax, ymin), Point(xmax, ymax),
                             Point(xmin, ymax), Point(xmin, ymin))
        return self._corners

    def box_sides(self):
        if self._sides is None:
            xmin, ymin, xmax, ymax = self.bbox
            bl = Point(xmin, ymin)
            br = Point(xmax, ymin)
            tr = Point(xmax, ymax)
            tl = Point(xmin, ymax)
            self._sides = (Segment(bl, br, self.n),      # bottom
                           Segment(br, tr, self.n + 1),  # right
                           Segment(tr, tl, self.n + 2),  # top
                           Segment(tl, bl, self.n + 3))  # left
        return self._sides

    def side_ids(self):
        return range(self.n, self.n + 4)

    def is_box_side(self, owner_id):
        return owner_id >= self.n

    def endpoint(self, ep_id):
        """Endpoints are numbered 2*seg_id (a) and 2*seg_id + 1 (b)."""
        s = self.segments[ep_id // 2]
        return s.a if ep_id % 2 == 0 else s.b

    def endpoint_ids(self):
        return range(2 * self.n)

    def contains_strictly(self, p: Point) -> bool:
        xmin, ymin, xmax, ymax = self.bbox
        return xmin < p.x < xmax and ymin < p.y < ymax

    def __eq__(self, other):
        if not isinstance(other, Scene) or self.bbox != other.bbox:
            return False
        return [(s.a, s.b) for s in self.segments] == \
               [(s.a, s.b) for s in other.segments]


def validate(scene: Scene):
    """Return a list of violations; empty means the scene is valid."""
    issues = []
    segs = scene.segments
    for s in segs:
        for e in s.endpoints():
            if not scene.contains_strictly(e):
                issues.append(("NOT_STRICTLY_INSIDE", s.id))
                break
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            if segment_intersection(segs[i], segs[j]) is not None:
                issues.append(("PAIR_INTERSECTS", i, j))
    seen = {}
    for eid in scene.endpoint_ids():
        p = scene.endpoint(eid)
        k = p.key()
        if k in seen:
            issues.append(("COINCIDENT_ENDPOINTS", seen[k], eid))
        else:
            seen[k] = eid
    for eid in scene.endpoint_ids():
        p = scene.endpoint(eid)
        for s in segs:
            if s.id != eid // 2 and point_on_segment(p, s):
                issues.append(("ENDPOINT_ON_SEGMENT", eid, s.id))
    return issues


def generate(n: int, bbox, seed: int, length_range=(0.05, 0.25),
             grid: int = 1000) -> Scene:
    """Deterministic rejection sampler for valid scenes.

    Candidate segments have endpoints on a grid-by-grid lattice inside the
    box and lengths within ``length_range`` (as fractions of the box
    diagonal).  Raises GenerationStalled after 10000*n consecutive
    rejections.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    xmin, ymin, xmax, ymax = (rat(v) for v in bbox)
    if n == 0:
        return Scene((xmin, ymin, xmax, ymax), [])
    rng = random.Random(seed & 0xFFFFFFFFFFFFFFFF)
    w = xmax - xmin
    h = ymax - ymin
    diag2 = w * w + h * h
    lo = rat(str(length_range[0]))
    hi = rat(str(length_range[1]))
    lo2 = lo * lo * diag2
    hi2 = hi * hi * diag2

    def rand_point():
        gx = rng.randrange(1, grid)
        gy = rng.randrange(1, grid)
        return Point(xmin + w * mpq(gx, grid), ymin + h * mpq(gy, grid))

    placed = []
    rejections = 0
    limit = 10000 * n
    while len(placed) < n:
        a = rand_point()
        b = rand_point()
        ok = a != b
        if ok:
            dx, dy = b.x - a.x, b.y - a.y
            l2 = dx * dx + dy * dy
            ok = lo2 <= l2 <= hi2
        if ok:
            cand = Segment(a, b, len(placed))
            for s in placed:
                if segment_intersection(cand, s) is not None:
                    ok = False
                    break
        if ok:
            # endpoint-on-segment / coincident endpoints are already excluded
            # by closed-segment disjointness; endpoints strictly inside the
            # box follow from the lattice bounds.
            placed.append(Segment(a, b, len(placed)))
            rejections = 0
        else:
            rejections += 1
            if rejections >= limit:
                raise GenerationStalled(
                    f"{rejections} consecutive rejections placing segment "
                    f"{len(placed) + 1} of {n}")
    return Scene((xmin, ymin, xmax, ymax), placed)


def admissible(scene: Scene, p: Point) -> bool:
    """General-position gate for query points.

    True iff p is strictly inside the box, off every segment, and not
    collinear with any two distinct scene endpoints (which makes every
    sweep event and every projection unique).
    """
    if not scene.contains_strictly(p):
        return False
    for s in scene.segments:
        if point_on_segment(p, s):
            return False
    eps = [scene.endpoint(i) for i in scene.endpoint_ids()]
    for i in range(len(eps)):
        for j in range(i + 1, len(eps)):
            if orient(p, eps[i], eps[j]) == COLLINEAR:
                return False
    return True


def _fmt(q: mpq) -> str:
    q = rat(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def save(scene: Scene) -> str:
    lines = ["vcp-scene v1"]
    lines.append("bbox " + " ".join(_fmt(v) for v in scene.bbox))
    for s in scene.segments:
        lines.append("seg " + " ".join(_fmt(v)
                                       for v in (s.a.x, s.a.y, s.b.x, s.b.y)))
    return "\n".join(lines) + "\n"


def _parse_number(tok: str, lineno: int, col: int):
    try:
        return rat(tok)
    except (ValueError, ZeroDivisionError, TypeError):
        raise ParseError(f"bad number {tok!r}", lineno, col)


def load(text: str) -> Scene:
    bbox = None
    segs = []
    lines = text.splitlines()
    if not lines or lines[0].split("#", 1)[0].strip() != "vcp-scene v1":
        raise ParseError("missing 'vcp-scene v1' header", 1)
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "bbox":
            if len(toks) != 5:
                raise ParseError("bbox needs 4 numbers", lineno)
            bbox = tuple(_parse_number(t, lineno, raw.index(t) + 1)
                         for t in toks[1:])
        elif toks[0] == "seg":
            if len(toks) != 5:
                raise ParseError("seg needs 4 numbers", lineno)
            ax, ay, bx, by = (_parse_number(t, lineno, raw.index(t) + 1)
                              for t in toks[1:])
            segs.append((Point(ax, ay), Point(bx, by)))
        else:
            raise ParseError(f"unknown directive {toks[0]!r}", lineno)
    if bbox is None:
        raise ParseError("missing bbox line", len(lines))
    return Scene(bbox, segs)
