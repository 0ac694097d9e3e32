"""Planar subdivision induced by a set of segments, with point location.

Input segments may cross, touch, overlap, or repeat; they are grouped by
carrier line, fused, and split into interior-disjoint pieces, which feed
the trapezoidal map.  A rational shear x' = x + y/q (q chosen so all
vertices get distinct sheared x) removes every vertical-line degeneracy
while preserving orientation, containment and faces.

On top of the subdivision sits the triangle locator: per face, the number
of triangles containing it (computed by differencing memberships across
edges, walking the dual graph once) plus an optional caller aggregate.
"""

from __future__ import annotations

from collections import defaultdict

from gmpy2 import mpq

from .geom_core import LEFT, Point, orient
from .trapmap import OnEdge, TrapMap

__all__ = ["CapacityError", "OnEdge", "Subdivision", "FacePayload",
           "LocatorIndex", "build", "locate", "traverse"]

MAX_CARRIERS = 1500
MAX_PIECES = 250_000


class CapacityError(Exception):
    """The structure would exceed the configured size budget."""


def _carrier_key(a: Point, b: Point):
    A = b.y - a.y
    B = a.x - b.x
    C = -(A * a.x + B * a.y)
    if A != 0:
        return (1, B / A, C / A)
    return (0, 1, C / B)


def _param_of(key, p: Point):
    return p.y if key[0] == 1 else p.x


def _point_at(key, t):
    if key[0] == 1:
        return Point(-key[1] * t - key[2], t)
    return Point(t, -key[2])


def _carrier_meet(k1, k2):
    a1, b1, c1 = k1
    a2, b2, c2 = k2
    det = a1 * b2 - a2 * b1
    if det == 0:
        return None
    return Point((b1 * c2 - b2 * c1) / det, (a2 * c1 - a1 * c2) / det)


class Subdivision:
    """Arrangement faces of a segment soup, with O(log) location."""

    def __init__(self, inputs, seed=0, max_carriers=MAX_CARRIERS,
                 max_pieces=MAX_PIECES):
        """inputs: iterable of (Point a, Point b, tag)."""
        carriers = {}
        for a, b, tag in inputs:
            key = _carrier_key(a, b)
            t1, t2 = _param_of(key, a), _param_of(key, b)
            if t1 > t2:
                t1, t2 = t2, t1
            carriers.setdefault(key, []).append((t1, t2, tag))
        if len(carriers) > max_carriers:
            raise CapacityError(
                f"{len(carriers)} carrier lines exceed the cap {max_carriers}")

        merged = {}   # key -> list of disjoint (lo, hi), ascending
        cuts = {}     # key -> set of params
        for key, ivals in carriers.items():
            ivals.sort(key=lambda iv: (iv[0], iv[1]))
            out = []
            for lo, hi, _ in ivals:
                if out and lo <= out[-1][1]:
                    if hi > out[-1][1]:
                        out[-1] = (out[-1][0], hi)
                else:
                    out.append((lo, hi))
            merged[key] = out
            cs = set()
            for lo, hi, _ in ivals:
                cs.add(lo)
                cs.add(hi)
            cuts[key] = cs

        def inside(key, t):
            for lo, hi in merged[key]:
                if lo <= t <= hi:
                    return True
            return False

        keys = list(carriers.keys())
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                pt = _carrier_meet(keys[i], keys[j])
                if pt is None:
                    continue
                ti = _param_of(keys[i], pt)
                tj = _param_of(keys[j], pt)
                if inside(keys[i], ti) and inside(keys[j], tj):
                    cuts[keys[i]].add(ti)
                    cuts[keys[j]].add(tj)

        # pieces per carrier, with the input tags covering each
        piece_pts = []    # (Point, Point) unsheared
        piece_tags = []   # list of tags
        vertices = set()
        for key in keys:
            params = sorted(cuts[key])
            ivals = sorted(carriers[key], key=lambda iv: (iv[0], iv[1]))
            for u, v in zip(params, params[1:]):
                mid = (u + v) / 2
                if not inside(key, mid):
                    continue
                tags = [tag for lo, hi, tag in ivals if lo <= mid <= hi]
                pa, pb = _point_at(key, u), _point_at(key, v)
                piece_pts.append((pa, pb))
                piece_tags.append(tags)
                vertices.add(pa.key())
                vertices.add(pb.key())
        if len(piece_pts) > max_pieces:
            raise CapacityError(
                f"{len(piece_pts)} pieces exceed the cap {max_pieces}")

        # rational shear making all vertex x distinct
        q = 1000003
        verts = [Point(x, y) for x, y in sorted(vertices)]
        while True:
            lam = mpq(1, q)
            sheared = {v.x + lam * v.y for v in verts}
            if len(sheared) == len(verts):
                break
            q += 1
        self.lam = lam

        sh_pieces = []
        self.piece_lr = []
        for idx, (pa, pb) in enumerate(piece_pts):
            sa = Point(pa.x + lam * pa.y, pa.y)
            sb = Point(pb.x + lam * pb.y, pb.y)
            if sa.x > sb.x:
                sa, sb = sb, sa
                pa, pb = pb, pa
            sh_pieces.append((sa, sb, idx))
            self.piece_lr.append((pa, pb))
        self.piece_tags = piece_tags

        self.tm = TrapMap(sh_pieces, seed=seed)
        self.face_count = self.tm.assign_faces()
        self.outer_face = None
        face_rep_trap = [None] * self.face_count
        for t in self.tm.traps:
            if t.top is None or t.bottom is None:
                self.outer_face = t.face
            if face_rep_trap[t.face] is None:
                face_rep_trap[t.face] = t
        self.face_reps = [self.unshear(self.tm.rep_point(t))
                          for t in face_rep_trap]

    def unshear(self, p: Point) -> Point:
        return Point(p.x - self.lam * p.y, p.y)

    def shear(self, p: Point) -> Point:
        return Point(p.x + self.lam * p.y, p.y)

    def locate_trap(self, p: Point):
        return self.tm.locate(self.shear(p))

    def locate_face(self, p: Point) -> int:
        return self.locate_trap(p).face


def traverse(sub: Subdivision, deltas, apply, on_face):
    """Depth-first walk of the trapezoid dual graph with apply/undo.

    ``deltas``: per piece index, a list of (item, sign) toggled when
    crossing the piece from below to above (reversed going down);
    ``apply(delta, down)`` mutates the caller's membership state.  For
    each face, ``on_face(face_id, trap)`` fires exactly once, with the
    state of the tree path to that face applied.  The walk starts at a
    world-boundary trap, where the state is empty by construction.
    """
    _walk(sub, deltas, apply, on_face)


class FacePayload:
    __slots__ = ("containing_count", "extra")

    def __init__(self, containing_count, extra=None):
        self.containing_count = containing_count
        self.extra = extra


class LocatorIndex:
    __slots__ = ("sub", "payloads")

    def __init__(self, sub, payloads):
        self.sub = sub
        self.payloads = payloads

    def locate(self, p: Point) -> FacePayload:
        return self.payloads[self.sub.locate_face(p)]


def build(triangles, aggregator=None, seed=0, max_carriers=MAX_CARRIERS,
          max_pieces=MAX_PIECES) -> LocatorIndex:
    """Locator over the arrangement of all triangle edges.

    Per face: how many triangles contain it, plus ``aggregator(ids)``
    where ids is the frozenset of containing triangle indexes.
    """
    inputs = []
    for ti, tri in enumerate(triangles):
        c = tri.corners
        for k in range(3):
            a, b, opp = c[k], c[(k + 1) % 3], c[(k + 2) % 3]
            inputs.append((a, b, (ti, opp)))
    sub = Subdivision(inputs, seed=seed, max_carriers=max_carriers,
                      max_pieces=max_pieces)

    deltas = []
    for idx, tags in enumerate(sub.piece_tags):
        l, r = sub.piece_lr[idx]
        d = []
        for ti, opp in tags:
            d.append((ti, 1 if orient(l, r, opp) == LEFT else -1))
        deltas.append(d)

    current = defaultdict(int)   # triangle id -> boundary crossing depth
    payloads = [None] * sub.face_count

    def apply(d, down):
        for item, sgn in d:
            current[item] += -sgn if down else sgn

    def on_face(face, _trap):
        ids = frozenset(k for k, v in current.items() if v > 0)
        payloads[face] = FacePayload(
            len(ids), aggregator(ids) if aggregator else None)

    _walk(sub, deltas, apply, on_face)
    return LocatorIndex(sub, payloads)


def _walk(sub: Subdivision, deltas, apply, on_face):
    """DFS with proper undo on backtrack (iterative)."""
    adj = defaultdict(list)
    for t1, t2 in sub.tm.wall_adjacencies():
        adj[t1.index].append((t2.index, None, False))
        adj[t2.index].append((t1.index, None, False))
    for tb, ta, piece in sub.tm.edge_adjacencies():
        d = deltas[piece.index]
        adj[tb.index].append((ta.index, d, False))
        adj[ta.index].append((tb.index, d, True))

    traps = sub.tm.traps
    start = next(t.index for t in traps if t.top is None or t.bottom is None)
    seen_traps = [False] * len(traps)
    seen_faces = [False] * sub.face_count

    def enter(idx):
        t = traps[idx]
        if not seen_faces[t.face]:
            seen_faces[t.face] = True
            on_face(t.face, t)

    seen_traps[start] = True
    enter(start)
    stack = [(start, iter(adj[start]), None, False)]
    while stack:
        _, it, _, _ = stack[-1]
        pushed = False
        for tj, d, down in it:
            if seen_traps[tj]:
                continue
            seen_traps[tj] = True
            if d is not None:
                apply(d, down)
            enter(tj)
            stack.append((tj, iter(adj[tj]), d, down))
            pushed = True
            break
        if not pushed:
            _, _, d, down = stack.pop()
            if d is not None:
                apply(d, not down)


def locate(index: LocatorIndex, p: Point) -> FacePayload:
    return index.locate(p)
