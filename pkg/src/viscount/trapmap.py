"""Randomized incremental trapezoidal map with point location.

Input is a set of interior-disjoint "pieces" (segments pre-split at every
mutual intersection, so they can share endpoints but never cross or touch
in their interiors), with every distinct vertex having a distinct x
coordinate.  Callers get that guarantee by applying a rational shear
x' = x + lam*y before building (shears preserve orientation, faces and
containment, so results translate back verbatim).

The map exposes the trapezoids, O(log) point location, the vertical-wall
adjacencies (crossing a wall stays inside the same arrangement face) and
the piece adjacencies (crossing a piece moves to the face on the other
side), which is everything face extraction and census differencing need.
"""

from __future__ import annotations

import random
from collections import defaultdict

from .geom_core import Point

X, Y, LEAF = 0, 1, 2


class OnEdge(Exception):
    """Query point lies exactly on an input piece."""


class Piece:
    __slots__ = ("l", "r", "index")

    def __init__(self, l: Point, r: Point, index: int):
        # l must precede r in x, strictly
        assert l.x < r.x
        self.l = l
        self.r = r
        self.index = index

    def y_at(self, x):
        return self.l.y + (x - self.l.x) * (self.r.y - self.l.y) \
            / (self.r.x - self.l.x)

    def __repr__(self):
        return f"Piece({self.l}-{self.r}, #{self.index})"


def _side(p: Piece, q: Point):
    """>0 above the piece's carrier, <0 below, 0 on it."""
    return (p.r.x - p.l.x) * (q.y - p.l.y) - (p.r.y - p.l.y) * (q.x - p.l.x)


class _Node:
    __slots__ = ("kind", "data", "a", "b")

    def __init__(self, kind, data, a=None, b=None):
        self.kind = kind
        self.data = data
        self.a = a  # left / above
        self.b = b  # right / below


class Trap:
    __slots__ = ("top", "bottom", "leftp", "rightp", "node",
                 "ul", "ll", "ur", "lr", "dead", "index", "face")

    def __init__(self, top, bottom, leftp, rightp):
        self.top = top          # Piece above, None = world boundary
        self.bottom = bottom    # Piece below, None = world boundary
        self.leftp = leftp
        self.rightp = rightp
        self.node = _Node(LEAF, self)
        self.ul = self.ll = self.ur = self.lr = None
        self.dead = False
        self.index = -1
        self.face = -1

    def kill(self):
        self.dead = True

    def top_y(self, x, hi):
        return self.top.y_at(x) if self.top is not None else hi

    def bottom_y(self, x, lo):
        return self.bottom.y_at(x) if self.bottom is not None else lo


class TrapMap:
    def __init__(self, pieces, seed=0):
        """pieces: iterable of (Point, Point, index) or Piece."""
        self.pieces = []
        for p in pieces:
            if not isinstance(p, Piece):
                a, b, idx = p
                if a.x > b.x:
                    a, b = b, a
                p = Piece(a, b, idx)
            self.pieces.append(p)
        xs = [c for p in self.pieces for c in (p.l.x, p.r.x)]
        ys = [c for p in self.pieces for c in (p.l.y, p.r.y)]
        if not xs:
            xs = ys = [0]
        self._xlo, self._xhi = min(xs) - 1, max(xs) + 1
        self._ylo, self._yhi = min(ys) - 1, max(ys) + 1
        world = Trap(None, None, Point(self._xlo, self._ylo),
                     Point(self._xhi, self._yhi))
        self._root = world.node
        self._all = [world]
        order = list(self.pieces)
        random.Random(seed ^ 0x5eed7a11).shuffle(order)
        for p in order:
            self._insert(p)
        self.traps = [t for t in self._all if not t.dead]
        for i, t in enumerate(self.traps):
            t.index = i

    # -- location ----------------------------------------------------------

    def _descend(self, q: Point, s: Piece = None):
        node = self._root
        while node.kind != LEAF:
            if node.kind == X:
                node = node.a if q.x < node.data else node.b
            else:
                o = _side(node.data, q)
                if o == 0:
                    if s is None:
                        p = node.data
                        if p.l.x <= q.x <= p.r.x:
                            raise OnEdge(q)
                        o = 1  # on the carrier but off the piece; either side
                    else:
                        # q is a shared endpoint; direct by where s heads
                        o = _side(node.data, s.r)
                        assert o != 0, "collinear overlap reached the map"
                node = node.a if o > 0 else node.b
        return node.data

    def locate(self, q: Point) -> Trap:
        t = self._descend(q)
        if q == t.leftp or q == t.rightp:
            raise OnEdge(q)
        for bound in (t.top, t.bottom):
            if bound is not None and _side(bound, q) == 0 \
                    and bound.l.x <= q.x <= bound.r.x:
                raise OnEdge(q)
        return t

    # -- construction ------------------------------------------------------

    def _insert(self, s: Piece):
        d = self._descend(s.l, s)
        walk = [d]
        while s.r.x > walk[-1].rightp.x:
            d = walk[-1]
            nxt = d.lr if _side(s, d.rightp) > 0 else d.ur
            assert nxt is not None, "walk fell off the map"
            walk.append(nxt)

        first_d, last_d = walk[0], walk[-1]
        L = R = None
        if s.l.x > first_d.leftp.x:
            L = Trap(first_d.top, first_d.bottom, first_d.leftp, s.l)
        if s.r.x < last_d.rightp.x:
            R = Trap(last_d.top, last_d.bottom, s.r, last_d.rightp)

        above = below = None
        for i, d in enumerate(walk):
            first = i == 0
            last = i == len(walk) - 1
            rp = s.r if last else d.rightp

            if above is not None and above.top is d.top:
                above.rightp = rp
                merged_a = True
            else:
                new_a = Trap(d.top, s, s.l if first else d.leftp, rp)
                if first:
                    new_a.ul = L if L is not None else d.ul
                    new_a.ll = None
                else:
                    new_a.ul = d.ul
                    new_a.ll = above
                    if above is not None:
                        # the old upper chain ends at this wall; its upper
                        # right continuation is the trap we did not walk into
                        ext = walk[i - 1].ur
                        above.ur = ext
                        if ext is not None:
                            ext.ul = above
                        above.lr = new_a
                    if d.ul is not None:
                        d.ul.ur = new_a
                above = new_a
                merged_a = False

            if below is not None and below.bottom is d.bottom:
                below.rightp = rp
                merged_b = True
            else:
                new_b = Trap(s, d.bottom, s.l if first else d.leftp, rp)
                if first:
                    new_b.ll = L if L is not None else d.ll
                    new_b.ul = None
                else:
                    new_b.ll = d.ll
                    new_b.ul = below
                    if below is not None:
                        ext = walk[i - 1].lr
                        below.lr = ext
                        if ext is not None:
                            ext.ll = below
                        below.ur = new_b
                    if d.ll is not None:
                        d.ll.lr = new_b
                below = new_b
                merged_b = False

            if first:
                if L is not None:
                    L.ul, L.ll = d.ul, d.ll
                    L.ur, L.lr = above, below
                    if d.ul is not None:
                        d.ul.ur = L
                    if d.ll is not None:
                        d.ll.lr = L
                else:
                    if d.ul is not None and not merged_a:
                        d.ul.ur = above
                    if d.ll is not None and not merged_b:
                        d.ll.lr = below
            if last:
                if R is not None:
                    R.ur, R.lr = d.ur, d.lr
                    R.ul, R.ll = above, below
                    above.ur, above.lr = R, None
                    below.lr, below.ur = R, None
                    if d.ur is not None:
                        d.ur.ul = R
                    if d.lr is not None:
                        d.lr.ll = R
                else:
                    above.ur, above.lr = d.ur, None
                    below.lr, below.ur = d.lr, None
                    if d.ur is not None:
                        d.ur.ul = above
                    if d.lr is not None:
                        d.lr.ll = below

            # rebuild this trapezoid's leaf in place
            ynode = _Node(Y, s, above.node, below.node)
            sub = ynode
            if last and R is not None:
                sub = _Node(X, s.r.x, sub, R.node)
            if first and L is not None:
                sub = _Node(X, s.l.x, L.node, sub)
            node = d.node
            node.kind, node.data, node.a, node.b = \
                sub.kind, sub.data, sub.a, sub.b
            d.kill()
            if first and L is not None:
                self._all.append(L)
            if not merged_a:
                self._all.append(above)
            if not merged_b:
                self._all.append(below)
            if last and R is not None:
                self._all.append(R)

    # -- adjacency ---------------------------------------------------------

    def wall_adjacencies(self):
        """Pairs of live traps sharing a positive-length vertical wall."""
        lo, hi = self._ylo - 1, self._yhi + 1
        left_by_x = defaultdict(list)
        right_by_x = defaultdict(list)
        for t in self.traps:
            x = t.leftp.x
            left_by_x[x].append((t, t.bottom_y(x, lo), t.top_y(x, hi)))
            x = t.rightp.x
            right_by_x[x].append((t, t.bottom_y(x, lo), t.top_y(x, hi)))
        out = []
        for x, rights in right_by_x.items():
            lefts = left_by_x.get(x)
            if not lefts:
                continue
            for t1, lo1, hi1 in rights:
                for t2, lo2, hi2 in lefts:
                    if max(lo1, lo2) < min(hi1, hi2):
                        out.append((t1, t2))
        return out

    def edge_adjacencies(self):
        """Triples (below, above, piece) for traps meeting across a piece."""
        above_of = defaultdict(list)   # piece -> traps having it as bottom
        below_of = defaultdict(list)   # piece -> traps having it as top
        for t in self.traps:
            if t.bottom is not None:
                above_of[id(t.bottom)].append(t)
            if t.top is not None:
                below_of[id(t.top)].append(t)
        out = []
        for p in self.pieces:
            ups = above_of.get(id(p), ())
            downs = below_of.get(id(p), ())
            for ta in ups:
                for tb in downs:
                    if max(ta.leftp.x, tb.leftp.x) < min(ta.rightp.x,
                                                         tb.rightp.x):
                        out.append((tb, ta, p))
        return out

    def face_count(self):
        return 1 + max(t.face for t in self.traps) if self.traps else 0

    def assign_faces(self):
        """Union traps across walls; returns the number of faces."""
        n = len(self.traps)
        parent = list(range(n))

        def find(i):
            r = i
            while parent[r] != r:
                r = parent[r]
            while parent[i] != r:
                parent[i], i = r, parent[i]
            return r

        for t1, t2 in self.wall_adjacencies():
            r1, r2 = find(t1.index), find(t2.index)
            if r1 != r2:
                parent[r1] = r2
        label = {}
        for t in self.traps:
            r = find(t.index)
            if r not in label:
                label[r] = len(label)
            t.face = label[r]
        return len(label)

    def rep_point(self, t: Trap) -> Point:
        """A point strictly inside the trapezoid."""
        xm = (t.leftp.x + t.rightp.x) / 2
        ym = (t.bottom_y(xm, self._ylo - 1) + t.top_y(xm, self._yhi + 1)) / 2
        return Point(xm, ym)
