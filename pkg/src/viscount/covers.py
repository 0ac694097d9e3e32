"""Visibility triangles: endpoint fans and per-owner segment covers.

Fans: the visibility polygon of an endpoint a is star shaped around a;
each maximal run of its boundary lying on a single owner gives one
triangle (a, run entry, run exit).  A point is inside some fan triangle
of a exactly when it sees a.

Covers: the plane is cut by every critical chord (visibility-graph edges
extended to their first hits), the segment carriers and the box.  The
count of visible subsegments c_s is constant on each face of that
arrangement.  Faces are decomposed into trapezoids and each trapezoid
into at most two triangles; every such triangle is emitted c_s(face)
times per owner s, so the number of cover triangles of owner s containing
any generic point p is exactly c_s(p).  The copies are kept implicit
(owner, count and id ranges per triangle) and materialized on demand.
"""

from __future__ import annotations

import warnings

from .geom_core import COLLINEAR, LEFT, Point, orient, ray_first_hit
from .scene import Scene
from .exact_engine import blocks, sweep_core, sweep_unchecked
from .evg import Evg
from .arrangement import (CapacityError, MAX_CARRIERS, MAX_PIECES,
                          Subdivision, traverse)

KIND_FAN = "fan"
KIND_COVER = "cover"

MAX_COPIES = 3_000_000


class Triangle:
    __slots__ = ("corners", "owner", "kind", "part_corners")

    def __init__(self, corners, owner, kind, part_corners=None):
        self.corners = corners          # tuple of 3 Points
        self.owner = owner              # endpoint id (fan) or owner id
        self.kind = kind
        # for box-side cover parts: corners of the box where this visible
        # part continues onto the adjacent side
        self.part_corners = part_corners

    def contains(self, p: Point) -> bool:
        a, b, c = self.corners
        s1 = orient(a, b, p)
        s2 = orient(b, c, p)
        s3 = orient(c, a, p)
        return (s1 >= 0 and s2 >= 0 and s3 >= 0) or \
               (s1 <= 0 and s2 <= 0 and s3 <= 0)

    def area2(self):
        a, b, c = self.corners
        v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
        return v if v >= 0 else -v


def endpoint_fan(scene: Scene, eid: int):
    """Fan triangles of the visibility polygon of endpoint ``eid``."""
    apex = scene.endpoint(eid)
    others = [s for s in scene.segments if s.id != eid // 2]
    data = sweep_core(apex, others, scene)
    tris = []
    for run in data.runs:
        if run.entry is None:
            continue
        if orient(apex, run.entry, run.exit) == COLLINEAR:
            warnings.warn(f"degenerate fan sliver at endpoint {eid} dropped")
            continue
        tris.append(Triangle((apex, run.entry, run.exit), eid, KIND_FAN))
    return tris


def build_fans(scene: Scene):
    fans = []
    for eid in scene.endpoint_ids():
        fans.extend(endpoint_fan(scene, eid))
    return fans


def _trap_triangles(sub, trap):
    """1 or 2 unsheared corner triples covering the trapezoid."""
    lo, hi = sub.tm._ylo - 1, sub.tm._yhi + 1
    xl, xr = trap.leftp.x, trap.rightp.x
    bl = Point(xl, trap.bottom_y(xl, lo))
    tl = Point(xl, trap.top_y(xl, hi))
    br = Point(xr, trap.bottom_y(xr, lo))
    tr = Point(xr, trap.top_y(xr, hi))
    bl, tl, br, tr = (sub.unshear(p) for p in (bl, tl, br, tr))
    if bl == tl:
        return [(bl, br, tr)]
    if br == tr:
        return [(bl, br, tl)]
    # diagonal bl-tr; triple 0 below it, triple 1 above
    return [(bl, br, tr), (bl, tr, tl)]


class SceneCover:
    """Critical-chord subdivision plus the implicit cover-triangle layout.

    Attributes of interest:
      fans: explicit fan Triangle list (global fan ids = positions)
      sub: the Subdivision of chords/carriers/box/fan edges
      face_profile: per subdivision face, the sweep profile at its
        representative point (None outside the box)
      rows: per refined face, the copy blocks (see _build_layout)
      total_copies: number of implicit cover triangles
    """

    def __init__(self, scene: Scene, evg: Evg, seed=0,
                 max_carriers=MAX_CARRIERS, max_pieces=MAX_PIECES,
                 max_copies=MAX_COPIES):
        self.scene = scene
        self.evg = evg
        self.fans = build_fans(scene)

        inputs = []
        for fi, tri in enumerate(self.fans):
            c = tri.corners
            for k in range(3):
                inputs.append((c[k], c[(k + 1) % 3], (fi, c[(k + 2) % 3])))
        for e in evg.edges:
            inputs.append((e.ext_a.point, e.ext_b.point, None))
        for s in scene.segments:
            inputs.append((s.a, s.b, None))
        for side in scene.box_sides():
            inputs.append((side.a, side.b, None))
        # per-side visible part counts also change when an endpoint shadow
        # sweeps across a box corner; cut along corner-endpoint sightlines
        # extended to their first hit
        for corner in scene.corners():
            for eid in scene.endpoint_ids():
                e = scene.endpoint(eid)
                if any(blocks(s, corner, e) for s in scene.segments):
                    continue
                hit = ray_first_hit(corner, e, scene, skip_before=1,
                                    allow_endpoint_hits=True)
                inputs.append((corner, hit.point, None))
        self.sub = Subdivision(inputs, seed=seed, max_carriers=max_carriers,
                               max_pieces=max_pieces)

        # exact visibility profile per face (faces inside the box only)
        self.face_profile = [None] * self.sub.face_count
        for f in range(self.sub.face_count):
            rep = self.sub.face_reps[f]
            if scene.contains_strictly(rep):
                self.face_profile[f] = sweep_unchecked(scene, rep)

        # fan membership per face, from one differencing walk
        deltas = []
        for idx, tags in enumerate(self.sub.piece_tags):
            l, r = self.sub.piece_lr[idx]
            d = []
            for tag in tags:
                if tag is None:
                    continue
                fi, opp = tag
                d.append((fi, 1 if orient(l, r, opp) == LEFT else -1))
            deltas.append(d)
        state = {}
        face_fans = [None] * self.sub.face_count

        def apply(d, down):
            for item, sgn in d:
                state[item] = state.get(item, 0) + (-sgn if down else sgn)

        def on_face(face, _trap):
            face_fans[face] = sorted(k for k, v in state.items() if v > 0)

        traverse(self.sub, deltas, apply, on_face)
        self.face_fans = face_fans

        self._build_layout(max_copies)

    def _build_layout(self, max_copies):
        """Copy blocks per refined face.

        A refined face is (trapezoid, triangle index).  Blocks:
        (owner, count, base_id, part_corners) with count > 0; box-side
        parts appear as count-1 blocks carrying their corner flags.
        """
        scene = self.scene
        self.trap_rf = {}        # trap.index -> list of refined face ids
        self.rf_trap = []        # refined id -> (trap, corner triple)
        self.rf_blocks = []      # refined id -> list of blocks
        self.rf_face = []        # refined id -> subdivision face
        nid = 0
        for trap in self.sub.tm.traps:
            prof = self.face_profile[trap.face]
            if prof is None:
                continue
            blocks_proto = []
            for i in range(scene.n):
                c = prof.subseg_counts[i]
                if c >= 1:
                    blocks_proto.append((i, c, None))
            for side, adj in prof.box_part_meta:
                blocks_proto.append((side, 1, adj))
            rf_ids = []
            for triple in _trap_triangles(self.sub, trap):
                blocks = []
                for owner, count, adj in blocks_proto:
                    blocks.append((owner, count, nid, adj))
                    nid += count
                    if nid > max_copies:
                        raise CapacityError(
                            f"cover exceeds {max_copies} triangle copies")
                rf_ids.append(len(self.rf_trap))
                self.rf_trap.append((trap, triple))
                self.rf_blocks.append(blocks)
                self.rf_face.append(trap.face)
            self.trap_rf[trap.index] = rf_ids
        self.total_copies = nid

    def locate_refined(self, p: Point):
        """Refined face id at p, or None outside the box faces."""
        trap = self.sub.locate_trap(p)
        rf_ids = self.trap_rf.get(trap.index)
        if rf_ids is None:
            return None
        if len(rf_ids) == 1:
            return rf_ids[0]
        _, triple = self.rf_trap[rf_ids[0]]
        bl, _, tr = triple
        return rf_ids[1] if orient(bl, tr, p) == LEFT else rf_ids[0]

    def cover_triangles(self, owner=None):
        """Materialize cover Triangle copies (optionally one owner)."""
        for rf, blocks in enumerate(self.rf_blocks):
            _, triple = self.rf_trap[rf]
            for o, count, _base, adj in blocks:
                if owner is not None and o != owner:
                    continue
                for _ in range(count):
                    yield Triangle(triple, o, KIND_COVER, adj)


def segment_cover(cover: SceneCover, owner: int):
    return list(cover.cover_triangles(owner))


class TriangleSet:
    """All visibility triangles of a scene: fans first, then covers."""

    def __init__(self, cover: SceneCover):
        self.cover = cover
        self.fan_count = len(cover.fans)
        self.total = self.fan_count + cover.total_copies

    def __iter__(self):
        yield from self.cover.fans
        yield from self.cover.cover_triangles()

    def __len__(self):
        return self.total


def build_vt_s(scene: Scene, evg: Evg, seed=0, **caps) -> TriangleSet:
    return TriangleSet(SceneCover(scene, evg, seed=seed, **caps))
