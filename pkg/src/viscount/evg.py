"""Visibility graph over segment endpoints, plus chord extensions.

An edge joins two endpoints whose open connecting segment meets no scene
segment.  Endpoints of the same segment are always joined: the open
segment between them is the segment's own interior, which no disjoint
segment can cross.  Every edge is extended past both ends to its first
hit on a segment or the box; the hit points ("extension vertices") are
where visibility regions change combinatorially.
"""

from __future__ import annotations

from .geom_core import ray_first_hit
from .scene import Scene
from .exact_engine import blocks


class UnknownId(KeyError):
    pass


class VgEdge:
    __slots__ = ("a", "b", "ext_a", "ext_b")

    def __init__(self, a, b, ext_a, ext_b):
        self.a = a              # endpoint id
        self.b = b              # endpoint id, a < b
        self.ext_a = ext_a      # first hit of the ray b->a beyond a
        self.ext_b = ext_b      # first hit of the ray a->b beyond b


class Evg:
    def __init__(self, scene, edges):
        self.scene = scene
        self.edges = edges
        self.vg_edges = {(e.a, e.b) for e in edges}
        self.m = len(edges)
        self._ep_degree = {}
        for e in edges:
            self._ep_degree[e.a] = self._ep_degree.get(e.a, 0) + 1
            self._ep_degree[e.b] = self._ep_degree.get(e.b, 0) + 1

    @property
    def extension_vertices(self):
        out = []
        for e in self.edges:
            out.append(e.ext_a.point)
            out.append(e.ext_b.point)
        return out

    def endpoint_degree(self, eid):
        if not (0 <= eid < 2 * self.scene.n):
            raise UnknownId(eid)
        return self._ep_degree.get(eid, 0)

    def segment_degree(self, sid):
        if not (0 <= sid < self.scene.n):
            raise UnknownId(sid)
        count = 0
        for e in self.edges:
            if e.a // 2 == sid or e.b // 2 == sid:
                count += 1
        return count


def endpoints_mutually_visible(scene: Scene, ea: int, eb: int) -> bool:
    if ea // 2 == eb // 2:
        return True
    pa, pb = scene.endpoint(ea), scene.endpoint(eb)
    if pa == pb:
        return False  # coincident endpoints are excluded by validation
    return not any(blocks(s, pa, pb) for s in scene.segments)


def build_evg(scene: Scene) -> Evg:
    edges = []
    ids = list(scene.endpoint_ids())
    for i, ea in enumerate(ids):
        pa = scene.endpoint(ea)
        for eb in ids[i + 1:]:
            if not endpoints_mutually_visible(scene, ea, eb):
                continue
            pb = scene.endpoint(eb)
            # the through point sits at ray parameter 1; the extension is
            # the first hit strictly beyond it
            ext_a = ray_first_hit(pb, pa, scene, skip_before=1,
                                  allow_endpoint_hits=True)
            ext_b = ray_first_hit(pa, pb, scene, skip_before=1,
                                  allow_endpoint_hits=True)
            edges.append(VgEdge(ea, eb, ext_a, ext_b))
    return Evg(scene, edges)
