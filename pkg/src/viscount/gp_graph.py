"""The occlusion multigraph G(p) and the component identity for m_p.

One vertex per segment.  Every endpoint that is not visible from p
contributes one edge, joining the endpoint's segment to the segment that
covers it (the blocker nearest to the endpoint along the sightline).
Covers by a box side contribute no edge.  The number of visible segments
then satisfies m_p = ve_p - C + (1 if p lies in a bounded face of the
induced subdivision else 0), with C the number of connected components.
"""

from __future__ import annotations

from .geom_core import Point, ray_first_hit
from .scene import Scene
from .exact_engine import VisibilityProfile


class GpGraph:
    __slots__ = ("vertex_count", "edges", "component_count",
                 "p_in_bounded_face")

    def __init__(self, vertex_count, edges, component_count,
                 p_in_bounded_face):
        self.vertex_count = vertex_count
        self.edges = edges  # list of (i, j) vertex pairs, parallel allowed
        self.component_count = component_count
        self.p_in_bounded_face = p_in_bounded_face

    def dump(self):
        lines = [f"vertices {self.vertex_count}"]
        lines += [f"edge {i} {j}" for i, j in self.edges]
        lines.append(f"components {self.component_count}")
        lines.append(f"bounded {int(self.p_in_bounded_face)}")
        return "\n".join(lines) + "\n"


class _DSU:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def project(scene: Scene, p: Point, a: Point):
    """Owner id of the first hit of the ray p -> a strictly beyond a."""
    hit = ray_first_hit(p, a, scene, skip_before=1)
    return hit.owner


def covering_owner(scene: Scene, p: Point, a: Point):
    """Owner of the blocker nearest to a on the open sightline (p, a).

    Walking from a back toward p, this is the first segment met; it is the
    one that covers the non-visible endpoint a.  Returns None when nothing
    blocks (a is visible).
    """
    best_t = None
    best = None
    for s in scene.segments:
        if s.a == a or s.b == a:
            continue
        sx = s.b.x - s.a.x
        sy = s.b.y - s.a.y
        dx = a.x - p.x
        dy = a.y - p.y
        denom = dx * sy - dy * sx
        if denom == 0:
            continue
        t = ((s.a.x - p.x) * sy - (s.a.y - p.y) * sx) / denom
        if not (0 < t < 1):
            continue
        # the hit must lie within s
        if sx != 0 or sy != 0:
            hx = p.x + t * dx - s.a.x
            hy = p.y + t * dy - s.a.y
            u = (hx * sx + hy * sy) / (sx * sx + sy * sy)
            if not (0 <= u <= 1):
                continue
        if best_t is None or t > best_t:
            best_t = t
            best = s.id
    return best


def build(scene: Scene, p: Point, profile: VisibilityProfile) -> GpGraph:
    n = scene.n
    edges = []
    visible = profile.visible_endpoints
    for eid in scene.endpoint_ids():
        if eid in visible:
            continue
        sid = eid // 2
        owner = covering_owner(scene, p, scene.endpoint(eid))
        assert owner is not None, "non-visible endpoint with no blocker"
        edges.append((sid, owner))
    dsu = _DSU(n)
    for i, j in edges:
        dsu.union(i, j)
    components = len({dsu.find(i) for i in range(n)})
    return GpGraph(n, edges, components, profile.box_parts == 0)


def m_p_via_identity(graph: GpGraph, ve_p: int) -> int:
    m = ve_p - graph.component_count
    return m + 1 if graph.p_in_bounded_face else m


def face_count(graph: GpGraph) -> int:
    return 1 + graph.component_count - graph.vertex_count + len(graph.edges)
