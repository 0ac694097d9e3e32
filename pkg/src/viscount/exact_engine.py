"""Exact per-query visibility: rotational sweep, budgeted variant, oracles.

The sweep walks the 2n segment endpoints (plus the 4 box corners) in
angular order around the center, maintaining the segments crossing the
current ray ordered by distance.  Maximal angular intervals with a fixed
nearest owner ("runs") give the visible subsegments per owner; endpoint
visibility falls out of the front of the active list at each event.
"""

from __future__ import annotations

from functools import cmp_to_key

from .geom_core import Point, Segment, rat
from .scene import Scene, admissible


class InadmissibleQuery(Exception):
    pass


class _Run:
    __slots__ = ("owner", "entry", "exit", "entry_merge", "exit_merge")

    def __init__(self, owner, entry, exit, entry_merge, exit_merge):
        self.owner = owner
        self.entry = entry            # Point where the run starts
        self.exit = exit              # Point where the run ends
        self.entry_merge = entry_merge  # box corner Point joining a box part
        self.exit_merge = exit_merge

    def __repr__(self):
        return f"_Run(owner={self.owner}, {self.entry}->{self.exit})"


class SweepData:
    __slots__ = ("completed", "found_visible", "visible_eps", "runs")

    def __init__(self, completed, found_visible, visible_eps, runs):
        self.completed = completed
        self.found_visible = found_visible
        self.visible_eps = visible_eps   # list of endpoint ids, sweep order
        self.runs = runs                 # list of _Run, cyclic order


class VisibilityProfile:
    __slots__ = ("visible_endpoints", "subseg_counts", "box_parts", "m_p",
                 "polygon_vertex_count", "box_part_meta")

    def __init__(self, visible_endpoints, subseg_counts, box_parts, m_p,
                 polygon_vertex_count, box_part_meta):
        self.visible_endpoints = visible_endpoints
        self.subseg_counts = subseg_counts
        self.box_parts = box_parts
        self.m_p = m_p
        self.polygon_vertex_count = polygon_vertex_count
        # per box-side visible part: (side_id, frozenset of corner indexes
        # where the part continues onto the neighbouring side)
        self.box_part_meta = box_part_meta

    @property
    def ve_p(self):
        return len(self.visible_endpoints)


class SweepOutcome:
    """COMPLETED(profile) or BUDGET_EXCEEDED(found_visible_endpoints)."""
    __slots__ = ("profile", "found_visible_endpoints")

    def __init__(self, profile=None, found=None):
        self.profile = profile
        self.found_visible_endpoints = found

    @property
    def completed(self):
        return self.profile is not None


# ---------------------------------------------------------------------------
# direction utilities

def _canon_dir(dx, dy):
    s = abs(dx) + abs(dy)
    return (dx / s, dy / s)


def _half(d):
    dx, dy = d
    return 0 if (dy > 0 or (dy == 0 and dx > 0)) else 1


def _dir_cmp(d1, d2):
    h1, h2 = _half(d1), _half(d2)
    if h1 != h2:
        return -1 if h1 < h2 else 1
    cr = d1[0] * d2[1] - d1[1] * d2[0]
    if cr > 0:
        return -1
    if cr < 0:
        return 1
    return 0


def _ray_param(cx, cy, dx, dy, seg):
    """Ray parameter t where center + t*(dx,dy) meets seg, or None."""
    sx = seg.b.x - seg.a.x
    sy = seg.b.y - seg.a.y
    denom = dx * sy - dy * sx
    ax = seg.a.x - cx
    ay = seg.a.y - cy
    if denom == 0:
        # parallel; collinear overlap -> take nearest forward endpoint
        if ax * dy - ay * dx != 0:
            return None
        cands = []
        for e in (seg.a, seg.b):
            if dx != 0:
                t = (e.x - cx) / dx
            else:
                t = (e.y - cy) / dy
            if t > 0:
                cands.append(t)
        return min(cands) if cands else None
    t = (ax * sy - ay * sx) / denom
    return t


def _box_hit(scene, cx, cy, d):
    """(side_index, point, at_corner_index) for the ray in direction d.

    When the ray goes exactly through corner k the side *preceding* the
    corner in sweep order (index k) is reported along with the corner.
    """
    xmin, ymin, xmax, ymax = scene.bbox
    dx, dy = d
    best = None  # (t, side_idx)
    hits = []
    if dy < 0:
        t = (ymin - cy) / dy
        hits.append((t, 0))
    if dx > 0:
        t = (xmax - cx) / dx
        hits.append((t, 1))
    if dy > 0:
        t = (ymax - cy) / dy
        hits.append((t, 2))
    if dx < 0:
        t = (xmin - cx) / dx
        hits.append((t, 3))
    tmin = min(t for t, _ in hits)
    sides = sorted(i for t, i in hits if t == tmin)
    pt = Point(cx + tmin * dx, cy + tmin * dy)
    if len(sides) == 1:
        return sides[0], pt, None
    # exactly at a corner: corner k joins sides k and (k+1) % 4
    if sides == [0, 3]:
        return 3, pt, 3
    return sides[0], pt, sides[0]


def sweep_core(center: Point, segments, scene: Scene, budget=None) -> SweepData:
    """Angular sweep around ``center`` against ``segments`` and the box.

    ``segments`` may be any subset of the scene's segments (fans exclude
    the segment the apex belongs to).  Endpoint ids reported refer to the
    scene numbering.  ``budget``: stop as soon as budget+1 distinct visible
    endpoints have been found.
    """
    cx, cy = center.x, center.y

    groups = {}

    def add_event(d, ev):
        key = _canon_dir(*d)
        groups.setdefault(key, []).append(ev)

    for s in segments:
        for which, e in enumerate((s.a, s.b)):
            add_event((e.x - cx, e.y - cy), ("ep", s, which, e))
    for ci, c in enumerate(scene.corners()):
        add_event((c.x - cx, c.y - cy), ("corner", ci, c))

    order = sorted(groups.keys(), key=cmp_to_key(_dir_cmp))

    def l1(e):
        return abs(e.x - cx) + abs(e.y - cy)

    # sort events inside each group by distance (endpoints), corners last
    for key in order:
        groups[key].sort(key=lambda ev: (0, l1(ev[3])) if ev[0] == "ep"
                         else (1, 0))

    active = []          # Segments crossing the current ray, near to far
    active_ids = set()

    if not order:
        order = [_canon_dir(1, 1)]
        groups[order[0]] = []

    d1 = order[0]

    def param(seg, d):
        return _ray_param(cx, cy, d[0], d[1], seg)

    # active set just before the first event direction
    for s in segments:
        da = _canon_dir(s.a.x - cx, s.a.y - cy)
        db = _canon_dir(s.b.x - cx, s.b.y - cy)
        if da == d1 or db == d1:
            other = db if da == d1 else da
            # s is active just before d1 iff its event here is its end:
            # the segment spans CCW from `other` to d1
            if other[0] * d1[1] - other[1] * d1[0] > 0:
                active.append(s)
                active_ids.add(s.id)
        elif da != db:
            o1 = d1[0] * (s.a.y - cy) - d1[1] * (s.a.x - cx)
            o2 = d1[0] * (s.b.y - cy) - d1[1] * (s.b.x - cx)
            if (o1 > 0 > o2) or (o1 < 0 < o2):
                t = param(s, d1)
                if t is not None and t > 0:
                    active.append(s)
                    active_ids.add(s.id)
    active.sort(key=lambda s: param(s, d1))
    initial_ids = frozenset(active_ids)

    def nearest_owner(d, corner_after):
        """Owner id and boundary point for the interval just after d."""
        if active:
            s = active[0]
            t = param(s, d)
            return s.id, Point(cx + t * d[0], cy + t * d[1]), None
        side, pt, at_corner = _box_hit(scene, cx, cy, d)
        if corner_after is not None:
            # just-after semantics across a corner event
            side = (corner_after + 1) % 4
            pt = scene.corners()[corner_after]
            return scene.n + side, pt, corner_after
        return scene.n + side, pt, None

    # current owner just before d1
    if active:
        cur_owner = active[0].id
    else:
        side, _, _ = _box_hit(scene, cx, cy, d1)
        cur_owner = scene.n + side

    transitions = []  # (dir, old_exit_pt, new_owner, new_entry_pt, merge_corner)
    visible_eps = []
    found = 0

    for key in order:
        evs = groups[key]
        corner_here = None
        processed = []  # (t, seg_id) endpoint events already seen this group
        for ev in evs:
            if ev[0] == "corner":
                corner_here = ev[1]
                continue
            _, s, which, e = ev
            t_e = l1(e)
            # visibility of e: any blocker strictly nearer on the ray?
            blocked = False
            for t_prev, sid_prev in processed:
                if sid_prev != s.id and t_prev < t_e:
                    blocked = True
                    break
            if not blocked:
                for a in active:
                    if a.id == s.id:
                        continue
                    ta = param(a, key)
                    # normalize: ta is in ray-parameter units of `key`
                    # (canonical L1 direction), so it is the L1 distance
                    if ta is not None and 0 < ta < t_e:
                        blocked = True
                    break  # only the front non-self segment matters
            if not blocked:
                visible_eps.append(2 * s.id + which)
                found += 1
                if budget is not None and found > budget:
                    return SweepData(False, found, visible_eps, None)
            processed.append((t_e, s.id))
            # update active set
            if s.id in active_ids:
                for i, a in enumerate(active):
                    if a.id == s.id:
                        del active[i]
                        break
                active_ids.discard(s.id)
            else:
                ts = t_e
                lo, hi = 0, len(active)
                while lo < hi:
                    mid = (lo + hi) // 2
                    if param(active[mid], key) < ts:
                        lo = mid + 1
                    else:
                        hi = mid
                active.insert(lo, s)
                active_ids.add(s.id)
        new_owner, entry_pt, corner_idx = nearest_owner(key, corner_here)
        if new_owner != cur_owner:
            # exit point on the old owner along this ray
            old = cur_owner
            if old >= scene.n:
                side, pt, _ = _box_hit(scene, cx, cy, key)
                if corner_here is not None and new_owner >= scene.n:
                    pt = scene.corners()[corner_here]
                exit_pt = pt
            else:
                seg = scene.segments[old]
                t = param(seg, key)
                exit_pt = Point(cx + t * key[0], cy + t * key[1])
            merge = corner_here if (corner_here is not None and
                                    old >= scene.n and new_owner >= scene.n) \
                else None
            transitions.append((key, exit_pt, new_owner, entry_pt, merge))
            cur_owner = new_owner

    assert active_ids == initial_ids, "sweep did not return to start state"

    runs = []
    if not transitions:
        # single owner for the whole circle (cannot happen with a box: the
        # corners always break box ownership; kept for safety)
        runs.append(_Run(cur_owner, None, None, None, None))
    else:
        k = len(transitions)
        for i in range(k):
            _, _, owner, entry, merge_in = transitions[i]
            _, exit_pt, _, _, merge_out = transitions[(i + 1) % k]
            entry_m = scene.corners()[merge_in] if merge_in is not None else None
            exit_m = scene.corners()[merge_out] if merge_out is not None else None
            runs.append(_Run(owner, entry, exit_pt, entry_m, exit_m))
    return SweepData(True, found, visible_eps, runs)


def _profile_from_core(scene: Scene, data: SweepData) -> VisibilityProfile:
    counts = {i: 0 for i in range(scene.n + 4)}
    merges = 0
    box_part_meta = []
    for r in data.runs:
        counts[r.owner] += 1
        if r.owner >= scene.n:
            adj = set()
            if r.entry_merge is not None:
                merges += 1
                adj.add(scene.corners().index(r.entry_merge))
            if r.exit_merge is not None:
                adj.add(scene.corners().index(r.exit_merge))
            box_part_meta.append((r.owner, frozenset(adj)))
    box_side_runs = sum(1 for r in data.runs if r.owner >= scene.n)
    box_parts = box_side_runs - merges
    m_p = sum(1 for i in range(scene.n) if counts[i] >= 1)
    vertex_count = max(0, 2 * len(data.runs) - merges)
    return VisibilityProfile(frozenset(data.visible_eps), counts, box_parts,
                             m_p, vertex_count, box_part_meta)


def sweep_unchecked(scene: Scene, p: Point) -> VisibilityProfile:
    """Sweep without the (quadratic) admissibility pre-check."""
    data = sweep_core(p, scene.segments, scene)
    return _profile_from_core(scene, data)


def sweep(scene: Scene, p: Point) -> VisibilityProfile:
    if not admissible(scene, p):
        raise InadmissibleQuery(f"{p} is not an admissible query point")
    return sweep_unchecked(scene, p)


def budgeted_sweep(scene: Scene, p: Point, budget: int) -> SweepOutcome:
    """Sweep that aborts once more than ``budget`` visible endpoints appear."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if not admissible(scene, p):
        raise InadmissibleQuery(f"{p} is not an admissible query point")
    data = sweep_core(p, scene.segments, scene, budget=budget)
    if not data.completed:
        return SweepOutcome(found=data.found_visible)
    return SweepOutcome(profile=_profile_from_core(scene, data))


# ---------------------------------------------------------------------------
# brute-force oracles (kept deliberately independent of the sweep)

def _strictly_between(p: Point, q: Point, x: Point) -> bool:
    # x already known collinear with (p, q); compare on the dominant axis
    if abs(q.x - p.x) >= abs(q.y - p.y):
        lo, hi = (p.x, q.x) if p.x < q.x else (q.x, p.x)
        return lo < x.x < hi
    lo, hi = (p.y, q.y) if p.y < q.y else (q.y, p.y)
    return lo < x.y < hi


def blocks(s: Segment, p: Point, q: Point) -> bool:
    """True iff the closed segment s meets the open segment (p, q)."""
    ux, uy = q.x - p.x, q.y - p.y
    d1 = ux * (s.a.y - p.y) - uy * (s.a.x - p.x)
    d2 = ux * (s.b.y - p.y) - uy * (s.b.x - p.x)
    if d1 == 0 and d2 == 0:
        # s collinear with the sightline; 1-d interval overlap on the
        # dominant axis, with (p, q) open and s closed
        if abs(ux) >= abs(uy):
            lo, hi = (p.x, q.x) if p.x < q.x else (q.x, p.x)
            slo, shi = (s.a.x, s.b.x) if s.a.x < s.b.x else (s.b.x, s.a.x)
        else:
            lo, hi = (p.y, q.y) if p.y < q.y else (q.y, p.y)
            slo, shi = (s.a.y, s.b.y) if s.a.y < s.b.y else (s.b.y, s.a.y)
        return slo < hi and shi > lo
    if d1 == 0:
        return _strictly_between(p, q, s.a)
    if d2 == 0:
        return _strictly_between(p, q, s.b)
    if (d1 > 0) == (d2 > 0):
        return False
    vx, vy = s.b.x - s.a.x, s.b.y - s.a.y
    d3 = vx * (p.y - s.a.y) - vy * (p.x - s.a.x)
    d4 = vx * (q.y - s.a.y) - vy * (q.x - s.a.x)
    if d3 == 0 or d4 == 0:
        return False  # sightline only touches s at p or q
    return (d3 > 0) != (d4 > 0)


def point_visible(scene: Scene, p: Point, q: Point) -> bool:
    return not any(blocks(s, p, q) for s in scene.segments)


def oracle_ve_p(scene: Scene, p: Point) -> int:
    if not admissible(scene, p):
        raise InadmissibleQuery(f"{p} is not an admissible query point")
    return sum(1 for eid in scene.endpoint_ids()
               if point_visible(scene, p, scene.endpoint(eid)))


def oracle_m_p(scene: Scene, p: Point) -> int:
    """Per segment, test candidate witness points by direct occlusion scan.

    Visibility along a segment can only change where a line through p and
    some other endpoint crosses it.  Those crossing points themselves can
    graze a blocker endpoint, so besides the critical points we also test
    the midpoint of every interval between consecutive critical points.
    """
    if not admissible(scene, p):
        raise InadmissibleQuery(f"{p} is not an admissible query point")
    from .geom_core import ray_segment_param
    count = 0
    endpoints = [scene.endpoint(i) for i in scene.endpoint_ids()]
    for s in scene.segments:
        dx = s.b.x - s.a.x
        dy = s.b.y - s.a.y

        def param(pt):
            if dx != 0:
                return (pt.x - s.a.x) / dx
            return (pt.y - s.a.y) / dy

        ts = {rat(0), rat(1)}
        for f in endpoints:
            if f == s.a or f == s.b:
                continue
            for _, pt in ray_segment_param(p, f, s):
                ts.add(param(pt))
            mirror = Point(2 * p.x - f.x, 2 * p.y - f.y)
            for _, pt in ray_segment_param(p, mirror, s):
                ts.add(param(pt))
        order = sorted(ts)
        probes = list(order)
        probes.extend((a + b) / 2 for a, b in zip(order, order[1:]))
        if any(point_visible(scene, p,
                             Point(s.a.x + t * dx, s.a.y + t * dy))
               for t in probes):
            count += 1
    return count
