"""Hidden-endpoint projection graph and the counting identity."""

import random

from viscount.geom_core import Point, rat
from viscount.scene import generate, admissible
from viscount.exact_engine import sweep, oracle_m_p
from viscount.gp_graph import (
    build, m_p_via_identity, face_count, covering_owner,
)

from .fixtures import (
    P, T1, T2, FIVE, FIVE_P, SIX, SIX_P, PINWHEEL, PINWHEEL_P,
    HIDDEN, HIDDEN_P,
)


def _graph(scene, p):
    return build(scene, p, sweep(scene, p))


def _components(graph):
    parent = list(range(graph.vertex_count))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for i, j in graph.edges:
        parent[find(i)] = find(j)
    groups = {}
    for v in range(graph.vertex_count):
        groups.setdefault(find(v), set()).add(v)
    return sorted(sorted(g) for g in groups.values())


def test_t1_graph_is_trivial():
    g = _graph(T1, P(5, 1))
    assert g.vertex_count == 1
    assert g.edges == []
    assert g.component_count == 1
    assert not g.p_in_bounded_face


def test_projection_owner_examples():
    from viscount.gp_graph import project
    # projection of (4,3) beyond itself lands on s1 at (3,5)
    assert project(T2, P(5, 1), P(4, 3)) == 0
    # projection of (2,5) escapes to the box
    assert T2.is_box_side(project(T2, P(5, 1), P(2, 5)))
    assert T1.is_box_side(project(T1, P(5, 1), P(2, 5)))


def test_covering_owner_of_hidden_endpoint():
    # both endpoints of the far segment hide behind the near one
    assert covering_owner(HIDDEN, HIDDEN_P, P("3.8", 6)) == 0
    assert covering_owner(HIDDEN, HIDDEN_P, P("6.2", 6)) == 0
    # a visible endpoint has no cover
    assert covering_owner(T2, P(5, 1), P(4, 3)) is None


def test_five_segment_embedding_counts():
    g = _graph(FIVE, FIVE_P)
    assert g.vertex_count == 5
    assert len(g.edges) == 5
    prof = sweep(FIVE, FIVE_P)
    assert prof.ve_p == 2 * 5 - len(g.edges)


def test_six_segment_components():
    g = _graph(SIX, SIX_P)
    assert g.component_count == 3
    assert _components(g) == [[0, 1, 5], [2, 3], [4]]


def test_pinwheel_bounded_face():
    g = _graph(PINWHEEL, PINWHEEL_P)
    assert g.p_in_bounded_face
    assert g.component_count == 1
    assert m_p_via_identity(g, sweep(PINWHEEL, PINWHEEL_P).ve_p) == 4


def test_hidden_segment_parallel_edges():
    g = _graph(HIDDEN, HIDDEN_P)
    assert g.vertex_count == 2
    assert sorted(g.edges) == [(1, 0), (1, 0)] or sorted(g.edges) == [(0, 1), (0, 1)]
    assert g.component_count == 1
    assert face_count(g) == 2
    # one face beyond the unbounded one = one fully hidden segment
    assert face_count(g) - 1 == 2 - sweep(HIDDEN, HIDDEN_P).m_p


def test_identity_on_fixtures():
    for scene, p, want in ((T1, P(5, 1), 1), (T2, P(5, 1), 2),
                           (SIX, SIX_P, 6), (HIDDEN, HIDDEN_P, 1)):
        prof = sweep(scene, p)
        assert m_p_via_identity(_graph(scene, p), prof.ve_p) == want


def _random_points(scene, count, seed):
    rng = random.Random(seed)
    xlo, ylo, xhi, yhi = scene.bbox
    out = []
    while len(out) < count:
        x = xlo + (xhi - xlo) * rat(rng.randrange(1, 10000)) / 10000
        y = ylo + (yhi - ylo) * rat(rng.randrange(1, 10000)) / 10000
        p = Point(x, y)
        if admissible(scene, p):
            out.append(p)
    return out


def test_identity_and_formulas_randomized():
    for seed in (4, 21):
        scene = generate(8, (0, 0, 10, 10), seed=seed)
        for p in _random_points(scene, 20, seed * 31):
            prof = sweep(scene, p)
            g = build(scene, p, prof)
            assert m_p_via_identity(g, prof.ve_p) == oracle_m_p(scene, p)
            assert len(g.edges) == 2 * scene.n - prof.ve_p
            # component formula from the per-segment subsegment counts
            extra = sum(max(prof.subseg_counts[i] - 1, 0)
                        for i in range(scene.n))
            base = prof.box_parts if prof.box_parts > 0 else 1
            assert g.component_count == base + extra
            # hidden segments = bounded faces of the graph
            unbounded = 1 if not g.p_in_bounded_face else 2
            assert face_count(g) - unbounded == scene.n - prof.m_p
