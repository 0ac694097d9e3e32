"""Randomized approximation of m_p via sampled visibility triangles.

Knobs: beta in [0, 2/3] trades space for accuracy, delta in (0, 1) is the
approximation knob.  k = round(m^{beta/2}) independent subsets are drawn,
each triangle kept with probability 1/m^beta.  A query first tries an
exact sweep with a bounded budget of visible-endpoint discoveries; when
that aborts, the visible-endpoint count and the component count of the
occlusion graph are estimated from the sampled subsets and combined.

Irrational powers of m (m^beta, m^{beta/2}, log2 m) are evaluated once in
128-bit binary floating point and frozen as exact dyadic rationals, so
all downstream comparisons are exact and reproducible.
"""

from __future__ import annotations

import math

import numpy as np
import gmpy2
from gmpy2 import mpq, mpfr

from .geom_core import Point
from .scene import Scene
from .exact_engine import budgeted_sweep
from .evg import Evg
from .covers import SceneCover

EXACT = "EXACT"
APPROX_SMALL_C = "APPROX_SMALL_C"
APPROX_LARGE_C = "APPROX_LARGE_C"

SMALL_C = "SMALL_C"
LARGE_C = "LARGE_C"

_PREC = 128


class DeltaTooLarge(ValueError):
    pass


def _dyadic_pow(m: int, e: mpq) -> mpq:
    """m**e frozen as an exact dyadic rational (128-bit evaluation)."""
    if e == 0 or m == 1:
        return mpq(1)
    with gmpy2.context(precision=_PREC):
        return mpq(mpfr(m) ** mpfr(e))


def _dyadic_log2(m: int) -> mpq:
    with gmpy2.context(precision=_PREC):
        return mpq(gmpy2.log2(mpfr(m)))


def _ceil_q(x: mpq) -> int:
    return int(-((-x.numerator) // x.denominator))


def delta_star(delta, branch) -> mpq:
    """Effective approximation factor for each non-exact query branch."""
    d = mpq(delta)
    if d >= 1:
        raise DeltaTooLarge(f"delta = {d} (needs delta < 1)")
    if d <= 0:
        raise DeltaTooLarge(f"delta = {d} (needs delta > 0)")
    if branch == SMALL_C:
        return (1 + d * d * (1 + d)) / ((1 - d) * (1 - d)) - 1
    if branch == LARGE_C:
        return 4 * d / (1 - d) + 2 * d / (1 + d)
    raise ValueError(f"unknown branch {branch!r}")


class Params:
    """Derived sampling parameters for a scene with m visibility edges."""

    def __init__(self, beta, delta, seed, m, budget_override=None):
        self.beta = mpq(beta)
        self.delta = mpq(delta)
        if not 0 <= self.beta <= mpq(2, 3):
            raise ValueError(f"beta = {self.beta} outside [0, 2/3]")
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta = {self.delta} outside (0, 1]")
        self.seed = int(seed)
        self.m = int(m)
        if self.m < 1:
            raise ValueError("m must be >= 1")
        self.m_beta = _dyadic_pow(self.m, self.beta)
        self.m_beta_half = _dyadic_pow(self.m, self.beta / 2)
        self.k = max(1, int(math.floor(self.m_beta_half + mpq(1, 2))))
        self.sample_prob = min(mpq(1), 1 / self.m_beta)
        if budget_override is not None:
            self.budget = int(budget_override)
        elif self.m < 2:
            self.budget = 1
        else:
            self.budget = _ceil_q(
                (2 / self.delta ** 3) * self.m_beta_half * _dyadic_log2(self.m))

    def c_threshold(self) -> mpq:
        """Branch cutoff for the estimated component count."""
        return ((1 + self.delta) / self.delta ** 2
                * self.m_beta_half * _dyadic_log2(self.m))


class QueryResult:
    __slots__ = ("value", "mode", "diagnostics")

    def __init__(self, value, mode, diagnostics):
        self.value = value
        self.mode = mode
        self.diagnostics = diagnostics

    def __repr__(self):
        return f"QueryResult({float(self.value):.4f}, {self.mode})"


def subset_bits(params: Params, j: int, n_fans: int, n_copies: int):
    """Deterministic Bernoulli masks for subset j (fans, cover copies)."""
    key = [params.seed & 0xFFFFFFFFFFFFFFFF, j]
    rng = np.random.Generator(np.random.Philox(key=key))
    p = float(params.sample_prob)
    fan_bits = rng.random(n_fans) < p
    cover_bits = rng.random(n_copies) < p
    return fan_bits, cover_bits


class CoverRows:
    """The cover copy layout of a SceneCover flattened to numpy arrays."""

    def __init__(self, cover: SceneCover):
        scene = cover.scene
        rf, base, count = [], [], []
        seg_row, side_idx = [], []
        corner_rows = {k: ([], []) for k in range(4)}  # k -> (rowsA, rowsB)
        cycle_extra = []
        for rfi, blocks in enumerate(cover.rf_blocks):
            n_parts = 0
            corner_full = {k: [False, False] for k in range(4)}
            for owner, c, b, adj in blocks:
                row = len(rf)
                rf.append(rfi)
                base.append(b)
                count.append(c)
                if owner < scene.n:
                    seg_row.append(True)
                    side_idx.append(-1)
                else:
                    seg_row.append(False)
                    si = owner - scene.n
                    side_idx.append(si)
                    n_parts += 1
                    for k in adj:
                        # corner k joins side k and side (k + 1) % 4
                        if si == k:
                            corner_rows[k][0].append(row)
                            corner_full[k][0] = True
                        elif si == (k + 1) % 4:
                            corner_rows[k][1].append(row)
                            corner_full[k][1] = True
            n_joins = sum(1 for k in range(4) if all(corner_full[k]))
            # the visible box boundary contributes parts - joins chain
            # components, except when it is empty or a closed ring (both
            # give zero); the graph formula counts one component there
            cycle_extra.append(1 if n_parts == n_joins else 0)
        self.n_rf = len(cover.rf_blocks)
        self.cycle_extra = np.asarray(cycle_extra, dtype=np.int64)
        self.rf = np.asarray(rf, dtype=np.int64)
        self.base = np.asarray(base, dtype=np.int64)
        self.count = np.asarray(count, dtype=np.int64)
        self.seg_row = np.asarray(seg_row, dtype=bool)
        self.corner_rows = {
            k: (np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
            for k, (a, b) in corner_rows.items()}

    def tables(self, cover_bits):
        """Per refined face: A = sampled copy total, B = subtracted units.

        C_j(face) = m^beta * A - B, where B counts segment owners with a
        sampled copy plus box corners whose two adjacent visible parts are
        both sampled, minus one for faces whose visible box boundary is
        empty or a closed ring (it still forms one component).
        """
        cs = np.zeros(len(cover_bits) + 1, dtype=np.int64)
        np.cumsum(cover_bits, out=cs[1:])
        cnt = cs[self.base + self.count] - cs[self.base]
        A = np.bincount(self.rf, weights=cnt, minlength=self.n_rf)
        hit = cnt >= 1
        B = np.bincount(self.rf[self.seg_row & hit], minlength=self.n_rf)
        for k in range(4):
            ra, rb = self.corner_rows[k]
            if len(ra) == 0 or len(rb) == 0:
                continue
            sa = np.zeros(self.n_rf, dtype=bool)
            sa[self.rf[ra[hit[ra]]]] = True
            sb = np.zeros(self.n_rf, dtype=bool)
            sb[self.rf[rb[hit[rb]]]] = True
            B = B + (sa & sb)
        return A.astype(np.int64), B.astype(np.int64) - self.cycle_extra


class SampledIndex:
    """One subset: which triangles were kept, plus per-face tables."""

    __slots__ = ("j", "fan_bits", "cover_bits", "ve_by_face", "A", "B",
                 "chosen_count")

    def __init__(self, j, fan_bits, cover_bits, ve_by_face, A, B):
        self.j = j
        self.fan_bits = fan_bits
        self.cover_bits = cover_bits
        self.ve_by_face = ve_by_face
        self.A = A
        self.B = B
        self.chosen_count = int(fan_bits.sum()) + int(cover_bits.sum())


class Structures:
    """Preprocessed sampling structures shared by all queries."""

    def __init__(self, scene, evg, cover, params, indexes):
        self.scene = scene
        self.evg = evg
        self.cover = cover
        self.params = params
        self.indexes = indexes

    @property
    def total_triangles(self):
        return len(self.cover.fans) + self.cover.total_copies


def _fan_entries(cover: SceneCover):
    """Flattened (face, fan id) membership pairs."""
    faces, fans = [], []
    for f, ids in enumerate(cover.face_fans):
        if not ids:
            continue
        for fi in ids:
            faces.append(f)
            fans.append(fi)
    return (np.asarray(faces, dtype=np.int64),
            np.asarray(fans, dtype=np.int64))


def preprocess(scene: Scene, evg: Evg, cover: SceneCover,
               params: Params) -> Structures:
    rows = CoverRows(cover)
    entry_face, entry_fan = _fan_entries(cover)
    n_faces = cover.sub.face_count
    indexes = []
    for j in range(params.k):
        fan_bits, cover_bits = subset_bits(
            params, j, len(cover.fans), cover.total_copies)
        if len(entry_face):
            ve = np.bincount(entry_face, weights=fan_bits[entry_fan],
                             minlength=n_faces).astype(np.int64)
        else:
            ve = np.zeros(n_faces, dtype=np.int64)
        A, B = rows.tables(cover_bits)
        indexes.append(SampledIndex(j, fan_bits, cover_bits, ve, A, B))
    return Structures(scene, evg, cover, params, indexes)


def estimate_ve(structures: Structures, p: Point) -> mpq:
    """m^beta times the mean sampled-fan census at p's face."""
    cover = structures.cover
    face = cover.sub.locate_face(p)
    k = structures.params.k
    total = sum(int(ix.ve_by_face[face]) for ix in structures.indexes)
    return structures.params.m_beta * mpq(total, k)


def estimate_C(structures: Structures, p: Point) -> mpq:
    """Mean per-subset component-count estimate at p's refined face."""
    cover = structures.cover
    rf = cover.locate_refined(p)
    if rf is None:
        raise ValueError(f"{p} is outside the covered region")
    k = structures.params.k
    a = sum(int(ix.A[rf]) for ix in structures.indexes)
    b = sum(int(ix.B[rf]) for ix in structures.indexes)
    return structures.params.m_beta * mpq(a, k) - mpq(b, k)


def _approx_value(params: Params, ve_est: mpq, c_est: mpq):
    d = params.delta
    if d >= 1:
        raise DeltaTooLarge(f"delta = {d} (approximate path needs delta < 1)")
    if c_est < params.c_threshold():
        return ve_est / (1 - d), APPROX_SMALL_C
    return ve_est / (1 - d) - c_est / (1 + d), APPROX_LARGE_C


def query(scene: Scene, structures: Structures, params: Params,
          p: Point) -> QueryResult:
    outcome = budgeted_sweep(scene, p, params.budget)
    if outcome.completed:
        diag = {"budget": params.budget, "k": params.k}
        return QueryResult(mpq(outcome.profile.m_p), EXACT, diag)
    ve_est = estimate_ve(structures, p)
    c_est = estimate_C(structures, p)
    value, mode = _approx_value(params, ve_est, c_est)
    diag = {"ve": ve_est, "C": c_est, "budget": params.budget, "k": params.k}
    return QueryResult(value, mode, diag)


# ---------------------------------------------------------------------------
# distribution-level emulation
#
# For scenes whose triangle arrangement exceeds the capacity caps, the
# sampled estimators can still be studied: for a FIXED query point the
# sampled censuses depend only on the exact visibility profile at p (each
# visible endpoint owns exactly one fan triangle containing p; owner i has
# c_i cover copies containing p, each kept i.i.d.).  Drawing those counts
# directly is distributionally identical per query to building the real
# structures, at the price of losing cross-query correlation (acceptable
# for per-query statistics).

def emulated_estimates(profile, params: Params, rng) -> tuple:
    """One draw of (ve', C') at a point with the given exact profile."""
    scene_n = len(profile.subseg_counts) - 4
    prob = float(params.sample_prob)
    k = params.k
    ve_total = 0
    a_total = 0
    b_total = 0
    seg_counts = [profile.subseg_counts[i] for i in range(scene_n)
                  if profile.subseg_counts[i] >= 1]
    corner_full = {c: [False, False] for c in range(4)}
    for side, adj in profile.box_part_meta:
        si = side - scene_n
        for c in adj:
            if si == c:
                corner_full[c][0] = True
            elif si == (c + 1) % 4:
                corner_full[c][1] = True
    n_joins = sum(1 for c in range(4) if all(corner_full[c]))
    # empty or closed-ring box boundary still forms one component
    cycle_extra = 1 if len(profile.box_part_meta) == n_joins else 0
    for _ in range(k):
        ve_total += rng.binomial(profile.ve_p, prob) if profile.ve_p else 0
        for c in seg_counts:
            cj = rng.binomial(c, prob)
            a_total += cj
            if cj >= 1:
                b_total += 1
        part_hits = {}
        for row, (side, adj) in enumerate(profile.box_part_meta):
            hit = bool(rng.random() < prob)
            if hit:
                a_total += 1
            part_hits[row] = (side, adj, hit)
        for corner in range(4):
            got = [False, False]
            for side, adj, hit in part_hits.values():
                if corner not in adj or not hit:
                    continue
                si = side - scene_n
                if si == corner:
                    got[0] = True
                elif si == (corner + 1) % 4:
                    got[1] = True
            if got[0] and got[1]:
                b_total += 1
        b_total -= cycle_extra
    ve_est = params.m_beta * mpq(ve_total, k)
    c_est = params.m_beta * mpq(a_total, k) - mpq(b_total, k)
    return ve_est, c_est


def emulated_query(scene: Scene, params: Params, p: Point,
                   rng) -> QueryResult:
    """Query pipeline with emulated sampling (see module note above)."""
    outcome = budgeted_sweep(scene, p, params.budget)
    if outcome.completed:
        return QueryResult(mpq(outcome.profile.m_p), EXACT,
                           {"budget": params.budget, "k": params.k})
    from .exact_engine import sweep_unchecked
    profile = sweep_unchecked(scene, p)
    ve_est, c_est = emulated_estimates(profile, params, rng)
    value, mode = _approx_value(params, ve_est, c_est)
    diag = {"ve": ve_est, "C": c_est, "budget": params.budget,
            "k": params.k, "emulated": True}
    return QueryResult(value, mode, diag)
