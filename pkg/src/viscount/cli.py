"""Command line harness: scene generation, validation campaigns,
single queries, benchmark sweeps and debug SVG figures.

Exit codes: 0 ok, 1 invariant violation, 2 bad input, 3 degenerate query.
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
import time

from gmpy2 import mpq

from . import scene as scene_mod
from . import exact_engine as engine
from . import gp_graph
from .geom_core import Point
from .evg import build_evg
from .covers import SceneCover
from .arrangement import CapacityError
from .trapmap import OnEdge
from . import estimators

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_BAD_INPUT = 2
EXIT_DEGENERATE = 3


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _load_scene(args) -> scene_mod.Scene:
    if getattr(args, "scene", None):
        try:
            with open(args.scene, encoding="utf-8") as fh:
                return scene_mod.load(fh.read())
        except FileNotFoundError:
            raise CliError(f"scene file not found: {args.scene}",
                           EXIT_BAD_INPUT)
        except scene_mod.ParseError as exc:
            raise CliError(f"bad scene file: {exc}", EXIT_BAD_INPUT)
    if getattr(args, "generate", None):
        bbox = _parse_bbox(args.bbox)
        return scene_mod.generate(args.generate, bbox, seed=args.seed)
    raise CliError("need --scene FILE or --generate N", EXIT_BAD_INPUT)


def _parse_bbox(text):
    try:
        x0, y0, x1, y1 = (mpq(t) for t in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise CliError(f"bad bbox {text!r}", EXIT_BAD_INPUT)
    return (x0, y0, x1, y1)


def _parse_point(text) -> Point:
    try:
        x, y = (mpq(t) for t in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise CliError(f"bad point {text!r}", EXIT_BAD_INPUT)
    return Point(x, y)


def random_admissible_points(scene, count, seed):
    """Deterministic admissible query points for campaigns."""
    rng = random.Random(seed)
    x0, y0, x1, y1 = scene.bbox
    pts = []
    attempts = 0
    while len(pts) < count:
        attempts += 1
        if attempts > 1000 * (count + 10):
            raise CliError("could not sample admissible points",
                           EXIT_DEGENERATE)
        q = Point(x0 + (x1 - x0) * mpq(rng.randint(1, 9999), 10000),
                  y0 + (y1 - y0) * mpq(rng.randint(1, 9999), 10000))
        if scene_mod.admissible(scene, q):
            pts.append(q)
    return pts


# ---------------------------------------------------------------------------
# subcommands

def cmd_generate(args):
    sc = scene_mod.generate(args.n, _parse_bbox(args.bbox), seed=args.seed)
    text = scene_mod.save(sc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out} ({sc.n} segments)")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args):
    """Full invariant suite over generated scenes; exit 1 on violation."""
    bad = 0
    total = 0
    for i in range(args.scenes):
        seed = args.seed + i
        sc = scene_mod.generate(args.n, _parse_bbox(args.bbox), seed=seed)
        violations = scene_mod.validate(sc)
        if violations:
            print(f"scene seed={seed}: INVALID: {violations[0]}")
            bad += 1
            continue
        for q in random_admissible_points(sc, args.queries, seed * 977 + 1):
            total += 1
            profile = engine.sweep(sc, q)
            g = gp_graph.build(sc, q, profile)
            checks = [
                ("identity", gp_graph.m_p_via_identity(g, profile.ve_p)
                 == profile.m_p),
                ("oracle_m", engine.oracle_m_p(sc, q) == profile.m_p),
                ("oracle_ve", engine.oracle_ve_p(sc, q) == profile.ve_p),
                ("two_approx", profile.m_p <= profile.ve_p
                 <= 2 * profile.m_p or profile.m_p == 0),
                ("components", g.component_count == _component_formula(
                    sc, profile)),
            ]
            for name, ok in checks:
                if not ok:
                    print(f"scene seed={seed} q={q}: {name} FAILED")
                    bad += 1
    print(f"validate: {total} queries checked, {bad} violations")
    return EXIT_OK if bad == 0 else EXIT_VIOLATION


def _component_formula(sc, profile):
    base = profile.box_parts if profile.box_parts >= 1 else 1
    return base + sum(max(profile.subseg_counts[i] - 1, 0)
                      for i in range(sc.n))


def cmd_query(args):
    sc = _load_scene(args)
    p = _parse_point(args.point)
    if not scene_mod.admissible(sc, p):
        print(f"point {args.point} is not an admissible query point")
        return EXIT_DEGENERATE
    evg = build_evg(sc)
    params = estimators.Params(
        beta=mpq(args.beta), delta=mpq(args.delta), seed=args.seed,
        m=evg.m, budget_override=args.budget_override)
    outcome = engine.budgeted_sweep(sc, p, params.budget)
    if outcome.completed:
        result = estimators.QueryResult(
            mpq(outcome.profile.m_p), estimators.EXACT,
            {"budget": params.budget, "k": params.k})
    else:
        try:
            cover = SceneCover(sc, evg)
        except CapacityError as exc:
            print(f"scene too complex for sampled structures: {exc}")
            return EXIT_BAD_INPUT
        structures = estimators.preprocess(sc, evg, cover, params)
        try:
            result = estimators.query(sc, structures, params, p)
        except OnEdge:
            print("query point lies on an arrangement edge")
            return EXIT_DEGENERATE
    print(f"value = {result.value} ({float(result.value):.6g})")
    print(f"mode = {result.mode}")
    for key, val in sorted(result.diagnostics.items()):
        print(f"{key} = {val}")
    if args.oracle:
        m_true = engine.oracle_m_p(sc, p)
        print(f"oracle m_p = {m_true}")
        if result.mode == estimators.EXACT:
            print(f"match = {result.value == m_true}")
    return EXIT_OK


def cmd_bench(args):
    sc = _load_scene(args)
    evg = build_evg(sc)
    betas = [mpq(b) for b in args.betas.split(",")]
    queries = random_admissible_points(sc, args.queries, args.seed * 31 + 7)
    rows = []
    for beta in betas:
        params = estimators.Params(beta=beta, delta=mpq(args.delta),
                                   seed=args.seed, m=evg.m,
                                   budget_override=args.budget_override)
        t0 = time.perf_counter()
        try:
            cover = SceneCover(sc, evg)
            structures = estimators.preprocess(sc, evg, cover, params)
        except CapacityError as exc:
            print(f"beta={beta}: skipped ({exc})")
            continue
        pre_s = time.perf_counter() - t0
        modes = {estimators.EXACT: 0, estimators.APPROX_SMALL_C: 0,
                 estimators.APPROX_LARGE_C: 0}
        errs = []
        t0 = time.perf_counter()
        answered = 0
        for q in queries:
            try:
                res = estimators.query(sc, structures, params, q)
            except OnEdge:
                continue
            answered += 1
            modes[res.mode] += 1
            m_true = engine.oracle_m_p(sc, q)
            if m_true:
                errs.append(abs(float(res.value) / m_true - 1))
        query_s = (time.perf_counter() - t0) / max(1, answered)
        rows.append({
            "n": sc.n, "m": evg.m, "beta": str(beta), "delta": args.delta,
            "k": params.k, "budget": params.budget,
            "triangles": structures.total_triangles,
            "faces": cover.sub.face_count,
            "preprocess_s": f"{pre_s:.4f}",
            "per_query_s": f"{query_s:.6f}",
            "exact": modes[estimators.EXACT],
            "small_c": modes[estimators.APPROX_SMALL_C],
            "large_c": modes[estimators.APPROX_LARGE_C],
            "max_rel_err": f"{max(errs):.6f}" if errs else "",
            "mean_rel_err": f"{sum(errs)/len(errs):.6f}" if errs else "",
        })
    out = args.out or "bench.csv"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()) if rows
                                else ["n"])
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {out} ({len(rows)} rows)")
    return EXIT_OK


def _svg_coord(scene, p, size=640):
    x0, y0, x1, y1 = scene.bbox
    sx = float((p.x - x0) / (x1 - x0)) * (size - 40) + 20
    sy = size - (float((p.y - y0) / (y1 - y0)) * (size - 40) + 20)
    return sx, sy


def cmd_figures(args):
    """Debug SVG: scene, query point, occlusion-graph edges."""
    sc = _load_scene(args)
    p = _parse_point(args.point)
    if not scene_mod.admissible(sc, p):
        print(f"point {args.point} is not admissible")
        return EXIT_DEGENERATE
    profile = engine.sweep(sc, p)
    parts = ['<svg xmlns="http://www.w3.org/2000/svg" width="640" '
             'height="640" viewBox="0 0 640 640">',
             '<rect x="20" y="20" width="600" height="600" fill="none" '
             'stroke="black"/>']
    for s in sc.segments:
        (ax, ay), (bx, by) = _svg_coord(sc, s.a), _svg_coord(sc, s.b)
        parts.append(f'<line x1="{ax:.1f}" y1="{ay:.1f}" x2="{bx:.1f}" '
                     f'y2="{by:.1f}" stroke="steelblue" stroke-width="2"/>')
    for eid in sc.endpoint_ids():
        a = sc.endpoint(eid)
        if eid in profile.visible_endpoints:
            continue
        owner = gp_graph.covering_owner(sc, p, a)
        if owner is None or owner >= sc.n:
            continue
        seg = sc.segments[owner]
        mid = Point((seg.a.x + seg.b.x) / 2, (seg.a.y + seg.b.y) / 2)
        (ax, ay), (mx, my) = _svg_coord(sc, a), _svg_coord(sc, mid)
        parts.append(f'<line x1="{ax:.1f}" y1="{ay:.1f}" x2="{mx:.1f}" '
                     f'y2="{my:.1f}" stroke="tomato" stroke-width="1" '
                     'stroke-dasharray="4 3"/>')
    px, py = _svg_coord(sc, p)
    parts.append(f'<circle cx="{px:.1f}" cy="{py:.1f}" r="4" fill="black"/>')
    parts.append("</svg>")
    out = args.out or "figure.svg"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing

def _apply_config(argv):
    """Expand --config FILE of key=value lines into long flags."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        raise CliError("--config needs a file", EXIT_BAD_INPUT)
    extra = []
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise CliError(f"bad config line: {line!r}",
                                   EXIT_BAD_INPUT)
                key, _, val = line.partition("=")
                extra.extend([f"--{key.strip()}", val.strip()])
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}", EXIT_BAD_INPUT)
    return argv[:i] + extra + argv[i + 2:]


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="viscount",
        description="visibility counting among disjoint segments")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, scene_input=True):
        if scene_input:
            sp.add_argument("--scene")
            sp.add_argument("--generate", type=int, metavar="N")
        sp.add_argument("--bbox", default="0,0,10,10")
        sp.add_argument("--seed", type=int, default=1)

    g = sub.add_parser("generate", help="generate a random scene")
    g.add_argument("--n", type=int, required=True)
    common(g, scene_input=False)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("validate", help="run the invariant suite")
    common(v, scene_input=False)
    v.add_argument("--scenes", type=int, default=5)
    v.add_argument("--n", type=int, default=10)
    v.add_argument("--queries", type=int, default=20)
    v.set_defaults(func=cmd_validate)

    q = sub.add_parser("query", help="answer one query point")
    common(q)
    q.add_argument("--point", required=True)
    q.add_argument("--beta", default="0")
    q.add_argument("--delta", default="0.25")
    q.add_argument("--budget-override", type=int, default=None)
    q.add_argument("--oracle", action="store_true")
    q.set_defaults(func=cmd_query)

    b = sub.add_parser("bench", help="benchmark over a beta grid")
    common(b)
    b.add_argument("--betas", default="0,0.33,0.66")
    b.add_argument("--delta", default="0.25")
    b.add_argument("--budget-override", type=int, default=None)
    b.add_argument("--queries", type=int, default=50)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    f = sub.add_parser("figures", help="debug SVG of a query")
    common(f)
    f.add_argument("--point", required=True)
    f.add_argument("--out")
    f.set_defaults(func=cmd_figures)
    return ap


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(argv)
        args = _build_parser().parse_args(argv)
        delta = getattr(args, "delta", None)
        if delta is not None and not 0 < mpq(delta) <= mpq(1, 2):
            raise CliError(
                f"delta {delta} outside (0, 1/2]; the approximation factor "
                "diverges as delta approaches 1 (DELTA_TOO_LARGE)",
                EXIT_BAD_INPUT)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except estimators.DeltaTooLarge as exc:
        print(f"error: DELTA_TOO_LARGE: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except engine.InadmissibleQuery as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except scene_mod.GenerationStalled as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
