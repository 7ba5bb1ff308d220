"""Command-line front end. Every stage reads and writes plain files in ``--out``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import pipeline
from .anchors import load_anchors
from .errors import BadInputError, SFSError
from .fileio import dequantize_top, dump_json, export_obj, load_json, read_height_csv, read_pgm, write_height_csv, write_pgm
from .eikonal import DEFAULT_EPS_SING, slowness_from_image
from .forward import render_lambertian
from .graph import build_graph, decompose, to_dot
from .grid import GridSpec, HeightField, IrradianceImage
from .maxcut import SolverReport
from .reconstruct import depth_rmse
from .singular import DEFAULT_MIN_SEP, detect_singular_points

EXIT_OK = 0


def read_image(path, extent=None) -> IrradianceImage:
    """PGM (8-bit) or irradiance CSV (same layout as height CSV)."""
    path = Path(path)
    if not path.exists():
        raise BadInputError(f"no such file: {path}")
    if path.suffix.lower() in (".pgm", ".pnm"):
        img = read_pgm(path)
        if extent:
            img = IrradianceImage(GridSpec(img.grid.width, img.grid.height, *extent), img.e, img.e_max)
        return dequantize_top(img)
    field = read_height_csv(path)
    e_max = float(field.z.max())
    if not 0.0 < e_max <= 1.0:
        raise BadInputError(f"{path}: irradiance must lie in (0, 1], max is {e_max}")
    return IrradianceImage(field.grid, field.z, e_max)


def write_image(img: IrradianceImage, out: Path) -> None:
    write_pgm(img, out / "image.pgm")
    write_height_csv(HeightField(img.grid, img.e), out / "image.csv")


def _outdir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise BadInputError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _analysis(args, img):
    return pipeline.analyze(img, args.eps_sing, args.min_sep, args.cycle_tol)


def _anchors(args, img):
    return load_anchors(args.anchors, img.grid) if args.anchors else None


def _graph_json(g) -> dict:
    return {
        "vertices": [p.to_json() for p in g.vertices],
        "edges": [{"i": e.i, "j": e.j, "w": e.w, "anchor": e.anchor} for e in g.edges],
    }


def _points_json(points) -> list:
    return [p.to_json() for p in points]


# -- subcommands ------------------------------------------------------------------


def cmd_render(args) -> int:
    out = _outdir(args)
    scene = pipeline.get_scene(args.scene)
    truth = scene.surface() if args.scale is None else pipeline.Scene(scene.kind, scene.grid, args.scale).surface()
    write_height_csv(truth, out / "truth.csv")
    write_image(render_lambertian(truth), out)
    print(f"wrote {out / 'truth.csv'}, {out / 'image.pgm'}, {out / 'image.csv'}")
    return EXIT_OK


def _load_input(args):
    if args.image:
        return read_image(args.image, args.extent), None
    if args.scene:
        scene = pipeline.get_scene(args.scene)
        return scene.image(), scene.surface()
    raise BadInputError("give --image or --scene")


def cmd_detect(args) -> int:
    out = _outdir(args)
    img, _ = _load_input(args)
    points = detect_singular_points(img, args.eps_sing, args.min_sep)
    dump_json(_points_json(points), out / "points.json")
    print(f"{len(points)} singular points -> {out / 'points.json'}")
    return EXIT_OK


def cmd_graph(args) -> int:
    out = _outdir(args)
    img, _ = _load_input(args)
    points = detect_singular_points(img, args.eps_sing, args.min_sep)
    s = slowness_from_image(img, args.eps_sing)
    g = build_graph(img, points, args.eps_sing, slowness=s)
    dec = decompose(g)
    dump_json(_points_json(points), out / "points.json")
    dump_json(
        {**_graph_json(g), "free_edges": [list(e) for e in dec.free_edges], "free_parts": [list(p) for p in dec.free_parts]},
        out / "graph.json",
    )
    (out / "graph.dot").write_text(to_dot(g))
    print(f"{g.n} vertices, {len(g.edges)} edges, {len(dec.free_parts)} free parts, {len(dec.free_edges)} free edges")
    return EXIT_OK


def cmd_solve(args) -> int:
    out = _outdir(args)
    img, _ = _load_input(args)
    an = _analysis(args, img)
    anchors = _anchors(args, img)
    report = an.report.to_json()
    cfg = an.report.chosen
    graph = an.graph
    if anchors:
        outcome = pipeline.run(img, anchors, accept_tol=args.accept_tol, analysis=an)
        res = outcome.resolution
        cfg, graph = outcome.config, outcome.graph
        report["resolved"] = {
            "config": cfg.to_json(),
            "choices": res.choices,
            "discrepancies": [list(d) for d in res.discrepancies],
            "order": res.order,
            "unresolved": [],
        }
    dump_json(_points_json(an.points), out / "points.json")
    dump_json(report, out / "report.json")
    (out / "graph.dot").write_text(to_dot(graph, cfg))
    state = "resolved" if anchors else f"{len(an.report.classes)} ambiguity classes"
    print(f"{len(an.points)} points, {len(an.graph.edges)} edges, {state} -> {out / 'report.json'}")
    return EXIT_OK


def _check_report(report: SolverReport, an) -> None:
    have = sorted(e.key for e in an.graph.core_edges())
    if sorted(report.chosen.signs) != have:
        raise BadInputError("report does not match the graph rebuilt from this image (different edges)")


def _write_surface(out: Path, outcome, truth: HeightField | None, extra: dict) -> dict:
    res = outcome.result
    write_height_csv(res.surface, out / "surface.csv")
    export_obj(res.surface, out / "surface.obj")
    metrics = {
        "render_residual": res.image_residual,
        "sources": res.sources,
        "negated": res.negated,
        "config": outcome.config.to_json(),
        **extra,
    }
    if truth is not None:
        rng = truth.depth_range()
        rmse = depth_rmse(res.surface, truth)
        metrics.update({"rmse": rmse, "depth_range": rng, "rmse_fraction": rmse / rng if rng > 0 else float("nan")})
    dump_json(metrics, out / "metrics.json")
    return metrics


def cmd_reconstruct(args) -> int:
    out = _outdir(args)
    img, truth = _load_input(args)
    if args.truth:
        truth = read_height_csv(args.truth, img.grid)
    if not args.report:
        raise BadInputError("--report is required (run the solve stage first)")
    report = SolverReport.from_json(load_json(args.report))
    an = _analysis(args, img)
    _check_report(report, an)
    an.report = report
    anchors = _anchors(args, img)
    if anchors:
        outcome = pipeline.run(img, anchors, accept_tol=args.accept_tol, truth=truth, analysis=an)
        extra = {"mode": "anchored"}
    else:
        outcome = pipeline.run(img, candidate_index=args.candidate, truth=truth, analysis=an)
        extra = {"mode": "candidate", "candidate": args.candidate}
    m = _write_surface(out, outcome, truth, extra)
    line = f"residual {m['render_residual']:.4g}"
    if "rmse" in m:
        line += f", rmse {m['rmse']:.4g} ({100 * m['rmse_fraction']:.2f}% of range)"
    print(line + f" -> {out / 'surface.obj'}")
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    """Render a scene, then run every stage on the rendered image."""
    out = _outdir(args)
    scene = pipeline.get_scene(args.scene or "bump")
    truth = scene.surface()
    img = render_lambertian(truth)
    write_height_csv(truth, out / "truth.csv")
    write_image(img, out)
    an = _analysis(args, img)
    if args.anchors == "auto":
        anchors = pipeline.anchors_from_truth(truth, an)
        dump_json([a.to_json() for a in anchors], out / "anchors.json")
    else:
        anchors = _anchors(args, img)
    dump_json(_points_json(an.points), out / "points.json")
    dump_json(an.report.to_json(), out / "report.json")
    if anchors:
        outcome = pipeline.run(img, anchors, accept_tol=args.accept_tol, truth=truth, analysis=an)
        extra = {"mode": "anchored"}
    else:
        outcome = pipeline.run(img, candidate_index=args.candidate, truth=truth, analysis=an)
        extra = {"mode": "candidate", "candidate": args.candidate}
    (out / "graph.dot").write_text(to_dot(outcome.graph, outcome.config))
    m = _write_surface(out, outcome, truth, extra)
    print(
        f"{args.scene or 'bump'}: {len(an.points)} points, {len(an.report.classes)} classes, "
        f"residual {m['render_residual']:.4g}, rmse {100 * m['rmse_fraction']:.2f}% of range"
    )
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sfsbc", description="Shape from shading with singular-point graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory (created if missing)")
    common.add_argument("--eps-sing", type=_positive(float), default=DEFAULT_EPS_SING)
    common.add_argument("--min-sep", type=_positive(float), default=DEFAULT_MIN_SEP)
    common.add_argument("--cycle-tol", type=_positive(float), default=None, help="default: 10%% of mean edge weight")
    common.add_argument("--accept-tol", type=_positive(float), default=None, help="fraction of class mean weight")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--image", help="PGM or irradiance CSV")
    source.add_argument("--scene", choices=sorted(pipeline.SCENES), help="synthetic scene instead of --image")
    source.add_argument(
        "--extent", type=float, nargs=4, metavar=("XMIN", "XMAX", "YMIN", "YMAX"),
        help="world extent of a PGM image (default [-2.5, 2.5]^2)",
    )

    p = sub.add_parser("render", parents=[common], help="write truth.csv and image.pgm for a scene")
    p.add_argument("--scene", required=True, choices=sorted(pipeline.SCENES))
    p.add_argument("--scale", type=float, default=None, help="depth scale (default 1)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("detect", parents=[common, source], help="singular points")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("graph", parents=[common, source], help="configuration graph and decomposition")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("solve", parents=[common, source], help="solver report, optionally resolved by anchors")
    p.add_argument("--anchors", help="anchors JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reconstruct", parents=[common, source], help="dense surface, OBJ and metrics")
    p.add_argument("--report", help="report.json from the solve stage")
    p.add_argument("--anchors", help="anchors JSON")
    p.add_argument("--candidate", type=int, default=0, help="unanchored: bit k flips class k")
    p.add_argument("--truth", help="true height CSV for the RMSE metric")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("roundtrip", parents=[common], help="render a scene and run every stage")
    p.add_argument("--scene", default="bump", choices=sorted(pipeline.SCENES))
    p.add_argument("--anchors", help="anchors JSON, or 'auto' to sample two per class from the truth")
    p.add_argument("--candidate", type=int, default=0)
    p.set_defaults(func=cmd_roundtrip)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SFSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BadInputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
