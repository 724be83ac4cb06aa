"""Command-line entry point.

Exit codes: 0 success, 1 usage or malformed input, 2 empty slice,
3 degenerate polygon, 4 endpoint failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import (
    CredentialMissing,
    DegeneratePolygon,
    EmptySlice,
    EndpointUnreachable,
    MillerLatentError,
)
from .formats import read_fragment, read_obj, round_sig, scene_svg
from .latent import check_consistency, infer_latent
from .miller import parse_components
from .regime import DEFAULTS, assess, snap_to_miller
from .shape import classify, signature
from .slicing import CutPlane, plane_patch_mesh, slice_cube
from .tolerances import PROFILES, get_profile

log = logging.getLogger("millerlatent")

EXIT_OK, EXIT_USAGE, EXIT_EMPTY, EXIT_DEGENERATE, EXIT_ENDPOINT = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(args, payload, text):
    if args.json:
        print(json.dumps(round_sig(payload), sort_keys=True))
    else:
        print(text)


def _offset(text):
    try:
        d = Fraction(text)
    except (ValueError, ZeroDivisionError):
        d = float(text)
        if not math.isfinite(d):
            raise argparse.ArgumentTypeError(f"offset must be finite, got {text!r}") from None
    return d


def _plane(index, d):
    return CutPlane(parse_components(index), d)


def cmd_slice(args):
    plane = _plane(args.index, args.d)
    section = slice_cube(plane)
    if section is None:
        raise EmptySlice(f"{args.index} with d={args.d} does not cut the unit cube")
    if args.svg:
        Path(args.svg).write_text(scene_svg(plane_patch_mesh(plane), label=f"{args.index} d={args.d}"))
    verts = [[float(c) for c in v] for v in section.vertices]
    _emit(
        args,
        {"index": args.index, "offset": float(plane.offset), "vertices": verts, "area": section.area},
        "\n".join(" ".join(f"{c:.12g}" for c in v) for v in verts),
    )


def cmd_classify(args):
    f = read_fragment(args.fragment)
    cls = classify(f, get_profile(args.profile))
    sig = signature(f)
    _emit(args, {"shape_class": str(cls), "signature": sig.to_dict()}, str(cls))


def cmd_infer(args):
    f = read_fragment(args.fragment)
    hyps = infer_latent(f, max_index=args.max_index, offsets_per_plane=args.offsets, top_k=args.top_k,
                        workers=args.workers)
    lines = [f"{h.family} {h.score:.6g} {h.best_offset:.6g}" for h in hyps]
    _emit(args, {"hypotheses": [h.to_dict() for h in hyps]}, "\n".join(lines))


def cmd_check(args):
    f = read_fragment(args.fragment)
    plane = _plane(args.index, args.d)
    threshold = args.threshold if args.threshold is not None else get_profile(args.profile).consistency
    v = check_consistency(f, plane, threshold)
    word = "consistent" if v.consistent else "inconsistent"
    _emit(args, {"consistent": v.consistent, "residual": v.residual, "threshold": v.threshold},
          f"{word} residual={v.residual:.6g} threshold={v.threshold:.6g}")


def cmd_assess(args):
    surface = read_obj(args.mesh)
    v = assess(surface, theta_single=args.theta_single, theta_facet=args.theta_facet, rho_max=args.rho_max,
               angle_tol=math.radians(args.angle_tol))
    rows = [f"{v.mode} applicable={str(v.applicable).lower()}"]
    if v.fits:
        rows.append("support  rms        normal                          index")
    for fit in v.fits:
        idx = snap_to_miller(fit.normal)
        n = " ".join(f"{c:+.4f}" for c in fit.normal)
        rows.append(f"{fit.support_area:7.4f}  {fit.rms_residual:.3e}  {n:30s}  {idx if idx else 'unindexed facet'}")
    _emit(args, {"mode": str(v.mode), "applicable": v.applicable, "fits": [f.to_dict() for f in v.fits]},
          "\n".join(rows))


def cmd_gen(args):
    from .datagen import DatasetConfig, emit_dataset

    cfg = DatasetConfig.from_dict(json.loads(Path(args.config).read_text())) if args.config else DatasetConfig()
    records = emit_dataset(cfg, args.out, seed=args.seed, threads=args.threads)
    kinds = {}
    for r in records:
        kinds[r["kind"]] = kinds.get(r["kind"], 0) + 1
    _emit(args, {"out": str(args.out), "samples": len(records), "kinds": kinds},
          f"wrote {len(records)} samples to {args.out}")


def _endpoint(args, records):
    from .harness import ModelEndpointConfig, MockResponder

    if args.mock:
        return ModelEndpointConfig("http://mock.invalid"), MockResponder(records, args.mock, seed=args.seed).transport()
    if not args.endpoint:
        raise ValueError("eval needs --endpoint CONFIG or --mock MODE")
    return ModelEndpointConfig.load(args.endpoint), None


def cmd_eval(args):
    from .datagen import load_manifest
    from .harness import run_eval, score, write_report, write_transcripts

    manifest = Path(args.manifest)
    records = load_manifest(manifest)
    dataset_dir = manifest if manifest.is_dir() else manifest.parent
    endpoint, transport = _endpoint(args, records)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        results = run_eval(records, endpoint, args.tasks, dataset_dir=dataset_dir, transport=transport,
                           fewshot=args.fewshot)
    except EndpointUnreachable as exc:
        write_transcripts(exc.results, out / "transcripts.jsonl")
        raise
    write_transcripts(results, out / "transcripts.jsonl")
    report = score(results)
    write_report(report, out)
    _emit(args, {"out": str(out), "results": len(results), "metrics": _metrics(report)},
          report.to_markdown())


def _metrics(report):
    return {f"{m.task}/{m.name}": m.value for m in report.metrics}


def cmd_score(args):
    from .harness import read_transcripts, score, write_report

    report = score(read_transcripts(args.transcripts))
    out = Path(args.out) if args.out else Path(args.transcripts).parent
    write_report(report, out)
    _emit(args, {"out": str(out), "metrics": _metrics(report)}, report.to_markdown())


def cmd_mock_server(args):
    from .datagen import load_manifest
    from .harness import MockResponder, MockServer

    srv = MockServer(MockResponder(load_manifest(args.manifest), args.mode, seed=args.seed), port=args.port)
    print(f"mock endpoint ({args.mode}) listening on {srv.url}", flush=True)
    try:
        srv.serve_forever()
    except KeyboardInterrupt:
        pass


def build_parser():
    p = _Parser(prog="millerlatent", description="Plane-index reasoning about cube cross-sections and fracture meshes.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--profile", choices=sorted(PROFILES), default="exact", help="tolerance profile")
    common.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("slice", parents=[common], help="cross-section of the unit cube by a plane")
    s.add_argument("index", help='Miller index such as "(111)" or "(1-10)"')
    s.add_argument("--d", type=_offset, required=True, help="offset in hx+ky+lz=d (fractions like 1/2 allowed)")
    s.add_argument("--svg", help="write the cube and cross-section as SVG")
    s.set_defaults(func=cmd_slice)

    s = sub.add_parser("classify", parents=[common], help="shape class of a 2D fragment")
    s.add_argument("fragment", help="SVG polygon, JSON list or x y text file")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("infer", parents=[common], help="rank plane families for a fragment")
    s.add_argument("fragment")
    s.add_argument("--max-index", type=int, default=2)
    s.add_argument("--top-k", type=int, default=5)
    s.add_argument("--offsets", type=int, default=48, help="grid offsets per plane before refinement")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_infer)

    s = sub.add_parser("check", parents=[common], help="is a fragment a cross-section of a given plane")
    s.add_argument("fragment")
    s.add_argument("index")
    s.add_argument("--d", type=_offset, required=True)
    s.add_argument("--threshold", type=float, help="residual threshold (default from --profile)")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("assess", parents=[common], help="regime verdict for a fracture mesh (OBJ)")
    s.add_argument("mesh")
    s.add_argument("--theta-single", type=float, default=DEFAULTS["theta_single"])
    s.add_argument("--theta-facet", type=float, default=DEFAULTS["theta_facet"])
    s.add_argument("--rho-max", type=float, default=DEFAULTS["rho_max"])
    s.add_argument("--angle-tol", type=float, default=math.degrees(DEFAULTS["angle_tol"]), help="degrees")
    s.set_defaults(func=cmd_assess)

    s = sub.add_parser("gen", parents=[common], help="generate a synthetic dataset")
    s.add_argument("--config", help="JSON dataset config (default: built-in 24-sample config)")
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("eval", parents=[common], help="query a model endpoint on a dataset")
    s.add_argument("manifest", help="manifest.jsonl or the dataset directory")
    s.add_argument("--endpoint", help="JSON endpoint config")
    s.add_argument("--mock", choices=("echo", "invert", "random-family", "maybe"),
                   help="answer with the in-process mock instead of an endpoint")
    s.add_argument("--tasks", nargs="+", choices=("Inference", "Applicability", "Consistency"))
    s.add_argument("--fewshot", type=int, default=2)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("score", parents=[common], help="score a transcripts file")
    s.add_argument("transcripts")
    s.add_argument("--out", help="report directory (default: next to transcripts)")
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("mock-server", parents=[common], help="serve the mock endpoint over HTTP")
    s.add_argument("manifest")
    s.add_argument("--mode", choices=("echo", "invert", "random-family", "maybe"), default="echo")
    s.add_argument("--port", type=int, default=8765)
    s.set_defaults(func=cmd_mock_server)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except EmptySlice as exc:
        print(f"empty slice: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except DegeneratePolygon as exc:
        print(f"degenerate polygon: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (EndpointUnreachable, CredentialMissing) as exc:
        print(f"endpoint failure: {exc}", file=sys.stderr)
        return EXIT_ENDPOINT
    except (MillerLatentError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
