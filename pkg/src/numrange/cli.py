"""Command-line front end.

Every command reads a matrix JSON (or CSV tables for ``plot``).  Errors are
reported as one JSON object on stderr with exit code 2 for bad input and 3
for numerical failures.
"""

from __future__ import annotations

import argparse
import hashlib
import inspect
import json
import os
import sys
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from . import __version__
from . import io as nio
from .errors import InvalidInput, NumRangeError

SEED_ENV = "NUMRANGE_SEED"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InvalidInput(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise InvalidInput(f"expected re,im but got {text!r}")
    try:
        re_, im_ = float(parts[0]), float(parts[1])
    except ValueError:
        raise InvalidInput(f"expected re,im but got {text!r}") from None
    if not (np.isfinite(re_) and np.isfinite(im_)):
        raise InvalidInput("point must be finite")
    return complex(re_, im_)


def _emit(text: str, path: str | None, manifest: nio.RunManifest | None = None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).write_text(text)
    if manifest is not None:
        nio.sidecar_path(path, ".manifest.json").write_text(manifest.to_json())


def _wrap(manifest: nio.RunManifest, result) -> str:
    return nio.dumps({"manifest": manifest.to_dict(), "result": result}) + "\n"


# ---- commands ---------------------------------------------------------------

def cmd_boundary(args) -> int:
    from .support import boundary_scan

    A = nio.load_matrix(args.matrix)
    model = boundary_scan(A, grid_size=args.grid)
    man = nio.RunManifest("boundary", nio.matrix_hash(A),
                          {"grid": args.grid, "gap_tol": model.gap_tol,
                           "flat_tol": model.flat_tol})
    if args.json:
        summary = {
            "points": len(model.points),
            "degenerate": model.degenerate,
            "corners": [c.z for c in model.corners],
            "flats": [{"theta": f.theta, "endpoints": list(f.endpoints),
                       "essential_like": f.essential_like} for f in model.flats],
            "notes": model.notes,
        }
        if args.output:
            _emit(nio.boundary_csv(model), args.output, man)
        sys.stdout.write(_wrap(man, summary))
    else:
        _emit(nio.boundary_csv(model), args.output, man)
        if args.output:
            print(f"{len(model.points)} boundary points, {len(model.corners)} corners, "
                  f"{len(model.flats)} flat portions -> {args.output}")
    return 0


def cmd_curves(args) -> int:
    from .curves import track_branches

    A = nio.load_matrix(args.matrix)
    a, b = args.range if args.range else (0.0, 2 * np.pi)
    branches = track_branches(A, (a, b), grid_size=args.grid, top_k=args.top)
    man = nio.RunManifest("curves", nio.matrix_hash(A),
                          {"range": [a, b], "grid": args.grid, "top": args.top})
    text = nio.curves_csv(branches)
    if args.json:
        if args.output:
            _emit(text, args.output, man)
        summary = [{"branch_id": br.id, "samples": len(br.thetas),
                    "crossing": None if br.crossing is None else
                    {"theta": br.crossing.theta, "overlap": br.crossing.overlap}}
                   for br in branches]
        sys.stdout.write(_wrap(man, summary))
    else:
        _emit(text, args.output, man)
        if args.output:
            print(f"{len(branches)} branches -> {args.output}")
    return 0


def cmd_classify(args) -> int:
    from .classify import ClassifyOptions, classify_boundary, classify_point
    from .support import boundary_scan

    A = nio.load_matrix(args.matrix)
    meta = nio.load_metadata(args.metadata, A) if args.metadata else None
    opt = ClassifyOptions(arc_samples=args.arc_samples)
    model = boundary_scan(A, grid_size=args.grid)
    if args.z:
        reports = [classify_point(A, parse_complex(s), model, options=opt, metadata=meta)
                   for s in args.z]
        result = {"reports": [r.to_dict() for r in reports]}
    else:
        bc = classify_boundary(A, model, options=opt, metadata=meta)
        reports = bc.reports
        result = bc.to_dict()
    tol = reports[0].tolerances if reports else {}
    man = nio.RunManifest("classify", nio.matrix_hash(A),
                          {"grid": args.grid, "arc_samples": args.arc_samples, **tol})
    if args.json or args.output:
        _emit(_wrap(man, result), args.output)
    if not args.json:
        for r in reports:
            if args.z or r.verdict != "strong":
                print(f"z = {r.z.real:+.6f}{r.z.imag:+.6f}i  {r.location:14s} "
                      f"{r.verdict:12s} {r.rule}")
        if not args.z:
            print(f"{len(reports)} points classified, "
                  f"{len(result['non_strong'])} not strongly continuous")
    return 0


def cmd_invert(args) -> int:
    from .inverse import preimage

    A = nio.load_matrix(args.matrix)
    z = parse_complex(args.z)
    seed = default_seed() if args.seed is None else args.seed
    res = preimage(A, z, tol=args.tol, seed=seed)
    man = nio.RunManifest("invert", nio.matrix_hash(A), {"tol": args.tol}, {"seed": seed})
    if args.json or args.output:
        _emit(_wrap(man, res.to_dict()), args.output)
    if not args.json:
        print(f"construction {res.construction}, residual {res.residual:.3e}")
        print("x = " + " ".join(f"{c.real:+.6f}{c.imag:+.6f}i" for c in res.x))
    return 0


def cmd_probe(args) -> int:
    from .probe import ProbeConfig, cap_image, openness_verdict
    from .support import boundary_scan

    A = nio.load_matrix(args.matrix)
    z = parse_complex(args.z)
    seed = default_seed() if args.seed is None else args.seed
    cfg = ProbeConfig(seed=seed, samples_per_eps=args.samples)
    if args.eps:
        cfg.eps_list = tuple(args.eps)
    cfg.validate()
    model = boundary_scan(A, grid_size=args.grid)
    rep = openness_verdict(A, model, z, cfg, variant=args.variant)
    man = nio.RunManifest("probe", nio.matrix_hash(A),
                          {"eps": list(cfg.eps_list), "samples_per_eps": cfg.samples_per_eps,
                           "delta_min": float(cfg.deltas()[0]), "margin_rel": cfg.margin_rel,
                           "grid": args.grid, "variant": args.variant},
                          {"seed": seed})
    if args.cloud:
        if not rep.probes:
            raise InvalidInput("no preimage was tested, so there is no cloud to write")
        cloud = cap_image(A, rep.probes[0].x, cfg.eps_list[-1], cfg, seed)
        _emit(nio.cloud_csv(cloud), args.cloud, man)
    if args.json or args.output:
        _emit(_wrap(man, rep.to_dict()), args.output)
    if not args.json:
        print(f"verdict {rep.verdict} ({rep.variant}) at {len(rep.probes)} preimage(s), "
              f"r0 = {rep.r0:.3e}")
        for k, p in enumerate(rep.probes):
            last = p.records[-1]
            print(f"  preimage {k}: {p.verdict}; eps={last.eps}: delta_max="
                  f"{last.delta_max_covered:.3g}, uncovered {last.uncovered_distance:.3e}")
    return 0


def _param_value(raw: str):
    try:
        v = json.loads(raw)
    except json.JSONDecodeError:
        return raw
    if isinstance(v, list) and v and all(isinstance(e, list) and len(e) == 2 for e in v):
        return [complex(a, b) for a, b in v]
    return v


def cmd_gallery(args) -> int:
    from .gallery import BUILDERS

    if args.gallery_cmd == "list":
        items = [{"name": k, "params": str(inspect.signature(f))} for k, f in BUILDERS.items()]
        if args.json:
            sys.stdout.write(nio.dumps(items) + "\n")
        else:
            for it in items:
                print(f"{it['name']}{it['params']}")
        return 0
    if args.name not in BUILDERS:
        raise InvalidInput(f"unknown gallery operator {args.name!r}; "
                           f"choose from {', '.join(BUILDERS)}")
    params = {}
    for p in args.param or []:
        key, sep, raw = p.partition("=")
        if not sep or not key:
            raise InvalidInput(f"parameter must be key=value, got {p!r}")
        params[key] = _param_value(raw)
    try:
        op = BUILDERS[args.name](**params)
    except TypeError as e:
        raise InvalidInput(f"bad parameters for {args.name}: {e}") from None
    man = nio.RunManifest("gallery build", nio.matrix_hash(op.matrix),
                          {"name": args.name, "params": {k: str(v) for k, v in params.items()}})
    meta_path = nio.sidecar_path(args.output, ".meta.json") if args.meta is None else Path(args.meta)
    _emit(nio.matrix_to_json(op.matrix), args.output, man)
    nio.save_metadata(op.matrix, op.metadata, meta_path)
    if args.json:
        sys.stdout.write(_wrap(man, {"matrix": args.output, "metadata": str(meta_path),
                                     "dim": op.matrix.shape[0], "name": op.name}))
    else:
        print(f"{op.name}: dim {op.matrix.shape[0]} -> {args.output}, metadata -> {meta_path}")
    return 0


def cmd_plot(args) -> int:
    from .svg import render_svg

    rows = nio.read_boundary_csv(args.boundary)
    curves = nio.read_curves_csv(args.curves) if args.curves else None
    marks = [parse_complex(s) for s in args.mark or []]
    h = hashlib.sha256(Path(args.boundary).read_bytes())
    if args.curves:
        h.update(Path(args.curves).read_bytes())
    man = nio.RunManifest("plot", h.hexdigest(), {}, {})
    svg = render_svg(rows, curves, marks)
    svg = svg.replace("\n", f"\n<metadata>{escape(nio.dumps(man.to_dict()))}</metadata>\n", 1)
    _emit(svg, args.output)
    if args.json:
        sys.stdout.write(_wrap(man, {"output": args.output, "boundary_points": len(rows),
                                     "curves": len({r[0] for r in curves or []})}))
    return 0


# ---- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")

    p = _Parser(prog="numrange", description="Numerical range geometry and inverse continuity.")
    p.add_argument("--version", action="version", version=f"numrange {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("boundary", parents=[common], help="scan the boundary of W(A) to CSV")
    s.add_argument("matrix")
    s.add_argument("--grid", type=int, default=256)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_boundary)

    s = sub.add_parser("curves", parents=[common], help="track eigenvalue branches to CSV")
    s.add_argument("matrix")
    s.add_argument("--range", type=float, nargs=2, metavar=("A", "B"))
    s.add_argument("--top", type=int, default=3)
    s.add_argument("--grid", type=int, default=256)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_curves)

    s = sub.add_parser("classify", parents=[common], help="continuity verdicts on the boundary")
    s.add_argument("matrix")
    s.add_argument("--metadata")
    s.add_argument("--z", action="append", help="classify this point (repeatable)")
    s.add_argument("--grid", type=int, default=512)
    s.add_argument("--arc-samples", type=int, default=32)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("invert", parents=[common], help="find x with <Ax,x> = z")
    s.add_argument("matrix")
    s.add_argument("--z", required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--seed", type=int)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_invert)

    s = sub.add_parser("probe", parents=[common], help="sample cap images to test openness")
    s.add_argument("matrix")
    s.add_argument("--z", required=True)
    s.add_argument("--eps", type=float, nargs="+")
    s.add_argument("--seed", type=int)
    s.add_argument("--samples", type=int, default=20000)
    s.add_argument("--variant", choices=("strong", "weak"), default="strong")
    s.add_argument("--grid", type=int, default=512)
    s.add_argument("--cloud", help="write the smallest-eps cap image of the first preimage")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_probe)

    g = sub.add_parser("gallery", help="built-in example operators")
    gs = g.add_subparsers(dest="gallery_cmd", required=True, parser_class=_Parser)
    gl = gs.add_parser("list", parents=[common])
    gl.set_defaults(func=cmd_gallery)
    gb = gs.add_parser("build", parents=[common])
    gb.add_argument("name")
    gb.add_argument("--param", action="append", metavar="KEY=VALUE",
                    help="builder argument; VALUE is JSON, [[re,im],...] for complex lists")
    gb.add_argument("-o", "--output", required=True)
    gb.add_argument("--meta", help="metadata sidecar path (default: <output>.meta.json)")
    gb.set_defaults(func=cmd_gallery)

    s = sub.add_parser("plot", parents=[common], help="render boundary and curves CSV to SVG")
    s.add_argument("boundary")
    s.add_argument("curves", nargs="?")
    s.add_argument("--mark", action="append", help="mark a singular point re,im (repeatable)")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_plot)
    return p


def _fail(payload: dict, code: int) -> int:
    payload["exit_code"] = code
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as e:
        return _fail({"error": "UsageError", "message": str(e)}, 2)
    except NumRangeError as e:
        return _fail(e.to_dict(), e.exit_code)
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as e:
        return _fail({"error": type(e).__name__, "message": str(e)}, 3)
    except OSError as e:
        return _fail({"error": type(e).__name__, "message": str(e)}, 2)

