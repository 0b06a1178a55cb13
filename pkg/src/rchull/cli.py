"""Command line entry point: ``rchull <subcommand> --input FILE [options]``.

Exit status is 0 on success, 2 when a triangular hull has unresolved
vertex heights (the description is still written) and 1 on bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import io
from .dplane import d_hull_2d, detect_t3, parallelogram_60, refine_grid, snap, t3_hull_3d
from .envelope import Grid3, membership_threshold, multilevel_envelope, outer_heights, write_vtk
from .exceptions import (
    BadRatio,
    DegeneratePlane,
    EmptyInput,
    FormatError,
    NotOnSegment,
    NotRankOne,
    OutsidePlanarHull,
    SingularSystem,
    UnresolvedHeights,
)
from .geometry import AXIS_CONE, equilateral_cone, to_scalar
from .laminate import search_certificate
from .planar import separate_hull
from .t4 import detect_t4, solve_heights
from .triangular import HullOptions, compute_hull

EXIT_OK, EXIT_INPUT, EXIT_UNRESOLVED = 0, 1, 2
COMMANDS = ("hull2d", "hull-tri", "t4", "t3", "envelope", "certify", "refine-grid", "render")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _grid(text):
    try:
        parts = [int(p) for p in str(text).split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}, expected NX,NY,NZ") from None
    if len(parts) == 1:
        parts *= 3
    if len(parts) != 3 or min(parts) < 2:
        raise argparse.ArgumentTypeError("grid needs three sizes >= 2")
    return tuple(parts)


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v >= 0 or math.isinf(v):
        raise argparse.ArgumentTypeError("must be a finite number >= 0")
    return v


def _positive_float(text):
    v = _nonneg_float(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rchull", description="Rank-one convex hulls of diagonal and triangular 2x2 matrices.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    p.subcommands = sub

    def add(name, help_, input_required=True):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--input", "-i", required=input_required, help="input JSON file")
        s.add_argument("--output", "-o", help="output JSON file (default: stdout)")
        s.add_argument("--config", help="JSON file whose keys provide option defaults")
        return s

    s = add("hull2d", "separately convex or D-convex hull of planar points")
    s.add_argument("--cone", help='cone: "axis", "equilateral", "1,0;0,1;3,2" or a JSON file')
    s.add_argument("--svg", help="write an SVG (one panel per pruning round for the axis cone)")

    s = add("hull-tri", "rank-one convex hull of triangular matrices")
    s.add_argument("--grid", type=_grid, help="oracle resolution NX,NY,NZ (default 60,60,60)")
    s.add_argument("--tol", type=_nonneg_float, help="inner/outer reconcile tolerance (default two grid spacings)")
    s.add_argument("--max-rounds", type=_positive_int, help="cap on inner refinement rounds")
    s.add_argument("--threads", type=_positive_int, help="worker threads for the envelope sweeps")
    s.add_argument("--no-oracle", action="store_true", help="skip the envelope cross-check")
    s.add_argument("--mesh", help="write a triangulated mesh of the quadric patches")
    s.add_argument("--svg", help="write an SVG of the planar support")

    add("t4", "T4 detection, heights and quadric for four (lifted) points")

    s = add("t3", "T3 detection for three points and a three-direction cone")
    s.add_argument("--cone", help="direction cone (default: the points file's cone, else equilateral)")

    s = add("envelope", "discrete rank-one convex envelope of the squared distance")
    s.add_argument("--grid", type=_grid, help="resolution NX,NY,NZ (default 60,60,60)")
    s.add_argument("--tol", type=_nonneg_float, help="sweep residual tolerance (default 1e-9)")
    s.add_argument("--max-rounds", type=_positive_int, help="cap on sweeps")
    s.add_argument("--threads", type=_positive_int)
    s.add_argument("--vtk", help="write the field as legacy ASCII VTK")

    s = add("certify", "laminate certificate for a point of a described hull")
    s.add_argument("--target", required=True, help="target point x,y,z (rationals allowed)")
    s.add_argument("--eps", type=_positive_float, help="pairing tolerance (default 1e-4)")
    s.add_argument("--max-rounds", type=_positive_int, help="cap on splitting depth (default 200)")

    s = add("refine-grid", "grid refinement experiment for a direction cone")
    s.add_argument("--cone", help="direction cone (default equilateral)")
    s.add_argument("--max-rounds", type=_positive_int, help="round cap (default 25)")
    s.add_argument("--max-vertices", type=_positive_int, help="stop before a round once this many vertices exist")

    s = add("render", "SVG or mesh from a planar hull or description JSON")
    s.add_argument("--svg")
    s.add_argument("--mesh")
    return p


# ---------------------------------------------------------------------------
# helpers


def _emit(doc, path):
    text = io.dumps(doc)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _cone_arg(value, doc=None, default=AXIS_CONE):
    if value is None:
        if isinstance(doc, dict) and "cone" in doc:
            return io.read_cone(doc["cone"])
        return default
    if value.endswith(".json"):
        return io.read_cone(io.load_json(value))
    if value.lstrip().startswith("{"):
        try:
            return io.read_cone(json.loads(value))
        except json.JSONDecodeError:
            raise FormatError(f"bad cone JSON {value!r}") from None
    return io.read_cone(value)


def _opts(doc):
    o = doc.get("options", {}) if isinstance(doc, dict) else {}
    if not isinstance(o, dict):
        raise FormatError('"options" must be an object')
    return o


# ---------------------------------------------------------------------------
# subcommands


def cmd_hull2d(args):
    doc = io.load_json(args.input)
    cone = _cone_arg(args.cone, doc)
    pts = io.read_points(doc, 2, io.cone_field(cone))
    hull = separate_hull(pts) if cone.is_axis else d_hull_2d(pts, cone)
    _emit(io.face_union_to_dict(hull), args.output)
    if args.svg:
        _write(args.svg, io.hull_svg(hull))
    return EXIT_OK


def cmd_hull_tri(args):
    doc = io.load_json(args.input)
    K = io.read_points(doc, 3)
    o = _opts(doc)
    res = args.grid or o.get("grid") or o.get("oracle_resolution") or (60, 60, 60)
    if isinstance(res, str):
        res = _grid(res)
    try:
        opts = HullOptions(
            M=o.get("M"),
            max_rounds=args.max_rounds or o.get("max_rounds", 50),
            reconcile_tol=args.tol if args.tol is not None else o.get("reconcile_tol"),
            oracle_resolution=tuple(res) if not isinstance(res, int) else res,
            threads=args.threads or o.get("threads", 1),
            check_outer=not (args.no_oracle or o.get("no_oracle", False)),
        )
    except TypeError as exc:
        raise FormatError(f"bad options: {exc}") from None
    desc = compute_hull(K, opts)
    _emit(io.description_to_dict(desc), args.output)
    if args.mesh:
        _write(args.mesh, io.dumps(io.description_mesh(desc)))
    if args.svg:
        _write(args.svg, io.hull_svg(desc.support, panels=False))
    if not desc.resolved:
        print(f"rchull: {len(desc.unresolved)} vertex height(s) unresolved", file=sys.stderr)
        return EXIT_UNRESOLVED
    return EXIT_OK


def cmd_t4(args):
    doc = io.load_json(args.input)
    raw = doc.get("points") if isinstance(doc, dict) else doc
    lifted = isinstance(raw, list) and raw and all(isinstance(p, list) and len(p) == 3 for p in raw)
    pts = io.read_points(doc, 3 if lifted else 2) if lifted else io.read_points(doc, 2)
    if len(pts) != 4:
        raise FormatError("t4 needs exactly four points")
    t4 = detect_t4([(p[0], p[1]) for p in pts])
    if t4 is None:
        _emit({"t4": False}, args.output)
        return EXIT_OK
    lift = None
    if lifted:
        # heights in configuration order
        by_xy = {(p[0], p[1]): p[2] for p in pts}
        lift = solve_heights(t4, [by_xy[(k[0], k[1])] for k in t4.points])
    out = {"t4": True} | io.t4_to_dict(t4, lift)
    _emit(out, args.output)
    return EXIT_OK


def cmd_t3(args):
    doc = io.load_json(args.input)
    cone = _cone_arg(args.cone, doc, default=None)
    raw = doc.get("points") if isinstance(doc, dict) else doc
    lifted = isinstance(raw, list) and raw and all(isinstance(p, list) and len(p) == 3 for p in raw)
    if cone is None:
        cone = equilateral_cone()
    field = io.cone_field(cone)
    pts = io.read_points(doc, 3, field) if lifted else io.read_points(doc, 2, field)
    if len(pts) != 3:
        raise FormatError("t3 needs exactly three points")
    if len(cone) < 3:
        raise FormatError("t3 needs a cone with at least three directions")
    t3 = detect_t3([(p[0], p[1]) for p in pts], cone)
    if t3 is None:
        _emit({"t3": False}, args.output)
        return EXIT_OK
    hull = t3_hull_3d(pts, cone) if lifted else None
    _emit({"t3": True} | io.t3_to_dict(t3, hull), args.output)
    return EXIT_OK


def cmd_envelope(args):
    doc = io.load_json(args.input)
    K = io.read_points(doc, 3)
    o = _opts(doc)
    res = args.grid or tuple(o.get("grid", (60, 60, 60)))
    tol = args.tol if args.tol is not None else o.get("tol", 1e-9)
    sweeps = args.max_rounds or o.get("max_sweeps", 100)
    threads = args.threads or o.get("threads", 1)
    grid = Grid3.aligned(K, res, o.get("M"))
    env = multilevel_envelope(K, grid, tol, sweeps, threads)
    thr = membership_threshold(env)
    support = separate_hull([(p[0], p[1]) for p in K])
    verts = sorted(support.vertices)
    h = outer_heights(env, [(float(v[0]), float(v[1])) for v in verts], thr)
    heights = {v: h[(float(v[0]), float(v[1]))] for v in verts}
    _emit(io.envelope_to_dict(env, heights, thr), args.output)
    if args.vtk:
        with open(args.vtk, "w") as fh:
            write_vtk(env, fh)
    return EXIT_OK


def _parse_target(text):
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if len(parts) not in (2, 3):
        raise FormatError(f"bad target {text!r}, expected x,y,z")
    return tuple(io.parse_scalar(p.strip()) for p in parts) + ((Fraction(0),) if len(parts) == 2 else ())


def cmd_certify(args):
    doc = io.load_json(args.input)
    if isinstance(doc, dict) and "rectangles" in doc:
        desc = io.description_from_dict(doc)
    else:
        desc = compute_hull(io.read_points(doc, 3), HullOptions(check_outer=False))
    if not desc.resolved:
        raise UnresolvedHeights(desc, desc.unresolved)
    target = _parse_target(args.target)
    eps = args.eps if args.eps is not None else 1e-4
    depth = args.max_rounds or 200
    try:
        res = search_certificate(desc, target, eps, max_depth=depth)
    except OutsidePlanarHull as exc:
        raise FormatError(f"target outside the hull: {exc}") from None
    _emit(io.laminate_to_dict(res, desc.points), args.output)
    if not res.success:
        print(f"rchull: no certificate within the depth cap (best pairing {float(res.value):.3g})", file=sys.stderr)
    return EXIT_OK


def _parallelogram(spec):
    """Vertices of the 60 degree parallelogram; an irrational side is snapped to a rational first."""
    def side(v):
        if isinstance(v, str) and v.startswith("sqrt"):
            return snap(math.sqrt(float(v[4:])))
        return to_scalar(v)

    return parallelogram_60(side(spec.get("a", 2)), side(spec.get("b", 1)))


def cmd_refine_grid(args):
    doc = io.load_json(args.input)
    cone = _cone_arg(args.cone, doc, default=None) or equilateral_cone()
    if isinstance(doc, dict) and "parallelogram" in doc:
        if io.cone_field(cone) != "sqrt3":
            raise FormatError("the 60 degree parallelogram needs the sqrt3 cone field")
        pts = _parallelogram(doc["parallelogram"])
    else:
        pts = io.read_points(doc, 2, io.cone_field(cone))
    rounds = args.max_rounds or _opts(doc).get("max_rounds", 25)
    budget = args.max_vertices or _opts(doc).get("max_vertices", 50000)
    rep = refine_grid(pts, cone, rounds, max_vertices=budget)
    out = io.refinement_to_dict(rep)
    if rep.terminated:
        out["statement"] = "Terminated: the grid is finite."
    else:
        cap = "the vertex budget" if rep.budget_hit else "the round cap"
        out["statement"] = (
            f"Vertex counts grew through every executed round until {cap}. This is property-based evidence of "
            "an infinite compatible grid, not a non-termination proof."
        )
    _emit(out, args.output)
    return EXIT_OK


def cmd_render(args):
    doc = io.load_json(args.input)
    if not args.svg and not args.mesh:
        raise FormatError("render needs --svg and/or --mesh")
    if isinstance(doc, dict) and "rectangles" in doc:
        desc = io.description_from_dict(doc)
        if args.mesh:
            _write(args.mesh, io.dumps(io.description_mesh(desc)))
        if args.svg:
            _write(args.svg, io.hull_svg(desc.support, panels=False))
    elif isinstance(doc, dict) and "faces" in doc:
        hull = io.face_union_from_dict(doc)
        if args.mesh:
            _write(args.mesh, io.dumps({"vertices": [], "faces": []}))
        if args.svg:
            _write(args.svg, io.hull_svg(hull, panels=False))
    else:
        raise FormatError("render expects a planar hull or a description document")
    return EXIT_OK


HANDLERS = {
    "hull2d": cmd_hull2d,
    "hull-tri": cmd_hull_tri,
    "t4": cmd_t4,
    "t3": cmd_t3,
    "envelope": cmd_envelope,
    "certify": cmd_certify,
    "refine-grid": cmd_refine_grid,
    "render": cmd_render,
}


def _config_path(argv):
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def _apply_config(parser, argv):
    """Parse ``argv`` with option defaults taken from ``--config`` (explicit flags still win)."""
    path = _config_path(argv)
    command = next((a for a in argv if a in COMMANDS), None)
    if path and command:
        cfg = io.load_json(path)
        if not isinstance(cfg, dict):
            raise FormatError("config must be a JSON object")
        sub = parser.subcommands.choices[command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in cfg.items():
            dest = key.replace("-", "_")
            if dest not in known or dest in ("help", "config"):
                raise FormatError(f"unknown config key {key!r} for {command}")
            action = known[dest]
            if action.type is not None and value is not None and not isinstance(value, bool):
                text = ",".join(map(str, value)) if isinstance(value, list) else str(value)
                try:
                    value = action.type(text)
                except argparse.ArgumentTypeError as exc:
                    raise FormatError(f"config {key}: {exc}") from None
            defaults[dest] = value
            action.required = False
        sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, list(sys.argv[1:] if argv is None else argv))
        if args.command is None:
            raise UsageError(f"missing subcommand (one of {', '.join(COMMANDS)})")
        return HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"rchull: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UnresolvedHeights as exc:
        print(f"rchull: {exc}", file=sys.stderr)
        return EXIT_UNRESOLVED
    except (FormatError, EmptyInput, OSError) as exc:
        print(f"rchull: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NotOnSegment, NotRankOne, BadRatio, DegeneratePlane, SingularSystem, ValueError) as exc:
        print(f"rchull: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
