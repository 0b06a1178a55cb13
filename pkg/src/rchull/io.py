"""JSON, SVG and mesh serialization.

Exact scalars are written as strings (``"3"``, ``"-7/118"``, ``"1+2*sqrt3"``)
and floats as JSON numbers rounded to 12 significant digits, so the same
input always produces byte-identical output.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Optional

import numpy as np

from .exceptions import FormatError
from .fields import QSqrt3, parse_qsqrt3
from .geometry import AXIS_CONE, DirectionCone, PlanarPoint, Quadric, TriPoint, equilateral_cone, format_scalar, to_scalar
from .planar import FaceUnion, _canon_edge, _canon_face

FLOAT_DIGITS = 12


def fnum(v) -> Optional[float]:
    if v is None:
        return None
    v = float(v)
    if not np.isfinite(v):
        return None
    return float(f"{v:.{FLOAT_DIGITS}g}")


def sc(v) -> str:
    return format_scalar(v)


def parse_scalar(v, field: str = "rational"):
    if isinstance(v, bool):
        raise FormatError(f"bad scalar {v!r}")
    try:
        if field == "sqrt3":
            return parse_qsqrt3(v)
        return to_scalar(v)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad scalar {v!r}: {exc}") from None


def _flat(v) -> bool:
    """Lists printed on one line: scalars, or up to eight short scalar lists."""
    if not isinstance(v, list) or any(isinstance(c, dict) for c in v):
        return False
    d = _depth(v)
    return d == 1 or (d == 2 and len(v) <= 8 and all(_flat(c) for c in v if isinstance(c, list)))


def _depth(v) -> int:
    return 1 + max((_depth(c) for c in v if isinstance(c, list)), default=0) if isinstance(v, list) else 0


def _render(obj, indent: int) -> str:
    pad, inner = " " * indent, " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        body = ",\n".join(f"{inner}{json.dumps(k)}: {_render(v, indent + 2)}" for k, v in obj.items())
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(obj, list):
        if _flat(obj):
            return json.dumps(obj, separators=(", ", ": "))
        body = ",\n".join(inner + _render(v, indent + 2) for v in obj)
        return "[\n" + body + "\n" + pad + "]"
    return json.dumps(obj)


def dumps(obj) -> str:
    """Indented JSON with points and other short scalar lists kept on one line."""
    return _render(obj, 0) + "\n"


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None


# ---------------------------------------------------------------------------
# points and cones


def read_points(doc, dim: int, field: str = "rational"):
    """Points from ``{"points": [[...], ...]}`` or a bare list; ``dim`` is 2 or 3 (3 accepts 2 as z = 0)."""
    pts = doc.get("points") if isinstance(doc, dict) else doc
    if not isinstance(pts, list) or not pts:
        raise FormatError('expected a non-empty "points" list')
    out = []
    for p in pts:
        if not isinstance(p, (list, tuple)) or len(p) not in (2, 3):
            raise FormatError(f"bad point {p!r}")
        vals = [parse_scalar(c, field) for c in p]
        if dim == 2:
            if len(vals) != 2:
                raise FormatError(f"expected a planar point, got {p!r}")
            out.append(PlanarPoint(*vals))
        else:
            if len(vals) == 2:
                vals.append(Fraction(0))
            out.append(TriPoint(*vals))
    return out


def read_cone(spec) -> DirectionCone:
    """Cone from JSON ``{"directions": [...], "field": ...}``, ``"axis"``, ``"equilateral"`` or ``"1,0;0,1;3,2"``."""
    if spec is None or spec == "axis":
        return AXIS_CONE
    if spec == "equilateral":
        return equilateral_cone()
    if isinstance(spec, str):
        try:
            pairs = [tuple(part.split(",")) for part in spec.split(";") if part.strip()]
        except ValueError:
            raise FormatError(f"bad cone spec {spec!r}") from None
        spec = {"directions": [list(p) for p in pairs]}
    if not isinstance(spec, dict) or "directions" not in spec:
        raise FormatError('cone spec needs a "directions" list')
    field = spec.get("field", "rational")
    if field not in ("rational", "sqrt3"):
        raise FormatError(f"unknown cone field {field!r}")
    dirs = spec["directions"]
    if not isinstance(dirs, list) or any(not isinstance(d, (list, tuple)) or len(d) != 2 for d in dirs):
        raise FormatError("each direction must be a pair")
    try:
        return DirectionCone.from_pairs([tuple(d) for d in dirs], field)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad cone: {exc}") from None


def cone_field(cone: DirectionCone) -> str:
    return "sqrt3" if any(isinstance(c, QSqrt3) for d in cone for c in d) else "rational"


def cone_to_dict(cone: DirectionCone) -> dict:
    out = {"directions": [[sc(c) for c in d] for d in cone]}
    if cone_field(cone) != "rational":
        out["field"] = cone_field(cone)
    return out


def pt(p) -> list:
    return [sc(c) for c in p]


# ---------------------------------------------------------------------------
# planar hulls


def face_union_to_dict(hull: FaceUnion, snapshots: bool = True) -> dict:
    out = {
        "cone": cone_to_dict(hull.cone),
        "points": [pt(p) for p in hull.points],
        "rounds": hull.rounds,
        "vertices": [pt(v) for v in sorted(hull.vertices)],
        "edges": [[pt(a), pt(b)] for a, b in sorted(hull.edges)],
        "faces": [[pt(v) for v in f] for f in sorted(hull.faces)],
        "boundary": [[pt(v) for v in loop] for loop in hull.boundary_polygons()],
        "segments": [[pt(a), pt(b)] for a, b in hull.maximal_segments()],
    }
    if snapshots and hull.snapshots:
        out["snapshots"] = [
            {"round": s.generation, "vertices": len(s.vertices), "edges": len(s.edges), "faces": len(s.faces)}
            for s in hull.snapshots
        ]
    return out


def face_union_from_dict(doc: dict) -> FaceUnion:
    cone = read_cone(doc.get("cone"))
    field = cone_field(cone)

    def P(v):
        return PlanarPoint(*(parse_scalar(c, field) for c in v))

    try:
        return FaceUnion(
            frozenset(P(v) for v in doc["vertices"]),
            frozenset(_canon_edge(P(a), P(b)) for a, b in doc["edges"]),
            frozenset(_canon_face([P(v) for v in f]) for f in doc["faces"]),
            int(doc.get("rounds", 0)),
            tuple(P(v) for v in doc.get("points", [])),
            cone,
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad planar hull document: {exc}") from None


# ---------------------------------------------------------------------------
# triangular hull descriptions


def quadric_to_dict(q: Optional[Quadric]):
    if q is None:
        return None
    return {
        "monic": [sc(c) for c in (1, q.alpha, q.beta, q.gamma, q.delta)],
        "display": q.display(),
    }


def quadric_from_dict(doc) -> Optional[Quadric]:
    if doc is None:
        return None
    c = [parse_scalar(v) for v in doc["monic"]]
    return Quadric.from_scaled(*c)


def _pair(v):
    return None if v is None else [fnum(v[0]), fnum(v[1])]


def description_to_dict(desc) -> dict:
    """JSON form of a :class:`~rchull.triangular.SemialgebraicDescription` (timings left out)."""
    h = desc.heights
    vertices = []
    for v in desc.vertices:
        b = h.bounds(v)
        vertices.append(
            {
                "at": pt(v),
                "z_lower": None if b is None else sc(b[0]),
                "z_upper": None if b is None else sc(b[1]),
                "lower_source": h.lower_tag.get(v),
                "upper_source": h.upper_tag.get(v),
            }
        )
    rects = [
        {"bounds": [sc(r.x0), sc(r.x1), sc(r.y0), sc(r.y1)], "q_upper": quadric_to_dict(r.q_upper), "q_lower": quadric_to_dict(r.q_lower)}
        for r in desc.rectangles
    ]
    unresolved = [
        {"at": pt(v), "inner": None if g.inner is None else [sc(g.inner[0]), sc(g.inner[1])], "outer": _pair(g.outer)}
        for v, g in sorted(desc.unresolved.items())
    ]
    d = desc.diagnostics
    diag = {
        "inner_rounds": d.rounds,
        "inner_converged": d.inner_converged,
        "t4_configurations": d.t4_configurations,
        "t4_budget_hit": d.t4_budget_hit,
        "reconcile_tol": fnum(d.reconcile_tol),
        "max_gap": fnum(d.max_gap),
        "sign_quadrants": [
            {"bounds": [sc(c) for c in key], "upper": u, "lower": lo} for key, (u, lo) in sorted(d.sign_quadrants.items())
        ],
        "slab_violations": len(d.slab_violations),
    }
    if d.oracle:
        o = d.oracle
        diag["oracle"] = {
            "bounds": [[fnum(a), fnum(b)] for a, b in o["bounds"]],
            "resolution": list(o["resolution"]),
            "spacing": fnum(o["spacing"]),
            "threshold": fnum(o["threshold"]),
            "tol": fnum(o["tol"]),
            "sweeps": int(o["sweeps"]),
            "converged": bool(o["converged"]),
        }
    return {
        "format": "rchull-description",
        "points": [pt(p) for p in desc.points],
        "resolved": desc.resolved,
        "linear_forms": [str(f) for f in desc.linear_forms],
        "vertices": vertices,
        "edges": [[pt(a), pt(b)] for a, b in desc.edges],
        "faces": [[pt(v) for v in f] for f in sorted(desc.support.faces)],
        "rectangles": rects,
        "unresolved": unresolved,
        "diagnostics": diag,
    }


def description_from_dict(doc: dict):
    """Rebuild a description; diagnostics other than the unresolved set are not restored."""
    from .triangular import Gap, HeightField, Rectangle, SemialgebraicDescription

    try:
        points = tuple(TriPoint(*(parse_scalar(c) for c in p)) for p in doc["points"])
        lower, upper, ltag, utag = {}, {}, {}, {}
        for rec in doc["vertices"]:
            v = PlanarPoint(*(parse_scalar(c) for c in rec["at"]))
            if rec["z_lower"] is not None:
                lower[v] = parse_scalar(rec["z_lower"])
                ltag[v] = rec.get("lower_source")
            if rec["z_upper"] is not None:
                upper[v] = parse_scalar(rec["z_upper"])
                utag[v] = rec.get("upper_source")
        planar_doc = {
            "vertices": [r["at"] for r in doc["vertices"]],
            "edges": doc["edges"],
            "faces": doc.get("faces", []),
            "points": [p[:2] for p in doc["points"]],
        }
        support = face_union_from_dict(planar_doc)
        rects = []
        for r in doc["rectangles"]:
            x0, x1, y0, y1 = (parse_scalar(c) for c in r["bounds"])
            rects.append(Rectangle(x0, x1, y0, y1, quadric_from_dict(r["q_upper"]), quadric_from_dict(r["q_lower"])))
        unresolved = {}
        for g in doc.get("unresolved", []):
            v = PlanarPoint(*(parse_scalar(c) for c in g["at"]))
            inner = None if g["inner"] is None else tuple(parse_scalar(c) for c in g["inner"])
            outer = None if g["outer"] is None else tuple(g["outer"])
            unresolved[v] = Gap(v, inner, outer)
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"bad description document: {exc}") from None
    heights = HeightField(lower, upper, ltag, utag)
    return SemialgebraicDescription(support, points, heights, tuple(rects), unresolved)


def description_mesh(desc, samples: int = 8) -> dict:
    """Triangulated samples of every quadric patch: ``{"vertices": [[x,y,z]...], "faces": [[i,j,k]...]}``."""
    verts, faces = [], []
    n = max(1, int(samples))
    for r in desc.rectangles:
        for q in (r.q_lower, r.q_upper):
            if q is None:
                continue
            base = len(verts)
            for i in range(n + 1):
                x = r.x0 + (r.x1 - r.x0) * Fraction(i, n)
                for j in range(n + 1):
                    y = r.y0 + (r.y1 - r.y0) * Fraction(j, n)
                    verts.append([fnum(x), fnum(y), fnum(q.height(x, y))])
            for i in range(n):
                for j in range(n):
                    a = base + i * (n + 1) + j
                    b, c, d = a + n + 1, a + n + 2, a + 1
                    faces.append([a, b, c])
                    faces.append([a, c, d])
    return {"vertices": verts, "faces": faces}


# ---------------------------------------------------------------------------
# T4, T3, refinement, envelope, laminates


def t4_to_dict(t4, lift=None) -> dict:
    out = {
        "K": [pt(p) for p in t4.points],
        "P": pt(t4.base),
        "C": [pt(c) for c in t4.legs],
        "alpha": [sc(a) for a in t4.alphas],
        "lambda": [sc(v) for v in t4.lambdas],
        "square": [pt(p) for p in t4.square],
        "first_axis": t4.first_axis,
        "degenerate": t4.degenerate,
    }
    if lift is not None:
        out["heights"] = {"K": [sc(z) for z in lift.z_k], "square": [sc(z) for z in lift.z_q]}
        out["quadric"] = quadric_to_dict(lift.quadric)
    return out


def t3_to_dict(t3, hull=None) -> dict:
    out = {
        "K": [pt(p) for p in t3.points],
        "P": pt(t3.base),
        "C": [pt(c) for c in t3.legs],
        "alpha": [sc(a) for a in t3.alphas],
        "inner": [pt(p) for p in t3.inner],
        "directions": [pt(d) for d in t3.directions],
    }
    if hull is not None:
        a, b, c = hull.plane
        out["plane"] = {"z": [sc(a), sc(b), sc(c)], "form": [sc(v) for v in hull.linear_form()]}
        out["planar_hull"] = face_union_to_dict(hull.planar_hull, snapshots=False)
    return out


def refinement_to_dict(rep) -> dict:
    return {
        "vertex_counts": list(rep.vertex_counts),
        "terminated": rep.terminated,
        "rounds": rep.rounds,
        "budget_hit": rep.budget_hit,
        "strictly_increasing": all(b > a for a, b in zip(rep.vertex_counts, rep.vertex_counts[1:])),
        "note": rep.note,
    }


def envelope_to_dict(grid, heights: dict, threshold: float) -> dict:
    V = grid.values
    return {
        "bounds": [[fnum(a), fnum(b)] for a, b in grid.bounds],
        "resolution": list(grid.resolution),
        "spacing": [fnum(h) for h in grid.spacing],
        "sweeps": int(grid.sweeps),
        "residual": fnum(grid.residual),
        "converged": bool(grid.converged),
        "threshold": fnum(threshold),
        "stats": {
            "min": fnum(V.min()),
            "max": fnum(V.max()),
            "mean": fnum(V.mean()),
            "nodes_below_threshold": int(np.count_nonzero(V <= threshold)),
        },
        "vertices": [{"at": pt(v), "z": _pair(h)} for v, h in sorted(heights.items())],
    }


def laminate_to_dict(result, K) -> dict:
    """Laminate JSON for a :class:`~rchull.laminate.CertificateSearch`."""
    from .laminate import pairing_residuals

    lam = result.laminate

    def tree(node):
        out = {"point": pt(node.point), "weight": sc(node.weight)}
        if not node.is_leaf:
            out["ratio"] = sc(node.ratio)
            out["children"] = [tree(c) for c in node.children]
        return out

    return {
        "success": result.success,
        "support": [{"weight": sc(w), "point": pt(p)} for w, p in lam.support],
        "order": lam.order,
        "splits": result.splits,
        "pairing_value": fnum(result.value),
        "pairing_exact": sc(result.value),
        "residual_weights": [sc(w) for w in pairing_residuals(lam, K)],
        "trace": [
            {"split": n, "leaf": pt(p), "weight": sc(w), "pairing": fnum(v)} for n, p, w, v in result.trace
        ],
        "stuck": [pt(p) for p in result.stuck],
        "tree": tree(lam.root),
    }


# ---------------------------------------------------------------------------
# SVG


def _clip_line(p, d, box):
    """Segment of the line ``p + t d`` inside the box ``(x0, x1, y0, y1)``, as float endpoints."""
    x0, x1, y0, y1 = box
    px, py, dx, dy = float(p[0]), float(p[1]), float(d[0]), float(d[1])
    lo, hi = -np.inf, np.inf
    for c, dc, a, b in ((px, dx, x0, x1), (py, dy, y0, y1)):
        if dc == 0:
            if not a - 1e-12 <= c <= b + 1e-12:
                return None
            continue
        t1, t2 = (a - c) / dc, (b - c) / dc
        lo, hi = max(lo, min(t1, t2)), min(hi, max(t1, t2))
    if lo > hi:
        return None
    return (px + lo * dx, py + lo * dy), (px + hi * dx, py + hi * dy)


def _panel(hull: FaceUnion, box, size, ox, title, points):
    x0, x1, y0, y1 = box
    s = size / max(x1 - x0, y1 - y0)

    def X(v):
        return ox + (float(v[0]) - x0) * s

    def Y(v):
        return size - (float(v[1]) - y0) * s

    out = [f'<g><text x="{ox + 4:.2f}" y="14" font-size="12" font-family="sans-serif">{title}</text>']
    for p in points:
        for d in hull.cone:
            seg = _clip_line(p, d, box)
            if seg:
                (ax, ay), (bx, by) = seg
                out.append(
                    f'<line x1="{X((ax, ay)):.2f}" y1="{Y((ax, ay)):.2f}" x2="{X((bx, by)):.2f}" y2="{Y((bx, by)):.2f}" '
                    'stroke="#999" stroke-width="0.6" stroke-dasharray="2,3"/>'
                )
    for f in sorted(hull.faces):
        pts = " ".join(f"{X(v):.2f},{Y(v):.2f}" for v in f)
        out.append(f'<polygon points="{pts}" fill="#9ecae1" stroke="none"/>')
    for a, b in sorted(hull.edges):
        out.append(f'<line x1="{X(a):.2f}" y1="{Y(a):.2f}" x2="{X(b):.2f}" y2="{Y(b):.2f}" stroke="#08519c" stroke-width="1.6"/>')
    for v in sorted(hull.vertices):
        out.append(f'<circle cx="{X(v):.2f}" cy="{Y(v):.2f}" r="1.8" fill="#08519c"/>')
    for p in points:
        out.append(f'<circle cx="{X(p):.2f}" cy="{Y(p):.2f}" r="3.5" fill="#d62728"/>')
    out.append("</g>")
    return out


def hull_svg(hull: FaceUnion, panels: bool = True, size: int = 240) -> str:
    """SVG of a planar hull; with ``panels`` every pruning snapshot gets its own panel, left to right."""
    stages = list(hull.snapshots) if panels and hull.snapshots else [hull]
    pts = list(hull.points) or sorted(hull.vertices)
    xs = [float(p[0]) for p in pts] + [float(v[0]) for s in stages for v in s.vertices]
    ys = [float(p[1]) for p in pts] + [float(v[1]) for s in stages for v in s.vertices]
    pad = 0.08 * max(max(xs) - min(xs), max(ys) - min(ys), 1.0)
    box = (min(xs) - pad, max(xs) + pad, min(ys) - pad, max(ys) + pad)
    gap = 12
    width = len(stages) * (size + gap) - gap
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{size}" viewBox="0 0 {width} {size}">',
        f'<rect width="{width}" height="{size}" fill="white"/>',
    ]
    for k, stage in enumerate(stages):
        title = f"B{stage.generation}" if len(stages) > 1 else "hull"
        out.extend(_panel(stage, box, size, k * (size + gap), title, pts))
    out.append("</svg>")
    return "\n".join(out) + "\n"
