import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rchull import io
from rchull.dplane import d_hull_2d
from rchull.exceptions import FormatError
from rchull.fields import QSqrt3
from rchull.geometry import AXIS_CONE, DirectionCone, Quadric, equilateral_cone, planar, tri
from rchull.planar import membership_2d, separate_hull
from rchull.triangular import membership_3d

from .conftest import PINWHEEL

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=200)


@given(fracs)
def test_scalar_roundtrip(v):
    assert io.parse_scalar(io.sc(v)) == v


def test_parse_scalar():
    assert io.parse_scalar("-7/118") == Fraction(-7, 118)
    assert io.parse_scalar(3) == 3
    assert io.parse_scalar("1+2*sqrt3", "sqrt3") == QSqrt3(1, 2)
    with pytest.raises(FormatError):
        io.parse_scalar("seven")
    with pytest.raises(FormatError):
        io.parse_scalar(True)


def test_fnum_rounds():
    assert io.fnum(0.1 + 0.2) == 0.3
    assert io.fnum(None) is None


def test_dumps_is_compact_and_valid():
    doc = {"a": [1, 2, 3], "b": [[1, 2], [3, 4]], "c": {"d": "x"}}
    text = io.dumps(doc)
    assert json.loads(text) == doc
    assert '"a": [1, 2, 3]' in text
    assert text.endswith("\n")


@pytest.mark.parametrize(
    "spec, expected",
    [
        ("axis", AXIS_CONE),
        ("1,0;0,1;3,2", DirectionCone.from_pairs([(1, 0), (0, 1), (3, 2)])),
        ({"directions": [["1", "0"], ["0", "1"], ["3", "2"]]}, DirectionCone.from_pairs([(1, 0), (0, 1), (3, 2)])),
        ("equilateral", equilateral_cone()),
    ],
)
def test_read_cone(spec, expected):
    assert io.read_cone(spec) == expected


def test_cone_dict_roundtrip():
    for cone in (AXIS_CONE, equilateral_cone(), DirectionCone.from_pairs([(1, 0), (0, 1), (3, 2)])):
        assert io.read_cone(io.cone_to_dict(cone)) == cone
    assert io.cone_field(equilateral_cone()) == "sqrt3"


@pytest.mark.parametrize("spec", ["", "1,0;2,0", "1;0", {"directions": "x"}, 5])
def test_bad_cones(spec):
    with pytest.raises((FormatError, ValueError)):
        io.read_cone(spec)


def test_read_points_forms():
    assert io.read_points({"points": [["1/2", 3]]}, 2) == [planar(Fraction(1, 2), 3)]
    assert io.read_points([[1, 2, 3]], 3) == [tri(1, 2, 3)]
    assert io.read_points({"points": [[1, 2]]}, 3) == [tri(1, 2, 0)]
    with pytest.raises(FormatError):
        io.read_points({"points": [[1, 2, 3]]}, 2)
    with pytest.raises(FormatError):
        io.read_points({"pts": []}, 2)


def test_load_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(FormatError):
        io.load_json(str(bad))


@pytest.mark.parametrize("cone", [AXIS_CONE, DirectionCone.from_pairs([(1, 0), (0, 1), (3, 2)])])
def test_face_union_roundtrip(cone):
    hull = separate_hull(PINWHEEL) if cone.is_axis else d_hull_2d(PINWHEEL, cone)
    doc = json.loads(io.dumps(io.face_union_to_dict(hull)))
    back = io.face_union_from_dict(doc)
    assert back.cells() == hull.cells()
    assert back.cone == hull.cone
    assert io.dumps(io.face_union_to_dict(back, snapshots=False)) == io.dumps(io.face_union_to_dict(hull, snapshots=False))


def test_quadric_roundtrip():
    q = Quadric.from_scaled(118, -12, -57, -19, -36)
    doc = io.quadric_to_dict(q)
    assert doc["display"] == "118z-12xy-57x-19y-36"
    assert io.quadric_from_dict(json.loads(json.dumps(doc))) == q
    assert io.quadric_to_dict(None) is None


def test_description_roundtrip(lifted_flat_desc):
    desc = lifted_flat_desc
    doc = json.loads(io.dumps(io.description_to_dict(desc)))
    assert doc["resolved"] is True
    assert sorted(doc["linear_forms"]) == sorted(["x-2", "x-1", "x+1", "y-2", "y-1", "y+1"])
    back = io.description_from_dict(doc)
    assert back.heights == desc.heights
    assert back.rectangles == desc.rectangles
    assert back.support.cells() == desc.support.cells()
    probes = [(Fraction(i, 4), Fraction(j, 4), Fraction(k, 8)) for i in range(-4, 9, 3) for j in range(-4, 9, 3) for k in range(-8, 9, 4)]
    for p in probes:
        assert membership_3d(back, p, strict=False) == membership_3d(desc, p, strict=False)
    again = io.description_to_dict(back)
    for key in ("vertices", "edges", "rectangles", "linear_forms", "points"):
        assert again[key] == doc[key]


def test_description_mesh(lifted_flat_desc, tartar_desc):
    mesh = io.description_mesh(lifted_flat_desc, samples=4)
    nv = len(mesh["vertices"])
    assert nv > 0
    assert all(0 <= i < nv for f in mesh["faces"] for i in f)
    flat = io.description_mesh(tartar_desc, samples=2)
    assert all(v[2] == 0 for v in flat["vertices"])


def test_description_from_bad_dict():
    with pytest.raises(FormatError):
        io.description_from_dict({"rectangles": []})


def test_svg_panels():
    hull = separate_hull(PINWHEEL)
    svg = io.hull_svg(hull)
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    for k in range(len(hull.snapshots)):
        assert f">B{k}</text>" in svg
    single = io.hull_svg(hull, panels=False)
    assert len(single) < len(svg)


def test_planar_roundtrip_membership():
    hull = separate_hull(PINWHEEL)
    back = io.face_union_from_dict(io.face_union_to_dict(hull))
    for p in [(0, 0), (Fraction(5, 2), Fraction(5, 2)), (1, -2), (2, Fraction(3, 2))]:
        assert membership_2d(back, p) == membership_2d(hull, p)
