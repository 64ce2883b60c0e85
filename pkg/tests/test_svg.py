import xml.etree.ElementTree as ET

import numpy as np
import pytest

from numrange.curves import track_branches
from numrange.support import boundary_scan
from numrange.svg import render_svg

NS = {"s": "http://www.w3.org/2000/svg"}
NIL = np.array([[0, 1], [0, 0]], dtype=complex)
SQUARE = np.diag([1, 1j, -1, -1j])


def parse(text):
    return ET.fromstring(text)


def test_curve_per_branch():
    m = boundary_scan(SQUARE, 64)
    brs = track_branches(SQUARE, (0, 2 * np.pi), 64, 3)
    root = parse(render_svg(m, brs))
    ids = [e.get("id") for e in root.findall("s:polyline", NS)]
    assert ids == ["curve-0", "curve-1", "curve-2"]


def test_without_curves():
    root = parse(render_svg(boundary_scan(SQUARE, 64)))
    assert root.find("s:polygon[@id='boundary']", NS) is not None
    assert not root.findall("s:polyline", NS)
    assert len(root.findall("s:circle[@class='corner']", NS)) == 4
    assert len(root.findall("s:line[@class='flat']", NS)) == 4


def test_nilpotent_circle_points():
    root = parse(render_svg(boundary_scan(NIL, 128)))
    pts = root.find("s:polygon", NS).get("points").split()
    r = [abs(complex(*map(float, p.split(",")))) for p in pts]
    assert np.allclose(r, 0.5, atol=1e-5)


def test_view_box_margin():
    root = parse(render_svg(boundary_scan(SQUARE, 64)))
    x, y, w, h = map(float, root.get("viewBox").split())
    # extent is [-1, 1] both ways plus 5% of the width on each side
    assert (x, y, w, h) == pytest.approx((-1.1, -1.1, 2.2, 2.2))


def test_imaginary_axis_points_up():
    root = parse(render_svg(boundary_scan(NIL, 64), singular=[0.5j]))
    assert root.find("s:path[@class='singular']", NS).get("d").startswith("M")
    pts = root.find("s:polygon", NS).get("points").split()
    first = complex(*map(float, pts[16].split(",")))   # theta = pi/2 on the 64 grid
    assert first.imag < 0


def test_rows_input_matches_model():
    m = boundary_scan(SQUARE, 64)
    from numrange.io import boundary_rows
    assert render_svg(m) == render_svg(boundary_rows(m))
