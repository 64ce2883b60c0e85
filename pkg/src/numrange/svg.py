"""SVG plot of a boundary scan with optional critical curves."""

from __future__ import annotations

from collections import defaultdict

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22")


def _n(v: float) -> str:
    s = "%.6g" % v
    return "0" if s == "-0" else s


def _pts(zs) -> str:
    return " ".join(f"{_n(z.real)},{_n(-z.imag)}" for z in zs)


def render_svg(boundary, curves=None, singular=(), width: int = 600) -> str:
    """SVG document for a boundary and optional critical curves.

    ``boundary`` is a :class:`~numrange.support.BoundaryModel` or rows
    ``(theta, mu, re, im, multiplicity, kind)``; ``curves`` is a list of
    branches or rows ``(branch_id, theta, lambda, lambda', re, im, is_max)``.
    Straight edges between corners or flat endpoints are drawn thick, corners as dots, ``singular`` points as
    crosses.  The imaginary axis points up.
    """
    from .io import boundary_rows

    if hasattr(boundary, "points"):
        boundary = boundary_rows(boundary)
    if curves and not isinstance(curves[0], tuple):
        from .curves import branches_to_rows

        curves = branches_to_rows(curves)
    curves = curves or []

    bz = np.array([complex(r[2], r[3]) for r in boundary])
    by_branch: dict[int, list[complex]] = defaultdict(list)
    for r in curves:
        by_branch[int(r[0])].append(complex(r[4], r[5]))
    allz = np.concatenate([bz] + [np.array(v) for v in by_branch.values()]
                          + [np.array(list(singular), dtype=complex)])
    if allz.size == 0:
        allz = np.zeros(1, dtype=complex)
    x0, x1 = allz.real.min(), allz.real.max()
    y0, y1 = (-allz.imag).min(), (-allz.imag).max()
    w, h = x1 - x0, y1 - y0
    w = w if w > 0 else 1.0
    h = h if h > 0 else 1.0
    mx, my = 0.05 * w, 0.05 * h
    vb = (x0 - mx, y0 - my, w + 2 * mx, h + 2 * my)
    sw = 0.004 * max(vb[2], vb[3])
    height = int(round(width * vb[3] / vb[2]))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="{" ".join(_n(v) for v in vb)}">']
    if len(bz):
        out.append(f'<polygon id="boundary" points="{_pts(bz)}" fill="#f2f2f2" '
                   f'stroke="black" stroke-width="{_n(sw)}"/>')
    # consecutive non-arc rows bound a straight edge of the boundary
    kinds = [r[5] for r in boundary]
    for k in range(len(kinds) if len(kinds) > 2 else 0):
        j = (k + 1) % len(kinds)
        if kinds[k] != "arc" and kinds[j] != "arc" and abs(bz[k] - bz[j]) > 0:
            a, b = bz[k], bz[j]
            out.append(f'<line class="flat" x1="{_n(a.real)}" y1="{_n(-a.imag)}" '
                       f'x2="{_n(b.real)}" y2="{_n(-b.imag)}" stroke="#e6a700" '
                       f'stroke-width="{_n(3 * sw)}"/>')
    for bid, zs in sorted(by_branch.items()):
        color = PALETTE[bid % len(PALETTE)]
        dash = "" if bid < len(PALETTE) else f' stroke-dasharray="{_n(4 * sw)}"'
        out.append(f'<polyline class="curve" id="curve-{bid}" points="{_pts(zs)}" '
                   f'fill="none" stroke="{color}" stroke-width="{_n(sw)}"{dash}/>')
    for r in boundary:
        if r[5] == "corner":
            out.append(f'<circle class="corner" cx="{_n(r[2])}" cy="{_n(-r[3])}" '
                       f'r="{_n(2.5 * sw)}" fill="black"/>')
    d = 3 * sw
    for z in singular:
        x, y = z.real, -z.imag
        out.append(f'<path class="singular" d="M{_n(x - d)},{_n(y - d)}L{_n(x + d)},{_n(y + d)}'
                   f'M{_n(x - d)},{_n(y + d)}L{_n(x + d)},{_n(y - d)}" stroke="red" '
                   f'stroke-width="{_n(sw)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
