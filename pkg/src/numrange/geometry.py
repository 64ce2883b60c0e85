"""Planar convex geometry on complex numbers."""

from __future__ import annotations

import numpy as np


def _cross(o: complex, a: complex, b: complex) -> float:
    return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)


def convex_hull(points, tol: float = 0.0) -> np.ndarray:
    """Counter-clockwise hull vertices (monotone chain).

    Points within ``tol`` (cross-product units) of an edge are dropped, so
    nearly collinear runs collapse onto their endpoints.
    """
    pts = np.unique(np.asarray(points, dtype=complex).ravel())
    if pts.size <= 2:
        return pts
    order = np.lexsort((pts.imag, pts.real))
    pts = [complex(p) for p in pts[order]]

    def half(seq):
        h: list[complex] = []
        for p in seq:
            while len(h) >= 2 and _cross(h[-2], h[-1], p) <= tol:
                h.pop()
            h.append(p)
        return h

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    return np.array(hull, dtype=complex)


def signed_distance(poly: np.ndarray, z) -> np.ndarray:
    """Signed distance from ``z`` to a CCW convex polygon (positive inside).

    Degenerate polygons (point/segment) return minus the distance to the set.
    """
    poly = np.asarray(poly, dtype=complex)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if poly.size == 0:
        return np.full(z.shape, -np.inf)
    if poly.size == 1:
        return -np.abs(z - poly[0])
    if poly.size == 2:
        return -segment_distance(poly[0], poly[1], z)
    a = poly
    b = np.roll(poly, -1)
    e = b - a
    L = np.abs(e)
    # inward normal of a CCW edge is i*e
    rel = z[:, None] - a[None, :]
    side = (np.conj(e)[None, :] * rel).imag / L[None, :]
    inside = np.all(side >= 0, axis=1)
    d_out = segment_distance(a[None, :], b[None, :], z[:, None]).min(axis=1)
    return np.where(inside, side.min(axis=1), -d_out)


def segment_distance(a, b, z):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    z = np.asarray(z, dtype=complex)
    e = b - a
    ee = np.abs(e) ** 2
    t = np.where(ee > 0, ((z - a) * np.conj(e)).real / np.where(ee > 0, ee, 1), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(z - (a + t * e))


def polyline_distance(path: np.ndarray, z: complex) -> np.ndarray:
    """Distance from ``z`` to each segment of an open polyline."""
    path = np.asarray(path, dtype=complex)
    if path.size == 1:
        return np.abs(path - z)
    return segment_distance(path[:-1], path[1:], z)


def densify(poly: np.ndarray, closed: bool = True, per_edge: int = 8) -> np.ndarray:
    poly = np.asarray(poly, dtype=complex)
    if poly.size < 2:
        return poly
    b = np.roll(poly, -1) if closed else poly[1:]
    a = poly if closed else poly[:-1]
    t = np.linspace(0, 1, per_edge, endpoint=False)
    return (a[:, None] + t[None, :] * (b - a)[:, None]).ravel()


def hausdorff(P: np.ndarray, Q: np.ndarray, per_edge: int = 16) -> float:
    """Hausdorff distance between two convex regions given by hull vertices."""
    P = convex_hull(P)
    Q = convex_hull(Q)
    dp = densify(P, per_edge=per_edge)
    dq = densify(Q, per_edge=per_edge)
    # distance from a point to a convex region is max(0, -signed distance)
    d1 = np.maximum(0.0, -signed_distance(Q, dp)).max()
    d2 = np.maximum(0.0, -signed_distance(P, dq)).max()
    return float(max(d1, d2))


def diameter(points) -> float:
    pts = convex_hull(points)
    if pts.size < 2:
        return 0.0
    return float(np.abs(pts[:, None] - pts[None, :]).max())
