"""Preimages of the numerical range map.

Boundary points are reached by top eigenvectors of ``Re(e^{-i theta} A)``.
Interior points are reached by compressing ``A`` to the plane spanned by the
preimages of two boundary points on a chord through the target and solving
the resulting 2x2 problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ChordSearchFailed, InvalidInput, NotInRange, OutsideRange
from .linalg import (
    as_matrix,
    cartesian_part,
    compress,
    evaluate_range_map,
    hermitian_eig,
    normalize,
    scale,
)
from .support import branch_slopes, default_gap_tol, support_gap, support_value


@dataclass
class PreimageResult:
    z_target: complex
    x: np.ndarray
    achieved: complex
    residual: float
    construction: str            # "boundary_eigenvector" or "two_by_two_reduction"
    span_projector_rank: int = 1

    def to_dict(self) -> dict:
        return {
            "z_target": [self.z_target.real, self.z_target.imag],
            "x": [[float(c.real), float(c.imag)] for c in self.x],
            "achieved": [self.achieved.real, self.achieved.imag],
            "residual": self.residual,
            "construction": self.construction,
            "span_projector_rank": self.span_projector_rank,
        }


def _result(A, z, x, construction, rank=1) -> PreimageResult:
    fz = evaluate_range_map(A, x)
    return PreimageResult(complex(z), x, fz, float(abs(fz - z)), construction, rank)


def boundary_preimages(A, theta: float, gap_tol: float | None = None,
                       sweep: int = 0) -> list[PreimageResult]:
    """Orthonormal basis of the top eigenspace of ``Re(e^{-i theta} A)``.

    With ``sweep > 0`` and a multi-dimensional eigenspace, normalized
    combinations ``cos s v1 + e^{i phi} sin s v2`` of the extreme-slope
    vectors are appended; their values trace the flat portion.
    """
    A = as_matrix(A)
    s = support_value(A, theta, gap_tol)
    E = s.eigenbasis
    if s.multiplicity > 1:
        # rotate so the basis diagonalises the imaginary part (extreme slopes first/last)
        K = cartesian_part(A, theta, "imaginary")
        dec = hermitian_eig(E.conj().T @ K @ E)
        E = E @ dec.eigenvectors
    rank = E.shape[1]
    out = [_result(A, evaluate_range_map(A, E[:, j]), E[:, j], "boundary_eigenvector", rank)
           for j in range(rank)]
    if sweep and rank > 1:
        v1, v2 = E[:, 0], E[:, -1]
        for s_ in np.linspace(0, np.pi / 2, sweep):
            for phi in (0.0, np.pi / 2):
                x = np.cos(s_) * v1 + np.exp(1j * phi) * np.sin(s_) * v2
                out.append(_result(A, evaluate_range_map(A, x), x, "boundary_eigenvector", rank))
    return out


def solve_2x2(B, z: complex, tol: float = 1e-12, root: str = "low") -> np.ndarray:
    """Unit ``u`` in C^2 with ``u^* B u = z``.

    In a Schur basis of the trace-free part, ``B - tr(B)/2 = [[a, c], [0, -a]]``
    and ``u = (cos s, e^{i phi} sin s)`` gives
    ``f = a cos 2s + (|c|/2) sin 2s e^{i(phi + arg c)}``: a circle for each
    ``s``.  ``s`` is found by bisection on ``|w - a cos 2s| - (|c|/2) sin 2s``
    and ``phi`` then follows from the circle.  The admissible ``s`` form an
    interval; ``root`` picks its lower or upper end, which give different
    vectors whenever the interval is not a single point.
    """
    B = as_matrix(B)
    if B.shape != (2, 2):
        raise InvalidInput("solve_2x2 needs a 2x2 matrix")
    t = np.trace(B) / 2
    w = complex(z) - t
    T, Q = scipy.linalg.schur(B - t * np.eye(2), output="complex")
    a, c = T[0, 0], T[0, 1]
    r = abs(c) / 2
    psi = np.angle(c) if abs(c) > 0 else 0.0

    def g(s):
        return abs(w - a * np.cos(2 * s)) - r * np.sin(2 * s)

    grid = np.linspace(0, np.pi / 2, 2049)
    vals = np.array([g(s) for s in grid])
    k = int(np.argmin(vals))
    lo_b, hi_b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    # golden-section refinement of the minimiser
    phi_g = (np.sqrt(5) - 1) / 2
    x1, x2 = hi_b - phi_g * (hi_b - lo_b), lo_b + phi_g * (hi_b - lo_b)
    for _ in range(100):
        if g(x1) < g(x2):
            hi_b = x2
        else:
            lo_b = x1
        x1, x2 = hi_b - phi_g * (hi_b - lo_b), lo_b + phi_g * (hi_b - lo_b)
    s_min = 0.5 * (lo_b + hi_b)
    if g(s_min) > vals[k]:
        s_min = grid[k]
    if g(s_min) > tol:
        raise NotInRange(f"z is outside the 2x2 numerical range by {g(s_min):.3e}")
    if root not in ("low", "high"):
        raise InvalidInput("root must be 'low' or 'high'")
    end = 0.0 if root == "low" else np.pi / 2
    if g(end) <= 0:
        s = end
    else:
        # bisect between the infeasible end and the feasible minimiser
        out_, in_ = end, s_min
        for _ in range(200):
            mid = 0.5 * (out_ + in_)
            if g(mid) > 0:
                out_ = mid
            else:
                in_ = mid
            if abs(in_ - out_) < 1e-17:
                break
        s = in_
    rem = w - a * np.cos(2 * s)
    phi = (np.angle(rem) if abs(rem) > 0 else 0.0) - psi
    u = np.array([np.cos(s), np.exp(1j * phi) * np.sin(s)])
    return Q @ u


def boundary_preimage(A, z, theta, gap_tol=None) -> np.ndarray:
    """A preimage of a boundary point ``z`` supported at ``theta``."""
    sl = branch_slopes(A, theta, gap_tol)
    if len(sl) == 1 and sl[0][1] == 1:
        return sl[0][2][:, 0]
    v1, v2 = sl[0][2][:, 0], sl[-1][2][:, -1]
    if len(sl) == 1:
        v2 = sl[0][2][:, -1]
    B = compress(A, [v1, v2])
    u = solve_2x2(B, z, tol=1e-8 * scale(A))
    return normalize(u[0] * v1 + u[1] * v2)


def _polish_boundary(A, z, theta, gap_tol, iters=20):
    """Adjust the supporting angle so the top eigenvector lands on ``z``.

    Secant iteration on the offset of ``f_A(x(t))`` from ``z`` along the
    supporting line at ``t``.
    """
    def offset(t):
        x = boundary_preimage(A, z, t, gap_tol)
        return (np.exp(-1j * t) * (evaluate_range_map(A, x) - z)).imag, x

    t0, t1 = theta, theta + 1e-7
    (f0, x), (f1, x1) = offset(t0), offset(t1)
    best = min((abs(f0), 0, x), (abs(f1), 1, x1))[2]
    for _ in range(iters):
        if f1 == f0:
            break
        t0, t1 = t1, t1 - f1 * (t1 - t0) / (f1 - f0)
        if abs(t1 - theta) > 1e-3:
            break
        f0, (f1, x1) = f1, offset(t1)
        if abs(evaluate_range_map(A, x1) - z) < abs(evaluate_range_map(A, best) - z):
            best = x1
        if f1 == 0 or abs(t1 - t0) < 1e-16:
            break
    return best


def _exit_point(A, z, d, grid_size=512):
    """Where the ray ``z + t d`` (t > 0) leaves W(A): (t, theta)."""
    from scipy.optimize import minimize_scalar

    h = 2 * np.pi / grid_size
    th = h * np.arange(grid_size)

    def ratio(t):
        den = (np.exp(-1j * t) * d).real
        if den <= 1e-12:
            return np.inf
        mu = np.linalg.eigvalsh(cartesian_part(A, t, "real"))[-1]
        return float((mu - (np.exp(-1j * t) * z).real) / den)

    vals = np.array([ratio(t) for t in th])
    k = int(np.argmin(vals))
    res = minimize_scalar(ratio, bounds=(th[k] - h, th[k] + h), method="bounded",
                          options={"xatol": 1e-14})
    if np.isfinite(res.fun) and res.fun < vals[k]:
        return float(res.fun), float(res.x)
    return float(vals[k]), float(th[k])


def preimage(A, z: complex, tol: float = 1e-10, seed: int = 0,
             boundary_tol: float | None = None,
             chord_angle: float | None = None, root: str = "low") -> PreimageResult:
    """One unit vector ``x`` with ``|<Ax, x> - z| <= tol``.

    The first chord is parallel to the nearest supporting line, or has
    direction ``e^{i chord_angle}`` when given.  ``root`` is passed to
    :func:`solve_2x2` for interior targets.
    """
    A = as_matrix(A)
    z = complex(z)
    sc = scale(A)
    gap_tol = default_gap_tol(A)
    btol = 1e-9 * sc if boundary_tol is None else boundary_tol
    gap, theta = support_gap(A, z)
    if gap < -max(btol, tol):
        raise OutsideRange(f"z lies outside W(A) (support gap {gap:.3e})")
    if gap <= btol:
        x = boundary_preimage(A, z, theta, gap_tol)
        res = _result(A, z, x, "boundary_eigenvector")
        if res.residual <= tol:
            return res
        res = _result(A, z, _polish_boundary(A, z, theta, gap_tol), "boundary_eigenvector")
        if res.residual <= tol:
            return res
        # near-boundary target that is not resolved exactly: fall through to chords
    # chord parallel to the nearest supporting line, then seeded random chords
    rng = np.random.default_rng(seed)
    directions = [1j * np.exp(1j * theta) if chord_angle is None else np.exp(1j * chord_angle)]
    directions += list(np.exp(2j * np.pi * rng.random(64)))
    for d in directions:
        try:
            t1, th1 = _exit_point(A, z, d)
            t2, th2 = _exit_point(A, z, -d)
            if not (t1 > 0 and t2 > 0):
                continue
            x1 = boundary_preimage(A, z + t1 * d, th1, gap_tol)
            x2 = boundary_preimage(A, z - t2 * d, th2, gap_tol)
            q2 = x2 - np.vdot(x1, x2) * x1
            if np.linalg.norm(q2) < 1e-10:
                continue
            q2 = q2 / np.linalg.norm(q2)
            B = compress(A, [x1, q2])
            u = solve_2x2(B, z, tol=max(tol, 1e-12 * sc), root=root)
            x = normalize(u[0] * x1 + u[1] * q2)
            res = _result(A, z, x, "two_by_two_reduction")
            if res.residual <= tol:
                return res
        except (NotInRange, InvalidInput):
            continue
    raise ChordSearchFailed(f"no chord through {z} produced a preimage within {tol}")


def span_projector(A, z: complex, gap_tol: float | None = None) -> np.ndarray:
    """Orthogonal projector onto the span of the preimages of a boundary point.

    For an extreme point supported at ``theta`` every preimage lies in the top
    eigenspace; the span is the part of that eigenspace mapped to ``z``.
    """
    A = as_matrix(A)
    _, theta = support_gap(A, z)
    sl = branch_slopes(A, theta, gap_tol)
    # extreme points are the min/max-slope ends; keep the branch matching z
    best = min(sl, key=lambda item: abs(np.exp(1j * theta)
                                        * (np.linalg.eigvalsh(cartesian_part(A, theta))[-1]
                                           + 1j * item[0]) - z))
    E = best[2]
    return E @ E.conj().T
