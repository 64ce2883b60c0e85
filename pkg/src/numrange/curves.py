"""Eigenvalue branch tracking and critical curves.

A branch ``lambda(theta)`` of ``Re(e^{-i theta} A)`` is followed across an
angle grid by matching eigenvectors with the largest overlap.  Its slope is
``<Im(e^{-i theta} A) x, x>`` and its critical curve is
``e^{i theta} (lambda + i lambda')``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BranchLost, InvalidInput
from .linalg import as_matrix, cartesian_part, spectral_norm
from .support import default_gap_tol

OVERLAP_MIN = 0.9


@dataclass(frozen=True)
class CrossingEvent:
    branch_id: int
    theta: float
    overlap: float


@dataclass
class CriticalBranch:
    id: int
    thetas: np.ndarray
    lam: np.ndarray
    dlam: np.ndarray
    vectors: np.ndarray          # (len(thetas), n)
    is_maximal: np.ndarray
    crossing: CrossingEvent | None = None

    @property
    def points(self) -> np.ndarray:
        return np.exp(1j * self.thetas) * (self.lam + 1j * self.dlam)


@dataclass
class _Frame:
    w: np.ndarray
    V: np.ndarray
    slopes: np.ndarray


def _frame(A, theta, gap_tol, prev: np.ndarray | None) -> _Frame:
    """Eigenpairs at ``theta`` with degenerate clusters given a continuation basis.

    Inside a cluster of (numerically) equal eigenvalues the basis is chosen to
    diagonalise the imaginary part; if slopes also coincide the basis is
    rotated to follow the previous frame's vectors.
    """
    R = cartesian_part(A, theta, "real")
    K = cartesian_part(A, theta, "imaginary")
    w, V = np.linalg.eigh(R)
    n = len(w)
    i = 0
    while i < n:
        j = i + 1
        while j < n and w[j] - w[j - 1] <= gap_tol:
            j += 1
        if j - i > 1:
            E = V[:, i:j]
            s, U = np.linalg.eigh(E.conj().T @ K @ E)
            E = E @ U
            if prev is not None:
                # align sub-clusters of equal slope with the previous vectors
                a = 0
                while a < len(s):
                    c = a + 1
                    while c < len(s) and s[c] - s[c - 1] <= gap_tol:
                        c += 1
                    if c - a > 1:
                        F = E[:, a:c]
                        M = F.conj().T @ prev
                        # columns of prev most represented in span(F)
                        weight = np.linalg.norm(M, axis=0)
                        cols = np.argsort(-weight)[: c - a]
                        P, _, Qh = np.linalg.svd(M[:, cols])
                        m = Qh.shape[0]
                        # leading columns follow prev; the rest complete the subspace
                        U = np.column_stack([P[:, :m] @ Qh, P[:, m:]])
                        E[:, a:c] = F @ U
                    a = c
            V[:, i:j] = E
        i = j
    slopes = np.sum(V.conj() * (K @ V), axis=0).real
    return _Frame(w, V, slopes)


def track_branches(A, theta_range=(0.0, 2 * np.pi), grid_size: int = 256,
                   top_k: int = 1, gap_tol: float | None = None,
                   include_end: bool = True,
                   floor: float | None = None,
                   strict: bool = False) -> list[CriticalBranch]:
    """Follow the ``top_k`` largest eigenvalue branches across ``theta_range``.

    Branches are matched between consecutive angles greedily by eigenvector
    overlap.  A branch whose best overlap falls below 0.9 is terminated and
    carries a :class:`CrossingEvent` instead of being reassigned.  With
    ``floor`` set, every branch starting at or above it is tracked as well.
    With ``strict`` the first lost branch raises :class:`BranchLost` instead.
    """
    A = as_matrix(A)
    if grid_size < 64:
        raise InvalidInput("grid_size must be at least 64")
    if top_k < 1:
        raise InvalidInput("top_k must be >= 1")
    a, b = map(float, theta_range)
    gap_tol = default_gap_tol(A) if gap_tol is None else gap_tol
    thetas = np.linspace(a, b, grid_size, endpoint=include_end)
    n = A.shape[0]

    frame = _frame(A, thetas[0], gap_tol, None)
    if floor is not None:
        top_k = max(top_k, int(np.sum(frame.w >= floor)))
    order = np.argsort(-frame.w, kind="stable")[:top_k]
    idx = [[int(j)] for j in order]
    vec = [[frame.V[:, j]] for j in order]
    lam = [[frame.w[j]] for j in order]
    dlam = [[frame.slopes[j]] for j in order]
    mx = [[frame.w[j] >= frame.w[-1] - gap_tol] for j in order]
    top_k = min(top_k, n)
    alive = list(range(top_k))
    crossings: dict[int, CrossingEvent] = {}
    last = np.column_stack([v[-1] for v in vec])

    for t in thetas[1:]:
        frame = _frame(A, t, gap_tol, last)
        if not alive:
            break
        prev = np.column_stack([vec[bi][-1] for bi in alive])
        O = np.abs(prev.conj().T @ frame.V)
        prev_lam = np.array([lam[bi][-1] for bi in alive])
        # greedy on the overlap matrix; ties broken by eigenvalue proximity
        dl = np.abs(frame.w[None, :] - prev_lam[:, None])
        order = np.lexsort((dl.ravel(), -O.ravel()))
        assigned: dict[int, int] = {}
        taken = np.zeros(n, dtype=bool)
        for flat in order:
            r, c = divmod(int(flat), n)
            if r in assigned or taken[c]:
                continue
            assigned[r] = c
            taken[c] = True
            if len(assigned) == len(alive):
                break
        still = []
        for r, bi in enumerate(alive):
            c = assigned[r]
            ov = O[r, c]
            if ov < OVERLAP_MIN:
                if strict:
                    raise BranchLost(f"branch {bi} lost at theta={t:.6g} (overlap {ov:.3f})",
                                     float(t), float(ov))
                crossings[bi] = CrossingEvent(bi, float(t), float(ov))
                continue
            v = frame.V[:, c]
            ph = np.vdot(vec[bi][-1], v)
            v = v * (np.conj(ph) / abs(ph)) if abs(ph) > 0 else v
            vec[bi].append(v)
            lam[bi].append(frame.w[c])
            dlam[bi].append(frame.slopes[c])
            mx[bi].append(frame.w[c] >= frame.w[-1] - gap_tol)
            still.append(bi)
        alive = still
        if alive:
            last = np.column_stack([vec[bi][-1] for bi in alive])

    out = []
    for bi in range(top_k):
        m = len(lam[bi])
        out.append(CriticalBranch(
            id=bi, thetas=thetas[:m], lam=np.array(lam[bi]), dlam=np.array(dlam[bi]),
            vectors=np.array(vec[bi]), is_maximal=np.array(mx[bi], dtype=bool),
            crossing=crossings.get(bi),
        ))
    return out


def curve_points(branch: CriticalBranch, A=None) -> np.ndarray:
    """Critical curve of a branch; checked against ``f_A(x(theta))`` when ``A`` is given."""
    pts = branch.points
    if A is not None:
        A = np.asarray(A, dtype=complex)
        X = branch.vectors
        direct = np.einsum("ki,ij,kj->k", X.conj(), A, X)
        err = float(np.max(np.abs(direct - pts))) if len(pts) else 0.0
        if err > 1e-6 * (1.0 + spectral_norm(A)):
            raise AssertionError(f"critical curve inconsistent with f_A (err {err:.2e})")
    return pts


@dataclass
class Passage:
    branch_id: int
    theta: float
    distance: float


@dataclass
class CurvesThrough:
    count: int
    branch_ids: list[int]
    thetas: list[float]
    passages: list[Passage] = field(default_factory=list)


def curves_through(branches, z: complex, tol: float, min_separation: int = 10,
                   merge_equal: float | None = None) -> CurvesThrough:
    """Count distinct branch passages within ``tol`` of ``z``.

    A branch coming back to ``z`` after more than ``min_separation`` grid
    steps counts again.  With ``merge_equal`` set, branches whose eigenvalue
    functions agree to that tolerance over their common grid are the same
    critical curve and count once.
    """
    from .geometry import polyline_distance

    passages: list[Passage] = []
    for br in branches:
        pts = br.points
        if len(pts) == 0:
            continue
        d = polyline_distance(pts, z) if len(pts) > 1 else np.abs(pts - z)
        hits = np.flatnonzero(d <= tol)
        if hits.size == 0:
            continue
        groups = np.split(hits, np.flatnonzero(np.diff(hits) > min_separation) + 1)
        for g in groups:
            k = int(g[np.argmin(d[g])])
            passages.append(Passage(br.id, float(br.thetas[min(k, len(br.thetas) - 1)]),
                                    float(d[k])))
    if merge_equal is not None and len(passages) > 1:
        by_id = {br.id: br for br in branches}
        kept: list[Passage] = []
        for p in passages:
            dup = False
            for q in kept:
                if q.branch_id == p.branch_id:
                    continue
                bp, bq = by_id[p.branch_id], by_id[q.branch_id]
                m = min(len(bp.lam), len(bq.lam))
                if m and np.allclose(bp.thetas[:m], bq.thetas[:m]) and \
                        np.max(np.abs(bp.lam[:m] - bq.lam[:m])) <= merge_equal and \
                        abs(p.theta - q.theta) <= 1e-9:
                    dup = True
                    break
            if not dup:
                kept.append(p)
        passages = kept
    return CurvesThrough(len(passages), [p.branch_id for p in passages],
                         [p.theta for p in passages], passages)


def branches_to_rows(branches) -> list[tuple]:
    rows = []
    for br in branches:
        pts = br.points
        for k in range(len(br.thetas)):
            rows.append((br.id, float(br.thetas[k]), float(br.lam[k]), float(br.dlam[k]),
                         float(pts[k].real), float(pts[k].imag), bool(br.is_maximal[k])))
    return rows
