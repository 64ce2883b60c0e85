"""Support function of W(A), boundary scan and boundary segmentation.

For each angle ``theta`` the largest eigenvalue ``mu(theta)`` of
``Re(e^{-i theta} A)`` gives the supporting line
``{z : Re(e^{-i theta} z) = mu(theta)}``.  The boundary points on that line
are ``e^{i theta}(mu + i s)`` where ``s`` ranges over the first-order slopes
of the eigenvalue branches leaving the top eigenspace.  A spread of slopes is
a flat portion; a point supported over a range of angles is a corner.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import DegenerateNumericalRange, InvalidInput
from .linalg import as_matrix, cartesian_part, hermitian_eig, spectral_norm

TWO_PI = 2.0 * np.pi


def default_gap_tol(A: np.ndarray) -> float:
    return 1e-8 * (1.0 + float(np.linalg.norm(A, "fro")))


def default_flat_tol(A: np.ndarray) -> float:
    return 1e-6 * (1.0 + spectral_norm(A))


@dataclass(frozen=True)
class SupportSample:
    theta: float
    mu: float
    multiplicity: int
    eigenbasis: np.ndarray       # n x multiplicity
    essential_like: bool
    slopes: np.ndarray           # eigenvalues of the compressed imaginary part

    @property
    def low_point(self) -> complex:
        return complex(np.exp(1j * self.theta) * (self.mu + 1j * self.slopes[0]))

    @property
    def high_point(self) -> complex:
        return complex(np.exp(1j * self.theta) * (self.mu + 1j * self.slopes[-1]))


@dataclass(frozen=True)
class FlatPortion:
    theta: float
    endpoints: tuple[complex, complex]   # (min-slope end, max-slope end), CCW order
    slopes: tuple[float, float]
    essential_like: bool = False

    def contains(self, z: complex, tol: float) -> bool:
        a, b = self.endpoints
        return float(geometry.segment_distance(a, b, z)) <= tol

    def relative_interior(self, z: complex, tol: float) -> bool:
        a, b = self.endpoints
        return self.contains(z, tol) and abs(z - a) > tol and abs(z - b) > tol


@dataclass(frozen=True)
class CornerPoint:
    z: complex
    theta_interval: tuple[float, float]


@dataclass(frozen=True)
class Arc:
    theta_start: float
    theta_end: float
    points: np.ndarray
    branch_id: int | None = None


@dataclass(frozen=True)
class BoundaryPoint:
    theta: float
    mu: float
    z: complex
    multiplicity: int
    kind: str   # "arc", "flat" or "corner"


@dataclass(frozen=True)
class ExtremePoint:
    z: complex
    is_isolated: bool
    kind: str
    theta: float


@dataclass
class BoundaryModel:
    matrix: np.ndarray
    thetas: np.ndarray
    samples: list[SupportSample]
    points: list[BoundaryPoint]
    polygon: np.ndarray                   # CCW hull of all boundary points
    arcs: list[Arc]
    flats: list[FlatPortion]
    corners: list[CornerPoint]
    degenerate: bool
    gap_tol: float
    flat_tol: float
    scale: float                          # 1 + ||A||_2
    continuum: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def boundary_points(self) -> np.ndarray:
        return np.array([p.z for p in self.points], dtype=complex)

    @property
    def diameter(self) -> float:
        return geometry.diameter(self.polygon)

    def mu(self) -> np.ndarray:
        return np.array([s.mu for s in self.samples])

    def support_at(self, z: complex, tol: float) -> np.ndarray:
        """Grid angles whose supporting line passes within ``tol`` of ``z``."""
        th = self.thetas
        gap = self.mu() - (np.exp(-1j * th) * z).real
        return th[np.abs(gap) <= tol]


def branch_slopes(A, theta: float, gap_tol: float | None = None,
                  slope_tol: float | None = None):
    """First-order slopes of the branches leaving the top eigenspace.

    Returns ``[(slope, multiplicity, basis), ...]`` with slopes ascending;
    slopes closer than ``slope_tol`` are merged.
    """
    A = as_matrix(A)
    s = support_value(A, theta, gap_tol)
    if slope_tol is None:
        slope_tol = default_flat_tol(A)
    K = cartesian_part(A, theta, "imaginary")
    E = s.eigenbasis
    C = E.conj().T @ K @ E
    dec = hermitian_eig(C)
    out = []
    vals, vecs = dec.eigenvalues, E @ dec.eigenvectors
    i = 0
    while i < len(vals):
        j = i + 1
        while j < len(vals) and vals[j] - vals[j - 1] <= slope_tol:
            j += 1
        out.append((float(np.mean(vals[i:j])), j - i, vecs[:, i:j]))
        i = j
    return out


def support_value(A, theta: float, gap_tol: float | None = None) -> SupportSample:
    A = as_matrix(A)
    if gap_tol is None:
        gap_tol = default_gap_tol(A)
    if gap_tol <= 0:
        raise InvalidInput("gap_tol must be positive")
    dec = hermitian_eig(cartesian_part(A, theta, "real"))
    w, V = dec.eigenvalues, dec.eigenvectors
    mu = float(w[-1])
    top = w >= mu - gap_tol
    E = V[:, top]
    m = int(top.sum())
    K = cartesian_part(A, theta, "imaginary")
    slopes = np.linalg.eigvalsh(E.conj().T @ K @ E) if m > 1 else \
        np.array([float(np.vdot(E[:, 0], K @ E[:, 0]).real)])
    return SupportSample(
        theta=float(theta) % TWO_PI,
        mu=mu,
        multiplicity=m,
        eigenbasis=E,
        essential_like=m > A.shape[0] / 2,
        slopes=np.sort(slopes),
    )


def support_point(A, theta: float) -> complex:
    """Boundary point supported at ``theta`` (top eigenvector; ties arbitrary)."""
    dec = hermitian_eig(cartesian_part(A, theta, "real"))
    x = dec.eigenvectors[:, -1]
    return complex(np.vdot(x, A @ x))


def is_degenerate(A: np.ndarray, tol: float = 1e-12) -> bool:
    """True when W(A) has empty interior (a point or a line segment).

    That happens exactly when ``A - (tr A / n) I`` is a rotated Hermitian
    matrix, i.e. its real and imaginary parts are linearly dependent.
    """
    n = A.shape[0]
    B = A - np.trace(A) / n * np.eye(n)
    R = 0.5 * (B + B.conj().T)
    K = (B - B.conj().T) / 2j
    M = np.column_stack([np.concatenate([R.real.ravel(), R.imag.ravel()]),
                         np.concatenate([K.real.ravel(), K.imag.ravel()])])
    sv = np.linalg.svd(M, compute_uv=False)
    return bool(sv[-1] <= tol * (1.0 + np.linalg.norm(A, "fro")))


def _settle_flat(A, s: SupportSample, gap_tol, flat_tol, max_step, iters=30):
    """Move a candidate flat to the angle where its extreme-slope branches cross.

    Within the top cluster, branch values are ``r + t s`` to first order, so
    the crossing sits at ``t = (r_lo - r_hi) / (s_hi - s_lo)``.  Branches that
    only touch tangentially drift until their slopes agree; those are not
    flats.  Returns the settled sample or ``None``.
    """
    theta0 = theta = s.theta
    for _ in range(iters):
        if s.multiplicity < 2 or s.slopes[-1] - s.slopes[0] <= flat_tol:
            return None
        E = s.eigenbasis
        Rc = E.conj().T @ cartesian_part(A, theta, "real") @ E
        w, U = np.linalg.eigh(E.conj().T @ cartesian_part(A, theta, "imaginary") @ E)
        r_lo = float(np.vdot(U[:, 0], Rc @ U[:, 0]).real)
        r_hi = float(np.vdot(U[:, -1], Rc @ U[:, -1]).real)
        t = (r_lo - r_hi) / (w[-1] - w[0])
        if abs(t) <= 1e-13:
            return s
        if abs(theta + t - theta0) > max_step:
            return None
        theta += t
        s = support_value(A, theta, gap_tol)
    return s if s.multiplicity > 1 and s.slopes[-1] - s.slopes[0] > flat_tol else None


def _refine_flat(A, lo, hi, p_lo, p_hi, gap_tol, flat_tol, iters=64):
    """Bisect between two grid angles for a jump in the support point."""
    for _ in range(iters):
        if hi - lo <= 1e-14:
            break
        mid = 0.5 * (lo + hi)
        s = support_value(A, mid, gap_tol)
        if s.multiplicity > 1 and s.slopes[-1] - s.slopes[0] > flat_tol:
            lo = hi = mid
            break
        p = s.low_point
        if abs(p - p_lo) <= abs(p - p_hi):
            lo, p_lo = mid, p
        else:
            hi, p_hi = mid, p
        if abs(p_hi - p_lo) <= flat_tol:
            return None
    s = support_value(A, 0.5 * (lo + hi), gap_tol)
    return _settle_flat(A, s, gap_tol, flat_tol, max_step=hi - lo + 1e-3)


def boundary_scan(A, grid_size: int = 256, gap_tol: float | None = None,
                  flat_tol: float | None = None) -> BoundaryModel:
    """Scan ``mu`` on a uniform angle grid and segment the boundary of W(A)."""
    A = as_matrix(A)
    if grid_size < 64:
        raise InvalidInput("grid_size must be at least 64")
    gap_tol = default_gap_tol(A) if gap_tol is None else gap_tol
    flat_tol = default_flat_tol(A) if flat_tol is None else flat_tol
    sc = 1.0 + spectral_norm(A)
    h = TWO_PI / grid_size
    thetas = h * np.arange(grid_size)
    samples = [support_value(A, t, gap_tol) for t in thetas]

    # support points per angle, inserting flats hidden between grid angles
    entries: list[tuple[float, float, complex, int, bool]] = []  # theta, mu, z, mult, is_flat_end
    flats: list[FlatPortion] = []
    lows = np.array([s.low_point for s in samples])
    highs = np.array([s.high_point for s in samples])
    gaps = np.abs(np.roll(lows, -1) - highs)
    median = float(np.median(gaps[gaps > flat_tol])) if np.any(gaps > flat_tol) else 0.0
    for k, s in enumerate(samples):
        f = None
        if s.multiplicity > 1 and s.slopes[-1] - s.slopes[0] > flat_tol:
            f = _settle_flat(A, s, gap_tol, flat_tol, max_step=h)
        if f is not None:
            flats.append(FlatPortion(f.theta, (f.low_point, f.high_point),
                                     (float(f.slopes[0]), float(f.slopes[-1])),
                                     f.essential_like))
            entries.append((f.theta, f.mu, f.low_point, f.multiplicity, True))
            entries.append((f.theta, f.mu, f.high_point, f.multiplicity, True))
        else:
            entries.append((s.theta, s.mu, s.low_point, s.multiplicity, False))
        g = gaps[k]
        nb = max(gaps[k - 1], gaps[(k + 1) % grid_size])
        if g > flat_tol and (g > 4 * nb or g > 16 * median):
            hi = thetas[k] + h
            f = _refine_flat(A, thetas[k], hi, highs[k], lows[(k + 1) % grid_size],
                             gap_tol, flat_tol)
            if f is not None:
                fp = FlatPortion(f.theta, (f.low_point, f.high_point),
                                 (float(f.slopes[0]), float(f.slopes[-1])),
                                 f.essential_like)
                if not any(abs(fp.theta - q.theta) < 1e-12 for q in flats):
                    flats.append(fp)
                    entries.append((f.theta, f.mu, f.low_point, f.multiplicity, True))
                    entries.append((f.theta, f.mu, f.high_point, f.multiplicity, True))
    flats.sort(key=lambda f: f.theta)

    point_tol = 1e-8 * sc
    zs = np.array([e[2] for e in entries])
    m = len(entries)
    # start at a point that differs from its predecessor so runs don't wrap
    start = 0
    for k in range(m):
        if abs(zs[k] - zs[k - 1]) > point_tol:
            start = k
            break
    order = [(start + k) % m for k in range(m)]

    runs: list[list[int]] = []
    for k in order:
        if runs and abs(zs[k] - zs[runs[-1][0]]) <= point_tol:
            runs[-1].append(k)
        else:
            runs.append([k])

    def span(run):
        t = np.unwrap([entries[k][0] for k in run])
        return float(t[0]), float(t[-1])

    points: list[BoundaryPoint] = []
    corners: list[CornerPoint] = []
    corner_min = 10 * h
    for run in runs:
        t0, t1 = span(run)
        th, mu_, z, mult, flat_end = entries[run[0]]
        if len(run) > 1 and t1 - t0 > corner_min:
            corners.append(CornerPoint(complex(z), (t0 % TWO_PI, t0 % TWO_PI + (t1 - t0))))
            tm = 0.5 * (t0 + t1)
            mu_mid = float((np.exp(-1j * tm) * z).real)
            points.append(BoundaryPoint(tm % TWO_PI, mu_mid, complex(z), mult, "corner"))
        else:
            kind = "flat" if any(entries[k][4] for k in run) else "arc"
            points.append(BoundaryPoint(th, mu_, complex(z), mult, kind))

    arcs: list[Arc] = []
    cur: list[BoundaryPoint] = []

    def close_arc():
        if len(cur) >= 2:
            arcs.append(Arc(cur[0].theta, cur[-1].theta,
                            np.array([p.z for p in cur], dtype=complex)))

    for p in points:
        if p.kind == "arc":
            cur.append(p)
        else:
            close_arc()
            cur = []
    close_arc()
    # an arc running through the start of the list continues the last one
    if (len(arcs) >= 2 and points and points[0].kind == "arc"
            and points[-1].kind == "arc"):
        first, last = arcs[0], arcs.pop()
        arcs[0] = Arc(last.theta_start, first.theta_end,
                      np.concatenate([last.points, first.points]))

    allz = np.array([p.z for p in points], dtype=complex)
    polygon = geometry.convex_hull(allz, tol=1e-14 * sc * sc)
    degenerate = is_degenerate(A) or polygon.size < 3
    model = BoundaryModel(
        matrix=A, thetas=thetas, samples=samples, points=points, polygon=polygon,
        arcs=arcs, flats=flats, corners=corners, degenerate=degenerate,
        gap_tol=gap_tol, flat_tol=flat_tol, scale=sc, continuum=bool(arcs),
    )
    model.notes.append(
        f"angle grid {grid_size} (step {h:.3e} rad) is the detection limit for "
        "corners and non-analytic boundary points")
    if degenerate:
        model.notes.append("DegenerateNumericalRange: W(A) has empty interior")
    return model


def extreme_points(model: BoundaryModel, iso_tol: float) -> list[ExtremePoint]:
    """Extreme points of the scanned hull with isolation flags.

    Arc samples stand for a continuum of extreme points and are never
    isolated.  Flat endpoints joined to an arc are limits of the arc's
    extreme points.  Corners (and flat endpoints between flats) are isolated
    when no other extreme point lies within ``iso_tol``.
    """
    pts = model.points
    if not pts:
        return []
    poly = model.polygon
    zs = np.array([p.z for p in pts])
    tol = 1e-7 * model.scale
    on_hull = []
    for i, p in enumerate(pts):
        d = np.min(np.abs(poly - p.z)) if poly.size else np.inf
        if d <= tol:
            on_hull.append(i)
    n = len(pts)
    out: list[ExtremePoint] = []
    hull_z = zs[on_hull]
    for i in on_hull:
        p = pts[i]
        if p.kind == "arc":
            iso = False
        else:
            prev_arc = pts[i - 1].kind == "arc"
            next_arc = pts[(i + 1) % n].kind == "arc"
            if p.kind == "flat" and (prev_arc or next_arc):
                iso = False
            else:
                others = hull_z[np.abs(hull_z - p.z) > tol]
                near = np.min(np.abs(others - p.z)) if others.size else np.inf
                iso = bool(near > iso_tol)
        out.append(ExtremePoint(p.z, iso, p.kind, p.theta))
    return out


def hull_contains(model: BoundaryModel, z: complex, margin: float) -> str:
    """Classify ``z`` as ``"inside"``, ``"boundary"`` or ``"outside"``."""
    if model.degenerate:
        raise DegenerateNumericalRange("W(A) has empty interior")
    d = float(geometry.signed_distance(model.polygon, z)[0])
    if d > margin:
        return "inside"
    if d >= -margin:
        return "boundary"
    return "outside"


def support_gap(A, z: complex, grid_size: int = 512,
                model: "BoundaryModel | None" = None) -> tuple[float, float]:
    """``min_theta mu(theta) - Re(e^{-i theta} z)`` and the minimising angle.

    Positive inside W(A), zero on the boundary, negative outside; the
    minimising angle is a supporting angle for boundary points.  A scanned
    ``model`` supplies the coarse grid so only the local refinement solves
    eigenproblems.
    """
    from scipy.optimize import minimize_scalar

    A = as_matrix(A)
    h = TWO_PI / grid_size
    th = h * np.arange(grid_size)

    def g(t):
        w = np.linalg.eigvalsh(cartesian_part(A, t, "real"))[-1]
        return float(w - (np.exp(-1j * t) * z).real)

    if model is not None:
        th = model.thetas
        h = th[1] - th[0]
        vals = model.mu() - (np.exp(-1j * th) * z).real
    else:
        vals = np.array([g(t) for t in th])
    k = int(np.argmin(vals))
    res = minimize_scalar(g, bounds=(th[k] - h, th[k] + h), method="bounded",
                          options={"xatol": 1e-13})
    if res.fun < vals[k]:
        return float(res.fun), float(res.x) % TWO_PI
    return float(vals[k]), float(th[k])
