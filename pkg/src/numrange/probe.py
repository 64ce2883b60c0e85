"""Empirical openness test for the numerical range map at a preimage.

For a preimage ``x`` of ``z`` and a cap ``U = {y : ||y - x|| < eps}`` the
prober samples ``f_A(U)``, checks that the cloud looks convex, measures the
largest ``delta`` with ``delta W(A) + (1 - delta) z`` inside the cloud hull,
and checks whether the scanned boundary points of W(A) near ``z`` are
covered.  Distances are compared against a bootstrap noise estimate so that
sampling resolution is never read as a verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import geometry
from .errors import InvalidInput, NumRangeError
from .inverse import boundary_preimage, boundary_preimages, preimage
from .linalg import as_matrix, as_unit_vector, range_map_many, sample_cap
from .support import BoundaryModel, boundary_scan, support_gap

OPEN, NOT_OPEN, INCONCLUSIVE = "open", "not_open", "inconclusive"


@dataclass
class ProbeConfig:
    eps_list: tuple[float, ...] = (0.5, 0.25, 0.1)
    samples_per_eps: int = 20000
    delta_grid: np.ndarray | None = None      # default: 64 log-spaced values in [0.005, 1]
    coverage_resolution: int = 256
    seed: int = 0
    sparse_fraction: float = 0.5
    bootstrap_splits: int = 8
    margin_rel: float = 1e-6
    defect_probes: int = 4000

    def deltas(self) -> np.ndarray:
        if self.delta_grid is None:
            return np.logspace(np.log10(0.005), 0.0, 64)
        d = np.sort(np.asarray(self.delta_grid, dtype=float))
        if d.size == 0 or d[0] <= 0 or d[-1] > 1:
            raise InvalidInput("delta_grid values must lie in (0, 1]")
        return d

    def validate(self) -> None:
        eps = np.asarray(self.eps_list, dtype=float)
        if eps.size == 0 or np.any(eps <= 0) or np.any(eps > 2):
            raise InvalidInput("eps values must lie in (0, 2]")
        if np.any(np.diff(eps) >= 0):
            raise InvalidInput("eps_list must be strictly decreasing")
        if self.samples_per_eps < 16 * self.bootstrap_splits:
            raise InvalidInput("samples_per_eps too small")
        self.deltas()


@dataclass
class EpsRecord:
    eps: float
    convexity_defect: float
    delta_max_covered: float
    relative_nbhd_covered: bool
    uncovered_distance: float        # worst distance of a neighbourhood target outside the hull
    noise: float                     # bootstrap spread of that distance
    targets: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class PreimageProbe:
    x: np.ndarray
    records: list[EpsRecord]
    verdict: str

    def to_dict(self) -> dict:
        return {
            "x": [[float(c.real), float(c.imag)] for c in self.x],
            "records": [r.to_dict() for r in self.records],
            "verdict": self.verdict,
        }


@dataclass
class ProbeReport:
    z: complex
    variant: str
    probes: list[PreimageProbe]
    verdict: str
    r0: float
    notes: list[str] = field(default_factory=list)

    @property
    def x(self) -> list[np.ndarray]:
        return [p.x for p in self.probes]

    def to_dict(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "variant": self.variant,
            "verdict": self.verdict,
            "r0": self.r0,
            "tested_preimages": [p.to_dict() for p in self.probes],
            "notes": self.notes,
        }


def cap_image(A, x, eps: float, config: ProbeConfig | None = None,
              seed: int | None = None) -> np.ndarray:
    """``f_A`` over ``x`` and ``samples_per_eps`` points of the eps-cap around it."""
    config = config or ProbeConfig()
    A = as_matrix(A)
    x = as_unit_vector(x, tol=1e-10, dim=A.shape[0])
    seed = config.seed if seed is None else seed
    Y = sample_cap(x, eps, seed=seed, count=config.samples_per_eps,
                   sparse_fraction=config.sparse_fraction)
    return np.concatenate([[np.vdot(x, A @ x)], range_map_many(A, Y)])


def convexity_defect(cloud, probes: int = 4000, seed: int = 0) -> float:
    """Largest gap between a midpoint of two random cloud points and the cloud.

    Normalised by the cloud diameter; for a convex image it tends to 0 as
    the sample grows.
    """
    c = np.asarray(cloud, dtype=complex).ravel()
    if c.size < 2:
        return 0.0
    diam = geometry.diameter(c)
    if diam < 1e-12:
        return 0.0
    rng = np.random.default_rng(seed)
    i = rng.integers(0, c.size, probes)
    j = rng.integers(0, c.size, probes)
    m = 0.5 * (c[i] + c[j])
    tree = cKDTree(np.column_stack([c.real, c.imag]))
    d, _ = tree.query(np.column_stack([m.real, m.imag]))
    return float(np.max(d) / diam)


def _ray_exit(poly: np.ndarray, z: complex, direction: complex) -> float:
    """Largest ``t >= 0`` with ``z + t direction`` in the convex polygon (0 if none)."""
    a, b = poly, np.roll(poly, -1)
    e = b - a
    # inward normal i*e; constraint Im(conj(e) (p - a)) >= 0
    num = (np.conj(e) * (z - a)).imag
    den = (np.conj(e) * direction).imag
    t = np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        lim = np.where(den < 0, -num / den, np.inf)
    t = float(np.min(lim))
    return max(t, 0.0) if np.isfinite(t) else 0.0


def delta_coverage(A, model: BoundaryModel, z: complex, cloud, config: ProbeConfig | None = None,
                   hull: np.ndarray | None = None) -> float:
    """Largest ``delta`` in the grid with ``delta W(A) + (1 - delta) z`` inside hull(cloud)."""
    config = config or ProbeConfig()
    z = complex(z)
    poly = model.polygon
    if poly.size < 3:
        return 1.0
    hull = geometry.convex_hull(cloud) if hull is None else hull
    if hull.size < 3:
        return 0.0
    margin = config.margin_rel * model.diameter
    dirs = np.exp(2j * np.pi * np.arange(config.coverage_resolution) / config.coverage_resolution)
    w = np.array([z + _ray_exit(poly, z, d) * d for d in dirs])
    best = 0.0
    for delta in config.deltas():
        pts = z + delta * (w - z)
        if np.all(geometry.signed_distance(hull, pts) >= -margin):
            best = float(delta)
        else:
            break
    return best


def _outside(hull: np.ndarray, pts: np.ndarray) -> np.ndarray:
    if pts.size == 0:
        return np.zeros(0)
    if hull.size < 3:
        return np.abs(pts[:, None] - hull[None, :]).min(axis=1) if hull.size else np.full(pts.size, np.inf)
    return np.maximum(0.0, -geometry.signed_distance(hull, pts))


def _record(A, model, z, x, eps, config, targets, seed) -> EpsRecord:
    cloud = cap_image(A, x, eps, config, seed=seed)
    hull = geometry.convex_hull(cloud)
    defect = convexity_defect(cloud, config.defect_probes, seed)
    dmax = delta_coverage(A, model, z, cloud, config, hull=hull)
    margin = config.margin_rel * model.diameter
    d_full = _outside(hull, targets)
    k = config.bootstrap_splits
    rng = np.random.default_rng(seed + 7919)
    perm = rng.permutation(cloud.size - 1) + 1
    splits = np.array_split(perm, k)
    d_split = np.array([_outside(geometry.convex_hull(np.concatenate([[cloud[0]], cloud[s]])),
                                 targets) for s in splits]) if targets.size else np.zeros((k, 0))
    noise_each = d_split.std(axis=0) if targets.size else np.zeros(0)
    if targets.size:
        excess = d_full - margin - 3.0 * noise_each
        worst = int(np.argmax(excess))
        covered = bool(excess[worst] <= 0)
        unc, noise = float(d_full[worst]), float(noise_each[worst])
    else:
        covered, unc, noise = True, 0.0, 0.0
    covered = covered and dmax > 0
    return EpsRecord(float(eps), defect, dmax, covered, unc, noise, int(targets.size))


def neighbourhood_targets(model: BoundaryModel, z: complex, r0: float,
                          per_circle: int = 64) -> np.ndarray:
    """Discretised relative neighbourhood ``W(A) ∩ {|w - z| <= r0}``.

    Scanned boundary points and points along the scanned hull edges inside the
    disk, plus the part of the circle ``|w - z| = r0`` inside the hull.
    """
    poly = model.polygon
    pts = [model.boundary_points]
    if poly.size >= 2 and r0 > 0:
        a, b = poly, np.roll(poly, -1)
        for p, q in zip(a, b):
            n_pts = int(np.clip(np.ceil(16 * abs(q - p) / r0), 2, 4096))
            pts.append(p + np.linspace(0, 1, n_pts) * (q - p))
        circle = z + r0 * np.exp(2j * np.pi * np.arange(per_circle) / per_circle)
        inside = geometry.signed_distance(poly, circle) >= 0
        pts.append(circle[inside])
    allp = np.concatenate(pts)
    return allp[np.abs(allp - z) <= r0]


def probe_preimage(A, model: BoundaryModel, z: complex, x, config: ProbeConfig,
                   r0: float) -> PreimageProbe:
    """Run every eps in the config at one preimage and combine into a verdict."""
    targets = neighbourhood_targets(model, z, r0)
    records = []
    for k, eps in enumerate(config.eps_list):
        records.append(_record(A, model, z, x, eps, config, targets, config.seed + 1000 * k))
    if all(r.relative_nbhd_covered for r in records):
        verdict = OPEN
    elif not records[-1].relative_nbhd_covered and records[-1].targets > 0:
        verdict = NOT_OPEN
    elif not records[-1].relative_nbhd_covered and records[-1].delta_max_covered == 0:
        verdict = NOT_OPEN
    else:
        verdict = INCONCLUSIVE
    return PreimageProbe(np.asarray(x), records, verdict)


def constructed_preimages(A, z: complex, model: BoundaryModel, seed: int = 0) -> list[np.ndarray]:
    """Preimages produced by the inverse-map constructions, without phase duplicates."""
    A = as_matrix(A)
    gap, theta = support_gap(A, z, model=model)
    out: list[np.ndarray] = []
    tol = 1e-8 * model.scale
    if abs(gap) <= 1e-9 * model.scale:
        out.append(boundary_preimage(A, z, theta, model.gap_tol))
        for r in boundary_preimages(A, theta, model.gap_tol):
            if abs(r.achieved - z) <= tol:
                out.append(r.x)
    else:
        out.append(preimage(A, z, seed=seed).x)
        for kw in (dict(root="high"), dict(chord_angle=theta)):
            try:
                out.append(preimage(A, z, seed=seed, **kw).x)
            except NumRangeError:
                pass
    uniq: list[np.ndarray] = []
    for x in out:
        if all(abs(abs(np.vdot(u, x)) - 1) > 1e-9 for u in uniq):
            uniq.append(x)
    return uniq


def openness_verdict(A, model: BoundaryModel | None = None, z: complex = 0j,
                     config: ProbeConfig | None = None, preimages=None,
                     variant: str = "strong") -> ProbeReport:
    """Probe openness at constructed (or given) preimages of ``z``.

    ``variant="strong"`` needs every tested preimage open; ``"weak"`` needs one.
    """
    A = as_matrix(A)
    config = config or ProbeConfig()
    config.validate()
    if variant not in ("strong", "weak"):
        raise InvalidInput("variant must be 'strong' or 'weak'")
    model = boundary_scan(A) if model is None else model
    z = complex(z)
    xs = constructed_preimages(A, z, model, config.seed) if preimages is None else \
        [as_unit_vector(x, tol=1e-10, dim=A.shape[0]) for x in preimages]
    r0 = float(config.deltas()[0] * model.diameter)
    probes = [probe_preimage(A, model, z, x, config, r0) for x in xs]
    verdicts = [p.verdict for p in probes]
    if variant == "strong":
        verdict = OPEN if all(v == OPEN for v in verdicts) else \
            NOT_OPEN if any(v == NOT_OPEN for v in verdicts) else INCONCLUSIVE
    else:
        verdict = OPEN if any(v == OPEN for v in verdicts) else \
            NOT_OPEN if all(v == NOT_OPEN for v in verdicts) else INCONCLUSIVE
    notes = [f"{len(xs)} preimage(s) tested; other preimages are not covered by this verdict",
             f"neighbourhood radius r0 = {r0:.3e}"]
    return ProbeReport(z, variant, probes, verdict, r0, notes)
