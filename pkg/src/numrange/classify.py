"""Continuity verdicts for the inverse of the numerical range map.

The decision tree, in order of precedence:

1. interior points, isolated extreme points and points in the relative
   interior of a flat portion are ``strong``;
2. for a normal matrix, a non-isolated extreme point (by ``iso_tol`` or by
   declared metadata) is ``fails_weak``;
3. any other extreme boundary point is decided by the critical curves
   through it: one curve is ``strong``; several curves are ``weak_only``
   when the boundary is analytic there or the point ends a flat portion,
   and ``fails_weak`` when two curved arcs with different maximal branches
   meet there.  If the supporting eigenvalue is not isolated with finite
   multiplicity (``essential_like`` or a declared essential point on the
   supporting line) the verdict is ``undecidable`` unless metadata lists a
   unique preimage.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import geometry
from .curves import curves_through, track_branches
from .errors import DegenerateNumericalRange, OutsideRange
from .gallery import Metadata
from .linalg import as_matrix, normality_defect
from .support import (
    BoundaryModel,
    boundary_scan,
    extreme_points,
    support_gap,
    support_value,
)

STRONG, WEAK_ONLY, FAILS_WEAK, UNDECIDABLE = "strong", "weak_only", "fails_weak", "undecidable"

RULE_INTERIOR = "interior point: f_A is open at every preimage"
RULE_ISOLATED = "isolated extreme point: not a limit of extreme points"
RULE_FLAT_INTERIOR = "relative interior of a flat portion: not a limit of extreme points"
RULE_NORMAL_LIMIT = "normal operator at a non-isolated extreme point"
RULE_ESSENTIAL = "supporting eigenvalue not isolated with finite multiplicity"
RULE_ESSENTIAL_POINT = "declared essential point on the boundary of a non-normal operator"
RULE_UNIQUE = "declared unique preimage at an essential-like support angle"
RULE_ONE_CURVE = "exactly one critical curve through z"
RULE_ANALYTIC = "several critical curves, boundary analytic at z"
RULE_FLAT_END = "several critical curves, z ends a flat portion"
RULE_ARCS_MEET = "several critical curves, maximal branch switches at z"
RULE_NO_CURVE = "no tracked critical curve reaches z"
RULE_CROSSING = "branch identity lost near z (eigenvector overlap below threshold)"


@dataclass
class ClassifyOptions:
    iso_tol: float | None = None          # default 1e-6 (1 + ||A||_2)
    boundary_margin: float | None = None  # default 1e-7 (1 + ||A||_2)
    curve_tol: float | None = None        # default 1e-6 (1 + ||A||_2)
    metadata_tol: float | None = None     # default 1e-3 (1 + ||A||_2)
    normal_tol: float = 1e-10
    window: float = 0.1
    refine: int = 4
    arc_samples: int = 32


@dataclass
class ClassificationReport:
    z: complex
    location: str      # interior, boundary-arc, corner, flat-interior, flat-endpoint
    case: str          # I, II, III, not-applicable
    verdict: str
    rule: str
    evidence: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "z": [float(self.z.real), float(self.z.imag)],
            "location": self.location,
            "case": self.case,
            "verdict": self.verdict,
            "rule": self.rule,
            "evidence": _jsonable(self.evidence),
            "tolerances": _jsonable(self.tolerances),
        }


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


def _near(points, z, tol) -> bool:
    return any(abs(complex(p) - z) <= tol for p in points or [])


@dataclass
class _Tols:
    iso: float
    margin: float
    curve: float
    meta: float
    normal: float

    def as_dict(self):
        return asdict(self)


def _tols(model: BoundaryModel, opt: ClassifyOptions) -> _Tols:
    sc = model.scale
    return _Tols(
        iso=opt.iso_tol if opt.iso_tol is not None else 1e-6 * sc,
        margin=opt.boundary_margin if opt.boundary_margin is not None else 1e-7 * sc,
        curve=opt.curve_tol if opt.curve_tol is not None else 1e-6 * sc,
        meta=opt.metadata_tol if opt.metadata_tol is not None else 1e-3 * sc,
        normal=opt.normal_tol,
    )


def locate(model: BoundaryModel, z: complex, margin: float) -> tuple[str, float, float]:
    """Location label, support gap and a supporting angle for ``z``."""
    A = model.matrix
    if model.degenerate:
        raise DegenerateNumericalRange("W(A) has empty interior")
    gap, theta = support_gap(A, z, model=model)
    if gap < -margin:
        raise OutsideRange(f"z={z} lies outside W(A) (support gap {gap:.3e})")
    if gap > margin:
        return "interior", gap, theta
    tol = 1e3 * margin
    for c in model.corners:
        if abs(c.z - z) <= tol:
            return "corner", gap, theta
    for f in model.flats:
        if f.contains(z, tol):
            if abs(z - f.endpoints[0]) <= tol or abs(z - f.endpoints[1]) <= tol:
                return "flat-endpoint", gap, f.theta
            return "flat-interior", gap, f.theta
    return "boundary-arc", gap, theta


def _local_branches(A, theta0, model, opt, mult):
    # at least 32 steps per side keeps the window grid at 65 angles or more
    step = min((2 * np.pi / len(model.thetas)) / opt.refine, opt.window / 32)
    m = int(np.ceil(opt.window / step))
    # a branch through z has value mu(theta0) there; by the Lipschitz bound it
    # starts the window no lower than mu(theta0) - ||A||_2 * window
    mu0 = support_value(A, theta0, model.gap_tol).mu
    floor = mu0 - (model.scale - 1.0) * m * step - model.gap_tol
    br = track_branches(A, (theta0 - m * step, theta0 + m * step), grid_size=2 * m + 1,
                        top_k=mult + 1, gap_tol=model.gap_tol, floor=floor)
    return br, m


def _maximal_sides(branches, ids, center, gap_tol):
    """Id of the unique largest branch (among ``ids``) just left and just right of center."""
    by = {b.id: b for b in branches}
    out = []
    for sign in (-1, 1):
        found = None
        for j in range(1, center + 1):
            k = center + sign * j
            vals = [(by[i].lam[k], i) for i in ids if len(by[i].lam) > k >= 0]
            if len(vals) < 2:
                break
            vals.sort(reverse=True)
            if vals[0][0] - vals[1][0] > gap_tol:
                found = vals[0][1]
                break
        out.append(found)
    return out


def classify_point(A, z: complex, model: BoundaryModel | None = None, branches=None,
                   options: ClassifyOptions | None = None,
                   metadata: Metadata | None = None) -> ClassificationReport:
    A = as_matrix(A)
    z = complex(z)
    model = boundary_scan(A) if model is None else model
    opt = options or ClassifyOptions()
    meta = metadata or Metadata()
    t = _tols(model, opt)
    tol_dict = t.as_dict() | {"gap_tol": model.gap_tol, "flat_tol": model.flat_tol,
                              "window": opt.window, "refine": opt.refine}

    def report(location, case, verdict, rule, **ev):
        return ClassificationReport(z, location, case, verdict, rule, ev, tol_dict)

    location, gap, theta0 = locate(model, z, t.margin)
    if location == "interior":
        return report("interior", "not-applicable", STRONG, RULE_INTERIOR, support_gap=gap)

    defect = normality_defect(A)
    normal = defect <= t.normal
    declared_limit = _near(meta.declared_limit_extreme_points, z, t.meta)
    on_hull = float(np.min(np.abs(model.polygon - z))) <= 1e3 * t.margin
    ext = [e for e in extreme_points(model, t.iso) if abs(e.z - z) <= 1e3 * t.margin]
    isolated = bool(ext and ext[0].is_isolated) and not declared_limit
    base = dict(support_gap=gap, theta=theta0, normality_defect=defect,
                declared_limit=declared_limit, isolated=isolated)

    if not normal and _near(meta.essential_numerical_range, z, t.meta):
        return report(location, "not-applicable", UNDECIDABLE, RULE_ESSENTIAL_POINT, **base)
    if location == "flat-interior":
        return report(location, "not-applicable", STRONG, RULE_FLAT_INTERIOR, **base)
    if isolated:
        return report(location, "not-applicable", STRONG, RULE_ISOLATED, **base)
    if normal:
        if declared_limit or (ext and on_hull):
            return report(location, "not-applicable", FAILS_WEAK, RULE_NORMAL_LIMIT,
                          caveat="a finite section has only isolated extreme points; "
                                 "the limit is declared", **base)
        return report(location, "not-applicable", STRONG, RULE_ISOLATED, **base)

    # rule 3: extreme boundary point of a non-normal operator
    s = support_value(A, theta0, model.gap_tol)
    w_e_on_line = any(
        abs(float((np.exp(-1j * theta0) * complex(w)).real) - s.mu) <= t.meta
        for w in (meta.essential_numerical_range or []))
    case = "II" if location == "flat-endpoint" else "I"
    ev = base | dict(multiplicity=s.multiplicity, slopes=s.slopes.tolist(),
                     essential_like=s.essential_like, essential_point_on_line=w_e_on_line)
    unique = _near(meta.unique_preimage_points, z, t.meta)

    br, center = _local_branches(A, theta0, model, opt, s.multiplicity)
    ct = curves_through(br, z, t.curve, merge_equal=1e-9 * model.scale)
    ev |= dict(curve_count=ct.count, curve_branch_ids=ct.branch_ids,
               curve_thetas=ct.thetas)
    crossings = [b.crossing for b in br if b.crossing is not None
                 and b.is_maximal.size and b.is_maximal[-1]]
    ev["crossings"] = [(c.branch_id, c.theta, c.overlap) for c in crossings]

    if s.essential_like or w_e_on_line:
        if unique:
            return report(location, case, STRONG, RULE_UNIQUE, **ev)
        return report(location, case, UNDECIDABLE, RULE_ESSENTIAL, **ev)
    if crossings:
        return report(location, case, UNDECIDABLE, RULE_CROSSING, **ev)
    if ct.count == 0:
        return report(location, case, UNDECIDABLE, RULE_NO_CURVE, **ev)
    if ct.count == 1:
        return report(location, case, STRONG, RULE_ONE_CURVE, **ev)
    if location == "flat-endpoint":
        return report(location, "II", WEAK_ONLY, RULE_FLAT_END, **ev)
    left, right = _maximal_sides(br, sorted(set(ct.branch_ids)), center, model.gap_tol)
    ev |= dict(maximal_left=left, maximal_right=right)
    if left is not None and right is not None and left != right:
        return report(location, "III", FAILS_WEAK, RULE_ARCS_MEET, **ev)
    return report(location, "I", WEAK_ONLY, RULE_ANALYTIC, **ev)


def junction_candidates(model: BoundaryModel, overlap_min: float = 0.5) -> list[complex]:
    """Boundary points where the maximal eigenvector jumps without a flat portion.

    These are the candidates for two arcs meeting: the top eigenvalue is
    degenerate with equal slopes, or consecutive top eigenvectors are
    nearly orthogonal (the switch lies between grid angles and is located
    by bisection on the overlap with the left vector).
    """
    A = model.matrix
    out: list[complex] = []
    S = model.samples
    n = len(S)
    for k in range(n):
        s, nxt = S[k], S[(k + 1) % n]
        flat = s.multiplicity > 1 and s.slopes[-1] - s.slopes[0] > model.flat_tol
        if s.multiplicity > 1 and not flat:
            out.append(s.low_point)
            continue
        if s.multiplicity > 1 or nxt.multiplicity > 1:
            continue
        ov = abs(np.vdot(s.eigenbasis[:, 0], nxt.eigenbasis[:, 0]))
        if ov >= overlap_min:
            continue
        if abs(nxt.low_point - s.low_point) > 1e3 * model.flat_tol:
            continue  # a jump in the support point is a flat, handled elsewhere
        lo, hi = s.theta, s.theta + (model.thetas[1] - model.thetas[0])
        v_lo = s.eigenbasis[:, 0]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            v = support_value(A, mid, model.gap_tol).eigenbasis[:, 0]
            if abs(np.vdot(v_lo, v)) >= overlap_min:
                lo = mid
            else:
                hi = mid
        out.append(support_value(A, 0.5 * (lo + hi), model.gap_tol).low_point)
    return out


@dataclass
class BoundaryClassification:
    reports: list[ClassificationReport]
    non_strong: list[ClassificationReport]
    finite_asserted: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "reports": [r.to_dict() for r in self.reports],
            "non_strong_count": len(self.non_strong),
            "non_strong": [r.to_dict() for r in self.non_strong],
            "finite_asserted": self.finite_asserted,
            "notes": self.notes,
        }


def classify_boundary(A, model: BoundaryModel | None = None, branches=None,
                      options: ClassifyOptions | None = None,
                      metadata: Metadata | None = None) -> BoundaryClassification:
    """Classify corners, flat endpoints, two points inside each flat, junction
    candidates and sampled arc points."""
    A = as_matrix(A)
    model = boundary_scan(A) if model is None else model
    opt = options or ClassifyOptions()
    meta = metadata or Metadata()
    pts: list[complex] = [c.z for c in model.corners]
    for f in model.flats:
        pts.extend(f.endpoints)
        a, b = f.endpoints
        pts.extend([0.75 * a + 0.25 * b, 0.25 * a + 0.75 * b])
    pts.extend(junction_candidates(model))
    arc_pts = [p.z for p in model.points if p.kind == "arc"]
    if arc_pts and opt.arc_samples > 0:
        idx = np.unique(np.linspace(0, len(arc_pts) - 1, opt.arc_samples).round().astype(int))
        pts.extend(arc_pts[i] for i in idx)
    dedup: list[complex] = []
    tol = 1e-6 * model.scale
    for p in pts:
        if not any(abs(p - q) <= tol for q in dedup):
            dedup.append(complex(p))

    reports, notes = [], []
    for p in dedup:
        try:
            reports.append(classify_point(A, p, model, branches, opt, meta))
        except OutsideRange as exc:
            notes.append(f"skipped {p}: {exc}")
    non_strong = [r for r in reports if r.verdict != STRONG]
    essential = any(r.evidence.get("essential_like") for r in reports)
    finite = not essential and not meta.essential_numerical_range
    if finite:
        notes.append(f"{len(non_strong)} boundary points without strong continuity "
                     "(finitely many when the supporting eigenvalues are isolated)")
    return BoundaryClassification(reports, non_strong, finite, notes)
