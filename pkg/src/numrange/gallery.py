"""Example operators with closed-form metadata used as test oracles.

Each constructor returns a :class:`GalleryOperator` holding the matrix and a
metadata record.  Metadata carries what a finite section cannot show by
itself: the essential numerical range of the underlying operator, extreme
points that are limits of other extreme points, and exact eigenvalue
formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInput


@dataclass
class Metadata:
    essential_numerical_range: list[complex] | None = None
    declared_limit_extreme_points: list[complex] = field(default_factory=list)
    # points where the underlying operator is known to have a unique
    # preimage (up to phase), resolving essential-like support angles
    unique_preimage_points: list[complex] = field(default_factory=list)
    expected_fails_weak: list[complex] = field(default_factory=list)
    exact_support_oracle: Callable[[float], float] | None = None
    exact_branch_oracle: Callable[[int, float], float] | None = None
    notes: str = ""

    def to_dict(self) -> dict:
        def pts(v):
            return None if v is None else [[float(np.real(z)), float(np.imag(z))] for z in v]

        return {
            "essential_numerical_range": pts(self.essential_numerical_range),
            "declared_limit_extreme_points": pts(self.declared_limit_extreme_points),
            "unique_preimage_points": pts(self.unique_preimage_points),
            "expected_fails_weak": pts(self.expected_fails_weak),
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Metadata":
        def pts(v):
            return None if v is None else [complex(a, b) for a, b in v]

        return cls(
            essential_numerical_range=pts(d.get("essential_numerical_range")),
            declared_limit_extreme_points=pts(d.get("declared_limit_extreme_points")) or [],
            unique_preimage_points=pts(d.get("unique_preimage_points")) or [],
            expected_fails_weak=pts(d.get("expected_fails_weak")) or [],
            notes=d.get("notes", ""),
        )


@dataclass
class GalleryOperator:
    name: str
    matrix: np.ndarray
    metadata: Metadata
    params: dict = field(default_factory=dict)


def volterra_lambda(n: int, theta: float) -> float:
    """Eigenvalue ``sin(theta) / (2 theta + 2 n pi)`` of ``Re(e^{-i theta} V)``."""
    return float(np.sin(theta) / (2 * theta + 2 * n * np.pi))


def volterra_boundary(t):
    """Boundary curve ``(1 - cos t)/t^2 + i (t - sin t)/t^2`` of W(V), upper half."""
    t = np.asarray(t, dtype=float)
    return (1 - np.cos(t)) / t**2 + 1j * (t - np.sin(t)) / t**2


def volterra_entry(m: int, n: int) -> complex:
    """``<V e_n, e_m>`` for ``e_n(t) = exp(2 pi i n t)`` on L^2(0, 1)."""
    if m == 0 and n == 0:
        return 0.5
    if n == 0:
        return 1j / (2 * np.pi * m)
    if m == 0:
        return 1j / (2 * np.pi * n)
    if m == n:
        return -1j / (2 * np.pi * n)
    return 0.0


def volterra_section(N: int) -> GalleryOperator:
    """Volterra operator compressed to Fourier modes ``n = -N..N``.

    Row/column ``k`` holds mode ``n = k - N``.  The real part is exactly
    ``1/2 e_0 e_0^*``.
    """
    if N < 4:
        raise InvalidInput("volterra_section needs N >= 4")
    modes = np.arange(-N, N + 1)
    M = np.array([[volterra_entry(m, n) for n in modes] for m in modes], dtype=complex)

    def support(theta: float) -> float:
        # largest eigenvalue over n of sin(theta)/(2 theta + 2 n pi)
        t = float(theta) % (2 * np.pi)
        if np.isclose(np.sin(t), 0.0):
            return 0.5 if np.isclose(np.cos(t), 1.0) else 0.0
        ns = np.arange(-3, 4)
        return float(max(volterra_lambda(n, t) for n in ns))

    meta = Metadata(
        essential_numerical_range=[0j],
        unique_preimage_points=[1j / (2 * np.pi), -1j / (2 * np.pi)],
        exact_support_oracle=support,
        exact_branch_oracle=volterra_lambda,
        notes=("Fourier section of the Volterra operator; W_e(V) = {0}; flat "
               "portion on the imaginary axis with endpoints +-i/(2 pi), each "
               "with a unique preimage exp(-+2 pi i t)"),
    )
    return GalleryOperator(f"volterra_section(N={N})", M, meta, {"N": N})


def weighted_shift(weights, cyclic: bool = False) -> GalleryOperator:
    """``(Ax)_{k+1} = w_k x_k``; non-cyclic shifts have dimension ``len(w) + 1``."""
    w = np.asarray(weights, dtype=complex).ravel()
    if w.size < 1:
        raise InvalidInput("weighted_shift needs at least one weight")
    n = w.size if cyclic else w.size + 1
    A = np.zeros((n, n), dtype=complex)
    for k, a in enumerate(w):
        A[(k + 1) % n, k] = a
    meta = Metadata(notes="weighted shift: W(A) is invariant under rotations"
                    if not cyclic else
                    "cyclic weighted shift: W(A) is invariant under rotation by 2 pi / n")
    return GalleryOperator("weighted_shift", A, meta,
                           {"weights": w.tolist(), "cyclic": cyclic})


def normal_diag(values, declared_limits=()) -> GalleryOperator:
    v = np.asarray(values, dtype=complex).ravel()
    meta = Metadata(declared_limit_extreme_points=[complex(z) for z in declared_limits],
                    notes="diagonal normal operator")
    return GalleryOperator("normal_diag", np.diag(v), meta, {"size": int(v.size)})


def compact_normal_example(K: int = 20) -> GalleryOperator:
    """Truncation of ``A e_k = 1/k + i/k^2`` (``A e_0 = 0``), ``|k| <= K``."""
    ks = [k for k in range(-K, K + 1) if k != 0]
    vals = [0j] + [1 / k + 1j / k**2 for k in ks]
    op = normal_diag(vals, declared_limits=[0j])
    op.name = f"compact_normal(K={K})"
    op.metadata.essential_numerical_range = [0j]
    op.metadata.expected_fails_weak = [0j]
    op.metadata.notes = "0 is a limit of the extreme points 1/k + i/k^2"
    return op


def root_of_unity_example(count: int = 40, angle: float = 1.0) -> GalleryOperator:
    """Truncation of ``(Tx)_k = tau^k x_k`` with ``tau = exp(i angle)``."""
    tau = np.exp(1j * angle)
    vals = tau ** np.arange(1, count + 1)
    op = normal_diag(vals, declared_limits=list(vals))
    op.name = f"irrational_rotation(count={count})"
    op.metadata.expected_fails_weak = list(vals)
    op.metadata.notes = ("tau = exp(i) is not a root of unity; every tau^k is a "
                         "limit of the others in the full operator")
    return op


def two_ellipse_block(b: float = 1.0, k: float = 1.0) -> GalleryOperator:
    """Block-diagonal 4x4 matrix whose numerical range is the hull of two ellipses.

    Blocks ``[[0, ik], [ik, b + ib]]`` and ``[[0, ik], [ik, b - ib]]``.  Both
    ellipses touch the imaginary axis at 0 and their boundaries cross there
    with the same tangent and curvature, so 0 is a corner-free point where
    two curved arcs meet.
    """
    if b <= 0 or k <= 0:
        raise InvalidInput("b and k must be positive")
    A = np.zeros((4, 4), dtype=complex)
    A[:2, :2] = [[0, 1j * k], [1j * k, b + 1j * b]]
    A[2:, 2:] = [[0, 1j * k], [1j * k, b - 1j * b]]
    meta = Metadata(expected_fails_weak=[0j],
                    notes="hull of two ellipses meeting at 0 (two curved arcs)")
    return GalleryOperator(f"two_ellipse_block(b={b}, k={k})", A, meta, {"b": b, "k": k})


def direct_sum_scaled(terms: int, b: float = 0.1, k: float = 0.1) -> GalleryOperator:
    """``-I + sum_j (I_4 - A/j) e^{i pi / j}`` for ``j = 1..terms``."""
    if terms < 1:
        raise InvalidInput("terms must be positive")
    A = two_ellipse_block(b, k).matrix
    I4 = np.eye(4)
    n = 4 * terms
    T = -np.eye(n, dtype=complex)
    for j in range(1, terms + 1):
        s = slice(4 * (j - 1), 4 * j)
        T[s, s] += (I4 - A / j) * np.exp(1j * np.pi / j)
    expected = [np.exp(1j * np.pi / j) - 1 for j in range(1, terms + 1)]
    meta = Metadata(essential_numerical_range=[0j], expected_fails_weak=expected,
                    notes="compact direct sum; blocks meet the circle |z + 1| = 1 "
                          "at e^{i pi/j} - 1")
    return GalleryOperator(f"direct_sum_scaled(terms={terms})", T, meta,
                           {"terms": terms, "b": b, "k": k})


BUILDERS = {
    "volterra": volterra_section,
    "weighted_shift": weighted_shift,
    "normal_diag": normal_diag,
    "compact_normal": compact_normal_example,
    "irrational_rotation": root_of_unity_example,
    "two_ellipse_block": two_ellipse_block,
    "direct_sum_scaled": direct_sum_scaled,
}
