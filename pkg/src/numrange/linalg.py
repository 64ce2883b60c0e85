"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays and unit vectors are 1-d complex
arrays.  The helpers here validate inputs, form the Cartesian parts
``Re(e^{-i theta} A)`` / ``Im(e^{-i theta} A)``, wrap the Hermitian
eigensolver with a residual contract, and sample the unit sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BasisNotOrthonormal,
    DimensionMismatch,
    InvalidInput,
    NoConvergence,
)

UNIT_TOL = 1e-12


def as_matrix(A) -> np.ndarray:
    """Validate ``A`` as a finite square complex matrix and return a copy."""
    M = np.array(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise InvalidInput(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInput("matrix has non-finite entries")
    return M


def as_unit_vector(x, tol: float = UNIT_TOL, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=complex).ravel()
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise InvalidInput("vector must be non-empty and finite")
    if dim is not None and v.size != dim:
        raise DimensionMismatch(f"vector of length {v.size}, expected {dim}")
    n = np.linalg.norm(v)
    if abs(n - 1.0) > tol:
        raise InvalidInput(f"vector is not unit norm (norm={n!r})")
    return v


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise InvalidInput("cannot normalize the zero vector")
    return v / n


def spectral_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, 2))


def scale(A: np.ndarray) -> float:
    """Scale factor ``1 + ||A||_2`` used by absolute tolerances."""
    return 1.0 + spectral_norm(A)


def normality_defect(A: np.ndarray) -> float:
    """``||AA* - A*A||_F / ||A||_F^2`` (0 for the zero matrix)."""
    fro2 = np.linalg.norm(A, "fro") ** 2
    if fro2 == 0:
        return 0.0
    Ah = A.conj().T
    return float(np.linalg.norm(A @ Ah - Ah @ A, "fro") / fro2)


def cartesian_part(A, theta: float, which: str = "real") -> np.ndarray:
    """Hermitian part of ``e^{-i theta} A``.

    ``which="real"`` gives ``(e^{-i theta}A + e^{i theta}A*)/2`` and
    ``which="imaginary"`` gives ``(e^{-i theta}A - e^{i theta}A*)/(2i)``.
    """
    A = as_matrix(A)
    B = np.exp(-1j * theta) * A
    Bh = B.conj().T
    if which == "real":
        H = 0.5 * (B + Bh)
    elif which == "imaginary":
        H = (B - Bh) / 2j
    else:
        raise InvalidInput(f"which must be 'real' or 'imaginary', not {which!r}")
    # exact Hermitian symmetry; the rounding differences are below 1 ulp of |A|
    return 0.5 * (H + H.conj().T)


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray   # ascending
    eigenvectors: np.ndarray  # columns, orthonormal, phase-fixed
    residual: float
    symmetry_defect: float = 0.0


def fix_phase(V: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive.

    Ties (within a relative 1e-12) go to the lowest index.
    """
    V = np.array(V, dtype=complex, copy=True)
    if V.ndim == 1:
        return fix_phase(V[:, None])[:, 0]
    mags = np.abs(V)
    for j in range(V.shape[1]):
        col = mags[:, j]
        k = int(np.flatnonzero(col >= col.max() * (1 - 1e-12))[0])
        if col[k] > 0:
            V[:, j] *= np.conj(V[k, j]) / col[k]
    return V


def hermitian_eig(H, *, tol_factor: float = 1e-9) -> SpectralDecomposition:
    """Full eigendecomposition of a Hermitian matrix with residual check."""
    H = as_matrix(H)
    fro = float(np.linalg.norm(H, "fro"))
    defect = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    H = 0.5 * (H + H.conj().T)
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(f"eigh failed: {exc}", residual=float("inf")) from exc
    V = fix_phase(V)
    res = float(np.max(np.linalg.norm(H @ V - V * w, axis=0)))
    if res > tol_factor * (1.0 + fro):
        raise NoConvergence(f"eigen-residual {res:.3e} above contract", residual=res)
    return SpectralDecomposition(w, V, res, defect)


def evaluate_range_map(A, x) -> complex:
    """``<Ax, x>`` (linear in the first slot), i.e. ``x^* A x``."""
    A = np.asarray(A, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] != A.shape[0]:
        raise DimensionMismatch(f"vector of length {x.shape[-1]} for {A.shape} matrix")
    return complex(np.vdot(x, A @ x))


def range_map_many(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Vectorised ``f_A`` over the rows of ``X`` (shape (count, n))."""
    X = np.asarray(X, dtype=complex)
    return np.einsum("ki,ij,kj->k", X.conj(), A, X)


def compress(A, basis) -> np.ndarray:
    """Compression ``[<A b_j, b_i>]`` onto an orthonormal set of vectors."""
    A = as_matrix(A)
    B = np.column_stack([np.asarray(b, dtype=complex) for b in basis])
    if B.shape[0] != A.shape[0]:
        raise DimensionMismatch("basis vectors do not match matrix dimension")
    gram = B.conj().T @ B
    dev = float(np.max(np.abs(gram - np.eye(B.shape[1]))))
    if dev > 1e-8:
        raise BasisNotOrthonormal(f"Gram deviation {dev:.3e}")
    return B.conj().T @ A @ B


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.uint64(seed % 2**64))


def sample_sphere(dim: int, seed: int, count: int) -> np.ndarray:
    """``count`` i.i.d. uniform points on the complex unit sphere, as rows."""
    if dim < 1 or count < 1:
        raise InvalidInput("dim and count must be positive")
    rng = _rng(seed)
    G = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return G / np.linalg.norm(G, axis=1, keepdims=True)


def sample_cap(x, eps: float, seed: int, count: int,
               sparse_fraction: float = 0.0) -> np.ndarray:
    """Points of ``{y : ||y|| = 1, ||y - x|| < eps}``, as rows.

    Each candidate is ``normalize(x + s u)`` with ``u`` a random unit direction
    and ``s`` uniform on ``(0, 2 eps)``; candidates outside the cap are
    rejected.  A ``sparse_fraction`` of the directions is supported on one or
    two standard coordinates, which resolves coordinate-aligned structure
    (block-diagonal operators) that dense Gaussian directions reach only
    rarely.
    """
    x = as_unit_vector(x, tol=1e-10)
    if not 0 < eps <= 2:
        raise InvalidInput("eps must lie in (0, 2]")
    n = x.size
    if eps >= 2:
        Y = sample_sphere(n, seed, count)
        # the antipode -x is the single excluded point; it has measure zero
        return Y
    rng = _rng(seed)
    out: list[np.ndarray] = []
    have = 0
    while have < count:
        m = max(64, 2 * (count - have))
        U = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        if sparse_fraction > 0:
            sparse = rng.random(m) < sparse_fraction
            k = int(sparse.sum())
            if k:
                mask = np.zeros((k, n), dtype=bool)
                rows = np.arange(k)
                mask[rows, rng.integers(0, n, k)] = True
                two = rng.random(k) < 0.5
                mask[rows[two], rng.integers(0, n, int(two.sum()))] = True
                U[sparse] = np.where(mask, U[sparse], 0)
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        s = rng.uniform(0.0, 2.0 * eps, m)
        Y = x[None, :] + s[:, None] * U
        norms = np.linalg.norm(Y, axis=1)
        ok = norms > 1e-12
        Y = Y[ok] / norms[ok, None]
        Y = Y[np.linalg.norm(Y - x[None, :], axis=1) < eps]
        out.append(Y)
        have += len(Y)
    return np.concatenate(out)[:count]
