"""Dense complex linear-algebra kernels.

Every operator in the package is a plain 2-D ``numpy`` array of complex
numbers. Bipartite operators use a single tensor ordering throughout: the A
factor is the slow (left) index and the B factor the fast (right) index, so
``kron(a, b)`` acts on ``H_A (x) H_B``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

#: Tolerance for structural predicates (Hermiticity, PSD, completeness, trace).
DEFAULT_TOL = 1e-9

Subsystem = Literal["A", "B"]


class ShapeError(ValueError):
    """Raised when matrix dimensions are inconsistent with an operation."""


class DomainError(ValueError):
    """Raised when a matrix violates a mathematical precondition."""


class RankDeficientError(DomainError):
    """Raised when an operator that must be full rank is not."""


@dataclass(frozen=True)
class BipartiteShape:
    """Dimensions of the composite space ``H_A (x) H_B``."""

    dim_a: int
    dim_b: int

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise ShapeError(f"subsystem dimensions must be positive, got {self}")

    @property
    def total(self) -> int:
        return self.dim_a * self.dim_b


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or infinite entries")
    return arr


def frozen(m: np.ndarray) -> np.ndarray:
    """Return a read-only copy of ``m``."""
    out = np.array(m, dtype=complex, copy=True)
    out.flags.writeable = False
    return out


def _check_square(m: np.ndarray, dim: int, name: str = "matrix") -> None:
    if m.shape != (dim, dim):
        raise ShapeError(f"{name} must be {dim}x{dim}, got {m.shape[0]}x{m.shape[1]}")


def kron(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the slow factor."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def partial_trace(m, shape: BipartiteShape, over: Subsystem) -> np.ndarray:
    """Trace out subsystem ``over`` of an operator on ``H_A (x) H_B``."""
    m = as_matrix(m)
    _check_square(m, shape.total)
    t = m.reshape(shape.dim_a, shape.dim_b, shape.dim_a, shape.dim_b)
    if over == "B":
        return np.einsum("ijkj->ik", t)
    if over == "A":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"subsystem must be 'A' or 'B', got {over!r}")


def partial_transpose(m, shape: BipartiteShape, on: Subsystem) -> np.ndarray:
    """Transpose the ``on`` tensor factor of an operator on ``H_A (x) H_B``."""
    m = as_matrix(m)
    _check_square(m, shape.total)
    t = m.reshape(shape.dim_a, shape.dim_b, shape.dim_a, shape.dim_b)
    if on == "A":
        t = t.transpose(2, 1, 0, 3)
    elif on == "B":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {on!r}")
    return t.reshape(shape.total, shape.total)


def hermiticity_gap(m) -> float:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"matrix must be square, got {m.shape}")
    return float(np.linalg.norm(m - m.conj().T))


def is_hermitian(m, tol: float = DEFAULT_TOL) -> bool:
    return hermiticity_gap(m) <= tol


def eig_hermitian(m, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, V)`` with eigenvalues real and sorted descending
    and the eigenvectors as the columns of ``V``, so that
    ``m == V @ diag(eigenvalues) @ V.conj().T``. Within a degenerate
    eigenspace the basis is arbitrary.
    """
    m = as_matrix(m)
    gap = hermiticity_gap(m)
    if gap > tol:
        raise DomainError(f"matrix is not Hermitian (|m - m^dag|_F = {gap:.3e} > {tol:g})")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def min_eigenvalue(m, tol: float = DEFAULT_TOL) -> float:
    return float(eig_hermitian(m, tol)[0][-1])


def is_psd(m, tol: float = DEFAULT_TOL) -> bool:
    """True if ``m`` is Hermitian and its smallest eigenvalue is >= -tol."""
    if not is_hermitian(m, tol):
        return False
    return min_eigenvalue(m, tol) >= -tol


def _clamped_spectrum(m, tol: float) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = eig_hermitian(m, tol)
    if vals[-1] < -tol:
        raise DomainError(
            f"matrix is not positive semidefinite: eigenvalue {vals[-1]:.6e} < -{tol:g}"
        )
    return np.clip(vals, 0.0, None), vecs


def sqrtm_psd(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Unique PSD square root of a PSD matrix.

    Eigenvalues in ``[-tol, 0)`` are treated as rounding noise and clamped to
    zero; anything more negative raises :class:`DomainError`.
    """
    vals, vecs = _clamped_spectrum(m, tol)
    root = (vecs * np.sqrt(vals)) @ vecs.conj().T
    return 0.5 * (root + root.conj().T)


def inv_sqrtm_pd(m, threshold: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Inverse square root of a positive definite matrix.

    Raises :class:`RankDeficientError` if the smallest eigenvalue is below
    ``threshold``.
    """
    vals, vecs = _clamped_spectrum(m, tol)
    if vals[-1] < threshold:
        raise RankDeficientError(
            f"matrix is not full rank: minimum eigenvalue {vals[-1]:.3e} "
            f"below threshold {threshold:g}"
        )
    root = (vecs / np.sqrt(vals)) @ vecs.conj().T
    return 0.5 * (root + root.conj().T)


def project_psd(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Clamp rounding-level negative eigenvalues of ``m`` to zero."""
    vals, vecs = _clamped_spectrum(m, tol)
    out = (vecs * vals) @ vecs.conj().T
    return 0.5 * (out + out.conj().T)


def frob_dist(a, b) -> float:
    """Frobenius distance between two matrices of the same shape."""
    a, b = as_matrix(a, "a"), as_matrix(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))
