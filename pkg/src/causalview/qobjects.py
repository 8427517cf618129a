"""Validated quantum objects: states, POVMs and channels in Kraus form.

All objects are immutable once constructed. Validation uses a single
tolerance (``DEFAULT_TOL`` unless overridden) for Hermiticity, positivity,
unit trace and completeness.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .matcore import (
    DEFAULT_TOL,
    BipartiteShape,
    DomainError,
    RankDeficientError,
    ShapeError,
    as_matrix,
    eig_hermitian,
    frob_dist,
    frozen,
    hermiticity_gap,
    partial_trace,
    sqrtm_psd,
)

#: Minimum eigenvalue a state needs to count as full rank.
FULL_RANK_THRESHOLD = 1e-8


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    mat: np.ndarray
    tol: InitVar[float] = DEFAULT_TOL
    dim: int = field(init=False)
    min_eigenvalue: float = field(init=False)

    def __post_init__(self, tol):
        m = as_matrix(self.mat, "density matrix")
        if m.shape[0] != m.shape[1]:
            raise ShapeError(f"density matrix must be square, got {m.shape}")
        gap = hermiticity_gap(m)
        if gap > tol:
            raise DomainError(f"density matrix is not Hermitian (gap {gap:.3e})")
        lam = float(eig_hermitian(m, tol)[0][-1])
        if lam < -tol:
            raise DomainError(f"density matrix is not PSD (minimum eigenvalue {lam:.3e})")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > tol:
            raise DomainError(f"density matrix trace is {tr.real:.12g}, expected 1")
        object.__setattr__(self, "mat", frozen(m))
        object.__setattr__(self, "dim", m.shape[0])
        object.__setattr__(self, "min_eigenvalue", lam)

    def full_rank(self, threshold: float = FULL_RANK_THRESHOLD) -> bool:
        return self.min_eigenvalue >= threshold

    def require_full_rank(self, threshold: float = FULL_RANK_THRESHOLD, what: str = "state"):
        if not self.full_rank(threshold):
            raise RankDeficientError(
                f"{what} must be full rank: minimum eigenvalue {self.min_eigenvalue:.3e} "
                f"is below {threshold:g}; the square root of the state has to be invertible"
            )


@dataclass(frozen=True)
class Povm:
    """Labeled list of PSD effects summing to the identity."""

    effects: tuple
    labels: Optional[tuple] = None
    tol: InitVar[float] = DEFAULT_TOL
    dim: int = field(init=False)

    def __post_init__(self, tol):
        if len(self.effects) == 0:
            raise DomainError("POVM needs at least one effect")
        mats = [as_matrix(e, f"effect {k}") for k, e in enumerate(self.effects)]
        dim = mats[0].shape[0]
        for k, e in enumerate(mats):
            if e.shape != (dim, dim):
                raise ShapeError(f"effect {k} has shape {e.shape}, expected ({dim}, {dim})")
            if hermiticity_gap(e) > tol:
                raise DomainError(f"effect {k} is not Hermitian")
            lam = eig_hermitian(e, tol)[0][-1]
            if lam < -tol:
                raise DomainError(f"effect {k} is not PSD (minimum eigenvalue {lam:.3e})")
        dev = frob_dist(sum(mats), np.eye(dim))
        if dev > tol:
            raise DomainError(f"effects do not sum to the identity (deviation {dev:.3e})")
        labels = self.labels
        if labels is None:
            labels = tuple(str(k) for k in range(len(mats)))
        labels = tuple(str(lbl) for lbl in labels)
        if len(labels) != len(mats):
            raise ShapeError(f"{len(labels)} labels for {len(mats)} effects")
        if len(set(labels)) != len(labels):
            raise DomainError(f"outcome labels must be unique, got {labels}")
        object.__setattr__(self, "effects", tuple(frozen(e) for e in mats))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dim", dim)

    def __len__(self) -> int:
        return len(self.effects)

    def transpose(self) -> "Povm":
        """POVM with every effect transposed; labels are kept."""
        return Povm(tuple(e.T for e in self.effects), self.labels)

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        return np.array([np.trace(e @ rho).real for e in self.effects])

    @classmethod
    def trivial(cls, dim: int, label: str = "1") -> "Povm":
        return cls((np.eye(dim),), (label,))

    @classmethod
    def computational(cls, dim: int, labels: Optional[Sequence[str]] = None) -> "Povm":
        effects = tuple(np.diag(np.eye(dim)[k]) for k in range(dim))
        return cls(effects, tuple(labels) if labels is not None else None)

    @classmethod
    def from_basis(cls, vectors, labels: Optional[Sequence[str]] = None) -> "Povm":
        """Rank-one projective measurement onto the given orthonormal vectors."""
        effects = tuple(np.outer(v, np.conj(v)) for v in np.asarray(vectors, dtype=complex))
        return cls(effects, tuple(labels) if labels is not None else None)


@dataclass(frozen=True)
class KrausChannel:
    """CPTP map ``rho -> sum_m K_m rho K_m^dag`` from ``d_in`` to ``d_out``."""

    kraus_ops: tuple
    tol: InitVar[float] = DEFAULT_TOL
    d_in: int = field(init=False)
    d_out: int = field(init=False)

    def __post_init__(self, tol):
        if len(self.kraus_ops) == 0:
            raise DomainError("channel needs at least one Kraus operator")
        ops = [as_matrix(k, f"Kraus operator {m}") for m, k in enumerate(self.kraus_ops)]
        d_out, d_in = ops[0].shape
        for m, k in enumerate(ops):
            if k.shape != (d_out, d_in):
                raise ShapeError(
                    f"Kraus operator {m} has shape {k.shape}, expected ({d_out}, {d_in})"
                )
        dev = frob_dist(sum(k.conj().T @ k for k in ops), np.eye(d_in))
        if dev > tol:
            raise DomainError(
                f"Kraus operators are not trace preserving (|sum K^dag K - I|_F = {dev:.3e})"
            )
        object.__setattr__(self, "kraus_ops", tuple(frozen(k) for k in ops))
        object.__setattr__(self, "d_in", d_in)
        object.__setattr__(self, "d_out", d_out)

    def apply(self, m) -> np.ndarray:
        """Apply the map to an arbitrary ``d_in x d_in`` operator."""
        m = as_matrix(m)
        if m.shape != (self.d_in, self.d_in):
            raise ShapeError(f"channel expects {self.d_in}x{self.d_in} input, got {m.shape}")
        return sum(k @ m @ k.conj().T for k in self.kraus_ops)

    @classmethod
    def identity(cls, dim: int) -> "KrausChannel":
        return cls((np.eye(dim),))

    @classmethod
    def unitary(cls, u) -> "KrausChannel":
        return cls((u,))

    @classmethod
    def depolarizing(cls, d_in: int, d_out: Optional[int] = None) -> "KrausChannel":
        """Completely depolarizing channel ``rho -> Tr(rho) I/d_out``."""
        d_out = d_in if d_out is None else d_out
        scale = 1.0 / np.sqrt(d_out)
        ops = []
        for e in range(d_out):
            for f in range(d_in):
                k = np.zeros((d_out, d_in), dtype=complex)
                k[e, f] = scale
                ops.append(k)
        return cls(tuple(ops))


@dataclass(frozen=True)
class WeightedEnsemble:
    """Convex decomposition ``rho = sum_i w_i rho_i``.

    Members whose weight vanishes are kept with ``state`` set to ``None`` so
    that indices stay aligned with the POVM that produced the ensemble.
    """

    weights: tuple
    states: tuple
    labels: tuple

    def mixture(self) -> np.ndarray:
        dim = next(s.dim for s in self.states if s is not None)
        out = np.zeros((dim, dim), dtype=complex)
        for w, s in zip(self.weights, self.states):
            if s is not None:
                out += w * s.mat
        return out


def ensemble_decompose(
    rho: DensityMatrix, povm: Povm, threshold: float = FULL_RANK_THRESHOLD
) -> WeightedEnsemble:
    """Split ``rho`` into the preparations singled out by ``povm``.

    Member ``i`` has weight ``Tr[a_i rho]`` and state
    ``sqrt(rho) a_i sqrt(rho) / Tr[a_i rho]``.
    """
    if rho.dim != povm.dim:
        raise ShapeError(f"state has dimension {rho.dim}, POVM has dimension {povm.dim}")
    rho.require_full_rank(threshold, "the preparation ensemble")
    root = sqrtm_psd(rho.mat)
    weights, states = [], []
    for a in povm.effects:
        member = root @ a @ root
        w = float(np.trace(member).real)
        if w <= 0.0:
            weights.append(0.0)
            states.append(None)
            continue
        member = member / w
        weights.append(w)
        states.append(DensityMatrix(0.5 * (member + member.conj().T)))
    return WeightedEnsemble(tuple(weights), tuple(states), povm.labels)


def apply_channel(ch: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    if rho.dim != ch.d_in:
        raise ShapeError(f"channel input dimension {ch.d_in} does not match state {rho.dim}")
    out = ch.apply(rho.mat)
    return DensityMatrix(0.5 * (out + out.conj().T))


def choi(ch: KrausChannel) -> np.ndarray:
    """Unnormalized Choi matrix ``(id (x) T)(|Omega><Omega|)``, trace ``d_in``.

    The input copy is the slow factor, the channel output the fast one.
    """
    omega = np.eye(ch.d_in).reshape(-1)  # sum_j |j>|j>
    out = np.zeros((ch.d_in * ch.d_out,) * 2, dtype=complex)
    for k in ch.kraus_ops:
        v = np.kron(np.eye(ch.d_in), k) @ omega
        out += np.outer(v, v.conj())
    return out


def kraus_from_choi(c, d_in: int, d_out: int, tol: float = DEFAULT_TOL) -> KrausChannel:
    """Kraus operators read off the spectral decomposition of a Choi matrix.

    Each eigenpair with eigenvalue above ``tol`` contributes
    ``sqrt(lambda) * v`` reshaped to a ``d_out x d_in`` operator.
    """
    c = as_matrix(c, "Choi matrix")
    if c.shape != (d_in * d_out, d_in * d_out):
        raise ShapeError(f"Choi matrix must be {d_in * d_out} square, got {c.shape}")
    vals, vecs = eig_hermitian(c, tol)
    if vals[-1] < -tol:
        raise DomainError(f"Choi matrix is not PSD (minimum eigenvalue {vals[-1]:.3e})")
    marginal = partial_trace(c, BipartiteShape(d_in, d_out), over="B")
    dev = frob_dist(marginal, np.eye(d_in))
    if dev > tol:
        raise DomainError(
            f"Choi matrix is not trace preserving (|Tr_out C - I|_F = {dev:.3e})"
        )
    ops = [
        # v[f*d_out + e] = K[e, f]
        np.sqrt(lam) * vecs[:, k].reshape(d_in, d_out).T
        for k, lam in enumerate(vals)
        if lam > tol
    ]
    return KrausChannel(tuple(ops), tol)
