"""Two observer views of one bipartite experiment.

In the *causal* view the outcomes of device A are preparations: a full-rank
ensemble ``rho`` steered by the POVM ``{a_i}`` is carried by a channel to
device B, which measures ``{b_j}``. In the *spacelike* view A and B measure
``{a_i^T}`` and ``{b_j}`` on halves of a shared state ``tau``. The two views
are related by a partial transpose on A of the joint operator

    T_rho = [(id (x) T)(|Phi><Phi|)]^{T_A},   |Phi> = (sqrt(rho)^T (x) I) sum_j |j>|j>

and predict identical joint distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .matcore import (
    BipartiteShape,
    DomainError,
    ShapeError,
    inv_sqrtm_pd,
    kron,
    partial_trace,
    partial_transpose,
    sqrtm_psd,
)
from .qobjects import (
    FULL_RANK_THRESHOLD,
    DensityMatrix,
    KrausChannel,
    Povm,
    ensemble_decompose,
    kraus_from_choi,
)

#: Negative probabilities down to this value are treated as rounding noise.
NEGATIVE_PROB_TOL = 1e-12
#: Allowed deviation of a probability table's total from one.
NORMALIZATION_TOL = 1e-10


def _check_table(table: np.ndarray) -> None:
    low = table.min()
    if low < -NEGATIVE_PROB_TOL:
        raise DomainError(f"negative probability {low:.3e} in joint distribution")
    total = table.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise DomainError(f"joint distribution sums to {total:.15g}, expected 1")


@dataclass(frozen=True)
class JointDistribution:
    """Probability table ``p(a_i, b_j)`` with rows for A and columns for B."""

    row_labels: tuple
    col_labels: tuple
    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.shape != (len(self.row_labels), len(self.col_labels)):
            raise ShapeError(
                f"table shape {t.shape} does not match labels "
                f"({len(self.row_labels)}, {len(self.col_labels)})"
            )
        _check_table(t)
        t.flags.writeable = False
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))
        object.__setattr__(self, "table", t)

    @property
    def marginal_a(self) -> np.ndarray:
        return self.table.sum(axis=1)

    @property
    def marginal_b(self) -> np.ndarray:
        return self.table.sum(axis=0)

    def clamped(self) -> np.ndarray:
        """Table with rounding-level negatives replaced by zero, for reporting."""
        return np.clip(self.table, 0.0, None)

    def prob(self, a_label: str, b_label: str) -> float:
        return float(self.table[self.row_labels.index(a_label), self.col_labels.index(b_label)])

    def max_gap(self, other: "JointDistribution") -> float:
        if self.row_labels != other.row_labels or self.col_labels != other.col_labels:
            raise ShapeError("cannot compare distributions with different outcome labels")
        return float(np.max(np.abs(self.table - other.table)))


@dataclass(frozen=True)
class CausalScenario:
    """Preparation on A, channel A -> B, measurement on B."""

    rho: DensityMatrix
    channel: KrausChannel
    povm_a: Povm
    povm_b: Povm
    full_rank_threshold: float = FULL_RANK_THRESHOLD

    def __post_init__(self):
        if not (self.rho.dim == self.channel.d_in == self.povm_a.dim):
            raise ShapeError(
                f"dimension mismatch on A: rho {self.rho.dim}, channel input "
                f"{self.channel.d_in}, povm_a {self.povm_a.dim}"
            )
        if self.channel.d_out != self.povm_b.dim:
            raise ShapeError(
                f"dimension mismatch on B: channel output {self.channel.d_out}, "
                f"povm_b {self.povm_b.dim}"
            )
        self.rho.require_full_rank(self.full_rank_threshold, "rho")

    @property
    def shape(self) -> BipartiteShape:
        return BipartiteShape(self.rho.dim, self.channel.d_out)


@dataclass(frozen=True)
class SpacelikeScenario:
    """Shared state on A (x) B measured locally on both sides."""

    tau: DensityMatrix
    povm_a_prime: Povm
    povm_b_prime: Povm
    shape: BipartiteShape = field(default=None)

    def __post_init__(self):
        shape = self.shape
        if shape is None:
            shape = BipartiteShape(self.povm_a_prime.dim, self.povm_b_prime.dim)
            object.__setattr__(self, "shape", shape)
        if (shape.dim_a, shape.dim_b) != (self.povm_a_prime.dim, self.povm_b_prime.dim):
            raise ShapeError(
                f"POVM dimensions ({self.povm_a_prime.dim}, {self.povm_b_prime.dim}) "
                f"do not match shape ({shape.dim_a}, {shape.dim_b})"
            )
        if self.tau.dim != shape.total:
            raise ShapeError(f"tau has dimension {self.tau.dim}, expected {shape.total}")


def joint_operator(rho: DensityMatrix, channel: KrausChannel) -> np.ndarray:
    """``T_rho`` for an arbitrary full-rank input state and channel.

    The input system is the slow tensor factor, the channel output the fast
    one. Used for both the bipartite and the tripartite constructions.
    """
    if rho.dim != channel.d_in:
        raise ShapeError(f"state dimension {rho.dim} != channel input {channel.d_in}")
    rho.require_full_rank(what="rho")
    d_in, d_out = channel.d_in, channel.d_out
    root_t = sqrtm_psd(rho.mat).T
    phi = np.kron(root_t, np.eye(d_in)) @ np.eye(d_in).reshape(-1)
    tau = np.zeros((d_in * d_out,) * 2, dtype=complex)
    for k in channel.kraus_ops:
        v = np.kron(np.eye(d_in), k) @ phi
        tau += np.outer(v, v.conj())
    return partial_transpose(tau, BipartiteShape(d_in, d_out), on="A")


def t_rho(s: CausalScenario) -> np.ndarray:
    return joint_operator(s.rho, s.channel)


def joint_causal(s: CausalScenario) -> JointDistribution:
    """``p1(a_i, b_j) = Tr_B[b_j Tr_A[T_rho (a_i (x) I_B)]]``."""
    shape = s.shape
    op = t_rho(s)
    eye_b = np.eye(shape.dim_b)
    table = np.empty((len(s.povm_a), len(s.povm_b)))
    for i, a in enumerate(s.povm_a.effects):
        reduced = partial_trace(op @ kron(a, eye_b), shape, over="A")
        for j, b in enumerate(s.povm_b.effects):
            table[i, j] = np.trace(b @ reduced).real
    return JointDistribution(s.povm_a.labels, s.povm_b.labels, table)


def joint_causal_oracle(s: CausalScenario) -> JointDistribution:
    """Same table computed member by member from the steered ensemble.

    ``p(a_i, b_j) = w_i Tr[b_j T(rho_i)]`` where ``(w_i, rho_i)`` are the
    ensemble weights and states; ``T_rho`` is never formed.
    """
    ens = ensemble_decompose(s.rho, s.povm_a, s.full_rank_threshold)
    table = np.zeros((len(s.povm_a), len(s.povm_b)))
    for i, (w, member) in enumerate(zip(ens.weights, ens.states)):
        if member is None:
            continue
        out = s.channel.apply(member.mat)
        for j, b in enumerate(s.povm_b.effects):
            table[i, j] = w * np.trace(b @ out).real
    return JointDistribution(s.povm_a.labels, s.povm_b.labels, table)


def to_spacelike(s: CausalScenario) -> SpacelikeScenario:
    """Reinterpret a causal scenario as a shared state plus local measurements."""
    shape = s.shape
    tau = partial_transpose(t_rho(s), shape, on="A")
    tau = DensityMatrix(0.5 * (tau + tau.conj().T))
    return SpacelikeScenario(tau, s.povm_a.transpose(), s.povm_b, shape)


def joint_spacelike(s: SpacelikeScenario) -> JointDistribution:
    """``p2(a_i, b_j) = Tr[(a_i' (x) b_j') tau]``."""
    tau = s.tau.mat
    table = np.empty((len(s.povm_a_prime), len(s.povm_b_prime)))
    for i, a in enumerate(s.povm_a_prime.effects):
        for j, b in enumerate(s.povm_b_prime.effects):
            table[i, j] = np.trace(kron(a, b) @ tau).real
    return JointDistribution(s.povm_a_prime.labels, s.povm_b_prime.labels, table)


def channel_from_state(
    tau: np.ndarray, shape: BipartiteShape, threshold: float = FULL_RANK_THRESHOLD
) -> tuple[DensityMatrix, KrausChannel]:
    """Recover ``(rho, T)`` with ``tau = (id (x) T)(|Phi><Phi|)``.

    ``rho`` is the transpose of the A marginal, and the Choi matrix of ``T`` is
    ``(S^-1 (x) I) tau (S^-1 (x) I)`` with ``S = sqrt(rho)^T``. Raises
    :class:`RankDeficientError` if the A marginal is not invertible.
    """
    marginal = partial_trace(tau, shape, over="B")
    rho = DensityMatrix(marginal.T)
    rho.require_full_rank(threshold, "the A marginal of tau")
    s_inv = np.kron(inv_sqrtm_pd(marginal, threshold), np.eye(shape.dim_b))
    c = s_inv @ tau @ s_inv
    c = 0.5 * (c + c.conj().T)
    return rho, kraus_from_choi(c, shape.dim_a, shape.dim_b)


def from_spacelike(
    s: SpacelikeScenario, threshold: float = FULL_RANK_THRESHOLD
) -> CausalScenario:
    """Read a shared state as a preparation on A evolved into B."""
    rho, channel = channel_from_state(s.tau.mat, s.shape, threshold)
    return CausalScenario(rho, channel, s.povm_a_prime.transpose(), s.povm_b_prime, threshold)


@dataclass(frozen=True)
class EquivalenceReport:
    dist_causal: JointDistribution
    dist_spacelike: JointDistribution
    max_abs_gap: float


def equivalence_report(s: CausalScenario) -> EquivalenceReport:
    causal = joint_causal(s)
    spacelike = joint_spacelike(to_spacelike(s))
    return EquivalenceReport(causal, spacelike, causal.max_gap(spacelike))


def polarizer_basis(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """``(reflected, transmitted)`` polarization vectors for a polarizer at ``theta``."""
    transmitted = np.array([math.cos(theta), math.sin(theta)])
    reflected = np.array([-math.sin(theta), math.cos(theta)])
    return reflected, transmitted


def polarizer_scenario(alpha: float, beta: float, p: float = 0.5) -> CausalScenario:
    """Two polarizers joined by a mirror.

    Polarizer A at angle ``alpha`` prepares ``p|a_r><a_r| + (1-p)|a_t><a_t|``;
    the mirror is the identity channel; polarizer B at ``beta`` measures in
    its own reflected/transmitted basis. Outcome labels are ``a_r, a_t`` and
    ``b_r, b_t``.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"mixing weight p must lie strictly between 0 and 1, got {p}")
    a_r, a_t = polarizer_basis(alpha)
    b_r, b_t = polarizer_basis(beta)
    rho = DensityMatrix(p * np.outer(a_r, a_r) + (1.0 - p) * np.outer(a_t, a_t))
    return CausalScenario(
        rho,
        KrausChannel.identity(2),
        Povm.from_basis([a_r, a_t], ("a_r", "a_t")),
        Povm.from_basis([b_r, b_t], ("b_r", "b_t")),
    )


def with_state(s: CausalScenario, rho: DensityMatrix) -> CausalScenario:
    """Same channel and measurements, different preparation ensemble."""
    return replace(s, rho=rho)

