"""Three-party version: a preparation on C feeding a channel into A (x) B.

Internally the joint operator lives on ``C (x) (A (x) B)``; the spacelike
state is exposed in ``A (x) B (x) C`` order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .matcore import (
    BipartiteShape,
    ShapeError,
    as_matrix,
    kron,
    partial_trace,
    partial_transpose,
)
from .qobjects import (
    FULL_RANK_THRESHOLD,
    DensityMatrix,
    KrausChannel,
    Povm,
    ensemble_decompose,
)
from .scenario import _check_table, channel_from_state, joint_operator


def permute_subsystems(m, dims, perm) -> np.ndarray:
    """Reorder the tensor factors of an operator.

    ``dims`` are the factor dimensions in the current order; factor
    ``perm[k]`` of the input becomes factor ``k`` of the output.
    """
    m = as_matrix(m)
    dims = tuple(dims)
    n = len(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise ShapeError(f"operator is {m.shape}, expected {total}x{total}")
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of {n} factors")
    t = m.reshape(dims + dims)
    t = t.transpose(tuple(perm) + tuple(p + n for p in perm))
    return t.reshape(total, total)


@dataclass(frozen=True)
class JointDistribution3:
    """Probability table ``p(a_i, b_j, c_k)`` indexed ``[i, j, k]``."""

    labels_a: tuple
    labels_b: tuple
    labels_c: tuple
    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        expected = (len(self.labels_a), len(self.labels_b), len(self.labels_c))
        if t.shape != expected:
            raise ShapeError(f"table shape {t.shape} does not match labels {expected}")
        _check_table(t)
        t.flags.writeable = False
        object.__setattr__(self, "labels_a", tuple(self.labels_a))
        object.__setattr__(self, "labels_b", tuple(self.labels_b))
        object.__setattr__(self, "labels_c", tuple(self.labels_c))
        object.__setattr__(self, "table", t)

    def marginal_ab(self) -> np.ndarray:
        return self.table.sum(axis=2)

    def marginal_c(self) -> np.ndarray:
        return self.table.sum(axis=(0, 1))

    def clamped(self) -> np.ndarray:
        return np.where(self.table < 0, 0.0, self.table)

    def max_gap(self, other: "JointDistribution3") -> float:
        if (self.labels_a, self.labels_b, self.labels_c) != (
            other.labels_a,
            other.labels_b,
            other.labels_c,
        ):
            raise ShapeError("cannot compare distributions with different outcome labels")
        return float(np.max(np.abs(self.table - other.table)))


@dataclass(frozen=True)
class TripartiteCausalScenario:
    rho_c: DensityMatrix
    channel: KrausChannel
    povm_a: Povm
    povm_b: Povm
    povm_c: Povm
    full_rank_threshold: float = FULL_RANK_THRESHOLD

    def __post_init__(self):
        if not (self.rho_c.dim == self.channel.d_in == self.povm_c.dim):
            raise ShapeError(
                f"dimension mismatch on C: rho_c {self.rho_c.dim}, channel input "
                f"{self.channel.d_in}, povm_c {self.povm_c.dim}"
            )
        if self.channel.d_out != self.povm_a.dim * self.povm_b.dim:
            raise ShapeError(
                f"channel output {self.channel.d_out} != d_A * d_B = "
                f"{self.povm_a.dim} * {self.povm_b.dim}"
            )
        self.rho_c.require_full_rank(self.full_rank_threshold, "rho_c")

    @property
    def dims(self) -> tuple[int, int, int]:
        """``(d_A, d_B, d_C)``."""
        return self.povm_a.dim, self.povm_b.dim, self.povm_c.dim


@dataclass(frozen=True)
class TripartiteSpacelikeScenario:
    tau_abc: DensityMatrix
    povm_a: Povm
    povm_b: Povm
    povm_c_prime: Povm
    dims: tuple = field(init=False)

    def __post_init__(self):
        dims = (self.povm_a.dim, self.povm_b.dim, self.povm_c_prime.dim)
        if self.tau_abc.dim != int(np.prod(dims)):
            raise ShapeError(f"tau_abc has dimension {self.tau_abc.dim}, POVMs give {dims}")
        object.__setattr__(self, "dims", dims)


def t_rho_tri(s: TripartiteCausalScenario) -> np.ndarray:
    """Joint operator on ``C (x) (A (x) B)``."""
    return joint_operator(s.rho_c, s.channel)


def to_spacelike_tri(s: TripartiteCausalScenario) -> TripartiteSpacelikeScenario:
    d_a, d_b, d_c = s.dims
    tau_cab = partial_transpose(t_rho_tri(s), BipartiteShape(d_c, d_a * d_b), on="A")
    tau = permute_subsystems(tau_cab, (d_c, d_a, d_b), (1, 2, 0))
    tau = DensityMatrix(0.5 * (tau + tau.conj().T))
    return TripartiteSpacelikeScenario(tau, s.povm_a, s.povm_b, s.povm_c.transpose())


def from_spacelike_tri(
    s: TripartiteSpacelikeScenario, threshold: float = FULL_RANK_THRESHOLD
) -> TripartiteCausalScenario:
    """Read ``tau_abc`` as a preparation on C evolved into A (x) B."""
    d_a, d_b, d_c = s.dims
    tau_cab = permute_subsystems(s.tau_abc.mat, (d_a, d_b, d_c), (2, 0, 1))
    rho_c, channel = channel_from_state(tau_cab, BipartiteShape(d_c, d_a * d_b), threshold)
    return TripartiteCausalScenario(
        rho_c, channel, s.povm_a, s.povm_b, s.povm_c_prime.transpose(), threshold
    )


def _labels(s) -> tuple:
    c = s.povm_c if isinstance(s, TripartiteCausalScenario) else s.povm_c_prime
    return s.povm_a.labels, s.povm_b.labels, c.labels


def joint_tri_causal(s: TripartiteCausalScenario) -> JointDistribution3:
    """``p(a, b, c) = Tr_AB[(a (x) b) Tr_C[T_rho (c (x) I_AB)]]``."""
    d_a, d_b, d_c = s.dims
    shape = BipartiteShape(d_c, d_a * d_b)
    op = t_rho_tri(s)
    eye_ab = np.eye(d_a * d_b)
    table = np.empty((len(s.povm_a), len(s.povm_b), len(s.povm_c)))
    for k, c in enumerate(s.povm_c.effects):
        reduced = partial_trace(op @ kron(c, eye_ab), shape, over="A")
        for i, j in itertools.product(range(len(s.povm_a)), range(len(s.povm_b))):
            ab = kron(s.povm_a.effects[i], s.povm_b.effects[j])
            table[i, j, k] = np.trace(ab @ reduced).real
    return JointDistribution3(*_labels(s), table)


def joint_tri_causal_oracle(s: TripartiteCausalScenario) -> JointDistribution3:
    """Ensemble route: ``w_k Tr[(a (x) b) T(rho_k)]`` without forming ``T_rho``."""
    ens = ensemble_decompose(s.rho_c, s.povm_c, s.full_rank_threshold)
    table = np.zeros((len(s.povm_a), len(s.povm_b), len(s.povm_c)))
    for k, (w, member) in enumerate(zip(ens.weights, ens.states)):
        if member is None:
            continue
        out = s.channel.apply(member.mat)
        for i, j in itertools.product(range(len(s.povm_a)), range(len(s.povm_b))):
            ab = kron(s.povm_a.effects[i], s.povm_b.effects[j])
            table[i, j, k] = w * np.trace(ab @ out).real
    return JointDistribution3(*_labels(s), table)


def joint_tri_spacelike(s: TripartiteSpacelikeScenario) -> JointDistribution3:
    """``p(a, b, c) = Tr[tau_abc (a (x) b (x) c')]``."""
    tau = s.tau_abc.mat
    table = np.empty((len(s.povm_a), len(s.povm_b), len(s.povm_c_prime)))
    for i, a in enumerate(s.povm_a.effects):
        for j, b in enumerate(s.povm_b.effects):
            ab = kron(a, b)
            for k, c in enumerate(s.povm_c_prime.effects):
                table[i, j, k] = np.trace(tau @ kron(ab, c)).real
    return JointDistribution3(*_labels(s), table)


def tri_equivalence_gap(s: TripartiteCausalScenario) -> float:
    return joint_tri_causal(s).max_gap(joint_tri_spacelike(to_spacelike_tri(s)))

