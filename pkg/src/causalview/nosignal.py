"""No-signalling checks on shared states, and the signalling reinterpretation demo."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .matcore import BipartiteShape, ShapeError, frob_dist
from .qobjects import DensityMatrix, Povm
from .scenario import (
    CausalScenario,
    joint_causal,
    joint_spacelike,
    to_spacelike,
    with_state,
)

DEFAULT_NS_TOL = 1e-10


@dataclass(frozen=True)
class NoSignallingReport:
    """Worst marginal shifts over all pairs of alternative measurements.

    ``direction_a_to_b`` is how far a B marginal moves when A switches
    measurement; ``direction_b_to_a`` the converse.
    """

    direction_a_to_b: float
    direction_b_to_a: float
    povm_pairs_tested: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.direction_a_to_b < self.tol and self.direction_b_to_a < self.tol


def _table(tau: np.ndarray, povm_a: Povm, povm_b: Povm) -> np.ndarray:
    # Tr[(a (x) b) tau] for every effect pair, without forming the Kronecker products
    da, db = povm_a.dim, povm_b.dim
    t = tau.reshape(da, db, da, db)
    return np.einsum(
        "xij,ykl,jlik->xy", np.asarray(povm_a.effects), np.asarray(povm_b.effects), t
    ).real


def check_nosignalling(
    tau: DensityMatrix,
    shape: BipartiteShape,
    povms_a: Sequence[Povm],
    povms_b: Sequence[Povm],
    tol: float = DEFAULT_NS_TOL,
) -> NoSignallingReport:
    if len(povms_a) < 2 or len(povms_b) < 2:
        raise ValueError("need at least two alternative POVMs on each side")
    if tau.dim != shape.total:
        raise ShapeError(f"tau has dimension {tau.dim}, shape gives {shape.total}")
    for p in povms_a:
        if p.dim != shape.dim_a:
            raise ShapeError(f"A-side POVM has dimension {p.dim}, expected {shape.dim_a}")
    for p in povms_b:
        if p.dim != shape.dim_b:
            raise ShapeError(f"B-side POVM has dimension {p.dim}, expected {shape.dim_b}")

    tables = {
        (x, y): _table(tau.mat, pa, pb)
        for (x, pa), (y, pb) in itertools.product(enumerate(povms_a), enumerate(povms_b))
    }
    a_to_b = 0.0
    for y in range(len(povms_b)):
        for x1, x2 in itertools.combinations(range(len(povms_a)), 2):
            shift = np.abs(tables[x1, y].sum(axis=0) - tables[x2, y].sum(axis=0)).max()
            a_to_b = max(a_to_b, float(shift))
    b_to_a = 0.0
    for x in range(len(povms_a)):
        for y1, y2 in itertools.combinations(range(len(povms_b)), 2):
            shift = np.abs(tables[x, y1].sum(axis=1) - tables[x, y2].sum(axis=1)).max()
            b_to_a = max(b_to_a, float(shift))
    pairs = len(povms_b) * len(povms_a) * (len(povms_a) - 1) // 2
    pairs += len(povms_a) * len(povms_b) * (len(povms_b) - 1) // 2
    return NoSignallingReport(a_to_b, b_to_a, pairs, tol)


@dataclass(frozen=True)
class SignallingDemo:
    """B marginals before and after the preparation ensemble changes.

    ``b_marginal_*`` come from the causal view, ``b_marginal_*_spacelike`` from
    the shared states ``tau`` and ``tau'``; ``view_gap`` is the largest
    entrywise disagreement between the two views over both tables.
    """

    b_marginal: np.ndarray
    b_marginal_prime: np.ndarray
    b_marginal_spacelike: np.ndarray
    b_marginal_prime_spacelike: np.ndarray
    marginal_change: float
    view_gap: float
    tau_change: float


def signalling_demo(s: CausalScenario, rho_prime: DensityMatrix) -> SignallingDemo:
    """Change the preparation from ``rho`` to ``rho'`` and watch B's marginal.

    In the causal view the B marginal may move. In the spacelike view the same
    numbers come out of two different shared states, so the shift is a change
    of state rather than an influence across the separation.
    """
    if rho_prime.dim != s.rho.dim:
        raise ShapeError(f"rho' has dimension {rho_prime.dim}, expected {s.rho.dim}")
    if frob_dist(rho_prime.mat, s.rho.mat) < 1e-9:
        warnings.warn("rho' equals rho; the signalling demo is degenerate", stacklevel=2)
    s_prime = with_state(s, rho_prime)
    causal, causal_p = joint_causal(s), joint_causal(s_prime)
    sl, sl_p = to_spacelike(s), to_spacelike(s_prime)
    spacelike, spacelike_p = joint_spacelike(sl), joint_spacelike(sl_p)
    return SignallingDemo(
        b_marginal=causal.marginal_b,
        b_marginal_prime=causal_p.marginal_b,
        b_marginal_spacelike=spacelike.marginal_b,
        b_marginal_prime_spacelike=spacelike_p.marginal_b,
        marginal_change=float(np.abs(causal.marginal_b - causal_p.marginal_b).max()),
        view_gap=max(causal.max_gap(spacelike), causal_p.max_gap(spacelike_p)),
        tau_change=frob_dist(sl.tau.mat, sl_p.tau.mat),
    )
