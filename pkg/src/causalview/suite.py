"""Randomized verification of the observer-equivalence properties.

Trial ``n`` draws everything from ``RngSpec(seed, n)``, so results do not
depend on how trials are scheduled across worker processes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .matcore import BipartiteShape, frob_dist, min_eigenvalue, partial_trace
from .multiparty import (
    joint_tri_causal,
    joint_tri_causal_oracle,
    joint_tri_spacelike,
    to_spacelike_tri,
)
from .randgen import RngSpec, random_causal_scenario, random_tripartite_scenario
from .scenario import (
    from_spacelike,
    joint_causal,
    joint_causal_oracle,
    joint_spacelike,
    to_spacelike,
)


@dataclass(frozen=True)
class TrialResult:
    trial: int
    dims: tuple
    equivalence_gap: float
    oracle_gap: float
    tau_min_eig: float
    tau_trace_gap: float
    marginal_gap: float
    roundtrip_gap: float


def run_bipartite_trial(seed: int, trial: int, dims: Sequence[int]) -> TrialResult:
    g = RngSpec(seed, trial).generator()
    d_a, d_b = (int(x) for x in g.choice(dims, size=2))
    s = random_causal_scenario(d_a, d_b, g)
    causal = joint_causal(s)
    sl = to_spacelike(s)
    spacelike = joint_spacelike(sl)
    tau = sl.tau.mat
    back = joint_causal(from_spacelike(sl))
    return TrialResult(
        trial=trial,
        dims=(d_a, d_b),
        equivalence_gap=causal.max_gap(spacelike),
        oracle_gap=causal.max_gap(joint_causal_oracle(s)),
        tau_min_eig=min_eigenvalue(tau),
        tau_trace_gap=abs(complex(np.trace(tau)) - 1.0),
        marginal_gap=frob_dist(partial_trace(tau, BipartiteShape(d_a, d_b), "B"), s.rho.mat.T),
        roundtrip_gap=back.max_gap(causal),
    )


def run_tripartite_trial(seed: int, trial: int, dims: Sequence[int]) -> TrialResult:
    g = RngSpec(seed, trial).generator()
    d_a, d_b, d_c = (int(x) for x in g.choice(dims, size=3))
    s = random_tripartite_scenario(d_a, d_b, d_c, g)
    causal = joint_tri_causal(s)
    sl = to_spacelike_tri(s)
    tau = sl.tau_abc.mat
    return TrialResult(
        trial=trial,
        dims=(d_a, d_b, d_c),
        equivalence_gap=causal.max_gap(joint_tri_spacelike(sl)),
        oracle_gap=causal.max_gap(joint_tri_causal_oracle(s)),
        tau_min_eig=min_eigenvalue(tau),
        tau_trace_gap=abs(complex(np.trace(tau)) - 1.0),
        marginal_gap=0.0,
        roundtrip_gap=0.0,
    )


@dataclass(frozen=True)
class SuiteSummary:
    trials: int
    tol: float
    max_equivalence_gap: float
    max_oracle_gap: float
    min_tau_eigenvalue: float
    max_tau_trace_gap: float
    max_marginal_gap: float
    max_roundtrip_gap: float
    worst_trial: int

    @property
    def passed(self) -> bool:
        return (
            max(
                self.max_equivalence_gap,
                self.max_oracle_gap,
                self.max_tau_trace_gap,
                self.max_marginal_gap,
                self.max_roundtrip_gap,
                -self.min_tau_eigenvalue,
            )
            < self.tol
        )

    def as_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


def summarize(results: Sequence[TrialResult], tol: float) -> SuiteSummary:
    worst = max(results, key=lambda r: r.equivalence_gap)
    return SuiteSummary(
        trials=len(results),
        tol=tol,
        max_equivalence_gap=max(r.equivalence_gap for r in results),
        max_oracle_gap=max(r.oracle_gap for r in results),
        min_tau_eigenvalue=min(r.tau_min_eig for r in results),
        max_tau_trace_gap=max(r.tau_trace_gap for r in results),
        max_marginal_gap=max(r.marginal_gap for r in results),
        max_roundtrip_gap=max(r.roundtrip_gap for r in results),
        worst_trial=worst.trial,
    )


def run_suite(
    trials: int,
    dims: Sequence[int],
    seed: int,
    tol: float = 1e-9,
    tripartite: bool = False,
    workers: int = 1,
) -> SuiteSummary:
    fn = run_tripartite_trial if tripartite else run_bipartite_trial
    dims = tuple(dims)
    args = ([seed] * trials, range(trials), [dims] * trials)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, *args, chunksize=max(1, trials // (4 * workers))))
    else:
        results = list(map(fn, *args))
    return summarize(results, tol)
