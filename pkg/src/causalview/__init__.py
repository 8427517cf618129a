"""Causal and spacelike observer views of quantum experiments.

A causal scenario (preparation, channel, measurement) and a spacelike one
(shared state, two local measurements) are related by a partial transpose and
give the same joint outcome probabilities.
"""

from .matcore import (
    DEFAULT_TOL,
    BipartiteShape,
    DomainError,
    RankDeficientError,
    ShapeError,
    eig_hermitian,
    frob_dist,
    kron,
    partial_trace,
    partial_transpose,
    sqrtm_psd,
)
from .multiparty import (
    JointDistribution3,
    TripartiteCausalScenario,
    TripartiteSpacelikeScenario,
    from_spacelike_tri,
    joint_tri_causal,
    joint_tri_causal_oracle,
    joint_tri_spacelike,
    permute_subsystems,
    t_rho_tri,
    to_spacelike_tri,
)
from .nosignal import NoSignallingReport, SignallingDemo, check_nosignalling, signalling_demo
from .qobjects import (
    DensityMatrix,
    KrausChannel,
    Povm,
    WeightedEnsemble,
    apply_channel,
    choi,
    ensemble_decompose,
    kraus_from_choi,
)
from .randgen import RngSpec, random_cptp, random_density, random_povm
from .scenario import (
    CausalScenario,
    JointDistribution,
    SpacelikeScenario,
    equivalence_report,
    from_spacelike,
    joint_causal,
    joint_causal_oracle,
    joint_spacelike,
    polarizer_scenario,
    t_rho,
    to_spacelike,
)

__version__ = "0.1.0"
