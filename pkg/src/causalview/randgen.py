"""Seeded random states, POVMs and channels for property suites.

Randomness comes from numpy's counter-based Philox bit generator keyed by a
``SeedSequence(seed, spawn_key=(stream_id,))``. Streams with different ids
are independent, so trial ``n`` of a suite can be regenerated on its own
without replaying trials ``0..n-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .matcore import DomainError, inv_sqrtm_pd
from .multiparty import TripartiteCausalScenario
from .qobjects import DensityMatrix, KrausChannel, Povm
from .scenario import CausalScenario


@dataclass(frozen=True)
class RngSpec:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream_id < 0:
            raise ValueError(f"stream_id must be nonnegative, got {self.stream_id}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(seq))


RngLike = Union[RngSpec, np.random.Generator]


def _gen(rng: RngLike) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngSpec) else rng


def ginibre(rows: int, cols: int, rng: RngLike) -> np.ndarray:
    """Matrix of independent standard complex Gaussians."""
    g = _gen(rng)
    return (g.standard_normal((rows, cols)) + 1j * g.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(dim: int, rng: RngLike) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(dim, dim, rng))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_density(dim: int, rng: RngLike, min_eig: float = 1e-3) -> DensityMatrix:
    """Ginibre state mixed with the identity so every eigenvalue is >= ``min_eig``."""
    if dim < 2:
        raise DomainError(f"dim must be at least 2, got {dim}")
    if not 0.0 < min_eig < 1.0 / dim:
        raise DomainError(f"min_eig must lie in (0, 1/{dim}), got {min_eig}")
    g = ginibre(dim, dim, rng)
    rho0 = g @ g.conj().T
    rho0 /= np.trace(rho0).real
    rho = (1.0 - dim * min_eig) * rho0 + min_eig * np.eye(dim)
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def random_povm(
    dim: int, n_outcomes: int, rng: RngLike, projective: bool = False, max_tries: int = 8
) -> Povm:
    """Random POVM with ``n_outcomes`` effects.

    The generic construction normalizes Wishart matrices ``A_k`` as
    ``S^{-1/2} A_k S^{-1/2}`` with ``S = sum_k A_k``. With ``projective=True``
    the effects are rank-one projectors onto the columns of a random unitary,
    which requires ``n_outcomes == dim``.
    """
    if n_outcomes < 2:
        raise DomainError(f"need at least 2 outcomes, got {n_outcomes}")
    g = _gen(rng)
    if projective:
        if n_outcomes != dim:
            raise DomainError("a projective POVM needs exactly dim outcomes")
        return Povm.from_basis(random_unitary(dim, g).T)
    for _ in range(max_tries):
        parts = []
        for _k in range(n_outcomes):
            m = ginibre(dim, dim, g)
            parts.append(m @ m.conj().T)
        try:
            s_inv = inv_sqrtm_pd(sum(parts), threshold=1e-10)
        except DomainError:
            continue
        effects = []
        for a in parts:
            e = s_inv @ a @ s_inv
            effects.append(0.5 * (e + e.conj().T))
        return Povm(tuple(effects))
    raise DomainError("could not draw a nonsingular POVM normalizer")


def random_cptp(d_in: int, d_out: int, n_kraus: int, rng: RngLike) -> KrausChannel:
    """Random channel from the blocks of a random isometry."""
    if n_kraus < 1:
        raise DomainError(f"need at least one Kraus operator, got {n_kraus}")
    if n_kraus * d_out < d_in:
        raise DomainError(
            f"{n_kraus} Kraus operators of shape {d_out}x{d_in} cannot form an isometry"
        )
    v, _ = np.linalg.qr(ginibre(n_kraus * d_out, d_in, rng))
    return KrausChannel(tuple(v[m * d_out : (m + 1) * d_out] for m in range(n_kraus)))


def min_kraus(d_in: int, d_out: int) -> int:
    return -(-d_in // d_out)


def random_causal_scenario(
    d_a: int,
    d_b: int,
    rng: RngLike,
    n_kraus: int | None = None,
    n_a: int | None = None,
    n_b: int | None = None,
) -> CausalScenario:
    """Full-rank state, channel with 1-4 Kraus operators and POVMs with 2-5 outcomes.

    Unspecified counts are drawn from those ranges; the Kraus count is raised
    to the minimum an isometry needs.
    """
    g = _gen(rng)
    if n_kraus is None:
        lo = min_kraus(d_a, d_b)
        n_kraus = int(g.integers(lo, max(lo, 4) + 1))
    n_a = int(g.integers(2, 6)) if n_a is None else n_a
    n_b = int(g.integers(2, 6)) if n_b is None else n_b
    return CausalScenario(
        random_density(d_a, g),
        random_cptp(d_a, d_b, n_kraus, g),
        random_povm(d_a, n_a, g),
        random_povm(d_b, n_b, g),
    )


def random_tripartite_scenario(
    d_a: int, d_b: int, d_c: int, rng: RngLike, n_kraus: int | None = None
) -> TripartiteCausalScenario:
    g = _gen(rng)
    d_out = d_a * d_b
    if n_kraus is None:
        lo = min_kraus(d_c, d_out)
        n_kraus = int(g.integers(lo, max(lo, 4) + 1))
    return TripartiteCausalScenario(
        random_density(d_c, g),
        random_cptp(d_c, d_out, n_kraus, g),
        random_povm(d_a, int(g.integers(2, 4)), g),
        random_povm(d_b, int(g.integers(2, 4)), g),
        random_povm(d_c, int(g.integers(2, 4)), g),
    )
