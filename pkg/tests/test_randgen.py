import numpy as np
import pytest

from causalview.matcore import BipartiteShape, DomainError, eig_hermitian, frob_dist, partial_trace
from causalview.qobjects import apply_channel, choi
from causalview.randgen import (
    RngSpec,
    random_causal_scenario,
    random_cptp,
    random_density,
    random_povm,
)


def test_density_trace_and_floor():
    assert abs(np.trace(random_density(3, RngSpec(1), 1e-3).mat) - 1) < 1e-12
    for stream in range(20):
        rho = random_density(2, RngSpec(5, stream), 1e-3)
        assert rho.min_eigenvalue >= 1e-3 - 1e-15


def test_density_deterministic():
    a = random_density(4, RngSpec(42, 3)).mat
    b = random_density(4, RngSpec(42, 3)).mat
    c = random_density(4, RngSpec(42, 4)).mat
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_density_argument_checks():
    with pytest.raises(DomainError):
        random_density(1, RngSpec(0))
    with pytest.raises(DomainError):
        random_density(2, RngSpec(0), min_eig=0.5)
    with pytest.raises(ValueError):
        RngSpec(-1)
    with pytest.raises(ValueError):
        RngSpec(2**64)


def test_povm_complete_and_positive():
    for stream in range(10):
        p = random_povm(3, 4, RngSpec(9, stream))
        assert frob_dist(sum(p.effects), np.eye(3)) < 1e-10
        assert all(eig_hermitian(e)[0][-1] >= -1e-9 for e in p.effects)


def test_projective_povm():
    p = random_povm(3, 3, RngSpec(2), projective=True)
    v = np.column_stack([eig_hermitian(e)[1][:, 0] for e in p.effects])
    assert frob_dist(v.conj().T @ v, np.eye(3)) < 1e-12
    for e in p.effects:
        assert frob_dist(e @ e, e) < 1e-12
    with pytest.raises(DomainError):
        random_povm(3, 2, RngSpec(2), projective=True)
    with pytest.raises(DomainError):
        random_povm(3, 1, RngSpec(2))


@pytest.mark.parametrize("d_in,d_out,n", [(2, 2, 1), (3, 2, 2), (2, 4, 3), (4, 2, 4)])
def test_cptp_completeness(d_in, d_out, n):
    ch = random_cptp(d_in, d_out, n, RngSpec(3))
    s = sum(k.conj().T @ k for k in ch.kraus_ops)
    assert frob_dist(s, np.eye(d_in)) < 1e-10
    c = choi(ch)
    assert eig_hermitian(c)[0][-1] >= -1e-12
    assert frob_dist(partial_trace(c, BipartiteShape(d_in, d_out), "B"), np.eye(d_in)) < 1e-12


def test_single_kraus_is_unitary():
    g = RngSpec(4).generator()
    ch = random_cptp(3, 3, 1, g)
    rho = random_density(3, g)
    out = apply_channel(ch, rho)
    assert np.allclose(eig_hermitian(out.mat)[0], eig_hermitian(rho.mat)[0], atol=1e-13)


def test_infeasible_isometry():
    with pytest.raises(DomainError):
        random_cptp(4, 2, 1, RngSpec(0))
    with pytest.raises(DomainError):
        random_cptp(2, 2, 0, RngSpec(0))


def test_scenario_generation_deterministic():
    a = random_causal_scenario(3, 2, RngSpec(7, 11))
    b = random_causal_scenario(3, 2, RngSpec(7, 11))
    assert np.array_equal(a.rho.mat, b.rho.mat)
    assert all(np.array_equal(x, y) for x, y in zip(a.channel.kraus_ops, b.channel.kraus_ops))
    assert all(np.array_equal(x, y) for x, y in zip(a.povm_b.effects, b.povm_b.effects))
