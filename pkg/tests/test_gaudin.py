import numpy as np
import pytest

from xxzgaudin import core, gaudin, random_params
from xxzgaudin.errors import DegeneracyError, NumericalDerivativeError


def test_richardson_on_known_function():
    f = lambda e: np.array([np.exp(2 * e), np.sin(e)])  # noqa: E731
    c = gaudin.richardson(f, 1e-2)
    assert np.allclose(c.value, [2.0, 1.0], atol=1e-10)
    fw = gaudin.richardson(f, 1e-3, scheme="forward", levels=4)
    assert np.allclose(fw.value, [2.0, 1.0], atol=1e-7)


def test_richardson_reports_disagreement():
    with pytest.raises(NumericalDerivativeError):
        gaudin.richardson(lambda e: np.array([np.exp(50 * e)]), 0.1)


def test_step_floor(desk):
    with pytest.raises(ValueError):
        gaudin.hamiltonian_from_transfer(1, desk, h=1e-8)


@pytest.mark.parametrize("n", [2, 4])
def test_direct_matches_transfer_derivative(rng, n):
    p = random_params(rng, n)
    for j in range(1, n + 1):
        a = gaudin.hamiltonian_direct(j, p)
        b = gaudin.hamiltonian_from_transfer(j, p)
        sh = gaudin.identity_shift(a, b)
        assert sh["rel_distance"] < 1e-7
        assert abs(sh["shift"]) < 1e-6


def test_forward_scheme_agrees(desk):
    a = gaudin.hamiltonian_direct(1, desk)
    b = gaudin.hamiltonian_from_transfer(1, desk, h=1e-4, scheme="forward", levels=4)
    assert np.linalg.norm(a - b) / np.linalg.norm(a) < 1e-6


def test_inner_gauge_commutes_but_is_not_the_derivative(rng):
    p = random_params(rng, 4)
    inner = gaudin.gaudin_set(p, gauge="inner")
    assert inner.max_commutator() < 1e-9
    a = gaudin.hamiltonian_direct(2, p, gauge="inner")
    b = gaudin.hamiltonian_from_transfer(2, p)
    assert gaudin.identity_shift(a, b)["rel_distance_after_shift"] > 1e-3


@pytest.mark.parametrize("n", [2, 4, 6])
def test_hamiltonians_commute(rng, n):
    assert gaudin.gaudin_set(random_params(rng, n)).max_commutator() < 1e-9


def test_matrix_free_application(rng):
    p = random_params(rng, 4)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    for j in range(1, 5):
        assert np.allclose(gaudin.apply_hamiltonian(j, p, psi), gaudin.hamiltonian_direct(j, p) @ psi)


def test_hamiltonians_conserve_nothing_trivial(desk):
    # boundary terms are non-diagonal, so total S^z is not conserved
    sz = sum(core.embed_site(core.SIGMA_Z, j, 2) for j in (1, 2))
    h = gaudin.hamiltonian_direct(1, desk)
    assert np.linalg.norm(h @ sz - sz @ h) > 1e-3


def test_exchange_is_symmetric():
    x = gaudin.exchange(0.7)
    assert np.allclose(x, core.SWAP @ x @ core.SWAP)


def test_coinciding_sites_rejected(desk):
    bad = desk.replace(z=(0.11, 0.11 + 1e-12), check=False)
    with pytest.raises(DegeneracyError):
        gaudin.hamiltonian_terms(1, bad)


def test_identity_shift_detects_constant():
    a = np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex)
    sh = gaudin.identity_shift(a + 0.5 * np.eye(4), a)
    assert abs(sh["shift"] - 0.5) < 1e-14
    assert sh["rel_distance_after_shift"] < 1e-14


def test_richardson_refines_step():
    f = lambda e: np.array([np.exp(20 * e)])  # noqa: E731
    res = gaudin.richardson(f, 0.05, tol=1e-6)
    assert res.step < 0.05
    assert abs(res.value[0] - 20) < 1e-4


def test_close_sites_need_smaller_step(rng):
    p = random_params(rng, 4).replace(z=(0.47, 0.94, 1.0, 0.481))
    a = gaudin.hamiltonian_direct(1, p)
    b = gaudin.hamiltonian_from_transfer(1, p, details=True)
    assert b.step < 1e-3
    assert np.linalg.norm(a - b.value) / np.linalg.norm(a) < 1e-7


def test_gamma_is_non_diagonal_and_depends_on_delta(desk):
    g = gaudin.gamma(1, desk)
    assert abs(g[0, 1]) > 1e-3 and abs(g[1, 0]) > 1e-3
    shifted = gaudin.gamma(1, desk.replace(delta=desk.delta + 1e-3))
    assert np.linalg.norm(shifted - g) > 1e-6
    h = gaudin.hamiltonian_direct(1, desk)
    h2 = gaudin.hamiltonian_direct(1, desk.replace(delta=desk.delta + 1e-3))
    assert np.linalg.norm(h2 - h) > 1e-6


def test_kbar_shape_and_period(desk):
    k = gaudin.kbar(0.37, desk)
    assert k.shape == (2, 2)
    assert np.allclose(gaudin.kbar(0.37 + 2 * np.pi, desk), k)


def test_difference_quotient_converges_linearly(rng):
    from xxzgaudin import vertex

    p = random_params(rng, 2)
    h = gaudin.hamiltonian_direct(1, p)
    errs = []
    for eta in (1e-2, 1e-3):
        tau = vertex.transfer(p.z[0], p.with_eta(eta))
        errs.append(np.linalg.norm(h - (tau - np.eye(4)) / eta))
    assert 7 < errs[0] / errs[1] < 13


def test_step_halving_estimates_agree(desk):
    a = gaudin.hamiltonian_from_transfer(1, desk, h=1e-3)
    b = gaudin.hamiltonian_from_transfer(1, desk, h=5e-4)
    assert np.linalg.norm(a - b) / np.linalg.norm(a) < 1e-7


def test_commutativity_five_draws_six_sites(rng):
    for _ in range(5):
        assert gaudin.gaudin_set(random_params(rng, 6)).max_commutator() < 1e-9
