import json

import numpy as np
import pytest

from xxzgaudin import bethe, core
from xxzgaudin.errors import DimensionCapError, PoleError

# Roots of the N = 2 desk instance, frozen from a multi-start solve and
# certified by residual and eigenvector checks (not by an external source).
DESK_ROOTS = {1: (0.18163077679917303, 0.8992805878547525), 2: (0.18182737145114639, 0.968249674219386)}
DESK_ENERGIES = {
    0.18: (16.723652423232533, -18.876861546670547),
    0.9: (6.481487404167675, 4.863347247652816),
}


def test_desk_roots_frozen(desk_roots):
    for kind, want in DESK_ROOTS.items():
        got = sorted(rs.roots[0].real for rs in desk_roots[kind])
        assert np.allclose(got, want, atol=1e-9)
        for rs in desk_roots[kind]:
            assert rs.residual_norm < 1e-11
            assert abs(rs.roots[0].imag) == 0.0


def test_desk_energies_frozen(desk, desk_roots):
    for kind in (1, 2):
        low, high = desk_roots[kind]
        for rs, key in ((low, 0.18), (high, 0.9)):
            e = [bethe.eigenvalue(kind, j, rs.roots, desk) for j in (1, 2)]
            assert np.allclose(e, DESK_ENERGIES[key], rtol=1e-10)


def test_residual_symmetries(desk):
    v = np.array([0.4 + 0.1j])
    r = bethe.ba_residual(1, v, desk)
    for w in (-v, v + np.pi, np.pi - v):
        assert np.allclose(bethe.ba_residual(1, w, desk), r)


def test_analytic_jacobian_matches_differences(four_site):
    p, _ = four_site
    v = np.array([0.4 + 0.1j, 0.9 - 0.2j])
    jac = bethe.ba_jacobian(2, v, p)
    h = 1e-6
    for k in range(2):
        dv = np.zeros(2, complex)
        dv[k] = h
        fd = (bethe.ba_residual(2, v + dv, p) - bethe.ba_residual(2, v - dv, p)) / (2 * h)
        assert np.allclose(jac[:, k], fd, atol=1e-6)


def test_four_site_solutions(four_site):
    p, sets = four_site
    for kind in (1, 2):
        assert sets[kind], "no M = 2 solutions found"
        for rs in sets[kind]:
            assert rs.M == 2 and rs.residual_norm < 1e-10


def test_eigenvectors(desk, desk_roots, four_site):
    cases = [(desk, desk_roots)] + [four_site]
    for p, sets in cases:
        for kind in (1, 2):
            for rs in sets[kind]:
                for rec in bethe.eigen_check(kind, rs.roots, p):
                    assert rec.eigen_residual < 1e-8
                    assert rec.formula_error < 1e-9
                    assert rec.alt_formula_error > 1e-6


def test_off_shell_root_is_not_an_eigenvector(desk, desk_roots):
    v = np.array(desk_roots[1][0].roots) + 1e-3
    worst = max(r.eigen_residual for r in bethe.eigen_check(1, v, desk))
    assert worst > 1e-5


def test_creation_operators_dense_vs_applied(desk, rng):
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    u = 0.4 + 0.2j
    assert np.allclose(bethe.op_B(u, desk) @ psi, bethe.apply_creation("B", u, desk, psi))
    assert np.allclose(bethe.op_tilde_C(u, desk) @ psi, bethe.apply_creation("C", u, desk, psi, tilde=True))


def test_creation_operators_commute(four_site):
    p, _ = four_site
    a, b = bethe.op_tilde_B(0.3 + 0.1j, p), bethe.op_tilde_B(1.1, p)
    assert np.linalg.norm(a @ b - b @ a) < 1e-10 * np.linalg.norm(a) * np.linalg.norm(b)


def test_vacuum_overlap_closed_form(four_site):
    p, _ = four_site
    direct = bethe.dual_vacuum(1, p) @ bethe.vacuum(1, p)
    assert abs(direct - bethe.vacuum_overlap(p)) < 1e-12


def test_coefficient_pole_guard(desk):
    with pytest.raises(PoleError):
        bethe.b_coefficient(desk.z[0], desk.z[0], desk)


def test_roots_file_roundtrip(desk_roots):
    sets = desk_roots[1] + desk_roots[2]
    text = bethe.dump_root_sets(sets)
    back = bethe.load_root_sets(text)
    assert bethe.dump_root_sets(back) == text
    rec = json.loads(text)[0]
    assert set(rec) == {"kind", "M", "roots", "residual_norm", "params_hash"}


def test_solver_is_deterministic(desk):
    a = bethe.dump_root_sets(bethe.solve_bethe(1, desk, seed=3))
    b = bethe.dump_root_sets(bethe.solve_bethe(1, desk, seed=3))
    assert a == b


def test_canonical_form():
    v = np.array([-0.3 + 0.2j, 0.3 + np.pi - 0.1j])
    c = bethe.canonical_roots(v)
    assert np.all((c.real >= 0) & (c.real <= np.pi / 2))
    assert bethe.root_distance(c, bethe.canonical_roots(c[::-1])) < 1e-15


def test_solver_diagnostics_when_nothing_converges(desk):
    diag = {}
    out = bethe.solve_bethe(1, desk, starts=2, max_iter=1, diagnostics=diag)
    assert diag["distinct"] == len(out)
    assert sum(v for k, v in diag.items() if k != "distinct") >= 2


def test_dimension_cap(desk):
    from xxzgaudin import tolerances

    with tolerances.override(max_sites=1):
        with pytest.raises(DimensionCapError):
            bethe.eigen_check(1, [0.2], desk)


def test_vacuum_is_product_state(desk):
    v = bethe.vacuum(1, desk)
    m = v.reshape(2, 2)
    assert np.linalg.matrix_rank(m, tol=1e-12) == 1
    assert v.shape == core.all_up(2).shape


def test_dual_vacua_are_biorthogonal(four_site):
    p, _ = four_site
    assert abs(bethe.dual_vacuum(1, p) @ bethe.vacuum(2, p)) < 1e-14
    assert abs(bethe.dual_vacuum(2, p) @ bethe.vacuum(1, p)) < 1e-14
    assert abs(bethe.dual_vacuum(2, p) @ bethe.vacuum(2, p)) > 1e-3


def test_vacua_coincide_when_lambdas_do(desk):
    same = desk.replace(lambda2=desk.lambda1, check=False)
    assert np.allclose(bethe.vacuum(1, same), bethe.vacuum(2, same))


def test_too_many_creation_operators_vanish(desk):
    psi = bethe.vacuum(1, desk)
    norms = []
    for u in (0.4, 0.9 + 0.1j, 0.6 - 0.2j):
        psi = bethe.apply_creation("B", u, desk, psi)
        norms.append(np.linalg.norm(psi))
    assert norms[1] > 1.0
    assert norms[2] < 1e-13 * norms[1]


def test_b_at_minus_u_is_proportional(desk):
    a, b = bethe.op_B(0.4 + 0.1j, desk), bethe.op_B(-0.4 - 0.1j, desk)
    ratio = b[np.abs(a) > 1e-12] / a[np.abs(a) > 1e-12]
    assert np.allclose(ratio, ratio[0])


def test_tilde_c_matrix_elements(four_site):
    p, _ = four_site
    u = 0.5 + 0.2j
    c = bethe.op_tilde_C(u, p)
    up = core.all_up(4)
    for i in range(1, 5):
        amp = up @ c @ core.basis_state([i], 4)
        assert abs(amp - bethe.c_coefficient(u, p.z[i - 1], p)) < 1e-13


def test_state_symmetries(four_site):
    p, sets = four_site
    v = np.array(sets[1][0].roots)
    a = bethe.bethe_state(1, v, p)
    assert np.max(np.abs(a - bethe.bethe_state(1, v[::-1], p))) < 1e-12 * np.max(np.abs(a))
    assert np.allclose(bethe.bethe_state(1, [], p), bethe.vacuum(1, p))
    r = bethe.ba_residual(1, v, p)
    assert np.allclose(bethe.ba_residual(1, v[::-1], p), r[::-1])
    for j in range(1, 5):
        e = bethe.eigenvalue(1, j, v, p)
        assert abs(bethe.eigenvalue(1, j, -v[::-1], p) - e) < 1e-12 * max(abs(e), 1)


def test_kind_formulas_swap_with_lambdas(desk):
    p = desk.replace(delta=0.0)
    q = p.replace(lambda1=p.lambda2, lambda2=p.lambda1)
    for j in (1, 2):
        assert abs(bethe.eigenvalue(1, j, [0.4], p) - bethe.eigenvalue(2, j, [0.4], q)) < 1e-13


def test_polish_is_quadratic(desk):
    v = np.array([0.8992805878547525 + 1e-6])
    out = bethe.polish(1, v, desk)
    assert np.max(np.abs(bethe.ba_residual(1, out, desk))) < 1e-13


def test_clearly_off_shell_root(desk):
    v = np.array([0.8992805878547525 + 0.05])
    assert 1e-3 < np.max(np.abs(bethe.ba_residual(1, v, desk)))
    worst = max(r.eigen_residual for r in bethe.eigen_check(1, v, desk))
    assert worst > 1e-4
