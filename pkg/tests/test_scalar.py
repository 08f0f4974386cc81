import itertools

import numpy as np
import pytest

from xxzgaudin import bethe, random_params, scalar
from xxzgaudin.errors import DegeneracyError, OnShellRequiredError

from conftest import rel

# Brute-force contractions on the desk instance with ubar = (0.4+0.1i, 0.9-0.2i).
DESK_Z1 = 7.285447872935308 - 1.1822053908866632j
DESK_Z2 = -256.8752585141443 - 308.26608957567237j
UBAR = [0.4 + 0.1j, 0.9 - 0.2j]


def _spectral(rng, n):
    return rng.uniform(0.1, 1.4, n) + 0.3j * rng.uniform(-1, 1, n)


def test_desk_partition_values(desk):
    assert rel(scalar.partition_det(1, UBAR, desk).value, DESK_Z1) < 1e-12
    assert rel(scalar.partition_det(2, UBAR, desk).value, DESK_Z2) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("kind", [1, 2])
def test_partition_triangle(rng, n, kind):
    p = random_params(rng, n)
    ub = _spectral(rng, n)
    d = scalar.partition_det(kind, ub, p).value
    r = scalar.partition_recursive(kind, ub, p).value
    b = scalar.partition_bruteforce(kind, ub, p).value
    assert rel(d, r) < 1e-10 and rel(d, b) < 1e-10


def test_kinds_related_by_reflection(rng):
    p = random_params(rng, 3)
    ub = _spectral(rng, 3)
    flipped = p.replace(z=tuple(-z for z in p.z), check=False)
    z1 = scalar.partition_det(1, ub, p).value
    z2 = scalar.partition_det(2, -ub, flipped).value
    assert rel(z1, (-1) ** 3 * z2) < 1e-11


def test_spin_count_selection_rule(desk):
    assert scalar.partition_bruteforce(1, [0.4], desk).value == 0
    assert abs(scalar.s11_bruteforce([0.4, 0.8], [0.3], desk).value) == 0


def test_partition_symmetric_in_ubar(rng):
    p = random_params(rng, 3)
    ub = _spectral(rng, 3)
    base = scalar.partition_det(2, ub, p).value
    for perm in itertools.permutations(ub):
        assert rel(scalar.partition_det(2, list(perm), p).value, base) < 1e-11


def test_near_degenerate_ubar(desk):
    u = 0.4 + 0.1j
    near = [u, u + 1e-4]
    d = scalar.partition_det(1, near, desk)
    b = scalar.partition_bruteforce(1, near, desk).value
    assert np.isfinite(d.value) and rel(d.value, b) < 1e-6


def test_degenerate_ubar_rejected(desk):
    with pytest.raises(DegeneracyError):
        scalar.partition_det(1, [0.4, -0.4], desk)


def test_decay_at_large_imaginary_part(desk):
    small = abs(scalar.partition_det(2, [0.4, 0.9 + 5j], desk).value)
    typical = abs(scalar.partition_det(2, [0.4, 0.9], desk).value)
    assert small < 1e-3 * typical


@pytest.mark.parametrize("m", [1, 2])
def test_s12_s21_against_both_forms(rng, m):
    p = random_params(rng, 2 * m)
    us, vs = _spectral(rng, m), _spectral(rng, m)
    for det_fn, bf_fn in ((scalar.s12, scalar.s12_bruteforce), (scalar.s21, scalar.s21_bruteforce)):
        d = det_fn(us, vs, p).value
        assert rel(d, bf_fn(us, vs, p).value) < 1e-10
        assert rel(d, bf_fn(us, vs, p, form="gauged").value) < 1e-10


def test_gauged_raw_value_at_zero_excitations(desk):
    res = scalar.s11_bruteforce([], [], desk, form="gauged")
    assert abs(res.extra["raw"] - bethe.vacuum_overlap(desk)) < 1e-12
    assert abs(res.value - 1) < 1e-12


def _onshell_cases(desk, desk_roots, four_site):
    yield desk, desk_roots
    yield four_site


def test_onshell_determinants(desk, desk_roots, four_site, rng):
    for p, sets in _onshell_cases(desk, desk_roots, four_site):
        for kind, det_fn, bf_fn in ((1, scalar.s11_det, scalar.s11_bruteforce), (2, scalar.s22_det, scalar.s22_bruteforce)):
            for rs in sets[kind]:
                us = _spectral(rng, rs.M)
                d = det_fn(us, rs, p)
                assert rel(d.value, bf_fn(us, rs, p).value) < 1e-8
                assert rel(d.value, bf_fn(us, rs, p, form="gauged").value) < 1e-8


def test_offshell_rejected_and_wrong(four_site, rng):
    p, sets = four_site
    rs = sets[1][0]
    bad = np.array(rs.roots)
    bad[0] += 1e-3
    us = _spectral(rng, 2)
    with pytest.raises(OnShellRequiredError):
        scalar.s11_det(us, bad, p)
    good = rel(scalar.s11_det(us, rs, p).value, scalar.s11_bruteforce(us, rs, p).value)
    worse = rel(scalar.s11_det(us, bad, p, require_onshell=False).value, scalar.s11_bruteforce(us, bad, p).value)
    assert worse > 1e3 * max(good, 1e-16)


def test_u_must_avoid_roots(desk, desk_roots):
    rs = desk_roots[1][0]
    with pytest.raises(DegeneracyError):
        scalar.s11_det([rs.roots[0]], rs, desk)


def test_f_factor_bracket_is_bethe_residual(four_site):
    p, sets = four_site
    rs = sets[1][0]
    v = np.array(rs.roots)
    # on shell the bracket vanishes at u = v_j and F stays finite there
    f1 = scalar.f_factor(1, 1, v[0] + 1e-6, v, p)
    f2 = scalar.f_factor(1, 1, v[0] + 2e-6, v, p)
    assert abs(f1 / f2 - 1.0) < 1e-4
    # off shell the bracket is finite and F has a simple pole
    w = v + np.array([1e-3, 0])
    g1 = scalar.f_factor(1, 1, w[0] + 1e-6, w, p, require_onshell=False)
    g2 = scalar.f_factor(1, 1, w[0] + 2e-6, w, p, require_onshell=False)
    assert abs(g1 / g2 - 2.0) < 1e-2


def test_intermediate_functions(four_site, rng):
    p, sets = four_site
    rs = sets[1][0]
    us = list(_spectral(rng, 2))
    for i in range(3):
        for sites in itertools.combinations(range(1, 5), 2 - i):
            direct = scalar.intermediate_g(i, us[:i], sites, rs, p)
            assert rel(direct, scalar.intermediate_g_recursive(i, us[:i], sites, rs, p)) < 1e-10
            via_det = scalar.intermediate_g_recursive(i, us[:i], sites, rs, p, base="determinant")
            assert rel(direct, via_det) < 1e-10
    top = scalar.intermediate_g(2, us, (), rs, p)
    assert rel(top, scalar.s11_det(us, rs, p).value) < 1e-10


def test_condition_estimate_recorded(desk):
    res = scalar.partition_det(1, UBAR, desk)
    assert res.condition_estimate >= 1 and not res.ill_conditioned


def test_single_site_closed_form(rng):
    for _ in range(5):
        p = random_params(rng, 1)
        v = complex(_spectral(rng, 1)[0])
        z = p.z[0]
        a1, a2 = p.lambda1 + p.xi, p.lambda2 + p.xi
        s = np.sin
        want = s(a1 + z) * s(a2 - z) * s(2 * v) / (s(a1 - v) * s(a2 - v) * s(v - z) * s(v + z))
        assert rel(scalar.partition_det(2, [v], p).value, want) < 1e-13
        assert rel(scalar.partition_recursive(2, [v], p).value, want) < 1e-13
        assert rel(scalar.partition_bruteforce(2, [v], p).value, want) < 1e-13


def test_recursion_permutation_invariant(rng):
    p = random_params(rng, 4)
    ub = _spectral(rng, 4)
    base = scalar.partition_recursive(1, ub, p).value
    for perm in itertools.permutations(range(4)):
        assert rel(scalar.partition_recursive(1, ub[list(perm)], p).value, base) < 1e-10


def test_s12_symmetric_and_degenerate(rng):
    p = random_params(rng, 4)
    us, vs = list(_spectral(rng, 2)), list(_spectral(rng, 2))
    base = scalar.s12(us, vs, p).value
    assert rel(scalar.s12([vs[1], us[0]], [us[1], vs[0]], p).value, base) < 1e-11
    with pytest.raises(DegeneracyError):
        scalar.s12([us[0], us[1]], [us[0], vs[1]], p)


@pytest.mark.parametrize("kind", [1, 2])
def test_s12_s21_six_sites(rng, kind):
    p = random_params(rng, 6)
    us, vs = _spectral(rng, 3), _spectral(rng, 3)
    det_fn = scalar.s12 if kind == 1 else scalar.s21
    bf_fn = scalar.s12_bruteforce if kind == 1 else scalar.s21_bruteforce
    d = det_fn(us, vs, p).value
    assert rel(d, bf_fn(us, vs, p).value) < 1e-8
    assert rel(d, bf_fn(us, vs, p, form="gauged").value) < 1e-8


def test_onshell_six_sites():
    p = random_params(np.random.default_rng(61), 6)
    rng = np.random.default_rng(5)
    for kind in (1, 2):
        sets = bethe.solve_bethe(kind, p, seed=0, starts=48)
        assert sets
        rs = sets[0]
        us = _spectral(rng, 3)
        det_fn = scalar.s11_det if kind == 1 else scalar.s22_det
        bf_fn = scalar.s11_bruteforce if kind == 1 else scalar.s22_bruteforce
        d = det_fn(us, rs, p).value
        assert rel(d, bf_fn(us, rs, p).value) < 1e-8
        assert rel(d, bf_fn(us, rs, p, form="gauged").value) < 1e-8


def test_s11_permutation_symmetry(four_site, rng):
    p, sets = four_site
    rs = sets[1][0]
    us = _spectral(rng, 2)
    base = scalar.s11_det(us, rs, p).value
    assert rel(scalar.s11_det(us[::-1], rs, p).value, base) < 1e-11
    assert rel(scalar.s11_det(us, np.array(rs.roots)[::-1], p).value, base) < 1e-11


def test_f_factor_parity(four_site):
    # root factors and bracket are even in u; the boundary prefactor is not
    p, sets = four_site
    rs = sets[2][0]
    u = 0.37 + 0.21j
    a1, a2 = p.lambda1 + p.xi, p.lambda2 + p.xi
    boundary = lambda x: np.sin(a1 + x) * np.sin(a2 + x)  # noqa: E731
    for j in (1, 2):
        even_part = scalar.f_factor(2, j, u, rs, p) / boundary(u)
        assert rel(even_part, scalar.f_factor(2, j, -u, rs, p) / boundary(-u)) < 1e-12


def test_s22_sign_matches_oracle(four_site, rng):
    p, sets = four_site
    rs = sets[2][0]
    us = _spectral(rng, 2)
    ratio = scalar.s22_det(us, rs, p).value / scalar.s22_bruteforce(us, rs, p).value
    assert abs(ratio - 1) < 1e-9
