"""Partition functions and scalar products: determinants, recursion, oracles.

Kind 1 partition functions are <up| C~(u_1)...C~(u_N) |down>, kind 2 are
<down| B~(u_1)...B~(u_N) |up>.  The brute-force oracles contract dense
vectors directly and share no code with the determinant formulas beyond
the creation-operator coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import bethe, core, tolerances
from .errors import DegeneracyError, DimensionCapError, OnShellRequiredError, PoleError
from .linalg import ILL_CONDITIONED, lu_det
from .trig import nonzero_sin, sin


@dataclass
class ScalarProductResult:
    value: complex
    method: str
    condition_estimate: float = 1.0
    extra: dict = field(default_factory=dict)

    @property
    def ill_conditioned(self) -> bool:
        return self.condition_estimate > ILL_CONDITIONED


def _as_list(xs) -> list[complex]:
    return [complex(x) for x in np.atleast_1d(xs)]


def _pairwise_guard(xs: Sequence[complex], what: str) -> None:
    eps = tolerances.get().eps_degenerate
    for a in range(len(xs)):
        for b in range(a):
            if abs(sin(xs[a] - xs[b])) < eps or abs(sin(xs[a] + xs[b])) < eps:
                raise DegeneracyError(f"{what} {a + 1} and {b + 1} coincide up to sign")


def _vandermonde(xs: Sequence[complex], *, descending: bool) -> complex:
    """prod over pairs of sin(x_a - x_b) sin(x_a + x_b).

    ``descending`` selects a > b ordering, otherwise a < b.
    """
    out = 1.0 + 0j
    n = len(xs)
    for a in range(n):
        for b in range(n):
            if (a > b) if descending else (a < b):
                out *= sin(xs[a] - xs[b]) * sin(xs[a] + xs[b])
    return out


def _dim_guard(n: int) -> None:
    cap = tolerances.get().max_sites
    if n > cap:
        raise DimensionCapError(f"N = {n} exceeds the brute-force cap of {cap} sites")


# ------------------------------------------------------- partition functions

def partition_matrix(kind: int, ubar, params) -> np.ndarray:
    """Matrix with row alpha <-> ubar_alpha and column j <-> z_j."""
    ub = _as_list(ubar)
    a1, a2 = params.lambda1 + params.xi, params.lambda2 + params.xi
    n = len(params.z)
    m = np.empty((len(ub), n), dtype=complex)
    sg = 1 if kind == 1 else -1
    for a, u in enumerate(ub):
        den_b = nonzero_sin(a1 + sg * u, "boundary") * nonzero_sin(a2 + sg * u, "boundary")
        for j, z in enumerate(params.z):
            num = sin(a1 - sg * z) * sin(a2 + sg * z) * sin(2 * u)
            den = den_b * nonzero_sin(u - z, "u vs z") ** 2 * nonzero_sin(u + z, "u vs z") ** 2
            m[a, j] = num / den
    return m


def partition_det(kind: int, ubar, params) -> ScalarProductResult:
    ub = _as_list(ubar)
    n = params.n_sites
    if kind not in (1, 2):
        raise ValueError("kind must be 1 or 2")
    if len(ub) != n:
        raise ValueError(f"need {n} spectral parameters, got {len(ub)}")
    _pairwise_guard(ub, "spectral parameters")
    _pairwise_guard(params.z, "inhomogeneities")
    mat = partition_matrix(kind, ub, params)
    det, cond = lu_det(mat)
    pref = 1.0 + 0j
    for u in ub:
        for z in params.z:
            pref *= sin(u + z) * sin(u - z)
    den = _vandermonde(ub, descending=True) * _vandermonde(params.z, descending=False)
    return ScalarProductResult(pref * det / den, "determinant", cond)


def partition_recursive(kind: int, ubar, params) -> ScalarProductResult:
    """Peel the last spectral parameter, summing over the site it flips."""
    ub = _as_list(ubar)
    zs = params.z
    n = len(zs)
    if len(ub) != n:
        raise ValueError(f"need {n} spectral parameters, got {len(ub)}")
    _pairwise_guard(ub, "spectral parameters")
    coef = bethe.c_coefficient if kind == 1 else bethe.b_coefficient
    table = [[coef(u, z, params) for z in zs] for u in ub]

    @lru_cache(maxsize=None)
    def z_of(mask: int) -> complex:
        depth = bin(mask).count("1")
        if depth == 0:
            return 1.0 + 0j
        row = table[depth - 1]
        total = 0j
        for i in range(n):
            if mask >> i & 1:
                total += row[i] * z_of(mask & ~(1 << i))
        return total

    return ScalarProductResult(z_of((1 << n) - 1), "recursion")


def partition_bruteforce(kind: int, ubar, params) -> ScalarProductResult:
    ub = _as_list(ubar)
    n = params.n_sites
    _dim_guard(n)
    if kind == 1:
        psi, bra, which = core.all_down(n), core.all_up(n), "C"
    else:
        psi, bra, which = core.all_up(n), core.all_down(n), "B"
    for u in reversed(ub):
        psi = bethe.apply_creation(which, u, params, psi, tilde=True)
    return ScalarProductResult(complex(np.vdot(bra, psi)), "bruteforce")


# ------------------------------------------------------------- S12 and S21

def s12(us, vs, params) -> ScalarProductResult:
    return partition_det(1, _as_list(us) + _as_list(vs), params)


def s21(us, vs, params) -> ScalarProductResult:
    return partition_det(2, _as_list(us) + _as_list(vs), params)


def _gauged_overlap(bra_kind: int, bra_ops: str, us, ket_kind: int, ket_ops: str, vs, params):
    """<Omega^(bra)| X(u_M)...X(u_1) Y(v_1)...Y(v_M) |Omega^(ket)> with gauged operators."""
    psi = bethe.vacuum(ket_kind, params)
    for v in reversed(_as_list(vs)):
        psi = bethe.apply_creation(ket_ops, v, params, psi)
    row = bethe.dual_vacuum(bra_kind, params)
    for u in reversed(_as_list(us)):
        row = bethe.apply_creation_left(row, bra_ops, u, params)
    return complex(row @ psi)


def _gauged_result(raw: complex, params) -> ScalarProductResult:
    ov = bethe.vacuum_overlap(params)
    return ScalarProductResult(raw / ov, "bruteforce", extra={"form": "gauged", "raw": raw, "vacuum_overlap": ov})


def s12_bruteforce(us, vs, params, *, form: str = "tilde") -> ScalarProductResult:
    _dim_guard(params.n_sites)
    if form == "tilde":
        return partition_bruteforce(1, _as_list(us) + _as_list(vs), params)
    return _gauged_result(_gauged_overlap(1, "C", us, 2, "C", vs, params), params)


def s21_bruteforce(us, vs, params, *, form: str = "tilde") -> ScalarProductResult:
    _dim_guard(params.n_sites)
    if form == "tilde":
        return partition_bruteforce(2, _as_list(us) + _as_list(vs), params)
    return _gauged_result(_gauged_overlap(2, "B", us, 1, "B", vs, params), params)


# ------------------------------------------------------------- S11 and S22

def _require_onshell(kind: int, roots, params) -> None:
    res = float(np.max(np.abs(bethe.ba_residual(kind, roots, params)), initial=0.0))
    tol = tolerances.get().tol_onshell
    if not res < tol:
        raise OnShellRequiredError(f"Bethe residual {res:.3g} exceeds tol_onshell = {tol:.3g}")


def f_factor(kind: int, j: int, u, roots, params, *, require_onshell: bool = True) -> complex:
    """F^{(kind)}_j(u) for column j (1-based) of the on-shell determinant.

    The pair sum inside the bracket omits the root ``v_j`` of the same
    column, so at u -> v_j the bracket becomes the j-th Bethe equation and
    cancels one order of the double pole.
    """
    v = bethe._roots_of(roots)
    if require_onshell:
        _require_onshell(kind, v, params)
    u = complex(u)
    d = params.delta
    a1, a2 = params.lambda1 + params.xi, params.lambda2 + params.xi
    w1, w2 = (1 - d, 1 + d) if kind == 1 else (1 + d, 1 - d)
    sg = -1 if kind == 1 else 1
    vj = v[j - 1]
    pref = sin(a1 + sg * u) * sin(a2 + sg * u)
    for vk in v:
        pref *= sin(vk - u) * sin(vk + u)
    pref /= nonzero_sin(vj - u, "F: sin(v_j-u)") ** 2 * nonzero_sin(vj + u, "F: sin(v_j+u)") ** 2
    br = w1 / (nonzero_sin(a1 + u, "F") * nonzero_sin(a1 - u, "F"))
    br += w2 / (nonzero_sin(a2 + u, "F") * nonzero_sin(a2 - u, "F"))
    for z in params.z:
        br += 1 / (nonzero_sin(u - z, "F") * nonzero_sin(u + z, "F"))
    for k, vk in enumerate(v):
        if k != j - 1:
            br -= 2 / (nonzero_sin(u - vk, "F") * nonzero_sin(u + vk, "F"))
    return complex(pref * br)


def onshell_matrix(kind: int, us, roots, params, *, require_onshell: bool = True) -> np.ndarray:
    v = bethe._roots_of(roots)
    u = _as_list(us)
    a1, a2 = params.lambda1 + params.xi, params.lambda2 + params.xi
    sg = -1 if kind == 1 else 1
    mat = np.empty((len(u), len(v)), dtype=complex)
    for a, ua in enumerate(u):
        for j, vj in enumerate(v):
            f = f_factor(kind, j + 1, ua, v, params, require_onshell=False)
            den = nonzero_sin(a2 + sg * vj, "boundary") * nonzero_sin(a1 + sg * vj, "boundary")
            mat[a, j] = sin(2 * vj) * sin(2 * ua) * f / den
    return mat


def _onshell_det(kind: int, us, roots, params, require_onshell: bool) -> ScalarProductResult:
    v = bethe._roots_of(roots)
    u = _as_list(us)
    if len(u) != len(v):
        raise ValueError("need as many u's as roots")
    if require_onshell:
        _require_onshell(kind, v, params)
    _pairwise_guard(u, "u parameters")
    _pairwise_guard(v, "roots")
    eps = tolerances.get().eps_degenerate
    for ua in u:
        for vj in v:
            if abs(sin(ua - vj)) < eps or abs(sin(ua + vj)) < eps:
                raise DegeneracyError("u parameters must be disjoint from the roots")
    mat = onshell_matrix(kind, u, v, params, require_onshell=False)
    det, cond = lu_det(mat)
    den = _vandermonde(u, descending=False) * _vandermonde(v, descending=True)
    return ScalarProductResult(det / den, "determinant", cond)


def s11_det(us, roots, params, *, require_onshell: bool = True) -> ScalarProductResult:
    return _onshell_det(1, us, roots, params, require_onshell)


def s22_det(us, roots, params, *, require_onshell: bool = True) -> ScalarProductResult:
    return _onshell_det(2, us, roots, params, require_onshell)


def _tilde_overlap(kind: int, us, vs, params) -> complex:
    n = params.n_sites
    if kind == 1:
        ref, bra_ops, ket_ops = core.all_up(n), "C", "B"
    else:
        ref, bra_ops, ket_ops = core.all_down(n), "B", "C"
    psi = ref
    for v in reversed(_as_list(vs)):
        psi = bethe.apply_creation(ket_ops, v, params, psi, tilde=True)
    for u in reversed(_as_list(us)):
        psi = bethe.apply_creation(bra_ops, u, params, psi, tilde=True)
    return complex(np.vdot(ref, psi))


def s11_bruteforce(us, roots, params, *, form: str = "tilde") -> ScalarProductResult:
    """Direct contraction; ``form`` is "tilde" (bare spin operators) or "gauged"."""
    _dim_guard(params.n_sites)
    vs = bethe._roots_of(roots)
    if form == "tilde":
        return ScalarProductResult(_tilde_overlap(1, us, vs, params), "bruteforce", extra={"form": "tilde"})
    if form == "gauged":
        return _gauged_result(_gauged_overlap(1, "C", us, 1, "B", vs, params), params)
    raise ValueError("form must be 'tilde' or 'gauged'")


def s22_bruteforce(us, roots, params, *, form: str = "tilde") -> ScalarProductResult:
    _dim_guard(params.n_sites)
    vs = bethe._roots_of(roots)
    if form == "tilde":
        return ScalarProductResult(_tilde_overlap(2, us, vs, params), "bruteforce", extra={"form": "tilde"})
    if form == "gauged":
        return _gauged_result(_gauged_overlap(2, "B", us, 2, "C", vs, params), params)
    raise ValueError("form must be 'tilde' or 'gauged'")


# ---------------------------------------------------- intermediate functions

def _check_down_sites(down_sites, n: int, expected: int) -> tuple:
    sites = tuple(int(s) for s in down_sites)
    if len(sites) != expected:
        raise ValueError(f"expected {expected} down sites, got {len(sites)}")
    core._check_sites(sites, n)
    return sites


def intermediate_g(i: int, u_prefix, down_sites, roots, params) -> complex:
    """<j_{i+1},...,j_M| C~(u_i)...C~(u_1) B~(v_1)...B~(v_M) |up> by contraction."""
    _dim_guard(params.n_sites)
    vs = bethe._roots_of(roots)
    us = _as_list(u_prefix) if i else []
    m = len(vs)
    if len(us) != i or not 0 <= i <= m:
        raise ValueError("u_prefix must hold exactly i parameters, 0 <= i <= M")
    n = params.n_sites
    sites = _check_down_sites(down_sites, n, m - i)
    psi = core.all_up(n)
    for v in reversed(vs):
        psi = bethe.apply_creation("B", v, params, psi, tilde=True)
    for u in us:
        psi = bethe.apply_creation("C", u, params, psi, tilde=True)
    return complex(np.vdot(core.basis_state(sites, n), psi))


def g0_from_partition(down_sites, roots, params) -> complex:
    """G^(0) as a kind-2 partition function on the sub-chain of the down sites."""
    sites = tuple(down_sites)
    sub = params.restrict([s - 1 for s in sites])
    return partition_det(2, bethe._roots_of(roots), sub).value


def intermediate_g_recursive(i: int, u_prefix, down_sites, roots, params, *, base: str = "direct") -> complex:
    """G^(i) from G^(i-1) by summing over the site flipped back up by C~(u_i).

    ``base="determinant"`` evaluates G^(0) through :func:`g0_from_partition`.
    """
    vs = bethe._roots_of(roots)
    us = _as_list(u_prefix) if i else []
    n = params.n_sites
    sites = _check_down_sites(down_sites, n, len(vs) - i)
    if i == 0:
        if base == "determinant":
            return g0_from_partition(sites, vs, params)
        return intermediate_g(0, [], sites, vs, params)
    total = 0j
    for j in range(1, n + 1):
        if j in sites:
            continue
        amp = bethe.c_coefficient(us[i - 1], params.z[j - 1], params)
        total += amp * intermediate_g_recursive(i - 1, us[: i - 1], (j, *sites), vs, params, base=base)
    return total


__all__ = [
    "ScalarProductResult",
    "partition_matrix",
    "partition_det",
    "partition_recursive",
    "partition_bruteforce",
    "s12",
    "s21",
    "s12_bruteforce",
    "s21_bruteforce",
    "f_factor",
    "onshell_matrix",
    "s11_det",
    "s22_det",
    "s11_bruteforce",
    "s22_bruteforce",
    "intermediate_g",
    "intermediate_g_recursive",
    "g0_from_partition",
    "PoleError",
]
