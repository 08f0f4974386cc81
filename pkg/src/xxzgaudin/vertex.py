"""Six-vertex R-matrix, boundary K-matrices, monodromy and transfer matrices.

Monodromy-type operators live on ``aux (x) quantum`` with the auxiliary
space as the leftmost factor, so the 2x2 block ``(a, b)`` of a matrix ``T``
is ``T[a*d:(a+1)*d, b*d:(b+1)*d]`` with ``d = 2**N``.
"""
from __future__ import annotations

import contextlib

import numpy as np

from . import core
from .linalg import lu_inverse
from .trig import cos, expi, nonzero_sin, sin

# Test-only hook: additive shift of the (2, 2) entry of every R-matrix.
_R_ENTRY_SHIFT = 0.0


@contextlib.contextmanager
def corrupted_r_matrix(shift: float = 1e-3):
    """Perturb R[1, 1] for negative-control checks."""
    global _R_ENTRY_SHIFT
    old = _R_ENTRY_SHIFT
    _R_ENTRY_SHIFT = shift
    try:
        yield
    finally:
        _R_ENTRY_SHIFT = old


def r_matrix(u, eta) -> np.ndarray:
    den = nonzero_sin(u + eta, "R-matrix")
    a = sin(u) / den
    b = sin(eta) / den
    r = np.array(
        [[1, 0, 0, 0], [0, a, b, 0], [0, b, a, 0], [0, 0, 0, 1]], dtype=complex
    )
    r[1, 1] += _R_ENTRY_SHIFT
    return r


def _r12(u, eta, a, b, n):
    return core.embed_two_site(r_matrix(u, eta), a, b, n)


def check_qybe(u1, u2, u3, eta) -> float:
    """Frobenius norm of R12 R13 R23 - R23 R13 R12 on (C^2)^3."""
    r12 = _r12(u1 - u2, eta, 1, 2, 3)
    r13 = _r12(u1 - u3, eta, 1, 3, 3)
    r23 = _r12(u2 - u3, eta, 2, 3, 3)
    return float(np.linalg.norm(r12 @ r13 @ r23 - r23 @ r13 @ r12))


def check_unitarity(u, eta) -> float:
    """||R12(u) R21(-u) - I||_F."""
    prod = _r12(u, eta, 1, 2, 2) @ _r12(-u, eta, 2, 1, 2)
    return float(np.linalg.norm(prod - np.eye(4)))


def k_minus(u, params) -> np.ndarray:
    l1, l2, xi = params.lambda1, params.lambda2, params.xi
    den = 2 * nonzero_sin(l1 + xi + u, "K-") * nonzero_sin(l2 + xi + u, "K-")
    c_minus, c_plus = cos(l1 - l2), cos(l1 + l2 + 2 * xi)
    e = expi(-2 * u)
    return np.array(
        [
            [c_minus - c_plus * e, -1j * sin(2 * u) * expi(-(l1 + l2)) * expi(-u)],
            [1j * sin(2 * u) * expi(l1 + l2) * expi(-u), c_minus * e - c_plus],
        ],
        dtype=complex,
    ) / den


def k_plus(u, params) -> np.ndarray:
    """Dual K-matrix; depends on eta explicitly and through xibar."""
    l1, l2, eta = params.lambda1, params.lambda2, params.eta
    xb = params.xibar()
    den = 2 * nonzero_sin(l1 + xb - u - eta, "K+") * nonzero_sin(l2 + xb - u - eta, "K+")
    c_minus, c_plus = cos(l1 - l2), cos(l1 + l2 + 2 * xb)
    s = sin(2 * u + 2 * eta)
    return np.array(
        [
            [
                c_minus * expi(-eta) - c_plus * expi(2 * u + eta),
                1j * s * expi(-(l1 + l2)) * expi(u - eta),
            ],
            [
                -1j * s * expi(l1 + l2) * expi(u + eta),
                c_minus * expi(2 * u + eta) - c_plus * expi(-eta),
            ],
        ],
        dtype=complex,
    ) / den


def _relative(lhs, rhs) -> float:
    """||lhs - rhs||_F / max(||lhs||_F, 1): K-matrices grow near their poles."""
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1.0))


def check_re(u1, u2, params) -> float:
    """Reflection equation residual, relative to the size of either side."""
    eta = params.eta
    k1 = core.embed_site(k_minus(u1, params), 1, 2)
    k2 = core.embed_site(k_minus(u2, params), 2, 2)
    lhs = _r12(u1 - u2, eta, 1, 2, 2) @ k1 @ _r12(u1 + u2, eta, 2, 1, 2) @ k2
    rhs = k2 @ _r12(u1 + u2, eta, 1, 2, 2) @ k1 @ _r12(u1 - u2, eta, 2, 1, 2)
    return _relative(lhs, rhs)


def check_dual_re(u1, u2, params, params2=None) -> float:
    """Dual reflection equation residual, relative as in :func:`check_re`.

    ``params2``, when given, supplies the second K+ factor; the dual RE holds
    for any xibar, so a shifted ``delta`` there must not spoil it.
    """
    eta = params.eta
    p2 = params if params2 is None else params2
    k1 = core.embed_site(k_plus(u1, params), 1, 2)
    k2 = core.embed_site(k_plus(u2, p2), 2, 2)
    s = -u1 - u2 - 2 * eta
    lhs = _r12(u2 - u1, eta, 1, 2, 2) @ k1 @ _r12(s, eta, 2, 1, 2) @ k2
    rhs = k2 @ _r12(s, eta, 1, 2, 2) @ k1 @ _r12(u2 - u1, eta, 2, 1, 2)
    return _relative(lhs, rhs)


def monodromy(u, params) -> np.ndarray:
    """T_0(u) = R_{0N}(u - z_N) ... R_{01}(u - z_1) on aux (x) quantum."""
    n = params.n_sites
    t = np.eye(1 << (n + 1), dtype=complex)
    for site in range(n, 0, -1):
        t = t @ _r12(u - params.z[site - 1], params.eta, 1, site + 1, n + 1)
    return t


def blocks(m: np.ndarray) -> list[list[np.ndarray]]:
    """Split an aux (x) quantum operator into its 2x2 grid of quantum operators."""
    d = m.shape[0] // 2
    return [[m[a * d:(a + 1) * d, b * d:(b + 1) * d] for b in range(2)] for a in range(2)]


def monodromy_hat(u, params) -> np.ndarray:
    """T^{-1}(-u), computed by LU."""
    return lu_inverse(monodromy(-u, params), what="T(-u)")


def double_row_monodromy(u, params) -> np.ndarray:
    n = params.n_sites
    km = core.embed_site(k_minus(u, params), 1, n + 1)
    return monodromy(u, params) @ km @ monodromy_hat(u, params)


def partial_trace_aux(m: np.ndarray) -> np.ndarray:
    b = blocks(m)
    return b[0][0] + b[1][1]


def transfer(u, params) -> np.ndarray:
    """tau(u) = tr_0 K+_0(u) T(u) K-_0(u) T^{-1}(-u)."""
    n = params.n_sites
    kp = core.embed_site(k_plus(u, params), 1, n + 1)
    return partial_trace_aux(kp @ double_row_monodromy(u, params))


def check_double_row_re(u1, u2, params) -> float:
    """Reflection-algebra relation for the double-row monodromy.

    Works on aux1 (x) aux2 (x) quantum; returns the Frobenius residual of
    R12(u1-u2) TT1(u1) R21(u1+u2) TT2(u2) - TT2(u2) R12(u1+u2) TT1(u1) R21(u1-u2).
    """
    n = params.n_sites
    total = n + 2
    q_sites = list(range(3, total + 1))
    tt1 = core.embed_operator(double_row_monodromy(u1, params), [1] + q_sites, total)
    tt2 = core.embed_operator(double_row_monodromy(u2, params), [2] + q_sites, total)
    eta = params.eta
    r = lambda x, a, b: _r12(x, eta, a, b, total)  # noqa: E731
    lhs = r(u1 - u2, 1, 2) @ tt1 @ r(u1 + u2, 2, 1) @ tt2
    rhs = tt2 @ r(u1 + u2, 1, 2) @ tt1 @ r(u1 - u2, 2, 1)
    return float(np.linalg.norm(lhs - rhs))


def transfer_commutator(u, v, params) -> float:
    """||[tau(u), tau(v)]|| / (||tau(u)|| ||tau(v)||)."""
    a, b = transfer(u, params), transfer(v, params)
    return float(np.linalg.norm(a @ b - b @ a) / (np.linalg.norm(a) * np.linalg.norm(b)))


def classical_limit_defect(u, params, eta) -> float:
    """||K+(u; eta) K-(u) - I||_F."""
    return float(np.linalg.norm(k_plus(u, params.with_eta(eta)) @ k_minus(u, params) - np.eye(2)))
