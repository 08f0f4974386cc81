"""Dense tensor algebra on (C^2)^{(x)N}.

Site labels are 1-based; site 1 is the leftmost (most significant) tensor
factor, so basis index ``b`` carries the spin of site 1 in its top bit.
Spin up is ``(1, 0)``.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import tolerances
from .errors import SingularGaugeError, SiteIndexError
from .trig import expi

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

for _m in (IDENTITY2, SIGMA_PLUS, SIGMA_MINUS, SIGMA_Z, SWAP):
    _m.setflags(write=False)


def _check_sites(sites: Sequence[int], n_sites: int) -> None:
    for s in sites:
        if not 1 <= s <= n_sites:
            raise SiteIndexError(f"site {s} outside 1..{n_sites}")
    if len(set(sites)) != len(sites):
        raise SiteIndexError(f"coincident sites {tuple(sites)}")


def _n_factors(dim: int) -> int:
    k = int(dim).bit_length() - 1
    if dim < 2 or 1 << k != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return k


def embed_operator(op: np.ndarray, sites: Sequence[int], n_sites: int) -> np.ndarray:
    """Act with ``op`` on the factors ``sites`` (in that order), identity elsewhere."""
    op = np.asarray(op, dtype=complex)
    k = _n_factors(op.shape[0])
    sites = tuple(sites)
    if len(sites) != k or op.shape != (1 << k, 1 << k):
        raise ValueError(f"operator of shape {op.shape} does not act on {len(sites)} sites")
    _check_sites(sites, n_sites)
    rest = [s for s in range(1, n_sites + 1) if s not in sites]
    full = np.kron(op, np.eye(1 << len(rest), dtype=complex))
    order = [s - 1 for s in sites] + [s - 1 for s in rest]
    inv = np.argsort(order)
    t = full.reshape([2] * (2 * n_sites))
    t = t.transpose(list(inv) + [n_sites + i for i in inv])
    return np.ascontiguousarray(t.reshape(1 << n_sites, 1 << n_sites))


def embed_site(op2: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    if np.shape(op2) != (2, 2):
        raise ValueError("embed_site expects a 2x2 operator")
    _check_sites((site,), n_sites)
    left = np.eye(1 << (site - 1), dtype=complex)
    right = np.eye(1 << (n_sites - site), dtype=complex)
    return np.kron(np.kron(left, np.asarray(op2, dtype=complex)), right)


def embed_two_site(op4: np.ndarray, site_a: int, site_b: int, n_sites: int) -> np.ndarray:
    if np.shape(op4) != (4, 4):
        raise ValueError("embed_two_site expects a 4x4 operator")
    return embed_operator(op4, (site_a, site_b), n_sites)


def apply_operator(op: np.ndarray, sites: Sequence[int], state: np.ndarray, n_sites: int) -> np.ndarray:
    """``embed_operator(op, sites, n) @ state`` without forming the big matrix."""
    op = np.asarray(op, dtype=complex)
    k = len(sites)
    _check_sites(tuple(sites), n_sites)
    axes = [s - 1 for s in sites]
    psi = np.asarray(state, dtype=complex).reshape([2] * n_sites)
    out = np.tensordot(op.reshape([2] * (2 * k)), psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(-1)


def apply_operator_left(row: np.ndarray, op: np.ndarray, sites: Sequence[int], n_sites: int) -> np.ndarray:
    """Row vector times ``embed_operator(op, sites, n)``."""
    return apply_operator(np.asarray(op).T, sites, row, n_sites)


def product_state(spinors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for s in spinors:
        out = np.kron(out, np.asarray(s, dtype=complex))
    return out


def all_up(n_sites: int) -> np.ndarray:
    e = np.zeros(1 << n_sites, dtype=complex)
    e[0] = 1.0
    return e


def all_down(n_sites: int) -> np.ndarray:
    e = np.zeros(1 << n_sites, dtype=complex)
    e[-1] = 1.0
    return e


def basis_state(down_sites: Sequence[int], n_sites: int) -> np.ndarray:
    """|j_1,...,j_i>: spins down at the listed 1-based sites, up elsewhere."""
    _check_sites(tuple(down_sites), n_sites)
    idx = 0
    for s in down_sites:
        idx |= 1 << (n_sites - s)
    e = np.zeros(1 << n_sites, dtype=complex)
    e[idx] = 1.0
    return e


def gauge_matrix(u, params) -> np.ndarray:
    """g(u) with columns (e^{-i(u+2 lambda_k)}, 1)."""
    g = np.array(
        [
            [expi(-(u + 2 * params.lambda1)), expi(-(u + 2 * params.lambda2))],
            [1.0, 1.0],
        ],
        dtype=complex,
    )
    if abs(g[0, 0] - g[0, 1]) < tolerances.get().eps_sing:
        raise SingularGaugeError("gauge matrix is singular (lambda1 = lambda2 mod pi)")
    return g


def gauged_sigma(sign: str, u, params) -> np.ndarray:
    """g(u) sigma^{+/-} g(u)^{-1}."""
    base = {"+": SIGMA_PLUS, "-": SIGMA_MINUS}[sign]
    g = gauge_matrix(u, params)
    return g @ base @ np.linalg.inv(g)
