"""Gaudin Hamiltonians from the quasi-classical expansion of the transfer matrix.

Two constructions are provided: an explicit sum of one- and two-site terms
(:func:`hamiltonian_direct`) and the eta-derivative of the double-row
transfer matrix at ``u = z_j`` (:func:`hamiltonian_from_transfer`).

The explicit form conjugates the boundary one-site term and the ``z_j + z_k``
exchange sum by the reflecting matrix ``K_j = K(z_j)``.  With
``gauge="outer"`` (default) the conjugation is ``K_j X K_j^{-1}`` and
``Gamma_j = K_j dKbar_j``; this is what the first-order expansion of
``tau(z_j)`` produces.  ``gauge="inner"`` uses ``K_j^{-1} X K_j`` and
``Gamma_j = dKbar_j K_j`` instead; that family still commutes but is not
the derivative of the transfer matrix and does not have the Bethe vectors
as eigenvectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import core, tolerances, vertex
from .errors import DegeneracyError, NumericalDerivativeError, PoleError
from .trig import cos, nonzero_sin

GAUGES = ("outer", "inner")
MIN_STEP = 1e-6


@dataclass
class Richardson:
    """Step-halving difference quotients and their extrapolation tableau."""

    value: np.ndarray
    estimates: list
    tableau: list
    disagreement: float
    step: float


def richardson(
    f: Callable[[float], np.ndarray],
    h: float,
    *,
    scheme: str = "central",
    levels: int = 3,
    f0: np.ndarray | None = None,
    tol: float | None = None,
    refine: int = 3,
) -> Richardson:
    """Derivative of ``f`` at 0 from quotients with steps h, h/2, ...

    ``scheme="central"`` uses symmetric quotients (error series in h^2);
    ``scheme="forward"`` uses ``(f(h) - f(0)) / h`` (error series in h).
    When the last two diagonal extrapolants differ by more than ``tol``
    relative to ``max(|value|, 1)`` the step is halved, at most ``refine``
    times and never below ``MIN_STEP``; after that
    :class:`NumericalDerivativeError` is raised.
    """
    if levels < 2:
        raise ValueError("need at least two step sizes")
    if scheme == "forward":
        base = f(0.0) if f0 is None else f0
        quot = lambda s: (f(s) - base) / s  # noqa: E731
        order = 1
    elif scheme == "central":
        quot = lambda s: (f(s) - f(-s)) / (2 * s)  # noqa: E731
        order = 2
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    steps = [h / 2**i for i in range(levels)]
    est = [np.asarray(quot(s)) for s in steps]
    tab = [[e] for e in est]
    for i in range(1, levels):
        for k in range(1, i + 1):
            fac = 2 ** (order * k) - 1
            tab[i].append(tab[i][k - 1] + (tab[i][k - 1] - tab[i - 1][k - 1]) / fac)
    best = tab[-1][-1]
    prev = tab[-2][-1]
    dis = float(np.linalg.norm(best - prev) / max(np.linalg.norm(best), 1.0))
    tol = tolerances.get().fd_tol if tol is None else tol
    if dis > tol:
        if refine > 0 and h / 2 >= MIN_STEP:
            return richardson(f, h / 2, scheme=scheme, levels=levels, f0=f0, tol=tol, refine=refine - 1)
        raise NumericalDerivativeError(
            f"Richardson extrapolants disagree by {dis:.3g} > {tol:.3g} (h = {h:g}, {scheme})"
        )
    return Richardson(best, est, tab, dis, h)


def _partial_trace_first(m4: np.ndarray) -> np.ndarray:
    t = m4.reshape(2, 2, 2, 2)
    return np.einsum("abad->bd", t)


def kbar(u, params) -> np.ndarray:
    """tr_0 {K+_0(u) R_{0j}(2u) P_{0j}} as a 2x2 operator on site j."""
    kp = np.kron(vertex.k_plus(u, params), core.IDENTITY2)
    return _partial_trace_first(kp @ vertex.r_matrix(2 * u, params.eta) @ core.SWAP)


def kbar_eta_derivative(u, params, h: float | None = None, scheme: str = "central") -> np.ndarray:
    h = tolerances.get().fd_step if h is None else h
    f0 = kbar(u, params.with_eta(0.0)) if scheme == "forward" else None
    return richardson(lambda e: kbar(u, params.with_eta(e)), h, scheme=scheme, f0=f0).value


def gamma(site: int, params, *, gauge: str = "outer", h: float | None = None) -> np.ndarray:
    """Boundary one-site term at ``u = z_j``."""
    zj = params.z[site - 1]
    d = kbar_eta_derivative(zj, params, h)
    k = vertex.k_minus(zj, params)
    if gauge == "outer":
        return k @ d
    if gauge == "inner":
        return d @ k
    raise ValueError(f"gauge must be one of {GAUGES}")


def exchange(x) -> np.ndarray:
    """(s+ s- + s- s+ + cos x (sz sz - 1)/2) / sin x on two sites."""
    s = nonzero_sin(x, "Gaudin exchange")
    m = (
        np.kron(core.SIGMA_PLUS, core.SIGMA_MINUS)
        + np.kron(core.SIGMA_MINUS, core.SIGMA_PLUS)
        + cos(x) * (np.kron(core.SIGMA_Z, core.SIGMA_Z) - np.eye(4)) / 2
    )
    return m / s


def hamiltonian_terms(site: int, params, *, gauge: str = "outer", h: float | None = None):
    """H_j as a list of ``(sites, local_matrix)`` pairs (1-based sites)."""
    n = params.n_sites
    core._check_sites((site,), n)
    zs = params.z
    zj = zs[site - 1]
    k = vertex.k_minus(zj, params)
    kinv = np.linalg.inv(k)
    if gauge == "outer":
        left, right = np.kron(k, core.IDENTITY2), np.kron(kinv, core.IDENTITY2)
    elif gauge == "inner":
        left, right = np.kron(kinv, core.IDENTITY2), np.kron(k, core.IDENTITY2)
    else:
        raise ValueError(f"gauge must be one of {GAUGES}")
    terms = [((site,), gamma(site, params, gauge=gauge, h=h))]
    for other in range(1, n + 1):
        if other == site:
            continue
        zk = zs[other - 1]
        try:
            t = exchange(zj - zk) + left @ exchange(zj + zk) @ right
        except PoleError as exc:
            raise DegeneracyError(f"z_{site} and z_{other} are degenerate") from exc
        terms.append(((site, other), t))
    return terms


def terms_to_dense(terms, n_sites: int) -> np.ndarray:
    out = np.zeros((1 << n_sites, 1 << n_sites), dtype=complex)
    for sites, m in terms:
        out += core.embed_operator(m, sites, n_sites)
    return out


def apply_terms(terms, state: np.ndarray, n_sites: int) -> np.ndarray:
    out = np.zeros(1 << n_sites, dtype=complex)
    for sites, m in terms:
        out += core.apply_operator(m, sites, state, n_sites)
    return out


def hamiltonian_direct(site: int, params, *, gauge: str = "outer", h: float | None = None) -> np.ndarray:
    return terms_to_dense(hamiltonian_terms(site, params, gauge=gauge, h=h), params.n_sites)


def apply_hamiltonian(site: int, params, state: np.ndarray, *, gauge: str = "outer") -> np.ndarray:
    return apply_terms(hamiltonian_terms(site, params, gauge=gauge), state, params.n_sites)


def hamiltonian_from_transfer(
    site: int,
    params,
    h: float | None = None,
    *,
    scheme: str = "central",
    levels: int | None = None,
    tol: float | None = None,
    details: bool = False,
):
    """d/d eta of tau(z_j; eta) at eta = 0 by Richardson extrapolation.

    The forward scheme uses tau(z_j; 0) = I exactly.  With ``details=True``
    the full :class:`Richardson` record is returned instead of the matrix.
    """
    h = tolerances.get().fd_step if h is None else h
    if h < MIN_STEP:
        raise ValueError("step below 1e-6 loses too many digits")
    zj = params.z[site - 1]
    n = params.n_sites
    f = lambda e: vertex.transfer(zj, params.with_eta(e))  # noqa: E731
    f0 = np.eye(1 << n, dtype=complex) if scheme == "forward" else None
    if levels is None:
        levels = 3
    res = richardson(f, h, scheme=scheme, levels=levels, f0=f0, tol=tol)
    return res if details else res.value


def identity_shift(a: np.ndarray, b: np.ndarray) -> dict:
    """Split ``a - b`` into a multiple of the identity and the remainder."""
    diff = np.asarray(a) - np.asarray(b)
    c = complex(np.trace(diff) / diff.shape[0])
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
    return {
        "rel_distance": float(np.linalg.norm(diff) / scale),
        "shift": c,
        "rel_distance_after_shift": float(np.linalg.norm(diff - c * np.eye(diff.shape[0])) / scale),
    }


@dataclass
class GaudinSet:
    params: object
    hams: list = field(default_factory=list)

    def max_commutator(self) -> float:
        """max_{j<k} ||[H_j, H_k]|| / (||H_j|| ||H_k||)."""
        return max_relative_commutator(self.hams)


def gaudin_set(params, *, gauge: str = "outer") -> GaudinSet:
    return GaudinSet(params, [hamiltonian_direct(j, params, gauge=gauge) for j in range(1, params.n_sites + 1)])


def max_relative_commutator(ops: Sequence[np.ndarray]) -> float:
    worst = 0.0
    for a in range(len(ops)):
        for b in range(a + 1, len(ops)):
            x, y = ops[a], ops[b]
            c = np.linalg.norm(x @ y - y @ x) / (np.linalg.norm(x) * np.linalg.norm(y))
            worst = max(worst, float(c))
    return worst
