"""Vacua, creation operators, Bethe equations and eigenvalues.

Kind 1 states are built with B(v) on |Omega1>, kind 2 with C(v) on |Omega2>.
Site labels are 1-based.
"""
from __future__ import annotations

import itertools
import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import core, gaudin, tolerances
from .errors import DegenerateStateError, DimensionCapError, PoleError
from .trig import cot, expi, nonzero_sin, sin

log = logging.getLogger(__name__)

KINDS = (1, 2)


def _kind(kind) -> int:
    if kind not in KINDS:
        raise ValueError(f"kind must be 1 or 2, got {kind!r}")
    return int(kind)


# ---------------------------------------------------------------- vacua

def vacuum(kind: int, params) -> np.ndarray:
    lam = params.lambda1 if _kind(kind) == 1 else params.lambda2
    return core.product_state([(expi(-(z + 2 * lam)), 1.0) for z in params.z])


def dual_vacuum_prefactor(params) -> complex:
    s = nonzero_sin(params.lambda1 - params.lambda2, "dual vacuum")
    out = 1.0 + 0j
    for z in params.z:
        out *= 1j * expi(-(z + params.lambda1 + params.lambda2)) / (2 * s)
    return out


def dual_vacuum(kind: int, params) -> np.ndarray:
    """Row vector <Omega^(kind)|."""
    l1, l2 = params.lambda1, params.lambda2
    core.gauge_matrix(0.0, params)  # singular-gauge guard
    if _kind(kind) == 1:
        rows = [(1.0, -expi(-(z + 2 * l2))) for z in params.z]
    else:
        rows = [(-1.0, expi(-(z + 2 * l1))) for z in params.z]
    return dual_vacuum_prefactor(params) * core.product_state(rows)


def vacuum_overlap(params) -> complex:
    """<Omega^(k)|Omega^(k)> in closed form (same for k = 1, 2).

    Per site the dual row times the spinor gives ``det g(z_j)``, so the
    overlap is prod_j e^{-2i(z_j + lambda1 + lambda2)}.
    """
    out = 1.0 + 0j
    for z in params.z:
        out *= expi(-2 * (z + params.lambda1 + params.lambda2))
    return out


# ------------------------------------------------------ creation operators

def b_coefficient(u, z, params) -> complex:
    a1, a2 = params.lambda1 + params.xi, params.lambda2 + params.xi
    num = sin(a1 + z) * sin(a2 - z) * sin(2 * u)
    den = (
        nonzero_sin(a1 - u, "B: sin(lambda1+xi-u)")
        * nonzero_sin(a2 - u, "B: sin(lambda2+xi-u)")
        * nonzero_sin(u - z, "B: sin(u-z)")
        * nonzero_sin(u + z, "B: sin(u+z)")
    )
    return num / den


def c_coefficient(u, z, params) -> complex:
    a1, a2 = params.lambda1 + params.xi, params.lambda2 + params.xi
    num = sin(a1 - z) * sin(a2 + z) * sin(2 * u)
    den = (
        nonzero_sin(a1 + u, "C: sin(lambda1+xi+u)")
        * nonzero_sin(a2 + u, "C: sin(lambda2+xi+u)")
        * nonzero_sin(u - z, "C: sin(u-z)")
        * nonzero_sin(u + z, "C: sin(u+z)")
    )
    return num / den


def _local_terms(which: str, u, params, tilde: bool):
    coef = b_coefficient if which == "B" else c_coefficient
    sign = "-" if which == "B" else "+"
    bare = core.SIGMA_MINUS if which == "B" else core.SIGMA_PLUS
    out = []
    for i, z in enumerate(params.z, start=1):
        local = bare if tilde else core.gauged_sigma(sign, z, params)
        out.append(((i,), coef(u, z, params) * local))
    return out


def op_B(u, params) -> np.ndarray:
    return gaudin.terms_to_dense(_local_terms("B", u, params, False), params.n_sites)


def op_C(u, params) -> np.ndarray:
    return gaudin.terms_to_dense(_local_terms("C", u, params, False), params.n_sites)


def op_tilde_B(u, params) -> np.ndarray:
    return gaudin.terms_to_dense(_local_terms("B", u, params, True), params.n_sites)


def op_tilde_C(u, params) -> np.ndarray:
    return gaudin.terms_to_dense(_local_terms("C", u, params, True), params.n_sites)


def apply_creation(which: str, u, params, state: np.ndarray, *, tilde: bool = False) -> np.ndarray:
    """B(u)|state> or C(u)|state> (``which`` is "B" or "C") without dense matrices."""
    return gaudin.apply_terms(_local_terms(which, u, params, tilde), state, params.n_sites)


def apply_creation_left(row: np.ndarray, which: str, u, params, *, tilde: bool = False) -> np.ndarray:
    """<row| B(u) or <row| C(u)."""
    n = params.n_sites
    out = np.zeros(1 << n, dtype=complex)
    for sites, m in _local_terms(which, u, params, tilde):
        out += core.apply_operator_left(row, m, sites, n)
    return out


def bethe_state(kind: int, roots, params) -> np.ndarray:
    roots = _roots_of(roots)
    which = "B" if _kind(kind) == 1 else "C"
    psi = vacuum(kind, params)
    for v in roots:
        psi = apply_creation(which, v, params, psi)
    return psi


def _roots_of(roots) -> tuple:
    if isinstance(roots, BetheRootSet):
        return roots.roots
    return tuple(complex(v) for v in np.atleast_1d(roots))


# ---------------------------------------------------------- Bethe equations

def _weights(kind: int, params):
    d = params.delta
    return (1 - d, 1 + d) if _kind(kind) == 1 else (1 + d, 1 - d)


def _inv_pair(a, x, what):
    """1 / (sin(a + x) sin(a - x)) and its x-derivative."""
    f = 1 / (nonzero_sin(a + x, what) * nonzero_sin(a - x, what))
    return f, -f * (cot(a + x) - cot(a - x))


def ba_residual(kind: int, roots, params) -> np.ndarray:
    """Left side minus right side of each Bethe equation."""
    v = _roots_of(roots)
    w1, w2 = _weights(kind, params)
    a1, a2 = params.lambda1 + params.xi, params.lambda2 + params.xi
    out = np.empty(len(v), dtype=complex)
    for a, va in enumerate(v):
        lhs = w1 * _inv_pair(a1, va, "boundary")[0] + w2 * _inv_pair(a2, va, "boundary")[0]
        rhs = 0j
        for k, vk in enumerate(v):
            if k != a:
                rhs += 2 / (nonzero_sin(va - vk, "roots") * nonzero_sin(va + vk, "roots"))
        for z in params.z:
            rhs -= 1 / (nonzero_sin(va - z, "root vs z") * nonzero_sin(va + z, "root vs z"))
        out[a] = lhs - rhs
    return out


def ba_jacobian(kind: int, roots, params) -> np.ndarray:
    """Analytic Jacobian of :func:`ba_residual` with respect to the roots."""
    v = _roots_of(roots)
    m = len(v)
    w1, w2 = _weights(kind, params)
    a1, a2 = params.lambda1 + params.xi, params.lambda2 + params.xi
    jac = np.zeros((m, m), dtype=complex)
    for a, va in enumerate(v):
        jac[a, a] += w1 * _inv_pair(a1, va, "boundary")[1] + w2 * _inv_pair(a2, va, "boundary")[1]
        for z in params.z:
            # +1/(sin(v-z) sin(v+z)) = -1/(sin(z+v) sin(z-v))
            jac[a, a] -= _inv_pair(z, va, "root vs z")[1]
        for k, vk in enumerate(v):
            if k == a:
                continue
            # -2/(sin(va-vk) sin(va+vk)) = 2/(sin(vk+va) sin(vk-va))
            f, dfa = _inv_pair(vk, va, "roots")
            jac[a, a] += 2 * dfa
            jac[a, k] -= 2 * f * (cot(vk + va) + cot(vk - va))
    return jac


def _scale(v: np.ndarray, params):
    """Product of sin(a+v) sin(a-v) over boundary and inhomogeneity points, and its log-derivative.

    Each Bethe equation is multiplied by this before Newton: the factor is
    nonzero wherever the equation has a finite root but removes the spurious
    attractor at |Im v| -> infinity where the raw residual decays to zero.
    """
    pts = [params.lambda1 + params.xi, params.lambda2 + params.xi, *params.z]
    s = np.ones(len(v), dtype=complex)
    dlog = np.zeros(len(v), dtype=complex)
    for a, va in enumerate(v):
        for p in pts:
            s[a] *= sin(p + va) * sin(p - va)
            dlog[a] += cot(p + va) - cot(p - va)
    return s, dlog


@dataclass
class BetheRootSet:
    kind: int
    roots: tuple
    residual_norm: float
    converged: bool
    params_hash: str = ""
    iterations: int = 0

    @property
    def M(self) -> int:
        return len(self.roots)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "M": self.M,
            "roots": [{"re": float(v.real), "im": float(v.imag)} for v in self.roots],
            "residual_norm": float(self.residual_norm),
            "params_hash": self.params_hash,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BetheRootSet":
        roots = tuple(complex(r["re"], r["im"]) for r in d["roots"])
        if len(roots) != d["M"]:
            raise ValueError("root count does not match M")
        res = float(d["residual_norm"])
        return cls(
            kind=_kind(d["kind"]),
            roots=roots,
            residual_norm=res,
            converged=res < tolerances.get().tol_onshell,
            params_hash=d.get("params_hash", ""),
        )


def make_root_set(kind: int, roots, params) -> BetheRootSet:
    v = _roots_of(roots)
    res = float(np.max(np.abs(ba_residual(kind, v, params)), initial=0.0))
    return BetheRootSet(
        kind=_kind(kind),
        roots=v,
        residual_norm=res,
        converged=res < tolerances.get().tol_onshell,
        params_hash=params.params_hash(),
    )


def dump_root_sets(root_sets: Sequence[BetheRootSet]) -> str:
    """Serialize to the roots-file JSON (a list of root-set objects)."""
    return json.dumps([r.to_dict() for r in root_sets], indent=2, sort_keys=True) + "\n"


def load_root_sets(text: str) -> list[BetheRootSet]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("roots file must hold a JSON list")
    return [BetheRootSet.from_dict(d) for d in data]


def canonical_roots(roots) -> np.ndarray:
    """Representative of the roots modulo pi, sign flips and ordering.

    The equations depend on each root only through cos 2v, and B(v), C(v)
    are pi-periodic and change only by a scalar under v -> -v.
    """
    v = np.asarray(_roots_of(roots), dtype=complex)
    re = np.mod(v.real, np.pi)
    w = re + 1j * v.imag
    flip = re > np.pi / 2
    w = np.where(flip, (np.pi - re) - 1j * v.imag, w)
    edge = np.isclose(w.real, 0.0, atol=1e-12) | np.isclose(w.real, np.pi / 2, atol=1e-12)
    w = np.where(edge & (w.imag < 0), w.real - 1j * w.imag, w)
    # drop round-off imaginary parts so real solutions print and hash as real
    w = np.where(np.abs(w.imag) < 1e-14, w.real + 0j, w)
    return np.sort_complex(w)


def root_distance(a, b) -> float:
    """min over permutations of max per-root distance between canonical forms."""
    ca, cb = canonical_roots(a), canonical_roots(b)
    if len(ca) != len(cb):
        return float("inf")
    if len(ca) <= 7:
        return min(float(np.max(np.abs(ca - cb[list(p)]), initial=0.0)) for p in itertools.permutations(range(len(cb))))
    return float(np.max(np.abs(ca - cb)))


def _admissible(v: np.ndarray, params) -> bool:
    eps = tolerances.get().eps_degenerate * 100
    for a in range(len(v)):
        for b in range(a + 1, len(v)):
            if abs(sin(v[a] - v[b])) < eps or abs(sin(v[a] + v[b])) < eps:
                return False
        if abs(sin(2 * v[a])) < eps:
            return False
    return True


def newton(kind: int, start, params, *, max_iter: int = 200, tol: float | None = None, max_imag: float = 8.0):
    """Damped Newton on the scaled Bethe equations from one start.

    Returns ``(roots or None, iterations, reason)``.
    """
    tol = tolerances.get().tol_onshell if tol is None else tol
    v = np.array(start, dtype=complex)

    def scaled(x):
        s, _ = _scale(x, params)
        return s * ba_residual(kind, x, params)

    try:
        f = scaled(v)
    except PoleError:
        return None, 0, "pole"
    nf = np.linalg.norm(f)
    it = 0
    for it in range(1, max_iter + 1):
        try:
            s, dlog = _scale(v, params)
            raw = ba_residual(kind, v, params)
            jac = s[:, None] * ba_jacobian(kind, v, params) + np.diag(s * dlog * raw)
            step = np.linalg.solve(jac, f)
        except (PoleError, np.linalg.LinAlgError):
            return None, it, "singular"
        t = 1.0
        for _ in range(20):
            cand = v - t * step
            try:
                fc = scaled(cand)
                ok = np.all(np.isfinite(fc)) and np.linalg.norm(fc) < nf
            except PoleError:
                ok = False
            if ok:
                break
            t /= 2
        else:
            return None, it, "stalled"
        v, f, nf = cand, fc, np.linalg.norm(fc)
        if np.max(np.abs(v.imag)) > max_imag:
            return None, it, "escaped"
        try:
            if np.max(np.abs(ba_residual(kind, v, params))) < tol * 1e-2:
                break
        except PoleError:
            return None, it, "pole"
    try:
        res = np.max(np.abs(ba_residual(kind, v, params)))
    except PoleError:
        return None, it, "pole"
    if not res < tol:
        return None, it, "max_iter"
    return v, it, "converged"


def polish(kind: int, roots, params, steps: int = 2) -> np.ndarray:
    """Full (undamped) Newton steps on the raw equations."""
    v = np.array(_roots_of(roots), dtype=complex)
    for _ in range(steps):
        v = v - np.linalg.solve(ba_jacobian(kind, v, params), ba_residual(kind, v, params))
    return v


def start_points(rng, m: int, starts: int) -> list[np.ndarray]:
    re = rng.uniform(0.05, 1.5, size=(starts, m))
    im = rng.uniform(-0.5, 0.5, size=(starts, m))
    return list(re + 1j * im)


def solve_bethe(
    kind: int,
    params,
    seed: int = 0,
    tol: float | None = None,
    *,
    starts: int = 64,
    max_iter: int = 200,
    dedup: float = 1e-6,
    workers: int = 1,
    diagnostics: dict | None = None,
) -> list[BetheRootSet]:
    """Multi-start Newton search for solutions with M = N/2 roots.

    Converged sets are polished, mapped to canonical form and deduplicated.
    Returns an empty list (never raises) when nothing converges; pass a dict
    as ``diagnostics`` to receive outcome counts.
    """
    m = params.n_pairs
    if m < 1:
        raise ValueError("need M >= 1")
    tol = tolerances.get().tol_onshell if tol is None else tol
    rng = np.random.default_rng(seed)
    pts = start_points(rng, m, starts)
    run = lambda x: newton(kind, x, params, max_iter=max_iter, tol=tol)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            outcomes = list(ex.map(run, pts))
    else:
        outcomes = [run(x) for x in pts]
    counts = Counter()
    found: list[BetheRootSet] = []
    for v, it, reason in outcomes:
        counts[reason] += 1
        if v is None:
            continue
        try:
            p = polish(kind, v, params)
            if np.max(np.abs(ba_residual(kind, p, params))) <= np.max(np.abs(ba_residual(kind, v, params))):
                v = p
        except (PoleError, np.linalg.LinAlgError):
            pass
        v = canonical_roots(v)
        if not _admissible(v, params):
            counts["degenerate"] += 1
            continue
        rs = make_root_set(kind, v, params)
        rs.iterations = it
        if not rs.residual_norm < tol:
            counts["lost_on_polish"] += 1
            continue
        if any(root_distance(rs.roots, f.roots) < dedup for f in found):
            counts["duplicate"] += 1
            continue
        found.append(rs)
    found.sort(key=lambda r: tuple((round(x.real, 9), round(x.imag, 9)) for x in r.roots))
    if diagnostics is not None:
        diagnostics.update(counts)
        diagnostics["distinct"] = len(found)
    if not found:
        log.warning("no Bethe solution of kind %d converged: %s", kind, dict(counts))
    return found


# ---------------------------------------------------------------- eigenvalues

def eigenvalue(kind: int, site: int, roots, params, *, reading: str = "lambda") -> complex:
    """Closed-form eigenvalue of H_j on the kind-``kind`` Bethe vector.

    ``reading="lambda"`` sums cot(lambda_l + xi - z_j) over l = 1, 2;
    ``reading="paired"`` uses cot(lambda_l + xi - z_l) instead.
    """
    v = _roots_of(roots)
    zs = params.z
    zj = zs[site - 1]
    xi = params.xi
    lams = (params.lambda1, params.lambda2)
    lk = lams[_kind(kind) - 1]
    e = cot(2 * zj)
    if reading == "lambda":
        e += sum(cot(l + xi - zj) for l in lams)
    elif reading == "paired":
        e += sum(cot(l + xi - zs[i % len(zs)]) for i, l in enumerate(lams))
    else:
        raise ValueError("reading must be 'lambda' or 'paired'")
    e -= params.delta * sin(2 * zj) / (nonzero_sin(lk + xi - zj, "eigenvalue") * nonzero_sin(lk + xi + zj, "eigenvalue"))
    for vm in v:
        e += sin(2 * zj) / (nonzero_sin(vm - zj, "eigenvalue") * nonzero_sin(vm + zj, "eigenvalue"))
    return complex(e)


@dataclass
class EigenRecord:
    site: int
    kind: int
    value: complex
    eigen_residual: float
    rayleigh: complex = 0j
    formula_error: float = 0.0
    alt_formula_error: float = 0.0
    identity_shift: complex = 0j
    extra: dict = field(default_factory=dict)


def eigen_check(kind: int, roots, params, *, gauge: str = "outer") -> list[EigenRecord]:
    """Apply every H_j to the Bethe vector and compare with :func:`eigenvalue`."""
    if params.n_sites > tolerances.get().max_sites:
        raise DimensionCapError(f"N = {params.n_sites} exceeds the dense cap")
    psi = bethe_state(kind, roots, params)
    norm = np.linalg.norm(psi)
    coef = b_coefficient if _kind(kind) == 1 else c_coefficient
    scale = np.linalg.norm(vacuum(kind, params))
    for v in _roots_of(roots):
        scale *= max(abs(coef(v, z, params)) for z in params.z)
    if not norm > 1e-10 * scale:
        raise DegenerateStateError(f"Bethe vector vanishes (|psi| = {norm:.3g})")
    out = []
    for j in range(1, params.n_sites + 1):
        hpsi = gaudin.apply_hamiltonian(j, params, psi, gauge=gauge)
        ray = complex(np.vdot(psi, hpsi) / np.vdot(psi, psi))
        e = eigenvalue(kind, j, roots, params)
        e_alt = eigenvalue(kind, j, roots, params, reading="paired")
        scale = max(abs(e), abs(ray), 1.0)
        out.append(
            EigenRecord(
                site=j,
                kind=_kind(kind),
                value=e,
                eigen_residual=float(np.linalg.norm(hpsi - e * psi) / norm),
                rayleigh=ray,
                formula_error=abs(ray - e) / scale,
                alt_formula_error=abs(ray - e_alt) / max(abs(e_alt), abs(ray), 1.0),
                identity_shift=ray - e,
                extra={"rayleigh_residual": float(np.linalg.norm(hpsi - ray * psi) / norm)},
            )
        )
    return out
