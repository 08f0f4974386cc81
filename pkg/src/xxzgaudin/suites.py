"""Verification suites driven by the command line.

Every check is a zero-argument callable returning a dict with ``value``,
``tolerance`` and optionally ``detail``, ``condition`` and ``inputs``.
Randomness comes from generators seeded by ``(rng_seed, suite, index)``,
so a record can be replayed from its seed and check id alone.  Checks run
in a thread pool and the report is ordered by check id.
"""
from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from . import bethe, gaudin, scalar, tolerances, vertex
from .errors import GaudinError
from .params import random_params
from .report import FAIL, CheckRecord, VerificationReport, digest, verdict

THREADS_ENV = "XXZGAUDIN_THREADS"

ALGEBRA_TOL = 1e-12
COMMUTE_TOL = 1e-11
SLOPE_TOL = 0.1
HAM_TOL = 1e-5
HAM_COMMUTE_TOL = 1e-9
EIGEN_TOL = 1e-8
PARTITION_TOL = {"small": 1e-10, "large": 1e-8}
SCALAR_TOL = 1e-8
G_TOL = 1e-10
CONTROL_FACTOR = 1e3
POLE_MARGIN = 0.2

_SUITE_CODES = {"algebra": 1, "gaudin": 2, "bethe": 3, "eigen": 4, "scalar": 5}


class ParamsMismatchError(ValueError):
    """Roots file was produced for different model parameters."""


def thread_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def rng_for(seed: int, suite: str, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, _SUITE_CODES[suite], index])


def _spectral(rng, size=None, imag=0.3):
    return rng.uniform(0.1, 1.4, size) + 1j * rng.uniform(-imag, imag, size)


def _active_tolerances(tol_set):
    return tolerances.override(**{f: getattr(tol_set, f) for f in tol_set.__dataclass_fields__})


def run_checks(suite: str, checks: list[tuple[str, Callable, str]], cfg) -> VerificationReport:
    """Evaluate ``(check_id, fn, params_hash)`` triples in a pool."""
    tol_set = cfg.tolerances

    def one(item):
        cid, fn, phash = item
        t0 = time.perf_counter()
        try:
            out = fn()
        except (GaudinError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            out = {"value": float("inf"), "tolerance": 0.0, "detail": {"error": f"{type(exc).__name__}: {exc}"}}
        wall = time.perf_counter() - t0
        value = float(out["value"])
        if not np.isfinite(value):
            value = float("inf")
        return CheckRecord(
            suite=suite,
            check_id=cid,
            inputs_digest=digest(out.get("inputs", cid)),
            value=value,
            tolerance=float(out["tolerance"]),
            verdict=verdict(value, out["tolerance"], out.get("condition", 1.0)),
            seed=cfg.rng_seed,
            params_hash=out.get("params_hash", phash),
            wall_time=round(wall, 6) if cfg.record_wall_time else None,
            detail=out.get("detail", {}),
        )

    workers = min(thread_count(), max(len(checks), 1))
    # thresholds are module state, so they are set once around the whole pool
    with _active_tolerances(tol_set):
        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                records = list(ex.map(one, checks))
        else:
            records = [one(c) for c in checks]
    records.sort(key=lambda r: r.check_id)
    return VerificationReport(suite, records)


# ------------------------------------------------------------------ algebra

def algebra_checks(cfg) -> list:
    seed = cfg.rng_seed
    checks = []

    def identity(i):
        rng = rng_for(seed, "algebra", i)
        p = random_params(rng, 2)
        u = _spectral(rng, 3)
        eta = complex(p.eta)
        res = {
            "qybe": vertex.check_qybe(u[0], u[1], u[2], eta),
            "unitarity": vertex.check_unitarity(u[0], eta),
            "re": vertex.check_re(u[0], u[1], p),
            "dual_re": vertex.check_dual_re(u[0], u[1], p),
        }
        return p, u, res

    # each draw feeds four checks; cache so the draw is built once
    cache: dict = {}

    def draw(i):
        if i not in cache:
            cache[i] = identity(i)
        return cache[i]

    for i in range(cfg.draws):
        for name in ("qybe", "unitarity", "re", "dual_re"):
            def fn(i=i, name=name):
                p, u, res = draw(i)
                return {
                    "value": res[name],
                    "tolerance": ALGEBRA_TOL,
                    "inputs": [name, u, p.to_dict()],
                    "params_hash": p.params_hash(),
                }

            checks.append((f"{name}/{i:04d}", fn, ""))

    n_limit = min(cfg.draws, 10)
    for i in range(n_limit):
        def limit(i=i):
            rng = rng_for(seed, "algebra", 10_000 + i)
            # the linear regime needs eta well below the distance to the K+ poles
            while True:
                p = random_params(rng, 2)
                u = complex(_spectral(rng))
                a = p.xi + np.array([p.lambda1, p.lambda2]) - u
                if np.min(np.abs(np.sin(a))) > POLE_MARGIN:
                    break
            etas = np.array([1e-2, 1e-3, 1e-4])
            d = np.array([vertex.classical_limit_defect(u, p, e) for e in etas])
            slope = float(np.polyfit(np.log(etas), np.log(d), 1)[0])
            return {
                "value": abs(slope - 1.0),
                "tolerance": SLOPE_TOL,
                "inputs": [u, p.to_dict()],
                "params_hash": p.params_hash(),
                "detail": {"slope": slope, "defects": d.tolist()},
            }

        checks.append((f"classical_limit/{i:04d}", limit, ""))

    for n in cfg.chain_sizes:
        for i in range(3):
            def comm(n=n, i=i):
                rng = rng_for(seed, "algebra", 20_000 + 100 * n + i)
                p = random_params(rng, n)
                u, v = _spectral(rng, 2)
                return {
                    "value": vertex.transfer_commutator(u, v, p),
                    "tolerance": COMMUTE_TOL,
                    "inputs": [u, v, p.to_dict()],
                    "params_hash": p.params_hash(),
                }

            checks.append((f"transfer_commute/N{n:02d}/{i:02d}", comm, ""))
    return checks


def check_algebra(cfg) -> VerificationReport:
    return run_checks("algebra", algebra_checks(cfg), cfg)


# ------------------------------------------------------------------- gaudin

def gaudin_checks(cfg) -> list:
    seed = cfg.rng_seed
    checks = []
    for n in cfg.gaudin_sizes:
        for i in range(2):
            rng = rng_for(seed, "gaudin", 100 * n + i)
            p = random_params(rng, n)
            ph = p.params_hash()
            for j in range(1, n + 1):
                def ham(p=p, j=j):
                    a = gaudin.hamiltonian_direct(j, p)
                    b = gaudin.hamiltonian_from_transfer(j, p)
                    sh = gaudin.identity_shift(a, b)
                    return {
                        "value": sh["rel_distance"],
                        "tolerance": HAM_TOL,
                        "inputs": ["ham", j, p.to_dict()],
                        "detail": sh,
                    }

                checks.append((f"hamiltonian/N{n:02d}/{i:02d}/H{j:02d}", ham, ph))

            def comm(p=p):
                return {
                    "value": gaudin.gaudin_set(p).max_commutator(),
                    "tolerance": HAM_COMMUTE_TOL,
                    "inputs": ["commute", p.to_dict()],
                }

            checks.append((f"commute/N{n:02d}/{i:02d}", comm, ph))
    return checks


def check_gaudin(cfg) -> VerificationReport:
    return run_checks("gaudin", gaudin_checks(cfg), cfg)


# -------------------------------------------------------------------- bethe

def solve_all(cfg, params=None, diagnostics: dict | None = None) -> list[bethe.BetheRootSet]:
    """Root sets of both kinds, merged over ``cfg.seeds`` seeds."""
    params = cfg.params if params is None else params
    out = []
    with _active_tolerances(cfg.tolerances):
        for kind in (1, 2):
            found: list[bethe.BetheRootSet] = []
            diag: dict = {}
            for s in range(cfg.seeds):
                sets = bethe.solve_bethe(
                    kind, params, seed=cfg.rng_seed + s, starts=cfg.starts, max_iter=cfg.max_iter, diagnostics=diag
                )
                for rs in sets:
                    if not any(bethe.root_distance(rs.roots, f.roots) < 1e-6 for f in found):
                        found.append(rs)
            found.sort(key=lambda r: tuple((round(x.real, 9), round(x.imag, 9)) for x in r.roots))
            if diagnostics is not None:
                diagnostics[kind] = dict(diag)
            out.extend(found)
    return out


def bethe_report(cfg, root_sets, diagnostics) -> VerificationReport:
    ph = cfg.params.params_hash()
    tol = cfg.tolerances.tol_onshell
    checks = []
    for kind in (1, 2):
        sets = [r for r in root_sets if r.kind == kind]

        def found(kind=kind, sets=sets):
            return {
                "value": 0.0 if sets else 1.0,
                "tolerance": 0.0,
                "inputs": ["found", kind],
                "detail": {"root_sets": len(sets), "outcomes": diagnostics.get(kind, {})},
            }

        checks.append((f"kind{kind}/found", found, ph))
        for i, rs in enumerate(sets):
            def resid(rs=rs):
                r = float(np.max(np.abs(bethe.ba_residual(rs.kind, rs.roots, cfg.params))))
                return {"value": r, "tolerance": tol, "inputs": rs.to_dict(), "detail": {"roots": list(rs.roots)}}

            checks.append((f"kind{kind}/set{i:03d}/residual", resid, ph))
    return run_checks("bethe", checks, cfg)


def check_params_hash(root_sets, params) -> None:
    want = params.params_hash()
    for rs in root_sets:
        if rs.params_hash != want:
            raise ParamsMismatchError(f"roots were solved for params {rs.params_hash}, config has {want}")


# -------------------------------------------------------------------- eigen

def _ed_distance(kind, j, value, p) -> float:
    h = gaudin.hamiltonian_direct(j, p)
    ev = np.linalg.eigvals(h)
    return float(np.min(np.abs(ev - value)) / max(abs(value), 1.0))


def eigen_checks(cfg, root_sets) -> list:
    p = cfg.params
    ph = p.params_hash()
    checks = []
    cache: dict = {}

    def records(idx, rs):
        if idx not in cache:
            cache[idx] = bethe.eigen_check(rs.kind, rs.roots, p)
        return cache[idx]

    for idx, rs in enumerate(root_sets):
        tag = f"kind{rs.kind}/set{idx:03d}"

        def onshell(rs=rs):
            r = float(np.max(np.abs(bethe.ba_residual(rs.kind, rs.roots, p))))
            return {"value": r, "tolerance": cfg.tolerances.tol_onshell, "inputs": rs.to_dict()}

        checks.append((f"{tag}/onshell", onshell, ph))
        for j in range(1, p.n_sites + 1):
            def eig(idx=idx, rs=rs, j=j):
                rec = records(idx, rs)[j - 1]
                reading = "lambda" if rec.formula_error <= rec.alt_formula_error else "paired"
                return {
                    "value": rec.eigen_residual,
                    "tolerance": EIGEN_TOL,
                    "inputs": [rs.to_dict(), j],
                    "detail": {
                        "eigenvalue": rec.value,
                        "rayleigh": rec.rayleigh,
                        "formula_error": rec.formula_error,
                        "alt_formula_error": rec.alt_formula_error,
                        "identity_shift": rec.identity_shift,
                        "reading": reading,
                        "raw_vs_shift": {
                            "raw": rec.formula_error,
                            "after_shift": rec.extra["rayleigh_residual"],
                        },
                    },
                }

            checks.append((f"{tag}/H{j:02d}/eigen", eig, ph))
            if p.n_sites <= 6:
                def ed(idx=idx, rs=rs, j=j):
                    rec = records(idx, rs)[j - 1]
                    return {
                        "value": _ed_distance(rs.kind, j, rec.value, p),
                        "tolerance": EIGEN_TOL,
                        "inputs": [rs.to_dict(), j, "ed"],
                    }

                checks.append((f"{tag}/H{j:02d}/spectrum", ed, ph))
    return checks


def verify_eigen(cfg, root_sets) -> VerificationReport:
    check_params_hash(root_sets, cfg.params)
    return run_checks("eigen", eigen_checks(cfg, root_sets), cfg)


# ------------------------------------------------------------------- scalar

def _rel(a, b) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1.0)


def _worst(values) -> float:
    return max(_rel(a, b) for a, b in itertools.combinations(values, 2))


def partition_check(kind: int, n: int, rng):
    p = random_params(rng, n)
    ub = _spectral(rng, n)
    det = scalar.partition_det(kind, ub, p)
    rec = scalar.partition_recursive(kind, ub, p).value
    bf = scalar.partition_bruteforce(kind, ub, p).value
    tol = PARTITION_TOL["small"] if n <= 4 else PARTITION_TOL["large"]
    return {
        "value": _worst([det.value, rec, bf]),
        "tolerance": tol,
        "condition": det.condition_estimate,
        "inputs": [kind, list(ub), p.to_dict()],
        "params_hash": p.params_hash(),
        "detail": {"determinant": det.value, "recursion": rec, "bruteforce": bf, "condition": det.condition_estimate},
    }


def s12_check(kind: int, m: int, rng, form: str):
    p = random_params(rng, 2 * m)
    us, vs = _spectral(rng, m), _spectral(rng, m)
    det_fn = scalar.s12 if kind == 1 else scalar.s21
    bf_fn = scalar.s12_bruteforce if kind == 1 else scalar.s21_bruteforce
    det = det_fn(us, vs, p)
    oracle = bf_fn(us, vs, p, form=form).value
    # the gauged contraction carries round-off from the gauge transformations
    tol = PARTITION_TOL["small"] if form == "tilde" else SCALAR_TOL
    return {
        "value": _rel(det.value, oracle),
        "tolerance": tol,
        "condition": det.condition_estimate,
        "inputs": [kind, form, list(us), list(vs), p.to_dict()],
        "params_hash": p.params_hash(),
        "detail": {"determinant": det.value, form: oracle},
    }


def onshell_compare(kind: int, us, roots, p) -> dict:
    det_fn = scalar.s11_det if kind == 1 else scalar.s22_det
    bf_fn = scalar.s11_bruteforce if kind == 1 else scalar.s22_bruteforce
    det = det_fn(us, roots, p, require_onshell=False)
    tilde = bf_fn(us, roots, p).value
    gauged = bf_fn(us, roots, p, form="gauged").value
    ratio = det.value / tilde if abs(tilde) > 0 else complex("nan")
    return {
        "determinant": det.value,
        "tilde": tilde,
        "gauged": gauged,
        "error": _worst([det.value, tilde, gauged]),
        "sign_ratio": ratio,
        "condition": det.condition_estimate,
    }


def scalar_instances(cfg, root_sets) -> list:
    """(label, params, root sets) used for the on-shell comparisons."""
    out = [("config", cfg.params, list(root_sets))]
    if cfg.params.n_sites != 4:
        rng = rng_for(cfg.rng_seed, "scalar", 90_000)
        p4 = random_params(rng, 4)
        out.append(("random4", p4, solve_all(cfg, p4)))
    return out


def scalar_checks(cfg, root_sets) -> list:
    seed = cfg.rng_seed
    cap = cfg.tolerances.max_sites
    checks = []
    for kind in (1, 2):
        for n in cfg.partition_sizes:
            if n > cap:
                continue
            for i in range(cfg.partition_draws):
                def part(kind=kind, n=n, i=i):
                    return partition_check(kind, n, rng_for(seed, "scalar", 1000 * kind + 100 * n + i))

                checks.append((f"partition{kind}/N{n:02d}/{i:02d}", part, ""))
        for m in (1, 2):
            for i in range(3):
                for form in ("tilde", "gauged"):
                    def s12c(kind=kind, m=m, i=i, form=form):
                        return s12_check(kind, m, rng_for(seed, "scalar", 10_000 + 1000 * kind + 100 * m + i), form)

                    name = "s12" if kind == 1 else "s21"
                    checks.append((f"{name}/M{m}/{i:02d}/{form}", s12c, ""))

    for label, p, sets in scalar_instances(cfg, root_sets):
        if p.n_sites > cap:
            continue
        ph = p.params_hash()
        for kind in (1, 2):
            ks = [r for r in sets if r.kind == kind]
            name = "s11" if kind == 1 else "s22"
            if not ks:
                def missing(kind=kind):
                    return {"value": 1.0, "tolerance": 0.0, "detail": {"error": "no on-shell roots"}}

                checks.append((f"{name}/{label}/missing", missing, ph))
                continue
            for si, rs in enumerate(ks[:2]):
                for i in range(2):
                    def onshell(kind=kind, rs=rs, p=p, si=si, i=i, label=label):
                        rng = rng_for(seed, "scalar", 20_000 + 1000 * kind + 10 * si + i + (500 if label != "config" else 0))
                        us = _spectral(rng, rs.M)
                        scalar._require_onshell(kind, rs.roots, p)
                        c = onshell_compare(kind, us, rs.roots, p)
                        return {
                            "value": c["error"],
                            "tolerance": SCALAR_TOL,
                            "condition": c["condition"],
                            "inputs": [name, list(us), rs.to_dict()],
                            "detail": c,
                        }

                    checks.append((f"{name}/{label}/set{si:02d}/{i:02d}", onshell, ph))

            rs0 = ks[0]

            def control(kind=kind, rs=rs0, p=p, label=label):
                rng = rng_for(seed, "scalar", 30_000 + kind + (500 if label != "config" else 0))
                us = _spectral(rng, rs.M)
                good = onshell_compare(kind, us, rs.roots, p)["error"]
                bad_roots = np.array(rs.roots)
                bad_roots[0] += 1e-3
                bad = onshell_compare(kind, us, bad_roots, p)["error"]
                # passes when the off-shell error exceeds the on-shell one by the required factor
                ratio = max(good, 1e-16) / bad
                return {
                    "value": ratio,
                    "tolerance": 1.0 / CONTROL_FACTOR,
                    "inputs": [name, "control", list(us), rs.to_dict()],
                    "detail": {"onshell_error": good, "perturbed_error": bad, "degradation": bad / max(good, 1e-16)},
                }

            checks.append((f"{name}/{label}/control", control, ph))

        k1 = [r for r in sets if r.kind == 1]
        if k1 and k1[0].M <= 2:
            checks.extend(g_checks(seed, label, p, k1[0]))
    return checks


def g_checks(seed, label, p, rs) -> list:
    ph = p.params_hash()
    m, n = rs.M, p.n_sites
    checks = []
    rng = rng_for(seed, "scalar", 40_000 + (500 if label != "config" else 0))
    us = list(_spectral(rng, m))
    for i in range(0, m + 1):
        for sites in itertools.combinations(range(1, n + 1), m - i):
            def g(i=i, sites=sites):
                direct = scalar.intermediate_g(i, us[:i], sites, rs.roots, p)
                rec = scalar.intermediate_g_recursive(i, us[:i], sites, rs.roots, p)
                via_det = scalar.intermediate_g_recursive(i, us[:i], sites, rs.roots, p, base="determinant")
                vals = [direct, rec, via_det]
                detail = {"direct": direct, "recursive": rec, "recursive_det_base": via_det}
                if i == m:
                    s11 = scalar.s11_det(us, rs.roots, p, require_onshell=False).value
                    vals.append(s11)
                    detail["s11_det"] = s11
                return {
                    "value": _worst(vals),
                    "tolerance": G_TOL,
                    "inputs": ["G", i, list(sites), us[:i], rs.to_dict()],
                    "detail": detail,
                }

            tag = "-".join(str(s) for s in sites) or "none"
            checks.append((f"G/{label}/i{i}/{tag}", g, ph))
    return checks


def verify_scalar(cfg, root_sets) -> VerificationReport:
    check_params_hash(root_sets, cfg.params)
    return run_checks("scalar", scalar_checks(cfg, root_sets), cfg)


__all__ = [
    "ParamsMismatchError",
    "thread_count",
    "rng_for",
    "run_checks",
    "check_algebra",
    "check_gaudin",
    "solve_all",
    "bethe_report",
    "check_params_hash",
    "verify_eigen",
    "verify_scalar",
    "FAIL",
]
