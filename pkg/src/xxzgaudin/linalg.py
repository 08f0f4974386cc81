"""LU-based determinant and inverse with condition estimates."""
from __future__ import annotations

import logging

import numpy as np
import scipy.linalg

log = logging.getLogger(__name__)

ILL_CONDITIONED = 1e10


def lu_det(a: np.ndarray) -> tuple[complex, float]:
    """Determinant via LU with partial pivoting, plus the 1-norm condition number."""
    a = np.asarray(a, dtype=complex)
    if a.shape == (0, 0):
        return 1.0 + 0j, 1.0
    lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    sign = (-1) ** int(np.sum(piv != np.arange(len(piv))))
    det = complex(sign * np.prod(np.diag(lu)))
    cond = condition_estimate(a)
    return det, cond


def condition_estimate(a: np.ndarray) -> float:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 1.0
    with np.errstate(all="ignore"):
        c = float(np.abs(np.linalg.cond(a, 1)))
    if not np.isfinite(c):
        return float("inf")
    return max(c, 1.0)


def lu_inverse(a: np.ndarray, *, warn_above: float = 1e8, what: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    lu_piv = scipy.linalg.lu_factor(a)
    cond = condition_estimate(a)
    log.debug("inverting %s: cond_1 = %.3g", what, cond)
    if cond > warn_above:
        log.warning("%s is ill-conditioned (cond_1 = %.3g)", what, cond)
    return scipy.linalg.lu_solve(lu_piv, np.eye(a.shape[0], dtype=complex))


def rel_err(a, b) -> float:
    """|a - b| / max(|a|, |b|, 1), elementwise max for arrays."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    scale = max(float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)), 1.0)
    return float(np.max(np.abs(a - b), initial=0.0)) / scale


def rel_fro(a, b) -> float:
    """Frobenius distance relative to the larger Frobenius norm."""
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(na, nb, 1e-300))
