"""Complex trigonometry with pole guards."""
from __future__ import annotations

import cmath

from . import tolerances
from .errors import PoleError


def sin(x) -> complex:
    return cmath.sin(complex(x))


def cos(x) -> complex:
    return cmath.cos(complex(x))


def cot(x) -> complex:
    return cos(x) / nonzero_sin(x, "cot")


def expi(x) -> complex:
    """exp(i x) for complex x."""
    return cmath.exp(1j * complex(x))


def nonzero_sin(x, what: str = "") -> complex:
    """sin(x), raising :class:`PoleError` when it is used as a vanishing denominator."""
    s = cmath.sin(complex(x))
    if abs(s) < tolerances.get().eps_degenerate:
        label = f" in {what}" if what else ""
        raise PoleError(f"sin({complex(x):.6g}) = {abs(s):.3g} is a pole{label}")
    return s
