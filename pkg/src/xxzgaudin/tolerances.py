"""Package-wide numerical thresholds.

The active set is a module-level value so that deeply nested formula
evaluations pick up overrides made by the CLI without threading a
tolerance object through every call.
"""
from __future__ import annotations

import contextlib
import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    eps_degenerate: float = 1e-8
    eps_sing: float = 1e-10
    tol_onshell: float = 1e-10
    tol_identity: float = 1e-12
    fd_step: float = 1e-3
    fd_tol: float = 1e-6
    max_sites: int = 12

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"tolerance {f.name} must be positive")


_active = Tolerances()


def get() -> Tolerances:
    return _active


def set_active(tol: Tolerances) -> None:
    global _active
    _active = tol


@contextlib.contextmanager
def override(**changes):
    """Temporarily replace some thresholds."""
    global _active
    old = _active
    _active = dataclasses.replace(old, **changes)
    try:
        yield _active
    finally:
        _active = old
