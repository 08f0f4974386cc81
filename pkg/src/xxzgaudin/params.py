"""Model constants shared by every construction."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

from . import tolerances
from .errors import DegeneracyError, SingularGaugeError
from .trig import sin


def _c(x) -> complex:
    return complex(x)


@dataclass(frozen=True)
class ModelParams:
    """Boundary parameters, crossing parameter and inhomogeneities.

    ``xibar`` is derived as ``xi + eta * delta`` so the dual K-matrix reduces
    to the inverse of the reflecting one as ``eta -> 0``.
    """

    lambda1: complex
    lambda2: complex
    xi: complex
    delta: complex
    z: tuple
    eta: complex = 0.1
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "xi", "delta", "eta"):
            object.__setattr__(self, name, _c(getattr(self, name)))
        object.__setattr__(self, "z", tuple(_c(v) for v in self.z))
        if not self.z:
            raise ValueError("at least one site is required")
        if self.check:
            self.validate()

    def validate(self) -> None:
        eps = tolerances.get().eps_degenerate
        if abs(sin(self.lambda1 - self.lambda2)) < eps:
            raise SingularGaugeError("lambda1 and lambda2 coincide mod pi")
        zs = self.z
        for j in range(len(zs)):
            for k in range(j + 1, len(zs)):
                if abs(sin(zs[j] - zs[k])) < eps or abs(sin(zs[j] + zs[k])) < eps:
                    raise DegeneracyError(f"inhomogeneities z_{j + 1}, z_{k + 1} are degenerate")

    @property
    def n_sites(self) -> int:
        return len(self.z)

    @property
    def n_pairs(self) -> int:
        """M = N / 2; only defined for an even number of sites."""
        if self.n_sites % 2:
            raise ValueError(f"N = {self.n_sites} is odd; Bethe states need N = 2M")
        return self.n_sites // 2

    def xibar(self, eta=None) -> complex:
        eta = self.eta if eta is None else complex(eta)
        return self.xi + eta * self.delta

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def with_eta(self, eta) -> "ModelParams":
        return dataclasses.replace(self, eta=complex(eta), check=False)

    def restrict(self, sites: Sequence[int]) -> "ModelParams":
        """Same boundary data on the sub-chain made of ``sites`` (0-based)."""
        return dataclasses.replace(self, z=tuple(self.z[s] for s in sites), check=False)

    def to_dict(self) -> dict:
        def enc(x: complex):
            return [x.real, x.imag]

        return {
            "lambda1": enc(self.lambda1),
            "lambda2": enc(self.lambda2),
            "xi": enc(self.xi),
            "delta": enc(self.delta),
            "eta": enc(self.eta),
            "z": [enc(v) for v in self.z],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        def dec(v):
            return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)

        return cls(
            lambda1=dec(d["lambda1"]),
            lambda2=dec(d["lambda2"]),
            xi=dec(d["xi"]),
            delta=dec(d["delta"]),
            eta=dec(d.get("eta", 0.1)),
            z=tuple(dec(v) for v in d["z"]),
        )

    def params_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


DESK_INSTANCE = dict(lambda1=0.3, lambda2=0.7, xi=0.5, delta=0.2, z=(0.11, 0.23))


def desk_params(**changes) -> ModelParams:
    """The N = 2 instance used throughout the checks."""
    kw = dict(DESK_INSTANCE)
    kw.update(changes)
    return ModelParams(**kw)


def genericity(params) -> float:
    """Smallest |sin| among the combinations the model divides by.

    Covers lambda1 - lambda2 (gauge), lambda_k + xi -+ z_j (K-matrix poles),
    z_j -+ z_k and 2 z_j.
    """
    a = (params.lambda1 + params.xi, params.lambda2 + params.xi)
    vals = [abs(sin(params.lambda1 - params.lambda2))]
    vals += [abs(sin(x + s * z)) for x in a for z in params.z for s in (1, -1)]
    zs = params.z
    for j in range(len(zs)):
        vals.append(abs(sin(2 * zs[j])))
        for k in range(j):
            vals += [abs(sin(zs[j] - zs[k])), abs(sin(zs[j] + zs[k]))]
    return min(vals)


def random_params(
    rng, n_sites: int, *, low: float = 0.1, high: float = 1.4, eta: float = 0.1, margin: float = 0.05
) -> ModelParams:
    """Real parameters drawn uniformly in ``[low, high]``.

    Draws are repeated until the result satisfies the model invariants and
    stays at least ``margin`` (in |sin|) away from every pole and from a
    singular gauge, see :func:`genericity`.
    """
    while True:
        vals = rng.uniform(low, high, size=4 + n_sites)
        try:
            p = ModelParams(
                lambda1=vals[0],
                lambda2=vals[1],
                xi=vals[2],
                delta=vals[3] - 0.75,
                z=tuple(vals[4:]),
                eta=eta,
            )
        except (DegeneracyError, SingularGaugeError):
            continue
        if genericity(p) >= margin:
            return p
