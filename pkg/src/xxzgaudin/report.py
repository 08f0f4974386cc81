"""Verification records and JSON-lines reports."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .linalg import ILL_CONDITIONED

PASS, FAIL, ILL = "pass", "fail", "ill-conditioned"


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def digest(inputs) -> str:
    text = json.dumps(_jsonable(inputs), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def verdict(value: float, tolerance: float, condition: float = 1.0) -> str:
    if value <= tolerance:
        return PASS
    if condition > ILL_CONDITIONED:
        return ILL
    return FAIL


@dataclass
class CheckRecord:
    suite: str
    check_id: str
    inputs_digest: str
    value: float
    tolerance: float
    verdict: str
    seed: int
    params_hash: str
    wall_time: float | None = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(_jsonable(asdict(self)), sort_keys=True)


@dataclass
class VerificationReport:
    suite: str
    records: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.verdict != FAIL for r in self.records)

    def counts(self) -> dict:
        out = {PASS: 0, FAIL: 0, ILL: 0}
        for r in self.records:
            out[r.verdict] += 1
        return out

    def failures(self) -> list:
        return [r for r in self.records if r.verdict == FAIL]

    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    def append_to(self, path) -> None:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())

    def summary(self) -> str:
        c = self.counts()
        lines = [f"{self.suite}: {c[PASS]} pass, {c[FAIL]} fail, {c[ILL]} ill-conditioned"]
        for r in self.records:
            if r.verdict != PASS:
                lines.append(f"  {r.verdict.upper():<15} {r.check_id}  value={r.value:.3e}  tol={r.tolerance:.1e}")
        return "\n".join(lines)


def read_jsonl(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
