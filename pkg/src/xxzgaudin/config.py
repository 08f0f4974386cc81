"""Run configuration read from an INI-style file.

Sections are ``model``, ``tolerances``, ``solver``, ``suites`` and
``output``.  Unknown sections or keys are errors so that a misspelled
tolerance cannot pass silently.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field

from .params import ModelParams, desk_params
from .tolerances import Tolerances

SUITES = ("algebra", "gaudin", "bethe", "eigen", "scalar")


class ConfigError(ValueError):
    pass


def _ints(text: str) -> tuple:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _complexes(text: str) -> tuple:
    return tuple(complex(x.replace(" ", "")) for x in text.split(","))


@dataclass
class RunConfig:
    params: ModelParams = field(default_factory=desk_params)
    tolerances: Tolerances = field(default_factory=Tolerances)
    starts: int = 64
    max_iter: int = 200
    seeds: int = 1
    rng_seed: int = 0
    suites: frozenset = frozenset(SUITES)
    draws: int = 100
    chain_sizes: tuple = (2, 4, 6)
    gaudin_sizes: tuple = (2, 4)
    partition_sizes: tuple = (1, 2, 3, 4, 6)
    partition_draws: int = 5
    report: str | None = None
    roots: str | None = None
    record_wall_time: bool = False

    def validate(self) -> "RunConfig":
        if not self.suites:
            raise ConfigError("suite selection is empty")
        if self.params.n_sites % 2:
            raise ConfigError("the number of sites must be even")
        for name in ("starts", "max_iter", "seeds", "draws", "partition_draws"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        return self


_MODEL = {"lambda1", "lambda2", "xi", "delta", "z", "eta"}
_TOL = {f.name for f in dataclasses.fields(Tolerances)}
_SOLVER = {"starts", "max_iter", "seeds", "rng_seed"}
_SUITE_KEYS = set(SUITES) | {"draws", "chain_sizes", "gaudin_sizes", "partition_sizes", "partition_draws"}
_OUTPUT = {"report", "roots", "record_wall_time"}
_SECTIONS = {"model": _MODEL, "tolerances": _TOL, "solver": _SOLVER, "suites": _SUITE_KEYS, "output": _OUTPUT}


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        extra = set(cp[sec]) - _SECTIONS[sec]
        if extra:
            raise ConfigError(f"unknown key(s) in [{sec}]: {', '.join(sorted(extra))}")
    cfg = RunConfig()
    try:
        if cp.has_section("model"):
            m = cp["model"]
            base = desk_params()
            cfg.params = ModelParams(
                lambda1=complex(m.get("lambda1", str(base.lambda1))),
                lambda2=complex(m.get("lambda2", str(base.lambda2))),
                xi=complex(m.get("xi", str(base.xi))),
                delta=complex(m.get("delta", str(base.delta))),
                z=_complexes(m["z"]) if "z" in m else base.z,
                eta=complex(m.get("eta", str(base.eta))),
            )
        if cp.has_section("tolerances"):
            t = cp["tolerances"]
            changes = {k: (int(v) if k == "max_sites" else float(v)) for k, v in t.items()}
            cfg.tolerances = dataclasses.replace(cfg.tolerances, **changes)
        if cp.has_section("solver"):
            for k, v in cp["solver"].items():
                setattr(cfg, k, int(v))
        if cp.has_section("suites"):
            s = cp["suites"]
            chosen = {name for name in SUITES if s.getboolean(name, fallback=True)}
            cfg.suites = frozenset(chosen)
            for k in ("draws", "partition_draws"):
                if k in s:
                    setattr(cfg, k, int(s[k]))
            for k in ("chain_sizes", "gaudin_sizes", "partition_sizes"):
                if k in s:
                    setattr(cfg, k, _ints(s[k]))
        if cp.has_section("output"):
            o = cp["output"]
            cfg.report = o.get("report") or None
            cfg.roots = o.get("roots") or None
            cfg.record_wall_time = o.getboolean("record_wall_time", fallback=False)
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig().validate()
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
