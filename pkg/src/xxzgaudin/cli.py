"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when any check fails, 2 for
usage, configuration or roots-file errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import bethe, suites
from .config import ConfigError, RunConfig, load_config
from .report import VerificationReport

log = logging.getLogger("xxzgaudin")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xxzgaudin", description="Verify the open XXZ Gaudin model numerically.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI-style run configuration")
    common.add_argument("--roots", metavar="PATH", help="roots file (written by solve-bethe, read by the verifiers)")
    common.add_argument("--seed", type=int, help="override the configured rng seed")
    common.add_argument("--out", metavar="PATH", help="append JSON-lines report records to PATH")
    common.add_argument("--quiet", action="store_true", help="suppress the human summary")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in [
        ("check-algebra", "Yang-Baxter, reflection and transfer-matrix identities"),
        ("solve-bethe", "solve the Bethe equations of both kinds and write a roots file"),
        ("verify-eigen", "check Bethe vectors against the Gaudin Hamiltonians"),
        ("verify-scalar", "compare partition functions and scalar products with oracles"),
        ("all", "run every selected suite"),
    ]:
        sub.add_parser(name, parents=[common], help=text)
    return ap


def _load_roots(path: str, cfg: RunConfig) -> list:
    try:
        with open(path, encoding="utf-8") as fh:
            sets = bethe.load_root_sets(fh.read())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read roots file {path}: {exc}") from exc
    try:
        suites.check_params_hash(sets, cfg.params)
    except suites.ParamsMismatchError as exc:
        raise UsageError(str(exc)) from exc
    return sets


def _write_roots(path: str, sets) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(bethe.dump_root_sets(sets))


def _roots_table(sets) -> str:
    lines = ["kind  set  residual    roots"]
    for i, rs in enumerate(sets):
        roots = ", ".join(f"{v.real:+.10f}{v.imag:+.10f}j" for v in rs.roots)
        lines.append(f"{rs.kind:>4}  {i:>3}  {rs.residual_norm:9.2e}   {roots}")
    return "\n".join(lines)


def _solve(cfg: RunConfig, roots_out: str | None, say) -> tuple[VerificationReport, list]:
    diag: dict = {}
    sets = suites.solve_all(cfg, diagnostics=diag)
    rep = suites.bethe_report(cfg, sets, diag)
    if roots_out:
        _write_roots(roots_out, sets)
    say(_roots_table(sets))
    if not sets or any(not any(r.kind == k for r in sets) for k in (1, 2)):
        say("diagnostics: " + json.dumps({str(k): v for k, v in diag.items()}, sort_keys=True))
    return rep, sets


def run(args, cfg: RunConfig) -> list[VerificationReport]:
    say = (lambda *_: None) if args.quiet else print
    roots_path = args.roots or cfg.roots
    reports: list[VerificationReport] = []
    cmd = args.command
    if cmd == "check-algebra":
        reports.append(suites.check_algebra(cfg))
    elif cmd == "solve-bethe":
        reports.append(_solve(cfg, roots_path, say)[0])
    elif cmd == "verify-eigen":
        if not roots_path:
            raise UsageError("verify-eigen needs --roots")
        reports.append(suites.verify_eigen(cfg, _load_roots(roots_path, cfg)))
    elif cmd == "verify-scalar":
        if roots_path:
            sets = _load_roots(roots_path, cfg)
        else:
            sets = suites.solve_all(cfg)
        reports.append(suites.verify_scalar(cfg, sets))
    else:
        sel = cfg.suites
        if "algebra" in sel:
            reports.append(suites.check_algebra(cfg))
        if "gaudin" in sel:
            reports.append(suites.check_gaudin(cfg))
        sets = None
        if sel & {"bethe", "eigen", "scalar"}:
            rep, sets = _solve(cfg, roots_path, say if "bethe" in sel else (lambda *_: None))
            if "bethe" in sel:
                reports.append(rep)
        if "eigen" in sel:
            reports.append(suites.verify_eigen(cfg, sets))
        if "scalar" in sel:
            reports.append(suites.verify_scalar(cfg, sets))
    for rep in reports:
        say(rep.summary())
    return reports


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.rng_seed = args.seed
        if args.out:
            cfg.report = args.out
        reports = run(args, cfg)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.report:
        for rep in reports:
            rep.append_to(cfg.report)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
