"""Command-line driver: ``verify <suite> [flags]``.

Configuration is resolved in three layers: built-in defaults, a key=value
config file (``--config``), then explicit flags.  The default seed comes
from ``CP1HQE_SEED`` when set.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .bilinear import CutOverflow
from .series import SeriesError
from .suites import INTERPRETATIONS, REPORT_SCHEMA, SUITES, RunConfig

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
SEED_ENV = "CP1HQE_SEED"
INT_KEYS = ("seed", "points", "K", "dmax", "order", "m", "n", "jobs")


class UsageError(Exception):
    pass


def read_config(path: str) -> dict:
    """Parse a key=value file; blank lines and ``#`` comments are ignored."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in INT_KEYS + ("output",):
            raise UsageError(f"{path}:{no}: expected one of {', '.join(INT_KEYS + ('output',))} as key=value")
        if key == "output":
            out[key] = value
        else:
            try:
                out[key] = int(value)
            except ValueError:
                raise UsageError(f"{path}:{no}: {key} must be an integer") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="verify", description="Exact verification suites for equivariant CP^1.")
    p.add_argument("suite", choices=list(SUITES))
    p.add_argument("--K", type=int, help="Getzler row bound (default 6)")
    p.add_argument("--dmax", type=int, help="Q-degree cut of the S-matrix (default 3)")
    p.add_argument("--order", type=int, help="required z-order of unitarity (default 6)")
    p.add_argument("--m", type=int, help="restrict HQE checks to this m")
    p.add_argument("--n", type=int, help="restrict HQE checks to this n")
    p.add_argument("--seed", type=int, help=f"random seed (default ${SEED_ENV} or 0)")
    p.add_argument("--points", type=int, help="random parameter points (default 5)")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--output", help="report path (default: stdout)")
    p.add_argument("--version", action="version", version=__version__)
    return p


def resolve(args: argparse.Namespace) -> tuple[RunConfig, dict]:
    settings = {}
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            settings["seed"] = int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    if args.config:
        settings.update(read_config(args.config))
    for key in INT_KEYS + ("output",):
        if getattr(args, key) is not None:
            settings[key] = getattr(args, key)
    kw = {k: settings[k] for k in ("seed", "points", "K", "dmax", "order") if k in settings}
    if "m" in settings:
        kw["ms"] = (settings["m"],)
    if "n" in settings:
        kw["ns"] = (settings["n"],)
    if settings.get("jobs", 1) < 1:
        raise UsageError("jobs must be positive")
    try:
        cfg = RunConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cfg, {"jobs": settings.get("jobs", 1), "output": settings.get("output")}


def _run_one(name_index: tuple[str, int], cfg: RunConfig) -> list:
    name, i = name_index
    return [c.to_json() for c in SUITES[name][i](cfg)]


def run(suite: str, cfg: RunConfig, jobs: int = 1) -> dict:
    tasks = [(suite, i) for i in range(len(SUITES[suite]))]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks, [cfg] * len(tasks)))
    else:
        results = [_run_one(t, cfg) for t in tasks]
    checks = [c for r in results for c in r]
    failed = sum(c["status"] != "pass" for c in checks)
    return {
        "schema": REPORT_SCHEMA,
        "version": __version__,
        "suite": suite,
        "config": {"seed": cfg.seed, "points": cfg.points, "K": cfg.K, "d_max": cfg.dmax,
                   "order": cfg.order, "m": list(cfg.ms), "n": list(cfg.ns)},
        "metadata": {"open_questions": [{"id": k, "interpretation": v} for k, v in INTERPRETATIONS.items()]},
        "summary": {"total": len(checks), "passed": len(checks) - failed, "failed": failed,
                    "status": "pass" if not failed else "fail"},
        "checks": checks,
    }


def main(argv: list | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        cfg, extra = resolve(args)
    except UsageError as exc:
        print(f"verify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run(args.suite, cfg, extra["jobs"])
    except (CutOverflow, SeriesError) as exc:
        print(f"verify: internal cut overflow: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - any crash is an internal error, not a failed check
        print(f"verify: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if extra["output"]:
        with open(extra["output"], "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    s = report["summary"]
    print(f"{args.suite}: {s['passed']}/{s['total']} checks passed", file=sys.stderr)
    return EXIT_PASS if s["status"] == "pass" else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
