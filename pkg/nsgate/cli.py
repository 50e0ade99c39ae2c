"""Command line: ``python -m nsgate {verify,gate,sweep,slope,serve}``.

Exit status: 0 success, 1 verification failure, 2 configuration error, 3 integrator
convergence failure.
"""

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from .config import get_settings, load_experiment_config
from .errors import (
    ConfigError,
    ConvergenceError,
    InsufficientDataError,
    NsgateError,
    StructureViolationError,
    VerificationError,
)
from .experiments.battery import run_verification_battery
from .experiments.fidelity import fit_small_g_slope, gate_fidelity_experiment, read_curve_csv, write_curve_csv
from .gates.synthesis import simulate_target
from .metrics import GATE_RUNS_TOTAL
from .storage.audit import record_audit
from .storage.db import DB

logger = logging.getLogger("nsgate.cli")

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3


def _emit(payload: Dict[str, Any]) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=True, default=str)
    sys.stdout.write("\n")


def _window(raw: str) -> Tuple[float, float]:
    parts = raw.split(",")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"--window must be lo,hi, got {raw!r}") from exc
    if not 0 < lo < hi:
        raise ConfigError(f"--window needs 0 < lo < hi, got {raw!r}")
    return lo, hi


def cmd_verify(args: argparse.Namespace, db: Optional[DB]) -> int:
    settings = get_settings()
    seed = args.seed
    if seed is None:
        seed = load_experiment_config(args.config).seed if args.config else settings.seed
    steps = settings.battery_steps if args.steps is None else args.steps
    run_id = db.start_run("verify", {"seed": seed, "steps": steps}) if db else None
    report = run_verification_battery(seed=seed, steps=steps)
    _emit(report.to_mapping())
    if db and run_id is not None:
        db.finish_run(run_id, "passed" if report.passed else "failed", {"failed": [c.name for c in report.failed()]})
    if not report.passed:
        logger.error("%d verification check(s) failed", len(report.failed()))
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_gate(args: argparse.Namespace, db: Optional[DB]) -> int:
    GATE_RUNS_TOTAL.inc()
    simulation = simulate_target(args.target, nf_index=args.nf_index)
    body = simulation.to_mapping()
    if db:
        run_id = db.start_run("gate", {"target": args.target, "nf_index": args.nf_index})
        db.finish_run(run_id, "ok", {"target_distance": simulation.result.target_distance})
        body["run_id"] = run_id
    _emit(body)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, db: Optional[DB]) -> int:
    settings = get_settings()
    cfg = load_experiment_config(args.config)
    workers = args.workers if args.workers is not None else settings.workers
    if workers is not None:
        if workers < 1:
            raise ConfigError(f"workers must be at least 1, got {workers}")
        cfg = dataclasses.replace(cfg, workers=workers)
    out = args.out or cfg.output
    if not out:
        if not settings.output_dir:
            raise ConfigError("no output file: pass --out, set 'output' in the config or set NSGATE_OUTPUT_DIR")
        out = str(Path(settings.output_dir) / f"{Path(args.config).stem}.csv")
    run_id = db.start_run("sweep", cfg.to_mapping()) if db else None
    try:
        curve = gate_fidelity_experiment(cfg)
    except NsgateError as exc:
        if db and run_id is not None:
            db.finish_run(run_id, "error", {"error": str(exc)})
        raise
    path = write_curve_csv(curve, out)
    summary: Dict[str, Any] = {"out": str(path), "rows": len(curve.rows)}
    fits: List[Dict[str, Any]] = []
    for nbar in curve.nbar_values():
        try:
            fits.append(fit_small_g_slope(curve, cfg.slope_window, nbar).to_mapping())
        except InsufficientDataError as exc:
            logger.warning("no slope for nbar=%g: %s", nbar, exc)
    summary["slopes"] = fits
    if db and run_id is not None:
        db.record_sweep_points(run_id, curve.rows)
        db.finish_run(run_id, "ok", summary)
        summary["run_id"] = run_id
    _emit(summary)
    return EXIT_OK


def cmd_slope(args: argparse.Namespace, db: Optional[DB]) -> int:
    curve = read_curve_csv(args.input)
    fit = fit_small_g_slope(curve, _window(args.window), args.nbar)
    record_audit(db, "cli", "slope", {"in": str(Path(args.input)), **fit.to_mapping()})
    _emit(fit.to_mapping())
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, db: Optional[DB]) -> int:
    import uvicorn

    uvicorn.run("nsgate.api:app", host=args.host, port=args.port, log_level=args.log_level.lower())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="nsgate", description="Holonomic gates on a four-qubit noiseless subsystem.")
    parser.add_argument("--log-level", default=settings.log_level, help="logging level (default: %(default)s)")
    parser.add_argument("--no-ledger", action="store_true", help="do not record runs in the sqlite ledger")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run the verification battery and print a JSON report")
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--steps", type=int, default=None, help="integration steps for the g = 0 protection check")
    verify.add_argument("--config", default=None, help="take the synthesis seed from this experiment config")
    verify.set_defaults(func=cmd_verify)

    gate = sub.add_parser("gate", help="synthesize and simulate a one-qubit target")
    gate.add_argument("--target", required=True, help="named gate or euler:a,b,c (radians)")
    gate.add_argument("--nf-index", type=int, choices=(1, 2, 3), default=1)
    gate.set_defaults(func=cmd_gate)

    sweep = sub.add_parser("sweep", help="gate fidelity against g and n̄, written as CSV")
    sweep.add_argument("--config", default=settings.config_path)
    sweep.add_argument("--out", default=None)
    sweep.add_argument("--workers", type=int, default=None)
    sweep.set_defaults(func=cmd_sweep)

    slope = sub.add_parser("slope", help="fit log10(1 - F) against log10 g from a sweep CSV")
    slope.add_argument("--in", dest="input", required=True)
    slope.add_argument("--window", required=True, help="lo,hi")
    slope.add_argument("--nbar", type=float, default=0.0)
    slope.set_defaults(func=cmd_slope)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)
    return parser


def _exit_code(exc: NsgateError) -> int:
    if isinstance(exc, ConvergenceError):
        return EXIT_CONVERGENCE
    if isinstance(exc, (VerificationError, StructureViolationError)):
        return EXIT_VERIFICATION
    return EXIT_CONFIG


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    settings = get_settings()
    db = None if args.no_ledger or not settings.ledger_enabled else DB(settings.db_path)
    func: Callable[[argparse.Namespace, Optional[DB]], int] = args.func
    try:
        return func(args, db)
    except NsgateError as exc:
        code = _exit_code(exc)
        logger.error("%s failed: %s", args.command, exc)
        record_audit(db, "cli", f"{args.command}.error", {"error": str(exc), "exit": code})
        return code
    finally:
        if db is not None:
            db.close()
