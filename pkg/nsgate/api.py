from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from fastapi import Body, Depends, FastAPI, HTTPException, Query
from fastapi.responses import Response
from prometheus_client import CONTENT_TYPE_LATEST, generate_latest

from . import __version__
from .config import get_settings
from .errors import ConvergenceError, NsgateError
from .experiments.battery import run_verification_battery
from .gates.synthesis import simulate_target
from .metrics import GATE_RUNS_TOTAL
from .storage.audit import record_audit
from .storage.db import DB

app = FastAPI(title="nsgate", version=__version__)

_ledger: Optional[DB] = None


def get_db() -> Optional[DB]:
    global _ledger
    settings = get_settings()
    if not settings.ledger_enabled:
        return None
    if _ledger is None:
        _ledger = DB(settings.db_path)
    return _ledger


def _http_error(exc: NsgateError) -> HTTPException:
    status = 422 if isinstance(exc, ConvergenceError) else 400
    return HTTPException(status_code=status, detail=str(exc))


@app.get("/health")
def health() -> Dict[str, Any]:
    return {"ok": True, "ts": datetime.now(timezone.utc).isoformat()}


@app.get("/verify")
def verify(db: Optional[DB] = Depends(get_db)) -> Dict[str, Any]:
    settings = get_settings()
    config = {"seed": settings.seed, "steps": settings.battery_steps}
    run_id = db.start_run("verify", config) if db else None
    try:
        report = run_verification_battery(seed=settings.seed, steps=settings.battery_steps)
    except NsgateError as exc:
        if db and run_id is not None:
            db.finish_run(run_id, "error", {"error": str(exc)})
        raise _http_error(exc) from exc
    body = report.to_mapping()
    if db and run_id is not None:
        failed = [c.name for c in report.failed()]
        db.finish_run(run_id, "passed" if report.passed else "failed", {"checks": len(report.checks), "failed": failed})
    record_audit(db, "api", "verify", {"run_id": run_id, "passed": report.passed})
    return body


@app.post("/gate")
def gate(payload: Dict[str, Any] = Body(...), db: Optional[DB] = Depends(get_db)) -> Dict[str, Any]:
    target = payload.get("target")
    if not isinstance(target, str) or not target.strip():
        raise HTTPException(status_code=400, detail="target required")
    GATE_RUNS_TOTAL.inc()
    try:
        simulation = simulate_target(target)
    except NsgateError as exc:
        raise _http_error(exc) from exc
    body = simulation.to_mapping()
    if db:
        run_id = db.start_run("gate", {"target": target})
        db.finish_run(
            run_id, "ok", {"target_distance": simulation.result.target_distance, "leakage": simulation.result.leakage}
        )
        body["run_id"] = run_id
    return body


@app.get("/runs")
def runs(limit: int = Query(20, ge=1, le=500), db: Optional[DB] = Depends(get_db)) -> List[Dict[str, Any]]:
    if db is None:
        return []
    return db.recent_runs(limit)


@app.get("/runs/{run_id}")
def run_detail(run_id: int, db: Optional[DB] = Depends(get_db)) -> Dict[str, Any]:
    run = db.run(run_id) if db else None
    if run is None:
        raise HTTPException(status_code=404, detail="run not found")
    return run


@app.get("/metrics")
def metrics() -> Response:
    return Response(generate_latest(), media_type=CONTENT_TYPE_LATEST)
