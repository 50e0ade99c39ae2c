import json
import sqlite3
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable

SCHEMA = """
CREATE TABLE IF NOT EXISTS runs (
  id INTEGER PRIMARY KEY,
  ts TEXT NOT NULL,
  command TEXT NOT NULL,
  config_json TEXT,
  status TEXT NOT NULL DEFAULT 'running',
  summary_json TEXT
);
CREATE TABLE IF NOT EXISTS sweep_points (
  id INTEGER PRIMARY KEY,
  run_id INTEGER NOT NULL REFERENCES runs(id),
  g REAL NOT NULL,
  nbar REAL NOT NULL,
  f_mean REAL NOT NULL,
  f_states_json TEXT NOT NULL,
  leakage_mean REAL
);
CREATE TABLE IF NOT EXISTS audits (
  id INTEGER PRIMARY KEY,
  ts TEXT NOT NULL,
  actor TEXT NOT NULL,
  action TEXT NOT NULL,
  payload TEXT
);
"""

TABLES = ("runs", "sweep_points", "audits")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class DB:
    def __init__(self, path: str) -> None:
        self.path = Path(path)
        if str(path) != ":memory:":
            self.path.parent.mkdir(parents=True, exist_ok=True)
        self.conn = sqlite3.connect(str(path), check_same_thread=False)
        self.conn.row_factory = sqlite3.Row
        self.lock = threading.Lock()
        self._init()

    def _init(self) -> None:
        with self.lock, self.conn:
            self.conn.executescript(SCHEMA)

    def close(self) -> None:
        with self.lock:
            self.conn.close()

    def insert(self, table: str, payload: Dict[str, Any]) -> int:
        if table not in TABLES:
            raise ValueError(f"unknown table {table}")
        cols = ",".join(payload.keys())
        placeholders = ":" + ",:".join(payload.keys())
        sql = f"INSERT INTO {table} ({cols}) VALUES ({placeholders})"
        with self.lock, self.conn:
            cur = self.conn.execute(sql, payload)
            return int(cur.lastrowid)

    def latest(self, table: str, limit: int = 50) -> list[Dict[str, Any]]:
        if table not in TABLES:
            raise ValueError(f"unknown table {table}")
        with self.lock:
            cur = self.conn.execute(f"SELECT * FROM {table} ORDER BY id DESC LIMIT ?", (limit,))
            return [dict(r) for r in cur.fetchall()]

    def get(self, table: str, row_id: int) -> Dict[str, Any] | None:
        if table not in TABLES:
            raise ValueError(f"unknown table {table}")
        with self.lock:
            cur = self.conn.execute(f"SELECT * FROM {table} WHERE id = ?", (row_id,))
            row = cur.fetchone()
            return dict(row) if row else None

    def start_run(self, command: str, config: Dict[str, Any] | None = None) -> int:
        return self.insert(
            "runs",
            {"ts": _now(), "command": command, "config_json": json.dumps(config or {}, sort_keys=True), "status": "running"},
        )

    def finish_run(self, run_id: int, status: str, summary: Dict[str, Any] | None = None) -> None:
        with self.lock, self.conn:
            self.conn.execute(
                "UPDATE runs SET status = :status, summary_json = :summary WHERE id = :id",
                {"status": status, "summary": json.dumps(summary or {}, sort_keys=True), "id": run_id},
            )

    def record_sweep_points(self, run_id: int, rows: Iterable[Any]) -> int:
        payload = [
            {
                "run_id": run_id,
                "g": row.g,
                "nbar": row.nbar,
                "f_mean": row.f_mean,
                "f_states_json": json.dumps(list(row.f_states)),
                "leakage_mean": row.leakage_mean,
            }
            for row in rows
        ]
        with self.lock, self.conn:
            self.conn.executemany(
                "INSERT INTO sweep_points (run_id, g, nbar, f_mean, f_states_json, leakage_mean) "
                "VALUES (:run_id, :g, :nbar, :f_mean, :f_states_json, :leakage_mean)",
                payload,
            )
        return len(payload)

    def sweep_points(self, run_id: int) -> list[Dict[str, Any]]:
        with self.lock:
            cur = self.conn.execute(
                "SELECT g, nbar, f_mean, f_states_json, leakage_mean FROM sweep_points WHERE run_id = ? ORDER BY nbar, g",
                (run_id,),
            )
            rows = [dict(r) for r in cur.fetchall()]
        for row in rows:
            row["f_states"] = json.loads(row.pop("f_states_json"))
        return rows

    def recent_runs(self, limit: int = 20) -> list[Dict[str, Any]]:
        return [_decode_run(row) for row in self.latest("runs", limit)]

    def run(self, run_id: int) -> Dict[str, Any] | None:
        """One run with its decoded config and summary, plus any sweep points."""
        row = self.get("runs", run_id)
        if row is None:
            return None
        run = _decode_run(row)
        run["points"] = self.sweep_points(run_id)
        return run


def _decode_run(row: Dict[str, Any]) -> Dict[str, Any]:
    for key in ("config_json", "summary_json"):
        raw = row.get(key)
        try:
            row[key.removesuffix("_json")] = json.loads(raw) if raw else {}
        except json.JSONDecodeError:
            row[key.removesuffix("_json")] = {}
    return row
