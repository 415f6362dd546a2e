"""SQLite history of simulator runs."""

import json
import sqlite3
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import List, Optional, Dict, Any
from dataclasses import dataclass

from src.config import settings
from src.harness.metrics import MetricsReport
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class RunRecord:
    """A saved run summary."""
    id: int
    workload: str
    kind: str
    seed: int
    pretenure_enabled: bool
    valid: bool
    gc_count: int
    bytes_copied: int
    rset_updates: int
    pause_p100: float
    max_regions_in_use: int
    log_path: Optional[str]
    saved_at: datetime
    report: Dict[str, Any]


class RunStore:
    """SQLite storage for run summaries; the full report is kept as JSON."""

    def __init__(self, db_path: Optional[Path] = None):
        self.db_path = Path(db_path or settings.results_db_path)
        self._ensure_database()

    def _ensure_database(self):
        """Create database and tables if they don't exist."""
        self.db_path.parent.mkdir(parents=True, exist_ok=True)

        with self._get_connection() as conn:
            conn.execute("""
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    workload TEXT NOT NULL,
                    kind TEXT NOT NULL,
                    seed INTEGER NOT NULL,
                    pretenure_enabled INTEGER NOT NULL,
                    valid INTEGER NOT NULL,
                    gc_count INTEGER,
                    bytes_copied INTEGER,
                    rset_updates INTEGER,
                    pause_p100 REAL,
                    max_regions_in_use INTEGER,
                    log_path TEXT,
                    report TEXT NOT NULL,
                    saved_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                )
            """)
            conn.commit()

    @contextmanager
    def _get_connection(self):
        """Context manager for database connections."""
        conn = sqlite3.connect(str(self.db_path))
        conn.row_factory = sqlite3.Row
        try:
            yield conn
        finally:
            conn.close()

    def save_run(self, report: MetricsReport, log_path: Optional[str] = None) -> int:
        """Save a run summary and return its ID."""
        with self._get_connection() as conn:
            cursor = conn.execute(
                """
                INSERT INTO runs (workload, kind, seed, pretenure_enabled, valid, gc_count,
                                  bytes_copied, rset_updates, pause_p100, max_regions_in_use,
                                  log_path, report)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
                """,
                (
                    report.workload,
                    report.kind,
                    report.seed,
                    int(report.pretenure_enabled),
                    int(report.valid),
                    report.gc_count,
                    report.total_bytes_copied,
                    report.total_rset_updates,
                    report.pause_cost.get("p100", 0.0),
                    report.max_regions_in_use,
                    log_path,
                    report.to_json(),
                )
            )
            conn.commit()
            run_id = cursor.lastrowid

        logger.info(f"Saved run of '{report.workload}' with ID {run_id}")
        return run_id

    def list_runs(self, workload: Optional[str] = None, limit: int = 50) -> List[Dict[str, Any]]:
        """Most recent runs first, without the full report."""
        query = """
            SELECT id, workload, kind, seed, pretenure_enabled, valid, gc_count, bytes_copied,
                   rset_updates, pause_p100, max_regions_in_use, saved_at
            FROM runs
        """
        params: List[Any] = []
        if workload:
            query += " WHERE workload = ?"
            params.append(workload)
        query += " ORDER BY id DESC LIMIT ?"
        params.append(limit)

        with self._get_connection() as conn:
            rows = conn.execute(query, params).fetchall()

        return [
            {
                **dict(row),
                "pretenure_enabled": bool(row["pretenure_enabled"]),
                "valid": bool(row["valid"]),
            }
            for row in rows
        ]

    def get_run(self, run_id: int) -> Optional[RunRecord]:
        """Get a single run including its full report."""
        with self._get_connection() as conn:
            row = conn.execute(
                "SELECT * FROM runs WHERE id = ?",
                (run_id,)
            ).fetchone()

        if not row:
            return None

        return RunRecord(
            id=row["id"],
            workload=row["workload"],
            kind=row["kind"],
            seed=row["seed"],
            pretenure_enabled=bool(row["pretenure_enabled"]),
            valid=bool(row["valid"]),
            gc_count=row["gc_count"],
            bytes_copied=row["bytes_copied"],
            rset_updates=row["rset_updates"],
            pause_p100=row["pause_p100"],
            max_regions_in_use=row["max_regions_in_use"],
            log_path=row["log_path"],
            saved_at=datetime.fromisoformat(row["saved_at"]) if row["saved_at"] else datetime.now(),
            report=json.loads(row["report"])
        )

    def delete_run(self, run_id: int) -> bool:
        """Delete a run by ID. Returns True if deleted."""
        with self._get_connection() as conn:
            cursor = conn.execute("DELETE FROM runs WHERE id = ?", (run_id,))
            conn.commit()
            deleted = cursor.rowcount > 0

        if deleted:
            logger.info(f"Deleted run with ID {run_id}")
        return deleted
