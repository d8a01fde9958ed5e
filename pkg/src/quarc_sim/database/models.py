"""
Registro SQLite das execuções do quarc-sim.
"""

import sqlite3
import logging
from datetime import datetime
from pathlib import Path
from typing import Optional, List
from dataclasses import dataclass

logger = logging.getLogger(__name__)


@dataclass
class RunRecord:
    """Uma execução registrada (run, calibração ou ponto de sweep)."""
    id: Optional[int] = None
    command: str = ""
    config_hash: str = ""
    seed: int = 0
    output_dir: str = ""
    slots: int = 0
    throughput: Optional[float] = None
    status: str = "completed"  # completed, failed, inconclusive
    message: Optional[str] = None
    created_at: Optional[datetime] = None


class RunRegistry:
    """Gerenciador do banco de execuções."""

    def __init__(self, db_path: Optional[str] = None):
        if db_path is None:
            config_dir = Path.home() / ".config" / "quarc-sim"
            config_dir.mkdir(parents=True, exist_ok=True)
            db_path = str(config_dir / "runs.db")

        self.db_path = db_path
        self.init_database()

    def get_connection(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        return conn

    def init_database(self):
        with self.get_connection() as conn:
            conn.execute("""
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    command TEXT NOT NULL,
                    config_hash TEXT NOT NULL,
                    seed INTEGER NOT NULL,
                    output_dir TEXT NOT NULL,
                    slots INTEGER DEFAULT 0,
                    throughput REAL,
                    status TEXT DEFAULT 'completed',
                    message TEXT,
                    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                )
            """)
            conn.execute("CREATE INDEX IF NOT EXISTS idx_runs_hash ON runs (config_hash)")
            conn.commit()
        logger.debug(f"Registro de execuções em {self.db_path}")

    def add_run(self, record: RunRecord) -> int:
        with self.get_connection() as conn:
            cursor = conn.execute(
                """INSERT INTO runs
                   (command, config_hash, seed, output_dir, slots, throughput, status, message, created_at)
                   VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)""",
                (record.command, record.config_hash, record.seed, record.output_dir, record.slots,
                 record.throughput, record.status, record.message,
                 (record.created_at or datetime.now()).isoformat())
            )
            conn.commit()
            return cursor.lastrowid

    def _from_row(self, row: sqlite3.Row) -> RunRecord:
        return RunRecord(
            id=row['id'],
            command=row['command'],
            config_hash=row['config_hash'],
            seed=row['seed'],
            output_dir=row['output_dir'],
            slots=row['slots'],
            throughput=row['throughput'],
            status=row['status'],
            message=row['message'],
            created_at=datetime.fromisoformat(row['created_at']) if row['created_at'] else None,
        )

    def get_runs(self, limit: int = 20, config_hash: Optional[str] = None) -> List[RunRecord]:
        """Execuções mais recentes primeiro."""
        with self.get_connection() as conn:
            if config_hash:
                rows = conn.execute(
                    "SELECT * FROM runs WHERE config_hash = ? ORDER BY id DESC LIMIT ?",
                    (config_hash, limit)
                ).fetchall()
            else:
                rows = conn.execute("SELECT * FROM runs ORDER BY id DESC LIMIT ?", (limit,)).fetchall()
            return [self._from_row(row) for row in rows]

    def get_run(self, run_id: int) -> Optional[RunRecord]:
        with self.get_connection() as conn:
            row = conn.execute("SELECT * FROM runs WHERE id = ?", (run_id,)).fetchone()
            return self._from_row(row) if row else None
