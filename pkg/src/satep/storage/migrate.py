"""Numbered SQL migrations, applied exactly once, checksum-pinned."""

from __future__ import annotations

import hashlib
import sqlite3
from importlib import resources
from pathlib import Path

from satep.clock import Clock, SystemClock, isoformat
from satep.errors import MigrationConflict
from satep.storage.db import Database


def default_migrations_dir() -> Path:
    return Path(str(resources.files("satep.storage") / "migrations"))


def _statements(script: str):
    """Split a SQL script into complete statements (comment/whitespace aware)."""
    buffer = ""
    for line in script.splitlines(keepends=True):
        buffer += line
        if sqlite3.complete_statement(buffer):
            stmt = buffer.strip()
            if stmt:
                yield stmt
            buffer = ""
    if buffer.strip():
        yield buffer.strip()


def apply_migrations(
    db: Database, migrations_dir: Path | None = None, clock: Clock | None = None
) -> list[str]:
    """Apply pending migration files in name order; return the names applied.

    A previously applied migration whose file content changed raises
    MigrationConflict instead of silently diverging from the live schema.
    """
    clock = clock or SystemClock()
    directory = migrations_dir or default_migrations_dir()
    db.execute(
        "CREATE TABLE IF NOT EXISTS schema_migrations ("
        " Name TEXT PRIMARY KEY, Checksum TEXT NOT NULL, AppliedAt TEXT NOT NULL)"
    )
    applied: list[str] = []
    for path in sorted(directory.glob("*.sql")):
        content = path.read_bytes()
        checksum = hashlib.sha256(content).hexdigest()
        recorded = db.scalar(
            "SELECT Checksum FROM schema_migrations WHERE Name = ?", (path.name,)
        )
        if recorded is not None:
            if recorded != checksum:
                raise MigrationConflict(
                    f"migration {path.name} changed after being applied "
                    f"(recorded {recorded[:12]}, file {checksum[:12]})"
                )
            continue
        with db.transaction():
            for stmt in _statements(content.decode("utf-8")):
                db.execute(stmt)
            db.execute(
                "INSERT INTO schema_migrations (Name, Checksum, AppliedAt) VALUES (?, ?, ?)",
                (path.name, checksum, isoformat(clock.now())),
            )
        applied.append(path.name)
    return applied
