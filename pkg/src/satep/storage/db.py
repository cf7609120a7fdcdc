"""Thin transactional facade over sqlite3.

One connection per thread, write transactions opened with BEGIN IMMEDIATE so
concurrent writers queue instead of deadlocking on lock upgrades. Nested
begin() calls on the same thread become savepoints, letting service
operations compose into one atomic unit.
"""

from __future__ import annotations

import sqlite3
import threading
from contextlib import contextmanager
from pathlib import Path
from uuid import uuid4

from satep.errors import StorageUnavailable

BUSY_TIMEOUT_MS = 10_000


class Transaction:
    """Handle for one (possibly nested) transaction on the calling thread."""

    def __init__(self, db: "Database", conn: sqlite3.Connection, depth: int):
        self._db = db
        self._conn = conn
        self._depth = depth
        self._done = False

    def commit(self) -> None:
        if self._done:
            return
        if self._depth == 0:
            self._conn.execute("COMMIT")
        else:
            self._conn.execute(f"RELEASE SAVEPOINT sp_{self._depth}")
        self._done = True
        self._db._set_depth(self._depth)

    def rollback(self) -> None:
        if self._done:
            return
        if self._depth == 0:
            self._conn.execute("ROLLBACK")
        else:
            self._conn.execute(f"ROLLBACK TO SAVEPOINT sp_{self._depth}")
            self._conn.execute(f"RELEASE SAVEPOINT sp_{self._depth}")
        self._done = True
        self._db._set_depth(self._depth)


class Database:
    def __init__(self, path: str | Path):
        if str(path) == ":memory:":
            # Unique shared-cache URI so every thread sees the same in-memory
            # database; the anchor connection keeps it alive.
            self._uri = f"file:satep-mem-{uuid4().hex}?mode=memory&cache=shared"
        else:
            self._uri = f"file:{Path(path).resolve()}"
        self._local = threading.local()
        self._all_conns: list[sqlite3.Connection] = []
        self._conns_lock = threading.Lock()
        self._local.conn = self._anchor = self._connect()
        self._local.depth = 0

    def _connect(self) -> sqlite3.Connection:
        try:
            conn = sqlite3.connect(
                self._uri, uri=True, timeout=BUSY_TIMEOUT_MS / 1000, isolation_level=None
            )
        except sqlite3.Error as exc:
            raise StorageUnavailable(f"cannot open database at {self._uri}: {exc}") from exc
        conn.row_factory = sqlite3.Row
        conn.execute("PRAGMA foreign_keys = ON")
        conn.execute(f"PRAGMA busy_timeout = {BUSY_TIMEOUT_MS}")
        if "mode=memory" not in self._uri:
            conn.execute("PRAGMA journal_mode = WAL")
        with self._conns_lock:
            self._all_conns.append(conn)
        return conn

    def connection(self) -> sqlite3.Connection:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = self._connect()
            self._local.conn = conn
            self._local.depth = 0
        return conn

    def _set_depth(self, depth: int) -> None:
        self._local.depth = depth

    def begin(self) -> Transaction:
        conn = self.connection()
        depth = self._local.depth
        if depth == 0:
            conn.execute("BEGIN IMMEDIATE")
        else:
            conn.execute(f"SAVEPOINT sp_{depth}")
        self._local.depth = depth + 1
        return Transaction(self, conn, depth)

    @contextmanager
    def transaction(self):
        txn = self.begin()
        try:
            yield txn
        except BaseException:
            txn.rollback()
            raise
        else:
            txn.commit()

    def execute(self, sql: str, params=()) -> sqlite3.Cursor:
        return self.connection().execute(sql, params)

    def query(self, sql: str, params=()) -> list[sqlite3.Row]:
        return self.connection().execute(sql, params).fetchall()

    def query_one(self, sql: str, params=()) -> sqlite3.Row | None:
        return self.connection().execute(sql, params).fetchone()

    def scalar(self, sql: str, params=()):
        row = self.query_one(sql, params)
        return None if row is None else row[0]

    def close(self) -> None:
        with self._conns_lock:
            conns, self._all_conns = self._all_conns, []
        for conn in conns:
            try:
                conn.close()
            except sqlite3.Error:
                pass
