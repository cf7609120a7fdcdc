"""Storage operations with cross-table semantics: group persistence, graded
sitting records, lecture cascade deletion, substring search, integrity sweep.
"""

from __future__ import annotations

import sqlite3
from dataclasses import dataclass

from satep.core.types import QuestionKind, TestGroup
from satep.errors import DuplicateKey, InvalidField, NotFound, ReferencedByActiveExam, UnknownQuestion
from satep.storage.db import Database
from satep.storage.objects import ObjectStore

# Reserved group id meaning "no questions of this kind"; keeps the
# (IDUM, IDUF, AM) triple total for single-kind sittings.
EMPTY_GROUP_ID = 0

_GROUP_TABLES = {
    QuestionKind.MULTIPLE_CHOICE: ("user_mult_test", "IDUM", "IDE", "multiple_questions"),
    QuestionKind.GAP_FILL: ("user_fill_test", "IDUF", "IDF", "filling_questions"),
}


@dataclass(frozen=True)
class Page:
    items: list[dict]
    total: int
    page: int
    page_size: int


@dataclass(frozen=True)
class CascadeReport:
    files_removed: int
    mc_removed: int
    gf_removed: int


def _persist_group(db: Database, group: TestGroup) -> int:
    table, group_col, q_col, q_table = _GROUP_TABLES[group.kind]
    if not group.question_ids:
        db.execute(
            f"INSERT INTO {table} ({group_col}, {q_col}, Position) "
            f"SELECT ?, NULL, 0 WHERE NOT EXISTS (SELECT 1 FROM {table} WHERE {group_col} = ?)",
            (EMPTY_GROUP_ID, EMPTY_GROUP_ID),
        )
        return EMPTY_GROUP_ID
    placeholders = ",".join("?" * len(group.question_ids))
    known = db.scalar(
        f"SELECT COUNT(*) FROM {q_table} WHERE {q_col} IN ({placeholders})",
        group.question_ids,
    )
    if known != len(group.question_ids):
        raise UnknownQuestion(
            f"{group.kind.value} group references question ids missing from {q_table}"
        )
    group_id = db.scalar(f"SELECT COALESCE(MAX({group_col}), 0) + 1 FROM {table}")
    for position, qid in enumerate(group.question_ids, start=1):
        db.execute(
            f"INSERT INTO {table} ({group_col}, {q_col}, Position) VALUES (?, ?, ?)",
            (group_id, qid, position),
        )
    return group_id


def persist_test_groups(db: Database, mc: TestGroup, gf: TestGroup) -> tuple[int, int]:
    """Allocate group ids and write one row per (group, question) pair in order."""
    if mc.kind is not QuestionKind.MULTIPLE_CHOICE or gf.kind is not QuestionKind.GAP_FILL:
        raise ValueError("persist_test_groups expects (multiple choice, gap fill) groups")
    with db.transaction():
        idum = _persist_group(db, mc)
        iduf = _persist_group(db, gf)
    return idum, iduf


def load_group_question_ids(db: Database, kind: QuestionKind, group_id: int) -> list[int]:
    table, group_col, q_col, _ = _GROUP_TABLES[kind]
    rows = db.query(
        f"SELECT {q_col} AS qid FROM {table} "
        f"WHERE {group_col} = ? AND {q_col} IS NOT NULL ORDER BY Position",
        (group_id,),
    )
    return [row["qid"] for row in rows]


def record_completed_test(
    db: Database,
    idum: int,
    iduf: int,
    am: int,
    date: str,
    percent: float,
    is_final: bool,
) -> dict:
    """Write the graded sitting; final sittings also land in history atomically."""
    if not 0.0 <= percent <= 100.0:
        raise ValueError(f"percent {percent} outside [0, 100]")
    with db.transaction():
        if db.scalar("SELECT 1 FROM users WHERE AM = ?", (am,)) is None:
            raise NotFound(f"user {am} does not exist")
        try:
            db.execute(
                "INSERT INTO user_complete_test (IDUM, IDUF, AM, Date, Percent) "
                "VALUES (?, ?, ?, ?, ?)",
                (idum, iduf, am, date, percent),
            )
        except sqlite3.IntegrityError as exc:
            raise DuplicateKey(
                f"completed test ({idum}, {iduf}, {am}) already recorded"
            ) from exc
        if is_final:
            db.execute(
                "INSERT INTO history (AM, Date, Percent) VALUES (?, ?, ?)",
                (am, date, percent),
            )
    return {"idum": idum, "iduf": iduf, "am": am, "date": date, "percent": percent}


def delete_lecture_cascade(db: Database, store: ObjectStore, lecture_id: int) -> CascadeReport:
    """Remove a lecture with its files, stored objects, and both question kinds.

    Refused while any open sitting still presents a question of this lecture;
    closed sittings keep their group rows as historical soft references.
    """
    with db.transaction():
        if db.scalar("SELECT 1 FROM lectures WHERE IDD = ?", (lecture_id,)) is None:
            raise NotFound(f"lecture {lecture_id} does not exist")
        active = db.query_one(
            """
            SELECT ti.InstanceId FROM test_instances ti
            WHERE ti.State = 'open' AND (
                EXISTS (SELECT 1 FROM user_mult_test g
                        JOIN multiple_questions q ON q.IDE = g.IDE
                        WHERE g.IDUM = ti.IDUM AND q.IDD = ?)
                OR EXISTS (SELECT 1 FROM user_fill_test g
                           JOIN filling_questions q ON q.IDF = g.IDF
                           WHERE g.IDUF = ti.IDUF AND q.IDD = ?)
            )
            """,
            (lecture_id, lecture_id),
        )
        if active is not None:
            raise ReferencedByActiveExam(
                f"open test instance {active['InstanceId']} uses questions of lecture {lecture_id}"
            )
        digests = [
            row["digest"]
            for row in db.query("SELECT digest FROM lecture_files WHERE IDD = ?", (lecture_id,))
        ]
        files = db.execute("DELETE FROM lecture_files WHERE IDD = ?", (lecture_id,)).rowcount
        mc = db.execute("DELETE FROM multiple_questions WHERE IDD = ?", (lecture_id,)).rowcount
        gf = db.execute("DELETE FROM filling_questions WHERE IDD = ?", (lecture_id,)).rowcount
        db.execute("DELETE FROM lectures WHERE IDD = ?", (lecture_id,))
    collect_objects(db, store, digests)
    return CascadeReport(files_removed=files, mc_removed=mc, gf_removed=gf)


def collect_objects(db: Database, store: ObjectStore, digests: list[str]) -> None:
    """Drop stored objects nobody references anymore.

    Runs in its own write transaction so it serializes against concurrent
    uploads of identical bytes (uploads hold a write transaction across
    object write + row insert).
    """
    for digest in set(digests):
        with db.transaction():
            refs = db.scalar("SELECT COUNT(*) FROM lecture_files WHERE digest = ?", (digest,))
            if refs == 0:
                store.delete(digest)


_SEARCHABLE = {
    "users": {
        "am": "AM",
        "name": "Name",
        "surname": "Surname",
        "username": "Username",
        "email": "Email",
    },
    "multiple_questions": {"question": "Question"},
    "filling_questions": {"question": "Question"},
}

_PRIMARY_KEY = {"users": "AM", "multiple_questions": "IDE", "filling_questions": "IDF"}


def like_pattern(needle: str) -> str:
    """Substring LIKE pattern with %, _ and \\ in the needle taken literally."""
    escaped = needle.replace("\\", "\\\\").replace("%", "\\%").replace("_", "\\_")
    return f"%{escaped}%"


def search_records(
    db: Database, scope: str, field: str, needle: str, page: int, page_size: int
) -> Page:
    """Case-insensitive substring search, paged, ordered by primary key."""
    if scope not in _SEARCHABLE:
        raise InvalidField(f"unknown search scope {scope!r}")
    columns = _SEARCHABLE[scope]
    if field not in columns:
        raise InvalidField(f"field {field!r} is not searchable on {scope}")
    if page < 1 or page_size < 1:
        raise InvalidField("page and page_size must be >= 1")
    column = columns[field]
    pattern = like_pattern(needle)
    where = f"CAST({column} AS TEXT) LIKE ? ESCAPE '\\'"
    total = db.scalar(f"SELECT COUNT(*) FROM {scope} WHERE {where}", (pattern,))
    rows = db.query(
        f"SELECT * FROM {scope} WHERE {where} "
        f"ORDER BY {_PRIMARY_KEY[scope]} ASC LIMIT ? OFFSET ?",
        (pattern, page_size, (page - 1) * page_size),
    )
    return Page(items=[dict(r) for r in rows], total=total, page=page, page_size=page_size)


def integrity_sweep(db: Database, store: ObjectStore | None = None) -> list[str]:
    """Return a list of invariant violations; an empty list means the store is sound."""
    problems: list[str] = []
    for row in db.query("PRAGMA foreign_key_check"):
        problems.append(f"foreign key violation in {row[0]} rowid {row[1]} -> {row[2]}")

    for table, cols in (
        ("user_complete_test", "IDUM, IDUF, AM"),
        ("user_mult_test", "IDUM, IDE"),
        ("user_fill_test", "IDUF, IDF"),
    ):
        dupes = db.query(
            f"SELECT {cols}, COUNT(*) AS n FROM {table} GROUP BY {cols} HAVING n > 1"
        )
        for d in dupes:
            problems.append(f"duplicate key in {table}: {tuple(d)[:-1]}")

    # Group references are soft (non-unique parent), checked here instead of
    # by the engine.
    for table, col, group_table in (
        ("user_complete_test", "IDUM", "user_mult_test"),
        ("user_complete_test", "IDUF", "user_fill_test"),
        ("test_instances", "IDUM", "user_mult_test"),
        ("test_instances", "IDUF", "user_fill_test"),
    ):
        group_col = "IDUM" if group_table == "user_mult_test" else "IDUF"
        orphans = db.query(
            f"SELECT DISTINCT t.{col} AS gid FROM {table} t "
            f"WHERE NOT EXISTS (SELECT 1 FROM {group_table} g WHERE g.{group_col} = t.{col})"
        )
        for o in orphans:
            problems.append(f"{table}.{col} references missing group {o['gid']}")

    for field in ("Username", "Email"):
        clashes = db.query(
            f"""
            SELECT v FROM (
                SELECT {field} AS v FROM users
                UNION ALL SELECT {field} FROM register
                UNION ALL SELECT {field} FROM admins
            ) GROUP BY v HAVING COUNT(*) > 1
            """
        )
        for c in clashes:
            problems.append(f"{field.lower()} {c['v']!r} appears in more than one account table")
    am_clashes = db.query(
        "SELECT AM FROM (SELECT AM FROM users UNION ALL SELECT AM FROM register) "
        "GROUP BY AM HAVING COUNT(*) > 1"
    )
    for c in am_clashes:
        problems.append(f"register number {c['AM']} appears in more than one account table")

    for table in ("history", "user_complete_test"):
        bad = db.scalar(f"SELECT COUNT(*) FROM {table} WHERE Percent < 0 OR Percent > 100")
        if bad:
            problems.append(f"{table} holds {bad} rows with percent outside [0, 100]")

    if store is not None:
        for row in db.query("SELECT ID, digest FROM lecture_files"):
            if not store.exists(row["digest"]):
                problems.append(f"lecture_files row {row['ID']} references missing object")
    return problems
