"""Lectures, lecture files, and question authoring.

File bytes live in the content-addressed object store; rows in
lecture_files carry the logical name, declared media type, and size.
Question deletion never rewrites history: group rows keep the old ids as
soft references and only re-presentation is refused elsewhere.
"""

from __future__ import annotations

from dataclasses import asdict

from satep.core.types import GapFillQuestion, MultipleChoiceQuestion, QuestionKind
from satep.errors import (
    DuplicateTitle,
    EmptyFile,
    FileTooLarge,
    InvalidField,
    NotFound,
)
from satep.principals import Principal, require_admin, require_authenticated
from satep.storage.db import Database
from satep.storage.objects import ObjectStore
from satep.storage.ops import (
    Page,
    collect_objects,
    delete_lecture_cascade,
    like_pattern,
)

DEFAULT_MAX_UPLOAD = 50 * 1024 * 1024

_QUESTION_TABLES = {
    QuestionKind.MULTIPLE_CHOICE: ("multiple_questions", "IDE"),
    QuestionKind.GAP_FILL: ("filling_questions", "IDF"),
}


def parse_question_kind(token: str) -> QuestionKind:
    try:
        return QuestionKind(token)
    except ValueError:
        raise InvalidField(f"unknown question kind {token!r}") from None


class ContentService:
    def __init__(self, db: Database, store: ObjectStore,
                 max_upload_bytes: int = DEFAULT_MAX_UPLOAD):
        self._db = db
        self._store = store
        self._max_upload = max_upload_bytes

    # -- lectures ------------------------------------------------------------

    def create_lecture(self, principal: Principal | None, title: str) -> dict:
        require_admin(principal)
        if not title or not title.strip():
            raise InvalidField("lecture title must not be empty")
        with self._db.transaction():
            if self._db.scalar("SELECT 1 FROM lectures WHERE Lecture = ?", (title,)) is not None:
                raise DuplicateTitle(f"a lecture titled {title!r} already exists")
            cur = self._db.execute("INSERT INTO lectures (Lecture) VALUES (?)", (title,))
            return {"id": cur.lastrowid, "title": title}

    def list_lectures(self) -> list[dict]:
        """Public: guests may browse lecture titles."""
        rows = self._db.query("SELECT IDD, Lecture FROM lectures ORDER BY IDD")
        return [{"id": r["IDD"], "title": r["Lecture"]} for r in rows]

    def delete_lecture(self, principal: Principal | None, lecture_id: int) -> dict:
        require_admin(principal)
        report = delete_lecture_cascade(self._db, self._store, lecture_id)
        return asdict(report)

    # -- files ------------------------------------------------------------------

    def upload_file(self, principal: Principal | None, lecture_id: int, *,
                    name: str, media_type: str, data: bytes) -> dict:
        require_admin(principal)
        if not name or not name.strip():
            raise InvalidField("file name must not be empty")
        if not data:
            raise EmptyFile("uploaded file is empty")
        if len(data) > self._max_upload:
            raise FileTooLarge(
                f"file is {len(data)} bytes, limit is {self._max_upload}"
            )
        media_type = media_type or "application/octet-stream"
        # object write and row insert share one transaction so garbage
        # collection can never race an in-flight upload of identical bytes
        with self._db.transaction():
            if self._db.scalar("SELECT 1 FROM lectures WHERE IDD = ?", (lecture_id,)) is None:
                raise NotFound(f"lecture {lecture_id} does not exist")
            digest = self._store.put(data)
            cur = self._db.execute(
                "INSERT INTO lecture_files (IDD, name, type, size, digest) "
                "VALUES (?, ?, ?, ?, ?)",
                (lecture_id, name, media_type, len(data), digest),
            )
        return {
            "id": cur.lastrowid,
            "lecture_id": lecture_id,
            "name": name,
            "media_type": media_type,
            "size": len(data),
        }

    def list_files(self, principal: Principal | None, lecture_id: int) -> list[dict]:
        require_authenticated(principal)
        if self._db.scalar("SELECT 1 FROM lectures WHERE IDD = ?", (lecture_id,)) is None:
            raise NotFound(f"lecture {lecture_id} does not exist")
        rows = self._db.query(
            "SELECT ID, IDD, name, type, size FROM lecture_files WHERE IDD = ? ORDER BY ID",
            (lecture_id,),
        )
        return [
            {
                "id": r["ID"], "lecture_id": r["IDD"], "name": r["name"],
                "media_type": r["type"], "size": r["size"],
            }
            for r in rows
        ]

    def download_file(self, principal: Principal | None, file_id: int) -> tuple[dict, bytes]:
        require_authenticated(principal)
        row = self._db.query_one(
            "SELECT ID, IDD, name, type, size, digest FROM lecture_files WHERE ID = ?",
            (file_id,),
        )
        if row is None:
            raise NotFound(f"file {file_id} does not exist")
        data = self._store.get(row["digest"])
        meta = {
            "id": row["ID"], "lecture_id": row["IDD"], "name": row["name"],
            "media_type": row["type"], "size": row["size"],
        }
        return meta, data

    def delete_files(self, principal: Principal | None, file_ids: list[int]) -> list[dict]:
        require_admin(principal)
        report = []
        digests = []
        for file_id in file_ids:
            with self._db.transaction():
                row = self._db.query_one(
                    "SELECT digest FROM lecture_files WHERE ID = ?", (file_id,)
                )
                if row is None:
                    report.append({"id": file_id, "deleted": False})
                    continue
                self._db.execute("DELETE FROM lecture_files WHERE ID = ?", (file_id,))
                digests.append(row["digest"])
                report.append({"id": file_id, "deleted": True})
        collect_objects(self._db, self._store, digests)
        return report

    # -- questions ------------------------------------------------------------------

    def insert_question(self, principal: Principal | None,
                        question: MultipleChoiceQuestion | GapFillQuestion) -> int:
        require_admin(principal)
        with self._db.transaction():
            if self._db.scalar(
                "SELECT 1 FROM lectures WHERE IDD = ?", (question.lecture,)
            ) is None:
                raise NotFound(f"lecture {question.lecture} does not exist")
            if isinstance(question, MultipleChoiceQuestion):
                wa = list(question.wrong_answers) + [None, None]
                cur = self._db.execute(
                    "INSERT INTO multiple_questions (IDD, Question, RA, WA1, WA2, WA3) "
                    "VALUES (?, ?, ?, ?, ?, ?)",
                    (question.lecture, question.question, question.right_answer,
                     wa[0], wa[1], wa[2]),
                )
            else:
                cur = self._db.execute(
                    "INSERT INTO filling_questions (IDD, Question, Answer) VALUES (?, ?, ?)",
                    (question.lecture, question.question, question.answer),
                )
            return cur.lastrowid

    def get_question(self, principal: Principal | None, kind: QuestionKind,
                     question_id: int) -> dict:
        require_admin(principal)
        row = self._question_row(kind, question_id)
        if row is None:
            raise NotFound(f"{kind.value} question {question_id} does not exist")
        return _question_dict(kind, row)

    def edit_question(self, principal: Principal | None, kind: QuestionKind,
                      question_id: int, changes: dict) -> dict:
        """Apply changes, revalidate the merged question, persist. Lecture
        reassignment is allowed and checked for existence."""
        require_admin(principal)
        with self._db.transaction():
            row = self._question_row(kind, question_id)
            if row is None:
                raise NotFound(f"{kind.value} question {question_id} does not exist")
            if kind is QuestionKind.MULTIPLE_CHOICE:
                wrong = changes.get("wrong_answers")
                if wrong is None:
                    wrong = [w for w in (row["WA1"], row["WA2"], row["WA3"]) if w is not None]
                merged = MultipleChoiceQuestion(
                    id=question_id,
                    lecture=changes.get("lecture_id") or row["IDD"],
                    question=changes.get("question") or row["Question"],
                    right_answer=changes.get("right_answer") or row["RA"],
                    wrong_answers=tuple(wrong),
                )
                self._assert_lecture(merged.lecture)
                wa = list(merged.wrong_answers) + [None, None]
                self._db.execute(
                    "UPDATE multiple_questions SET IDD = ?, Question = ?, RA = ?, "
                    "WA1 = ?, WA2 = ?, WA3 = ? WHERE IDE = ?",
                    (merged.lecture, merged.question, merged.right_answer,
                     wa[0], wa[1], wa[2], question_id),
                )
            else:
                merged = GapFillQuestion(
                    id=question_id,
                    lecture=changes.get("lecture_id") or row["IDD"],
                    question=changes.get("question") or row["Question"],
                    answer=changes.get("answer") or row["Answer"],
                )
                self._assert_lecture(merged.lecture)
                self._db.execute(
                    "UPDATE filling_questions SET IDD = ?, Question = ?, Answer = ? "
                    "WHERE IDF = ?",
                    (merged.lecture, merged.question, merged.answer, question_id),
                )
        row = self._question_row(kind, question_id)
        return _question_dict(kind, row)

    def delete_questions(self, principal: Principal | None, kind: QuestionKind,
                         question_ids: list[int]) -> list[dict]:
        """Removes the question rows only; historical test groups keep the ids
        as soft references so past grades stay interpretable."""
        require_admin(principal)
        table, key = _QUESTION_TABLES[kind]
        report = []
        for qid in question_ids:
            with self._db.transaction():
                gone = self._db.execute(
                    f"DELETE FROM {table} WHERE {key} = ?", (qid,)
                ).rowcount
            report.append({"id": qid, "deleted": bool(gone)})
        return report

    def list_questions(self, principal: Principal | None, kind: QuestionKind,
                       page: int = 1, page_size: int = 20,
                       search: str | None = None) -> Page:
        require_admin(principal)
        if page < 1 or page_size < 1:
            raise InvalidField("page and page_size must be >= 1")
        table, key = _QUESTION_TABLES[kind]
        where, params = "", []
        if search:
            where = "WHERE Question LIKE ? ESCAPE '\\'"
            params.append(like_pattern(search))
        total = self._db.scalar(f"SELECT COUNT(*) FROM {table} {where}", params)
        rows = self._db.query(
            f"SELECT * FROM {table} {where} ORDER BY IDD, {key} LIMIT ? OFFSET ?",
            (*params, page_size, (page - 1) * page_size),
        )
        items = [_question_dict(kind, row) for row in rows]
        return Page(items=items, total=total, page=page, page_size=page_size)

    def _question_row(self, kind: QuestionKind, question_id: int):
        table, key = _QUESTION_TABLES[kind]
        return self._db.query_one(f"SELECT * FROM {table} WHERE {key} = ?", (question_id,))

    def _assert_lecture(self, lecture_id: int) -> None:
        if self._db.scalar("SELECT 1 FROM lectures WHERE IDD = ?", (lecture_id,)) is None:
            raise NotFound(f"lecture {lecture_id} does not exist")


def _question_dict(kind: QuestionKind, row) -> dict:
    if kind is QuestionKind.MULTIPLE_CHOICE:
        return {
            "kind": kind.value,
            "id": row["IDE"],
            "lecture_id": row["IDD"],
            "question": row["Question"],
            "right_answer": row["RA"],
            "wrong_answers": [w for w in (row["WA1"], row["WA2"], row["WA3"]) if w is not None],
        }
    return {
        "kind": kind.value,
        "id": row["IDF"],
        "lecture_id": row["IDD"],
        "question": row["Question"],
        "answer": row["Answer"],
    }
