"""Test and exam lifecycle: scheduling, sitting, grading, results.

Each sitting is frozen at open time: the presented prompts (with shuffled
options) and the canonical answer key are stored on the instance row, so a
sitting grades identically even if the question bank changes while it is
open. The final exam is gated by the schedule window; lecture tests are
self-paced.
"""

from __future__ import annotations

import json
import sqlite3
import uuid
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from random import SystemRandom

from satep.clock import Clock, isoformat, parse_timestamp
from satep.core.grading import grade
from satep.core.selection import assemble_test, shuffle_options
from satep.core.types import (
    MultipleChoiceQuestion,
    PresentedQuestion,
    QuestionKind,
    QuestionRef,
    SubmittedAnswer,
    TestBlueprint,
)
from satep.errors import (
    AlreadyOpen,
    AlreadySubmitted,
    Expired,
    InvalidField,
    InvalidSchedule,
    NotFound,
    NotOwner,
    OutsideWindow,
    UnknownQuestion,
)
from satep.messaging import Outbox
from satep.principals import Principal, require_admin, require_authenticated, require_user
from satep.storage.db import Database
from satep.storage.ops import Page, persist_test_groups, record_completed_test

FINAL_EXAM = "final_exam"
LECTURE_TEST = "lecture_test"

# Submissions this close past the deadline still count; network latency
# must not void an on-time click.
GRACE_SECONDS = 5

DEFAULT_LECTURE_DURATION_MINUTES = 30


@dataclass(frozen=True)
class Blueprints:
    final_mc: int = 20
    final_gf: int = 10
    lecture_mc: int = 5
    lecture_gf: int = 5


def lecture_kind(lecture_id: int) -> str:
    return f"lecture:{lecture_id}"


def parse_kind(token: str) -> tuple[str, int | None]:
    """Split a kind key into (family, lecture id): 'final_exam' or 'lecture:<n>'."""
    if token == FINAL_EXAM:
        return FINAL_EXAM, None
    if token.startswith("lecture:"):
        tail = token[len("lecture:"):]
        if tail.isdigit() and int(tail) >= 1:
            return LECTURE_TEST, int(tail)
    raise InvalidField(f"unknown test kind {token!r}")


class ExaminationService:
    def __init__(
        self,
        db: Database,
        clock: Clock,
        outbox: Outbox,
        rng=None,
        blueprints: Blueprints | None = None,
        window_enforced_kinds: tuple[str, ...] = (FINAL_EXAM,),
        grace_seconds: float = GRACE_SECONDS,
    ):
        self._db = db
        self._clock = clock
        self._outbox = outbox
        self._rng = rng or SystemRandom()
        self._blueprints = blueprints or Blueprints()
        self._window_enforced = set(window_enforced_kinds)
        self._grace = timedelta(seconds=grace_seconds)

    # -- scheduling -----------------------------------------------------------

    def set_schedule(self, principal: Principal | None, kind: str, date: str,
                     time: str, duration_minutes: int) -> dict:
        """Upsert the schedule for a kind and notify every registered user by
        email in the same transaction."""
        require_admin(principal)
        family, lec_id = parse_kind(kind)
        if family == LECTURE_TEST:
            title = self._lecture_title(lec_id)
            label = f"Test for lecture {title!r}"
        else:
            label = "Final exam"
        if not isinstance(duration_minutes, int) or duration_minutes < 1:
            raise InvalidSchedule("duration must be at least one minute")
        time = _normalize_time(time)
        start = _parse_start(date, time)
        if start < self._clock.now():
            raise InvalidSchedule(f"scheduled start {date} {time} is in the past")
        with self._db.transaction():
            self._db.execute(
                "INSERT INTO misc (Kind, Date, Time, DurationMinutes) VALUES (?, ?, ?, ?) "
                "ON CONFLICT(Kind) DO UPDATE SET Date = excluded.Date, "
                "Time = excluded.Time, DurationMinutes = excluded.DurationMinutes",
                (kind, date, time, duration_minutes),
            )
            for row in self._db.query("SELECT Email FROM users ORDER BY AM"):
                self._outbox.enqueue(
                    row["Email"],
                    f"{label} scheduled",
                    f"{label} is scheduled for {date} at {time} "
                    f"({duration_minutes} minutes).",
                )
        return {"kind": kind, "date": date, "time": time,
                "duration_minutes": duration_minutes}

    def list_schedules(self, principal: Principal | None) -> list[dict]:
        require_authenticated(principal)
        rows = self._db.query(
            "SELECT Kind, Date, Time, DurationMinutes FROM misc ORDER BY Kind"
        )
        return [
            {"kind": r["Kind"], "date": r["Date"], "time": r["Time"],
             "duration_minutes": r["DurationMinutes"]}
            for r in rows
        ]

    # -- sitting a test -----------------------------------------------------------

    def start_test(self, principal: Principal | None, kind: str) -> dict:
        principal = require_user(principal)
        family, lec_id = parse_kind(kind)
        self._expire_overdue(principal.id)
        now = self._clock.now()

        schedule = self._db.query_one("SELECT * FROM misc WHERE Kind = ?", (kind,))
        if family == FINAL_EXAM:
            self._check_window(schedule, now, "the final exam")
            duration = schedule["DurationMinutes"]
            blueprint = TestBlueprint(self._blueprints.final_mc, self._blueprints.final_gf)
        else:
            self._lecture_title(lec_id)
            if kind in self._window_enforced or LECTURE_TEST in self._window_enforced:
                self._check_window(schedule, now, f"the test for lecture {lec_id}")
            duration = (schedule["DurationMinutes"] if schedule is not None
                        else DEFAULT_LECTURE_DURATION_MINUTES)
            blueprint = TestBlueprint(
                self._blueprints.lecture_mc, self._blueprints.lecture_gf, scope=lec_id
            )

        if self._db.scalar(
            "SELECT 1 FROM test_instances WHERE AM = ? AND KindKey = ? AND State = 'open'",
            (principal.id, kind),
        ) is not None:
            raise AlreadyOpen(f"an open sitting for {kind} already exists")

        mc_pool = self._pool("multiple_questions", "IDE", lec_id if family == LECTURE_TEST else None)
        gf_pool = self._pool("filling_questions", "IDF", lec_id if family == LECTURE_TEST else None)
        mc_group, gf_group = assemble_test(blueprint, mc_pool, gf_pool, self._rng)

        presented = self._present(mc_group.question_ids, gf_group.question_ids)
        key = self._answer_key(mc_group.question_ids, gf_group.question_ids)
        instance_id = uuid.uuid4().hex
        deadline = now + timedelta(minutes=duration)
        try:
            with self._db.transaction():
                idum, iduf = persist_test_groups(self._db, mc_group, gf_group)
                self._db.execute(
                    "INSERT INTO test_instances (InstanceId, AM, KindKey, IDUM, IDUF, "
                    "OpenedAt, Deadline, State, Presented, AnswerKey) "
                    "VALUES (?, ?, ?, ?, ?, ?, ?, 'open', ?, ?)",
                    (instance_id, principal.id, kind, idum, iduf,
                     isoformat(now), isoformat(deadline),
                     json.dumps(presented), json.dumps(key)),
                )
        except sqlite3.IntegrityError as exc:
            # lost the one-open-instance race to a parallel request
            raise AlreadyOpen(f"an open sitting for {kind} already exists") from exc
        return {
            "instance_id": instance_id,
            "kind": kind,
            "opened_at": isoformat(now),
            "deadline": isoformat(deadline),
            "questions": presented,
        }

    def open_instances(self, principal: Principal | None) -> list[dict]:
        """The caller's still-open sittings, oldest first."""
        principal = require_user(principal)
        self._expire_overdue(principal.id)
        rows = self._db.query(
            "SELECT * FROM test_instances WHERE AM = ? AND State = 'open' ORDER BY OpenedAt",
            (principal.id,),
        )
        return [
            {
                "instance_id": r["InstanceId"],
                "kind": r["KindKey"],
                "opened_at": r["OpenedAt"],
                "deadline": r["Deadline"],
                "questions": json.loads(r["Presented"]),
            }
            for r in rows
        ]

    def submit_test(self, principal: Principal | None, instance_id: str,
                    answers: list[SubmittedAnswer]) -> dict:
        principal = require_user(principal)
        row = self._db.query_one(
            "SELECT * FROM test_instances WHERE InstanceId = ?", (instance_id,)
        )
        if row is None:
            raise NotFound(f"test instance {instance_id} does not exist")
        if row["AM"] != principal.id:
            raise NotOwner("this sitting belongs to another user")
        if row["State"] == "submitted":
            raise AlreadySubmitted("this sitting was already submitted")
        if row["State"] == "expired":
            raise Expired("this sitting expired; 0% was recorded")
        now = self._clock.now()
        if now > parse_timestamp(row["Deadline"]) + self._grace:
            self._expire_instance(row)
            raise Expired("the deadline passed; 0% was recorded")

        key = _load_key(row["AnswerKey"])
        provided: dict[QuestionRef, str] = {}
        for answer in answers:
            ref = (answer.kind, answer.question_id)
            if ref not in key:
                raise UnknownQuestion(
                    f"{answer.kind.value} question {answer.question_id} "
                    "is not part of this sitting"
                )
            provided[ref] = answer.response  # duplicates: last one wins
        sheet = [
            SubmittedAnswer(question_id=qid, kind=kind, response=provided.get((kind, qid), ""))
            for kind, qid in key
        ]
        result = grade(sheet, key)
        date = self._clock.today()
        is_final = row["KindKey"] == FINAL_EXAM
        with self._db.transaction():
            claimed = self._db.execute(
                "UPDATE test_instances SET State = 'submitted' "
                "WHERE InstanceId = ? AND State = 'open'",
                (instance_id,),
            ).rowcount
            if claimed != 1:
                raise AlreadySubmitted("this sitting was already submitted")
            record_completed_test(
                self._db, row["IDUM"], row["IDUF"], principal.id, date,
                result.percent, is_final,
            )
        return {
            "instance_id": instance_id,
            "kind": row["KindKey"],
            "date": date,
            "correct": result.correct_count,
            "total": result.total_count,
            "percent": result.percent,
        }

    # -- results ---------------------------------------------------------------------

    def my_results(self, principal: Principal | None) -> list[dict]:
        principal = require_user(principal)
        rows = self._db.query(
            "SELECT u.AM AS am, t.KindKey AS kind, u.Date AS date, u.Percent AS percent "
            "FROM user_complete_test u "
            "JOIN test_instances t ON t.IDUM = u.IDUM AND t.IDUF = u.IDUF AND t.AM = u.AM "
            "WHERE u.AM = ? ORDER BY u.Date DESC, u.rowid DESC",
            (principal.id,),
        )
        return [dict(r) for r in rows]

    def admin_results(self, principal: Principal | None, am: int | None = None,
                      kind: str | None = None, page: int = 1,
                      page_size: int = 20) -> Page:
        require_admin(principal)
        if page < 1 or page_size < 1:
            raise InvalidField("page and page_size must be >= 1")
        where, params = [], []
        if am is not None:
            where.append("u.AM = ?")
            params.append(am)
        if kind is not None:
            if kind == LECTURE_TEST:
                where.append("t.KindKey LIKE 'lecture:%'")
            elif kind == FINAL_EXAM or kind.startswith("lecture:"):
                where.append("t.KindKey = ?")
                params.append(kind)
            else:
                raise InvalidField(f"unknown result kind filter {kind!r}")
        clause = f"WHERE {' AND '.join(where)}" if where else ""
        base = (
            "FROM user_complete_test u "
            "JOIN test_instances t ON t.IDUM = u.IDUM AND t.IDUF = u.IDUF AND t.AM = u.AM "
            f"{clause}"
        )
        total = self._db.scalar(f"SELECT COUNT(*) {base}", params)
        rows = self._db.query(
            "SELECT u.AM AS am, t.KindKey AS kind, u.Date AS date, u.Percent AS percent "
            f"{base} ORDER BY u.Date DESC, u.rowid DESC LIMIT ? OFFSET ?",
            (*params, page_size, (page - 1) * page_size),
        )
        return Page(items=[dict(r) for r in rows], total=total,
                    page=page, page_size=page_size)

    # -- internals ----------------------------------------------------------------------

    def _check_window(self, schedule, now: datetime, label: str) -> None:
        if schedule is None:
            raise OutsideWindow(f"{label} is not scheduled")
        start = _parse_start(schedule["Date"], schedule["Time"])
        end = start + timedelta(minutes=schedule["DurationMinutes"])
        if not start <= now <= end:
            raise OutsideWindow(
                f"{label} runs {schedule['Date']} {schedule['Time']} "
                f"for {schedule['DurationMinutes']} minutes"
            )

    def _pool(self, table: str, key: str, lecture_id: int | None) -> list[int]:
        if lecture_id is None:
            rows = self._db.query(f"SELECT {key} AS id FROM {table} ORDER BY {key}")
        else:
            rows = self._db.query(
                f"SELECT {key} AS id FROM {table} WHERE IDD = ? ORDER BY {key}",
                (lecture_id,),
            )
        return [r["id"] for r in rows]

    def _present(self, mc_ids: tuple[int, ...], gf_ids: tuple[int, ...]) -> list[dict]:
        """Presentation payload: the MC block in group order, then the GF block."""
        out = []
        for qid in mc_ids:
            row = self._db.query_one(
                "SELECT * FROM multiple_questions WHERE IDE = ?", (qid,)
            )
            question = MultipleChoiceQuestion(
                id=row["IDE"], lecture=row["IDD"], question=row["Question"],
                right_answer=row["RA"],
                wrong_answers=tuple(
                    w for w in (row["WA1"], row["WA2"], row["WA3"]) if w is not None
                ),
            )
            shown: PresentedQuestion = shuffle_options(question, self._rng)
            out.append({
                "kind": QuestionKind.MULTIPLE_CHOICE.value,
                "id": qid,
                "question": shown.prompt,
                "options": list(shown.options),
            })
        for qid in gf_ids:
            row = self._db.query_one(
                "SELECT Question FROM filling_questions WHERE IDF = ?", (qid,)
            )
            out.append({
                "kind": QuestionKind.GAP_FILL.value,
                "id": qid,
                "question": row["Question"],
            })
        return out

    def _answer_key(self, mc_ids: tuple[int, ...], gf_ids: tuple[int, ...]) -> dict[str, str]:
        key: dict[str, str] = {}
        for qid in mc_ids:
            ra = self._db.scalar("SELECT RA FROM multiple_questions WHERE IDE = ?", (qid,))
            key[f"{QuestionKind.MULTIPLE_CHOICE.value}:{qid}"] = ra
        for qid in gf_ids:
            answer = self._db.scalar(
                "SELECT Answer FROM filling_questions WHERE IDF = ?", (qid,)
            )
            key[f"{QuestionKind.GAP_FILL.value}:{qid}"] = answer
        return key

    def _expire_overdue(self, am: int | None = None) -> None:
        """Close out open sittings whose deadline (plus grace) has passed,
        recording the 0% the missed deadline earns."""
        if am is None:
            rows = self._db.query("SELECT * FROM test_instances WHERE State = 'open'")
        else:
            rows = self._db.query(
                "SELECT * FROM test_instances WHERE State = 'open' AND AM = ?", (am,)
            )
        now = self._clock.now()
        for row in rows:
            if now > parse_timestamp(row["Deadline"]) + self._grace:
                self._expire_instance(row)

    def _expire_instance(self, row) -> None:
        with self._db.transaction():
            claimed = self._db.execute(
                "UPDATE test_instances SET State = 'expired' "
                "WHERE InstanceId = ? AND State = 'open'",
                (row["InstanceId"],),
            ).rowcount
            if claimed != 1:
                return
            record_completed_test(
                self._db, row["IDUM"], row["IDUF"], row["AM"],
                self._clock.today(), 0.0, row["KindKey"] == FINAL_EXAM,
            )

    def _lecture_title(self, lecture_id: int) -> str:
        title = self._db.scalar(
            "SELECT Lecture FROM lectures WHERE IDD = ?", (lecture_id,)
        )
        if title is None:
            raise NotFound(f"lecture {lecture_id} does not exist")
        return title


def _load_key(text: str) -> dict[QuestionRef, str]:
    raw = json.loads(text)
    key: dict[QuestionRef, str] = {}
    for packed, answer in raw.items():
        kind_token, _, qid = packed.partition(":")
        key[(QuestionKind(kind_token), int(qid))] = answer
    return key


def _normalize_time(time: str) -> str:
    for fmt in ("%H:%M:%S", "%H:%M"):
        try:
            return datetime.strptime(time, fmt).strftime("%H:%M:%S")
        except ValueError:
            continue
    raise InvalidSchedule(f"time {time!r} must be HH:MM:SS")


def _parse_start(date: str, time: str) -> datetime:
    try:
        start = datetime.strptime(f"{date} {time}", "%Y-%m-%d %H:%M:%S")
    except ValueError:
        raise InvalidSchedule(f"date {date!r} must be YYYY-MM-DD") from None
    return start.replace(tzinfo=timezone.utc)
