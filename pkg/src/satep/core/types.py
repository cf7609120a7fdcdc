"""Pure domain values for questions, test assembly and grading.

Everything here is immutable after construction and free of storage or
transport concerns, so values can be shared across concurrent requests.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from satep.errors import InvalidField, InvalidQuestion

# Register numbers (AM) and lecture ids (IDD) are plain positive integers.
RegisterNumber = int
LectureId = int

_EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")

MAX_WRONG_ANSWERS = 3


def validate_register_number(value: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise InvalidField(f"register number must be a positive integer, got {value!r}")
    return value


def validate_lecture_id(value: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise InvalidQuestion(f"lecture id must be a positive integer, got {value!r}")
    return value


def valid_email(text: str) -> bool:
    return bool(_EMAIL_RE.match(text))


class QuestionKind(str, Enum):
    MULTIPLE_CHOICE = "multiple_choice"
    GAP_FILL = "gap_fill"


# (kind, question id) pairs identify a question; the two kinds draw their
# ids from independent sequences, so a bare id is ambiguous.
QuestionRef = tuple[QuestionKind, int]


@dataclass(frozen=True)
class PersonProfile:
    name: str
    surname: str
    username: str
    email: str
    department: str

    def validate(self) -> None:
        for label, value in (
            ("name", self.name),
            ("surname", self.surname),
            ("username", self.username),
            ("email", self.email),
            ("department", self.department),
        ):
            if not value or not value.strip():
                raise InvalidField(f"profile field {label} must be nonempty")
        if not valid_email(self.email):
            raise InvalidField(f"email {self.email!r} is not a valid address")


@dataclass(frozen=True)
class Credential:
    """Salted one-way digest of a password; never the plaintext."""

    password_digest: str
    salt: bytes


@dataclass(frozen=True)
class MultipleChoiceQuestion:
    id: int
    lecture: LectureId
    question: str
    right_answer: str
    wrong_answers: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "wrong_answers", tuple(self.wrong_answers))
        validate_lecture_id(self.lecture)
        if not self.question.strip():
            raise InvalidQuestion("question text must be nonempty")
        if not self.right_answer.strip():
            raise InvalidQuestion("right answer must be nonempty")
        if not 1 <= len(self.wrong_answers) <= MAX_WRONG_ANSWERS:
            raise InvalidQuestion(
                f"multiple choice question needs 1..{MAX_WRONG_ANSWERS} wrong answers, "
                f"got {len(self.wrong_answers)}"
            )
        for wa in self.wrong_answers:
            if not wa.strip():
                raise InvalidQuestion("wrong answers must be nonempty")
        if self.right_answer in self.wrong_answers:
            raise InvalidQuestion("right answer must not appear among the wrong answers")


@dataclass(frozen=True)
class GapFillQuestion:
    id: int
    lecture: LectureId
    question: str
    answer: str

    def __post_init__(self):
        validate_lecture_id(self.lecture)
        if not self.question.strip():
            raise InvalidQuestion("question text must be nonempty")
        if not self.answer.strip():
            raise InvalidQuestion("answer must be nonempty")


@dataclass(frozen=True)
class TestGroup:
    """A frozen, ordered set of question ids encoding one generated test side.

    The order is the presentation order. A group may be empty: that is the
    explicit "no questions of this kind" marker, so a graded sitting always
    carries both group references.
    """

    __test__ = False  # not a pytest class, despite the name

    kind: QuestionKind
    question_ids: tuple[int, ...]
    group_id: int | None = None  # assigned by storage on persist

    def __post_init__(self):
        object.__setattr__(self, "question_ids", tuple(self.question_ids))
        if len(set(self.question_ids)) != len(self.question_ids):
            raise InvalidQuestion("test group must not repeat a question id")

    def __len__(self) -> int:
        return len(self.question_ids)


@dataclass(frozen=True)
class TestBlueprint:
    """Recipe for one test: how many questions of each kind, from which scope.

    scope None means "all lectures"; a lecture id restricts the draw to that
    lecture's question pool.
    """

    __test__ = False  # not a pytest class, despite the name

    mc_count: int
    gf_count: int
    scope: LectureId | None = None

    def __post_init__(self):
        if self.mc_count < 0 or self.gf_count < 0:
            raise InvalidQuestion("blueprint counts must be non-negative")
        if self.mc_count + self.gf_count < 1:
            raise InvalidQuestion("blueprint must request at least one question")
        if self.scope is not None:
            validate_lecture_id(self.scope)


@dataclass(frozen=True)
class PresentedQuestion:
    """One question as shown to the examinee; never reveals which option is right."""

    question_id: int
    kind: QuestionKind
    prompt: str
    options: tuple[str, ...] | None = None  # multiple choice only, shuffled

    def __post_init__(self):
        if self.kind is QuestionKind.MULTIPLE_CHOICE:
            if not self.options:
                raise InvalidQuestion("multiple choice presentation requires options")
            object.__setattr__(self, "options", tuple(self.options))
            if len(set(self.options)) != len(self.options):
                raise InvalidQuestion("presented options must not repeat")
        elif self.options is not None:
            raise InvalidQuestion("gap fill presentation carries no options")


@dataclass(frozen=True)
class SubmittedAnswer:
    question_id: int
    kind: QuestionKind
    response: str


@dataclass(frozen=True)
class GradeResult:
    correct_count: int
    total_count: int
    percent: float = field(default=-1.0)

    def __post_init__(self):
        if self.total_count < 1:
            raise InvalidQuestion("grade needs at least one question")
        if not 0 <= self.correct_count <= self.total_count:
            raise InvalidQuestion("correct count must lie within [0, total]")
        if self.percent < 0:
            object.__setattr__(self, "percent", 100.0 * self.correct_count / self.total_count)
