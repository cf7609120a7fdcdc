"""Automatic answer checking.

Responses match their canonical answer after whitespace normalization and
case folding: leading/trailing whitespace is trimmed, internal runs collapse
to a single space, and comparison ignores case. Both question kinds are
graded by the same text comparison and weigh equally in the percent.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence

from satep.core.types import GradeResult, QuestionRef, SubmittedAnswer
from satep.errors import UnknownQuestion


def normalize_answer(text: str) -> str:
    return " ".join(text.split()).casefold()


def grade(answers: Sequence[SubmittedAnswer], key: Mapping[QuestionRef, str]) -> GradeResult:
    """Count normalized matches of each answer against the canonical key.

    The key maps (kind, question id) to the canonical answer text; ids alone
    would be ambiguous because the two kinds number their questions
    independently. Every key entry must be answered exactly once; callers
    submit unanswered questions as empty responses.
    """
    seen: set[QuestionRef] = set()
    correct = 0
    for answer in answers:
        ref = (answer.kind, answer.question_id)
        if ref not in key:
            raise UnknownQuestion(
                f"{answer.kind.value} question {answer.question_id} is not part of this test"
            )
        if ref in seen:
            raise ValueError(f"duplicate answer for {answer.kind.value} question {answer.question_id}")
        seen.add(ref)
        if normalize_answer(answer.response) == normalize_answer(key[ref]):
            correct += 1
    if len(answers) != len(key):
        raise ValueError(f"expected {len(key)} answers, got {len(answers)}")
    return GradeResult(correct_count=correct, total_count=len(key))
