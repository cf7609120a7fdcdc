"""Side-effect-free domain core: types, question selection, grading."""

from satep.core.grading import grade, normalize_answer
from satep.core.selection import assemble_test, select_questions, shuffle_options
from satep.core.types import (
    Credential,
    GapFillQuestion,
    GradeResult,
    LectureId,
    MultipleChoiceQuestion,
    PersonProfile,
    PresentedQuestion,
    QuestionKind,
    QuestionRef,
    RegisterNumber,
    SubmittedAnswer,
    TestBlueprint,
    TestGroup,
)

__all__ = [
    "Credential",
    "GapFillQuestion",
    "GradeResult",
    "LectureId",
    "MultipleChoiceQuestion",
    "PersonProfile",
    "PresentedQuestion",
    "QuestionKind",
    "QuestionRef",
    "RegisterNumber",
    "SubmittedAnswer",
    "TestBlueprint",
    "TestGroup",
    "assemble_test",
    "grade",
    "normalize_answer",
    "select_questions",
    "shuffle_options",
]
