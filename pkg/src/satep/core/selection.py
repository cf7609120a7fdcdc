"""Random question selection and option shuffling.

All randomness flows through an injected random.Random so any draw is
reproducible from a seed.
"""

from __future__ import annotations

import random
from collections.abc import Sequence

from satep.core.types import (
    MultipleChoiceQuestion,
    PresentedQuestion,
    QuestionKind,
    TestBlueprint,
    TestGroup,
)
from satep.errors import PoolTooSmall


def select_questions(pool: Sequence[int], count: int, rng: random.Random) -> list[int]:
    """Draw `count` distinct ids uniformly without replacement, in random order."""
    if len(set(pool)) != len(pool):
        raise ValueError("question pool must not contain duplicates")
    if count > len(pool):
        raise PoolTooSmall(f"pool holds {len(pool)} questions, {count} requested")
    return rng.sample(list(pool), count)


def shuffle_options(q: MultipleChoiceQuestion, rng: random.Random) -> PresentedQuestion:
    """Present a multiple-choice question with its answers in uniformly random order."""
    options = [q.right_answer, *q.wrong_answers]
    rng.shuffle(options)
    return PresentedQuestion(
        question_id=q.id,
        kind=QuestionKind.MULTIPLE_CHOICE,
        prompt=q.question,
        options=tuple(options),
    )


def assemble_test(
    blueprint: TestBlueprint,
    mc_pool: Sequence[int],
    gf_pool: Sequence[int],
    rng: random.Random,
) -> tuple[TestGroup, TestGroup]:
    """Draw both sides of a test from pools already filtered to the blueprint scope.

    A zero-count side yields the explicit empty group. Group ids are not
    assigned here; storage allocates them on persist.
    """
    try:
        mc_ids = select_questions(mc_pool, blueprint.mc_count, rng) if blueprint.mc_count else []
    except PoolTooSmall:
        raise PoolTooSmall(
            f"multiple_choice pool holds {len(mc_pool)} questions, "
            f"{blueprint.mc_count} requested"
        ) from None
    try:
        gf_ids = select_questions(gf_pool, blueprint.gf_count, rng) if blueprint.gf_count else []
    except PoolTooSmall:
        raise PoolTooSmall(
            f"gap_fill pool holds {len(gf_pool)} questions, {blueprint.gf_count} requested"
        ) from None
    return (
        TestGroup(kind=QuestionKind.MULTIPLE_CHOICE, question_ids=tuple(mc_ids)),
        TestGroup(kind=QuestionKind.GAP_FILL, question_ids=tuple(gf_ids)),
    )
