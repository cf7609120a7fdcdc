"""Selection and shuffling: determinism, uniformity against exact combinatorics."""

import math
import random
from collections import Counter
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satep.core import (
    MultipleChoiceQuestion,
    QuestionKind,
    select_questions,
    shuffle_options,
)
from satep.errors import PoolTooSmall


def test_draw_is_subset_without_replacement():
    rng = random.Random(7)
    got = select_questions(list(range(1, 31)), 20, rng)
    assert len(got) == 20
    assert len(set(got)) == 20
    assert set(got) <= set(range(1, 31))


def test_single_question_pool():
    assert select_questions([7], 1, random.Random(0)) == [7]


def test_pool_too_small():
    with pytest.raises(PoolTooSmall):
        select_questions([1, 2, 3], 4, random.Random(0))


def test_duplicate_pool_rejected():
    with pytest.raises(ValueError):
        select_questions([1, 2, 2], 2, random.Random(0))


def test_fixed_seed_is_deterministic():
    first = select_questions([1, 2, 3], 2, random.Random(42))
    for _ in range(5):
        assert select_questions([1, 2, 3], 2, random.Random(42)) == first


def test_pair_frequencies_uniform_over_30k_trials():
    # C(3,2) = 3 unordered pairs, each expected at 1/3. Binomial 3-sigma band:
    # sigma = sqrt(n * p * (1-p)) with n=30000, p=1/3.
    trials = 30_000
    rng = random.Random(1234)
    counts = Counter()
    for _ in range(trials):
        counts[frozenset(select_questions([1, 2, 3], 2, rng))] += 1
    assert set(counts) == {frozenset(p) for p in combinations([1, 2, 3], 2)}
    expected = trials / 3
    tolerance = 3 * math.sqrt(trials * (1 / 3) * (2 / 3))
    for pair, n in counts.items():
        assert abs(n - expected) <= tolerance, (pair, n)


def test_inclusion_probability_matches_k_over_n():
    # Exact value at small n: every id appears with probability k/n.
    n, k, trials = 6, 2, 24_000
    rng = random.Random(99)
    seen = Counter()
    for _ in range(trials):
        for qid in select_questions(list(range(1, n + 1)), k, rng):
            seen[qid] += 1
    p = k / n
    tolerance = 3 * math.sqrt(trials * p * (1 - p))
    for qid in range(1, n + 1):
        assert abs(seen[qid] - trials * p) <= tolerance, (qid, seen[qid])


def test_two_large_draws_almost_always_differ():
    # Collision odds for n=30, k=20 are 1/(C(30,20) * 20!), effectively zero;
    # require at least 99% of 1000 independent pairs to differ.
    rng = random.Random(5)
    pool = list(range(1, 31))
    differing = sum(
        select_questions(pool, 20, rng) != select_questions(pool, 20, rng)
        for _ in range(1000)
    )
    assert differing >= 990


MC = MultipleChoiceQuestion(
    id=1, lecture=1, question="pick one", right_answer="x", wrong_answers=("y", "z", "w")
)


def test_shuffle_presents_full_permutation():
    presented = shuffle_options(MC, random.Random(3))
    assert presented.kind is QuestionKind.MULTIPLE_CHOICE
    assert presented.question_id == 1
    assert sorted(presented.options) == sorted(["x", "y", "z", "w"])


def test_shuffle_two_options_split_evenly():
    q = MultipleChoiceQuestion(
        id=2, lecture=1, question="binary", right_answer="a", wrong_answers=("b",)
    )
    rng = random.Random(11)
    counts = Counter(shuffle_options(q, rng).options for _ in range(10_000))
    assert set(counts) == {("a", "b"), ("b", "a")}
    tolerance = 3 * math.sqrt(10_000 * 0.25)
    assert abs(counts[("a", "b")] - 5000) <= tolerance


def test_shuffle_deterministic_for_fixed_seed():
    first = shuffle_options(MC, random.Random(8)).options
    for _ in range(5):
        assert shuffle_options(MC, random.Random(8)).options == first


@settings(max_examples=60)
@given(
    wrongs=st.lists(
        st.text(min_size=1).filter(str.strip), min_size=1, max_size=3, unique=True
    ).filter(lambda ws: "right" not in ws),
    seed=st.integers(0, 2**31),
)
def test_shuffle_preserves_answer_multiset(wrongs, seed):
    q = MultipleChoiceQuestion(
        id=5, lecture=2, question="q?", right_answer="right", wrong_answers=tuple(wrongs)
    )
    presented = shuffle_options(q, random.Random(seed))
    assert sorted(presented.options) == sorted(["right", *wrongs])
