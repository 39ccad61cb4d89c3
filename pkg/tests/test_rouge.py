from __future__ import annotations

import math
import random
import statistics

import pytest
from hypothesis import given
from hypothesis import strategies as st

from persum.rouge import (
    TokenizerConfig,
    aggregate,
    rouge_l,
    rouge_n,
    score_pair,
    tokenize,
)
from util import VOCAB, naive_lcs_prf, naive_ngram_prf, random_token_list

CAND = "the cat on mat".split()
REF = "the cat sat on the mat".split()


def test_tokenize_strips_punctuation_and_lowercases():
    assert tokenize("The Cat, sat!") == ["the", "cat", "sat"]


def test_tokenize_empty_string():
    assert tokenize("") == []


def test_tokenize_keeps_nonalnum_when_disabled():
    assert tokenize("A-B", TokenizerConfig(strip_non_alnum=False)) == ["a-b"]


def test_tokenize_case_preserved_when_disabled():
    assert tokenize("The Cat", TokenizerConfig(lowercase=False, strip_non_alnum=False)) == ["The", "Cat"]


def test_tokenize_stemming_collapses_inflections():
    config = TokenizerConfig(stemming=True)
    assert tokenize("connection connections connecting connected", config) == ["connect"] * 4
    assert tokenize("ponies caresses hopping", config) == ["poni", "caress", "hop"]


def test_rouge_n_identity():
    tokens = "a b c".split()
    for n in (1, 2):
        score = rouge_n(tokens, tokens, n)
        assert score.precision == score.recall == score.f_measure == 1.0


def test_rouge_n_worked_example_unigram():
    score = rouge_n(CAND, REF, 1)
    assert score.precision == 1.0
    assert score.recall == pytest.approx(4 / 6, abs=1e-15)
    assert score.f_measure == pytest.approx(0.8, abs=1e-12)


def test_rouge_n_worked_example_bigram():
    score = rouge_n(CAND, REF, 2)
    assert score.precision == pytest.approx(1 / 3, abs=1e-15)
    assert score.recall == pytest.approx(1 / 5, abs=1e-15)
    assert score.f_measure == pytest.approx(0.25, abs=1e-12)


def test_rouge_n_disjoint_vocabularies():
    score = rouge_n("a b".split(), "x y".split(), 1)
    assert score.precision == score.recall == score.f_measure == 0.0


def test_rouge_n_rejects_other_orders():
    with pytest.raises(ValueError):
        rouge_n(CAND, REF, 3)


def test_rouge_l_identity():
    score = rouge_l(["a"], ["a"])
    assert score.f_measure == 1.0


def test_rouge_l_worked_example():
    score = rouge_l(CAND, REF)
    assert score.precision == 1.0
    assert score.recall == pytest.approx(2 / 3, abs=1e-15)
    assert score.f_measure == pytest.approx(0.8, abs=1e-12)


def test_rouge_l_empty_side_is_zero():
    score = rouge_l([], ["a", "b"])
    assert score.precision == score.recall == score.f_measure == 0.0


def test_score_pair_worked_example():
    triple = score_pair("the cat on mat", "the cat sat on the mat")
    assert triple.r1.f_measure == pytest.approx(0.8, abs=1e-12)
    assert triple.r2.f_measure == pytest.approx(0.25, abs=1e-12)
    assert triple.rl.f_measure == pytest.approx(0.8, abs=1e-12)


def test_score_pair_identical_and_empty():
    assert score_pair("a b", "a b").r1.f_measure == 1.0
    triple = score_pair("", "a b")
    assert triple.r1.f_measure == triple.r2.f_measure == triple.rl.f_measure == 0.0


def test_matches_naive_oracles_on_random_pairs():
    rand = random.Random(2024)
    for _ in range(300):
        cand = random_token_list(rand)
        ref = random_token_list(rand)
        for n in (1, 2):
            got = rouge_n(cand, ref, n)
            want = naive_ngram_prf(cand, ref, n)
            assert got.precision == pytest.approx(want[0], abs=1e-12)
            assert got.recall == pytest.approx(want[1], abs=1e-12)
            assert got.f_measure == pytest.approx(want[2], abs=1e-12)
        got = rouge_l(cand, ref)
        want = naive_lcs_prf(cand, ref)
        assert got.f_measure == pytest.approx(want[2], abs=1e-12)


def test_appending_reference_token_never_lowers_unigram_recall():
    rand = random.Random(7)
    for _ in range(200):
        cand = random_token_list(rand)
        ref = random_token_list(rand, max_len=12) or ["alpha"]
        before = rouge_n(cand, ref, 1).recall
        after = rouge_n(cand + [rand.choice(ref)], ref, 1).recall
        assert after >= before - 1e-15


def test_reversal_changes_rouge_l_but_not_rouge_1():
    cand = ["alpha", "bravo", "charlie"]
    ref = ["alpha", "bravo", "charlie"]
    reversed_cand = list(reversed(cand))
    assert rouge_n(cand, ref, 1).f_measure == rouge_n(reversed_cand, ref, 1).f_measure
    assert rouge_l(cand, ref).f_measure == 1.0
    assert rouge_l(reversed_cand, ref).f_measure != 1.0


@given(
    st.lists(st.sampled_from(VOCAB), max_size=15),
    st.lists(st.sampled_from(VOCAB), max_size=15),
)
def test_scores_stay_in_unit_interval(cand, ref):
    for score in (rouge_n(cand, ref, 1), rouge_n(cand, ref, 2), rouge_l(cand, ref)):
        assert 0.0 <= score.precision <= 1.0
        assert 0.0 <= score.recall <= 1.0
        assert 0.0 <= score.f_measure <= 1.0


@given(st.lists(st.sampled_from(VOCAB), min_size=1, max_size=15))
def test_self_identity(tokens):
    assert rouge_n(tokens, tokens, 1).f_measure == 1.0
    assert rouge_l(tokens, tokens).f_measure == 1.0
    if len(tokens) >= 2:
        assert rouge_n(tokens, tokens, 2).f_measure == 1.0


def test_aggregate_single_run():
    cell = aggregate([0.4])
    assert cell.mean == 0.4
    assert cell.deviation == 0.0
    assert cell.n_runs == 1


def test_aggregate_two_runs_sample_deviation():
    cell = aggregate([0.2, 0.4])
    assert cell.mean == pytest.approx(0.3, abs=1e-15)
    assert cell.deviation == pytest.approx(math.sqrt(0.02), abs=1e-12)
    assert cell.deviation == statistics.stdev([0.2, 0.4])


def test_aggregate_constant_runs():
    cell = aggregate([0.3, 0.3, 0.3])
    assert cell.mean == pytest.approx(0.3)
    assert cell.deviation == 0.0


def test_aggregate_empty_errors():
    with pytest.raises(ValueError):
        aggregate([])
