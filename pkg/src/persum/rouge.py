"""ROUGE-1/2/L precision, recall, and F-measure plus run aggregation.

ROUGE-L uses the longest common subsequence over the full token sequences
(summary level, no sentence splitting). F-measure is the plain harmonic mean.
Aggregation renders the mean of per-run scores with the sample standard
deviation (n-1 denominator) as the +/- column.
"""

from __future__ import annotations

import statistics
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from . import _porter


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    strip_non_alnum: bool = True
    stemming: bool = False


DEFAULT_TOKENIZER = TokenizerConfig()


def tokenize(text: str, config: TokenizerConfig = DEFAULT_TOKENIZER) -> list[str]:
    """Lowercase, replace non-alphanumeric characters by spaces, split, stem."""
    if config.lowercase:
        text = text.lower()
    if config.strip_non_alnum:
        text = "".join(ch if ch.isalnum() else " " for ch in text)
    tokens = text.split()
    if config.stemming:
        tokens = [_porter.stem(t) for t in tokens]
    return tokens


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f_measure: float


@dataclass(frozen=True)
class ScoreTriple:
    r1: RougeScore
    r2: RougeScore
    rl: RougeScore


def _f_measure(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _make_score(overlap: float, candidate_total: int, reference_total: int) -> RougeScore:
    precision = overlap / candidate_total if candidate_total > 0 else 0.0
    recall = overlap / reference_total if reference_total > 0 else 0.0
    return RougeScore(precision, recall, _f_measure(precision, recall))


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    """Clipped n-gram overlap score for n in {1, 2}."""
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    cand_counts = _ngram_counts(candidate, n)
    ref_counts = _ngram_counts(reference, n)
    overlap = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    return _make_score(
        overlap,
        max(len(candidate) - n + 1, 0),
        max(len(reference) - n + 1, 0),
    )


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """Longest-common-subsequence score over the full token sequences."""
    lcs = _lcs_length(candidate, reference)
    return _make_score(lcs, len(candidate), len(reference))


def score_pair(
    candidate: str, reference: str, config: TokenizerConfig = DEFAULT_TOKENIZER
) -> ScoreTriple:
    """Tokenize both sides once and compute ROUGE-1, ROUGE-2, and ROUGE-L."""
    cand = tokenize(candidate, config)
    ref = tokenize(reference, config)
    return ScoreTriple(
        r1=rouge_n(cand, ref, 1),
        r2=rouge_n(cand, ref, 2),
        rl=rouge_l(cand, ref),
    )


@dataclass(frozen=True)
class AggregateCell:
    mean: float
    deviation: float
    n_runs: int


def aggregate(per_run_means: Sequence[float]) -> AggregateCell:
    """Mean and sample standard deviation over per-run means."""
    if not per_run_means:
        raise ValueError("cannot aggregate an empty list of run means")
    mean = statistics.fmean(per_run_means)
    deviation = statistics.stdev(per_run_means) if len(per_run_means) >= 2 else 0.0
    return AggregateCell(mean=mean, deviation=deviation, n_runs=len(per_run_means))
