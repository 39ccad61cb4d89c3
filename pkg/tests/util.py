"""Synthetic-data builders and naive reference implementations for tests.

The naive functions deliberately use plain scans, list.count, and a full
quadratic DP table so they stay independent of the library code they check.
"""

from __future__ import annotations

import random

from persum import Corpus, Dialog, GoldSummary, SpeakerRole, Split, make_dialog

VOCAB = ("alpha", "bravo", "charlie", "delta", "echo")

ROLES = (SpeakerRole.CUSTOMER, SpeakerRole.AGENT)


def random_text(rand: random.Random, min_tokens: int = 1, max_tokens: int = 14) -> str:
    n = rand.randint(min_tokens, max_tokens)
    return " ".join(rand.choice(VOCAB) for _ in range(n))


def random_dialog(rand: random.Random, dialog_id: str, max_utterances: int = 12) -> Dialog:
    n = rand.randint(1, max_utterances)
    turns = [(rand.choice(ROLES), random_text(rand)) for _ in range(n)]
    return make_dialog(dialog_id, turns)


def two_sided_dialog(rand: random.Random, dialog_id: str) -> Dialog:
    """A dialog guaranteed to have at least one turn per role."""
    turns = [
        (SpeakerRole.CUSTOMER, random_text(rand, min_tokens=5)),
        (SpeakerRole.AGENT, random_text(rand, min_tokens=5)),
    ]
    for _ in range(rand.randint(0, 8)):
        turns.append((rand.choice(ROLES), random_text(rand)))
    return make_dialog(dialog_id, turns)


def synthetic_corpus(
    rand: random.Random,
    n_dialogs: int,
    with_gold: bool = False,
    with_split: bool = False,
    train_fraction: float = 0.8,
) -> Corpus:
    dialogs = [two_sided_dialog(rand, f"d{i:05d}") for i in range(n_dialogs)]
    gold = None
    if with_gold:
        gold = {
            d.id: GoldSummary(d.id, random_text(rand, 4, 12), random_text(rand, 4, 12))
            for d in dialogs
        }
    split = None
    if with_split:
        split = {}
        n_train = int(train_fraction * n_dialogs)
        n_val = max((n_dialogs - n_train) // 2, 1)
        for pos, d in enumerate(dialogs):
            if pos < n_train:
                split[d.id] = Split.TRAIN
            elif pos < n_train + n_val:
                split[d.id] = Split.VALIDATION
            else:
                split[d.id] = Split.TEST
    return Corpus(dialogs, gold=gold, split=split)


# --- naive oracles -----------------------------------------------------------


def naive_lead(dialog: Dialog, role: SpeakerRole, min_tokens: int = 5):
    matching = [
        u for u in dialog.utterances if u.role == role and len(u.text.split()) >= min_tokens
    ]
    return matching[0] if matching else None


def naive_long(dialog: Dialog, role: SpeakerRole):
    best = None
    for u in dialog.utterances:
        if u.role != role:
            continue
        if best is None or len(u.text.split()) > len(best.text.split()):
            best = u
    return best


def _prf(overlap: float, cand_total: int, ref_total: int) -> tuple[float, float, float]:
    p = overlap / cand_total if cand_total else 0.0
    r = overlap / ref_total if ref_total else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def naive_ngram_prf(cand: list[str], ref: list[str], n: int) -> tuple[float, float, float]:
    cand_grams = [tuple(cand[i : i + n]) for i in range(len(cand) - n + 1)]
    ref_grams = [tuple(ref[i : i + n]) for i in range(len(ref) - n + 1)]
    overlap = 0
    for gram in set(cand_grams):
        overlap += min(cand_grams.count(gram), ref_grams.count(gram))
    return _prf(overlap, len(cand_grams), len(ref_grams))


def naive_lcs_prf(cand: list[str], ref: list[str]) -> tuple[float, float, float]:
    m, n = len(cand), len(ref)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if cand[i - 1] == ref[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    return _prf(table[m][n], m, n)


def random_token_list(rand: random.Random, max_len: int = 12) -> list[str]:
    return [rand.choice(VOCAB) for _ in range(rand.randint(0, max_len))]
