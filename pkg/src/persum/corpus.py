"""Dialog corpus model: ingestion, thread reconstruction, gold selection, splits.

The canonical on-disk format is JSONL, one dialog object per line:

    {"id": str,
     "utterances": [{"role": "customer"|"agent", "text": str}, ...],
     "gold": {"customer": str, "agent": str},        # optional
     "split": "train"|"val"|"test"}                  # optional

Utterance index is implicit by position. All downstream modules consume only
this format; the Kaggle tweet CSV adapter converts external data once.
"""

from __future__ import annotations

import csv
import json
import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .rng import make_rng


class CorpusError(ValueError):
    """Input data violates a corpus contract (duplicate ids, bad fields, ...)."""


class ParseError(CorpusError):
    """A malformed input line; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SpeakerRole(str, Enum):
    CUSTOMER = "customer"
    AGENT = "agent"


class Split(str, Enum):
    TRAIN = "train"
    VALIDATION = "val"
    TEST = "test"


@dataclass(frozen=True)
class Utterance:
    """One speaker turn; token_count is recomputed from text on construction."""

    index: int
    role: SpeakerRole
    text: str
    token_count: int = field(init=False)

    def __post_init__(self):
        if not self.text.strip():
            raise CorpusError("utterance text must contain a non-whitespace character")
        object.__setattr__(self, "token_count", len(self.text.split()))


@dataclass(frozen=True)
class Dialog:
    id: str
    utterances: tuple[Utterance, ...]

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        if not self.utterances:
            raise CorpusError(f"dialog {self.id!r} has no utterances")
        for pos, utt in enumerate(self.utterances):
            if utt.index != pos:
                raise CorpusError(
                    f"dialog {self.id!r}: utterance indices must run 0..{len(self.utterances) - 1}"
                )


def make_dialog(dialog_id: str, turns: Sequence[tuple[SpeakerRole, str]]) -> Dialog:
    """Build a Dialog from (role, text) pairs, assigning positional indices."""
    utts = tuple(Utterance(i, role, text) for i, (role, text) in enumerate(turns))
    return Dialog(dialog_id, utts)


@dataclass(frozen=True)
class GoldSummary:
    """Human-written abstractive reference with one part per perspective."""

    dialog_id: str
    customer_part: str
    agent_part: str

    def __post_init__(self):
        if not self.customer_part.strip() or not self.agent_part.strip():
            raise CorpusError(
                f"gold summary for {self.dialog_id!r} must have non-empty customer and agent parts"
            )


@dataclass
class Corpus:
    dialogs: list[Dialog]
    gold: dict[str, GoldSummary] | None = None
    split: dict[str, Split] | None = None

    def validate(self) -> None:
        ids = [d.id for d in self.dialogs]
        id_set = set(ids)
        if len(ids) != len(id_set):
            seen: set[str] = set()
            for did in ids:
                if did in seen:
                    raise CorpusError(f"duplicate dialog id {did!r}")
                seen.add(did)
        if self.gold is not None:
            for did in self.gold:
                if did not in id_set:
                    raise CorpusError(f"gold summary references unknown dialog id {did!r}")
        if self.split is not None:
            for did in self.split:
                if did not in id_set:
                    raise CorpusError(f"split assignment references unknown dialog id {did!r}")
            missing = [i for i in ids if i not in self.split]
            if missing:
                raise CorpusError(
                    f"split assignment missing for {len(missing)} dialog(s), first: {missing[0]!r}"
                )

    def dialog_ids(self, split: Split | None = None) -> list[str]:
        """Dialog ids in corpus order, optionally filtered to one split."""
        if split is None:
            return [d.id for d in self.dialogs]
        if self.split is None:
            raise CorpusError("corpus has no split assignment")
        return [d.id for d in self.dialogs if self.split[d.id] == split]

    def by_id(self) -> dict[str, Dialog]:
        return {d.id: d for d in self.dialogs}


# --- canonical JSONL ---------------------------------------------------------


def _dialog_record(dialog: Dialog, gold: GoldSummary | None, split: Split | None) -> dict:
    record: dict = {
        "id": dialog.id,
        "utterances": [{"role": u.role.value, "text": u.text} for u in dialog.utterances],
    }
    if gold is not None:
        record["gold"] = {"customer": gold.customer_part, "agent": gold.agent_part}
    if split is not None:
        record["split"] = split.value
    return record


def corpus_to_jsonl(corpus: Corpus) -> Iterator[str]:
    """Serialize to canonical JSONL lines (no trailing newline per line)."""
    gold = corpus.gold or {}
    split = corpus.split or {}
    for dialog in corpus.dialogs:
        record = _dialog_record(dialog, gold.get(dialog.id), split.get(dialog.id))
        yield json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in corpus_to_jsonl(corpus):
            fh.write(line + "\n")


def parse_dialog_corpus(lines: Iterable[str]) -> Corpus:
    """Parse canonical JSONL into a validated Corpus, preserving input order."""
    dialogs: list[Dialog] = []
    gold: dict[str, GoldSummary] = {}
    split: dict[str, Split] = {}
    seen: set[str] = set()
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"invalid JSON ({exc.msg})") from exc
        if not isinstance(record, dict):
            raise ParseError(lineno, "record must be a JSON object")
        try:
            did = record["id"]
            raw_utts = record["utterances"]
        except KeyError as exc:
            raise ParseError(lineno, f"record missing required field {exc.args[0]!r}") from exc
        if not isinstance(did, str) or not did:
            raise ParseError(lineno, "dialog id must be a non-empty string")
        if did in seen:
            raise CorpusError(f"duplicate dialog id {did!r} (line {lineno})")
        seen.add(did)
        if not isinstance(raw_utts, list) or not raw_utts:
            raise ParseError(lineno, f"dialog {did!r} must have a non-empty utterance list")
        utts = []
        for pos, item in enumerate(raw_utts):
            try:
                role = SpeakerRole(item["role"])
                text = item["text"]
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(lineno, f"dialog {did!r}: bad utterance at position {pos}") from exc
            if not isinstance(text, str) or not text.strip():
                raise CorpusError(f"dialog {did!r}: empty utterance text at position {pos}")
            utts.append(Utterance(pos, role, text))
        dialogs.append(Dialog(did, tuple(utts)))
        if "gold" in record and record["gold"] is not None:
            g = record["gold"]
            try:
                gold[did] = GoldSummary(did, g["customer"], g["agent"])
            except (KeyError, TypeError) as exc:
                raise ParseError(lineno, f"dialog {did!r}: bad gold summary object") from exc
        if "split" in record and record["split"] is not None:
            try:
                split[did] = Split(record["split"])
            except ValueError as exc:
                raise ParseError(lineno, f"dialog {did!r}: unknown split {record['split']!r}") from exc
    corpus = Corpus(dialogs, gold=gold or None, split=split or None)
    corpus.validate()
    return corpus


def read_corpus(path: str | Path) -> Corpus:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_dialog_corpus(fh)


# --- tweet thread reconstruction ---------------------------------------------

TWEET_CSV_COLUMNS = (
    "tweet_id",
    "author_id",
    "inbound",
    "created_at",
    "text",
    "response_tweet_id",
    "in_response_to_tweet_id",
)

_URL_RE = re.compile(r"https?://\S+|www\.\S+")
_MENTION_RE = re.compile(r"@\w+")
_WS_RE = re.compile(r"\s+")


def clean_tweet_text(text: str) -> str:
    """Anonymize mentions/URLs and collapse whitespace runs to single spaces."""
    text = _URL_RE.sub("http://url", text)
    text = _MENTION_RE.sub("@user", text)
    return _WS_RE.sub(" ", text).strip()


@dataclass
class ThreadReport:
    """Counters surfaced as warnings; reconstruction never hard-fails on data."""

    tweets: int = 0
    dialogs: int = 0
    cyclic_chains_skipped: int = 0
    gap_truncations: int = 0
    dropped_chains: int = 0  # <2 utterances after merging, or only one role

    def as_dict(self) -> dict:
        return {
            "tweets": self.tweets,
            "dialogs": self.dialogs,
            "cyclic_chains_skipped": self.cyclic_chains_skipped,
            "gap_truncations": self.gap_truncations,
            "dropped_chains": self.dropped_chains,
        }


@dataclass(frozen=True)
class _Tweet:
    tweet_id: str
    role: SpeakerRole
    text: str
    parent: str | None


def _parse_inbound(value) -> bool:
    return str(value).strip().lower() in {"true", "1", "yes"}


def reconstruct_threads(rows: Iterable[dict]) -> tuple[list[Dialog], ThreadReport]:
    """Rebuild dialogs from a tweet-record table (Kaggle customer-support schema).

    Reply chains are followed from root tweets to leaves; consecutive tweets by
    the same role are merged into one utterance. A chain survives only with at
    least two utterances and both roles present. Dialog id is the root tweet id,
    so a branching root yields exactly one dialog: its longest chain, ties
    broken by child order in the input.
    """
    report = ThreadReport()
    tweets: dict[str, _Tweet] = {}
    order: list[str] = []
    children: dict[str, list[str]] = defaultdict(list)

    for row in rows:
        report.tweets += 1
        tid = str(row["tweet_id"]).strip()
        text = clean_tweet_text(str(row["text"]))
        if not tid or not text:
            continue
        parent = str(row.get("in_response_to_tweet_id") or "").strip() or None
        role = SpeakerRole.CUSTOMER if _parse_inbound(row["inbound"]) else SpeakerRole.AGENT
        tweets[tid] = _Tweet(tid, role, text, parent)
        order.append(tid)
    for tid in order:
        parent = tweets[tid].parent
        if parent is not None and parent in tweets:
            children[parent].append(tid)

    roots = []
    for tid in order:
        parent = tweets[tid].parent
        if parent is None:
            roots.append(tid)
        elif parent not in tweets:
            report.gap_truncations += 1
            roots.append(tid)

    visited: set[str] = set()
    dialogs: list[Dialog] = []
    for root in roots:
        # iterative DFS keeping the longest root-to-leaf path
        best_path: list[str] = []
        stack: list[list[str]] = [[root]]
        while stack:
            path = stack.pop()
            node = path[-1]
            visited.add(node)
            kids = [k for k in children.get(node, []) if k not in path]
            if not kids:
                if len(path) > len(best_path):
                    best_path = path
                continue
            # push in reverse so the first child in input order is explored first
            for kid in reversed(kids):
                stack.append(path + [kid])
        dialog = _chain_to_dialog(root, best_path, tweets)
        if dialog is None:
            report.dropped_chains += 1
        else:
            dialogs.append(dialog)

    # tweets unreachable from any root sit on reply cycles; count components
    remaining = set(tweets) - visited
    while remaining:
        node = next(iter(sorted(remaining)))
        component = {node}
        frontier = [node]
        while frontier:
            cur = frontier.pop()
            neighbours = [tweets[cur].parent] if tweets[cur].parent in remaining else []
            neighbours += [k for k in children.get(cur, []) if k in remaining]
            for n in neighbours:
                if n is not None and n not in component:
                    component.add(n)
                    frontier.append(n)
        remaining -= component
        report.cyclic_chains_skipped += 1

    report.dialogs = len(dialogs)
    return dialogs, report


def _chain_to_dialog(root: str, path: list[str], tweets: dict[str, _Tweet]) -> Dialog | None:
    merged: list[tuple[SpeakerRole, str]] = []
    for tid in path:
        tweet = tweets[tid]
        if merged and merged[-1][0] == tweet.role:
            merged[-1] = (tweet.role, merged[-1][1] + " " + tweet.text)
        else:
            merged.append((tweet.role, tweet.text))
    if len(merged) < 2 or len({role for role, _ in merged}) < 2:
        return None
    return make_dialog(root, merged)


def read_tweet_csv(path: str | Path) -> Iterator[dict]:
    """Yield tweet rows from a Kaggle-schema CSV (RFC 4180, UTF-8)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError(1, "tweet CSV has no header row")
        missing = [c for c in TWEET_CSV_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ParseError(1, f"tweet CSV missing column(s): {', '.join(missing)}")
        yield from reader


# --- gold selection and splitting --------------------------------------------


def select_gold(candidates: Sequence[GoldSummary], rng: np.random.Generator) -> GoldSummary:
    """Pick one reference uniformly; deterministic for a fixed seed and order."""
    if not candidates:
        raise CorpusError("cannot select a gold summary from an empty candidate list")
    return candidates[int(rng.integers(len(candidates)))]


DEFAULT_SPLIT_RATIOS = (0.8, 0.1, 0.1)


def split_corpus(
    corpus: Corpus,
    ratios: tuple[float, float, float] = DEFAULT_SPLIT_RATIOS,
    rng: np.random.Generator | None = None,
    seed: int = 0,
) -> Corpus:
    """Assign train/val/test by seeded shuffle and floor arithmetic on ratios."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise CorpusError(f"split ratios must sum to 1.0, got {sum(ratios)!r}")
    n = len(corpus.dialogs)
    if n < 3:
        raise CorpusError(f"need at least 3 dialogs to split, got {n}")
    if rng is None:
        rng = make_rng(seed)
    ids = [d.id for d in corpus.dialogs]
    shuffled = [ids[i] for i in rng.permutation(n)]
    n_train = math.floor(ratios[0] * n)
    n_val = math.floor(ratios[1] * n)
    assignment: dict[str, Split] = {}
    for pos, did in enumerate(shuffled):
        if pos < n_train:
            assignment[did] = Split.TRAIN
        elif pos < n_train + n_val:
            assignment[did] = Split.VALIDATION
        else:
            assignment[did] = Split.TEST
    return with_split(corpus, assignment)


def with_split(corpus: Corpus, assignment: dict[str, Split]) -> Corpus:
    """Return a corpus honoring an externally supplied split assignment."""
    out = Corpus(corpus.dialogs, gold=corpus.gold, split=dict(assignment))
    out.validate()
    return out


def load_split_csv(path: str | Path) -> dict[str, Split]:
    """Read a split file: CSV with columns dialog_id, split."""
    assignment: dict[str, Split] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"dialog_id", "split"} <= set(reader.fieldnames):
            raise ParseError(1, "split file must have columns dialog_id, split")
        for lineno, row in enumerate(reader, start=2):
            did = row["dialog_id"].strip()
            try:
                value = Split(row["split"].strip())
            except ValueError as exc:
                raise ParseError(lineno, f"unknown split value {row['split']!r}") from exc
            if did in assignment:
                raise CorpusError(f"duplicate split assignment for dialog {did!r}")
            assignment[did] = value
    return assignment
