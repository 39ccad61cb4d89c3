"""Lead/Long weak-labeling heuristics producing (source, target) training pairs.

A weak pair pairs the flattened dialog text with one utterance of the requested
perspective: the first sufficiently long utterance (lead) or the longest one
(long). The masked variant removes the target utterance from the source, which
is the hand-off format expected by sequence-to-sequence trainers.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Corpus, Dialog, SpeakerRole, Utterance

DEFAULT_MIN_TOKENS = 5


class HeuristicKind(str, Enum):
    LEAD = "lead"
    LONG = "long"


@dataclass(frozen=True)
class WeakPair:
    dialog_id: str
    perspective: SpeakerRole
    heuristic: HeuristicKind
    masked: bool
    source_text: str
    target_summary: str


@dataclass
class CoverageReport:
    total: int = 0
    excluded: int = 0
    labeled: int = 0
    skipped: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def lead_utterance(
    dialog: Dialog, role: SpeakerRole, min_tokens: int = DEFAULT_MIN_TOKENS
) -> Utterance | None:
    """Earliest utterance of the role with at least min_tokens tokens."""
    if min_tokens < 1:
        raise ValueError("min_tokens must be >= 1")
    for utt in dialog.utterances:
        if utt.role == role and utt.token_count >= min_tokens:
            return utt
    return None


def long_utterance(dialog: Dialog, role: SpeakerRole) -> Utterance | None:
    """Utterance of the role with maximal token count; earliest index wins ties."""
    best: Utterance | None = None
    for utt in dialog.utterances:
        if utt.role == role and (best is None or utt.token_count > best.token_count):
            best = utt
    return best


def select_target(
    dialog: Dialog,
    role: SpeakerRole,
    heuristic: HeuristicKind,
    min_tokens: int = DEFAULT_MIN_TOKENS,
) -> Utterance | None:
    if heuristic is HeuristicKind.LEAD:
        return lead_utterance(dialog, role, min_tokens)
    return long_utterance(dialog, role)


def utterance_line(utt: Utterance) -> str:
    return f"{utt.role.value}: {utt.text}"


def serialize_dialog(dialog: Dialog, drop_line: str | None = None) -> str:
    """Flatten to role-prefixed lines; optionally drop every line equal to drop_line.

    Dropping works by text equality so a masked source never contains the target
    line, even when duplicate utterances exist.
    """
    lines = [utterance_line(u) for u in dialog.utterances]
    if drop_line is not None:
        lines = [line for line in lines if line != drop_line]
    return "\n".join(lines)


def make_weak_pair(
    dialog: Dialog,
    role: SpeakerRole,
    heuristic: HeuristicKind,
    masked: bool = False,
    min_tokens: int = DEFAULT_MIN_TOKENS,
) -> WeakPair | None:
    """Build one weak pair, or None when the heuristic finds no target."""
    target = select_target(dialog, role, heuristic, min_tokens)
    if target is None:
        return None
    drop = utterance_line(target) if masked else None
    return WeakPair(
        dialog_id=dialog.id,
        perspective=role,
        heuristic=heuristic,
        masked=masked,
        source_text=serialize_dialog(dialog, drop_line=drop),
        target_summary=target.text,
    )


def weaklabel_corpus(
    corpus: Corpus,
    role: SpeakerRole,
    heuristic: HeuristicKind,
    masked: bool = False,
    exclude_ids: Iterable[str] = (),
    min_tokens: int = DEFAULT_MIN_TOKENS,
) -> tuple[list[WeakPair], CoverageReport]:
    """Label every non-excluded dialog; skips (not errors) when a heuristic fails."""
    excluded = set(exclude_ids)
    report = CoverageReport()
    pairs: list[WeakPair] = []
    for dialog in corpus.dialogs:
        report.total += 1
        if dialog.id in excluded:
            report.excluded += 1
            continue
        pair = make_weak_pair(dialog, role, heuristic, masked, min_tokens)
        if pair is None:
            report.skipped += 1
        else:
            report.labeled += 1
            pairs.append(pair)
    return pairs, report


def weak_pair_record(pair: WeakPair) -> dict:
    return {
        "dialog_id": pair.dialog_id,
        "perspective": pair.perspective.value,
        "heuristic": pair.heuristic.value,
        "masked": pair.masked,
        "source": pair.source_text,
        "target": pair.target_summary,
    }


def write_weak_pairs(pairs: Sequence[WeakPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pair in pairs:
            fh.write(json.dumps(weak_pair_record(pair), ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")
