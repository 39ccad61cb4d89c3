"""Candidate summaries: heuristic baselines, indirect-speech post-processing,
perspective concatenation, and ingestion of externally generated predictions.

Method names are canonical snake_case strings. The built-in family is the
heuristic baselines, e.g. ``lead_base``, ``long_post_process_base``, and the
two-sided ``lead_long_post_process_base`` (customer heuristic, agent heuristic).
Every other name is an external method whose outputs must be supplied as
prediction files; names containing ``post_process`` get the prefix rule applied
by the harness before scoring.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Dialog, SpeakerRole
from .weaklabel import DEFAULT_MIN_TOKENS, HeuristicKind, select_target


class PredictionError(ValueError):
    """A prediction file violates the expected schema."""


class Perspective(str, Enum):
    CUSTOMER = "customer"
    AGENT = "agent"
    FULL = "full"

    @classmethod
    def from_role(cls, role: SpeakerRole) -> "Perspective":
        return cls(role.value)

    @property
    def role(self) -> SpeakerRole:
        if self is Perspective.FULL:
            raise ValueError("the full perspective has no single speaker role")
        return SpeakerRole(self.value)


@dataclass(frozen=True)
class CandidateSummary:
    dialog_id: str
    perspective: Perspective
    method: str
    text: str
    post_processed: bool = False

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"candidate summary for {self.dialog_id!r} has empty text")


# --- post-processing ----------------------------------------------------------

OPENER_PATTERN = re.compile(r"^(the\s+)?(customer|agent)\b", re.IGNORECASE)


@dataclass(frozen=True)
class PrefixConfig:
    customer: str = "The customer says: "
    agent: str = "The agent says: "

    def for_role(self, role: SpeakerRole) -> str:
        return self.customer if role is SpeakerRole.CUSTOMER else self.agent


DEFAULT_PREFIXES = PrefixConfig()


def post_process(
    text: str, role: SpeakerRole, prefixes: PrefixConfig = DEFAULT_PREFIXES
) -> tuple[str, bool]:
    """Prepend an indirect-speech clause unless the text already opens with one."""
    if not text:
        raise ValueError("cannot post-process empty text")
    if OPENER_PATTERN.match(text):
        return text, False
    return prefixes.for_role(role) + text, True


def post_process_rate(candidates: Sequence[CandidateSummary]) -> float:
    """Fraction of candidates on which the prefix rule fired."""
    if not candidates:
        raise ValueError("cannot compute a post-process rate over an empty list")
    fired = sum(1 for c in candidates if c.post_processed)
    return fired / len(candidates)


# --- heuristic baselines ------------------------------------------------------


def heuristic_summarize(
    dialog: Dialog,
    role: SpeakerRole,
    heuristic: HeuristicKind,
    min_tokens: int = DEFAULT_MIN_TOKENS,
) -> CandidateSummary | None:
    """Apply a heuristic directly as a summarizer (the ``*_base`` methods)."""
    target = select_target(dialog, role, heuristic, min_tokens)
    if target is None:
        return None
    return CandidateSummary(
        dialog_id=dialog.id,
        perspective=Perspective.from_role(role),
        method=f"{heuristic.value}_base",
        text=target.text,
    )


def concat_full(customer: CandidateSummary, agent: CandidateSummary) -> CandidateSummary:
    """Join customer- and agent-perspective candidates into a full summary."""
    if customer.dialog_id != agent.dialog_id:
        raise ValueError(
            f"cannot concatenate candidates for different dialogs "
            f"({customer.dialog_id!r} vs {agent.dialog_id!r})"
        )
    if customer.perspective is not Perspective.CUSTOMER or agent.perspective is not Perspective.AGENT:
        raise ValueError("concat_full expects a customer candidate and an agent candidate")
    if not customer.text or not agent.text:
        raise ValueError("cannot concatenate empty candidate texts")
    return CandidateSummary(
        dialog_id=customer.dialog_id,
        perspective=Perspective.FULL,
        method=compose_method_name(customer.method, agent.method),
        text=customer.text + " " + agent.text,
        post_processed=customer.post_processed or agent.post_processed,
    )


# --- method names -------------------------------------------------------------

_BUILTIN_RE = re.compile(r"^(lead|long)(?:_(lead|long))?(_post_process)?_base$")
_POST_PROCESS_RE = re.compile(r"(?:^|_)post_process(?:_|$)")
_SIDE_RE = re.compile(r"^(lead|long)(.*)$")


@dataclass(frozen=True)
class BuiltinMethodSpec:
    name: str
    customer_heuristic: HeuristicKind
    agent_heuristic: HeuristicKind
    post_process: bool
    two_sided: bool  # name carries one heuristic per perspective; full view only


def parse_builtin_method(name: str) -> BuiltinMethodSpec | None:
    """Describe a built-in heuristic baseline, or return None for external names."""
    match = _BUILTIN_RE.match(name)
    if match is None:
        return None
    first = HeuristicKind(match.group(1))
    second = HeuristicKind(match.group(2)) if match.group(2) else first
    return BuiltinMethodSpec(
        name=name,
        customer_heuristic=first,
        agent_heuristic=second,
        post_process=match.group(3) is not None,
        two_sided=match.group(2) is not None,
    )


def is_builtin_method(name: str) -> bool:
    return parse_builtin_method(name) is not None


def method_has_post_process(name: str) -> bool:
    return _POST_PROCESS_RE.search(name) is not None


def compose_method_name(customer_method: str, agent_method: str) -> str:
    """Name for a concatenated method, e.g. lead_* + long_* -> lead_long_*."""
    if customer_method == agent_method:
        return customer_method
    m1, m2 = _SIDE_RE.match(customer_method), _SIDE_RE.match(agent_method)
    if m1 and m2 and m1.group(2) == m2.group(2):
        return f"{m1.group(1)}_{m2.group(1)}{m1.group(2)}"
    return f"{customer_method}+{agent_method}"


def builtin_candidate(
    dialog: Dialog,
    spec: BuiltinMethodSpec,
    perspective: Perspective,
    prefixes: PrefixConfig = DEFAULT_PREFIXES,
    min_tokens: int = DEFAULT_MIN_TOKENS,
) -> CandidateSummary | None:
    """Produce one built-in candidate, or None when a heuristic finds nothing."""
    if perspective is Perspective.FULL:
        if not spec.two_sided:
            raise ValueError(
                f"method {spec.name!r} names one heuristic; the full perspective needs "
                f"a two-sided method such as 'lead_long_post_process_base'"
            )
        parts = []
        for role, heuristic in (
            (SpeakerRole.CUSTOMER, spec.customer_heuristic),
            (SpeakerRole.AGENT, spec.agent_heuristic),
        ):
            cand = heuristic_summarize(dialog, role, heuristic, min_tokens)
            if cand is None:
                return None
            if spec.post_process:
                text, fired = post_process(cand.text, role, prefixes)
                cand = replace(cand, text=text, post_processed=fired)
            parts.append(cand)
        return replace(concat_full(parts[0], parts[1]), method=spec.name)
    if spec.two_sided:
        raise ValueError(f"method {spec.name!r} applies only to the full perspective")
    role = perspective.role
    heuristic = spec.customer_heuristic if role is SpeakerRole.CUSTOMER else spec.agent_heuristic
    cand = heuristic_summarize(dialog, role, heuristic, min_tokens)
    if cand is None:
        return None
    if spec.post_process:
        text, fired = post_process(cand.text, role, prefixes)
        cand = replace(cand, text=text, post_processed=fired)
    return replace(cand, method=spec.name)


# --- external predictions -----------------------------------------------------


@dataclass(frozen=True)
class PredictionEntry:
    dialog_id: str
    customer: str | None
    agent: str | None


@dataclass
class PredictionSet:
    """Per-dialog outputs of one externally trained model at one (size, seed)."""

    method: str
    training_size: int
    seed: int
    entries: dict[str, PredictionEntry]

    @property
    def cell(self) -> tuple[str, int, int]:
        return (self.method, self.training_size, self.seed)

    def missing_ids(self, wanted: Iterable[str]) -> list[str]:
        return [did for did in wanted if did not in self.entries]


def _optional_text(record: dict, key: str, lineno: int) -> str | None:
    value = record.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise PredictionError(f"line {lineno}: field {key!r} must be a string or null")
    return value


def parse_predictions(lines: Iterable[str]) -> PredictionSet:
    """Parse prediction JSONL: a header line, then one entry per dialog."""
    header = None
    entries: dict[str, PredictionEntry] = {}
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise PredictionError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
        if not isinstance(record, dict):
            raise PredictionError(f"line {lineno}: expected a JSON object")
        if header is None:
            try:
                header = (record["method"], record["training_size"], record["seed"])
            except KeyError as exc:
                raise PredictionError(
                    f"line {lineno}: header must carry method, training_size, seed"
                ) from exc
            if not isinstance(header[0], str) or not all(
                isinstance(v, int) and not isinstance(v, bool) for v in header[1:]
            ):
                raise PredictionError(f"line {lineno}: bad header field types")
            continue
        did = record.get("dialog_id")
        if not isinstance(did, str) or not did:
            raise PredictionError(f"line {lineno}: entry missing dialog_id")
        if did in entries:
            raise PredictionError(f"line {lineno}: duplicate dialog_id {did!r}")
        entries[did] = PredictionEntry(
            dialog_id=did,
            customer=_optional_text(record, "customer", lineno),
            agent=_optional_text(record, "agent", lineno),
        )
    if header is None:
        raise PredictionError("prediction file has no header line")
    return PredictionSet(method=header[0], training_size=header[1], seed=header[2], entries=entries)


def load_predictions(path: str | Path) -> PredictionSet:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_predictions(fh)


def write_predictions(pred: PredictionSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        header = {"method": pred.method, "training_size": pred.training_size, "seed": pred.seed}
        fh.write(json.dumps(header, ensure_ascii=False, separators=(",", ":")) + "\n")
        for entry in pred.entries.values():
            record = {"dialog_id": entry.dialog_id, "customer": entry.customer, "agent": entry.agent}
            fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")


def prediction_candidate(
    entry: PredictionEntry,
    method: str,
    perspective: Perspective,
    prefixes: PrefixConfig = DEFAULT_PREFIXES,
) -> CandidateSummary | None:
    """Turn one prediction entry into a candidate for the requested perspective.

    The full perspective joins the non-null parts with a single space, so a
    model that emits whole summaries can populate just one field.
    """
    apply_prefix = method_has_post_process(method)
    if perspective is Perspective.FULL:
        parts = []
        fired_any = False
        for role, raw in ((SpeakerRole.CUSTOMER, entry.customer), (SpeakerRole.AGENT, entry.agent)):
            if raw is None or not raw.strip():
                continue
            if apply_prefix:
                raw, fired = post_process(raw, role, prefixes)
                fired_any = fired_any or fired
            parts.append(raw)
        if not parts:
            return None
        return CandidateSummary(
            dialog_id=entry.dialog_id,
            perspective=perspective,
            method=method,
            text=" ".join(parts),
            post_processed=fired_any,
        )
    role = perspective.role
    raw = entry.customer if role is SpeakerRole.CUSTOMER else entry.agent
    if raw is None or not raw.strip():
        return None
    fired = False
    if apply_prefix:
        raw, fired = post_process(raw, role, prefixes)
    return CandidateSummary(
        dialog_id=entry.dialog_id,
        perspective=perspective,
        method=method,
        text=raw,
        post_processed=fired,
    )
