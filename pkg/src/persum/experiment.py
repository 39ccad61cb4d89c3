"""Experiment orchestration: nested few-shot subsets, per-method scoring runs,
seed aggregation, and report emission in the method x training-size layout.

Scores are stored in [0, 1] and rendered x100 with two decimals in reports.
Per-run score is the unweighted mean over scored test dialogs; cells aggregate
the per-run means over seeds as mean (+/- sample standard deviation).
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus, GoldSummary, Split
from .rng import make_rng
from .rouge import AggregateCell, ScoreTriple, TokenizerConfig, aggregate, score_pair
from .summarize import (
    DEFAULT_PREFIXES,
    CandidateSummary,
    Perspective,
    PredictionSet,
    PrefixConfig,
    builtin_candidate,
    parse_builtin_method,
    post_process_rate,
    prediction_candidate,
)
from .weaklabel import DEFAULT_MIN_TOKENS

DEFAULT_SIZES = (0, 16, 32, 64, 128, 256, 512, 1024)
VARIANTS = ("rouge1", "rouge2", "rougeL")
VARIANT_LABELS = {"rouge1": "Rouge-1", "rouge2": "Rouge-2", "rougeL": "Rouge-L"}
PERSPECTIVE_LABELS = {
    Perspective.CUSTOMER: "Customer perspective",
    Perspective.AGENT: "Agent perspective",
    Perspective.FULL: "Full summary",
}


class ExperimentError(ValueError):
    """The experiment configuration or its inputs are unusable."""


class MissingCellsError(ExperimentError):
    """External predictions do not cover every requested (method, size, seed)."""

    def __init__(self, cells: Sequence[tuple[str, int, int]]):
        listing = ", ".join(f"({m}, size={s}, seed={k})" for m, s, k in cells)
        super().__init__(f"missing prediction cells: {listing}")
        self.cells = list(cells)


@dataclass
class ExperimentConfig:
    methods: list[str]
    perspectives: list[Perspective]
    sizes: tuple[int, ...] = DEFAULT_SIZES
    n_seeds: int = 5
    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)
    prefixes: PrefixConfig = field(default_factory=PrefixConfig)
    min_tokens: int = DEFAULT_MIN_TOKENS
    cap_to_population: bool = False
    strict_missing: bool = False

    def validate(self) -> None:
        if not self.methods:
            raise ExperimentError("config needs at least one method")
        if not self.perspectives:
            raise ExperimentError("config needs at least one perspective")
        if not self.sizes:
            raise ExperimentError("config needs at least one training size")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ExperimentError("sizes must be strictly increasing")
        if self.sizes[0] < 0:
            raise ExperimentError("sizes must be non-negative")
        if self.n_seeds < 1:
            raise ExperimentError("n_seeds must be >= 1")

    @property
    def seeds(self) -> list[int]:
        return list(range(self.n_seeds))


# --- nested subset sampling ----------------------------------------------------


@dataclass
class SubsetFamily:
    """Training subsets for one seed; every subset is a prefix of the next."""

    seed: int
    subsets: dict[int, list[str]]


def sample_nested_subsets(
    train_ids: Sequence[str],
    sizes: Sequence[int],
    seed: int,
    cap_to_population: bool = False,
) -> SubsetFamily:
    """Shuffle once per seed and take prefixes, which guarantees nesting.

    Sizes beyond the population are an error unless cap_to_population is set,
    in which case they mean "all of the training set" while keeping their label.
    """
    if not sizes:
        raise ExperimentError("no subset sizes requested")
    population = len(train_ids)
    if not cap_to_population and max(sizes) > population:
        raise ExperimentError(
            f"subset size {max(sizes)} exceeds the {population}-id training population "
            f"(pass cap_to_population to clamp oversized requests)"
        )
    rng = make_rng(seed)
    shuffled = [train_ids[i] for i in rng.permutation(population)]
    subsets = {size: shuffled[: min(size, population)] for size in sizes}
    return SubsetFamily(seed=seed, subsets=subsets)


def write_subset_files(families: Iterable[SubsetFamily], out_dir: str | Path) -> None:
    """Write subsets/<seed>/<size>.txt, one dialog id per line."""
    base = Path(out_dir)
    for family in families:
        seed_dir = base / str(family.seed)
        seed_dir.mkdir(parents=True, exist_ok=True)
        for size, ids in family.subsets.items():
            (seed_dir / f"{size}.txt").write_text(
                "".join(did + "\n" for did in ids), encoding="utf-8"
            )


# --- scoring runs ---------------------------------------------------------------


@dataclass(frozen=True)
class PerDialogScore:
    dialog_id: str
    method: str
    perspective: Perspective
    size: int
    seed: int
    r1_p: float
    r1_r: float
    r1_f: float
    r2_f: float
    rl_f: float


@dataclass
class ResultTable:
    sizes: list[int]
    rows: dict[tuple[str, Perspective, str], dict[int, AggregateCell]]


@dataclass
class RunResult:
    table: ResultTable
    per_dialog: list[PerDialogScore]
    families: list[SubsetFamily]
    warnings: list[str]


def _gold_reference(gold: GoldSummary, perspective: Perspective) -> str:
    if perspective is Perspective.CUSTOMER:
        return gold.customer_part
    if perspective is Perspective.AGENT:
        return gold.agent_part
    return gold.customer_part + " " + gold.agent_part


def _triple_to_row(
    triple: ScoreTriple, did: str, method: str, perspective: Perspective, size: int, seed: int
) -> PerDialogScore:
    return PerDialogScore(
        dialog_id=did,
        method=method,
        perspective=perspective,
        size=size,
        seed=seed,
        r1_p=triple.r1.precision,
        r1_r=triple.r1.recall,
        r1_f=triple.r1.f_measure,
        r2_f=triple.r2.f_measure,
        rl_f=triple.rl.f_measure,
    )


def run_experiment(
    corpus: Corpus,
    config: ExperimentConfig,
    external: Sequence[PredictionSet] = (),
) -> RunResult:
    """Score every (method, perspective, size, seed) cell on the test split."""
    config.validate()
    if corpus.gold is None:
        raise ExperimentError("corpus has no gold summaries; scoring needs references")
    if corpus.split is None:
        raise ExperimentError("corpus has no split assignment")

    dialogs = corpus.by_id()
    train_ids = corpus.dialog_ids(Split.TRAIN)
    test_ids = [did for did in corpus.dialog_ids(Split.TEST) if did in corpus.gold]
    gold_missing = len(corpus.dialog_ids(Split.TEST)) - len(test_ids)
    warnings: list[str] = []
    if gold_missing:
        warnings.append(f"{gold_missing} test dialog(s) have no gold summary and are not scored")
    if not test_ids:
        raise ExperimentError("no test dialogs with gold summaries to score")

    families = [
        sample_nested_subsets(train_ids, config.sizes, seed, config.cap_to_population)
        for seed in config.seeds
    ]

    ext_index: dict[tuple[str, int, int], PredictionSet] = {}
    for pred in external:
        if pred.cell in ext_index:
            raise ExperimentError(f"duplicate prediction set for cell {pred.cell}")
        ext_index[pred.cell] = pred

    missing_cells = [
        (method, size, seed)
        for method in config.methods
        if parse_builtin_method(method) is None
        for size in config.sizes
        for seed in config.seeds
        if (method, size, seed) not in ext_index
    ]
    if missing_cells:
        raise MissingCellsError(missing_cells)

    per_dialog: list[PerDialogScore] = []
    rows: dict[tuple[str, Perspective, str], dict[int, AggregateCell]] = {}

    for method in config.methods:
        spec = parse_builtin_method(method)
        for perspective in config.perspectives:
            if spec is not None and spec.two_sided != (perspective is Perspective.FULL):
                warnings.append(
                    f"{method}: not applicable to the {perspective.value} perspective, row skipped"
                )
                continue
            references = {did: _gold_reference(corpus.gold[did], perspective) for did in test_ids}

            builtin_triples: dict[str, ScoreTriple] | None = None
            if spec is not None:
                builtin_triples = {}
                for did in test_ids:
                    cand = builtin_candidate(
                        dialogs[did], spec, perspective, config.prefixes, config.min_tokens
                    )
                    if cand is None:
                        message = f"{method}/{perspective.value}: no candidate for dialog {did}"
                        if config.strict_missing:
                            raise ExperimentError(message)
                        warnings.append(message)
                        continue
                    builtin_triples[did] = score_pair(cand.text, references[did], config.tokenizer)

            run_means: dict[str, dict[int, list[float]]] = {v: {s: [] for s in config.sizes} for v in VARIANTS}
            for size in config.sizes:
                for seed in config.seeds:
                    if builtin_triples is not None:
                        triples = builtin_triples
                    else:
                        triples = {}
                        pred = ext_index[(method, size, seed)]
                        for did in test_ids:
                            entry = pred.entries.get(did)
                            cand = (
                                prediction_candidate(entry, method, perspective, config.prefixes)
                                if entry is not None
                                else None
                            )
                            if cand is None:
                                message = (
                                    f"{method}/{perspective.value}: no prediction for dialog {did} "
                                    f"(size={size}, seed={seed})"
                                )
                                if config.strict_missing:
                                    raise ExperimentError(message)
                                warnings.append(message)
                                continue
                            triples[did] = score_pair(cand.text, references[did], config.tokenizer)
                    for did in test_ids:
                        if did in triples:
                            per_dialog.append(
                                _triple_to_row(triples[did], did, method, perspective, size, seed)
                            )
                    if triples:
                        run_means["rouge1"][size].append(
                            statistics.fmean(t.r1.f_measure for t in triples.values())
                        )
                        run_means["rouge2"][size].append(
                            statistics.fmean(t.r2.f_measure for t in triples.values())
                        )
                        run_means["rougeL"][size].append(
                            statistics.fmean(t.rl.f_measure for t in triples.values())
                        )
                    else:
                        warnings.append(
                            f"{method}/{perspective.value}: no dialog scored at size={size}, seed={seed}"
                        )
                        for variant in VARIANTS:
                            run_means[variant][size].append(0.0)

            for variant in VARIANTS:
                rows[(method, perspective, variant)] = {
                    size: aggregate(run_means[variant][size]) for size in config.sizes
                }

    table = ResultTable(sizes=list(config.sizes), rows=rows)
    return RunResult(table=table, per_dialog=per_dialog, families=families, warnings=warnings)


# --- report emission ------------------------------------------------------------


def format_cell(cell: AggregateCell) -> str:
    """Render "mean (+/-deviation)" on the 0-100 scale; zero deviation is omitted."""
    mean = f"{cell.mean * 100:.2f}"
    if cell.deviation == 0:
        return mean
    return f"{mean} (±{cell.deviation * 100:.2f})"


def _grouped_rows(table: ResultTable):
    perspectives: list[Perspective] = []
    methods: list[str] = []
    for method, perspective, _ in table.rows:
        if perspective not in perspectives:
            perspectives.append(perspective)
        if method not in methods:
            methods.append(method)
    for perspective in perspectives:
        for variant in VARIANTS:
            present = [m for m in methods if (m, perspective, variant) in table.rows]
            if present:
                yield perspective, variant, present


def emit_report(table: ResultTable, format: str = "markdown") -> str:
    """Render the result table; methods as rows, sizes as columns."""
    if not table.rows:
        raise ExperimentError("cannot emit a report for an empty table")
    if format in ("markdown", "md"):
        return _emit_markdown(table)
    if format == "csv":
        return _emit_csv(table)
    raise ExperimentError(f"unknown report format {format!r}")


def _emit_markdown(table: ResultTable) -> str:
    out = ["# ROUGE F-measure by training-set size", ""]
    for perspective, variant, methods in _grouped_rows(table):
        out.append(f"## {PERSPECTIVE_LABELS[perspective]} - {VARIANT_LABELS[variant]}")
        out.append("")
        out.append("| Method | " + " | ".join(str(s) for s in table.sizes) + " |")
        out.append("| --- | " + " | ".join("---" for _ in table.sizes) + " |")
        for method in methods:
            cells = table.rows[(method, perspective, variant)]
            rendered = " | ".join(format_cell(cells[s]) for s in table.sizes)
            out.append(f"| {method} | {rendered} |")
        out.append("")
    return "\n".join(out)


def _emit_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["perspective", "rouge", "method"] + [str(s) for s in table.sizes])
    for perspective, variant, methods in _grouped_rows(table):
        for method in methods:
            cells = table.rows[(method, perspective, variant)]
            writer.writerow(
                [perspective.value, VARIANT_LABELS[variant], method]
                + [format_cell(cells[s]) for s in table.sizes]
            )
    return buf.getvalue()


# --- per-dialog dump -------------------------------------------------------------

PER_DIALOG_COLUMNS = (
    "dialog_id",
    "method",
    "perspective",
    "size",
    "seed",
    "r1_p",
    "r1_r",
    "r1_f",
    "r2_f",
    "rl_f",
)


def write_per_dialog_csv(rows: Sequence[PerDialogScore], path: str | Path) -> None:
    """Full-precision per-dialog score dump ('.' decimal, no locale)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PER_DIALOG_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.dialog_id,
                    row.method,
                    row.perspective.value,
                    row.size,
                    row.seed,
                    repr(row.r1_p),
                    repr(row.r1_r),
                    repr(row.r1_f),
                    repr(row.r2_f),
                    repr(row.rl_f),
                ]
            )


def read_per_dialog_csv(path: str | Path) -> list[PerDialogScore]:
    rows: list[PerDialogScore] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != PER_DIALOG_COLUMNS:
            raise ExperimentError(f"per-dialog dump must have columns {', '.join(PER_DIALOG_COLUMNS)}")
        for record in reader:
            rows.append(
                PerDialogScore(
                    dialog_id=record["dialog_id"],
                    method=record["method"],
                    perspective=Perspective(record["perspective"]),
                    size=int(record["size"]),
                    seed=int(record["seed"]),
                    r1_p=float(record["r1_p"]),
                    r1_r=float(record["r1_r"]),
                    r1_f=float(record["r1_f"]),
                    r2_f=float(record["r2_f"]),
                    rl_f=float(record["rl_f"]),
                )
            )
    return rows


def table_from_per_dialog(rows: Sequence[PerDialogScore]) -> ResultTable:
    """Recompute the aggregate table from a per-dialog dump."""
    if not rows:
        raise ExperimentError("per-dialog dump is empty")
    sizes = sorted({row.size for row in rows})
    keys: list[tuple[str, Perspective]] = []
    grouped: dict[tuple[str, Perspective, int, int], dict[str, list[float]]] = {}
    for row in rows:
        if (row.method, row.perspective) not in keys:
            keys.append((row.method, row.perspective))
        cell = grouped.setdefault(
            (row.method, row.perspective, row.size, row.seed),
            {"rouge1": [], "rouge2": [], "rougeL": []},
        )
        cell["rouge1"].append(row.r1_f)
        cell["rouge2"].append(row.r2_f)
        cell["rougeL"].append(row.rl_f)

    table_rows: dict[tuple[str, Perspective, str], dict[int, AggregateCell]] = {}
    for method, perspective in keys:
        seeds = sorted({row.seed for row in rows if (row.method, row.perspective) == (method, perspective)})
        for variant in VARIANTS:
            cells: dict[int, AggregateCell] = {}
            for size in sizes:
                means = [
                    statistics.fmean(grouped[(method, perspective, size, seed)][variant])
                    for seed in seeds
                    if (method, perspective, size, seed) in grouped
                ]
                if means:
                    cells[size] = aggregate(means)
            if cells:
                table_rows[(method, perspective, variant)] = cells
    return ResultTable(sizes=sizes, rows=table_rows)


# --- post-process rate curve ------------------------------------------------------


def rate_curve(candidates_per_size: Mapping[int, Sequence[CandidateSummary]]) -> dict[int, float]:
    """Post-process rate per training size, for the corrected-summaries curve."""
    rates: dict[int, float] = {}
    for size in sorted(candidates_per_size):
        candidates = candidates_per_size[size]
        if not candidates:
            raise ExperimentError(f"no candidates at size {size}")
        rates[size] = post_process_rate(candidates)
    return rates


def rate_curve_csv(rates: Mapping[int, float]) -> str:
    lines = ["size,rate"]
    for size in sorted(rates):
        lines.append(f"{size},{rates[size]!r}")
    return "\n".join(lines) + "\n"


# --- experiment config files -------------------------------------------------------


@dataclass
class ConfigPaths:
    corpus: str | None = None
    split: str | None = None
    predictions: list[str] = field(default_factory=list)


_CONFIG_KEYS = {
    "methods",
    "perspectives",
    "sizes",
    "n_seeds",
    "tokenizer",
    "min_tokens",
    "cap_to_population",
    "strict_missing",
    "prefix_customer",
    "prefix_agent",
    "corpus",
    "split",
    "predictions",
}


def parse_config(document: dict) -> tuple[ExperimentConfig, ConfigPaths]:
    unknown = set(document) - _CONFIG_KEYS
    if unknown:
        raise ExperimentError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    try:
        methods = list(document["methods"])
        perspectives = [Perspective(p) for p in document["perspectives"]]
    except KeyError as exc:
        raise ExperimentError(f"config missing required key {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise ExperimentError(f"bad perspective in config: {exc}") from exc

    try:
        tokenizer = TokenizerConfig(**document.get("tokenizer", {}))
    except TypeError as exc:
        raise ExperimentError(f"bad tokenizer settings in config: {exc}") from exc
    prefixes = PrefixConfig(
        customer=document.get("prefix_customer", DEFAULT_PREFIXES.customer),
        agent=document.get("prefix_agent", DEFAULT_PREFIXES.agent),
    )
    config = ExperimentConfig(
        methods=methods,
        perspectives=perspectives,
        sizes=tuple(document.get("sizes", DEFAULT_SIZES)),
        n_seeds=document.get("n_seeds", 5),
        tokenizer=tokenizer,
        prefixes=prefixes,
        min_tokens=document.get("min_tokens", DEFAULT_MIN_TOKENS),
        cap_to_population=bool(document.get("cap_to_population", False)),
        strict_missing=bool(document.get("strict_missing", False)),
    )
    config.validate()
    paths = ConfigPaths(
        corpus=document.get("corpus"),
        split=document.get("split"),
        predictions=list(document.get("predictions", [])),
    )
    return config, paths


def load_config_file(path: str | Path) -> tuple[ExperimentConfig, ConfigPaths]:
    """Load a config document; relative paths resolve against the config file."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ExperimentError(f"config file {path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(document, dict):
        raise ExperimentError(f"config file {path}: expected a JSON object")
    config, paths = parse_config(document)
    base = path.parent

    def _resolve(p: str | None) -> str | None:
        return None if p is None else str(base / p)

    paths.corpus = _resolve(paths.corpus)
    paths.split = _resolve(paths.split)
    paths.predictions = [str(base / p) for p in paths.predictions]
    return config, paths
