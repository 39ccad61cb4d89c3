"""Single executable exposing the pipeline as subcommands.

Exit codes: 0 success, 1 usage error, 2 data/validation error. All randomness
is surfaced through --seed flags; reruns on identical inputs write identical
bytes. --threads is accepted for forward compatibility but execution is
sequential; outputs do not depend on it.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import (
    Corpus,
    CorpusError,
    SpeakerRole,
    Split,
    load_split_csv,
    read_corpus,
    read_tweet_csv,
    reconstruct_threads,
    split_corpus,
    with_split,
    write_corpus,
)
from .experiment import (
    DEFAULT_SIZES,
    ExperimentError,
    emit_report,
    load_config_file,
    rate_curve,
    rate_curve_csv,
    read_per_dialog_csv,
    run_experiment,
    sample_nested_subsets,
    table_from_per_dialog,
    write_per_dialog_csv,
    write_subset_files,
)
from .summarize import (
    Perspective,
    PredictionError,
    PrefixConfig,
    builtin_candidate,
    load_predictions,
    parse_builtin_method,
    prediction_candidate,
)
from .weaklabel import DEFAULT_MIN_TOKENS, HeuristicKind, weaklabel_corpus, write_weak_pairs

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; remap to the documented exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _csv_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="persum", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert raw conversation data to canonical corpus JSONL")
    p.add_argument("--format", choices=["kaggle-csv", "dialog-jsonl"], required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--threads", type=int, default=1, help="reserved; outputs never depend on it")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="assign train/val/test, seeded or from a split file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratios", type=_csv_floats, default=(0.8, 0.1, 0.1))
    p.add_argument("--split-file", help="CSV with columns dialog_id, split; overrides --seed")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("weaklabel", help="emit weak (source, target) pairs for one perspective")
    p.add_argument("--corpus", required=True)
    p.add_argument("--perspective", choices=["customer", "agent"], required=True)
    p.add_argument("--heuristic", choices=["lead", "long"], required=True)
    p.add_argument("--masked", action="store_true")
    p.add_argument("--min-tokens", type=int, default=DEFAULT_MIN_TOKENS)
    p.add_argument("--exclude", help="file with one dialog id per line to leave out")
    p.add_argument("--output", required=True)
    p.add_argument("--coverage", help="also write the coverage counters to this JSON file")
    p.add_argument("--threads", type=int, default=1, help="reserved; outputs never depend on it")
    p.set_defaults(func=cmd_weaklabel)

    p = sub.add_parser("subsets", help="write nested few-shot training subsets per seed")
    p.add_argument("--corpus", required=True, help="corpus JSONL with split assignment")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--sizes", type=_csv_ints, default=DEFAULT_SIZES)
    p.add_argument("--seeds", type=int, default=5, help="number of seeds (0..N-1)")
    p.add_argument("--cap-to-population", action="store_true")
    p.set_defaults(func=cmd_subsets)

    p = sub.add_parser("summarize", help="run a built-in heuristic summarizer on the test split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--method", required=True)
    p.add_argument("--perspective", choices=["customer", "agent", "full"], required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--prefix-customer", default=None)
    p.add_argument("--prefix-agent", default=None)
    p.add_argument("--min-tokens", type=int, default=DEFAULT_MIN_TOKENS)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("score", help="run the experiment and write report + score dump")
    p.add_argument("--corpus", help="corpus JSONL; defaults to the config's corpus path")
    p.add_argument("--config", required=True)
    p.add_argument("--split", help="split CSV applied on top of the corpus")
    p.add_argument("--predictions", nargs="*", default=[], help="prediction JSONL files")
    p.add_argument("--report", choices=["md", "csv"], default="md")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--subsets", action="store_true", help="also write subsets/<seed>/<size>.txt")
    p.add_argument("--prefix-customer", default=None, help="override the config's customer prefix")
    p.add_argument("--prefix-agent", default=None, help="override the config's agent prefix")
    p.add_argument("--strict-missing", action="store_true", help="error on unscorable dialogs")
    p.add_argument("--threads", type=int, default=1, help="reserved; outputs never depend on it")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="re-emit a report from a per-dialog score dump")
    p.add_argument("--per-dialog", required=True)
    p.add_argument("--format", choices=["md", "csv"], default="md")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("rate-curve", help="post-process rate per training size")
    p.add_argument("--output", required=True)
    p.add_argument("--perspective", choices=["customer", "agent", "full"], required=True)
    p.add_argument("--predictions", nargs="*", default=[], help="prediction files of one method")
    p.add_argument("--corpus", help="with --method: measure a built-in method instead")
    p.add_argument("--method")
    p.add_argument("--sizes", type=_csv_ints, default=DEFAULT_SIZES)
    p.add_argument("--prefix-customer", default=None)
    p.add_argument("--prefix-agent", default=None)
    p.set_defaults(func=cmd_rate_curve)

    return parser


def _prefixes_from_args(args) -> PrefixConfig:
    base = PrefixConfig()
    return PrefixConfig(
        customer=args.prefix_customer if args.prefix_customer is not None else base.customer,
        agent=args.prefix_agent if args.prefix_agent is not None else base.agent,
    )


def _test_dialogs(corpus: Corpus):
    """Dialogs summarizers run on: the test split when assigned, else everything."""
    if corpus.split is None:
        return list(corpus.dialogs)
    return [d for d in corpus.dialogs if corpus.split[d.id] == Split.TEST]


def cmd_ingest(args) -> int:
    if args.format == "kaggle-csv":
        dialogs, report = reconstruct_threads(read_tweet_csv(args.input))
        corpus = Corpus(dialogs)
        corpus.validate()
        write_corpus(corpus, args.output)
        print(f"dialogs: {len(dialogs)}")
        warn = {k: v for k, v in report.as_dict().items() if k not in ("tweets", "dialogs") and v}
        for key, value in warn.items():
            print(f"warning: {key}: {value}", file=sys.stderr)
    else:
        corpus = read_corpus(args.input)
        write_corpus(corpus, args.output)
        print(f"dialogs: {len(corpus.dialogs)}")
    return EXIT_OK


def cmd_split(args) -> int:
    corpus = read_corpus(args.corpus)
    if args.split_file:
        corpus = with_split(corpus, load_split_csv(args.split_file))
    else:
        if len(args.ratios) != 3:
            raise CorpusError("--ratios needs exactly three values (train,val,test)")
        corpus = split_corpus(corpus, ratios=args.ratios, seed=args.seed)
    write_corpus(corpus, args.output)
    counts = {split.value: 0 for split in corpus.split.values()}
    for split in corpus.split.values():
        counts[split.value] += 1
    print(" ".join(f"{name}={count}" for name, count in counts.items()))
    return EXIT_OK


def cmd_weaklabel(args) -> int:
    corpus = read_corpus(args.corpus)
    exclude: set[str] = set()
    if args.exclude:
        with open(args.exclude, "r", encoding="utf-8") as fh:
            exclude = {line.strip() for line in fh if line.strip()}
    pairs, report = weaklabel_corpus(
        corpus,
        role=SpeakerRole(args.perspective),
        heuristic=HeuristicKind(args.heuristic),
        masked=args.masked,
        exclude_ids=exclude,
        min_tokens=args.min_tokens,
    )
    write_weak_pairs(pairs, args.output)
    coverage = json.dumps(report.as_dict(), separators=(",", ":"))
    print(coverage)
    if args.coverage:
        Path(args.coverage).write_text(coverage + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_subsets(args) -> int:
    corpus = read_corpus(args.corpus)
    if corpus.split is None:
        raise CorpusError("corpus has no split assignment; run `persum split` first")
    train_ids = corpus.dialog_ids(Split.TRAIN)
    families = [
        sample_nested_subsets(train_ids, args.sizes, seed, args.cap_to_population)
        for seed in range(args.seeds)
    ]
    write_subset_files(families, args.output_dir)
    print(f"wrote {len(families)} seed(s) x {len(args.sizes)} size(s) under {args.output_dir}")
    return EXIT_OK


def cmd_summarize(args) -> int:
    corpus = read_corpus(args.corpus)
    spec = parse_builtin_method(args.method)
    if spec is None:
        raise ExperimentError(
            f"{args.method!r} is not a built-in method; supply its outputs as prediction files"
        )
    perspective = Perspective(args.perspective)
    prefixes = _prefixes_from_args(args)
    produced = 0
    skipped = 0
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        for dialog in _test_dialogs(corpus):
            cand = builtin_candidate(dialog, spec, perspective, prefixes, args.min_tokens)
            if cand is None:
                skipped += 1
                continue
            record = {
                "dialog_id": cand.dialog_id,
                "perspective": cand.perspective.value,
                "method": cand.method,
                "text": cand.text,
                "post_processed": cand.post_processed,
            }
            fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")
            produced += 1
    print(f"candidates: {produced} skipped: {skipped}")
    return EXIT_OK


def cmd_score(args) -> int:
    config, paths = load_config_file(args.config)
    if args.prefix_customer is not None or args.prefix_agent is not None:
        config.prefixes = PrefixConfig(
            customer=args.prefix_customer if args.prefix_customer is not None else config.prefixes.customer,
            agent=args.prefix_agent if args.prefix_agent is not None else config.prefixes.agent,
        )
    if args.strict_missing:
        config.strict_missing = True
    corpus_path = args.corpus or paths.corpus
    if not corpus_path:
        raise ExperimentError("no corpus given: pass --corpus or set 'corpus' in the config")
    corpus = read_corpus(corpus_path)
    split_path = args.split or paths.split
    if split_path:
        corpus = with_split(corpus, load_split_csv(split_path))
    prediction_paths = list(paths.predictions) + list(args.predictions)
    external = [load_predictions(p) for p in prediction_paths]

    result = run_experiment(corpus, config, external)

    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_name = "report.md" if args.report == "md" else "report.csv"
    report_format = "markdown" if args.report == "md" else "csv"
    (out_dir / report_name).write_text(emit_report(result.table, report_format), encoding="utf-8")
    write_per_dialog_csv(result.per_dialog, out_dir / "per_dialog_scores.csv")
    if args.subsets:
        write_subset_files(result.families, out_dir / "subsets")
    for message in result.warnings:
        print(f"warning: {message}", file=sys.stderr)
    print(f"wrote {report_name} and per_dialog_scores.csv to {out_dir}")
    return EXIT_OK


def cmd_report(args) -> int:
    rows = read_per_dialog_csv(args.per_dialog)
    table = table_from_per_dialog(rows)
    report_format = "markdown" if args.format == "md" else "csv"
    Path(args.output).write_text(emit_report(table, report_format), encoding="utf-8")
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_rate_curve(args) -> int:
    perspective = Perspective(args.perspective)
    prefixes = _prefixes_from_args(args)
    per_size: dict[int, list] = {}
    if args.predictions:
        sets = [load_predictions(p) for p in args.predictions]
        methods = {s.method for s in sets}
        if len(methods) != 1:
            raise ExperimentError(f"prediction files mix methods: {', '.join(sorted(methods))}")
        for pred in sets:
            bucket = per_size.setdefault(pred.training_size, [])
            for entry in pred.entries.values():
                cand = prediction_candidate(entry, pred.method, perspective, prefixes)
                if cand is not None:
                    bucket.append(cand)
    elif args.corpus and args.method:
        spec = parse_builtin_method(args.method)
        if spec is None:
            raise ExperimentError(f"{args.method!r} is not a built-in method")
        corpus = read_corpus(args.corpus)
        candidates = []
        for dialog in _test_dialogs(corpus):
            cand = builtin_candidate(dialog, spec, perspective, prefixes)
            if cand is not None:
                candidates.append(cand)
        per_size = {size: candidates for size in args.sizes}
    else:
        raise ExperimentError("rate-curve needs either --predictions or --corpus with --method")
    rates = rate_curve(per_size)
    Path(args.output).write_text(rate_curve_csv(rates), encoding="utf-8")
    print(f"wrote {args.output}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        name = exc.filename if exc.filename else exc
        print(f"error: file not found: {name}", file=sys.stderr)
        return EXIT_DATA
    except (CorpusError, PredictionError, ExperimentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def app() -> None:
    sys.exit(main())


if __name__ == "__main__":
    app()
