"""Command-line frontend: one subcommand per pipeline step.

Logs go to stderr, data to stdout or files. Exit codes: 0 success,
1 input or stage error, 2 when the suitability run selects no language.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import analysis, clones, figures, metrics
from .corpus import CorpusError, combine, load_jsonl, stats, write_jsonl
from .clones import CloneError, CloneParams
from .embedding import (
    EmbeddingConfig,
    EmbeddingError,
    export_text,
    load_model,
    save_model,
    semantic_similarity,
    train,
)
from .metrics import MetricError
from .pipeline import PipelineError, RunConfig, load_language_corpus, run_suitability
from .suitability import SelectError, recommend_for_task, report_to_table
from .tokens import length_of

logger = logging.getLogger("langsel")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOTHING_SELECTED = 2

_ERRORS = (
    CorpusError,
    CloneError,
    EmbeddingError,
    MetricError,
    SelectError,
    PipelineError,
    analysis.ReportError,
    OSError,
    json.JSONDecodeError,
)


def _corpus_arg(value: str) -> tuple[str, str]:
    """Parse a LANGUAGE=PATH corpus argument."""
    if "=" not in value:
        raise argparse.ArgumentTypeError(f"expected LANGUAGE=PATH, got {value!r}")
    language, path = value.split("=", 1)
    return language, path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="langsel",
        description=(
            "Corpus-similarity toolkit: score high-resource language corpora "
            "against a low-resource target and pick fine-tuning languages."
        ),
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("suitability", help="run the full selection pipeline")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--theta", type=float, default=None, help="selection threshold override")
    p.add_argument("--min-tokens", type=int, default=None, dest="min_tokens")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None, help="parallel candidates; 1 = deterministic")
    p.add_argument("--out", default=None, help="output directory override")
    p.add_argument("--figures", action="store_true", default=None)
    p.add_argument("--lenient", action="store_true", default=None)
    p.add_argument("--bimodal-only", action="store_true", default=None,
                   dest="bimodal_only",
                   help="restrict similarity to documents with docstrings")

    p = sub.add_parser("ingest", help="load a JSONL corpus (and optionally rewrite it)")
    p.add_argument("path")
    p.add_argument("--language", required=True)
    p.add_argument("--split", default="unsplit")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--out", help="write the corpus back out as JSONL")

    p = sub.add_parser("stats", help="summary counts and length quantiles")
    p.add_argument("paths", nargs="+")
    p.add_argument("--language", required=True)
    p.add_argument("--split", default="unsplit")
    p.add_argument("--lenient", action="store_true")

    p = sub.add_parser("train-embed", help="train the n-gram embedding model")
    p.add_argument("--corpus", action="append", required=True, type=_corpus_arg,
                   metavar="LANGUAGE=PATH")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--negative", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=0.05, dest="learning_rate")
    p.add_argument("--min-count", type=int, default=5, dest="min_count")
    p.add_argument("--buckets", type=int, default=2**20)
    p.add_argument("--max-tokens", type=int, default=1024, dest="max_tokens")
    p.add_argument("--include-docstrings", action="store_true", dest="include_docstrings")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--export-text", dest="export_text", help="also dump vectors as text")

    p = sub.add_parser("semsim", help="mean pairwise cosine between two corpora")
    p.add_argument("--model", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--candidate-language", default="candidate")
    p.add_argument("--target-language", default="target")

    p = sub.add_parser("textsim", help="cross-corpus clone count")
    p.add_argument("--candidate", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--candidate-language", default="candidate")
    p.add_argument("--target-language", default="target")
    p.add_argument("--min-tokens", type=int, default=clones.DEFAULT_MIN_TOKENS,
                   dest="min_tokens")
    p.add_argument("--cap", type=int, default=None, help="stop after this many pairs")
    p.add_argument("--export", help="write the pairs as JSONL")

    for name, help_text in (
        ("eval-bleu", "smoothed sentence BLEU (percentage)"),
        ("eval-meteor", "METEOR with exact/stem/synonym stages"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--hyp", help="hypotheses, one tokenized sentence per line")
        p.add_argument("--ref", help="references, aligned with --hyp")
        p.add_argument("--jsonl", help="alternative input: JSONL {hyp, ref}")
        if name == "eval-bleu":
            p.add_argument("--max-n", type=int, default=4, dest="max_n")
        else:
            p.add_argument("--no-stem", action="store_true", dest="no_stem")
            p.add_argument("--synonyms", help="word<TAB>synonym file")

    p = sub.add_parser("eval-mrr", help="mean reciprocal rank")
    p.add_argument("--rankings", required=True,
                   help="JSONL {qid, rank} or {qid, scores: [...]}")

    p = sub.add_parser("utest", help="two-sided Mann-Whitney U test")
    p.add_argument("--a", required=True, help="sample A, one number per line")
    p.add_argument("--b", required=True, help="sample B, one number per line")

    p = sub.add_parser("ptr", help="performance-to-time ratios")
    p.add_argument("--records", required=True,
                   help="JSONL {model, performance, seconds}")
    p.add_argument("--format", choices=analysis.REPORT_FORMATS, default="table")
    p.add_argument("--out", help="write the report to a file instead of stdout")
    p.add_argument("--figure", help="also render a PTR bar chart PNG")

    p = sub.add_parser("bins", help="quartile code-length bins of a test set")
    p.add_argument("--corpus", required=True)
    p.add_argument("--language", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--out", help="write bin membership JSON")
    p.add_argument("--figure", help="render the length histogram PNG")

    p = sub.add_parser("report", help="render tabular rows (JSON list) as a report")
    p.add_argument("--rows", required=True, help="JSON file with a list of objects")
    p.add_argument("--format", choices=analysis.REPORT_FORMATS, default="table")
    p.add_argument("--baseline", type=float, default=None)
    p.add_argument("--value-column", dest="value_column", default=None)
    p.add_argument("--out", help="write to a file instead of stdout")

    p = sub.add_parser("recommend", help="strategy for a downstream task")
    p.add_argument("task", choices=["summarization", "search"])

    return parser


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load_eval_pairs(args) -> list[metrics.EvalPair]:
    if args.jsonl:
        return metrics.load_pairs_from_jsonl(args.jsonl)
    if not (args.hyp and args.ref):
        raise MetricError("need --hyp and --ref, or --jsonl")
    return metrics.load_pairs_from_files(args.hyp, args.ref)


def _read_sample(path: str) -> list[float]:
    values = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            values.append(float(line))
    return values


def cmd_suitability(args) -> int:
    overrides = {
        "theta": args.theta,
        "min_tokens": args.min_tokens,
        "seed": args.seed,
        "jobs": args.jobs,
        "output_dir": args.out,
        "figures": args.figures,
        "lenient": args.lenient,
        "bimodal_only": args.bimodal_only,
    }
    config = RunConfig.from_file(args.config, overrides)
    report, paths = run_suitability(config)
    sys.stdout.write(report_to_table(report))
    for kind, path in paths.items():
        logger.info("wrote %s report: %s", kind, path)
    if not report.selected:
        logger.warning("no candidate language reached theta=%g", report.theta)
        return EXIT_NOTHING_SELECTED
    sys.stdout.write(f"selected: {', '.join(report.selected)}\n")
    return EXIT_OK


def cmd_ingest(args) -> int:
    corpus = load_jsonl(args.path, language=args.language, split=args.split,
                        lenient=args.lenient)
    if args.out:
        write_jsonl(corpus, args.out)
        logger.info("wrote %d documents to %s", len(corpus), args.out)
    summary = stats(corpus)
    sys.stdout.write(json.dumps(dataclasses.asdict(summary), sort_keys=True) + "\n")
    return EXIT_OK


def cmd_stats(args) -> int:
    corpus = load_language_corpus(args.language, args.paths, split=args.split,
                                  lenient=args.lenient)
    summary = stats(corpus)
    sys.stdout.write(json.dumps(dataclasses.asdict(summary), sort_keys=True) + "\n")
    return EXIT_OK


def cmd_train_embed(args) -> int:
    corpora = [
        load_jsonl(path, language=language) for language, path in args.corpus
    ]
    combined = combine(corpora) if len(corpora) > 1 else corpora[0]
    config = EmbeddingConfig(
        dim=args.dim,
        epochs=args.epochs,
        negative=args.negative,
        learning_rate=args.learning_rate,
        min_count=args.min_count,
        buckets=args.buckets,
        max_tokens=args.max_tokens,
        include_docstrings=args.include_docstrings,
        workers=args.workers,
    )
    model = train(combined, config, seed=args.seed)
    save_model(model, args.out)
    logger.info("saved model: %d vocab entries, dim %d", len(model.vocab), model.dim)
    if args.export_text:
        export_text(model, args.export_text)
    return EXIT_OK


def cmd_semsim(args) -> int:
    model = load_model(args.model)
    candidate = load_jsonl(args.candidate, language=args.candidate_language)
    target = load_jsonl(args.target, language=args.target_language)
    score = semantic_similarity(model, candidate, target)
    sys.stdout.write(f"{score:.6f}\n")
    return EXIT_OK


def cmd_textsim(args) -> int:
    candidate = load_jsonl(args.candidate, language=args.candidate_language)
    target = load_jsonl(args.target, language=args.target_language)
    result = clones.detect_cross_clones(
        candidate, target, CloneParams(min_tokens=args.min_tokens), cap=args.cap
    )
    if args.export:
        clones.export_jsonl(result, args.export)
    prefix = "at least " if result.truncated else ""
    sys.stdout.write(f"{prefix}{len(result)}\n")
    return EXIT_OK


def cmd_eval_bleu(args) -> int:
    pairs = _load_eval_pairs(args)
    logger.info(
        "BLEU variant: sentence-level, add-one smoothing for n >= 2, "
        "mean over %d pairs, reported as a percentage", len(pairs)
    )
    sys.stdout.write(f"{metrics.bleu(pairs, max_n=args.max_n):.4f}\n")
    return EXIT_OK


def cmd_eval_meteor(args) -> int:
    pairs = _load_eval_pairs(args)
    synonyms = metrics.load_synonyms(args.synonyms) if args.synonyms else None
    config = metrics.MeteorConfig(stem=not args.no_stem, synonyms=synonyms)
    logger.info(
        "METEOR stages: exact%s%s; alpha=%g beta=%g gamma=%g",
        "" if args.no_stem else ", stem",
        ", synonym" if synonyms else "",
        config.alpha, config.beta, config.gamma,
    )
    sys.stdout.write(f"{metrics.meteor(pairs, config):.6f}\n")
    return EXIT_OK


def cmd_eval_mrr(args) -> int:
    queries = metrics.load_queries_from_jsonl(args.rankings)
    sys.stdout.write(f"{metrics.mrr(queries):.6f}\n")
    return EXIT_OK


def cmd_utest(args) -> int:
    result = metrics.mann_whitney_u(_read_sample(args.a), _read_sample(args.b))
    payload = {
        "u_a": result.u_a,
        "u_b": result.u_b,
        "z": result.z,
        "p": result.p,
        "p_exact": result.p_exact,
    }
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_ptr(args) -> int:
    records = []
    with open(args.records, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                record = json.loads(line)
                records.append(
                    metrics.PerfTimeRecord(
                        model=record["model"],
                        performance=record["performance"],
                        seconds=record["seconds"],
                    )
                )
    ratios = metrics.ptr(records)
    rows = [{"model": model, "ptr": ratios[model]} for model in ratios]
    _write_or_print(analysis.emit_report(rows, format=args.format), args.out)
    if args.figure:
        figures.save_ptr_chart(ratios, args.figure)
        logger.info("wrote PTR chart: %s", args.figure)
    return EXIT_OK


def cmd_bins(args) -> int:
    corpus = load_jsonl(args.corpus, language=args.language, split=args.split,
                        lenient=args.lenient)
    bins = analysis.quartile_bins(corpus)
    payload = {
        "boundaries": list(bins.boundaries),
        "sizes": list(bins.sizes),
        "length_unit": analysis.LENGTH_UNIT,
    }
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    if args.out:
        Path(args.out).write_text(
            json.dumps(
                {**payload, "bins": [list(b) for b in bins.bins]}, sort_keys=True
            ),
            encoding="utf-8",
        )
    if args.figure:
        lengths = [length_of(doc) for doc in corpus.documents]
        figures.save_length_histogram(lengths, bins, args.figure)
        logger.info("wrote length histogram: %s", args.figure)
    return EXIT_OK


def cmd_report(args) -> int:
    rows = json.loads(Path(args.rows).read_text(encoding="utf-8"))
    if not isinstance(rows, list):
        raise analysis.ReportError("--rows file must hold a JSON list of objects")
    text = analysis.emit_report(
        rows,
        format=args.format,
        baseline=args.baseline,
        value_column=args.value_column,
    )
    _write_or_print(text, args.out)
    return EXIT_OK


def cmd_recommend(args) -> int:
    strategy = recommend_for_task(args.task)
    sys.stdout.write(json.dumps(dataclasses.asdict(strategy), sort_keys=True) + "\n")
    return EXIT_OK


_COMMANDS = {
    "suitability": cmd_suitability,
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "train-embed": cmd_train_embed,
    "semsim": cmd_semsim,
    "textsim": cmd_textsim,
    "eval-bleu": cmd_eval_bleu,
    "eval-meteor": cmd_eval_meteor,
    "eval-mrr": cmd_eval_mrr,
    "utest": cmd_utest,
    "ptr": cmd_ptr,
    "bins": cmd_bins,
    "report": cmd_report,
    "recommend": cmd_recommend,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; that code is reserved for
        # "no language selected", so usage problems report as input errors.
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except _ERRORS as exc:
        logger.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
