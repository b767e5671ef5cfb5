"""Command-line surface: rank, multi, eval, analyze, compare.

Every command is a thin composition of library calls driven by one
declarative config file (YAML or JSON). Config keys can be overridden by
``SEEDRANK_``-prefixed environment variables, and those in turn by command
line flags. All outputs are plain files written atomically; a fixed
``rng_seed`` makes them byte-reproducible regardless of worker count.

Output layout under ``output_dir``:
    runs/<method>-<repr>/<topic>.run            leave-one-out runs
    runs/<method>-<repr>-multi/<topic>.run      seed-group runs
    runs/<method>-<repr>-oracle/<topic>.run     oracle-filtered single runs
    metrics.csv                                 topic_id,seed_or_window,metric,value
    oracle_comparison.csv                       single-vs-multi per window
    analysis/intra_similarity.csv               observation analyses
    analysis/term_commonality.csv
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import yaml

from . import corpus as corpus_io
from .corpus import filter_topics, load_corpus, load_embeddings, load_lexicon, load_run, load_topics
from .errors import ConfigError, SeedRankError
from .evaluation import DEFAULT_CUTOFFS, metric_set, significance_rows
from .experiments import (
    ExperimentReport,
    evaluate_entries,
    loocv_single,
    make_groups,
    multi_sdr,
    oracle_single,
    intra_similarity,
    term_commonality,
)
from .scoring import METHODS, REPRESENTATIONS, ScoringParams
from .text import LEE, OURS, PipelineConfig, default_stopwords

log = logging.getLogger("seedrank")

ENV_PREFIX = "SEEDRANK_"

# Groups evaluated per topic for multi runs need at least one relevant study
# left over after removing a window of width max(2, ceil(0.2 N)), hence 3.
MULTI_MIN_RELEVANT = 3


@dataclasses.dataclass
class RunConfig:
    """Everything an experiment needs, mirrored 1:1 by config keys and flags."""

    corpus: str | None = None
    topics: str | None = None
    qrels: str | None = None
    lexicon: str | None = None
    embeddings: str | None = None
    stopwords: str | None = None
    output_dir: str = "out"
    method: str = "sdr"
    representation: str = "bow"
    variant: str = OURS
    include_title: bool = True
    jm_lambda: float = 0.7
    aes_alpha: float = 0.3
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    undersample_cap: int = 50
    fraction: float = 0.2
    repetitions: int = 10
    min_relevant: int = 2
    rng_seed: int = 0
    workers: int = 1


_BOOL_STRINGS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _coerce(field: dataclasses.Field, raw, source: str):
    if raw is None:
        return None
    base = {str: str, int: int, float: float, bool: bool}
    target = None
    for t, conv in base.items():
        if field.type in (t.__name__, f"{t.__name__} | None"):
            target = t
            break
    if target is None:
        target = str
    if target is bool:
        if isinstance(raw, bool):
            return raw
        key = str(raw).strip().lower()
        if key not in _BOOL_STRINGS:
            raise ConfigError(field.name, f"expected a boolean, got {raw!r} (from {source})")
        return _BOOL_STRINGS[key]
    try:
        return target(raw)
    except (TypeError, ValueError):
        raise ConfigError(field.name, f"expected {target.__name__}, got {raw!r} (from {source})")


def load_config(path: str | None, flag_overrides: dict) -> RunConfig:
    """Build a RunConfig: defaults < config file < environment < flags."""
    values: dict = {}
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError("config", str(exc))
        if not isinstance(data, dict):
            raise ConfigError("config", "config file must hold a mapping")
        for key, raw in data.items():
            if key not in fields:
                raise ConfigError(key, "unknown config key")
            values[key] = _coerce(fields[key], raw, f"config file {path}")
    for name, field in fields.items():
        env_key = ENV_PREFIX + name.upper()
        if env_key in os.environ:
            values[name] = _coerce(field, os.environ[env_key], f"environment {env_key}")
    for name, raw in flag_overrides.items():
        if raw is not None:
            values[name] = _coerce(fields[name], raw, "command line")
    return RunConfig(**values)


def _require_file(config: RunConfig, field: str):
    value = getattr(config, field)
    if not value:
        raise ConfigError(field, "required path is not set")
    if not Path(value).is_file():
        raise ConfigError(field, f"file not found: {value}")


def validate_config(config: RunConfig, *, need_corpus: bool = True) -> None:
    """Field-level validation; raises ConfigError naming the offending field."""
    if config.method not in METHODS:
        raise ConfigError("method", f"must be one of {METHODS}, got {config.method!r}")
    if config.representation not in REPRESENTATIONS:
        raise ConfigError("representation", f"must be one of {REPRESENTATIONS}, got {config.representation!r}")
    if config.variant not in (OURS, LEE):
        raise ConfigError("variant", f"must be '{OURS}' or '{LEE}', got {config.variant!r}")
    if need_corpus:
        for field in ("corpus", "topics", "qrels"):
            _require_file(config, field)
    if config.representation == "boc":
        _require_file(config, "lexicon")
    if config.method in ("aes", "sdr+aes"):
        _require_file(config, "embeddings")
    if config.stopwords:
        _require_file(config, "stopwords")
    if not 0.0 < config.jm_lambda < 1.0:
        raise ConfigError("jm_lambda", f"must be in (0, 1), got {config.jm_lambda}")
    if not 0.0 <= config.aes_alpha <= 1.0:
        raise ConfigError("aes_alpha", f"must be in [0, 1], got {config.aes_alpha}")
    if config.bm25_k1 < 0.0:
        raise ConfigError("bm25_k1", f"must be >= 0, got {config.bm25_k1}")
    if not 0.0 <= config.bm25_b <= 1.0:
        raise ConfigError("bm25_b", f"must be in [0, 1], got {config.bm25_b}")
    if config.undersample_cap < 1:
        raise ConfigError("undersample_cap", f"must be positive, got {config.undersample_cap}")
    if not 0.0 < config.fraction <= 1.0:
        raise ConfigError("fraction", f"must be in (0, 1], got {config.fraction}")
    if config.repetitions < 1:
        raise ConfigError("repetitions", f"must be positive, got {config.repetitions}")
    if config.min_relevant < 2:
        raise ConfigError("min_relevant", f"must be >= 2, got {config.min_relevant}")
    if config.workers < 1:
        raise ConfigError("workers", f"must be positive, got {config.workers}")


@dataclasses.dataclass
class _Resources:
    corpus: dict
    topics: list
    pipeline: PipelineConfig
    params: ScoringParams
    lexicon: object | None
    embeddings: object | None


def _load_resources(config: RunConfig, min_relevant: int) -> _Resources:
    corpus = load_corpus(config.corpus)
    topics = filter_topics(load_topics(config.topics, config.qrels), min_relevant)
    if not topics:
        raise ConfigError("qrels", f"no topic has >= {min_relevant} relevant studies")
    if config.stopwords:
        with open(config.stopwords, encoding="utf-8") as fh:
            stopwords = frozenset(line.strip().lower() for line in fh if line.strip())
    else:
        stopwords = default_stopwords()
    pipeline = PipelineConfig(
        variant=config.variant, stopwords=stopwords, include_title=config.include_title
    )
    params = ScoringParams(
        jm_lambda=config.jm_lambda,
        aes_alpha=config.aes_alpha,
        bm25_k1=config.bm25_k1,
        bm25_b=config.bm25_b,
        undersample_cap=config.undersample_cap,
        rng_seed=config.rng_seed,
    )
    lexicon = load_lexicon(config.lexicon) if config.lexicon else None
    if lexicon is not None and len(lexicon) == 0:
        log.warning("lexicon %s is empty; every boc representation degenerates", config.lexicon)
    embeddings = load_embeddings(config.embeddings) if config.embeddings else None
    return _Resources(corpus, topics, pipeline, params, lexicon, embeddings)


def _atomic_write_run(entries, path: Path) -> None:
    tmp = path.with_name(path.name + ".tmp")
    corpus_io.write_run(entries, tmp)
    os.replace(tmp, path)


def _atomic_write_csv(rows: list[list], header: list[str], path: Path) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    os.replace(tmp, path)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _metric_rows(report: ExperimentReport) -> list[list]:
    rows = []
    for topic_id in sorted(report.values):
        for unit, metrics in report.values[topic_id].items():
            for metric, value in metrics.items():
                rows.append([topic_id, unit, metric, _format_value(value)])
    per_topic = report.per_topic_means()
    for metric in report.metric_names():
        for topic_id in sorted(per_topic.get(metric, {})):
            rows.append([topic_id, "mean", metric, _format_value(per_topic[metric][topic_id])])
    for metric, value in report.cross_topic_means().items():
        rows.append(["ALL", "mean", metric, _format_value(value)])
    return rows


def _run_pool(units, worker, max_workers: int):
    """Evaluate worker(unit) for every unit, preserving unit order in results."""
    if max_workers <= 1:
        return [worker(u) for u in units]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(worker, units))


def cmd_rank(config: RunConfig) -> int:
    """Single-seed leave-one-out runs plus their metric table."""
    validate_config(config)
    res = _load_resources(config, config.min_relevant)
    out = Path(config.output_dir)
    run_dir = out / "runs" / f"{config.method}-{config.representation}"
    run_dir.mkdir(parents=True, exist_ok=True)

    total = len(res.topics)

    def work(topic):
        report, runs = loocv_single(
            topic, res.corpus, config.method, config.representation, res.params, res.pipeline,
            lexicon=res.lexicon, embeddings=res.embeddings,
        )
        entries = [e for seed_id in runs for e in runs[seed_id]]
        _atomic_write_run(entries, run_dir / f"{topic.topic_id}.run")
        log.info("ranked topic %s (%d seeds)", topic.topic_id, len(runs))
        return report

    reports = _run_pool(res.topics, work, config.workers)
    master = ExperimentReport()
    for report in sorted(reports, key=lambda r: min(r.values)):
        master.merge(report)
    _atomic_write_csv(_metric_rows(master), ["topic_id", "seed_or_window", "metric", "value"], out / "metrics.csv")
    excluded = master.excluded_units()
    if excluded:
        log.warning("units without a retrieved relevant (excluded from means): %s", excluded)
    log.info("wrote %s and %d run files", out / "metrics.csv", total)
    return 0


def cmd_multi(config: RunConfig) -> int:
    """Seed-group runs with the oracle single-seed comparison."""
    validate_config(config)
    min_relevant = max(config.min_relevant, MULTI_MIN_RELEVANT)
    res = _load_resources(config, min_relevant)
    out = Path(config.output_dir)
    multi_dir = out / "runs" / f"{config.method}-{config.representation}-multi"
    oracle_dir = out / "runs" / f"{config.method}-{config.representation}-oracle"
    multi_dir.mkdir(parents=True, exist_ok=True)
    oracle_dir.mkdir(parents=True, exist_ok=True)

    def work(topic):
        _, single_runs = loocv_single(
            topic, res.corpus, config.method, config.representation, res.params, res.pipeline,
            lexicon=res.lexicon, embeddings=res.embeddings,
        )
        groups = make_groups(topic.topic_id, topic.relevant_ids, config.fraction)
        multi_report = ExperimentReport()
        oracle_report = ExperimentReport()
        multi_entries = []
        oracle_entries = []
        for group in groups:
            m_run = multi_sdr(
                topic, res.corpus, group, config.method, config.representation, res.params, res.pipeline,
                lexicon=res.lexicon, embeddings=res.embeddings,
            )
            o_run = oracle_single(topic, group, single_runs)
            multi_entries.extend(m_run)
            oracle_entries.extend(o_run)
            multi_report.add(topic.topic_id, group.unit, evaluate_entries(m_run, topic.judgments, DEFAULT_CUTOFFS))
            oracle_report.add(topic.topic_id, group.unit, evaluate_entries(o_run, topic.judgments, DEFAULT_CUTOFFS))
        _atomic_write_run(multi_entries, multi_dir / f"{topic.topic_id}.run")
        _atomic_write_run(oracle_entries, oracle_dir / f"{topic.topic_id}.run")
        log.info("topic %s: %d seed groups", topic.topic_id, len(groups))
        return multi_report, oracle_report

    results = _run_pool(res.topics, work, config.workers)
    multi_master = ExperimentReport()
    oracle_master = ExperimentReport()
    for multi_report, oracle_report in sorted(results, key=lambda pair: min(pair[0].values)):
        multi_master.merge(multi_report)
        oracle_master.merge(oracle_report)

    _atomic_write_csv(
        _metric_rows(multi_master), ["topic_id", "seed_or_window", "metric", "value"], out / "metrics.csv"
    )

    rows = []
    oracle_values = oracle_master.values
    for topic_id in sorted(multi_master.values):
        for unit, metrics in multi_master.values[topic_id].items():
            oracle_metrics = oracle_values.get(topic_id, {}).get(unit, {})
            for metric, m_value in metrics.items():
                if metric not in oracle_metrics:
                    continue
                s_value = oracle_metrics[metric]
                pct = (m_value - s_value) / s_value * 100.0 if s_value != 0 else ""
                rows.append(
                    [topic_id, unit, metric, _format_value(s_value), _format_value(m_value),
                     _format_value(pct) if pct != "" else ""]
                )
    multi_means = multi_master.cross_topic_means()
    oracle_means = oracle_master.cross_topic_means()
    for metric, m_value in multi_means.items():
        if metric not in oracle_means:
            continue
        s_value = oracle_means[metric]
        pct = (m_value - s_value) / s_value * 100.0 if s_value != 0 else ""
        rows.append(
            ["ALL", "mean", metric, _format_value(s_value), _format_value(m_value),
             _format_value(pct) if pct != "" else ""]
        )
    _atomic_write_csv(
        rows, ["topic_id", "window", "metric", "single", "multi", "pct_change"], out / "oracle_comparison.csv"
    )
    return 0


def cmd_eval(run_path: str, qrels_path: str, cutoffs, output: str | None) -> int:
    """Evaluate any TREC run against a qrels file (no candidate restriction)."""
    entries = load_run(run_path)
    qrels = corpus_io.load_qrels(qrels_path)
    by_topic: dict[str, list] = {}
    for entry in entries:
        by_topic.setdefault(entry.topic_id, []).append(entry)
    shared = [t for t in sorted(by_topic) if t in qrels]
    if not shared:
        raise ConfigError("run", "no run topic has judgments in the qrels file")

    rows = []
    sums: dict[str, list[float]] = {}
    for topic_id in shared:
        ranked = [e.doc_id for e in sorted(by_topic[topic_id], key=lambda e: e.rank)]
        metrics = metric_set(ranked, qrels[topic_id], cutoffs)
        for metric, value in metrics.items():
            rows.append([topic_id, metric, _format_value(value)])
            sums.setdefault(metric, []).append(value)
    for metric, values in sums.items():
        rows.append(["ALL", metric, _format_value(sum(values) / len(values))])

    header = ["topic_id", "metric", "value"]
    if output:
        _atomic_write_csv(rows, header, Path(output))
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
    return 0


def cmd_analyze(config: RunConfig) -> int:
    """Observation analyses: intra-similarity and term commonality CSVs."""
    validate_config(config)
    res = _load_resources(config, max(2, config.min_relevant))
    out = Path(config.output_dir) / "analysis"
    out.mkdir(parents=True, exist_ok=True)

    sim_rows = []
    common_rows = []
    skipped = 0
    for topic in res.topics:
        n_relevant = len(topic.relevant_ids)
        if len(topic.irrelevant_ids) < n_relevant:
            log.warning("topic %s skipped: fewer irrelevant than relevant studies", topic.topic_id)
            skipped += 1
            continue
        rel_mean, irrel_mean = intra_similarity(
            topic, res.corpus, config.representation, res.pipeline,
            lexicon=res.lexicon, repetitions=config.repetitions, rng_seed=config.rng_seed,
        )
        sim_rows.append(
            [topic.topic_id, config.representation, _format_value(rel_mean), _format_value(irrel_mean)]
        )
        _, histogram = term_commonality(
            topic, res.corpus, config.representation, res.pipeline, lexicon=res.lexicon
        )
        for docs_containing, n_terms in histogram.items():
            common_rows.append(
                [topic.topic_id, config.representation, docs_containing, n_relevant, n_terms]
            )
        log.info("analyzed topic %s", topic.topic_id)

    _atomic_write_csv(
        sim_rows, ["topic_id", "representation", "rel_mean", "irrel_mean"], out / "intra_similarity.csv"
    )
    _atomic_write_csv(
        common_rows,
        ["topic_id", "representation", "docs_containing", "n_relevant", "n_terms"],
        out / "term_commonality.csv",
    )
    if skipped:
        log.warning("%d topics skipped for lacking irrelevant studies", skipped)
    return 0


def _per_topic_means_from_csv(path: str) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"topic_id", "seed_or_window", "metric", "value"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise ConfigError("metrics", f"{path}: expected columns {sorted(expected)}")
        for row in reader:
            if row["seed_or_window"] == "mean" and row["topic_id"] != "ALL":
                out.setdefault(row["metric"], {})[row["topic_id"]] = float(row["value"])
    if not out:
        raise ConfigError("metrics", f"{path}: no per-topic mean rows found")
    return out


def cmd_compare(
    metrics_a: str, metrics_b: str, name_a: str, name_b: str,
    alpha: float, family_size: int | None, output: str | None,
) -> int:
    """Paired t-test with Bonferroni correction between two metric CSVs."""
    a = _per_topic_means_from_csv(metrics_a)
    b = _per_topic_means_from_csv(metrics_b)
    metrics = [m for m in a if m in b]
    if not metrics:
        raise ConfigError("metrics", "the two CSV files share no metrics")
    rows = significance_rows(name_a, name_b, a, b, metrics, alpha=alpha, family_size=family_size)
    out_rows = [
        [r["method_a"], r["method_b"], r["metric"], _format_value(r["t"]),
         _format_value(r["p"]), _format_value(r["p_adjusted"]), _format_value(r["significant"])]
        for r in rows
    ]
    header = ["method_a", "method_b", "metric", "t", "p", "p_adjusted", "significant"]
    if output:
        _atomic_write_csv(out_rows, header, Path(output))
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(out_rows)
    return 0


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML/JSON config file")
    for field in dataclasses.fields(RunConfig):
        parser.add_argument(f"--{field.name.replace('_', '-')}", dest=field.name, default=None)


def _flag_overrides(args: argparse.Namespace) -> dict:
    return {f.name: getattr(args, f.name, None) for f in dataclasses.fields(RunConfig)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seedrank",
        description="Seed-driven screening prioritisation experiments",
    )
    parser.add_argument("-q", "--quiet", action="store_true", help="suppress progress logging")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("rank", "single-seed leave-one-out runs + metrics"),
        ("multi", "seed-group runs + oracle comparison"),
        ("analyze", "intra-similarity and term-commonality CSVs"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_config_flags(p)

    p = sub.add_parser("eval", help="evaluate a TREC run against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--k", type=int, nargs="+", default=list(DEFAULT_CUTOFFS))
    p.add_argument("--output", help="CSV path (default: stdout)")

    p = sub.add_parser("compare", help="significance test between two metric CSVs")
    p.add_argument("--metrics-a", required=True)
    p.add_argument("--metrics-b", required=True)
    p.add_argument("--name-a", default=None)
    p.add_argument("--name-b", default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--family-size", type=int, default=None)
    p.add_argument("--output", help="CSV path (default: stdout)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command in ("rank", "multi", "analyze"):
            config = load_config(args.config, _flag_overrides(args))
            return {"rank": cmd_rank, "multi": cmd_multi, "analyze": cmd_analyze}[args.command](config)
        if args.command == "eval":
            return cmd_eval(args.run, args.qrels, tuple(args.k), args.output)
        return cmd_compare(
            args.metrics_a, args.metrics_b,
            args.name_a or args.metrics_a, args.name_b or args.metrics_b,
            args.alpha, args.family_size, args.output,
        )
    except (SeedRankError, OSError) as exc:
        summary = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, ConfigError):
            summary["field"] = exc.field
        print(json.dumps(summary), file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1


if __name__ == "__main__":
    sys.exit(main())
