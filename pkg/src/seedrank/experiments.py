"""Experiment drivers: leave-one-out runs, seed groups, oracle comparison,
and the two corpus observations (intra-similarity, term commonality).

Leave-one-out: every relevant study of a topic serves once as the seed;
the seed is excluded from the candidate pool and from the judgments used
to score its own run. Per-topic figures are means over seeds, cross-topic
figures are unweighted means over topics.

Multi-seed runs group the seed pool with a stride-1 sliding window (window
width = 20% of the pool, floored at 2) and concatenate each group into one
pseudo-seed. The comparison baseline is an oracle that picks the best
group member's single run and drops the other members from it, so both
runs rank exactly the same candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .corpus import Document, EmbeddingTable, Lexicon, RunEntry, Topic
from .errors import ContractError, InsufficientDocumentsError, InsufficientSeedsError
from .evaluation import DEFAULT_CUTOFFS, average_precision, metric_set, ranked_ids, restrict_qrels
from .scoring import ScoringParams, derive_rng, rank
from .text import PipelineConfig, TermCounts, boc, bow
from .vectors import build_stats, cosine, tfidf

LASTREL_METRICS = ("lastrel%", "wss")


@dataclass(frozen=True)
class SeedGroup:
    """One sliding-window group of a topic's seed pool."""

    topic_id: str
    member_ids: tuple[str, ...]
    window_index: int

    @property
    def unit(self) -> str:
        """Key used for run files and metric rows."""
        return f"w{self.window_index}"


@dataclass
class ExperimentReport:
    """Metric values per (topic, seed-or-window) with mean aggregation."""

    values: dict[str, dict[str, dict[str, float]]] = field(default_factory=dict)

    def add(self, topic_id: str, unit: str, metrics: Mapping[str, float]) -> None:
        self.values.setdefault(topic_id, {})[unit] = dict(metrics)

    def merge(self, other: "ExperimentReport") -> None:
        for topic_id, units in other.values.items():
            for unit, metrics in units.items():
                self.add(topic_id, unit, metrics)

    def metric_names(self) -> list[str]:
        names: dict[str, None] = {}
        for units in self.values.values():
            for metrics in units.values():
                for name in metrics:
                    names.setdefault(name)
        return list(names)

    def per_topic_means(self) -> dict[str, dict[str, float]]:
        """metric -> topic -> mean over the units where the metric is defined."""
        out: dict[str, dict[str, float]] = {}
        for metric in self.metric_names():
            for topic_id, units in self.values.items():
                vals = [m[metric] for m in units.values() if metric in m]
                if vals:
                    out.setdefault(metric, {})[topic_id] = sum(vals) / len(vals)
        return out

    def cross_topic_means(self) -> dict[str, float]:
        """Unweighted mean of the per-topic means."""
        out = {}
        for metric, by_topic in self.per_topic_means().items():
            out[metric] = sum(by_topic.values()) / len(by_topic)
        return out

    def excluded_units(self) -> dict[str, int]:
        """How many units lacked each metric (no relevant retrieved)."""
        out: dict[str, int] = {}
        for metric in LASTREL_METRICS:
            count = 0
            for units in self.values.values():
                count += sum(1 for m in units.values() if metric not in m)
            if count:
                out[metric] = count
        return out


def evaluate_entries(
    entries: Sequence[RunEntry],
    judgments: Mapping[str, int],
    cutoffs: Sequence[int] = DEFAULT_CUTOFFS,
) -> dict[str, float]:
    """Metrics for one run unit, with the qrels restricted to its candidates."""
    run = ranked_ids(entries)
    return metric_set(run, restrict_qrels(judgments, run), cutoffs)


def loocv_single(
    topic: Topic,
    corpus: Mapping[str, Document],
    method: str,
    representation: str,
    params: ScoringParams,
    pipeline: PipelineConfig,
    *,
    lexicon: Lexicon | None = None,
    embeddings: EmbeddingTable | None = None,
    cutoffs: Sequence[int] = DEFAULT_CUTOFFS,
) -> tuple[ExperimentReport, dict[str, list[RunEntry]]]:
    """One run per relevant study used as the seed, plus its metrics.

    Returns the per-seed report and the runs keyed by seed id (run entries
    carry the composite key ``topic_id.seed_id``).
    """
    seeds = topic.relevant_ids
    if len(seeds) < 2:
        raise InsufficientSeedsError(
            f"topic {topic.topic_id!r} has {len(seeds)} relevant studies; leave-one-out needs >= 2"
        )
    report = ExperimentReport()
    runs: dict[str, list[RunEntry]] = {}
    for seed_id in seeds:
        entries = rank(
            topic, corpus, [seed_id], method, representation, params, pipeline,
            lexicon=lexicon, embeddings=embeddings,
            run_key=f"{topic.topic_id}.{seed_id}",
        )
        runs[seed_id] = entries
        report.add(topic.topic_id, seed_id, evaluate_entries(entries, topic.judgments, cutoffs))
    return report, runs


def make_groups(topic_id: str, seed_pool: Sequence[str], fraction: float = 0.2) -> list[SeedGroup]:
    """Stride-1 sliding-window groups over the seed pool.

    Window width w = max(2, ceil(fraction * N)) and the windows start at
    offsets 0 .. N - w, giving N - w + 1 groups; every seed lands in at
    least one and at most w groups.
    """
    n = len(seed_pool)
    if n < 3:
        raise InsufficientSeedsError(f"grouping needs >= 3 seed studies, got {n}")
    w = max(2, math.ceil(fraction * n))
    return [
        SeedGroup(topic_id, tuple(seed_pool[i : i + w]), i)
        for i in range(n - w + 1)
    ]


def concat_group(group: SeedGroup, corpus: Mapping[str, Document]) -> Document:
    """One synthetic document whose text is the member texts in member order.

    Titles and abstracts are concatenated field-wise, so the pseudo
    document's term counts are the sum of the members' counts under either
    title setting.
    """
    missing = [m for m in group.member_ids if m not in corpus]
    if missing:
        raise ContractError(f"group members not in corpus: {missing}")
    members = [corpus[m] for m in group.member_ids]
    return Document(
        doc_id="+".join(group.member_ids),
        title=" ".join(m.title for m in members),
        abstract=" ".join(m.abstract for m in members),
    )


def multi_sdr(
    topic: Topic,
    corpus: Mapping[str, Document],
    group: SeedGroup,
    method: str,
    representation: str,
    params: ScoringParams,
    pipeline: PipelineConfig,
    *,
    lexicon: Lexicon | None = None,
    embeddings: EmbeddingTable | None = None,
    run_key: str | None = None,
) -> list[RunEntry]:
    """Rank with a concatenated seed group; candidates exclude every member.

    Term-weight partitions larger than ``params.undersample_cap`` are
    randomly under-sampled (this is what makes large groups tractable).
    """
    key = run_key if run_key is not None else f"{topic.topic_id}.{group.unit}"
    return rank(
        topic, corpus, list(group.member_ids), method, representation, params, pipeline,
        lexicon=lexicon, embeddings=embeddings,
        undersample=True, run_key=key,
    )


def oracle_single(
    topic: Topic,
    group: SeedGroup,
    single_runs: Mapping[str, list[RunEntry]],
    *,
    run_key: str | None = None,
) -> list[RunEntry]:
    """Best group member's single run, filtered to the multi candidate set.

    The member whose single run has the highest AP wins (ties: smallest
    seed doc_id); the other members' entries are deleted from the winning
    run and ranks are compacted to 1..n so the result ranks exactly the
    documents the group's multi run ranks.
    """
    missing = [m for m in group.member_ids if m not in single_runs]
    if missing:
        raise ContractError(f"no single run supplied for group members: {missing}")
    best_seed = None
    best_ap = -1.0
    for seed_id in sorted(group.member_ids):
        entries = single_runs[seed_id]
        run = ranked_ids(entries)
        ap = average_precision(run, restrict_qrels(topic.judgments, run))
        if ap > best_ap:
            best_ap = ap
            best_seed = seed_id
    others = set(group.member_ids) - {best_seed}
    key = run_key if run_key is not None else f"{topic.topic_id}.{group.unit}"
    kept = [e for e in sorted(single_runs[best_seed], key=lambda e: e.rank) if e.doc_id not in others]
    return [
        RunEntry(key, e.doc_id, i, e.score, f"{e.tag}-oracle")
        for i, e in enumerate(kept, start=1)
    ]


def _pairwise_mean_cosine(vectors) -> float:
    total = 0.0
    pairs = 0
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            total += cosine(vectors[i], vectors[j])
            pairs += 1
    return total / pairs


def intra_similarity(
    topic: Topic,
    corpus: Mapping[str, Document],
    representation: str,
    pipeline: PipelineConfig,
    *,
    lexicon: Lexicon | None = None,
    repetitions: int = 10,
    rng_seed: int = 0,
) -> tuple[float, float]:
    """Mean pairwise similarity among relevant vs sampled irrelevant studies.

    The irrelevant side is under-sampled ``repetitions`` times to the size
    of the relevant set and the per-sample means are averaged. tf-idf
    vectors are built over the topic's full candidate set.
    """
    relevant = topic.relevant_ids
    if len(relevant) < 2:
        raise InsufficientDocumentsError(
            f"topic {topic.topic_id!r}: need >= 2 relevant studies, got {len(relevant)}"
        )
    irrelevant = topic.irrelevant_ids
    if len(irrelevant) < len(relevant):
        raise InsufficientDocumentsError(
            f"topic {topic.topic_id!r}: need >= {len(relevant)} irrelevant studies, got {len(irrelevant)}"
        )

    absent = [d for d in topic.candidate_ids if d not in corpus]
    if absent:
        raise ContractError(
            f"topic {topic.topic_id!r}: {len(absent)} candidates missing from the corpus "
            f"(first: {absent[:3]})"
        )

    def counts_for(doc_id: str) -> TermCounts:
        counts = bow(corpus[doc_id], pipeline)
        return boc(counts, lexicon) if representation == "boc" else counts

    all_counts = {d: counts_for(d) for d in topic.candidate_ids}
    stats = build_stats(all_counts)
    vectors = {d: tfidf(c, stats) for d, c in all_counts.items()}

    rel_mean = _pairwise_mean_cosine([vectors[d] for d in relevant])

    rng = derive_rng(rng_seed, topic.topic_id, "intra-similarity")
    sample_means = []
    for _ in range(repetitions):
        chosen = rng.choice(len(irrelevant), size=len(relevant), replace=False)
        sample = [vectors[irrelevant[i]] for i in sorted(chosen)]
        sample_means.append(_pairwise_mean_cosine(sample))
    return rel_mean, sum(sample_means) / len(sample_means)


def term_commonality(
    topic: Topic,
    corpus: Mapping[str, Document],
    representation: str,
    pipeline: PipelineConfig,
    *,
    lexicon: Lexicon | None = None,
) -> tuple[dict[str, float], dict[int, int]]:
    """How widely each term is shared across a topic's relevant studies.

    Returns (term -> fraction of relevant docs containing it) over the
    union vocabulary, plus the histogram (number of docs containing a term
    -> number of such terms) behind the distribution plots.
    """
    relevant = topic.relevant_ids
    if not relevant:
        raise InsufficientDocumentsError(f"topic {topic.topic_id!r} has no relevant studies")
    doc_counts: dict[str, int] = {}
    for doc_id in relevant:
        counts = bow(corpus[doc_id], pipeline)
        if representation == "boc":
            counts = boc(counts, lexicon)
        for term in counts.counts:
            doc_counts[term] = doc_counts.get(term, 0) + 1
    n = len(relevant)
    fractions = {t: c / n for t, c in doc_counts.items()}
    histogram: dict[int, int] = {}
    for c in doc_counts.values():
        histogram[c] = histogram.get(c, 0) + 1
    return fractions, {k: histogram[k] for k in sorted(histogram)}
