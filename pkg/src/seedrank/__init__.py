"""seedrank: screening prioritisation driven by known-relevant seed studies.

Given a review topic's candidate set and one or more seed studies, rank the
candidates so the remaining relevant studies surface early. The library
covers the full experimental loop: corpus/topic/qrels loading, bag-of-words
and clinical-lexicon representations under two pre-processing pipelines,
QLM / seed-weighted / BM25 / embedding rankers, leave-one-out and
seed-group experiments with an oracle baseline, trec_eval-compatible
metrics and paired significance tests.
"""

from .corpus import (
    Document,
    EmbeddingTable,
    Lexicon,
    RunEntry,
    Topic,
    fetch_annotations,
    filter_topics,
    load_corpus,
    load_embeddings,
    load_lexicon,
    load_qrels,
    load_run,
    load_topics,
    write_run,
)
from .errors import (
    ConfigError,
    ContractError,
    DegenerateTestError,
    DuplicateIdError,
    EmptyCollectionError,
    EmptyTopicError,
    InsufficientDocumentsError,
    InsufficientSeedsError,
    MissingTopicError,
    ParseError,
    ProtocolError,
    RunValidationError,
    SeedRankError,
    TransportError,
    UndefinedMetricError,
)
from .evaluation import (
    average_precision,
    bonferroni,
    last_rel_percent,
    metric_set,
    ndcg_at,
    paired_t_test,
    precision_at,
    recall_at,
    wss,
)
from .experiments import (
    ExperimentReport,
    SeedGroup,
    concat_group,
    evaluate_entries,
    intra_similarity,
    loocv_single,
    make_groups,
    multi_sdr,
    oracle_single,
    term_commonality,
)
from .scoring import (
    ScoringParams,
    aes_score,
    bm25_score,
    gamma,
    interpolate,
    minmax,
    phi,
    phi_weights,
    qlm_score,
    rank,
    sdr_score,
)
from .text import LEE, OURS, PipelineConfig, TermCounts, boc, bow, default_stopwords, tokenize
from .vectors import CollectionStats, TfIdfVector, aes_vector, build_stats, cosine, tfidf

__version__ = "0.1.0"
