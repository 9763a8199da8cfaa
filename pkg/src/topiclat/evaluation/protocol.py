"""Seeded 80/20 evaluation protocol and the ablation grid.

Per seed: split documents, fit every model on the train split only, index
the train chunks under each technique variant, evaluate queries derived from
held-out test chunks (first 30 tokens), cluster the indexed vectors with
k-means at k = the LDA topic count, and score everything. Reported numbers
are means and standard deviations across seeds.
"""

from __future__ import annotations

import dataclasses
import hashlib
import time
from dataclasses import dataclass, field

import numpy as np

from ..corpus import Chunk, Document, PipelineConfig, chunk_document
from ..embed import EmbeddingProviderConfig, make_provider
from ..errors import ConfigError, DataError
from ..fusion import FusionConfig
from ..index import build_index, knn
from ..lda import LdaConfig
from ..pipeline import (
    ModelConfig,
    TrainedArtifacts,
    enrich_query,
    fit_artifacts,
    technique_vectors,
)
from .clustering import best_result, calinski_harabasz, davies_bouldin, kmeans, silhouette
from .retrieval import RelevanceJudgments, pr_curve, retrieval_metrics


@dataclass(frozen=True)
class Variant:
    """One row of an evaluation table: a named technique + fusion setting."""

    name: str
    technique: str
    fusion: FusionConfig = FusionConfig()


@dataclass(frozen=True)
class ProtocolConfig:
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    split: float = 0.8
    k_levels: tuple[int, ...] = (10, 20, 50)
    query_tokens: int = 30
    kmeans_restarts: int = 5
    corpus: PipelineConfig = PipelineConfig()
    model: ModelConfig = ModelConfig()
    provider: EmbeddingProviderConfig = EmbeddingProviderConfig()

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("protocol needs at least one seed")
        if not 0.0 < self.split < 1.0:
            raise ConfigError(f"split must be in (0, 1), got {self.split}")


DEFAULT_TECHNIQUE_VARIANTS = (
    Variant("TF-IDF", "tfidf"),
    Variant("LSA", "lsa"),
    Variant("LDA", "lda"),
    Variant("Contextual", "contextual"),
    Variant("Topic-Enriched (concat)", "enriched-concat"),
    Variant("Topic-Enriched (weighted)", "enriched-weighted"),
    Variant("Random Topic Vectors", "random-topic"),
)

ABLATION_VARIANTS = (
    Variant("Contextual Only", "contextual"),
    Variant("+ LSA (concat)", "enriched-concat",
            FusionConfig(strategy="concat", topic_composition="lsa")),
    Variant("+ LDA (concat)", "enriched-concat",
            FusionConfig(strategy="concat", topic_composition="lda")),
    Variant("+ LSA (weighted)", "enriched-weighted",
            FusionConfig(strategy="weighted", topic_composition="lsa")),
    Variant("+ LDA (weighted)", "enriched-weighted",
            FusionConfig(strategy="weighted", topic_composition="lda")),
    Variant("Topic-Enriched", "enriched-concat",
            FusionConfig(strategy="concat", topic_composition="lsa+lda")),
    Variant("Random Topic Vectors", "random-topic"),
)


@dataclass
class MetricSummary:
    mean: float
    sd: float | None  # None when a single seed was run

    def sd_value(self) -> float:
        return 0.0 if self.sd is None else self.sd


@dataclass
class VariantReport:
    name: str
    technique: str
    silhouette: MetricSummary
    calinski_harabasz: MetricSummary
    davies_bouldin: MetricSummary
    retrieval: dict[int, dict[str, MetricSummary]]  # k -> metric -> summary
    pr_rows: list[tuple[float, float, float]]


@dataclass
class EvalReport:
    variants: list[VariantReport]
    seeds: tuple[int, ...]
    split: float
    k_levels: tuple[int, ...]
    runtimes: dict[str, float] = field(default_factory=dict)

    def variant(self, name: str) -> VariantReport:
        for v in self.variants:
            if v.name == name:
                return v
        raise KeyError(name)


def _derived_seed(*parts) -> int:
    digest = hashlib.blake2b(
        ":".join(str(p) for p in parts).encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little")


def _summary(values: list[float]) -> MetricSummary:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape[0] < 2:
        return MetricSummary(mean=float(arr.mean()), sd=None)
    return MetricSummary(mean=float(arr.mean()), sd=float(arr.std(ddof=1)))


def split_documents(
    documents: list[Document], split: float, seed: int
) -> tuple[list[Document], list[Document]]:
    """Seeded shuffle then an 80/20 (by default) cut; both sides non-empty."""
    if len(documents) < 2:
        raise DataError("need at least two documents to split")
    order = np.random.default_rng(seed).permutation(len(documents))
    n_train = min(max(int(len(documents) * split), 1), len(documents) - 1)
    train = [documents[i] for i in order[:n_train]]
    test = [documents[i] for i in order[n_train:]]
    train.sort(key=lambda d: d.doc_id)
    test.sort(key=lambda d: d.doc_id)
    return train, test


def _chunk_all(
    documents: list[Document], config: PipelineConfig
) -> dict[str, list[Chunk]]:
    stopwords = config.stopwords()
    return {
        doc.doc_id: chunk_document(doc, config, stopwords) for doc in documents
    }


@dataclass
class SeedRun:
    """Everything evaluated for one protocol seed."""

    seed: int
    bundle: TrainedArtifacts
    train_chunks: list[Chunk]
    judgments: RelevanceJudgments
    rankings: dict[str, dict[str, list[str]]]  # variant -> qid -> ranked ids
    clustering: dict[str, tuple[float, float, float]]  # variant -> (sil, ch, db)
    retrieval: dict[str, dict[int, tuple[float, float, float]]]


def run_seed(
    documents: list[Document],
    labels: dict[str, int],
    variants: tuple[Variant, ...],
    config: ProtocolConfig,
    seed: int,
    chunks_by_doc: dict[str, list[Chunk]] | None = None,
) -> SeedRun:
    if chunks_by_doc is None:
        chunks_by_doc = _chunk_all(documents, config.corpus)
    train_docs, test_docs = split_documents(documents, config.split, seed)
    train_chunks = [c for d in train_docs for c in chunks_by_doc[d.doc_id]]
    doc_of_chunk = {c.chunk_id: c.doc_id for c in train_chunks}

    model_config = dataclasses.replace(
        config.model,
        lsa_seed=_derived_seed(seed, "lsa"),
        lda=dataclasses.replace(
            config.model.lda, seed=_derived_seed(seed, "lda")
        ),
    )
    bundle = fit_artifacts(train_chunks, config.corpus, model_config)
    provider = make_provider(config.provider)

    # queries from held-out test chunks: first query_tokens tokens
    queries: dict[str, str] = {}
    relevant: dict[str, frozenset[str]] = {}
    for doc in test_docs:
        topic = labels[doc.doc_id]
        topic_train = frozenset(
            c.chunk_id for c in train_chunks if labels[c.doc_id] == topic
        )
        if not topic_train:
            continue
        for chunk in chunks_by_doc[doc.doc_id]:
            queries[chunk.chunk_id] = " ".join(
                chunk.tokens[: config.query_tokens]
            )
            relevant[chunk.chunk_id] = topic_train
    if not queries:
        raise DataError("no evaluable queries: every test topic lost its train chunks")
    judgments = RelevanceJudgments(
        queries=queries, relevant=relevant, provenance="synthetic-topic"
    )

    rankings: dict[str, dict[str, list[str]]] = {}
    clustering: dict[str, tuple[float, float, float]] = {}
    retrieval: dict[str, dict[int, tuple[float, float, float]]] = {}
    kmeans_seeds = [
        _derived_seed(seed, "kmeans", i) for i in range(config.kmeans_restarts)
    ]
    for variant in variants:
        vectors, fingerprint = technique_vectors(
            bundle, train_chunks, provider, variant.technique, variant.fusion
        )
        vindex = build_index(vectors, doc_of_chunk, fingerprint)
        variant_rankings: dict[str, list[str]] = {}
        for qid in sorted(queries):
            qvec = enrich_query(
                bundle,
                provider,
                variant.technique,
                variant.fusion,
                queries[qid],
                seed=_derived_seed(seed, "fold", qid),
            )
            result = knn(vindex, qvec, k=len(vindex))
            variant_rankings[qid] = result.chunk_ids()
        rankings[variant.name] = variant_rankings
        retrieval[variant.name] = retrieval_metrics(
            variant_rankings, judgments, config.k_levels
        )

        block = np.stack([vectors[cid].values for cid in sorted(vectors)])
        k_clusters = bundle.lda.n_topics
        best = best_result(kmeans(block, k_clusters, kmeans_seeds))
        if np.unique(best.assignments).shape[0] < 2:
            clustering[variant.name] = (
                float("nan"), float("nan"), float("nan")
            )
        else:
            clustering[variant.name] = (
                silhouette(block, best.assignments),
                calinski_harabasz(block, best.assignments),
                davies_bouldin(block, best.assignments),
            )

    return SeedRun(
        seed=seed,
        bundle=bundle,
        train_chunks=train_chunks,
        judgments=judgments,
        rankings=rankings,
        clustering=clustering,
        retrieval=retrieval,
    )


def run_variants(
    documents: list[Document],
    labels: dict[str, int],
    variants: tuple[Variant, ...],
    config: ProtocolConfig,
) -> EvalReport:
    start = time.perf_counter()
    chunks_by_doc = _chunk_all(documents, config.corpus)
    chunk_time = time.perf_counter() - start

    runs: list[SeedRun] = []
    fit_time = 0.0
    for seed in config.seeds:
        t0 = time.perf_counter()
        runs.append(
            run_seed(documents, labels, variants, config, seed, chunks_by_doc)
        )
        fit_time += time.perf_counter() - t0

    reports: list[VariantReport] = []
    for variant in variants:
        sils = [r.clustering[variant.name][0] for r in runs]
        chs = [r.clustering[variant.name][1] for r in runs]
        dbs = [r.clustering[variant.name][2] for r in runs]
        retrieval_summary: dict[int, dict[str, MetricSummary]] = {}
        for k in config.k_levels:
            retrieval_summary[k] = {
                "precision": _summary(
                    [r.retrieval[variant.name][k][0] for r in runs]
                ),
                "recall": _summary(
                    [r.retrieval[variant.name][k][1] for r in runs]
                ),
                "f1": _summary([r.retrieval[variant.name][k][2] for r in runs]),
            }
        rows = pr_curve(
            [r.rankings[variant.name] for r in runs],
            [r.judgments for r in runs],
        )
        reports.append(
            VariantReport(
                name=variant.name,
                technique=variant.technique,
                silhouette=_summary(sils),
                calinski_harabasz=_summary(chs),
                davies_bouldin=_summary(dbs),
                retrieval=retrieval_summary,
                pr_rows=rows,
            )
        )
    total = time.perf_counter() - start
    return EvalReport(
        variants=reports,
        seeds=tuple(config.seeds),
        split=config.split,
        k_levels=tuple(config.k_levels),
        runtimes={
            "chunking_s": chunk_time,
            "seed_runs_s": fit_time,
            "total_s": total,
        },
    )


def run_protocol(
    documents: list[Document],
    labels: dict[str, int],
    config: ProtocolConfig,
    techniques: tuple[str, ...] | None = None,
) -> EvalReport:
    """The paper-shaped protocol over the standard technique set."""
    variants = DEFAULT_TECHNIQUE_VARIANTS
    if techniques is not None:
        chosen = []
        for v in DEFAULT_TECHNIQUE_VARIANTS:
            if v.technique in techniques:
                chosen.append(v)
        missing = set(techniques) - {v.technique for v in chosen}
        if missing:
            raise ConfigError(f"unknown techniques {sorted(missing)}")
        variants = tuple(chosen)
    return run_variants(documents, labels, variants, config)


def run_ablation(
    documents: list[Document],
    labels: dict[str, int],
    config: ProtocolConfig,
) -> EvalReport:
    """The seven-variant grid isolating each enrichment signal."""
    return run_variants(documents, labels, ABLATION_VARIANTS, config)
