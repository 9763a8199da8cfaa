"""End-to-end transform pipeline: the index-construction and query phases.

A TrainedArtifacts bundle holds everything fitted on a corpus (vocabulary,
IDF, LSA projection, LDA count tables, alignment map) plus content hashes,
so queries can be pushed through the identical tokenize -> TF-IDF -> LSA
project -> LDA fold-in -> embed -> fuse path used at indexing time and land
in the same space, verified by fingerprint.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass

import numpy as np

from . import artifacts as artifact_io
from .corpus import Chunk, PipelineConfig, tokenize
from .embed import ContextVector, embed_chunks, embed_query
from .errors import ConfigError, DegenerateInput
from .fusion import (
    AlignmentMap,
    EnrichedVector,
    FusionConfig,
    compute_fingerprint,
    fuse_concat,
    fuse_weighted,
    make_alignment,
    topic_vector,
)
from .lda import LdaConfig, LdaModel, TopicMixture, fit_lda, infer_mixture
from .lsa import LsaModel, LsaVector, fit_lsa, project_matrix
from .sparse import (
    TermDocMatrix,
    TfIdfModel,
    Vocabulary,
    build_matrix,
    fit_tfidf,
    tfidf_matrix,
    vectorize_tokens,
)

TECHNIQUES = (
    "tfidf",
    "lsa",
    "lda",
    "contextual",
    "enriched-concat",
    "enriched-weighted",
    "random-topic",
)


@dataclass(frozen=True)
class ModelConfig:
    """Everything needed to fit the topic artifacts on a chunked corpus."""

    min_df: int = 2
    max_df_ratio: float = 0.5
    idf_floor_zero: bool = False
    lsa_rank: int = 100
    lsa_seed: int = 0
    lda: LdaConfig = LdaConfig()
    lda_granularity: str = "chunk"  # chunk | document
    fold_in_iterations: int = 50

    def __post_init__(self):
        if self.lda_granularity not in ("chunk", "document"):
            raise ConfigError(
                f"lda_granularity must be 'chunk' or 'document', "
                f"got {self.lda_granularity!r}"
            )


@dataclass
class TrainedArtifacts:
    corpus_config: PipelineConfig
    model_config: ModelConfig
    vocabulary: Vocabulary
    matrix: TermDocMatrix
    tfidf: TfIdfModel
    weights: "object"  # sparse V x N TF-IDF matrix
    lsa: LsaModel
    lda: LdaModel
    chunk_thetas: dict[str, TopicMixture]
    chunk_lsa: dict[str, LsaVector]
    hashes: dict[str, str]

    def alignment_for(self, fusion_config: FusionConfig, context_dim: int) -> AlignmentMap:
        return make_alignment(
            topic_dim=self.topic_dim(fusion_config),
            context_dim=context_dim,
            seed=fusion_config.alignment_seed,
        )

    def topic_dim(self, fusion_config: FusionConfig) -> int:
        composition = fusion_config.topic_composition
        if composition == "lsa":
            return self.lsa.rank
        if composition == "lda":
            return self.lda.n_topics
        if composition == "lsa+lda":
            return self.lsa.rank + self.lda.n_topics
        if fusion_config.random_dim is None:
            return self.lsa.rank + self.lda.n_topics
        return fusion_config.random_dim


def _stable_seed(*parts) -> int:
    digest = hashlib.blake2b(
        ":".join(str(p) for p in parts).encode("utf-8"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little")


def _tfidf_hash(model: TfIdfModel) -> str:
    buf = io.BytesIO()
    artifact_io.write_u64(buf, model.n_docs)
    artifact_io.write_u32(buf, int(model.idf_floor_zero))
    for term in model.vocabulary.terms:
        artifact_io.write_string(buf, term)
    artifact_io.write_array(buf, model.vocabulary.df, dtype="<i8")
    artifact_io.write_array(buf, model.idf)
    return artifact_io.content_hash(buf.getvalue())


def _lsa_hash(model: LsaModel) -> str:
    buf = io.BytesIO()
    artifact_io.write_u32(buf, model.rank)
    artifact_io.write_array(buf, model.sigma)
    artifact_io.write_array(buf, model.u)
    return artifact_io.content_hash(buf.getvalue())


def _lda_hash(model: LdaModel) -> str:
    buf = io.BytesIO()
    artifact_io.write_u32(buf, model.n_topics)
    artifact_io.write_u32(buf, model.n_terms)
    artifact_io.write_array(buf, model.phi)
    artifact_io.write_array(buf, model.n_kw, dtype="<i8")
    artifact_io.write_array(buf, model.n_k, dtype="<i8")
    return artifact_io.content_hash(buf.getvalue())


def fit_artifacts(
    chunks: list[Chunk],
    corpus_config: PipelineConfig,
    model_config: ModelConfig,
) -> TrainedArtifacts:
    """Fit vocabulary, TF-IDF, LSA, and LDA on a chunked corpus."""
    vocab, matrix = build_matrix(
        chunks, min_df=model_config.min_df, max_df_ratio=model_config.max_df_ratio
    )
    tfidf = fit_tfidf(vocab, matrix, idf_floor_zero=model_config.idf_floor_zero)
    weights = tfidf_matrix(tfidf, matrix)
    rank = min(model_config.lsa_rank, min(weights.shape))
    lsa_model = fit_lsa(weights, rank, seed=model_config.lsa_seed)
    coords = project_matrix(lsa_model, weights)
    chunk_lsa = {
        chunk.chunk_id: LsaVector(coords=coords[i])
        for i, chunk in enumerate(chunks)
    }

    term_to_id = {t: i for i, t in enumerate(vocab.terms)}
    streams = [
        np.array(
            [term_to_id[t] for t in chunk.tokens if t in term_to_id],
            dtype=np.int32,
        )
        for chunk in chunks
    ]
    if model_config.lda_granularity == "document":
        doc_order: list[str] = []
        doc_streams: dict[str, list[np.ndarray]] = {}
        for chunk, stream in zip(chunks, streams):
            if chunk.doc_id not in doc_streams:
                doc_order.append(chunk.doc_id)
                doc_streams[chunk.doc_id] = []
            doc_streams[chunk.doc_id].append(stream)
        merged = [np.concatenate(doc_streams[d]) for d in doc_order]
        lda_model, doc_mixtures = fit_lda(merged, len(vocab), model_config.lda)
        by_doc = dict(zip(doc_order, doc_mixtures))
        chunk_thetas = {
            chunk.chunk_id: by_doc[chunk.doc_id] for chunk in chunks
        }
    else:
        lda_model, mixtures = fit_lda(streams, len(vocab), model_config.lda)
        chunk_thetas = {
            chunk.chunk_id: mix for chunk, mix in zip(chunks, mixtures)
        }

    bundle = TrainedArtifacts(
        corpus_config=corpus_config,
        model_config=model_config,
        vocabulary=vocab,
        matrix=matrix,
        tfidf=tfidf,
        weights=weights,
        lsa=lsa_model,
        lda=lda_model,
        chunk_thetas=chunk_thetas,
        chunk_lsa=chunk_lsa,
        hashes={},
    )
    bundle.hashes = {
        "tfidf": _tfidf_hash(tfidf),
        "lsa": _lsa_hash(lsa_model),
        "lda": _lda_hash(lda_model),
    }
    return bundle


def fingerprint_for(
    bundle: TrainedArtifacts, fusion_config: FusionConfig, provider
) -> str:
    return compute_fingerprint(
        fusion_config, provider.provider_id, bundle.hashes
    )


def _normalize(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm < 1e-12:
        raise DegenerateInput("zero vector cannot be normalized")
    return vec / norm


def technique_vectors(
    bundle: TrainedArtifacts,
    chunks: list[Chunk],
    provider,
    technique: str,
    fusion_config: FusionConfig,
) -> tuple[dict[str, EnrichedVector], str]:
    """Per-chunk vectors for one representation technique, plus the index
    fingerprint binding them."""
    if technique not in TECHNIQUES:
        raise ConfigError(f"unknown technique {technique!r}")
    fusion_config = _technique_fusion(fusion_config, technique, bundle)
    fingerprint = compute_fingerprint(
        fusion_config,
        provider.provider_id if technique != "tfidf" else "none",
        {**bundle.hashes, "technique": technique},
    )
    out: dict[str, EnrichedVector] = {}
    if technique in ("contextual", "enriched-concat", "enriched-weighted",
                     "random-topic"):
        context = embed_chunks(provider, chunks)
    if technique == "enriched-weighted":
        alignment = bundle.alignment_for(
            fusion_config, context_dim=provider.dim
        )
    for i, chunk in enumerate(chunks):
        cid = chunk.chunk_id
        if technique == "tfidf":
            col = np.asarray(
                bundle.weights[:, i].todense()  # type: ignore[index]
            ).ravel()
            out[cid] = EnrichedVector(values=_normalize(col), fingerprint=fingerprint)
        elif technique == "lsa":
            out[cid] = EnrichedVector(
                values=_normalize(bundle.chunk_lsa[cid].coords),
                fingerprint=fingerprint,
            )
        elif technique == "lda":
            out[cid] = EnrichedVector(
                values=_normalize(bundle.chunk_thetas[cid].theta),
                fingerprint=fingerprint,
            )
        elif technique == "contextual":
            out[cid] = EnrichedVector(
                values=context[cid].values, fingerprint=fingerprint
            )
        else:
            topic = topic_vector(
                bundle.chunk_lsa[cid],
                bundle.chunk_thetas[cid],
                fusion_config,
                entity_key=cid,
            )
            if technique == "enriched-weighted":
                out[cid] = EnrichedVector(
                    values=fuse_weighted(
                        context[cid], topic, alignment, fusion_config
                    ).values,
                    fingerprint=fingerprint,
                )
            else:
                out[cid] = EnrichedVector(
                    values=fuse_concat(context[cid], topic, fusion_config).values,
                    fingerprint=fingerprint,
                )
    return out, fingerprint


def _technique_fusion(
    fusion_config: FusionConfig, technique: str, bundle: TrainedArtifacts
) -> FusionConfig:
    """Techniques that imply a composition override the configured one."""
    if technique == "random-topic":
        dim = fusion_config.random_dim
        if dim is None:
            dim = bundle.lsa.rank + bundle.lda.n_topics
        return FusionConfig(
            strategy="concat",
            alpha=fusion_config.alpha,
            topic_composition="random",
            topic_weight=fusion_config.topic_weight,
            lsa_weight=fusion_config.lsa_weight,
            lda_weight=fusion_config.lda_weight,
            alignment_seed=fusion_config.alignment_seed,
            random_dim=dim,
        )
    if technique == "enriched-weighted" and fusion_config.strategy != "weighted":
        return FusionConfig(**{**fusion_config.canonical(), "strategy": "weighted"})
    if technique == "enriched-concat" and fusion_config.strategy != "concat":
        return FusionConfig(**{**fusion_config.canonical(), "strategy": "concat"})
    return fusion_config


def query_tokens(bundle: TrainedArtifacts, query_text: str) -> list[str]:
    return tokenize(query_text, bundle.corpus_config)


def enrich_query(
    bundle: TrainedArtifacts,
    provider,
    technique: str,
    fusion_config: FusionConfig,
    query_text: str,
    seed: int | None = None,
) -> EnrichedVector:
    """Transform a query through the identical pipeline used at indexing."""
    if technique not in TECHNIQUES:
        raise ConfigError(f"unknown technique {technique!r}")
    fusion_config = _technique_fusion(fusion_config, technique, bundle)
    fingerprint = compute_fingerprint(
        fusion_config,
        provider.provider_id if technique != "tfidf" else "none",
        {**bundle.hashes, "technique": technique},
    )
    tokens = query_tokens(bundle, query_text)
    if not tokens:
        raise DegenerateInput("query has no tokens after normalization")

    if technique == "tfidf":
        vec = vectorize_tokens(bundle.tfidf, tokens)
        return EnrichedVector(values=_normalize(vec), fingerprint=fingerprint)

    if technique in ("lsa", "enriched-concat", "enriched-weighted"):
        tf_vec = vectorize_tokens(bundle.tfidf, tokens)
        lsa_vec = LsaVector(coords=bundle.lsa.u.T @ tf_vec)
    if technique == "lsa":
        return EnrichedVector(
            values=_normalize(lsa_vec.coords), fingerprint=fingerprint
        )

    if technique in ("lda", "enriched-concat", "enriched-weighted"):
        term_to_id = {t: i for i, t in enumerate(bundle.vocabulary.terms)}
        ids = np.array(
            [term_to_id[t] for t in tokens if t in term_to_id], dtype=np.int32
        )
        fold_seed = seed if seed is not None else _stable_seed(
            bundle.model_config.lda.seed, "query", *tokens
        )
        mixture = infer_mixture(
            bundle.lda,
            ids,
            fold_in_iterations=bundle.model_config.fold_in_iterations,
            seed=fold_seed,
        )
    if technique == "lda":
        return EnrichedVector(
            values=_normalize(mixture.theta), fingerprint=fingerprint
        )

    context = embed_query(provider, query_text, bundle.corpus_config)
    if technique == "contextual":
        return EnrichedVector(values=context.values, fingerprint=fingerprint)

    if technique == "random-topic":
        topic = topic_vector(None, None, fusion_config,
                             entity_key="query:" + " ".join(tokens))
        return EnrichedVector(
            values=fuse_concat(context, topic, fusion_config).values,
            fingerprint=fingerprint,
        )

    topic = topic_vector(lsa_vec, mixture, fusion_config)
    if technique == "enriched-weighted":
        alignment = bundle.alignment_for(fusion_config, context_dim=provider.dim)
        return EnrichedVector(
            values=fuse_weighted(context, topic, alignment, fusion_config).values,
            fingerprint=fingerprint,
        )
    return EnrichedVector(
        values=fuse_concat(context, topic, fusion_config).values,
        fingerprint=fingerprint,
    )
