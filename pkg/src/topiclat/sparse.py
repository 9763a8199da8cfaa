"""Vocabulary, sparse term-document counts, and TF-IDF weighting.

"Document" here means chunk: chunks are the retrieval unit, so document
frequency and TF normalization are both computed per chunk. The weight of
term t in chunk d is

    tfidf(t, d) = count(t, d) / total_tokens(d) * log(N / (1 + df(t)))

with natural log and N the number of chunks. The formula admits negative
weights when df = N; `idf_floor_zero` clamps those to zero for practitioners
who want it.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .corpus import Chunk
from .errors import EmptyVocabulary, ShapeMismatch, UnknownTerm


@dataclass(frozen=True)
class Vocabulary:
    """Bijection term <-> dense id, ids assigned in lexicographic term order."""

    terms: tuple[str, ...]  # index = term_id
    df: np.ndarray  # per-term chunk frequency, aligned with terms

    def __post_init__(self):
        object.__setattr__(
            self, "_term_to_id", {t: i for i, t in enumerate(self.terms)}
        )

    def __len__(self) -> int:
        return len(self.terms)

    def term_id(self, term: str) -> int:
        try:
            return self._term_to_id[term]
        except KeyError:
            raise UnknownTerm(f"term {term!r} not in vocabulary") from None

    def __contains__(self, term: str) -> bool:
        return term in self._term_to_id


@dataclass(frozen=True)
class TermDocMatrix:
    """Sparse counts, shape (V terms x N chunks); columns follow chunk order."""

    counts: sp.csc_matrix  # int64
    chunk_ids: tuple[str, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    def column_sums(self) -> np.ndarray:
        return np.asarray(self.counts.sum(axis=0)).ravel()


@dataclass(frozen=True)
class TfIdfModel:
    vocabulary: Vocabulary
    n_docs: int
    idf: np.ndarray  # float64, aligned with vocabulary
    idf_floor_zero: bool = False


def build_matrix(
    chunks: list[Chunk],
    min_df: int = 2,
    max_df_ratio: float = 0.5,
) -> tuple[Vocabulary, TermDocMatrix]:
    """Count terms per chunk and assemble the pruned sparse matrix.

    Terms with df < min_df or df/N > max_df_ratio are dropped. Raises
    EmptyVocabulary when nothing survives.
    """
    if not chunks:
        raise EmptyVocabulary("cannot build a matrix from zero chunks")
    n = len(chunks)
    per_chunk = [Counter(c.tokens) for c in chunks]
    df_all: Counter[str] = Counter()
    for counts in per_chunk:
        df_all.update(counts.keys())
    kept = sorted(
        t
        for t, df in df_all.items()
        if df >= min_df and df / n <= max_df_ratio
    )
    if not kept:
        raise EmptyVocabulary(
            f"pruning (min_df={min_df}, max_df_ratio={max_df_ratio}) removed "
            f"all {len(df_all)} terms"
        )
    vocab = Vocabulary(
        terms=tuple(kept),
        df=np.array([df_all[t] for t in kept], dtype=np.int64),
    )
    term_to_id = {t: i for i, t in enumerate(kept)}

    data: list[int] = []
    indices: list[int] = []
    indptr = [0]
    for counts in per_chunk:
        rows = sorted(
            (term_to_id[t], c) for t, c in counts.items() if t in term_to_id
        )
        indices.extend(r for r, _ in rows)
        data.extend(c for _, c in rows)
        indptr.append(len(indices))
    counts_csc = sp.csc_matrix(
        (
            np.asarray(data, dtype=np.int64),
            np.asarray(indices, dtype=np.int32),
            np.asarray(indptr, dtype=np.int64),
        ),
        shape=(len(kept), n),
    )
    matrix = TermDocMatrix(
        counts=counts_csc, chunk_ids=tuple(c.chunk_id for c in chunks)
    )
    return vocab, matrix


def fit_tfidf(
    vocab: Vocabulary, matrix: TermDocMatrix, idf_floor_zero: bool = False
) -> TfIdfModel:
    """Compute per-term IDF from the vocabulary's chunk frequencies."""
    n = matrix.shape[1]
    idf = np.log(n / (1.0 + vocab.df.astype(np.float64)))
    if idf_floor_zero:
        idf = np.maximum(idf, 0.0)
    return TfIdfModel(
        vocabulary=vocab, n_docs=n, idf=idf, idf_floor_zero=idf_floor_zero
    )


def tfidf_weight(
    model: TfIdfModel, matrix: TermDocMatrix, term_id: int, chunk_column: int
) -> float:
    """Weight of one (term, chunk) cell; 0 when the term does not occur."""
    v, n = matrix.shape
    if not 0 <= term_id < v:
        raise UnknownTerm(f"term_id {term_id} out of range [0, {v})")
    if not 0 <= chunk_column < n:
        raise ShapeMismatch(f"chunk column {chunk_column} out of range [0, {n})")
    count = matrix.counts[term_id, chunk_column]
    if count == 0:
        return 0.0
    total = int(matrix.counts[:, chunk_column].sum())
    return (count / total) * float(model.idf[term_id])


def tfidf_matrix(model: TfIdfModel, matrix: TermDocMatrix) -> sp.csc_matrix:
    """Apply TF-IDF weighting elementwise; sparsity pattern is preserved.

    Chunks whose column is all zero (every token pruned) keep a zero column.
    """
    v, n = matrix.shape
    if len(model.vocabulary) != v:
        raise ShapeMismatch(
            f"model vocabulary size {len(model.vocabulary)} != matrix rows {v}"
        )
    if model.n_docs != n:
        raise ShapeMismatch(f"model n_docs {model.n_docs} != matrix columns {n}")
    totals = matrix.column_sums().astype(np.float64)
    inv_totals = np.divide(
        1.0, totals, out=np.zeros_like(totals), where=totals > 0
    )
    weighted = matrix.counts.astype(np.float64)
    # column scale by 1/total, then row scale by idf
    weighted = weighted @ sp.diags(inv_totals)
    weighted = sp.diags(model.idf) @ weighted
    return sp.csc_matrix(weighted)


def vectorize_tokens(model: TfIdfModel, tokens: list[str]) -> np.ndarray:
    """TF-IDF vector for a free token stream (query path).

    Uses the training vocabulary and IDF. Out-of-vocabulary tokens are dropped
    before TF normalization, mirroring how chunk columns count only retained
    terms; a query identical to a chunk's tokens therefore reproduces that
    chunk's weighted column exactly.
    """
    vec = np.zeros(len(model.vocabulary), dtype=np.float64)
    if not tokens:
        return vec
    counts = Counter(tokens)
    known = {t: c for t, c in counts.items() if t in model.vocabulary}
    total = sum(known.values())
    if total == 0:
        return vec
    for term, count in known.items():
        tid = model.vocabulary.term_id(term)
        vec[tid] = (count / total) * model.idf[tid]
    return vec
