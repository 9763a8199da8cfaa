"""Persistent vector index with exact cosine kNN.

Search is a full scan: scores are blocked dot products against the float32
record matrix (vectors are unit-norm, so cosine equals dot). Ties break by
ascending chunk_id so rankings are total and reproducible. The on-disk
layout is manifest.json next to vectors.bin (shared "TLAT" header, then the
f32 record block, then the id table).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import artifacts
from .errors import (
    ArtifactError,
    ConfigError,
    DimensionMismatch,
    DuplicateChunkId,
    EmptyIndex,
    FingerprintMismatch,
)
from .fusion import EnrichedVector


@dataclass(frozen=True)
class QueryHit:
    chunk_id: str
    doc_id: str
    score: float


@dataclass(frozen=True)
class QueryResult:
    hits: list[QueryHit]
    k_requested: int

    @property
    def k_returned(self) -> int:
        return len(self.hits)

    def chunk_ids(self) -> list[str]:
        return [h.chunk_id for h in self.hits]


class VectorIndex:
    """Immutable after construction; concurrent queries need no locking."""

    def __init__(self, dimension: int, fingerprint: str,
                 chunk_ids: list[str], doc_ids: list[str],
                 vectors: np.ndarray, manifest: dict | None = None):
        if vectors.shape != (len(chunk_ids), dimension):
            raise DimensionMismatch(
                f"vector block {vectors.shape} inconsistent with "
                f"{len(chunk_ids)} ids x dim {dimension}"
            )
        self.dimension = dimension
        self.fingerprint = fingerprint
        self.chunk_ids = list(chunk_ids)
        self.doc_ids = list(doc_ids)
        self.vectors = np.ascontiguousarray(vectors, dtype=np.float32)
        self.manifest = dict(manifest or {})
        # rank of each record under ascending chunk_id, for tie-breaking
        self._id_rank = np.argsort(
            np.argsort(np.asarray(self.chunk_ids), kind="stable"), kind="stable"
        )

    def __len__(self) -> int:
        return len(self.chunk_ids)


def build_index(
    enriched: dict[str, EnrichedVector],
    doc_ids: dict[str, str],
    fingerprint: str,
    manifest: dict | None = None,
) -> VectorIndex:
    """Validate a batch of enriched vectors and freeze them into an index."""
    if not enriched:
        raise EmptyIndex("cannot build an index from zero vectors")
    chunk_ids = sorted(enriched.keys())
    if len(chunk_ids) != len(set(chunk_ids)):
        raise DuplicateChunkId("duplicate chunk ids in batch")
    dims = {v.values.shape[0] for v in enriched.values()}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed vector dimensions in batch: {sorted(dims)}")
    (dimension,) = dims
    block = np.zeros((len(chunk_ids), dimension), dtype=np.float64)
    for row, cid in enumerate(chunk_ids):
        vec = enriched[cid].values
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-6:
            raise DimensionMismatch(
                f"vector for {cid!r} has norm {norm}, expected unit"
            )
        if enriched[cid].fingerprint and enriched[cid].fingerprint != fingerprint:
            raise FingerprintMismatch(
                f"vector for {cid!r} was fused under a different configuration"
            )
        block[row] = vec
    return VectorIndex(
        dimension=dimension,
        fingerprint=fingerprint,
        chunk_ids=chunk_ids,
        doc_ids=[doc_ids[cid] for cid in chunk_ids],
        vectors=block.astype(np.float32),
        manifest=manifest,
    )


def knn(index: VectorIndex, query: EnrichedVector, k: int) -> QueryResult:
    """Exact top-k by cosine; deterministic tie-break by ascending chunk_id."""
    if len(index) == 0:
        raise EmptyIndex("index holds no vectors")
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if query.values.shape[0] != index.dimension:
        raise DimensionMismatch(
            f"query dim {query.values.shape[0]} != index dim {index.dimension}"
        )
    if query.fingerprint and index.fingerprint and \
            query.fingerprint != index.fingerprint:
        raise FingerprintMismatch(
            "query was enriched under a different configuration than the index"
        )
    scores = index.vectors.astype(np.float64) @ query.values.astype(np.float64)
    order = np.lexsort((index._id_rank, -scores))
    top = order[: min(k, len(index))]
    hits = [
        QueryHit(
            chunk_id=index.chunk_ids[i],
            doc_id=index.doc_ids[i],
            score=float(scores[i]),
        )
        for i in top
    ]
    return QueryResult(hits=hits, k_requested=k)


def save_index(index: VectorIndex, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "fingerprint": index.fingerprint,
        "dimension": index.dimension,
        "count": len(index),
        **index.manifest,
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    with open(directory / "vectors.bin", "wb") as fh:
        artifacts.write_header(fh, artifacts.KIND_VECTORS)
        artifacts.write_u32(fh, index.dimension)
        artifacts.write_u64(fh, len(index))
        # id-table offset backpatched after the record block is written
        offset_pos = fh.tell()
        artifacts.write_u64(fh, 0)
        fh.write(index.vectors.astype("<f4").tobytes(order="C"))
        table_offset = fh.tell()
        for chunk_id, doc_id in zip(index.chunk_ids, index.doc_ids):
            artifacts.write_string(fh, chunk_id)
            artifacts.write_string(fh, doc_id)
        fh.seek(offset_pos)
        fh.write(struct.pack("<Q", table_offset))


def load_index(directory: str | Path) -> VectorIndex:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    vectors_path = directory / "vectors.bin"
    if not manifest_path.exists() or not vectors_path.exists():
        raise ArtifactError(
            f"index directory {directory} is missing manifest.json/vectors.bin"
        )
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    with open(vectors_path, "rb") as fh:
        artifacts.read_header(fh, artifacts.KIND_VECTORS)
        dimension = artifacts.read_u32(fh)
        count = artifacts.read_u64(fh)
        table_offset = artifacts.read_u64(fh)
        raw = fh.read(count * dimension * 4)
        if len(raw) != count * dimension * 4:
            raise ArtifactError("truncated vector block")
        vectors = np.frombuffer(raw, dtype="<f4").reshape(count, dimension).copy()
        if fh.tell() != table_offset:
            raise ArtifactError("id table offset does not match record block")
        chunk_ids = []
        doc_ids = []
        for _ in range(count):
            chunk_ids.append(artifacts.read_string(fh))
            doc_ids.append(artifacts.read_string(fh))
    if manifest.get("dimension") != dimension or manifest.get("count") != count:
        raise ArtifactError("manifest.json disagrees with vectors.bin")
    extra = {
        k: v
        for k, v in manifest.items()
        if k not in ("fingerprint", "dimension", "count")
    }
    return VectorIndex(
        dimension=dimension,
        fingerprint=manifest.get("fingerprint", ""),
        chunk_ids=chunk_ids,
        doc_ids=doc_ids,
        vectors=vectors,
        manifest=extra,
    )
