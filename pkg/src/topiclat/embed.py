"""Contextual embedding providers.

The engine never hosts an embedding model. Three providers cover the uses:

* hash  - deterministic seeded feature hashing of token streams; makes the
          whole test suite runnable offline. Each token occurrence adds +-1
          at h_j(token) mod D for three independent seeded hash functions,
          then the vector is L2-normalized.
* file  - precomputed vectors in the TLEMB v1 format (one record per chunk).
* http  - POST {"input": [str, ...]} -> {"embeddings": [[f32, ...], ...]}
          against any embeddings endpoint, order-preserving.

All providers return unit-norm float64 vectors.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Chunk, PipelineConfig, tokenize
from .errors import (
    ConfigError,
    DegenerateInput,
    DimensionMismatch,
    MissingEmbedding,
    TransportError,
)

DEFAULT_DIM = 384
TLEMB_HEADER_PREFIX = "TLEMB v1 dim="


@dataclass(frozen=True)
class ContextVector:
    values: np.ndarray  # (D,), unit L2 norm
    provider_id: str


@dataclass(frozen=True)
class EmbeddingProviderConfig:
    kind: str = "hash"  # hash | file | http
    dim: int = DEFAULT_DIM
    path: str | None = None  # file provider
    endpoint: str | None = None  # http provider
    seed: int = 0  # hash provider
    batch_size: int = 32  # http provider
    max_in_flight: int = 4  # http provider
    retries: int = 3  # http provider

    def __post_init__(self):
        if self.dim < 8:
            raise ConfigError(f"embedding dim must be >= 8, got {self.dim}")
        if self.kind not in ("hash", "file", "http"):
            raise ConfigError(f"unknown provider kind {self.kind!r}")
        if self.kind == "file" and not self.path:
            raise ConfigError("file provider requires 'path'")
        if self.kind == "http" and not self.endpoint:
            raise ConfigError("http provider requires 'endpoint'")


def _normalized(vec: np.ndarray, what: str) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm < 1e-12:
        raise DegenerateInput(f"{what} produced a zero vector")
    return vec / norm


class HashEmbeddingProvider:
    """Pure function of (tokens, seed, dim); bit-identical across runs."""

    n_hashes = 3

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self.provider_id = f"hash:d{dim}:s{seed}"
        self._token_cache: dict[str, list[tuple[int, float]]] = {}

    def _contributions(self, token: str) -> list[tuple[int, float]]:
        cached = self._token_cache.get(token)
        if cached is None:
            cached = []
            for j in range(self.n_hashes):
                digest = hashlib.blake2b(
                    f"{self.seed}:{j}:{token}".encode("utf-8"), digest_size=8
                ).digest()
                value = int.from_bytes(digest, "little")
                position = (value >> 1) % self.dim
                sign = 1.0 if value & 1 else -1.0
                cached.append((position, sign))
            self._token_cache[token] = cached
        return cached

    def embed_tokens(self, tokens: list[str] | tuple[str, ...]) -> np.ndarray:
        if not tokens:
            raise DegenerateInput("cannot embed an empty token stream")
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in tokens:
            for position, sign in self._contributions(token):
                vec[position] += sign
        return _normalized(vec, "hash embedding")


class FileEmbeddingProvider:
    """Reads chunk vectors from a TLEMB v1 file, keyed by chunk_id."""

    def __init__(self, path: str | Path, dim: int = DEFAULT_DIM):
        self.path = Path(path)
        self.dim = dim
        self.provider_id = f"file:d{dim}:{self.path.name}"
        self._vectors = self._parse()

    def _parse(self) -> dict[str, np.ndarray]:
        vectors: dict[str, np.ndarray] = {}
        with open(self.path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            if not header.startswith(TLEMB_HEADER_PREFIX):
                raise DimensionMismatch(
                    f"{self.path}: bad header {header!r}, expected "
                    f"'{TLEMB_HEADER_PREFIX}<D>'"
                )
            file_dim = int(header[len(TLEMB_HEADER_PREFIX):])
            if file_dim != self.dim:
                raise DimensionMismatch(
                    f"{self.path}: file dim {file_dim} != configured {self.dim}"
                )
            for line_no, line in enumerate(fh, start=2):
                line = line.rstrip("\n")
                if not line:
                    continue
                chunk_id, _, csv = line.partition("\t")
                if not csv:
                    raise DimensionMismatch(
                        f"{self.path}:{line_no}: malformed record"
                    )
                vec = np.array(
                    [float(x) for x in csv.split(",")], dtype=np.float64
                )
                if vec.shape[0] != self.dim:
                    raise DimensionMismatch(
                        f"{self.path}:{line_no}: record has {vec.shape[0]} "
                        f"values, expected {self.dim}"
                    )
                norm = float(np.linalg.norm(vec))
                if abs(norm - 1.0) > 1e-5:
                    raise DimensionMismatch(
                        f"{self.path}:{line_no}: vector norm {norm} "
                        f"not within 1e-5 of 1"
                    )
                vectors[chunk_id] = vec / norm
        return vectors

    def lookup(self, chunk_id: str) -> np.ndarray:
        try:
            return self._vectors[chunk_id]
        except KeyError:
            raise MissingEmbedding(chunk_id) from None

    def __len__(self) -> int:
        return len(self._vectors)


class HttpEmbeddingProvider:
    """Calls an embeddings endpoint in bounded-concurrency batches."""

    def __init__(self, endpoint: str, dim: int = DEFAULT_DIM,
                 batch_size: int = 32, max_in_flight: int = 4, retries: int = 3):
        self.endpoint = endpoint
        self.dim = dim
        self.batch_size = batch_size
        self.max_in_flight = max_in_flight
        self.retries = retries
        self.provider_id = f"http:d{dim}:{endpoint}"

    def _post(self, texts: list[str]) -> list[np.ndarray]:
        import requests

        last_error: Exception | None = None
        for _ in range(self.retries):
            try:
                response = requests.post(
                    self.endpoint, json={"input": texts}, timeout=60
                )
                response.raise_for_status()
                payload = response.json()
                break
            except Exception as exc:  # noqa: BLE001 - retried, then wrapped
                last_error = exc
        else:
            raise TransportError(
                f"embeddings endpoint failed after {self.retries} tries: "
                f"{last_error}"
            )
        embeddings = payload.get("embeddings")
        if not isinstance(embeddings, list) or len(embeddings) != len(texts):
            raise TransportError(
                "endpoint response missing order-preserving 'embeddings' list"
            )
        out = []
        for row in embeddings:
            vec = np.asarray(row, dtype=np.float64)
            if vec.shape != (self.dim,):
                raise DimensionMismatch(
                    f"endpoint returned dim {vec.shape}, expected ({self.dim},)"
                )
            out.append(_normalized(vec, "http embedding"))
        return out

    def embed_texts(self, texts: list[str]) -> list[np.ndarray]:
        batches = [
            texts[i : i + self.batch_size]
            for i in range(0, len(texts), self.batch_size)
        ]
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            results = list(pool.map(self._post, batches))
        return [vec for batch in results for vec in batch]


def make_provider(config: EmbeddingProviderConfig):
    if config.kind == "hash":
        return HashEmbeddingProvider(dim=config.dim, seed=config.seed)
    if config.kind == "file":
        return FileEmbeddingProvider(path=config.path, dim=config.dim)
    return HttpEmbeddingProvider(
        endpoint=config.endpoint,
        dim=config.dim,
        batch_size=config.batch_size,
        max_in_flight=config.max_in_flight,
        retries=config.retries,
    )


def embed_chunks(provider, chunks: list[Chunk]) -> dict[str, ContextVector]:
    """One unit vector per chunk, keyed by chunk_id. Never substitutes."""
    out: dict[str, ContextVector] = {}
    if isinstance(provider, HashEmbeddingProvider):
        for chunk in chunks:
            out[chunk.chunk_id] = ContextVector(
                values=provider.embed_tokens(chunk.tokens),
                provider_id=provider.provider_id,
            )
    elif isinstance(provider, FileEmbeddingProvider):
        for chunk in chunks:
            out[chunk.chunk_id] = ContextVector(
                values=provider.lookup(chunk.chunk_id),
                provider_id=provider.provider_id,
            )
    elif isinstance(provider, HttpEmbeddingProvider):
        texts = [" ".join(chunk.tokens) for chunk in chunks]
        vectors = provider.embed_texts(texts)
        for chunk, vec in zip(chunks, vectors):
            out[chunk.chunk_id] = ContextVector(
                values=vec, provider_id=provider.provider_id
            )
    else:
        raise ConfigError(f"unsupported provider {type(provider).__name__}")
    return out


def embed_query(provider, query_text: str, corpus_config: PipelineConfig) -> ContextVector:
    """Embed free text through the same path chunks took.

    The hash provider re-tokenizes with the corpus config; http sends the
    normalized text; the file provider cannot embed unseen text.
    """
    if isinstance(provider, HashEmbeddingProvider):
        tokens = tokenize(query_text, corpus_config)
        return ContextVector(
            values=provider.embed_tokens(tokens),
            provider_id=provider.provider_id,
        )
    if isinstance(provider, HttpEmbeddingProvider):
        tokens = tokenize(query_text, corpus_config)
        if not tokens:
            raise DegenerateInput("cannot embed an empty query")
        [vec] = provider.embed_texts([" ".join(tokens)])
        return ContextVector(values=vec, provider_id=provider.provider_id)
    if isinstance(provider, FileEmbeddingProvider):
        raise ConfigError(
            "the file provider holds precomputed chunk vectors only; "
            "use the hash or http provider for query embedding"
        )
    raise ConfigError(f"unsupported provider {type(provider).__name__}")
