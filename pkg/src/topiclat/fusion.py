"""Fusing contextual vectors with topic signals.

Two strategies: concatenation (topic block appended, pre-scaled by a global
topic weight) and weighted averaging (alpha * context + (1 - alpha) * topic,
the topic vector first lifted into the contextual dimension through a fixed
seeded orthonormal up-projection). Every fused vector is L2-normalized, so
cosine search reduces to dot products downstream.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import artifacts
from .embed import ContextVector
from .errors import (
    ConfigError,
    DegenerateResult,
    MissingComponent,
    ShapeMismatch,
)
from .lda import TopicMixture
from .lsa import LsaVector

COMPOSITIONS = ("lsa", "lda", "lsa+lda", "random")


@dataclass(frozen=True)
class FusionConfig:
    strategy: str = "concat"  # concat | weighted
    alpha: float = 0.45  # weighted: share of the contextual vector
    topic_composition: str = "lsa+lda"
    topic_weight: float = 1.0  # concat: scale of the whole topic block
    lsa_weight: float = 1.0  # per-component scaling inside the topic block
    lda_weight: float = 1.0
    alignment_seed: int = 0
    random_dim: int | None = None  # random composition block size; None -> r+K

    def __post_init__(self):
        if self.strategy not in ("concat", "weighted"):
            raise ConfigError(f"unknown fusion strategy {self.strategy!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.topic_composition not in COMPOSITIONS:
            raise ConfigError(
                f"topic_composition must be one of {COMPOSITIONS}, "
                f"got {self.topic_composition!r}"
            )

    def canonical(self) -> dict:
        return {
            "strategy": self.strategy,
            "alpha": self.alpha,
            "topic_composition": self.topic_composition,
            "topic_weight": self.topic_weight,
            "lsa_weight": self.lsa_weight,
            "lda_weight": self.lda_weight,
            "alignment_seed": self.alignment_seed,
            "random_dim": self.random_dim,
        }


@dataclass(frozen=True)
class EnrichedVector:
    values: np.ndarray  # unit L2 norm
    fingerprint: str


@dataclass(frozen=True)
class AlignmentMap:
    """Fixed orthonormal-row matrix lifting topic vectors into D dims."""

    projection: np.ndarray  # (topic_dim, D), P @ P.T = I
    seed: int

    @property
    def topic_dim(self) -> int:
        return self.projection.shape[0]

    @property
    def context_dim(self) -> int:
        return self.projection.shape[1]

    def lift(self, topic: np.ndarray) -> np.ndarray:
        if topic.shape[0] != self.topic_dim:
            raise ShapeMismatch(
                f"topic vector has {topic.shape[0]} dims, alignment expects "
                f"{self.topic_dim}"
            )
        return self.projection.T @ topic


def make_alignment(topic_dim: int, context_dim: int, seed: int) -> AlignmentMap:
    """Seeded orthonormal rows via QR of a Gaussian draw, sign-canonical."""
    if topic_dim > context_dim:
        raise ConfigError(
            f"topic dimension {topic_dim} exceeds contextual dimension "
            f"{context_dim}; weighted fusion needs topic_dim <= D"
        )
    rng = np.random.default_rng(seed)
    gaussian = rng.standard_normal((context_dim, topic_dim))
    q, r = np.linalg.qr(gaussian)
    q = q * np.sign(np.diag(r))
    return AlignmentMap(projection=np.ascontiguousarray(q.T), seed=seed)


def _unit(vec: np.ndarray, label: str) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm < 1e-12:
        raise MissingComponent(f"{label} component is numerically zero")
    return vec / norm


def random_topic_vector(dim: int, seed: int, entity_key: str) -> np.ndarray:
    """Seeded unit vector unique to one chunk/query; the ablation control."""
    digest = hashlib.blake2b(
        f"{seed}:{entity_key}".encode("utf-8"), digest_size=8
    ).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    vec = rng.standard_normal(dim)
    return _unit(vec, "random topic")


def topic_vector(
    lsa: LsaVector | None,
    lda: TopicMixture | None,
    config: FusionConfig,
    entity_key: str = "",
) -> np.ndarray:
    """Assemble the topic block: normalize each component, scale, concatenate
    (lsa first, then lda), then renormalize the block."""
    composition = config.topic_composition
    if composition == "random":
        if config.random_dim is None:
            raise ConfigError(
                "random composition requires random_dim (set it to the "
                "lsa rank + lda topic count being controlled for)"
            )
        return random_topic_vector(
            config.random_dim, config.alignment_seed, entity_key
        )
    blocks = []
    if "lsa" in composition:
        if lsa is None:
            raise MissingComponent("composition includes lsa but none given")
        blocks.append(_unit(lsa.coords, "lsa") * config.lsa_weight)
    if "lda" in composition:
        if lda is None:
            raise MissingComponent("composition includes lda but none given")
        blocks.append(_unit(lda.theta, "lda") * config.lda_weight)
    return _unit(np.concatenate(blocks), "topic")


def fuse_concat(context: ContextVector, topic: np.ndarray,
                config: FusionConfig, fingerprint: str = "") -> EnrichedVector:
    """[context, topic_weight * topic], then whole-vector L2 normalization."""
    stacked = np.concatenate([context.values, config.topic_weight * topic])
    norm = float(np.linalg.norm(stacked))
    if norm < 1e-9:
        raise DegenerateResult("fused vector has vanishing norm")
    return EnrichedVector(values=stacked / norm, fingerprint=fingerprint)


def fuse_weighted(context: ContextVector, topic: np.ndarray,
                  alignment: AlignmentMap, config: FusionConfig,
                  fingerprint: str = "") -> EnrichedVector:
    """alpha * context + (1 - alpha) * lifted topic, L2-normalized."""
    lifted = alignment.lift(topic)
    lifted = lifted / float(np.linalg.norm(lifted))
    combined = config.alpha * context.values + (1.0 - config.alpha) * lifted
    norm = float(np.linalg.norm(combined))
    if norm < 1e-9:
        raise DegenerateResult(
            "weighted fusion collapsed to a vanishing vector "
            "(anti-parallel inputs)"
        )
    return EnrichedVector(values=combined / norm, fingerprint=fingerprint)


def save_alignment(alignment: AlignmentMap, path) -> str:
    def write(fh):
        artifacts.write_u64(fh, alignment.seed)
        artifacts.write_array(fh, alignment.projection)

    return artifacts.save(path, artifacts.KIND_ALIGNMENT, write)


def load_alignment(path) -> tuple[AlignmentMap, str]:
    def read(fh):
        seed = artifacts.read_u64(fh)
        projection = artifacts.read_array(fh)
        return AlignmentMap(projection=projection, seed=seed)

    return artifacts.load(path, artifacts.KIND_ALIGNMENT, read)


def compute_fingerprint(
    fusion_config: FusionConfig,
    provider_id: str,
    artifact_hashes: dict[str, str],
) -> str:
    """Bind an index to the configs and artifacts that produced it."""
    payload = {
        "fusion": fusion_config.canonical(),
        "provider": provider_id,
        "artifacts": dict(sorted(artifact_hashes.items())),
    }
    data = json.dumps(payload, sort_keys=True).encode("utf-8")
    return hashlib.sha256(data).hexdigest()
