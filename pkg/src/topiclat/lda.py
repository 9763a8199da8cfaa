"""Collapsed-Gibbs latent Dirichlet allocation over chunk token streams.

The per-token full conditional is

    p(z_i = k | .) ∝ (n_kw + beta) / (n_k + V*beta) * (n_dk + alpha)

and the returned theta/phi are posterior means averaged over post-burn-in
sweeps at the configured lag. The hot loop lives in a compiled extension
(topiclat._gibbs) with a pure-Python mirror selected at import when the
extension is unavailable or TOPICLAT_PURE_PYTHON is set; both produce
bit-identical output for identical inputs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import artifacts
from .errors import ConfigError, EmptyStream, InvalidTokenId, UnknownTerm

if os.environ.get("TOPICLAT_PURE_PYTHON"):
    from . import _gibbs_py as _kernel
else:
    try:
        from . import _gibbs as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _gibbs_py as _kernel

KERNEL_COMPILED: bool = _kernel.COMPILED


@dataclass(frozen=True)
class LdaConfig:
    n_topics: int = 12
    alpha: float | None = None  # None -> 50 / n_topics
    beta: float = 0.01
    iterations: int = 1000
    burn_in: int = 200
    sample_lag: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.n_topics < 1:
            raise ConfigError(f"n_topics must be >= 1, got {self.n_topics}")
        if self.alpha is not None and self.alpha <= 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if self.beta <= 0:
            raise ConfigError(f"beta must be > 0, got {self.beta}")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigError(
                f"burn_in must satisfy 0 <= burn_in < iterations, "
                f"got burn_in={self.burn_in}, iterations={self.iterations}"
            )
        if self.sample_lag < 1:
            raise ConfigError(f"sample_lag must be >= 1, got {self.sample_lag}")

    @property
    def effective_alpha(self) -> float:
        return 50.0 / self.n_topics if self.alpha is None else self.alpha


@dataclass(frozen=True)
class TopicMixture:
    theta: np.ndarray  # (K,), non-negative, sums to 1
    degenerate: bool = False


@dataclass(frozen=True)
class LdaModel:
    config: LdaConfig
    n_terms: int
    phi: np.ndarray  # (K, V) topic-term probabilities
    n_kw: np.ndarray  # (K, V) retained count table for fold-in
    n_k: np.ndarray  # (K,)

    @property
    def n_topics(self) -> int:
        return self.config.n_topics


def fit_lda(
    token_streams: list[np.ndarray],
    n_terms: int,
    config: LdaConfig,
    sweep_callback=None,
) -> tuple[LdaModel, list[TopicMixture]]:
    """Fit LDA on doc-grouped token-id streams.

    `sweep_callback(sweep, n_dk, n_kw, n_k)` receives count snapshots after
    every sweep; intended for invariant checks, leave None in production.
    """
    if len(token_streams) < config.n_topics:
        raise ConfigError(
            f"need at least n_topics={config.n_topics} streams, "
            f"got {len(token_streams)}"
        )
    offsets = np.zeros(len(token_streams) + 1, dtype=np.int64)
    parts = []
    for idx, stream in enumerate(token_streams):
        arr = np.asarray(stream, dtype=np.int32)
        if arr.size == 0:
            raise EmptyStream(f"stream {idx} has no tokens")
        if arr.min() < 0 or arr.max() >= n_terms:
            raise InvalidTokenId(
                f"stream {idx} has token ids outside [0, {n_terms})"
            )
        parts.append(arr)
        offsets[idx + 1] = offsets[idx] + arr.size
    tokens = np.concatenate(parts)

    theta, phi, n_dk, n_kw, n_k, _ = _kernel.gibbs_fit(
        tokens,
        offsets,
        config.n_topics,
        n_terms,
        config.effective_alpha,
        config.beta,
        config.iterations,
        config.burn_in,
        config.sample_lag,
        config.seed,
        sweep_callback,
    )
    model = LdaModel(
        config=config, n_terms=n_terms, phi=phi, n_kw=n_kw, n_k=n_k
    )
    mixtures = [TopicMixture(theta=theta[d].copy()) for d in range(theta.shape[0])]
    return model, mixtures


def infer_mixture(
    model: LdaModel,
    token_ids: np.ndarray,
    fold_in_iterations: int = 50,
    seed: int = 0,
) -> TopicMixture:
    """Fold a query's token ids into the fitted topic space.

    Topic-term counts stay frozen; only the query's topic assignments are
    resampled. A stream with no usable tokens yields the uniform mixture with
    the degenerate flag set instead of an error, so odd queries never crash
    retrieval.
    """
    ids = np.asarray(token_ids, dtype=np.int32)
    ids = ids[(ids >= 0) & (ids < model.n_terms)]
    k = model.n_topics
    if ids.size == 0:
        return TopicMixture(theta=np.full(k, 1.0 / k), degenerate=True)
    theta = _kernel.gibbs_fold_in(
        ids,
        model.n_kw,
        model.n_k,
        model.config.effective_alpha,
        model.config.beta,
        fold_in_iterations,
        seed,
    )
    return TopicMixture(theta=theta)


def word_probability(model: LdaModel, mixture: TopicMixture, term_id: int) -> float:
    """Marginal term probability sum_k phi[k, w] * theta[k]."""
    if not 0 <= term_id < model.n_terms:
        raise UnknownTerm(f"term_id {term_id} out of range [0, {model.n_terms})")
    return float(model.phi[:, term_id] @ mixture.theta)


def save_lda(model: LdaModel, path) -> str:
    cfg = model.config

    def write(fh):
        artifacts.write_u32(fh, cfg.n_topics)
        artifacts.write_u32(fh, model.n_terms)
        artifacts.write_f64(fh, cfg.effective_alpha)
        artifacts.write_f64(fh, cfg.beta)
        artifacts.write_u32(fh, cfg.iterations)
        artifacts.write_u32(fh, cfg.burn_in)
        artifacts.write_u32(fh, cfg.sample_lag)
        artifacts.write_u64(fh, cfg.seed)
        artifacts.write_array(fh, model.phi)
        artifacts.write_array(fh, model.n_kw, dtype="<i8")
        artifacts.write_array(fh, model.n_k, dtype="<i8")

    return artifacts.save(path, artifacts.KIND_LDA, write)


def load_lda(path) -> tuple[LdaModel, str]:
    def read(fh):
        n_topics = artifacts.read_u32(fh)
        n_terms = artifacts.read_u32(fh)
        alpha = artifacts.read_f64(fh)
        beta = artifacts.read_f64(fh)
        iterations = artifacts.read_u32(fh)
        burn_in = artifacts.read_u32(fh)
        sample_lag = artifacts.read_u32(fh)
        seed = artifacts.read_u64(fh)
        phi = artifacts.read_array(fh)
        n_kw = artifacts.read_array(fh, dtype="<i8")
        n_k = artifacts.read_array(fh, dtype="<i8")
        config = LdaConfig(
            n_topics=n_topics,
            alpha=alpha,
            beta=beta,
            iterations=iterations,
            burn_in=burn_in,
            sample_lag=sample_lag,
            seed=seed,
        )
        return LdaModel(
            config=config, n_terms=n_terms, phi=phi, n_kw=n_kw, n_k=n_k
        )

    return artifacts.load(path, artifacts.KIND_LDA, read)
