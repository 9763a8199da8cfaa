"""Evaluation harness: synthetic corpora, clustering metrics, retrieval
metrics, the seeded 80/20 protocol, and the ablation grid."""

from .clustering import (
    KMeansResult,
    best_result,
    calinski_harabasz,
    davies_bouldin,
    kmeans,
    kmeans_single,
    silhouette,
)
from .protocol import (
    ABLATION_VARIANTS,
    DEFAULT_TECHNIQUE_VARIANTS,
    EvalReport,
    MetricSummary,
    ProtocolConfig,
    Variant,
    VariantReport,
    run_ablation,
    run_protocol,
    run_variants,
    split_documents,
)
from .report import (
    clustering_csv,
    clustering_text,
    pr_csv,
    report_json,
    retrieval_csv,
    retrieval_text,
    write_report_files,
)
from .retrieval import (
    RelevanceJudgments,
    interpolated_precision_at_grid,
    load_judgments,
    pr_curve,
    precision_recall_f1,
    retrieval_metrics,
    save_judgments,
)
from .synth import (
    SyntheticCorpus,
    SyntheticCorpusSpec,
    generate_synthetic,
    read_labels_csv,
    write_corpus_jsonl,
    write_labels_csv,
)

__all__ = [
    "ABLATION_VARIANTS",
    "DEFAULT_TECHNIQUE_VARIANTS",
    "EvalReport",
    "KMeansResult",
    "MetricSummary",
    "ProtocolConfig",
    "RelevanceJudgments",
    "SyntheticCorpus",
    "SyntheticCorpusSpec",
    "Variant",
    "VariantReport",
    "best_result",
    "calinski_harabasz",
    "clustering_csv",
    "clustering_text",
    "davies_bouldin",
    "generate_synthetic",
    "interpolated_precision_at_grid",
    "kmeans",
    "kmeans_single",
    "load_judgments",
    "pr_csv",
    "pr_curve",
    "precision_recall_f1",
    "read_labels_csv",
    "report_json",
    "retrieval_csv",
    "retrieval_metrics",
    "retrieval_text",
    "run_ablation",
    "run_protocol",
    "run_variants",
    "save_judgments",
    "silhouette",
    "split_documents",
    "write_corpus_jsonl",
    "write_labels_csv",
    "write_report_files",
]
