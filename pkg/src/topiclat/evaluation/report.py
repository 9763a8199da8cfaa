"""Deterministic CSV / aligned-text / JSON renderings of an EvalReport.

Float formatting uses repr (shortest round-trip), so identical runs emit
byte-identical files. Wall-clock runtimes never enter the CSVs; they go to
the JSON sidecar only.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from .protocol import EvalReport, MetricSummary


def _fmt(value: float) -> str:
    return repr(float(value))


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def clustering_csv(report: EvalReport) -> str:
    lines = [
        "variant,silhouette_mean,silhouette_sd,calinski_harabasz_mean,"
        "calinski_harabasz_sd,davies_bouldin_mean,davies_bouldin_sd"
    ]
    for v in report.variants:
        lines.append(
            ",".join(
                [
                    f'"{v.name}"',
                    _fmt(v.silhouette.mean),
                    _fmt(v.silhouette.sd_value()),
                    _fmt(v.calinski_harabasz.mean),
                    _fmt(v.calinski_harabasz.sd_value()),
                    _fmt(v.davies_bouldin.mean),
                    _fmt(v.davies_bouldin.sd_value()),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def retrieval_csv(report: EvalReport) -> str:
    lines = [
        "variant,k,precision_mean,precision_sd,recall_mean,recall_sd,"
        "f1_mean,f1_sd"
    ]
    for v in report.variants:
        for k in report.k_levels:
            metrics = v.retrieval[k]
            lines.append(
                ",".join(
                    [
                        f'"{v.name}"',
                        str(k),
                        _fmt(metrics["precision"].mean),
                        _fmt(metrics["precision"].sd_value()),
                        _fmt(metrics["recall"].mean),
                        _fmt(metrics["recall"].sd_value()),
                        _fmt(metrics["f1"].mean),
                        _fmt(metrics["f1"].sd_value()),
                    ]
                )
            )
    return "\n".join(lines) + "\n"


def pr_csv(report: EvalReport, variant_name: str) -> str:
    variant = report.variant(variant_name)
    lines = ["grid_recall,mean_precision,sd"]
    for recall, mean, sd in variant.pr_rows:
        lines.append(f"{_fmt(recall)},{_fmt(mean)},{_fmt(sd)}")
    return "\n".join(lines) + "\n"


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(headers[i]), *(len(r[i]) for r in rows)) if rows else len(headers[i])
        for i in range(len(headers))
    ]
    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    sep = "  ".join("-" * w for w in widths)
    return "\n".join([line(headers), sep] + [line(r) for r in rows]) + "\n"


def _mean_sd(summary: MetricSummary, digits: int = 4) -> str:
    if summary.sd is None:
        return f"{summary.mean:.{digits}f}"
    return f"{summary.mean:.{digits}f} ±{summary.sd:.{digits}f}"


def clustering_text(report: EvalReport) -> str:
    rows = [
        [
            v.name,
            _mean_sd(v.silhouette),
            _mean_sd(v.calinski_harabasz, 1),
            _mean_sd(v.davies_bouldin),
        ]
        for v in report.variants
    ]
    return _table(
        ["Variant", "Silhouette", "Calinski-Harabasz", "Davies-Bouldin"], rows
    )


def retrieval_text(report: EvalReport, k: int = 10) -> str:
    rows = [
        [
            v.name,
            _mean_sd(v.retrieval[k]["precision"], 3),
            _mean_sd(v.retrieval[k]["recall"], 3),
            _mean_sd(v.retrieval[k]["f1"], 3),
        ]
        for v in report.variants
    ]
    return _table(
        ["Variant", f"Precision@{k}", f"Recall@{k}", f"F1@{k}"], rows
    )


def report_json(report: EvalReport) -> str:
    payload = {
        "seeds": list(report.seeds),
        "split": report.split,
        "k_levels": list(report.k_levels),
        "runtimes": report.runtimes,
        "variants": [
            {
                "name": v.name,
                "technique": v.technique,
                "clustering": {
                    "silhouette": {"mean": v.silhouette.mean, "sd": v.silhouette.sd},
                    "calinski_harabasz": {
                        "mean": v.calinski_harabasz.mean,
                        "sd": v.calinski_harabasz.sd,
                    },
                    "davies_bouldin": {
                        "mean": v.davies_bouldin.mean,
                        "sd": v.davies_bouldin.sd,
                    },
                },
                "retrieval": {
                    str(k): {
                        name: {"mean": s.mean, "sd": s.sd}
                        for name, s in v.retrieval[k].items()
                    }
                    for k in report.k_levels
                },
            }
            for v in report.variants
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_report_files(report: EvalReport, directory: str | Path) -> list[Path]:
    """Emit clustering.csv, retrieval.csv, per-variant PR CSVs, text tables,
    and the JSON sidecar; returns the written paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name: str, content: str):
        path = directory / name
        path.write_text(content, encoding="utf-8")
        written.append(path)

    put("clustering.csv", clustering_csv(report))
    put("retrieval.csv", retrieval_csv(report))
    for v in report.variants:
        put(f"pr_{_slug(v.name)}.csv", pr_csv(report, v.name))
    put(
        "report.txt",
        clustering_text(report) + "\n" + retrieval_text(report),
    )
    put("report.json", report_json(report))
    return written
