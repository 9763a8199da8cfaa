"""Top-k retrieval metrics and interpolated precision-recall curves."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError, MissingJudgments

RECALL_GRID = np.round(np.arange(0.0, 1.0001, 0.05), 2)


@dataclass(frozen=True)
class RelevanceJudgments:
    """query_id -> set of relevant chunk ids, with query text for replay."""

    queries: dict[str, str]  # query_id -> query text
    relevant: dict[str, frozenset[str]]
    provenance: str = "synthetic-topic"  # or "explicit-file"

    def __post_init__(self):
        for query_id, ids in self.relevant.items():
            if not ids:
                raise DataError(f"query {query_id!r} has an empty relevance set")


def load_judgments(path: str | Path) -> RelevanceJudgments:
    """JSONL: {"query_id", "query_text", "relevant": [chunk_id, ...]}."""
    queries: dict[str, str] = {}
    relevant: dict[str, frozenset[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            qid = record["query_id"]
            if qid in queries:
                raise DataError(f"line {line_no}: duplicate query_id {qid!r}")
            queries[qid] = record["query_text"]
            relevant[qid] = frozenset(record["relevant"])
    return RelevanceJudgments(
        queries=queries, relevant=relevant, provenance="explicit-file"
    )


def save_judgments(judgments: RelevanceJudgments, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for qid in sorted(judgments.queries):
            fh.write(
                json.dumps(
                    {
                        "query_id": qid,
                        "query_text": judgments.queries[qid],
                        "relevant": sorted(judgments.relevant[qid]),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def precision_recall_f1(
    ranked_ids: list[str], relevant: frozenset[str], k: int
) -> tuple[float, float, float]:
    """P@k, R@k, and their harmonic mean for one ranking."""
    top = ranked_ids[:k]
    hits = sum(1 for cid in top if cid in relevant)
    precision = hits / k
    recall = hits / len(relevant)
    f1 = (
        0.0
        if precision + recall == 0.0
        else 2.0 * precision * recall / (precision + recall)
    )
    return precision, recall, f1


def retrieval_metrics(
    rankings: dict[str, list[str]],
    judgments: RelevanceJudgments,
    k_levels: tuple[int, ...] = (10, 20, 50),
) -> dict[int, tuple[float, float, float]]:
    """Macro-averaged (P, R, F1) at each cut-off over all queries."""
    if not rankings:
        raise DataError("no rankings to evaluate")
    per_k: dict[int, list[tuple[float, float, float]]] = {k: [] for k in k_levels}
    for query_id, ranked in rankings.items():
        if query_id not in judgments.relevant:
            raise MissingJudgments(query_id)
        rel = judgments.relevant[query_id]
        for k in k_levels:
            per_k[k].append(precision_recall_f1(ranked, rel, k))
    return {
        k: (
            float(np.mean([t[0] for t in triples])),
            float(np.mean([t[1] for t in triples])),
            float(np.mean([t[2] for t in triples])),
        )
        for k, triples in per_k.items()
    }


def interpolated_precision_at_grid(
    ranked_ids: list[str], relevant: frozenset[str]
) -> np.ndarray:
    """Precision envelope p(r) = max_{r' >= r} p(r') sampled on the grid.

    The ranking must cover the whole collection so recall reaches 1; grid
    points beyond the last relevant hit use the envelope value 0-extension.
    """
    hits = 0
    points = []  # (recall, precision) at each relevant hit
    for rank, cid in enumerate(ranked_ids, start=1):
        if cid in relevant:
            hits += 1
            points.append((hits / len(relevant), hits / rank))
    out = np.zeros(RECALL_GRID.shape[0])
    if not points:
        return out
    recalls = np.array([p[0] for p in points])
    precisions = np.array([p[1] for p in points])
    # envelope from the right
    envelope = np.maximum.accumulate(precisions[::-1])[::-1]
    for gi, grid_recall in enumerate(RECALL_GRID):
        idx = np.searchsorted(recalls, grid_recall - 1e-12, side="left")
        out[gi] = envelope[idx] if idx < recalls.shape[0] else 0.0
    return out


def pr_curve(
    per_seed_rankings: list[dict[str, list[str]]],
    per_seed_judgments: list[RelevanceJudgments],
    k_levels: tuple[int, ...] = (10, 20, 50),
) -> list[tuple[float, float, float]]:
    """Rows (grid_recall, mean precision, sd) averaged over queries then seeds."""
    seed_curves = []
    for rankings, judgments in zip(per_seed_rankings, per_seed_judgments):
        query_curves = []
        for query_id, ranked in rankings.items():
            if query_id not in judgments.relevant:
                raise MissingJudgments(query_id)
            query_curves.append(
                interpolated_precision_at_grid(
                    ranked, judgments.relevant[query_id]
                )
            )
        seed_curves.append(np.mean(query_curves, axis=0))
    stacked = np.stack(seed_curves)
    means = stacked.mean(axis=0)
    sds = (
        stacked.std(axis=0, ddof=1)
        if stacked.shape[0] > 1
        else np.zeros(means.shape[0])
    )
    return [
        (float(RECALL_GRID[i]), float(means[i]), float(sds[i]))
        for i in range(RECALL_GRID.shape[0])
    ]
