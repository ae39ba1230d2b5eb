"""Independent reference implementations the tests check the library against.

These deliberately avoid the library's code paths: distances are computed
per entry with plain dot products and sorting uses Python tuple keys.
"""

from __future__ import annotations

import math

import numpy as np


def oracle_distance(v: np.ndarray, p: np.ndarray, metric: str) -> float:
    v = v.astype(np.float64)
    p = p.astype(np.float64)
    if metric == "cosine":
        nv = math.sqrt(float(np.dot(v, v)))
        np_ = math.sqrt(float(np.dot(p, p)))
        return 1.0 - float(np.dot(v, p)) / (nv * np_)
    if metric == "euclidean":
        diff = v - p
        return math.sqrt(float(np.dot(diff, diff)))
    return -float(np.dot(v, p))


def oracle_query(ids, vectors, probe, k: int, metric: str,
                 metadatas=None, predicate=None) -> list[str]:
    """Linear scan: ascending distance, ties by ascending id."""
    rows = []
    for index, entry_id in enumerate(ids):
        if predicate is not None and not predicate(metadatas[index]):
            continue
        rows.append((oracle_distance(vectors[index], probe, metric), entry_id))
    rows.sort(key=lambda row: (row[0], row[1]))
    return [entry_id for _d, entry_id in rows[:k]]


def oracle_distant_pair(topic_docs: list[list[str]],
                        doc_vectors: dict[str, np.ndarray],
                        metric: str = "cosine") -> tuple[int, int, str, str, float]:
    """Max-distance cross-topic document pair with the documented tie rule:
    smallest (first, second) topic pair, then smallest (doc, doc) id pair."""
    best = None
    for i in range(len(topic_docs)):
        for j in range(i + 1, len(topic_docs)):
            for a in sorted(set(topic_docs[i])):
                for b in sorted(set(topic_docs[j])):
                    d = oracle_distance(doc_vectors[a], doc_vectors[b], metric)
                    key = (-d, i, j, a, b)
                    if best is None or key < best:
                        best = key
    assert best is not None
    neg_d, i, j, a, b = best
    return i, j, a, b, -neg_d


def oracle_unique_ranking(idea_texts: list[str], ref_vectors: list[np.ndarray],
                          embed, k: int, neighbors: int = 5) -> list[int]:
    """Mean cosine distance to the `neighbors` nearest references, descending;
    ties keep input order. Returns input indices."""
    scored = []
    for index, text in enumerate(idea_texts):
        probe = embed(text)
        dists = sorted(oracle_distance(rv, probe, "cosine") for rv in ref_vectors)
        nearest = dists[:neighbors]
        scored.append((-(sum(nearest) / len(nearest)), index))
    scored.sort()
    return [index for _score, index in scored[:k]]
