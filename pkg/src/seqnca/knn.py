"""Exact brute-force nearest-neighbour search and majority-vote classification.

Neighbours are ordered by squared distance, ties going to the lower reference
index. A vote tie between classes goes to whichever tied class has the
nearest representative.
"""
from __future__ import annotations

import numpy as np

from .nca import EmbeddingSet

_CHUNK = 256


class NeighbourIndex:
    def __init__(self, embeddings, labels):
        self.ref = EmbeddingSet(embeddings, labels)
        if len(self.ref) == 0:
            raise ValueError("cannot build a neighbour index from zero points")

    def __len__(self) -> int:
        return len(self.ref)

    def _queries(self, queries) -> np.ndarray:
        Q = np.asarray(queries, dtype=np.float64)
        if Q.ndim == 1:
            Q = Q[None]
        if Q.ndim != 2 or Q.shape[1] != self.ref.dim:
            raise ValueError(f"query dimension {Q.shape[-1]} does not match index dimension {self.ref.dim}")
        return Q

    def sq_dists(self, queries) -> np.ndarray:
        """Exact squared distances, shape (Q, N); no expansion, so no cancellation."""
        Q = self._queries(queries)
        R = self.ref.embeddings
        out = np.empty((Q.shape[0], R.shape[0]))
        for start in range(0, Q.shape[0], _CHUNK):
            diff = Q[start:start + _CHUNK, None, :] - R[None, :, :]
            out[start:start + _CHUNK] = np.einsum("qnm,qnm->qn", diff, diff)
        return out

    def query(self, queries, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Indices and squared distances of the k nearest references per query."""
        self._check_k(k)
        D = self.sq_dists(queries)
        order = np.argsort(D, axis=1, kind="stable")[:, :k]
        return order, np.take_along_axis(D, order, axis=1)

    def _check_k(self, k: int) -> None:
        if not 1 <= k <= len(self):
            raise ValueError(f"k={k} out of range: need 1 <= k <= {len(self)} (reference size)")

    def classify(self, queries, k: int) -> np.ndarray:
        order, _ = self.query(queries, k)
        return np.array([_vote(self.ref.labels[row]) for row in order], dtype=np.int64)


def _vote(neighbour_labels: np.ndarray) -> int:
    classes, counts = np.unique(neighbour_labels, return_counts=True)
    tied = set(classes[counts == counts.max()].tolist())
    for c in neighbour_labels:  # nearest first
        if c in tied:
            return int(c)
    raise AssertionError("unreachable")


def knn_classify(index: NeighbourIndex, query, k: int) -> int:
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1:
        raise ValueError("knn_classify takes a single query vector")
    return int(index.classify(q, k)[0])


def nn_accuracy(train: EmbeddingSet, test: EmbeddingSet, k: int = 1) -> float:
    if len(train) == 0 or len(test) == 0:
        raise ValueError("nn_accuracy needs nonempty train and test sets")
    index = NeighbourIndex(train.embeddings, train.labels)
    return float(np.mean(index.classify(test.embeddings, k) == test.labels))
