"""Neighbourhood components analysis on a batch of embeddings.

The objective is the expected number of points whose stochastic
nearest-neighbour choice has the same class, and is maximised.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class EmbeddingSet:
    embeddings: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.embeddings = np.atleast_2d(np.asarray(self.embeddings, dtype=np.float64))
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != (self.embeddings.shape[0],):
            raise ValueError(f"{self.embeddings.shape[0]} embeddings but {self.labels.size} labels")

    def __len__(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]


def pairwise_sq_dists(E) -> np.ndarray:
    """Squared Euclidean distances, symmetric with an exactly-zero diagonal."""
    E = np.atleast_2d(np.asarray(E, dtype=np.float64))
    sq = np.einsum("ij,ij->i", E, E)
    D = sq[:, None] + sq[None, :] - 2.0 * (E @ E.T)
    np.maximum(D, 0.0, out=D)
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D


def selection_probs(D) -> np.ndarray:
    """Row-wise softmax of ``-D`` over off-diagonal entries; zero diagonal."""
    D = np.asarray(D, dtype=np.float64)
    N = D.shape[0]
    if D.ndim != 2 or D.shape[1] != N:
        raise ValueError(f"distance matrix must be square, got {D.shape}")
    if N < 2:
        raise ValueError("selection probabilities need at least 2 points")
    logits = -D.copy()
    np.fill_diagonal(logits, -np.inf)
    logits -= logits.max(axis=1, keepdims=True)
    P = np.exp(logits)
    P /= P.sum(axis=1, keepdims=True)
    return P


def _same_class(labels, N) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (N,):
        raise ValueError(f"expected {N} labels, got {labels.size}")
    Y = labels[:, None] == labels[None, :]
    np.fill_diagonal(Y, False)
    return Y


def nca_objective(P, labels) -> float:
    P = np.asarray(P, dtype=np.float64)
    Y = _same_class(labels, P.shape[0])
    # per-row mass is a probability; clip rounding so that 0 <= O <= N holds exactly
    return float(np.minimum((P * Y).sum(axis=1), 1.0).sum())


def nca_value_and_grad(E, labels) -> tuple[float, np.ndarray]:
    """Objective and its gradient with respect to each embedding row.

    With ``W[i,k] = p_ik (p_i - y_ik)``, where ``p_i`` is the probability mass
    point ``i`` puts on its own class, the gradient is
    ``2 * sum_k (W[i,k] + W[k,i]) (e_i - e_k)``.
    """
    E = np.atleast_2d(np.asarray(E, dtype=np.float64))
    N = E.shape[0]
    Y = _same_class(labels, N)
    P = selection_probs(pairwise_sq_dists(E))
    PY = P * Y
    p_own = PY.sum(axis=1)
    W = P * p_own[:, None] - PY
    M = W + W.T
    grad = 2.0 * (M.sum(axis=1)[:, None] * E - M @ E)
    return float(np.minimum(p_own, 1.0).sum()), grad


def nca_grad(E, labels) -> np.ndarray:
    return nca_value_and_grad(E, labels)[1]


def stochastic_accuracy(E, labels) -> float:
    """Mean probability that the stochastic neighbour classifier is correct."""
    E = np.atleast_2d(np.asarray(E, dtype=np.float64))
    P = selection_probs(pairwise_sq_dists(E))
    return nca_objective(P, labels) / E.shape[0]
