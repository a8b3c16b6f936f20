"""Reduce an output sequence to one embedding vector, with its exact backward.

``pool``/``pool_backward`` take a single ``(T, m)`` sequence. The ``*_batch``
variants take a padded ``(N, T, m)`` array plus per-sequence lengths; padded
timesteps never contribute and receive zero gradient.
"""
from __future__ import annotations

import numpy as np

POOL_KINDS = ("sum", "mean", "max")


def _check_kind(kind: str) -> None:
    if kind not in POOL_KINDS:
        raise ValueError(f"unknown pool kind {kind!r}; expected one of {POOL_KINDS}")


def _as_outputs(outputs) -> np.ndarray:
    o = np.asarray(outputs, dtype=np.float64)
    if o.ndim != 2:
        raise ValueError(f"outputs must have shape (T, m), got {o.shape}")
    if o.shape[0] == 0:
        raise ValueError("cannot pool an empty sequence")
    return o


def pool(kind: str, outputs) -> np.ndarray:
    _check_kind(kind)
    o = _as_outputs(outputs)
    if kind == "sum":
        return o.sum(axis=0)
    if kind == "mean":
        return o.sum(axis=0) / o.shape[0]
    return o.max(axis=0)


def pool_backward(kind: str, outputs, grad_e) -> np.ndarray:
    """Gradient w.r.t. each o_t given the gradient w.r.t. the pooled vector.

    Max pooling routes each component to the earliest timestep attaining it.
    """
    _check_kind(kind)
    o = _as_outputs(outputs)
    g = np.asarray(grad_e, dtype=np.float64)
    if g.shape != (o.shape[1],):
        raise ValueError(f"grad_e has shape {g.shape}, expected ({o.shape[1]},)")
    T = o.shape[0]
    if kind == "sum":
        return np.tile(g, (T, 1))
    if kind == "mean":
        return np.tile(g / T, (T, 1))
    out = np.zeros_like(o)
    out[o.argmax(axis=0), np.arange(o.shape[1])] = g
    return out


def _check_batch(outputs, lengths):
    o = np.asarray(outputs, dtype=np.float64)
    lengths = np.asarray(lengths, dtype=np.int64)
    if o.ndim != 3 or lengths.shape != (o.shape[0],):
        raise ValueError(f"expected outputs (N, T, m) and N lengths, got {o.shape} and {lengths.shape}")
    if lengths.size and (lengths.min() < 1 or lengths.max() > o.shape[1]):
        raise ValueError("every sequence length must lie in [1, T]")
    mask = np.arange(o.shape[1])[None, :] < lengths[:, None]
    return o, lengths, mask


def pool_batch(kind: str, outputs, lengths) -> np.ndarray:
    _check_kind(kind)
    o, lengths, mask = _check_batch(outputs, lengths)
    if kind == "max":
        return np.where(mask[:, :, None], o, -np.inf).max(axis=1)
    s = (o * mask[:, :, None]).sum(axis=1)
    return s / lengths[:, None] if kind == "mean" else s


def pool_backward_batch(kind: str, outputs, lengths, grad_e) -> np.ndarray:
    _check_kind(kind)
    o, lengths, mask = _check_batch(outputs, lengths)
    g = np.asarray(grad_e, dtype=np.float64)
    if g.shape != (o.shape[0], o.shape[2]):
        raise ValueError(f"grad_e has shape {g.shape}, expected {(o.shape[0], o.shape[2])}")
    if kind == "max":
        idx = np.where(mask[:, :, None], o, -np.inf).argmax(axis=1)
        out = np.zeros_like(o)
        n, m = np.indices(idx.shape)
        out[n, idx, m] = g
        return out
    if kind == "mean":
        g = g / lengths[:, None]
    return mask[:, :, None] * g[:, None, :]
