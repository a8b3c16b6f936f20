"""Dense primitives and element-wise transfer functions.

Matrices and vectors are plain float64 numpy arrays; every public function
returns a fresh array.
"""
from __future__ import annotations

import numpy as np

TRANSFER_KINDS = ("sigmoid", "tanh", "relu")


def as_float(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def affine(W, x, b) -> np.ndarray:
    """Return ``W @ x + b``, checking shapes first."""
    W, x, b = as_float(W), as_float(x), as_float(b)
    if W.ndim != 2 or x.ndim != 1 or b.ndim != 1:
        raise ValueError(f"affine expects 2-d W and 1-d x, b; got W{W.shape}, x{x.shape}, b{b.shape}")
    if W.shape[1] != x.shape[0] or W.shape[0] != b.shape[0]:
        raise ValueError(f"affine shape mismatch: W{W.shape}, x{x.shape}, b{b.shape}")
    return W @ x + b


def sigmoid(x) -> np.ndarray:
    x = as_float(x)
    # exp of a nonpositive argument only, so large |x| never overflows
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def transfer(kind: str, x) -> np.ndarray:
    x = as_float(x)
    if kind == "sigmoid":
        return sigmoid(x)
    if kind == "tanh":
        return np.tanh(x)
    if kind == "relu":
        return np.maximum(x, 0.0)
    raise ValueError(f"unknown transfer kind {kind!r}; expected one of {TRANSFER_KINDS}")


def transfer_deriv(kind: str, y_or_x) -> np.ndarray:
    """Derivative of :func:`transfer`.

    For sigmoid and tanh the argument is the activation *output*; for relu it
    is the pre-activation. The relu subgradient at 0 is 0.
    """
    v = as_float(y_or_x)
    if kind == "sigmoid":
        return v * (1.0 - v)
    if kind == "tanh":
        return 1.0 - v * v
    if kind == "relu":
        return (v > 0).astype(np.float64)
    raise ValueError(f"unknown transfer kind {kind!r}; expected one of {TRANSFER_KINDS}")
