"""Vanilla RNN and gated recurrent cell: forward passes and BPTT.

All passes run on a batch of equal-length (padded) sequences of shape
``(N, T, n)``; a single ``(T, n)`` sequence is accepted as well and the trace
then reports unbatched outputs. Outputs at padded timesteps are computed but
never influence earlier timesteps, so giving them a zero output gradient
makes the backward pass exact for variable-length batches.

The gated cell is deliberately not the textbook LSTM:

    [a_x a_i a_f a_o] = W_xa x_t + W_ha h_{t-1} + b_a
    s_t = sigmoid(a_i) * a_x + sigmoid(a_f) * s_{t-1}
    h_t = sigmoid(sigmoid(a_o) * s_t)
    o_t = W_ho h_t + b_out

There is no squashing of the cell input, and the hidden state is a
sigmoid of the gated cell state.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import ClassVar

import numpy as np

from .numerics import TRANSFER_KINDS, sigmoid, transfer, transfer_deriv

MODEL_KINDS = ("rnn", "lstm")


class _Params:
    kind: ClassVar[str]
    names: ClassVar[tuple[str, ...]]

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.names}

    @property
    def size(self) -> int:
        return sum(a.size for a in self.arrays().values())

    def to_vector(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays().values()])

    def with_vector(self, vec):
        """Copy of these params with all trainable arrays taken from ``vec``."""
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (self.size,):
            raise ValueError(f"expected a flat vector of length {self.size}, got shape {vec.shape}")
        new, start = {}, 0
        for name, a in self.arrays().items():
            new[name] = vec[start:start + a.size].reshape(a.shape).copy()
            start += a.size
        return replace(self, **new)

    def zeros_like(self):
        return replace(self, **{n: np.zeros_like(a) for n, a in self.arrays().items()})

    def _cast(self) -> None:
        for name in self.names:
            setattr(self, name, np.array(getattr(self, name), dtype=np.float64))

    def _check(self, expected: dict[str, tuple[int, ...]]) -> None:
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ValueError(f"{type(self).__name__}.{name} has shape {got}, expected {shape}")


@dataclass
class RnnParams(_Params):
    W_xh: np.ndarray
    W_hh: np.ndarray
    W_ho: np.ndarray
    b_h: np.ndarray
    b_o: np.ndarray
    h0: np.ndarray
    transfer_kind: str = "tanh"

    kind: ClassVar[str] = "rnn"
    names: ClassVar[tuple[str, ...]] = ("W_xh", "W_hh", "W_ho", "b_h", "b_o", "h0")

    def __post_init__(self):
        self._cast()
        if self.transfer_kind not in TRANSFER_KINDS:
            raise ValueError(f"unknown transfer kind {self.transfer_kind!r}")
        if self.W_xh.ndim != 2 or self.W_ho.ndim != 2:
            raise ValueError("W_xh and W_ho must be matrices")
        H, n = self.W_xh.shape
        m = self.W_ho.shape[0]
        self._check({"W_hh": (H, H), "W_ho": (m, H), "b_h": (H,), "b_o": (m,), "h0": (H,)})

    @property
    def input_dim(self) -> int:
        return self.W_xh.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W_xh.shape[0]

    @property
    def output_dim(self) -> int:
        return self.W_ho.shape[0]


@dataclass
class LstmParams(_Params):
    """Gated cell parameters; rows of the 4-block arrays are ordered [x, i, f, o]."""

    W_xa: np.ndarray
    W_ha: np.ndarray
    b_a: np.ndarray
    W_ho: np.ndarray
    b_out: np.ndarray
    h0: np.ndarray
    s0: np.ndarray

    kind: ClassVar[str] = "lstm"
    names: ClassVar[tuple[str, ...]] = ("W_xa", "W_ha", "b_a", "W_ho", "b_out", "h0", "s0")
    transfer_kind: ClassVar[str] = "gates"

    def __post_init__(self):
        self._cast()
        if self.W_xa.ndim != 2 or self.W_ho.ndim != 2:
            raise ValueError("W_xa and W_ho must be matrices")
        rows, n = self.W_xa.shape
        if rows % 4:
            raise ValueError(f"W_xa must have 4*cells rows, got {rows}")
        H = rows // 4
        m = self.W_ho.shape[0]
        self._check({"W_ha": (4 * H, H), "b_a": (4 * H,), "W_ho": (m, H),
                     "b_out": (m,), "h0": (H,), "s0": (H,)})

    @property
    def input_dim(self) -> int:
        return self.W_xa.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W_ha.shape[1]

    @property
    def output_dim(self) -> int:
        return self.W_ho.shape[0]


Params = RnnParams | LstmParams


def _uniform(rng, rows, cols):
    r = 1.0 / np.sqrt(cols)
    return rng.uniform(-r, r, size=(rows, cols))


def init_rnn(input_dim: int, hidden: int, output_dim: int, transfer_kind: str = "tanh",
             rng: np.random.Generator | None = None) -> RnnParams:
    """Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases and h0 zero."""
    rng = np.random.default_rng() if rng is None else rng
    return RnnParams(
        W_xh=_uniform(rng, hidden, input_dim),
        W_hh=_uniform(rng, hidden, hidden),
        W_ho=_uniform(rng, output_dim, hidden),
        b_h=np.zeros(hidden),
        b_o=np.zeros(output_dim),
        h0=np.zeros(hidden),
        transfer_kind=transfer_kind,
    )


def init_lstm(input_dim: int, cells: int, output_dim: int,
              rng: np.random.Generator | None = None, forget_bias: float = 1.0) -> LstmParams:
    rng = np.random.default_rng() if rng is None else rng
    b_a = np.zeros(4 * cells)
    b_a[2 * cells:3 * cells] = forget_bias
    return LstmParams(
        W_xa=_uniform(rng, 4 * cells, input_dim),
        W_ha=_uniform(rng, 4 * cells, cells),
        b_a=b_a,
        W_ho=_uniform(rng, output_dim, cells),
        b_out=np.zeros(output_dim),
        h0=np.zeros(cells),
        s0=np.zeros(cells),
    )


@dataclass
class ForwardTrace:
    """Everything BPTT needs. Arrays are batched: ``(N, T, .)``.

    ``hidden`` and ``cells`` carry the initial state at index 0, so they have
    ``T + 1`` entries along the time axis. For the gated cell ``pre`` holds the
    concatenated gate inputs and ``gates`` their sigmoids (columns
    ``[i, f, o]``).
    """

    inputs: np.ndarray
    pre: np.ndarray
    hidden: np.ndarray
    out: np.ndarray
    cells: np.ndarray | None = None
    gates: np.ndarray | None = None
    batched: bool = True

    def __len__(self) -> int:
        return self.inputs.shape[1]

    @property
    def outputs(self) -> np.ndarray:
        return self.out if self.batched else self.out[0]

    @property
    def hidden_states(self) -> np.ndarray:
        """h_1..h_T (initial state excluded)."""
        h = self.hidden[:, 1:]
        return h if self.batched else h[0]

    @property
    def cell_states(self) -> np.ndarray | None:
        if self.cells is None:
            return None
        s = self.cells[:, 1:]
        return s if self.batched else s[0]


def _as_batch(params, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    batched = x.ndim == 3
    if x.ndim == 2:
        x = x[None]
    elif x.ndim != 3:
        raise ValueError(f"sequence must have shape (T, n) or (N, T, n), got {x.shape}")
    if x.shape[1] < 1:
        raise ValueError("empty sequence: need at least one timestep")
    if x.shape[2] != params.input_dim:
        raise ValueError(f"input dimension {x.shape[2]} does not match model input dimension {params.input_dim}")
    return x, batched


def _rowwise(A: np.ndarray, WT: np.ndarray) -> np.ndarray:
    # one small product per row, so a sequence's result never depends on
    # what else shares the batch (plain gemm rounding does)
    return (A[..., None, :] @ WT)[..., 0, :]


def rnn_forward(params: RnnParams, x) -> ForwardTrace:
    X, batched = _as_batch(params, x)
    N, T, _ = X.shape
    H = params.hidden_dim
    pre = np.empty((N, T, H))
    hidden = np.empty((N, T + 1, H))
    hidden[:, 0] = params.h0
    # input projection for all timesteps at once
    xproj = _rowwise(X, params.W_xh.T) + params.b_h
    W_hhT = params.W_hh.T
    for t in range(T):
        a = xproj[:, t] + _rowwise(hidden[:, t], W_hhT)
        pre[:, t] = a
        hidden[:, t + 1] = transfer(params.transfer_kind, a)
    out = _rowwise(hidden[:, 1:], params.W_ho.T) + params.b_o
    return ForwardTrace(inputs=X, pre=pre, hidden=hidden, out=out, batched=batched)


def lstm_forward(params: LstmParams, x) -> ForwardTrace:
    X, batched = _as_batch(params, x)
    N, T, _ = X.shape
    H = params.hidden_dim
    pre = np.empty((N, T, 4 * H))
    gates = np.empty((N, T, 3 * H))
    hidden = np.empty((N, T + 1, H))
    cells = np.empty((N, T + 1, H))
    hidden[:, 0] = params.h0
    cells[:, 0] = params.s0
    xproj = _rowwise(X, params.W_xa.T) + params.b_a
    W_haT = params.W_ha.T
    for t in range(T):
        a = xproj[:, t] + _rowwise(hidden[:, t], W_haT)
        pre[:, t] = a
        g = sigmoid(a[:, H:])
        gates[:, t] = g
        s = g[:, :H] * a[:, :H] + g[:, H:2 * H] * cells[:, t]
        cells[:, t + 1] = s
        hidden[:, t + 1] = sigmoid(g[:, 2 * H:] * s)
    out = _rowwise(hidden[:, 1:], params.W_ho.T) + params.b_out
    return ForwardTrace(inputs=X, pre=pre, hidden=hidden, out=out,
                        cells=cells, gates=gates, batched=batched)


def forward(params: Params, x) -> ForwardTrace:
    if isinstance(params, LstmParams):
        return lstm_forward(params, x)
    return rnn_forward(params, x)


def _output_grads(trace: ForwardTrace, output_grads) -> np.ndarray:
    dO = np.asarray(output_grads, dtype=np.float64)
    if not trace.batched:
        dO = dO[None]
    if dO.shape != trace.out.shape:
        raise ValueError(f"output gradients have shape {np.shape(output_grads)}, "
                         f"expected {trace.outputs.shape} to match the trace")
    return dO


def _rnn_backward(params: RnnParams, trace: ForwardTrace, dO: np.ndarray) -> RnnParams:
    X, hidden = trace.inputs, trace.hidden
    T = X.shape[1]
    kind = params.transfer_kind
    dpre = np.empty_like(trace.pre)
    dh_t = dO @ params.W_ho  # gradient reaching h_t from o_t, all t
    dh_next = np.zeros_like(hidden[:, 0])
    for t in range(T - 1, -1, -1):
        dh = dh_t[:, t] + dh_next
        deriv = transfer_deriv(kind, trace.pre[:, t] if kind == "relu" else hidden[:, t + 1])
        d = dh * deriv
        dpre[:, t] = d
        dh_next = d @ params.W_hh
    H = params.hidden_dim
    flat_dpre = dpre.reshape(-1, H)
    return RnnParams(
        W_xh=flat_dpre.T @ X.reshape(-1, X.shape[2]),
        W_hh=flat_dpre.T @ hidden[:, :-1].reshape(-1, H),
        W_ho=dO.reshape(-1, dO.shape[2]).T @ hidden[:, 1:].reshape(-1, H),
        b_h=flat_dpre.sum(axis=0),
        b_o=dO.sum(axis=(0, 1)),
        h0=dh_next.sum(axis=0),
        transfer_kind=kind,
    )


def _lstm_backward(params: LstmParams, trace: ForwardTrace, dO: np.ndarray) -> LstmParams:
    X, hidden, cells = trace.inputs, trace.hidden, trace.cells
    T = X.shape[1]
    H = params.hidden_dim
    da = np.empty_like(trace.pre)
    dh_t = dO @ params.W_ho
    dh_next = np.zeros_like(hidden[:, 0])
    ds_next = np.zeros_like(cells[:, 0])
    for t in range(T - 1, -1, -1):
        a = trace.pre[:, t]
        g = trace.gates[:, t]
        gi, gf, go = g[:, :H], g[:, H:2 * H], g[:, 2 * H:]
        s, s_prev, h = cells[:, t + 1], cells[:, t], hidden[:, t + 1]
        du = (dh_t[:, t] + dh_next) * h * (1.0 - h)
        ds = du * go + ds_next
        dgi = ds * a[:, :H]
        dgf = ds * s_prev
        dgo = du * s
        d = da[:, t]
        d[:, :H] = ds * gi
        d[:, H:2 * H] = dgi * gi * (1.0 - gi)
        d[:, 2 * H:3 * H] = dgf * gf * (1.0 - gf)
        d[:, 3 * H:] = dgo * go * (1.0 - go)
        ds_next = ds * gf
        dh_next = d @ params.W_ha
    flat_da = da.reshape(-1, 4 * H)
    return LstmParams(
        W_xa=flat_da.T @ X.reshape(-1, X.shape[2]),
        W_ha=flat_da.T @ hidden[:, :-1].reshape(-1, H),
        b_a=flat_da.sum(axis=0),
        W_ho=dO.reshape(-1, dO.shape[2]).T @ hidden[:, 1:].reshape(-1, H),
        b_out=dO.sum(axis=(0, 1)),
        h0=dh_next.sum(axis=0),
        s0=ds_next.sum(axis=0),
    )


def model_backward(params: Params, x, trace: ForwardTrace, output_grads) -> Params:
    """Gradient of ``sum_t <output_grads_t, o_t>`` w.r.t. every trainable array.

    For a batched trace the gradients are summed over sequences. The result
    has the same type and shapes as ``params``.
    """
    X = np.asarray(x, dtype=np.float64)
    if X.ndim == 2:
        X = X[None]
    if X.shape != trace.inputs.shape:
        raise ValueError(f"sequence of shape {np.shape(x)} does not match the trace "
                         f"({trace.inputs.shape[1]} timesteps)")
    dO = _output_grads(trace, output_grads)
    if isinstance(params, LstmParams):
        return _lstm_backward(params, trace, dO)
    return _rnn_backward(params, trace, dO)


def param_shapes(params: Params) -> dict[str, tuple[int, ...]]:
    return {name: a.shape for name, a in params.arrays().items()}


def params_from_arrays(kind: str, arrays: dict[str, np.ndarray], transfer_kind: str | None = None) -> Params:
    if kind == "rnn":
        return RnnParams(**arrays, transfer_kind=transfer_kind or "tanh")
    if kind == "lstm":
        return LstmParams(**arrays)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


__all__ = [
    "MODEL_KINDS", "RnnParams", "LstmParams", "Params", "ForwardTrace",
    "init_rnn", "init_lstm", "rnn_forward", "lstm_forward", "forward",
    "model_backward", "param_shapes", "params_from_arrays",
]
