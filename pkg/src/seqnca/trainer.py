"""Training loop: recurrent net -> pooling -> NCA, optimised end to end.

The gradient of the batch objective is composed explicitly: NCA gives
dO/de for each embedding, pooling spreads it over the output sequence, and
BPTT carries it into the weights.
"""
from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

import numpy as np

from .data import LabeledDataset, PreprocessMode, PreprocessStats, make_batches, preprocess, stratified_split
from .knn import nn_accuracy
from .models import MODEL_KINDS, Params, forward, init_lstm, init_rnn, model_backward
from .nca import EmbeddingSet, nca_value_and_grad, stochastic_accuracy
from .numerics import TRANSFER_KINDS
from .optim import make_optimizer
from .pooling import POOL_KINDS, pool_backward_batch, pool_batch

log = logging.getLogger(__name__)

PARAM_LIMIT = 1e6
_EMBED_CHUNK = 500


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    model_kind: str = "rnn"
    hidden_count: int = 16
    embedding_dim: int = 8
    transfer_kind: str = "tanh"  # ignored by the gated cell
    pool_kind: str = "mean"
    optimizer: str = "rprop"
    learning_rate: float = 0.01
    momentum: float = 0.9
    eta_plus: float = 1.2
    eta_minus: float = 0.5
    step_init: float = 0.01
    step_min: float = 1e-6
    step_max: float = 1.0
    preprocess_scope: str = "none"
    center: bool = False
    whiten: bool = False
    batch_size: int = 1000
    steps_per_batch: int = 1
    max_epochs: int = 200
    patience: int = 50
    validation_fraction: float = 0.0
    seed: int = 0
    clip_norm: float | None = None
    forget_bias: float = 1.0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        checks = [
            (self.model_kind in MODEL_KINDS, "model_kind", f"one of {MODEL_KINDS}"),
            (self.transfer_kind in TRANSFER_KINDS, "transfer_kind", f"one of {TRANSFER_KINDS}"),
            (self.pool_kind in POOL_KINDS, "pool_kind", f"one of {POOL_KINDS}"),
            (self.optimizer in ("sgd", "rprop"), "optimizer", "'sgd' or 'rprop'"),
            (self.batch_size >= 2, "batch_size", ">= 2"),
            (0.0 <= self.validation_fraction <= 0.5, "validation_fraction", "in [0, 0.5]"),
            (self.clip_norm is None or self.clip_norm > 0, "clip_norm", "positive or null"),
        ]
        for name in ("hidden_count", "embedding_dim", "steps_per_batch", "max_epochs", "patience"):
            checks.append((int(getattr(self, name)) == getattr(self, name) and getattr(self, name) >= 1,
                           name, "a positive integer"))
        for ok, name, want in checks:
            if not ok:
                raise ValueError(f"config key {name!r}: got {getattr(self, name)!r}, expected {want}")
        # raises on an unknown scope
        self.preprocess_mode()

    def preprocess_mode(self) -> PreprocessMode:
        return PreprocessMode(self.preprocess_scope, self.center, self.whiten)

    def optimizer_hyper(self) -> dict[str, float]:
        if self.optimizer == "sgd":
            return {"learning_rate": self.learning_rate, "momentum": self.momentum}
        return {"eta_plus": self.eta_plus, "eta_minus": self.eta_minus, "step_init": self.step_init,
                "step_min": self.step_min, "step_max": self.step_max}

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> TrainConfig:
        known = {f.name for f in fields(cls)}
        for key in d:
            if key not in known:
                raise KeyError(key)
        return cls(**d)


@dataclass
class EpochRecord:
    epoch: int
    objective: float
    train_accuracy: float
    val_accuracy: float | None
    seconds: float


@dataclass
class EmbeddingModel:
    """Trained params plus what is needed to embed raw data the same way."""

    params: Params
    pool_kind: str
    preprocess_mode: PreprocessMode = field(default_factory=PreprocessMode)
    preprocess_stats: PreprocessStats = field(default_factory=PreprocessStats)
    classes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.pool_kind not in POOL_KINDS:
            raise ValueError(f"unknown pool kind {self.pool_kind!r}; expected one of {POOL_KINDS}")

    def prepare(self, data: LabeledDataset) -> LabeledDataset:
        return preprocess(data, self.preprocess_mode, self.preprocess_stats)[0]

    def embed(self, data: LabeledDataset) -> EmbeddingSet:
        return embed_dataset(self.params, self.pool_kind, self.prepare(data))


@dataclass
class TrainReport:
    history: list[EpochRecord]
    best_epoch: int
    params: Params
    config: TrainConfig
    preprocess_stats: PreprocessStats
    classes: list[str]

    @property
    def best(self) -> EpochRecord:
        return self.history[self.best_epoch]

    def model(self) -> EmbeddingModel:
        return EmbeddingModel(self.params, self.config.pool_kind, self.config.preprocess_mode(),
                              self.preprocess_stats, list(self.classes))


def init_params(config: TrainConfig, input_dim: int, rng: np.random.Generator) -> Params:
    if config.model_kind == "lstm":
        return init_lstm(input_dim, config.hidden_count, config.embedding_dim, rng, config.forget_bias)
    return init_rnn(input_dim, config.hidden_count, config.embedding_dim, config.transfer_kind, rng)


def batch_value_and_grad(params: Params, pool_kind: str, X, lengths, labels) -> tuple[float, Params]:
    """NCA objective of one batch and its gradient w.r.t. all parameters."""
    trace = forward(params, X)
    E = pool_batch(pool_kind, trace.out, lengths)
    value, dE = nca_value_and_grad(E, labels)
    dO = pool_backward_batch(pool_kind, trace.out, lengths, dE)
    return value, model_backward(params, X, trace, dO)


def embed_dataset(params: Params, pool_kind: str, data: LabeledDataset) -> EmbeddingSet:
    if len(data) and data.input_dim != params.input_dim:
        raise ValueError(f"data has input dimension {data.input_dim}, model expects {params.input_dim}")
    chunks = []
    for start in range(0, len(data), _EMBED_CHUNK):
        idx = np.arange(start, min(start + _EMBED_CHUNK, len(data)))
        X, lengths = data.padded(idx)
        chunks.append(pool_batch(pool_kind, forward(params, X).out, lengths))
    E = np.concatenate(chunks) if chunks else np.zeros((0, params.output_dim))
    return EmbeddingSet(E, data.labels)


def _stochastic_accuracy(params, pool_kind, data: LabeledDataset) -> float:
    return stochastic_accuracy(embed_dataset(params, pool_kind, data).embeddings, data.labels)


def _check_params(vec: np.ndarray, epoch: int) -> None:
    if not np.all(np.isfinite(vec)) or np.abs(vec).max() > PARAM_LIMIT:
        raise TrainingDiverged(f"parameters left the finite range |w| <= {PARAM_LIMIT:g} at epoch {epoch}")


def train(config: TrainConfig, data: LabeledDataset, on_epoch=None) -> TrainReport:
    """Fit an embedding model by ascent on the per-batch NCA objective.

    Early stopping tracks validation stochastic accuracy when a validation
    fraction is configured, and training stochastic accuracy otherwise. The
    returned params are those of the best tracked epoch. ``on_epoch`` is
    called with each :class:`EpochRecord` as it is produced.
    """
    if len(data) < 2:
        raise ValueError("training needs at least two sequences")
    labelled = data.labels >= 0
    if not labelled.all():
        data = data.subset(np.flatnonzero(labelled))
    if np.unique(data.labels).size < 2:
        warnings.warn("training data has a single class; the objective is constant", RuntimeWarning,
                      stacklevel=2)
    rng = np.random.default_rng(config.seed)
    data, stats = preprocess(data, config.preprocess_mode())
    val = None
    if config.validation_fraction > 0:
        keep, held = stratified_split(data.labels, config.validation_fraction, rng.integers(2**32))
        if held.size >= 2:
            data, val = data.subset(keep), data.subset(held)
    params = init_params(config, data.input_dim, rng)
    vec = params.to_vector()
    opt = make_optimizer(config.optimizer, vec.size, **config.optimizer_hyper())
    X_all, len_all = data.padded()
    N = len(data)

    history: list[EpochRecord] = []
    best_epoch, best_score, best_vec = -1, -math.inf, vec.copy()
    for epoch in range(config.max_epochs):
        t0 = time.perf_counter()
        objective = 0.0
        for idx in make_batches(N, config.batch_size, rng.integers(2**32)):
            lengths = len_all[idx]
            X = X_all[idx, :lengths.max()]
            for step in range(config.steps_per_batch):
                value, grads = batch_value_and_grad(params, config.pool_kind, X, lengths, data.labels[idx])
                if not math.isfinite(value):
                    raise TrainingDiverged(f"objective became {value} at epoch {epoch}")
                g = grads.to_vector()
                if config.clip_norm is not None:
                    norm = np.linalg.norm(g)
                    if norm > config.clip_norm:
                        g *= config.clip_norm / norm
                vec = opt.step(vec, g)
                _check_params(vec, epoch)
                params = params.with_vector(vec)
                if step == 0:
                    objective += value
        train_acc = _stochastic_accuracy(params, config.pool_kind, data)
        val_acc = None if val is None else _stochastic_accuracy(params, config.pool_kind, val)
        record = EpochRecord(epoch, objective, train_acc, val_acc, time.perf_counter() - t0)
        history.append(record)
        if on_epoch is not None:
            on_epoch(record)
        score = train_acc if val_acc is None else val_acc
        if score > best_score:
            best_epoch, best_score, best_vec = epoch, score, vec.copy()
        if epoch - best_epoch >= config.patience:
            log.debug("early stop at epoch %d (best %d)", epoch, best_epoch)
            break
    return TrainReport(history, best_epoch, params.with_vector(best_vec), config, stats, list(data.classes))


def evaluate(params: Params, pool_kind: str, train: LabeledDataset, test: LabeledDataset,
             k: int = 1) -> dict[str, float]:
    """Stochastic accuracy on both splits and kNN test accuracy against train."""
    if len(train) < 2 or len(test) < 2:
        raise ValueError("evaluate needs at least two sequences in each split")
    E_train = embed_dataset(params, pool_kind, train)
    E_test = embed_dataset(params, pool_kind, test)
    return {
        "stochastic_train": stochastic_accuracy(E_train.embeddings, E_train.labels),
        "stochastic_test": stochastic_accuracy(E_test.embeddings, E_test.labels),
        "knn_test": nn_accuracy(E_train, E_test, k),
    }


# -- random search -----------------------------------------------------------

def sample_config(space: dict[str, Any], rng: np.random.Generator, base: TrainConfig | None = None) -> TrainConfig:
    """Draw one config. Each space entry is a fixed value, a list of choices,
    or ``{"low": a, "high": b}`` with optional ``"log"`` and ``"int"`` flags.

    A sampled ``transfer_kind`` of ``"lstm"`` selects LSTM cells, so LSTMs can
    compete with the plain transfer functions in a single choice list.
    """
    values = {}
    for name in sorted(space):
        entry = space[name]
        if isinstance(entry, list):
            if not entry:
                raise ValueError(f"search space entry {name!r} is empty")
            values[name] = entry[int(rng.integers(len(entry)))]
        elif isinstance(entry, dict):
            lo, hi = float(entry["low"]), float(entry["high"])
            if entry.get("log"):
                v = math.exp(rng.uniform(math.log(lo), math.log(hi)))
            else:
                v = rng.uniform(lo, hi)
            values[name] = int(round(v)) if entry.get("int") else v
        else:
            values[name] = entry
    base_values = (base or TrainConfig()).to_dict()
    unknown = set(values) - set(base_values)
    if unknown:
        raise KeyError(sorted(unknown)[0])
    base_values.update(values)
    if base_values["transfer_kind"] == "lstm":
        base_values.update(model_kind="lstm", transfer_kind=TrainConfig.transfer_kind)
    return TrainConfig(**base_values)


@dataclass
class TrialResult:
    trial: int
    config: TrainConfig
    metrics: dict[str, float] = field(default_factory=dict)
    error: str | None = None
    report: TrainReport | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"trial": self.trial, "config": self.config.to_dict(), "metrics": self.metrics,
                "error": self.error}


def run_trial(trial: int, config: TrainConfig, data: LabeledDataset,
              test: LabeledDataset | None = None, k: int = 1) -> TrialResult:
    try:
        report = train(config, data)
    except (TrainingDiverged, ValueError, FloatingPointError) as exc:
        return TrialResult(trial, config, error=f"{type(exc).__name__}: {exc}")
    model = report.model()
    prepared = model.prepare(data)
    metrics = {
        "train_accuracy": _stochastic_accuracy(model.params, model.pool_kind, prepared),
        "best_epoch": report.best_epoch,
        "epochs": len(report.history),
    }
    if report.best.val_accuracy is not None:
        metrics["val_accuracy"] = report.best.val_accuracy
    if test is not None:
        metrics.update(evaluate(model.params, model.pool_kind, prepared, model.prepare(test), k))
    return TrialResult(trial, config, metrics, report=report)


def random_search(space: dict[str, Any], n_trials: int, data: LabeledDataset, seed: int = 0,
                  test: LabeledDataset | None = None, k: int = 1, select_by: str = "train_accuracy",
                  base: TrainConfig | None = None, on_trial=None) -> tuple[TrainConfig, list[TrialResult]]:
    """Train ``n_trials`` sampled configs; the best has the highest ``select_by`` metric.

    Trial configs and their seeds depend only on ``seed``. Failed trials are
    kept in the results with their error and never win.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    rng = np.random.default_rng(seed)
    results = []
    for trial in range(n_trials):
        config = sample_config(space, rng, base)
        config = replace(config, seed=int(rng.integers(2**31)))
        result = run_trial(trial, config, data, test, k)
        results.append(result)
        if on_trial is not None:
            on_trial(result)

    def key(r: TrialResult):
        return (r.error is None, r.metrics.get(select_by, -math.inf), -r.trial)

    return max(results, key=key).config, results
