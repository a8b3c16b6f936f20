"""Labelled sequence datasets: UCR text I/O, preprocessing and batching."""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

UNLABELED = -1
_SPLIT = re.compile(r"[,\s]+")
SCOPES = ("none", "per_sequence", "global")


class DataError(ValueError):
    pass


@dataclass
class LabeledDataset:
    """Sequences of shape ``(T_i, n)`` with dense class ids.

    ``classes[c]`` is the original label token of class id ``c``; unlabelled
    sequences carry id -1.
    """

    sequences: list[np.ndarray]
    labels: np.ndarray
    classes: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.sequences = [_as_sequence(s) for s in self.sequences]
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if len(self.sequences) != self.labels.size:
            raise DataError(f"{len(self.sequences)} sequences but {self.labels.size} labels")
        if not self.classes and self.labels.size:
            self.classes = [str(c) for c in range(int(self.labels.max()) + 1)]
        bad = (self.labels < UNLABELED) | (self.labels >= len(self.classes))
        if bad.any():
            raise DataError(f"class id {int(self.labels[bad][0])} outside [0, {len(self.classes)})")
        dims = {s.shape[1] for s in self.sequences}
        if len(dims) > 1:
            raise DataError(f"sequences disagree on input dimension: {sorted(dims)}")

    def __len__(self) -> int:
        return len(self.sequences)

    @property
    def input_dim(self) -> int:
        return self.sequences[0].shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([s.shape[0] for s in self.sequences], dtype=np.int64)

    def subset(self, indices) -> LabeledDataset:
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset([self.sequences[i] for i in indices], self.labels[indices], list(self.classes))

    def padded(self, indices=None) -> tuple[np.ndarray, np.ndarray]:
        """Zero-padded ``(N, T_max, n)`` array and the true lengths."""
        seqs = self.sequences if indices is None else [self.sequences[i] for i in indices]
        lengths = np.array([s.shape[0] for s in seqs], dtype=np.int64)
        X = np.zeros((len(seqs), int(lengths.max()), seqs[0].shape[1]))
        for i, s in enumerate(seqs):
            X[i, :s.shape[0]] = s
        return X, lengths


def _as_sequence(s) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if s.ndim == 1:
        s = s[:, None]
    if s.ndim != 2 or s.shape[0] < 1:
        raise DataError(f"a sequence needs shape (T, n) with T >= 1, got {s.shape}")
    if not np.all(np.isfinite(s)):
        raise DataError("sequence contains non-finite values")
    return s


def _label_key(token: str) -> str:
    # old UCR files write labels as floats, e.g. "1.0000000e+00"
    try:
        value = float(token)
    except ValueError:
        return token
    return str(int(value)) if value.is_integer() else token


def load_ucr(path, classes: list[str] | None = None) -> LabeledDataset:
    """Read a UCR-style file: one sequence per line, label first.

    Labels are densified in first-appearance order, continuing from
    ``classes`` when given (so a test split reuses the train split's ids).
    A label of ``?`` marks an unlabelled sequence.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read data file {path}: {exc}") from exc
    classes = list(classes or [])
    lookup = {c: i for i, c in enumerate(classes)}
    sequences, labels, length = [], [], None
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = [t for t in _SPLIT.split(line.strip()) if t]
        if not tokens:
            continue
        if len(tokens) < 2:
            raise DataError(f"{path}:{lineno}: a line needs a label and at least one value")
        values = np.empty(len(tokens) - 1)
        for col, tok in enumerate(tokens[1:], start=2):
            try:
                values[col - 2] = float(tok)
            except ValueError:
                raise DataError(f"{path}:{lineno}: column {col}: non-numeric value {tok!r}") from None
        if not np.all(np.isfinite(values)):
            raise DataError(f"{path}:{lineno}: non-finite value")
        if length is None:
            length = values.size
        elif values.size != length:
            raise DataError(f"{path}:{lineno}: ragged row with {values.size} values, expected {length}")
        key = tokens[0] if tokens[0] == "?" else _label_key(tokens[0])
        if key == "?":
            labels.append(UNLABELED)
        else:
            if key not in lookup:
                lookup[key] = len(classes)
                classes.append(key)
            labels.append(lookup[key])
        sequences.append(values[:, None])
    if not sequences:
        raise DataError(f"{path}: no sequences found")
    return LabeledDataset(sequences, np.array(labels), classes)


def save_ucr(data: LabeledDataset, path) -> None:
    """Write univariate sequences in comma-separated UCR form, full precision."""
    if data.input_dim != 1:
        raise DataError("UCR text format holds univariate sequences only")
    lines = []
    for seq, lab in zip(data.sequences, data.labels):
        token = "?" if lab == UNLABELED else data.classes[lab]
        lines.append(",".join([token] + [repr(float(v)) for v in seq[:, 0]]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class PreprocessMode:
    scope: str = "none"
    center: bool = False
    whiten: bool = False

    def __post_init__(self):
        if self.scope not in SCOPES:
            raise ValueError(f"unknown preprocessing scope {self.scope!r}; expected one of {SCOPES}")


@dataclass
class PreprocessStats:
    """Global per-dimension statistics; ``None`` for other scopes."""

    mean: np.ndarray | None = None
    std: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)


def _safe_std(std: np.ndarray, where: str, log: list[str]) -> np.ndarray:
    zero = std == 0
    if zero.any():
        msg = f"zero standard deviation in {where}; dividing by 1"
        log.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
        std = np.where(zero, 1.0, std)
    return std


def preprocess(data: LabeledDataset, mode: PreprocessMode,
               stats: PreprocessStats | None = None) -> tuple[LabeledDataset, PreprocessStats]:
    """Center and/or standardise per sequence or with global statistics.

    In global scope, pass the ``stats`` returned for the training split to
    transform a test split identically.
    """
    if len(data) == 0:
        raise DataError("cannot preprocess an empty dataset")
    log: list[str] = []
    if mode.scope == "none" or not (mode.center or mode.whiten):
        return data, PreprocessStats(warnings=log)
    if mode.scope == "per_sequence":
        out = []
        for i, s in enumerate(data.sequences):
            mu = s.mean(axis=0)
            if mode.whiten:
                sd = _safe_std(s.std(axis=0), f"sequence {i}", log)
            y = s - mu if mode.center else s
            out.append(y / sd if mode.whiten else y)
        return LabeledDataset(out, data.labels.copy(), list(data.classes)), PreprocessStats(warnings=log)
    if stats is None or stats.mean is None:
        allv = np.concatenate(data.sequences, axis=0)
        mean = allv.mean(axis=0)
        std = _safe_std(allv.std(axis=0), "training data", log)
        stats = PreprocessStats(mean=mean, std=std, warnings=log)
    out = []
    for s in data.sequences:
        y = s - stats.mean if mode.center else s
        out.append(y / stats.std if mode.whiten else y)
    return LabeledDataset(out, data.labels.copy(), list(data.classes)), stats


def make_batches(data, batch_size: int, seed) -> list[np.ndarray]:
    """Seeded shuffle cut into chunks of ``batch_size``; never leaves a singleton."""
    if batch_size < 2:
        raise ValueError(f"batch_size must be at least 2 for NCA, got {batch_size}")
    n = data if isinstance(data, (int, np.integer)) else len(data)
    perm = np.random.default_rng(seed).permutation(n)
    batches = [perm[i:i + batch_size] for i in range(0, n, batch_size)]
    if len(batches) > 1 and batches[-1].size == 1:
        last = batches.pop()
        batches[-1] = np.concatenate([batches[-1], last])
    return batches


def stratified_split(labels, fraction: float, seed) -> tuple[np.ndarray, np.ndarray]:
    """Seeded split into (train, held-out) indices, drawing ``fraction`` of each class."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    held = []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        k = int(round(fraction * idx.size))
        if k and idx.size - k >= 1:
            held.extend(rng.permutation(idx)[:k].tolist())
    held = np.sort(np.array(held, dtype=np.int64))
    keep = np.setdiff1d(np.arange(labels.size), held)
    return keep, held
