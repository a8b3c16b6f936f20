"""Seeded generators for synthetic labelled time series.

``synthetic_control`` and ``two_patterns`` follow the published generating
processes of the UCR datasets of the same names (Alcock & Manolopoulos 1999;
Geurts 2002), so fresh train/test draws from the same distributions can stand
in for the archive files when those are not available.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .data import LabeledDataset, load_ucr


def sine_waves(n: int = 20, length: int = 30, frequencies=(1.0, 3.0), noise: float = 0.1,
               seed: int = 0) -> LabeledDataset:
    """Balanced classes of sines with a class-dependent frequency and random phase."""
    rng = np.random.default_rng(seed)
    t = np.arange(length) / length
    seqs, labels = [], []
    for i in range(n):
        c = i % len(frequencies)
        phase = rng.uniform(0, 2 * np.pi)
        x = np.sin(2 * np.pi * frequencies[c] * t + phase) + noise * rng.standard_normal(length)
        seqs.append(x)
        labels.append(c)
    return LabeledDataset(seqs, np.array(labels), [str(c + 1) for c in range(len(frequencies))])


CONTROL_CLASSES = ("normal", "cyclic", "increasing", "decreasing", "upward_shift", "downward_shift")


def _control_series(kind: int, rng: np.random.Generator, length: int) -> np.ndarray:
    t = np.arange(1, length + 1, dtype=np.float64)
    y = 30.0 + 2.0 * rng.uniform(-3, 3, size=length)
    if kind == 1:
        a, period = rng.uniform(10, 15), rng.uniform(10, 15)
        y += a * np.sin(2 * np.pi * t / period)
    elif kind in (2, 3):
        g = rng.uniform(0.2, 0.5)
        y += g * t if kind == 2 else -g * t
    elif kind in (4, 5):
        x = rng.uniform(7.5, 20)
        t3 = rng.uniform(length / 3, 2 * length / 3)
        step = x * (t >= t3)
        y += step if kind == 4 else -step
    return y


def synthetic_control(n_per_class: int = 50, length: int = 60, seed: int = 0) -> LabeledDataset:
    """Six control-chart classes (labels "1".."6"), 60 points each by default."""
    rng = np.random.default_rng(seed)
    seqs, labels = [], []
    for c in range(len(CONTROL_CLASSES)):
        for _ in range(n_per_class):
            seqs.append(_control_series(c, rng, length))
            labels.append(c)
    return LabeledDataset(seqs, np.array(labels), [str(c + 1) for c in range(6)])


def _step(up: bool, length: int) -> np.ndarray:
    half = length // 2
    out = np.full(length, 5.0)
    out[:half] = -5.0
    return out if up else -out


def two_patterns(n: int = 1000, length: int = 128, seed: int = 0) -> LabeledDataset:
    """Four classes by the order of an upward and downward step in N(0,1) noise.

    Classes "1".."4" are down-down, up-down, down-up, up-up. Each step has a
    random length in [length/8, length/4] and the two steps do not overlap.
    """
    rng = np.random.default_rng(seed)
    lo, hi = length // 8, length // 4
    seqs, labels = [], []
    for i in range(n):
        c = int(rng.integers(4))
        first_up, second_up = bool(c & 1), bool(c & 2)
        l1, l2 = rng.integers(lo, hi + 1, size=2)
        t1 = int(rng.integers(0, length - l1 - l2 + 1))
        t2 = int(rng.integers(t1 + l1, length - l2 + 1))
        x = rng.standard_normal(length)
        x[t1:t1 + l1] = _step(first_up, int(l1))
        x[t2:t2 + l2] = _step(second_up, int(l2))
        seqs.append(x)
        labels.append(c)
    return LabeledDataset(seqs, np.array(labels), [str(c + 1) for c in range(4)])


# (generator, train kwargs, test kwargs) matching the archive split sizes
BENCHMARKS = {
    "SyntheticControl": (synthetic_control, dict(n_per_class=50, seed=1), dict(n_per_class=50, seed=2)),
    "TwoPatterns": (two_patterns, dict(n=1000, seed=1), dict(n=4000, seed=2)),
}


def _archive_file(root: Path, name: str, split: str) -> Path | None:
    for folder in (root / name, root):
        for suffix in (".tsv", ".txt", ""):
            path = folder / f"{name}_{split}{suffix}"
            if path.is_file():
                return path
    return None


def benchmark_split(name: str, root=None) -> tuple[LabeledDataset, LabeledDataset, str]:
    """Train and test splits of a benchmark plus a note on where they came from.

    Archive files under ``root`` (default: ``$SEQNCA_UCR_ROOT``) are used when
    present; otherwise both splits are regenerated with fixed seeds.
    """
    if name not in BENCHMARKS:
        raise KeyError(f"unknown benchmark {name!r}; expected one of {sorted(BENCHMARKS)}")
    root = root or os.environ.get("SEQNCA_UCR_ROOT")
    if root:
        train_path = _archive_file(Path(root), name, "TRAIN")
        test_path = _archive_file(Path(root), name, "TEST")
        if train_path and test_path:
            train = load_ucr(train_path)
            return train, load_ucr(test_path, train.classes), f"archive files under {root}"
    make, train_kw, test_kw = BENCHMARKS[name]
    return make(**train_kw), make(**test_kw), "regenerated"
