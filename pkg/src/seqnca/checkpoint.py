"""Versioned JSON checkpoints for trained embedding models.

Arrays are stored flat with their shape. Python's float repr round-trips
exactly, so save -> load -> save reproduces the file byte for byte.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .data import PreprocessMode, PreprocessStats
from .models import params_from_arrays
from .trainer import EmbeddingModel, TrainConfig

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def _array(a: np.ndarray) -> dict:
    return {"shape": list(a.shape), "data": [float(v) for v in a.ravel()]}


def _unarray(d: dict, name: str) -> np.ndarray:
    try:
        return np.array(d["data"], dtype=np.float64).reshape(d["shape"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed array {name!r} in checkpoint: {exc}") from None


def to_document(model: EmbeddingModel, config: TrainConfig | None = None) -> dict:
    stats = model.preprocess_stats
    return {
        "format_version": FORMAT_VERSION,
        "model_kind": model.params.kind,
        "transfer_kind": model.params.transfer_kind,
        "pool_kind": model.pool_kind,
        "params": {name: _array(a) for name, a in model.params.arrays().items()},
        "preprocess": {
            "scope": model.preprocess_mode.scope,
            "center": model.preprocess_mode.center,
            "whiten": model.preprocess_mode.whiten,
            "mean": None if stats.mean is None else _array(stats.mean),
            "std": None if stats.std is None else _array(stats.std),
        },
        "classes": list(model.classes),
        "config": None if config is None else config.to_dict(),
    }


def dumps(model: EmbeddingModel, config: TrainConfig | None = None) -> str:
    return json.dumps(to_document(model, config), sort_keys=True, indent=1) + "\n"


def save(path, model: EmbeddingModel, config: TrainConfig | None = None) -> None:
    Path(path).write_text(dumps(model, config), encoding="utf-8")


def from_document(doc: dict) -> tuple[EmbeddingModel, TrainConfig | None]:
    if not isinstance(doc, dict):
        raise CheckpointError("checkpoint must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format version {version!r} "
                              f"(this build reads version {FORMAT_VERSION})")
    try:
        arrays = {name: _unarray(a, name) for name, a in doc["params"].items()}
        params = params_from_arrays(doc["model_kind"], arrays, doc.get("transfer_kind"))
        pre = doc["preprocess"]
        mode = PreprocessMode(pre["scope"], bool(pre["center"]), bool(pre["whiten"]))
        stats = PreprocessStats(
            mean=None if pre["mean"] is None else _unarray(pre["mean"], "mean"),
            std=None if pre["std"] is None else _unarray(pre["std"], "std"),
        )
        model = EmbeddingModel(params, doc["pool_kind"], mode, stats, list(doc["classes"]))
        config = None if doc.get("config") is None else TrainConfig.from_dict(doc["config"])
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"invalid checkpoint: {type(exc).__name__}: {exc}") from None
    return model, config


def load(path) -> tuple[EmbeddingModel, TrainConfig | None]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    return from_document(doc)
