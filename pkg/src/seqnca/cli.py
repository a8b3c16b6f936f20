"""Command-line interface: ``seqnca {train,embed,classify,eval,search}``.

Standard output carries only machine-readable results; diagnostics go to
standard error. Exit codes:

    0  success
    2  config or search-space error
    3  data error (unreadable, malformed)
    4  training diverged
    5  checkpoint and data dimensions disagree
    6  k out of range
    7  output path exists (use --force)
    8  unreadable or incompatible checkpoint
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import checkpoint
from .data import UNLABELED, DataError, LabeledDataset, load_ucr
from .knn import NeighbourIndex
from .nca import stochastic_accuracy
from .trainer import TrainConfig, TrainingDiverged, random_search, sample_config, train

log = logging.getLogger("seqnca")

EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGED, EXIT_DIM, EXIT_K, EXIT_EXISTS, EXIT_CHECKPOINT = 2, 3, 4, 5, 6, 7, 8


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fmt(x: float) -> str:
    return "%.17g" % x


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _read_json(path, what: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(EXIT_CONFIG, f"cannot read {what} file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_CONFIG, f"{what} file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise CliError(EXIT_CONFIG, f"{what} file {path} must contain a JSON object")
    return doc


def _load_config(path, seed) -> TrainConfig:
    doc = {} if path is None else _read_json(path, "config")
    if seed is not None:
        doc["seed"] = seed
    try:
        return TrainConfig.from_dict(doc)
    except KeyError as exc:
        raise CliError(EXIT_CONFIG, f"unknown config key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_CONFIG, f"invalid config: {exc}") from None


def _load_data(path, classes=None) -> LabeledDataset:
    try:
        return load_ucr(path, classes)
    except DataError as exc:
        raise CliError(EXIT_DATA, str(exc)) from None


def _load_checkpoint(path):
    try:
        return checkpoint.load(path)
    except checkpoint.CheckpointError as exc:
        raise CliError(EXIT_CHECKPOINT, str(exc)) from None


def _check_dims(model, data: LabeledDataset, path) -> None:
    if data.input_dim != model.params.input_dim:
        raise CliError(EXIT_DIM, f"{path} has input dimension {data.input_dim}, "
                                 f"checkpoint expects {model.params.input_dim}")


def _embed(model, data, path):
    _check_dims(model, data, path)
    return model.embed(data)


def _out_path(path, force: bool) -> Path:
    path = Path(path)
    if path.exists() and not force:
        raise CliError(EXIT_EXISTS, f"output {path} exists; pass --force to overwrite")
    return path


def cmd_train(args) -> int:
    config = _load_config(args.config, args.seed)
    data = _load_data(args.data)
    out = _out_path(args.out, args.force)

    def emit(rec):
        print(_dumps({"epoch": rec.epoch, "objective": rec.objective, "train_accuracy": rec.train_accuracy,
                      "val_accuracy": rec.val_accuracy, "meta": {"seconds": rec.seconds}}), flush=True)

    try:
        report = train(config, data, on_epoch=emit)
    except TrainingDiverged as exc:
        raise CliError(EXIT_DIVERGED, f"training diverged: {exc}") from None
    except ValueError as exc:
        raise CliError(EXIT_DATA, f"cannot train on {args.data}: {exc}") from None
    checkpoint.save(out, report.model(), config)
    best = report.best
    print(_dumps({"report": {"best_epoch": report.best_epoch, "epochs": len(report.history),
                             "train_accuracy": best.train_accuracy, "val_accuracy": best.val_accuracy}}))
    log.info("wrote %s (best epoch %d)", out, report.best_epoch)
    return 0


def cmd_embed(args) -> int:
    model, _ = _load_checkpoint(args.checkpoint)
    data = _load_data(args.data, model.classes)
    out = _out_path(args.out, args.force)
    E = _embed(model, data, args.data)
    lines = [",".join(["id", "label"] + [f"e{j}" for j in range(E.dim)])]
    for i, (row, lab) in enumerate(zip(E.embeddings, data.labels)):
        lines.append(",".join([str(i), str(int(lab))] + [_fmt(v) for v in row]))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _index(model, path):
    train_data = _load_data(path, model.classes)
    labelled = train_data.labels != UNLABELED
    train_data = train_data.subset(np.flatnonzero(labelled))
    E = _embed(model, train_data, path)
    return train_data, NeighbourIndex(E.embeddings, E.labels)


def _check_k(k: int, index: NeighbourIndex) -> None:
    if not 1 <= k <= len(index):
        raise CliError(EXIT_K, f"--k {k} out of range: the reference set has {len(index)} sequences")


def cmd_classify(args) -> int:
    model, _ = _load_checkpoint(args.checkpoint)
    train_data, index = _index(model, args.train_data)
    _check_k(args.k, index)
    queries = _load_data(args.data, train_data.classes)
    Q = _embed(model, queries, args.data).embeddings
    pred = index.classify(Q, args.k)
    _, d = index.query(Q, 1)
    for i, (c, dist) in enumerate(zip(pred, d[:, 0])):
        print(f"{i},{train_data.classes[c]},{_fmt(float(np.sqrt(dist)))}")
    return 0


def cmd_eval(args) -> int:
    model, _ = _load_checkpoint(args.checkpoint)
    train_data, index = _index(model, args.train_data)
    _check_k(args.k, index)
    test = _load_data(args.test_data, train_data.classes)
    test = test.subset(np.flatnonzero(test.labels != UNLABELED))
    E_test = _embed(model, test, args.test_data)
    if len(index) < 2 or len(E_test) < 2:
        raise CliError(EXIT_DATA, "eval needs at least two labelled sequences per split")
    metrics = {
        "stochastic_train": stochastic_accuracy(index.ref.embeddings, index.ref.labels),
        "stochastic_test": stochastic_accuracy(E_test.embeddings, E_test.labels),
        "knn_test": float(np.mean(index.classify(E_test.embeddings, args.k) == E_test.labels)),
    }
    print(_dumps(metrics))
    return 0


def cmd_search(args) -> int:
    space = _read_json(args.config, "search space")
    try:
        sample_config(space, np.random.default_rng(0))
    except KeyError as exc:
        raise CliError(EXIT_CONFIG, f"unknown search space key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_CONFIG, f"invalid search space: {exc}") from None
    if args.trials < 1:
        raise CliError(EXIT_CONFIG, "--trials must be at least 1")
    data = _load_data(args.data)
    test = None if args.test_data is None else _load_data(args.test_data, data.classes)
    out = Path(args.out)
    if out.exists() and any(out.iterdir()) and not args.force:
        raise CliError(EXIT_EXISTS, f"output directory {out} is not empty; pass --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)
    trials_path = out / "trials.jsonl"
    with trials_path.open("w", encoding="utf-8") as fh:
        def record(result):
            fh.write(_dumps(result.to_dict()) + "\n")
            fh.flush()
            status = result.error or {k: round(v, 4) for k, v in result.metrics.items()}
            log.info("trial %d: %s", result.trial, status)

        best, results = random_search(space, args.trials, data, args.seed, test=test, k=args.k,
                                      select_by=args.select_by, on_trial=record)
    winner = next(r for r in results if r.config is best)
    (out / "best.json").write_text(json.dumps(winner.to_dict(), sort_keys=True, indent=1) + "\n", encoding="utf-8")
    print(_dumps(winner.to_dict()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seqnca", description=__doc__.split("\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a model and write a checkpoint")
    t.add_argument("--config", help="JSON file of training config keys (defaults if omitted)")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--seed", type=int)
    t.add_argument("--force", action="store_true")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("embed", help="write embeddings of a dataset as CSV")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--force", action="store_true")
    e.set_defaults(func=cmd_embed)

    c = sub.add_parser("classify", help="kNN-classify query sequences against a training set")
    c.add_argument("--checkpoint", required=True)
    c.add_argument("--train-data", required=True)
    c.add_argument("--data", required=True, help="query sequences")
    c.add_argument("--k", type=int, default=1)
    c.set_defaults(func=cmd_classify)

    v = sub.add_parser("eval", help="stochastic and kNN accuracy as JSON")
    v.add_argument("--checkpoint", required=True)
    v.add_argument("--train-data", required=True)
    v.add_argument("--test-data", required=True)
    v.add_argument("--k", type=int, default=1)
    v.set_defaults(func=cmd_eval)

    s = sub.add_parser("search", help="random hyperparameter search")
    s.add_argument("--config", required=True, help="JSON search space")
    s.add_argument("--data", required=True)
    s.add_argument("--test-data", help="also report test metrics per trial")
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--select-by", default="train_accuracy", choices=["train_accuracy", "val_accuracy"])
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=cmd_search)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"seqnca {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
