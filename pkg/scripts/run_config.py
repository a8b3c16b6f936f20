"""Train one config on a benchmark and report stochastic and 1NN accuracy.

    python scripts/run_config.py TwoPatterns
"""
import argparse
import json
import time
from pathlib import Path

from seqnca.synthetic import BENCHMARKS, benchmark_split
from seqnca.trainer import TrainConfig, evaluate, train

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("benchmark", choices=sorted(BENCHMARKS))
    ap.add_argument("--config", type=Path, help="JSON config (default: scripts/configs/<name>.json)")
    ap.add_argument("--k", type=int, default=1)
    args = ap.parse_args()

    config = TrainConfig.from_dict(json.loads((args.config or HERE / "configs" / f"{args.benchmark}.json").read_text()))
    train_data, test_data, source = benchmark_split(args.benchmark)
    print(f"{args.benchmark}: {len(train_data)} train / {len(test_data)} test ({source})", flush=True)
    start = time.perf_counter()

    def progress(r):
        print(f"epoch {r.epoch:3d}  O {r.objective:9.3f}  train {r.train_accuracy:.4f}  "
              f"[{time.perf_counter() - start:.0f}s]", flush=True)

    report = train(config, train_data, on_epoch=progress)
    model = report.model()
    metrics = evaluate(report.params, config.pool_kind, model.prepare(train_data), model.prepare(test_data), args.k)
    print(json.dumps(dict(metrics, best_epoch=report.best_epoch, seconds=time.perf_counter() - start),
                     sort_keys=True))


if __name__ == "__main__":
    main()
