"""Random hyperparameter search on a benchmark, scored by 1NN test accuracy.

    python scripts/run_search.py SyntheticControl --trials 50
"""
import argparse
import json
import time
from pathlib import Path

from seqnca.synthetic import BENCHMARKS, benchmark_split
from seqnca.trainer import random_search

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("benchmark", choices=sorted(BENCHMARKS))
    ap.add_argument("--space", type=Path, help="JSON search space (default: scripts/spaces/<name>.json)")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    space_path = args.space or HERE / "spaces" / f"{args.benchmark}.json"
    space = json.loads(space_path.read_text())
    train, test, source = benchmark_split(args.benchmark)
    print(f"{args.benchmark}: {len(train)} train / {len(test)} test ({source})", flush=True)

    out = args.out / args.benchmark
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    with (out / "trials.jsonl").open("w") as fh:
        def record(r):
            fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
            fh.flush()
            c = r.config
            m = r.metrics
            status = r.error or (f"train {m['train_accuracy']:.4f}  1nn {m['knn_test']:.4f}  "
                                 f"epochs {m['epochs']}")
            print(f"[{time.perf_counter() - start:7.1f}s] trial {r.trial:3d} {'lstm' if c.model_kind == 'lstm' else c.transfer_kind} "
                  f"h={c.hidden_count} m={c.embedding_dim} {c.pool_kind} {c.preprocess_scope} "
                  f"b={c.batch_size}: {status}", flush=True)

        best, results = random_search(space, args.trials, train, args.seed, test=test, k=args.k, on_trial=record)
    winner = next(r for r in results if r.config is best)
    summary = dict(winner.to_dict(), source=source, seconds=time.perf_counter() - start)
    (out / "best.json").write_text(json.dumps(summary, sort_keys=True, indent=1) + "\n")
    print(f"best by train accuracy: trial {winner.trial}, 1NN test accuracy {winner.metrics['knn_test']:.4f}")


if __name__ == "__main__":
    main()
