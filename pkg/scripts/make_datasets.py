"""Write the benchmark splits as UCR text files for use with the CLI.

    python scripts/make_datasets.py data/
"""
import argparse
from pathlib import Path

from seqnca.data import save_ucr
from seqnca.synthetic import BENCHMARKS, benchmark_split, sine_waves


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("out", type=Path)
    args = ap.parse_args()
    for name in sorted(BENCHMARKS):
        folder = args.out / name
        folder.mkdir(parents=True, exist_ok=True)
        train, test, source = benchmark_split(name)
        save_ucr(train, folder / f"{name}_TRAIN.txt")
        save_ucr(test, folder / f"{name}_TEST.txt")
        print(f"{folder}: {len(train)} train / {len(test)} test ({source})")
    folder = args.out / "SineMicro"
    folder.mkdir(parents=True, exist_ok=True)
    save_ucr(sine_waves(20, seed=0), folder / "SineMicro_TRAIN.txt")
    save_ucr(sine_waves(20, seed=1), folder / "SineMicro_TEST.txt")
    print(f"{folder}: 20 train / 20 test")


if __name__ == "__main__":
    main()
