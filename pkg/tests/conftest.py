import numpy as np
import pytest
from hypothesis import settings

from seqnca.models import init_lstm, init_rnn

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_instance(rng, kind, transfer="tanh", max_hidden=8, max_T=10, max_N=6):
    """Toy model, variable-length batch and binary labels for gradient checks."""
    n = int(rng.integers(1, 4))
    H = int(rng.integers(1, max_hidden + 1))
    m = int(rng.integers(1, 5))
    N = int(rng.integers(2, max_N + 1))
    T = int(rng.integers(1, max_T + 1))
    if kind == "rnn":
        p = init_rnn(n, H, m, transfer, rng)
    else:
        p = init_lstm(n, H, m, rng)
    p = p.with_vector(rng.uniform(-1, 1, p.size))
    seqs = [rng.standard_normal((int(rng.integers(1, T + 1)), n)) for _ in range(N)]
    labels = rng.integers(0, 2, N)
    return p, seqs, labels


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record a one-line PASS/FAIL verdict, echoed in the terminal summary."""
    def record(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
        _VERDICTS.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
