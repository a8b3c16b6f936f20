import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from seqnca.knn import NeighbourIndex, knn_classify, nn_accuracy
from seqnca.nca import EmbeddingSet

REF = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.5], [5.0, 5.0]])
LAB = np.array([0, 0, 1, 1])


def test_exact_match_k1():
    index = NeighbourIndex(REF, LAB)
    for q, c in zip(REF, LAB):
        assert knn_classify(index, q, 1) == c


def test_strict_majority():
    index = NeighbourIndex([[0.0], [1.0], [2.0]], [0, 0, 1])
    assert knn_classify(index, [1.9], 3) == 0


def test_vote_tie_goes_to_nearest_class():
    index = NeighbourIndex([[0.0], [1.0]], [0, 1])
    assert knn_classify(index, [0.4], 2) == 0
    assert knn_classify(index, [0.6], 2) == 1


def test_distance_tie_goes_to_lower_index():
    index = NeighbourIndex([[1.0], [-1.0]], [5, 7])
    order, d = index.query([0.0], 1)
    assert order[0, 0] == 0 and d[0, 0] == 1.0


def test_k_out_of_range_and_dim_mismatch():
    index = NeighbourIndex(REF, LAB)
    with pytest.raises(ValueError, match="k=5"):
        knn_classify(index, [0.0, 0.0], 5)
    with pytest.raises(ValueError, match="k=0"):
        knn_classify(index, [0.0, 0.0], 0)
    with pytest.raises(ValueError, match="dimension"):
        knn_classify(index, [0.0, 0.0, 0.0], 1)


def test_k_equals_n_returns_modal_class():
    index = NeighbourIndex([[0.0], [10.0], [11.0], [12.0]], [0, 1, 1, 1])
    assert knn_classify(index, [0.0], 4) == 1


def test_nn_accuracy_identical_sets():
    E = EmbeddingSet(np.random.default_rng(0).standard_normal((20, 3)), np.arange(20) % 4)
    assert nn_accuracy(E, E, 1) == 1.0


def test_nn_accuracy_separated_clusters():
    rng = np.random.default_rng(1)
    centres = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])

    def draw(n):
        c = np.arange(n) % 3
        direction = rng.standard_normal((n, 2))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        # intra-class radius <= 0.5, inter-centre gap 10 -> 20x
        return EmbeddingSet(centres[c] + direction * rng.uniform(0, 0.5, (n, 1)), c)

    assert nn_accuracy(draw(30), draw(60), 1) == 1.0
    assert nn_accuracy(draw(30), draw(60), 5) == 1.0


def test_nn_accuracy_empty():
    with pytest.raises(ValueError):
        nn_accuracy(EmbeddingSet(np.zeros((0, 2)), []), EmbeddingSet(REF, LAB))


points = st.integers(1, 15).flatmap(lambda N: st.tuples(
    arrays(np.float64, (N, 2), elements=st.floats(-100, 100)),
    arrays(np.int64, N, elements=st.integers(0, 3)),
    arrays(np.float64, 2, elements=st.floats(-100, 100)),
    st.integers(1, N)))


@given(points, arrays(np.float64, 2, elements=st.integers(-64, 64).map(float)))
def test_translation_invariance(case, shift):
    # integer shifts keep coordinates exact, so distances cannot change by rounding
    R, labels, q, k = case
    R, q = np.round(R * 64) / 64, np.round(q * 64) / 64
    a = knn_classify(NeighbourIndex(R, labels), q, k)
    b = knn_classify(NeighbourIndex(R + shift, labels), q + shift, k)
    assert a == b


@given(points)
def test_k1_is_argmin_of_explicit_distances(case):
    R, labels, q, _ = case
    d = [float(((r - q) ** 2).sum()) for r in R]
    assert knn_classify(NeighbourIndex(R, labels), q, 1) == labels[int(np.argmin(d))]
