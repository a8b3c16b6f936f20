import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from seqnca.data import (DataError, LabeledDataset, PreprocessMode, load_ucr, make_batches, preprocess,
                         save_ucr, stratified_split)
from seqnca.synthetic import sine_waves, synthetic_control, two_patterns


def write(tmp_path, text, name="d.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_single_line(tmp_path):
    d = load_ucr(write(tmp_path, "1,0.5,0.6,0.7\n"))
    assert d.classes == ["1"] and d.labels.tolist() == [0]
    np.testing.assert_array_equal(d.sequences[0], [[0.5], [0.6], [0.7]])


def test_first_appearance_densification(tmp_path):
    d = load_ucr(write(tmp_path, "3,1,2\n1,3,4\n3,5,6\n"))
    assert d.labels.tolist() == [0, 1, 0] and d.classes == ["3", "1"]


def test_whitespace_and_float_labels(tmp_path):
    d = load_ucr(write(tmp_path, "  2.0000000e+00   1.5  2.5\n\n1.0000000e+00 0 1\n"))
    assert d.classes == ["2", "1"] and len(d) == 2


def test_class_map_reused_for_test_split(tmp_path):
    train = load_ucr(write(tmp_path, "a,1,2\nb,3,4\n", "tr.txt"))
    test = load_ucr(write(tmp_path, "b,1,2\nc,3,4\na,0,0\n", "te.txt"), classes=train.classes)
    assert test.labels.tolist() == [1, 2, 0] and test.classes == ["a", "b", "c"]


def test_unlabeled_marker(tmp_path):
    d = load_ucr(write(tmp_path, "?,1,2\n1,3,4\n"))
    assert d.labels.tolist() == [-1, 0]


def test_errors(tmp_path):
    with pytest.raises(DataError, match="missing.txt"):
        load_ucr(tmp_path / "missing.txt")
    with pytest.raises(DataError, match=r":2: column 3"):
        load_ucr(write(tmp_path, "1,1,2\n1,1,x\n"))
    with pytest.raises(DataError, match="ragged"):
        load_ucr(write(tmp_path, "1,1,2\n1,1,2,3\n"))
    with pytest.raises(DataError, match="no sequences"):
        load_ucr(write(tmp_path, "\n\n"))


@given(st.lists(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=3, max_size=3),
                min_size=1, max_size=5))
def test_save_load_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("rt") / "x.txt"
    d = LabeledDataset([np.array(r) for r in rows], np.arange(len(rows)) % 2, ["7", "9"])
    save_ucr(d, path)
    back = load_ucr(path)
    for a, b in zip(d.sequences, back.sequences):
        assert np.array_equal(a, b)
    assert [back.classes[c] for c in back.labels] == [d.classes[c] for c in d.labels]


def test_preprocess_examples():
    d = LabeledDataset([np.array([1.0, 2.0, 3.0])], [0])
    out, _ = preprocess(d, PreprocessMode("per_sequence", center=True))
    np.testing.assert_array_equal(out.sequences[0][:, 0], [-1, 0, 1])
    d = LabeledDataset([np.array([0.0, 2.0])], [0])
    out, _ = preprocess(d, PreprocessMode("per_sequence", center=True, whiten=True))
    np.testing.assert_array_equal(out.sequences[0][:, 0], [-1, 1])


def test_global_stats_come_from_train():
    train = LabeledDataset([np.array([0.0, 2.0]), np.array([4.0, 6.0])], [0, 1])
    test = LabeledDataset([np.array([5.0, 5.0])], [0])
    mode = PreprocessMode("global", center=True, whiten=True)
    _, stats = preprocess(train, mode)
    assert stats.mean[0] == 3.0 and stats.std[0] == np.sqrt(5.0)
    out, _ = preprocess(test, mode, stats)
    np.testing.assert_allclose(out.sequences[0][:, 0], (5.0 - 3.0) / np.sqrt(5.0))


def test_zero_std_warns_and_divides_by_one():
    d = LabeledDataset([np.array([2.0, 2.0])], [0])
    with pytest.warns(RuntimeWarning, match="zero standard deviation"):
        out, stats = preprocess(d, PreprocessMode("per_sequence", center=True, whiten=True))
    np.testing.assert_array_equal(out.sequences[0], 0.0)
    assert stats.warnings


def test_preprocess_none_is_identity():
    d = sine_waves(4)
    out, _ = preprocess(d, PreprocessMode("none", center=True))
    assert out is d


def test_bad_scope():
    with pytest.raises(ValueError):
        PreprocessMode("batch")


seq_lists = st.lists(st.lists(st.floats(-1e4, 1e4), min_size=1, max_size=20), min_size=1, max_size=6)


@given(seq_lists)
def test_per_sequence_centering(rows):
    d = LabeledDataset([np.array(r) for r in rows], np.zeros(len(rows), dtype=int))
    mode = PreprocessMode("per_sequence", center=True)
    out, _ = preprocess(d, mode)
    for s, r in zip(out.sequences, rows):
        assert abs(s.mean()) <= 1e-10 * max(1.0, max(abs(v) for v in r))
    twice, _ = preprocess(out, mode)
    for a, b in zip(out.sequences, twice.sequences):
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-10 * max(1.0, np.abs(a).max()))


def test_make_batches_examples():
    assert [b.size for b in make_batches(5, 2, 0)] == [2, 3]
    assert [b.size for b in make_batches(1000, 1000, 0)] == [1000]
    a, b = make_batches(37, 8, 123), make_batches(37, 8, 123)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    with pytest.raises(ValueError):
        make_batches(10, 1, 0)


@given(st.integers(2, 300), st.integers(2, 64), st.integers(0, 2**32 - 1))
def test_batches_cover_everything_once(n, size, seed):
    batches = make_batches(n, size, seed)
    allidx = np.concatenate(batches)
    assert sorted(allidx.tolist()) == list(range(n))
    assert all(b.size >= 2 for b in batches)


def test_stratified_split():
    labels = np.repeat([0, 1, 2], 10)
    keep, held = stratified_split(labels, 0.2, 0)
    assert held.size == 6 and np.bincount(labels[held]).tolist() == [2, 2, 2]
    assert np.intersect1d(keep, held).size == 0 and keep.size + held.size == 30


def test_variable_length_padding():
    d = LabeledDataset([np.ones(3), np.ones(5)], [0, 1])
    X, lengths = d.padded()
    assert X.shape == (2, 5, 1) and lengths.tolist() == [3, 5] and not X[0, 3:].any()


def test_synthetic_control_shape():
    d = synthetic_control(seed=1)
    assert len(d) == 300 and d.n_classes == 6 and set(d.lengths) == {60}
    assert np.bincount(d.labels).tolist() == [50] * 6
    # increasing trend ends higher than the decreasing one on average
    ends = np.array([s[-10:, 0].mean() for s in d.sequences])
    assert ends[d.labels == 2].mean() > ends[d.labels == 3].mean() + 10


def test_two_patterns_shape():
    d = two_patterns(200, seed=2)
    assert len(d) == 200 and d.n_classes == 4 and set(d.lengths) == {128}
    vals = np.concatenate(d.sequences)
    assert np.sum(np.abs(vals) == 5.0) > 0.1 * vals.size


def test_generators_are_seeded():
    a, b = synthetic_control(seed=3), synthetic_control(seed=3)
    assert all(np.array_equal(x, y) for x, y in zip(a.sequences, b.sequences))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sine_waves(6, seed=1)


def test_benchmark_split_prefers_archive_files(tmp_path):
    from seqnca.synthetic import benchmark_split
    train, test, source = benchmark_split("SyntheticControl", root=tmp_path)
    assert source == "regenerated" and len(train) == len(test) == 300
    folder = tmp_path / "SyntheticControl"
    folder.mkdir()
    (folder / "SyntheticControl_TRAIN.tsv").write_text("2\t1.0\t2.0\n1\t0.5\t0.5\n")
    (folder / "SyntheticControl_TEST.tsv").write_text("1\t0.0\t1.0\n")
    train, test, source = benchmark_split("SyntheticControl", root=tmp_path)
    assert "archive" in source and train.classes == ["2", "1"] and test.labels.tolist() == [1]
