import time
import warnings
from dataclasses import asdict, replace

import numpy as np
import pytest

from conftest import random_instance
from oracles import fd_pipeline_grad, rel_error
from seqnca.data import LabeledDataset
from seqnca.models import RnnParams, init_rnn
from seqnca.synthetic import sine_waves
from seqnca.trainer import (TrainConfig, TrainingDiverged, batch_value_and_grad, embed_dataset, evaluate,
                            random_search, sample_config, train)

MICRO = dict(hidden_count=8, embedding_dim=2, max_epochs=60, patience=60)


def test_two_same_class_sequences_are_already_optimal():
    rng = np.random.default_rng(0)
    p = init_rnn(1, 4, 2, "tanh", rng)
    X = rng.standard_normal((2, 5, 1))
    value, grads = batch_value_and_grad(p, "mean", X, np.array([5, 5]), np.array([1, 1]))
    assert value == 2.0
    assert not grads.to_vector().any()


@pytest.mark.parametrize("kind,transfer,pool_kind", [
    ("rnn", "tanh", "sum"), ("rnn", "relu", "max"), ("lstm", "gates", "mean"), ("lstm", "gates", "max")])
def test_three_sequence_pipeline_gradient(kind, transfer, pool_kind):
    rng = np.random.default_rng(1)
    for _ in range(10):
        p, seqs, labels = random_instance(rng, kind, transfer, max_N=3)
        seqs, labels = seqs[:3], labels[:3]
        while len(seqs) < 3:
            seqs.append(rng.standard_normal((4, p.input_dim)))
            labels = np.append(labels, len(seqs) % 2)
        d = LabeledDataset(seqs, labels)
        X, lengths = d.padded()
        _, g = batch_value_and_grad(p, pool_kind, X, lengths, labels)
        fd = fd_pipeline_grad(kind, p.arrays(), seqs, labels, pool_kind, transfer)
        assert rel_error(g.to_vector(), fd).max() < 1e-4


def test_embed_zero_rnn_sum_pooling():
    H, m = 3, 2
    p = RnnParams(np.zeros((H, 1)), np.zeros((H, H)), np.zeros((m, H)), np.zeros(H), [0.5, -2.0], np.zeros(H))
    d = LabeledDataset([np.ones(4), np.ones(7)], [0, 1])
    E = embed_dataset(p, "sum", d).embeddings
    np.testing.assert_array_equal(E, [[2.0, -8.0], [3.5, -14.0]])


def test_embed_duplicates_identical_and_order_preserved():
    rng = np.random.default_rng(2)
    p = init_rnn(1, 5, 3, "tanh", rng)
    s = rng.standard_normal(9)
    d = LabeledDataset([s, rng.standard_normal(4), s], [0, 1, 0])
    E = embed_dataset(p, "max", d).embeddings
    assert np.array_equal(E[0], E[2]) and not np.array_equal(E[0], E[1])
    single = embed_dataset(p, "max", d.subset([1])).embeddings
    np.testing.assert_array_equal(single[0], E[1])


def test_embed_dimension_mismatch():
    p = init_rnn(2, 3, 2, "tanh", np.random.default_rng(0))
    with pytest.raises(ValueError, match="input dimension"):
        embed_dataset(p, "sum", LabeledDataset([np.ones(3)], [0]))


def test_embedding_cost_is_linear_in_length():
    rng = np.random.default_rng(3)
    p = init_rnn(1, 16, 4, "tanh", rng)
    short = LabeledDataset([rng.standard_normal(400) for _ in range(50)], np.zeros(50, int))
    long = LabeledDataset([rng.standard_normal(800) for _ in range(50)], np.zeros(50, int))

    def best_time(d):
        times = []
        for _ in range(5):
            t = time.perf_counter()
            embed_dataset(p, "mean", d)
            times.append(time.perf_counter() - t)
        return min(times)

    ratio = best_time(long) / best_time(short)
    assert 1.5 <= ratio <= 3.0


def test_evaluate_train_equals_test():
    d = sine_waves(12, seed=4)
    p = init_rnn(1, 6, 3, "tanh", np.random.default_rng(4))
    m = evaluate(p, "mean", d, d, 1)
    assert m["knn_test"] == 1.0
    assert 0.0 <= m["stochastic_train"] <= 1.0 and m["stochastic_train"] == m["stochastic_test"]


def test_untrained_knn_is_at_chance_on_shuffled_labels():
    rng = np.random.default_rng(5)
    train_d = LabeledDataset([rng.standard_normal(20) for _ in range(400)], rng.integers(0, 2, 400))
    test_d = LabeledDataset([rng.standard_normal(20) for _ in range(400)], rng.integers(0, 2, 400))
    p = init_rnn(1, 8, 4, "tanh", rng)
    assert abs(evaluate(p, "mean", train_d, test_d, 1)["knn_test"] - 0.5) <= 0.1


@pytest.mark.parametrize("kind", ["rnn", "lstm"])
def test_micro_dataset_is_learnable(kind):
    report = train(TrainConfig(model_kind=kind, **MICRO), sine_waves(20, seed=6))
    assert report.best.train_accuracy >= 0.95
    assert report.best.train_accuracy >= report.history[0].train_accuracy


def test_training_is_deterministic():
    config = TrainConfig(validation_fraction=0.2, batch_size=6, pool_kind="max", **MICRO)
    data = sine_waves(20, seed=7)
    a, b = train(config, data), train(config, data)
    strip = lambda r: [(e.epoch, e.objective, e.train_accuracy, e.val_accuracy) for e in r.history]
    assert strip(a) == strip(b)
    assert np.array_equal(a.params.to_vector(), b.params.to_vector())


def test_early_stopping_and_best_params():
    config = TrainConfig(hidden_count=4, embedding_dim=2, max_epochs=400, patience=5, validation_fraction=0.25)
    report = train(config, sine_waves(24, seed=8))
    assert len(report.history) <= config.max_epochs
    assert len(report.history) - 1 - report.best_epoch <= config.patience
    score = max(e.val_accuracy for e in report.history)
    assert report.best.val_accuracy == score
    val_best = report.best.val_accuracy
    assert val_best >= report.history[0].val_accuracy


def test_returned_params_are_best_epoch():
    config = TrainConfig(hidden_count=4, embedding_dim=2, max_epochs=8, patience=8)
    data = sine_waves(10, seed=9)
    report = train(config, data)
    E = embed_dataset(report.params, config.pool_kind, data)
    from seqnca.nca import stochastic_accuracy
    assert stochastic_accuracy(E.embeddings, E.labels) == pytest.approx(report.best.train_accuracy, rel=1e-12)


def test_divergence_guard():
    config = TrainConfig(optimizer="sgd", learning_rate=1e9, momentum=0.0, pool_kind="sum", max_epochs=50,
                         hidden_count=4, embedding_dim=2)
    with pytest.raises(TrainingDiverged):
        train(config, sine_waves(10, seed=10))


def test_single_class_warns():
    d = LabeledDataset([np.sin(np.arange(5) + i) for i in range(4)], [0, 0, 0, 0])
    with pytest.warns(RuntimeWarning, match="single class"):
        report = train(TrainConfig(hidden_count=2, embedding_dim=1, max_epochs=2), d)
    assert report.history[0].objective == 4.0


def test_gradient_clipping_bounds_first_step():
    config = TrainConfig(optimizer="sgd", learning_rate=1.0, momentum=0.0, clip_norm=1e-3, max_epochs=1,
                         hidden_count=3, embedding_dim=2)
    d = sine_waves(8, seed=11)
    from seqnca.trainer import init_params
    p0 = init_params(config, 1, np.random.default_rng(config.seed))
    p1 = train(config, d).params
    assert np.linalg.norm(p1.to_vector() - p0.to_vector()) <= 1e-3 + 1e-12


def test_config_validation():
    with pytest.raises(ValueError, match="batch_size"):
        TrainConfig(batch_size=1)
    with pytest.raises(ValueError, match="validation_fraction"):
        TrainConfig(validation_fraction=0.7)
    with pytest.raises(KeyError):
        TrainConfig.from_dict({"hidden": 3})
    assert TrainConfig.from_dict(asdict(TrainConfig(hidden_count=3))).hidden_count == 3


SPACE = {"hidden_count": [2, 4], "pool_kind": ["sum", "mean", "max"], "step_init": {"low": 1e-3, "high": 0.1,
         "log": True}, "embedding_dim": 2, "max_epochs": 5}


def test_random_search_single_trial():
    best, results = random_search(SPACE, 1, sine_waves(10, seed=12), seed=3)
    assert len(results) == 1 and results[0].config is best and results[0].error is None


def test_random_search_is_deterministic_and_respects_fixed_values():
    d = sine_waves(10, seed=13)
    a = random_search(SPACE, 4, d, seed=5)[1]
    b = random_search(SPACE, 4, d, seed=5)[1]
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]
    assert all(r.config.embedding_dim == 2 and r.config.max_epochs == 5 for r in a)
    assert all(1e-3 <= r.config.step_init <= 0.1 for r in a)


def test_random_search_picks_best_train_accuracy_and_records_failures():
    d = sine_waves(10, seed=14)
    space = dict(SPACE, optimizer=["sgd", "rprop"], learning_rate=1e9, momentum=0.0)
    best, results = random_search(space, 6, d, seed=1)
    ok = [r for r in results if r.error is None]
    assert any(r.error for r in results) and ok
    assert max(r.metrics["train_accuracy"] for r in ok) == next(r for r in ok if r.config is best).metrics[
        "train_accuracy"]


def test_sample_config_rejects_unknown_keys():
    with pytest.raises(KeyError):
        sample_config({"nonsense": [1]}, np.random.default_rng(0))


def test_lstm_as_a_transfer_choice():
    configs = [sample_config({"transfer_kind": ["tanh", "lstm"]}, np.random.default_rng(s)) for s in range(20)]
    kinds = {(c.model_kind, c.transfer_kind) for c in configs}
    assert kinds == {("rnn", "tanh"), ("lstm", "tanh")}
