import numpy as np
import pytest

from crosslearn import rng
from crosslearn.data import Dataset
from crosslearn.errors import ValidationError
from crosslearn.harness import _split_for_transfer
from crosslearn.models import ModelSpec
from crosslearn.synth import sample_dataset, spec_pair
from crosslearn.transfer import naive_pool_transfer, run_method, tradaboost

from conftest import flip_labels

BASE = ModelSpec("logreg")


def make_split(c=1.0, seed=0, n=200, per_class=15, test_n=1000):
    """30 target training rows, the full 200-row source, and an
    independently drawn target test set."""
    t_spec, s_spec = spec_pair("probit", c, seed=seed)
    target = sample_dataset(t_spec, n, seed=rng.derive(seed, 1))
    source = sample_dataset(s_spec, n, seed=rng.derive(seed, 2))
    train, _ = _split_for_transfer(target, per_class, rng.derive(seed, 3))
    test = sample_dataset(t_spec, test_n, seed=rng.derive(seed, 4))
    return train, source, test


class TestNaivePooling:
    def test_identical_distribution_usually_helps(self):
        wins = 0
        for rep in range(20):
            train, source, test = make_split(c=1.0, seed=rep)
            out = naive_pool_transfer(BASE, train, source, test)
            wins += out.beat_baseline
        assert wins >= 16

    def test_flipped_source_usually_hurts(self):
        wins = 0
        for rep in range(20):
            train, source, test = make_split(c=1.0, seed=rep)
            out = naive_pool_transfer(BASE, train, flip_labels(source), test)
            wins += out.beat_baseline
        assert wins <= 4

    def test_empty_source_equals_baseline(self):
        train, _, test = make_split(seed=5)
        out = naive_pool_transfer(BASE, train, None, test)
        assert out.test_error == out.baseline_error
        assert not out.beat_baseline

    def test_shape_mismatch_rejected(self):
        train, source, test = make_split(seed=1)
        bad = Dataset(source.features[:, :5], source.labels, source.task)
        with pytest.raises(ValidationError):
            naive_pool_transfer(BASE, train, bad, test)


class TestTradaboost:
    def test_smoke_two_rounds(self):
        train, source, test = make_split(seed=2)
        out = tradaboost(BASE, train, source, test, rounds=2, seed=0)
        assert out.method == "tradaboost"
        assert 0.0 <= out.test_error <= 1.0
        assert out.beat_baseline == (out.test_error < out.baseline_error)

    def test_deterministic(self):
        train, source, test = make_split(seed=3)
        a = tradaboost(BASE, train, source, test, rounds=6, seed=4)
        b = tradaboost(BASE, train, source, test, rounds=6, seed=4)
        assert a == b

    def test_empty_source_equals_baseline(self):
        train, _, test = make_split(seed=6)
        out = tradaboost(BASE, train, None, test, rounds=4, seed=0)
        assert out.test_error == out.baseline_error

    def test_close_to_naive_when_source_is_duplicated_target(self):
        train, _, test = make_split(seed=7)
        dup = Dataset(np.vstack([train.features] * 3),
                      np.concatenate([train.labels] * 3), train.task)
        boosted = tradaboost(BASE, train, dup, test, rounds=10, seed=1)
        naive = naive_pool_transfer(BASE, train, dup, test)
        assert abs(boosted.test_error - naive.test_error) <= 0.05

    def test_adversarial_source_loses_weight_mass(self):
        from crosslearn.transfer import _tradaboost_rounds

        # A flipped source small enough that boosting rounds complete; its
        # consistently misclassified rows shrink every round while target
        # weights only grow, so the source mass fraction must drop.
        train, source, test = make_split(seed=8, per_class=50)
        flipped = flip_labels(Dataset(source.features[:60],
                                      source.labels[:60], source.task))
        learners, _, w, is_target = _tradaboost_rounds(
            BASE, train, flipped, rounds=8, seed=2)
        assert learners, "boosting stopped before any update"
        initial_source_mass = flipped.n / (flipped.n + train.n)
        assert w[~is_target].sum() < initial_source_mass

    def test_overwhelming_adversarial_source_early_stops(self):
        train, source, test = make_split(seed=8)
        out = tradaboost(BASE, train, flip_labels(source), test,
                         rounds=8, seed=2)
        # early stop with no usable learners falls back to the baseline
        assert out.test_error == out.baseline_error

    def test_rounds_validation(self):
        train, source, test = make_split(seed=9)
        with pytest.raises(ValidationError):
            tradaboost(BASE, train, source, test, rounds=1)

    def test_non_binary_rejected(self):
        t_spec, s_spec = spec_pair("fourclass", 0.5, seed=1)
        target = sample_dataset(t_spec, 200, seed=1)
        source = sample_dataset(s_spec, 200, seed=2)
        train, test = _split_for_transfer(target, 30, 0)
        with pytest.raises(ValidationError):
            tradaboost(ModelSpec("mlogreg"), train, source, test, rounds=4)


class TestWeightUpdateDirections:
    def test_source_shrinks_target_grows(self):
        # n_s >= 2 makes the source multiplier strictly below one
        import math
        n_s, rounds = 200, 10
        beta = 1.0 / (1.0 + math.sqrt(2.0 * math.log(n_s) / rounds))
        assert beta < 1.0
        eps_t = 0.3
        beta_t = eps_t / (1.0 - eps_t)
        assert 1.0 / beta_t > 1.0


def test_run_method_dispatch():
    train, source, test = make_split(seed=10)
    assert run_method("naive", BASE, train, source, test).method == "naive"
    with pytest.raises(ValidationError):
        run_method("mystery", BASE, train, source, test)
