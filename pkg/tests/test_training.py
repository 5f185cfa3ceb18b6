import math

import numpy as np
import pytest

from mtal.config import ExperimentConfig
from mtal.encoding import EncoderConfig, HashingEncoder
from mtal.corpus import Sample
from mtal.reporting import report_to_dict, to_canonical_json
from mtal.synthetic import synthetic_vector_splits
from mtal.tasks import TaskTriple
from mtal.training import (
    PreparedSplit,
    evaluate_split,
    loss_weights_dynamic,
    loss_weights_equal,
    loss_weights_static,
    prepare_split,
    run_training,
)


def make_config(**run_overrides):
    payload = {
        "run": {
            "seed": 42,
            "batch_size": 16,
            "max_epochs": 4,
            "patience": 10,
            "lr": 1e-2,
            **run_overrides,
        },
        "encoder": {"dim": 128},
        "model": {"hidden": 8},
    }
    return ExperimentConfig.model_validate(payload)


@pytest.fixture(scope="module")
def small_splits():
    return synthetic_vector_splits(200, 60, 60, dim=128, seed=5, nnz=8)


class TestLossWeights:
    def test_equal(self):
        weights = loss_weights_equal()
        assert weights == TaskTriple(1 / 3, 1 / 3, 1 / 3)
        assert sum(weights) == pytest.approx(1.0, abs=1e-15)

    def test_equal_weighting_makes_total_the_mean(self):
        losses = TaskTriple(0.9, 0.3, 0.6)
        weights = loss_weights_equal()
        weighted_total = sum(w * l for w, l in zip(weights, losses))
        assert weighted_total == pytest.approx(sum(losses) / 3, abs=1e-15)

    def test_static_default_already_normalized(self):
        assert loss_weights_static(TaskTriple(0.7, 0.15, 0.15)) == TaskTriple(0.7, 0.15, 0.15)
        assert loss_weights_static(TaskTriple(0.5, 0.25, 0.25)) == TaskTriple(0.5, 0.25, 0.25)

    def test_static_normalizes(self):
        assert loss_weights_static(TaskTriple(7.0, 1.5, 1.5)) == pytest.approx(
            (0.7, 0.15, 0.15), abs=1e-12
        )

    def test_static_rejects_degenerate(self):
        with pytest.raises(ValueError):
            loss_weights_static(TaskTriple(0.0, 0.0, 0.0))
        with pytest.raises(ValueError):
            loss_weights_static(TaskTriple(-1.0, 1.0, 1.0))

    def test_dynamic_normalizes_losses(self):
        assert loss_weights_dynamic(TaskTriple(0.6, 0.3, 0.3)) == pytest.approx(
            (0.5, 0.25, 0.25), abs=1e-12
        )
        assert loss_weights_dynamic(TaskTriple(1.0, 0.0, 0.0)) == TaskTriple(1.0, 0.0, 0.0)

    def test_dynamic_equal_losses_give_equal_weights(self):
        assert loss_weights_dynamic(TaskTriple(0.4, 0.4, 0.4)) == pytest.approx(
            tuple(loss_weights_equal()), abs=1e-12
        )

    def test_dynamic_zero_losses_fall_back_to_equal(self):
        assert loss_weights_dynamic(TaskTriple(0.0, 0.0, 0.0)) == loss_weights_equal()


class TestPrepare:
    def test_prepare_split_encodes_in_order(self):
        samples = [
            Sample(id="a", raw_text="نص جميل", labels=TaskTriple(False, False, False)),
            Sample(id="b", raw_text="نص سيء 😡", labels=TaskTriple(True, False, False)),
        ]
        from mtal.textprep import EmojiPolicy

        split = prepare_split(samples, EmojiPolicy(), HashingEncoder(EncoderConfig(dim=512)))
        assert len(split) == 2
        assert split.labels[1].offensive is True
        assert split.features[0].dim == 512

    def test_misaligned_split_rejected(self):
        with pytest.raises(ValueError):
            PreparedSplit(features=[], labels=[TaskTriple(True, True, True)])


class TestBookkeeping:
    def test_cumulative_counts_follow_batch_arithmetic(self, small_splits):
        train, dev, test = small_splits
        cfg = make_config(k_selected=5, uncertainty_mode="equal", max_epochs=3)
        report, _ = run_training(cfg, train, dev, test)
        batches = math.ceil(len(train) / cfg.run.batch_size)
        assert report.cumulative_selected == batches * 5 * report.epochs_run
        for record in report.epochs:
            assert record.selected == batches * 5

    def test_none_mode_equals_k_all_counts(self, small_splits):
        train, dev, test = small_splits
        none_report, _ = run_training(cfg := make_config(uncertainty_mode="none", max_epochs=2), train, dev, test)
        all_report, _ = run_training(
            make_config(uncertainty_mode="equal", k_selected="all", max_epochs=2), train, dev, test
        )
        assert [r.selected for r in none_report.epochs] == [r.selected for r in all_report.epochs]
        assert none_report.epochs[0].selected == len(train)

    def test_short_final_batch_contributes_min_k_remainder(self):
        train, dev, test = synthetic_vector_splits(70, 20, 20, dim=128, seed=3, nnz=6)
        cfg = make_config(batch_size=32, k_selected=10, uncertainty_mode="equal", max_epochs=1)
        report, _ = run_training(cfg, train, dev, test)
        # batches of 32, 32, 6: the short batch contributes min(10, 6) = 6
        assert report.epochs[0].selected == 10 + 10 + 6

    def test_cumulative_is_running_sum(self, small_splits):
        train, dev, test = small_splits
        report, _ = run_training(make_config(k_selected=4, uncertainty_mode="weighted"), train, dev, test)
        running = 0
        for record in report.epochs:
            running += record.selected
            assert record.cumulative_selected == running


class TestDeterminism:
    def test_identical_runs_identical_reports(self, small_splits):
        train, dev, test = small_splits
        cfg = make_config(k_selected=5, uncertainty_mode="dynamic", loss_mode="dynamic")
        first, _ = run_training(cfg, train, dev, test)
        second, _ = run_training(cfg, train, dev, test)
        assert to_canonical_json(first) == to_canonical_json(second)

    def test_seed_changes_the_run(self, small_splits):
        train, dev, test = small_splits
        a, _ = run_training(make_config(k_selected=5, uncertainty_mode="equal"), train, dev, test)
        b, _ = run_training(make_config(k_selected=5, uncertainty_mode="equal", seed=7), train, dev, test)
        assert to_canonical_json(a) != to_canonical_json(b)


class TestSchedules:
    def test_dynamic_loss_weights_track_previous_epoch(self, small_splits):
        train, dev, test = small_splits
        cfg = make_config(loss_mode="dynamic", max_epochs=3)
        report, _ = run_training(cfg, train, dev, test)
        assert report.epochs[0].loss_weights == loss_weights_equal()
        for prev, record in zip(report.epochs, report.epochs[1:]):
            expected = loss_weights_dynamic(prev.train_loss)
            assert record.loss_weights == pytest.approx(tuple(expected), abs=1e-12)
            assert sum(record.loss_weights) == pytest.approx(1.0, abs=1e-12)
            assert min(record.loss_weights) >= 0

    def test_dynamic_uncertainty_weight_tracks_dev_f1(self, small_splits):
        from mtal.acquisition import dynamic_offensive_weight

        train, dev, test = small_splits
        cfg = make_config(uncertainty_mode="dynamic", k_selected=6, max_epochs=3)
        report, _ = run_training(cfg, train, dev, test)
        assert report.epochs[0].uncertainty_w_off == 2.0
        for prev, record in zip(report.epochs, report.epochs[1:]):
            assert record.uncertainty_w_off == pytest.approx(
                dynamic_offensive_weight(prev.dev_macro_f1.offensive), abs=1e-12
            )

    def test_static_weights_constant_over_epochs(self, small_splits):
        train, dev, test = small_splits
        cfg = make_config(loss_mode="static", max_epochs=2)
        report, _ = run_training(cfg, train, dev, test)
        for record in report.epochs:
            assert record.loss_weights == pytest.approx((0.7, 0.15, 0.15), abs=1e-12)

    def test_non_dynamic_w_off_is_null(self, small_splits):
        train, dev, test = small_splits
        report, _ = run_training(make_config(uncertainty_mode="equal", max_epochs=1), train, dev, test)
        assert report.epochs[0].uncertainty_w_off is None


class TestEarlyStopping:
    def test_best_epoch_has_max_dev_f1(self, small_splits):
        train, dev, test = small_splits
        cfg = make_config(max_epochs=12, patience=2, uncertainty_mode="equal", k_selected=8)
        report, _ = run_training(cfg, train, dev, test)
        dev_curve = [r.dev_macro_f1.offensive for r in report.epochs]
        assert report.best_dev_macro_f1_offensive == max(dev_curve)
        assert dev_curve[report.best_epoch] == max(dev_curve)

    def test_stops_after_patience_without_improvement(self, small_splits):
        train, dev, test = small_splits
        cfg = make_config(max_epochs=50, patience=2, uncertainty_mode="equal", k_selected=8)
        report, _ = run_training(cfg, train, dev, test)
        if report.stopped_early:
            dev_curve = [r.dev_macro_f1.offensive for r in report.epochs]
            best = max(dev_curve[: report.best_epoch + 1])
            tail = dev_curve[report.best_epoch + 1 :]
            assert len(tail) == cfg.run.patience
            assert all(f1 - best < 1e-6 for f1 in tail)

    def test_test_evaluation_uses_best_checkpoint(self, small_splits):
        train, dev, test = small_splits
        cfg = make_config(max_epochs=10, patience=3, uncertainty_mode="equal", k_selected=8)
        report, best_state = run_training(cfg, train, dev, test)
        assert evaluate_split(best_state, dev).offensive == pytest.approx(
            report.best_dev_macro_f1_offensive, abs=1e-12
        )
        assert report.test_macro_f1 == evaluate_split(best_state, test)


class TestConvergence:
    def test_learns_separable_data(self, small_splits):
        train, dev, test = small_splits
        cfg = make_config(max_epochs=20, patience=20, uncertainty_mode="none")
        report, _ = run_training(cfg, train, dev, test)
        assert report.best_dev_macro_f1_offensive >= 0.95


class TestEvaluation:
    def test_unlabeled_tasks_are_none(self):
        train, dev, test = synthetic_vector_splits(40, 12, 12, dim=128, seed=1, nnz=6)
        stripped = PreparedSplit(
            features=test.features,
            labels=[TaskTriple(l.offensive, None, None) for l in test.labels],
        )
        cfg = make_config(max_epochs=1)
        report, _ = run_training(cfg, train, dev, stripped)
        assert report.test_macro_f1.violent is None
        assert report.test_macro_f1.vulgar is None
        assert report.test_macro_f1.offensive is not None

    def test_empty_splits_rejected(self, small_splits):
        train, dev, test = small_splits
        empty = PreparedSplit(features=[], labels=[])
        with pytest.raises(ValueError):
            run_training(make_config(), empty, dev, test)
        with pytest.raises(ValueError):
            run_training(make_config(), train, empty, test)


class TestReportSerialization:
    def test_round_trip_shape(self, small_splits):
        train, dev, test = small_splits
        report, _ = run_training(make_config(max_epochs=2), train, dev, test)
        payload = report_to_dict(report)
        assert payload["schema_version"] == 1
        assert payload["split_sizes"] == {"train": 200, "dev": 60, "test": 60}
        assert len(payload["epochs"]) == payload["epochs_run"]
        assert set(payload["epochs"][0]) == {
            "epoch",
            "train_loss",
            "dev_macro_f1",
            "selected",
            "cumulative_selected",
            "loss_weights",
            "uncertainty_w_off",
        }
        assert payload["config"]["run"]["seed"] == 42
        assert len(payload["config_hash"]) == 64
