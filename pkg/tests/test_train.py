"""Training loop behavior on a small, trivially separable dataset."""

import numpy as np
import pytest

from xraybench import data, train
from xraybench.errors import InvalidArgument, StateError
from xraybench.nn import CnnModel
from xraybench.optim import AdamWConfig


def separable_bundle(n_train=24, n_val=8, n_test=8, seed=0):
    """Dark frames for class 0, bright for class 1; splits pre-assigned."""
    rng = np.random.default_rng(seed)
    records = []
    frames = []
    for split, n in (("train", n_train), ("val", n_val), ("test", n_test)):
        for i in range(n):
            label = i % 2
            base = 200 if label else 40
            records.append(
                data.Record(id=f"{split}{i:03d}", label=label, split=split)
            )
            frames.append(
                np.clip(
                    rng.normal(base, 10, size=(64, 64)), 0, 255
                ).astype(np.uint8)
            )
    return data.DatasetBundle(
        width=64, height=64, source="toy",
        records=records, frames=np.stack(frames),
    )


def quick_config(**kw):
    base = dict(seed=0, epochs=3, batch_size=8, augment=None)
    base.update(kw)
    return train.TrainConfig(**base)


class TestTrainModel:
    def test_learns_separable_data(self):
        result = train.train_model(separable_bundle(), quick_config(epochs=5))
        losses = [h[1] for h in result.history]
        aucs = [h[2] for h in result.history]
        assert losses[-1] < losses[0]
        assert result.best_val_auc == max(aucs)
        assert aucs[-1] > 0.9

    def test_history_covers_every_epoch(self):
        result = train.train_model(separable_bundle(), quick_config())
        assert [h[0] for h in result.history] == [1, 2, 3]

    def test_best_epoch_is_earliest_maximum(self):
        result = train.train_model(separable_bundle(), quick_config(epochs=6))
        aucs = [h[2] for h in result.history]
        first_best = 1 + aucs.index(max(aucs))
        assert result.best_epoch == first_best

    def test_two_runs_are_bit_identical(self):
        bundle = separable_bundle()
        config = quick_config(epochs=2, augment=data.AugmentConfig())
        a = train.train_model(bundle, config)
        b = train.train_model(bundle, config)
        assert a.history == b.history
        for name, t in a.best_params.items():
            assert np.array_equal(t, b.best_params[name])

    def test_seed_changes_the_trajectory(self):
        bundle = separable_bundle()
        a = train.train_model(bundle, quick_config(epochs=1))
        b = train.train_model(bundle, quick_config(epochs=1, seed=1))
        assert a.history != b.history

    def test_best_model_restores_snapshot(self):
        result = train.train_model(separable_bundle(), quick_config())
        best = result.best_model()
        for name, t in best.parameters().items():
            assert np.array_equal(t, result.best_params[name])

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_runaway_lr_raises_numeric_error(self):
        from xraybench.errors import NumericError

        config = quick_config(
            epochs=3, optimizer=AdamWConfig(lr=1e12), augment=None
        )
        with pytest.raises(NumericError, match="non-finite"):
            train.train_model(separable_bundle(), config)

    def test_rejects_missing_splits(self):
        bundle = separable_bundle(n_train=0)
        with pytest.raises(StateError, match="train"):
            train.train_model(bundle, quick_config())
        bundle = separable_bundle(n_val=0)
        with pytest.raises(StateError, match="val"):
            train.train_model(bundle, quick_config())

    def test_rejects_bad_schedule(self):
        with pytest.raises(InvalidArgument):
            train.TrainConfig(epochs=0)
        with pytest.raises(InvalidArgument):
            train.TrainConfig(batch_size=0)


class TestPredictProbs:
    def test_tie_probability_predicts_class_zero(self):
        bundle = separable_bundle()
        model = CnnModel(seed=0)
        zeros = {name: np.zeros_like(t) for name, t in model.parameters().items()}
        model.load_parameters(zeros)
        preds = train.predict_probs(model, bundle, split="test")
        assert np.all(preds.p_pos == 0.5)
        assert np.all(preds.predicted == 0)

    def test_ids_and_truth_follow_the_split(self):
        bundle = separable_bundle()
        preds = train.predict_probs(CnnModel(seed=0), bundle, split="val")
        assert preds.ids == [r.id for r in bundle.records if r.split == "val"]
        assert np.array_equal(
            preds.truth,
            [r.label for r in bundle.records if r.split == "val"],
        )

    def test_missing_split_raises(self):
        bundle = separable_bundle(n_test=0)
        with pytest.raises(StateError, match="test"):
            train.predict_probs(CnnModel(seed=0), bundle, split="test")


class TestTrainingLog:
    def test_csv_format_and_float_round_trip(self, tmp_path):
        history = [(1, 0.6931471805599453, 0.5), (2, 0.25, 0.9876543210123456)]
        path = tmp_path / "log.csv"
        train.write_training_log(str(path), history)
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,train_loss,val_auc"
        assert len(lines) == 3
        for line, (epoch, loss, auc) in zip(lines[1:], history):
            cells = line.split(",")
            assert int(cells[0]) == epoch
            assert float(cells[1]) == loss
            assert float(cells[2]) == auc
