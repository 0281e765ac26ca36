import numpy as np
import pytest

from multicut.core import is_multicut
from multicut.errors import TrainingDiverged
from multicut.exact import brute_force
from multicut.model import ModelConfig, TmpModel
from multicut.training import (
    TrainConfig,
    TrainSample,
    augment_by_contraction,
    generate_dataset,
    load_dataset,
    save_dataset,
    train,
)


def small_config(**kwargs):
    base = dict(
        sizes=(6,),
        cost_ranges=((-1, 1),),
        instances_per_cell=10,
        epochs=2,
        seed=7,
    )
    base.update(kwargs)
    return TrainConfig(**base)


class TestGenerateDataset:
    def test_counts_and_optimal_targets(self):
        cfg = small_config()
        samples = generate_dataset(cfg)
        assert len(samples) == 10
        for sample in samples:
            assert sample.instance.normalized
            assert is_multicut(sample.instance, sample.target)
            best = brute_force(sample.instance)
            assert np.isclose(float(np.dot(sample.instance.costs, sample.target)), best.value)

    def test_cell_grid_multiplies_out(self):
        cfg = small_config(sizes=(5, 6), cost_ranges=((-1, 1), (-5, 5)), instances_per_cell=3)
        assert len(generate_dataset(cfg)) == 2 * 2 * 3

    def test_reproducible_from_seed(self):
        a = generate_dataset(small_config())
        b = generate_dataset(small_config())
        for sa, sb in zip(a, b):
            assert np.array_equal(sa.instance.costs, sb.instance.costs)
            assert np.array_equal(sa.target, sb.target)
            assert sa.provenance == sb.provenance

    def test_all_zero_instance_keeps_solver_output(self):
        # the [-1, 1] integer range can produce an all-zero instance; any
        # labeling is optimal and the enumerator's choice is kept
        cfg = small_config(sizes=(4,), instances_per_cell=40, seed=123)
        for sample in generate_dataset(cfg):
            if not sample.instance.costs.any():
                assert is_multicut(sample.instance, sample.target)
                break


class TestAugmentation:
    def test_all_cut_target_unchanged(self):
        rng = np.random.default_rng(0)
        from multicut.core import CompleteInstance, normalize

        instance = normalize(CompleteInstance(4, [-1.0, -2.0, -1.5, -3.0, -0.5, -1.0]))
        sample = TrainSample(instance, np.ones(6, dtype=np.int8), {})
        assert augment_by_contraction(sample, rng) is sample

    def test_fully_joined_triangle_contracts_to_pair(self):
        from multicut.core import CompleteInstance, normalize

        rng = np.random.default_rng(1)
        instance = normalize(CompleteInstance(3, [1.0, 1.0, 1.0]))
        sample = TrainSample(instance, np.zeros(3, dtype=np.int8), {})
        out = augment_by_contraction(sample, rng)
        assert out.instance.n == 2
        assert np.array_equal(out.target, [0])
        assert out.provenance["augmentation_depth"] == 1

    def test_contracted_targets_stay_optimal(self):
        cfg = small_config(sizes=(7, 8, 9), cost_ranges=((-5, 5),), instances_per_cell=10)
        samples = generate_dataset(cfg)
        rng = np.random.default_rng(2)
        checked = 0
        while checked < 200:
            sample = samples[int(rng.integers(len(samples)))]
            grown = augment_by_contraction(sample, rng)
            if grown is sample:
                continue
            assert grown.instance.normalized
            assert is_multicut(grown.instance, grown.target)
            best = brute_force(grown.instance)
            assert np.isclose(
                float(np.dot(grown.instance.costs, grown.target)), best.value
            )
            checked += 1


class TestTrainLoop:
    def test_zero_lr_is_identity_on_parameters(self):
        samples = generate_dataset(small_config())
        model = TmpModel(ModelConfig(layers=3, width=4), seed=0)
        before = [arr.copy() for _, arr in model.parameters()]
        train(model, samples, small_config(epochs=1, lr_max=0.0, lr_min=0.0))
        for (_, arr), prev in zip(model.parameters(), before):
            assert np.array_equal(arr, prev)

    def test_seeded_rerun_reproduces_loss_curve(self):
        samples = generate_dataset(small_config())
        cfg = small_config(epochs=3)
        _, curve_a = train(TmpModel(ModelConfig(layers=3, width=4), seed=1), samples, cfg)
        _, curve_b = train(TmpModel(ModelConfig(layers=3, width=4), seed=1), samples, cfg)
        assert curve_a == curve_b

    def test_loss_decreases_over_first_ten_steps_on_fixed_batch(self):
        # smoke check at lr 1e-4 on a fresh model, allowed to retry seeds
        samples = generate_dataset(small_config(sizes=(6,), instances_per_cell=1))
        assert len(samples) == 1  # one sample, batch fixed across steps
        for seed in (0, 1, 2):
            model = TmpModel(ModelConfig(layers=3, width=8), seed=seed)
            cfg = small_config(
                instances_per_cell=1, epochs=10, augment=False,
                lr_max=1e-4, lr_min=1e-4, seed=seed,
            )
            _, curve = train(model, samples, cfg)
            if curve[-1][1] < curve[0][1]:
                return
        pytest.fail("loss did not decrease for any of three seeds")

    def test_gradient_batching_matches_curve_length(self):
        samples = generate_dataset(small_config())
        cfg = small_config(epochs=2, batch_size=4)
        _, curve = train(TmpModel(ModelConfig(layers=3, width=4), seed=2), samples, cfg)
        assert len(curve) == 2
        assert all(np.isfinite(row[1]) for row in curve)

    def test_nan_loss_aborts_with_diagnostic_checkpoint(self, tmp_path):
        samples = generate_dataset(small_config())
        model = TmpModel(ModelConfig(layers=3, width=4), seed=3)
        model.layers[0].update[0].weight[:] = np.nan
        with pytest.raises((TrainingDiverged, FloatingPointError)):
            train(model, samples, small_config(epochs=1), checkpoint_dir=tmp_path)

    def test_checkpoints_written_every_k_epochs(self, tmp_path):
        samples = generate_dataset(small_config(instances_per_cell=3))
        cfg = small_config(instances_per_cell=3, epochs=4, checkpoint_every=2)
        train(TmpModel(ModelConfig(layers=3, width=4), seed=4), samples, cfg,
              checkpoint_dir=tmp_path)
        names = sorted(p.name for p in tmp_path.glob("epoch*.mctmp"))
        assert names == ["epoch00002.mctmp", "epoch00004.mctmp"]

    def test_loss_csv_emitted(self, tmp_path):
        samples = generate_dataset(small_config(instances_per_cell=3))
        csv_path = tmp_path / "loss.csv"
        train(
            TmpModel(ModelConfig(layers=3, width=4), seed=5),
            samples,
            small_config(instances_per_cell=3, epochs=2),
            loss_csv=csv_path,
        )
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "epoch,mean_loss,lr"
        assert len(lines) == 3


class TestDatasetFiles:
    def test_round_trip_exact(self, tmp_path):
        samples = generate_dataset(small_config(sizes=(5, 6), instances_per_cell=3))
        save_dataset(samples, tmp_path / "ds")
        loaded = load_dataset(tmp_path / "ds")
        assert len(loaded) == len(samples)
        for a, b in zip(samples, loaded):
            assert a.instance.n == b.instance.n
            assert a.instance.costs.tolist() == b.instance.costs.tolist()
            assert np.array_equal(a.target, b.target)
            assert a.provenance == b.provenance

    def test_record_format(self, tmp_path):
        samples = generate_dataset(small_config(sizes=(4,), instances_per_cell=1))
        save_dataset(samples, tmp_path / "ds")
        text = (tmp_path / "ds" / "sample_00000.txt").read_text().splitlines()
        assert text[0] == "4 6"
        assert len(text) == 8  # header + 6 pairs + labels line
        assert text[-1].startswith("labels ")
        first = text[1].split()
        assert first[0] == "0" and first[1] == "1"


class TestJoinTargetConvention:
    def test_positive_logits_are_rewarded_for_joined_pairs(self):
        # a sample whose optimum joins everything: training must push
        # logits up, not down
        from multicut.core import CompleteInstance, normalize

        instance = normalize(CompleteInstance(4, np.ones(6)))
        sample = TrainSample(instance, np.zeros(6, dtype=np.int8), {})
        model = TmpModel(ModelConfig(layers=3, width=8), seed=6)
        cfg = TrainConfig(
            sizes=(4,), cost_ranges=((1, 1),), instances_per_cell=1,
            epochs=60, lr_max=1e-2, lr_min=1e-3, seed=0, augment=False,
        )
        before = model.forward(instance).mean()
        train(model, [sample], cfg)
        after = model.forward(instance).mean()
        assert after > before
        assert (model.forward(instance) > 0).mean() > 0.9
