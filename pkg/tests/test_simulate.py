import numpy as np
import pytest

from adaprop.count_prior import DEFAULT_BASE_LEVELS, predict_counts
from adaprop.evaluation import evaluate_detections
from adaprop.geometry import iou
from adaprop.simulate import (
    DEFAULT_COUNT_RANGES,
    NoiseSpec,
    SceneSpec,
    oracle_count_prediction,
    perturb_detections,
    sample_scene,
)

SMALL_SPEC = SceneSpec(
    count_ranges={"a": (0, 4), "b": (1, 3), "solo": (1, 1)},
    size_range=(10.0, 40.0),
    image_w=400.0,
    image_h=400.0,
)


class TestSampleScene:
    def test_fixed_count_category(self):
        for seed in range(20):
            _, counts = sample_scene(SMALL_SPEC, seed)
            assert counts["solo"] == 1

    def test_empty_ranges(self):
        spec = SceneSpec(count_ranges={"a": (0, 0)}, image_w=100, image_h=100)
        gts, counts = sample_scene(spec, 0)
        assert gts == [] and counts == {"a": 0}

    def test_counts_within_range_1000_seeds(self):
        for seed in range(1000):
            gts, counts = sample_scene(SMALL_SPEC, seed)
            for cat, (lo, hi) in SMALL_SPEC.count_ranges.items():
                assert lo <= counts[cat] <= hi
            tally = {}
            for cat, _ in gts:
                tally[cat] = tally.get(cat, 0) + 1
            for cat, n in counts.items():
                assert tally.get(cat, 0) == n

    def test_overlap_policy(self):
        for seed in range(20):
            gts, _ = sample_scene(SMALL_SPEC, seed)
            boxes = [b for _, b in gts]
            for i, a in enumerate(boxes):
                for b in boxes[i + 1 :]:
                    assert iou(a, b) <= SMALL_SPEC.max_overlap + 1e-12

    def test_default_ranges_are_dense_and_sparse(self):
        assert DEFAULT_COUNT_RANGES["ground_track_field"] == (1, 1)
        assert DEFAULT_COUNT_RANGES["storage_tank"][1] == 63
        gts, counts = sample_scene(SceneSpec(), 0)
        assert counts["storage_tank"] >= 6

    def test_determinism(self):
        a = sample_scene(SMALL_SPEC, 42)
        b = sample_scene(SMALL_SPEC, 42)
        assert a == b

    def test_infeasible_placement_errors(self):
        spec = SceneSpec(
            count_ranges={"jam": (50, 50)},
            size_range=(90.0, 100.0),
            image_w=100.0,
            image_h=100.0,
            max_overlap=0.0,
            max_retries=50,
        )
        with pytest.raises(RuntimeError, match="jam"):
            sample_scene(spec, 0)


class TestPerturbDetections:
    def test_zero_noise_identity(self):
        gts, _ = sample_scene(SMALL_SPEC, 1)
        dets = perturb_detections(gts, NoiseSpec(), seed=0)
        assert len(dets) == len(gts)
        for det, (cat, box) in zip(dets, gts):
            assert det.category == cat
            assert det.box.to_list() == pytest.approx(box.to_list())

    def test_miss_rate_one(self):
        gts, _ = sample_scene(SMALL_SPEC, 2)
        dets = perturb_detections(gts, NoiseSpec(miss_rate=1.0, fp_rate=0.5), seed=3)
        # only spurious boxes remain, scored from the spurious range
        assert all(d.score <= 0.5 for d in dets)
        assert len(dets) < len(gts)

    def test_zero_noise_map_is_one(self):
        gts, _ = sample_scene(SMALL_SPEC, 3)
        dets = perturb_detections(gts, NoiseSpec(), seed=0)
        assert evaluate_detections(dets, gts).map == pytest.approx(1.0)

    def test_determinism(self):
        gts, _ = sample_scene(SMALL_SPEC, 4)
        noise = NoiseSpec(jitter_std=2.0, fp_rate=0.3, miss_rate=0.2)
        assert perturb_detections(gts, noise, 9) == perturb_detections(gts, noise, 9)

    def test_invalid_rates_rejected(self):
        with pytest.raises(ValueError):
            NoiseSpec(miss_rate=1.5)
        with pytest.raises(ValueError):
            NoiseSpec(jitter_std=-1)


class TestOracleCountPrediction:
    def test_recovers_counts(self):
        counts = {"a": 3, "b": 17, "c": 0, "d": 63}
        pred = oracle_count_prediction(counts)
        decoded = predict_counts(pred, 0.7)
        for cat, g in counts.items():
            assert decoded[cat] == pytest.approx(g, abs=1e-9)

    def test_empty_scene(self):
        pred = oracle_count_prediction({"a": 0, "b": 0})
        assert predict_counts(pred) == {"a": 0.0, "b": 0.0}

    def test_dense_category_levels(self):
        pred = oracle_count_prediction({"tank": 63})
        probs = 1 / (1 + np.exp(pred.scores[0, :, 1] - pred.scores[0, :, 0]))
        passing = {DEFAULT_BASE_LEVELS[e] for e in range(9) if probs[e] > 0.7}
        assert passing == {32, 48, 64}
