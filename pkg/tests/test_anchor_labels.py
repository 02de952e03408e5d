import math
import random

import numpy as np
import pytest

from adaprop.anchor_labels import (
    AnchorPrediction,
    anchor_cls_loss,
    anchor_joint_loss,
    anchor_reg_loss,
    label_anchors,
)
from adaprop.geometry import Box, decode_box, iou
from adaprop.losses import finite_diff_check


def random_box(rng, span=200.0, min_side=5.0, max_side=60.0):
    w = rng.uniform(min_side, max_side)
    h = rng.uniform(min_side, max_side)
    x = rng.uniform(0, span - w)
    y = rng.uniform(0, span - h)
    return Box(x, y, x + w, y + h)


class TestLabelAnchors:
    def test_anchors_equal_gts(self):
        gts = [(1, Box(0, 0, 10, 10)), (2, Box(50, 50, 80, 90))]
        labels = label_anchors([b for _, b in gts], gts, seed=0)
        assert [l.category for l in labels] == [1, 2]
        assert all(l.sampled for l in labels)

    def test_no_gts(self):
        anchors = [Box(0, 0, 10, 10), Box(5, 5, 20, 20)]
        labels = label_anchors(anchors, [], seed=0)
        assert all(l.category == 0 and not l.sampled for l in labels)

    def test_brute_force_iou_oracle(self):
        rng = random.Random(5)
        gts = [(3, random_box(rng))]
        anchors = [random_box(rng) for _ in range(100)]
        labels = label_anchors(anchors, gts, pos_iou=0.5, neg_iou=0.3, seed=9)
        n_pos = 0
        pool = 0
        for i, anchor in enumerate(anchors):
            ov = iou(anchor, gts[0][1])
            if ov > 0.5:
                assert labels[i].category == 3
                n_pos += 1
            elif ov < 0.3:
                assert labels[i].category == 0
                pool += 1
            else:
                assert labels[i].category == 0
                assert not labels[i].sampled
        sampled_neg = sum(1 for l in labels if l.category == 0 and l.sampled)
        assert sampled_neg == min(3 * n_pos, pool)

    def test_offsets_roundtrip_to_gt(self):
        rng = random.Random(6)
        gts = [(1, random_box(rng)), (2, random_box(rng))]
        anchors = [b for _, b in gts] + [random_box(rng) for _ in range(20)]
        labels = label_anchors(anchors, gts, seed=0)
        for lab in labels:
            if lab.is_positive:
                back = decode_box(anchors[lab.anchor_index], lab.offsets)
                want = gts[lab.matched_gt][1]
                for got, expect in zip(back.to_list(), want.to_list()):
                    assert abs(got - expect) < 1e-9

    def test_determinism_and_seed_variation(self):
        rng = random.Random(7)
        gts = [(1, random_box(rng))]
        anchors = [random_box(rng) for _ in range(60)] + [gts[0][1]]
        a = label_anchors(anchors, gts, seed=3)
        b = label_anchors(anchors, gts, seed=3)
        assert [l.to_json_dict() for l in a] == [l.to_json_dict() for l in b]

    def test_tie_breaks_to_lowest_gt(self):
        box = Box(0, 0, 10, 10)
        labels = label_anchors([box], [(4, box), (5, box)], seed=0)
        assert labels[0].category == 4
        assert labels[0].matched_gt == 0

    def test_empty_anchors_rejected(self):
        with pytest.raises(ValueError):
            label_anchors([], [(1, Box(0, 0, 1, 1))], seed=0)

    def test_no_anchor_both_positive_and_negative(self):
        rng = random.Random(8)
        gts = [(1, random_box(rng)), (2, random_box(rng))]
        anchors = [random_box(rng) for _ in range(200)]
        labels = label_anchors(anchors, gts, seed=1)
        for lab in labels:
            assert not (lab.is_positive and lab.category == 0)


def tiny_labeled_setup():
    """1 positive + 3 sampled negatives over 4 anchors, 10 categories."""
    gt_box = Box(0, 0, 20, 20)
    anchors = [gt_box, Box(100, 100, 120, 120), Box(150, 0, 170, 20), Box(0, 150, 20, 170)]
    labels = label_anchors(anchors, [(7, gt_box)], seed=0)
    assert sum(l.is_positive for l in labels) == 1
    assert sum(l.sampled and not l.is_positive for l in labels) == 3
    return anchors, labels


class TestAnchorLosses:
    def test_cls_optimum(self):
        _, labels = tiny_labeled_setup()
        scores = np.full((4, 11), -50.0)
        for lab in labels:
            scores[lab.anchor_index, lab.category if lab.is_positive else 0] = 50.0
        pred = AnchorPrediction(scores, np.zeros((4, 4)))
        assert anchor_cls_loss(pred, labels).value == pytest.approx(0.0, abs=1e-20)

    def test_cls_uniform_hand_value(self):
        # 1 positive + 3 negatives, uniform over 11 classes, M=1: 4 log 11
        _, labels = tiny_labeled_setup()
        pred = AnchorPrediction(np.zeros((4, 11)), np.zeros((4, 4)))
        out = anchor_cls_loss(pred, labels)
        assert out.value == pytest.approx(4 * math.log(11))
        assert out.value == pytest.approx(9.592, abs=1e-3)

    def test_reg_hand_value(self):
        # single positive, component errors (0.5, 0, 0, 2) -> 0.125 + 1.5
        _, labels = tiny_labeled_setup()
        pos = next(l for l in labels if l.is_positive)
        offsets = np.zeros((4, 4))
        offsets[pos.anchor_index] = np.array(pos.offsets.to_list()) + np.array([0.5, 0, 0, 2.0])
        pred = AnchorPrediction(np.zeros((4, 11)), offsets)
        assert anchor_reg_loss(pred, labels).value == pytest.approx(1.625)

    def test_reg_optimum(self):
        _, labels = tiny_labeled_setup()
        pos = next(l for l in labels if l.is_positive)
        offsets = np.zeros((4, 4))
        offsets[pos.anchor_index] = pos.offsets.to_list()
        pred = AnchorPrediction(np.zeros((4, 11)), offsets)
        assert anchor_reg_loss(pred, labels).value == pytest.approx(0.0)

    def test_joint_weighting(self):
        _, labels = tiny_labeled_setup()
        rng = np.random.default_rng(2)
        pred = AnchorPrediction(rng.normal(size=(4, 11)), rng.normal(size=(4, 4)))
        cls = anchor_cls_loss(pred, labels).value
        reg = anchor_reg_loss(pred, labels).value
        joint = anchor_joint_loss(pred, labels, beta=0.5).value
        assert joint == pytest.approx(cls + 2 * reg)

    def test_m_zero_rejected(self):
        anchors = [Box(0, 0, 10, 10)]
        labels = label_anchors(anchors, [], seed=0)
        pred = AnchorPrediction(np.zeros((1, 11)), np.zeros((1, 4)))
        with pytest.raises(ValueError):
            anchor_cls_loss(pred, labels)
        with pytest.raises(ValueError):
            anchor_reg_loss(pred, labels)

    def test_gradients_finite_difference(self):
        _, labels = tiny_labeled_setup()
        rng = np.random.default_rng(3)
        for _ in range(5):
            flat = rng.normal(size=4 * 11 + 4 * 4) * 2

            def joint(v):
                return anchor_joint_loss(AnchorPrediction.from_flat(v, 4, 11), labels, beta=0.5)

            assert finite_diff_check(joint, flat, 1e-5) < 1e-5

            def cls_only(v):
                return anchor_cls_loss(AnchorPrediction(v.reshape(4, 11), np.zeros((4, 4))), labels)

            assert finite_diff_check(cls_only, flat[: 4 * 11], 1e-5) < 1e-5
