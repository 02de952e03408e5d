"""Multi-class anchor labeling and the fine proposal-network losses.

Anchors overlapping a ground-truth box above the positive IoU threshold take
that box's category (argmax ground truth, ties to the lowest index) and a
regression target.  Anchors below the negative threshold against every ground
truth form a pool from which negatives are sampled at a fixed ratio.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import Box, BoxOffsets, encode_box, iou_matrix
from .losses import ValueGrad, smooth_l1, softmax_ce

__all__ = [
    "AnchorLabel",
    "AnchorPrediction",
    "label_anchors",
    "anchor_cls_loss",
    "anchor_reg_loss",
    "anchor_joint_loss",
]


@dataclass
class AnchorLabel:
    """Training label for one anchor: category 0 is background."""

    anchor_index: int
    category: int
    matched_gt: Optional[int] = None
    offsets: Optional[BoxOffsets] = None
    sampled: bool = False

    @property
    def is_positive(self) -> bool:
        return self.category > 0

    def to_json_dict(self) -> dict:
        return {
            "anchor_index": self.anchor_index,
            "category": self.category,
            "gt_index": self.matched_gt,
            "offsets": self.offsets.to_list() if self.offsets else None,
            "sampled": self.sampled,
        }


def label_anchors(
    anchors: Sequence[Box],
    gts: Sequence[tuple[int, Box]],
    pos_iou: float = 0.5,
    neg_iou: float = 0.3,
    neg_ratio: int = 3,
    seed: int = 0,
    argmax_fallback: bool = False,
) -> list[AnchorLabel]:
    """Assign a category label to every anchor.

    ``gts`` is a list of (category >= 1, box).  Positives: max IoU strictly
    above ``pos_iou``.  Negative pool: IoU strictly below ``neg_iou`` against
    all ground truths; min(neg_ratio * #pos, pool) drawn without replacement
    under ``seed``.  Anchors in between stay unsampled.  ``argmax_fallback``
    additionally marks, per ground truth, its best-IoU anchor positive even
    below the threshold (off by default).
    """
    if not anchors:
        raise ValueError("anchor list must be nonempty")
    if not (0 < neg_iou <= pos_iou < 1):
        raise ValueError("need 0 < neg_iou <= pos_iou < 1")

    labels = [AnchorLabel(anchor_index=i, category=0) for i in range(len(anchors))]

    if gts:
        a = np.array([b.to_list() for b in anchors])
        g = np.array([b.to_list() for _, b in gts])
        overlaps = iou_matrix(a, g)
        best_gt = overlaps.argmax(axis=1)  # ties -> lowest gt index
        best_iou = overlaps[np.arange(len(anchors)), best_gt]

        positive = best_iou > pos_iou
        if argmax_fallback:
            for gi in range(len(gts)):
                ai = int(overlaps[:, gi].argmax())
                if overlaps[ai, gi] > 0:
                    positive[ai] = True
                    best_gt[ai] = gi
                    best_iou[ai] = overlaps[ai, gi]

        for ai in np.flatnonzero(positive):
            gi = int(best_gt[ai])
            cat, gt_box = gts[gi]
            labels[ai] = AnchorLabel(
                anchor_index=int(ai),
                category=int(cat),
                matched_gt=gi,
                offsets=encode_box(anchors[ai], gt_box),
                sampled=True,
            )
        max_iou = overlaps.max(axis=1)
        pool = [i for i in range(len(anchors)) if not positive[i] and max_iou[i] < neg_iou]
    else:
        pool = list(range(len(anchors)))

    n_pos = sum(1 for l in labels if l.is_positive)
    n_neg = min(neg_ratio * n_pos, len(pool))
    rng = random.Random(seed)
    for ai in rng.sample(pool, n_neg):
        labels[ai].sampled = True
    return labels


@dataclass
class AnchorPrediction:
    """Network outputs per anchor: (N, C+1) class scores and (N, 4) offsets."""

    scores: np.ndarray
    offsets: np.ndarray

    def __post_init__(self) -> None:
        self.scores = np.asarray(self.scores, dtype=float)
        self.offsets = np.asarray(self.offsets, dtype=float)
        if self.scores.ndim != 2 or self.offsets.shape != (self.scores.shape[0], 4):
            raise ValueError("scores must be (N, C+1) and offsets (N, 4)")

    def flat(self) -> np.ndarray:
        return np.concatenate([self.scores.ravel(), self.offsets.ravel()])

    @classmethod
    def from_flat(cls, flat: np.ndarray, n_anchors: int, n_classes: int) -> "AnchorPrediction":
        flat = np.asarray(flat, dtype=float)
        k = n_anchors * n_classes
        return cls(flat[:k].reshape(n_anchors, n_classes), flat[k:].reshape(n_anchors, 4))


def _positives(labels: Sequence[AnchorLabel]) -> list[AnchorLabel]:
    pos = [l for l in labels if l.is_positive]
    if not pos:
        raise ValueError("no positive anchors: loss normalization undefined")
    return pos


def anchor_cls_loss(pred: AnchorPrediction, labels: Sequence[AnchorLabel]) -> ValueGrad:
    """Softmax cross-entropy over sampled anchors, normalized by #positives.

    Positives score their true category, sampled negatives score class 0.
    Gradient covers scores only (flat, offsets excluded).
    """
    pos = _positives(labels)
    m = len(pos)
    grad = np.zeros_like(pred.scores)
    total = 0.0
    for lab in labels:
        if lab.is_positive:
            target = lab.category
        elif lab.sampled:
            target = 0
        else:
            continue
        vg = softmax_ce(pred.scores[lab.anchor_index], target)
        total += vg.value
        grad[lab.anchor_index] += vg.grad / m
    return ValueGrad(total / m, grad.ravel())


def anchor_reg_loss(pred: AnchorPrediction, labels: Sequence[AnchorLabel]) -> ValueGrad:
    """Smooth L1 over the 4 offset components of every positive anchor.

    Summed per component, normalized by #positives; gradient covers offsets
    only (flat, scores excluded).
    """
    pos = _positives(labels)
    m = len(pos)
    grad = np.zeros_like(pred.offsets)
    total = 0.0
    for lab in pos:
        target = np.array(lab.offsets.to_list())
        for k in range(4):
            vg = smooth_l1(pred.offsets[lab.anchor_index, k] - target[k])
            total += vg.value
            grad[lab.anchor_index, k] += vg.grad[0] / m
    return ValueGrad(total / m, grad.ravel())


def anchor_joint_loss(
    pred: AnchorPrediction, labels: Sequence[AnchorLabel], beta: float = 0.5
) -> ValueGrad:
    """Classification loss plus (1/beta) times the regression loss.

    The default beta of 0.5 doubles the regression term, biasing training
    toward better box location.  Gradient is flat over
    [scores.ravel(), offsets.ravel()].
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    cls = anchor_cls_loss(pred, labels)
    reg = anchor_reg_loss(pred, labels)
    return ValueGrad(
        cls.value + reg.value / beta,
        np.concatenate([cls.grad, reg.grad / beta]),
    )
