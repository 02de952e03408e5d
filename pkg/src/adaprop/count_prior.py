"""Per-category object-count priors regressed against multi-level base numbers.

An image's ground-truth count for each category is compared against a ladder
of base numbers.  Levels close to the true count (in a band around it) become
positive regression targets in log-ratio form; levels in the ignore bands are
excluded; negatives are sampled 3:1 from everything else.  A small multi-task
loss (two-class log loss + smooth L1 on the log offsets) trains the scores
and regressions, and test-time decoding averages the decoded counts of
high-scoring levels.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .losses import ValueGrad, binary_log_loss, smooth_l1, softmax

__all__ = [
    "DEFAULT_BASE_LEVELS",
    "POSITIVE",
    "NEGATIVE",
    "IGNORED",
    "UNSAMPLED",
    "STATUS_NAMES",
    "CountLevelAssignment",
    "CountPrediction",
    "level_diff",
    "in_ignore_band",
    "assign_count_levels",
    "encode_count",
    "decode_count",
    "count_prior_loss",
    "predict_counts",
]

DEFAULT_BASE_LEVELS: tuple[int, ...] = (1, 2, 4, 8, 16, 24, 32, 48, 64)

# Per-(category, level) training status codes.
POSITIVE, NEGATIVE, IGNORED, UNSAMPLED = 0, 1, 2, 3
STATUS_NAMES = {POSITIVE: "positive", NEGATIVE: "negative", IGNORED: "ignored", UNSAMPLED: "unsampled"}


def _validate_levels(levels: Sequence[int]) -> tuple[int, ...]:
    lv = tuple(int(b) for b in levels)
    if not lv or any(b < 1 for b in lv):
        raise ValueError("base levels must be nonempty and >= 1")
    if any(a >= b for a, b in zip(lv, lv[1:])):
        raise ValueError("base levels must be strictly increasing")
    return lv


def level_diff(gt_count: float, base: float) -> float:
    """Band score of a true count against one base number.

    Positive exactly when base/2 < count < 2*base; equals 0.5 at count == base.
    """
    if base < 1:
        raise ValueError("base must be >= 1")
    if gt_count < 0:
        raise ValueError("gt_count must be >= 0")
    return (gt_count - base / 2.0) * (base * 2.0 - gt_count) / (base * base)


def in_ignore_band(gt_count: float, base: float) -> bool:
    """Whether count/base falls in [1/4, 1/2] or [2, 4] (closed bands)."""
    ratio = gt_count / base
    return 0.25 <= ratio <= 0.5 or 2.0 <= ratio <= 4.0


def encode_count(gt_count: float, base: float) -> float:
    """Log-ratio regression target log(count / base)."""
    if gt_count < 1:
        raise ValueError("cannot encode a zero count (log undefined)")
    if base < 1:
        raise ValueError("base must be >= 1")
    return math.log(gt_count / base)


def decode_count(offset: float, base: float) -> float:
    """Inverse of :func:`encode_count`: base * exp(offset)."""
    if not math.isfinite(offset):
        raise ValueError("offset must be finite")
    return base * math.exp(offset)


@dataclass
class CountLevelAssignment:
    """Training labels for every (category, level) cell.

    ``status`` is a (C, E) int array of POSITIVE/NEGATIVE/IGNORED/UNSAMPLED;
    ``targets`` holds log-ratio regression targets (NaN outside positives);
    ``diffs`` keeps the band scores for inspection.
    """

    categories: tuple[str, ...]
    levels: tuple[int, ...]
    status: np.ndarray
    targets: np.ndarray
    diffs: np.ndarray

    @property
    def num_positive(self) -> int:
        return int((self.status == POSITIVE).sum())

    @property
    def num_negative(self) -> int:
        return int((self.status == NEGATIVE).sum())

    def to_json_dict(self) -> dict:
        out: dict = {}
        for ci, cat in enumerate(self.categories):
            per_level = {}
            for ei, base in enumerate(self.levels):
                cell: dict = {
                    "status": STATUS_NAMES[int(self.status[ci, ei])],
                    "diff": float(self.diffs[ci, ei]),
                }
                if self.status[ci, ei] == POSITIVE:
                    cell["target"] = float(self.targets[ci, ei])
                per_level[str(base)] = cell
            out[cat] = per_level
        return out


def assign_count_levels(
    gt_counts: Mapping[str, float],
    levels: Sequence[int] = DEFAULT_BASE_LEVELS,
    seed: int = 0,
) -> CountLevelAssignment:
    """Label every (category, level) cell for count-prior training.

    Categories with a nonzero count get positives where the band score is
    positive and the count/base ratio avoids both ignore bands; ignore-band
    levels are excluded entirely.  Every remaining cell (including all cells
    of zero-count categories) forms the negative pool, from which
    min(3 * #positives, pool) negatives are drawn without replacement.
    Deterministic for a fixed seed.
    """
    lv = _validate_levels(levels)
    cats = tuple(gt_counts.keys())
    counts = []
    for cat in cats:
        g = gt_counts[cat]
        if g < 0 or g != int(g):
            raise ValueError(f"count for {cat!r} must be a nonnegative integer, got {g}")
        counts.append(int(g))

    C, E = len(cats), len(lv)
    status = np.full((C, E), UNSAMPLED, dtype=np.int8)
    targets = np.full((C, E), np.nan)
    diffs = np.zeros((C, E))
    pool: list[tuple[int, int]] = []

    for ci, g in enumerate(counts):
        for ei, base in enumerate(lv):
            d = level_diff(g, base)
            diffs[ci, ei] = d
            if g > 0 and in_ignore_band(g, base):
                status[ci, ei] = IGNORED
            elif g > 0 and d > 0:
                status[ci, ei] = POSITIVE
                targets[ci, ei] = encode_count(g, base)
            else:
                pool.append((ci, ei))

    n_pos = int((status == POSITIVE).sum())
    n_neg = min(3 * n_pos, len(pool))
    rng = random.Random(seed)
    for ci, ei in rng.sample(pool, n_neg):
        status[ci, ei] = NEGATIVE

    return CountLevelAssignment(cats, lv, status, targets, diffs)


@dataclass
class CountPrediction:
    """Raw count-prior outputs: per cell two class scores and one regression.

    ``scores`` is (C, E, 2) with channel 0 = "level matches an object count",
    channel 1 = "it does not"; ``regressions`` is (C, E) log-ratio offsets.
    """

    categories: tuple[str, ...]
    levels: tuple[int, ...]
    scores: np.ndarray
    regressions: np.ndarray

    def __post_init__(self) -> None:
        self.scores = np.asarray(self.scores, dtype=float)
        self.regressions = np.asarray(self.regressions, dtype=float)
        C, E = len(self.categories), len(self.levels)
        if self.scores.shape != (C, E, 2):
            raise ValueError(f"scores must have shape {(C, E, 2)}, got {self.scores.shape}")
        if self.regressions.shape != (C, E):
            raise ValueError(f"regressions must have shape {(C, E)}, got {self.regressions.shape}")

    def flat(self) -> np.ndarray:
        return np.concatenate([self.scores.ravel(), self.regressions.ravel()])

    @classmethod
    def from_flat(
        cls, flat: np.ndarray, categories: Sequence[str], levels: Sequence[int]
    ) -> "CountPrediction":
        C, E = len(categories), len(levels)
        flat = np.asarray(flat, dtype=float)
        return cls(
            tuple(categories),
            tuple(int(b) for b in levels),
            flat[: C * E * 2].reshape(C, E, 2),
            flat[C * E * 2 :].reshape(C, E),
        )


def count_prior_loss(
    pred: CountPrediction, assign: CountLevelAssignment, alpha: float = 1.0
) -> ValueGrad:
    """Multi-task count-prior loss with analytic gradient.

    Classification: mean two-class log loss over sampled (positive + negative)
    cells.  Regression: alpha times the mean smooth L1 of the offset error
    over positive cells only.  The gradient is flat over
    [scores.ravel(), regressions.ravel()].
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if pred.categories != assign.categories or pred.levels != assign.levels:
        raise ValueError("prediction and assignment shapes disagree")

    pos = np.argwhere(assign.status == POSITIVE)
    neg = np.argwhere(assign.status == NEGATIVE)
    n_cls = len(pos) + len(neg)
    if n_cls == 0:
        raise ValueError("no sampled cells: classification normalization undefined")

    grad_scores = np.zeros_like(pred.scores)
    grad_reg = np.zeros_like(pred.regressions)
    cls_total = 0.0
    for cells, label in ((pos, 0), (neg, 1)):
        for ci, ei in cells:
            vg = binary_log_loss(pred.scores[ci, ei], label)
            cls_total += vg.value
            grad_scores[ci, ei] += vg.grad / n_cls
    value = cls_total / n_cls

    if len(pos):
        reg_total = 0.0
        for ci, ei in pos:
            vg = smooth_l1(pred.regressions[ci, ei] - assign.targets[ci, ei])
            reg_total += vg.value
            grad_reg[ci, ei] += alpha * vg.grad[0] / len(pos)
        value += alpha * reg_total / len(pos)

    return ValueGrad(value, np.concatenate([grad_scores.ravel(), grad_reg.ravel()]))


def predict_counts(
    pred: CountPrediction, score_threshold: float = 0.7
) -> dict[str, float]:
    """Decode final per-category counts from raw count-prior outputs.

    Each level's score pair is softmaxed; levels whose object probability
    exceeds the threshold contribute base * exp(regression), and the category
    count is the mean of the contributing levels (0 when none pass).
    """
    if not 0 < score_threshold < 1:
        raise ValueError("score_threshold must be in (0, 1)")
    probs = softmax(pred.scores)[..., 0]
    out: dict[str, float] = {}
    for ci, cat in enumerate(pred.categories):
        decoded = [
            decode_count(pred.regressions[ci, ei], base)
            for ei, base in enumerate(pred.levels)
            if probs[ci, ei] > score_threshold
        ]
        out[cat] = float(np.mean(decoded)) if decoded else 0.0
    return out
