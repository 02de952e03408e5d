"""Test-time proposal selection: score filter, per-category NMS, and budgets.

The predicted per-category object counts set an adaptive keep-budget
(count * pos_factor, floored at a base number), so dense categories keep many
proposals and sparse ones keep few.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .geometry import Box, iou_matrix, is_inside
from .losses import softmax

__all__ = [
    "ScoredDetection",
    "score_filter",
    "category_nms",
    "adaptive_budget",
    "select_proposals",
]

Category = Hashable


@dataclass(frozen=True)
class ScoredDetection:
    """A box with its category label and confidence."""

    box: Box
    category: Category
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")

    def to_json_dict(self) -> dict:
        return {"category": self.category, "score": self.score, "box": self.box.to_list()}

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "ScoredDetection":
        return cls(Box.from_list(d["box"]), d["category"], float(d["score"]))


def score_filter(
    raw: Sequence[tuple[Box, Sequence[float]]],
    image_w: float,
    image_h: float,
) -> list[ScoredDetection]:
    """Drop background-argmax and out-of-image proposals.

    Each raw item is (box, class score vector over C+1 classes, class 0 =
    background).  Survivors carry their argmax category index and its softmax
    probability.
    """
    out: list[ScoredDetection] = []
    for box, scores in raw:
        s = np.asarray(scores, dtype=float)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("score vector must cover background plus >= 1 category")
        best = int(s.argmax())
        if best == 0:
            continue
        if not is_inside(box, image_w, image_h):
            continue
        out.append(ScoredDetection(box, best, float(softmax(s)[best])))
    return out


def category_nms(
    dets: Sequence[ScoredDetection],
    iou_thresholds: Mapping[Category, float] | float = 0.3,
    default_threshold: float = 0.3,
) -> list[ScoredDetection]:
    """Greedy non-maximum suppression run independently per category.

    Boxes of different categories never suppress each other.  ``iou_thresholds``
    is either a single threshold or a per-category map (missing categories
    fall back to ``default_threshold``).  Ordering: score descending, ties by
    lower input index; a kept box suppresses same-category boxes with IoU
    strictly above the threshold.  Output preserves input order.
    """
    if isinstance(iou_thresholds, (int, float)):
        thresholds: Mapping[Category, float] = {}
        default = float(iou_thresholds)
    else:
        thresholds = iou_thresholds
        default = default_threshold
    for t in ([default] + list(thresholds.values())):
        if not 0 < t < 1:
            raise ValueError("NMS thresholds must be in (0, 1)")

    keep: set[int] = set()
    by_cat: dict[Category, list[int]] = {}
    for i, d in enumerate(dets):
        by_cat.setdefault(d.category, []).append(i)

    for cat, indices in by_cat.items():
        thresh = thresholds.get(cat, default)
        order = sorted(indices, key=lambda i: (-dets[i].score, i))
        boxes = np.array([dets[i].box.to_list() for i in order])
        overlaps = iou_matrix(boxes, boxes)
        suppressed = np.zeros(len(order), dtype=bool)
        for a in range(len(order)):
            if suppressed[a]:
                continue
            keep.add(order[a])
            suppressed |= overlaps[a] > thresh
            suppressed[a] = True  # kept, not revisited
    return [d for i, d in enumerate(dets) if i in keep]


def adaptive_budget(
    counts: Mapping[Category, float],
    pos_factor: int = 100,
    base: int = 100,
) -> dict[Category, int]:
    """Per-category keep-budget: max(base, round(count) * pos_factor).

    Counts are the (real-valued) predicted object numbers; rounding is
    half-up.  ``base`` floors every budget so downstream stages always see a
    minimum search space.
    """
    if pos_factor < 1:
        raise ValueError("pos_factor must be >= 1")
    if base < 0:
        raise ValueError("base must be >= 0")
    out: dict[Category, int] = {}
    for cat, count in counts.items():
        if count < 0:
            raise ValueError(f"negative count for {cat!r}")
        rounded = int(np.floor(count + 0.5))
        out[cat] = max(base, rounded * pos_factor)
    return out


def select_proposals(
    dets: Sequence[ScoredDetection],
    budget: Mapping[Category, int],
) -> list[ScoredDetection]:
    """Keep the top-budget detections of each category.

    Within a category: score descending, ties by lower input index.  Output
    is category-major (sorted by category), then score descending.
    Categories missing from the budget map keep nothing.
    """
    by_cat: dict[Category, list[int]] = {}
    for i, d in enumerate(dets):
        by_cat.setdefault(d.category, []).append(i)

    try:
        cat_order = sorted(by_cat)
    except TypeError:  # mixed label types
        cat_order = sorted(by_cat, key=repr)

    out: list[ScoredDetection] = []
    for cat in cat_order:
        limit = budget.get(cat, 0)
        order = sorted(by_cat[cat], key=lambda i: (-dets[i].score, i))
        out.extend(dets[i] for i in order[: max(0, int(limit))])
    return out
