"""Detection evaluation: greedy IoU matching, PR curves, AP, and mAP."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .geometry import Box, iou
from .selection import ScoredDetection

__all__ = [
    "MatchResult",
    "EvalReport",
    "match_detections",
    "precision_recall_curve",
    "average_precision",
    "mean_ap",
    "evaluate_detections",
]

Category = Hashable


@dataclass
class MatchResult:
    """TP/FP flags per detection (score-descending order) and gt tallies."""

    flags: list[bool]  # True = TP, aligned with score-descending detections
    num_gts: int

    @property
    def tp(self) -> int:
        return sum(self.flags)

    @property
    def fp(self) -> int:
        return len(self.flags) - self.tp

    @property
    def fn(self) -> int:
        return self.num_gts - self.tp


def match_detections(
    dets: Sequence[ScoredDetection],
    gts: Sequence[tuple[Category, Box]],
    iou_thresh: float = 0.5,
) -> MatchResult:
    """Greedy matching: each ground truth is consumed by at most one detection.

    Detections are visited in score-descending order (ties by input index);
    a detection is TP when its best-IoU unmatched same-category ground truth
    strictly exceeds the threshold.  Duplicates on a matched ground truth
    count as FP.
    """
    if not 0 < iou_thresh < 1:
        raise ValueError("iou_thresh must be in (0, 1)")
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    matched = [False] * len(gts)
    flags: list[bool] = []
    for i in order:
        det = dets[i]
        best_iou, best_gi = 0.0, -1
        for gi, (cat, gt_box) in enumerate(gts):
            if cat != det.category or matched[gi]:
                continue
            ov = iou(det.box, gt_box)
            if ov > best_iou:
                best_iou, best_gi = ov, gi
        if best_gi >= 0 and best_iou > iou_thresh:
            matched[best_gi] = True
            flags.append(True)
        else:
            flags.append(False)
    return MatchResult(flags=flags, num_gts=len(gts))


def precision_recall_curve(match: MatchResult) -> list[tuple[float, float]]:
    """One (recall, precision) point per detection from cumulative TP/FP."""
    if match.num_gts == 0:
        raise ValueError("recall undefined with zero ground truths")
    points: list[tuple[float, float]] = []
    cum_tp = 0
    for k, flag in enumerate(match.flags, start=1):
        cum_tp += flag
        points.append((cum_tp / match.num_gts, cum_tp / k))
    return points


def average_precision(
    curve: Sequence[tuple[float, float]], eleven_point: bool = False
) -> float:
    """Area under the PR curve with the monotone precision envelope.

    All-point interpolation by default: precision is replaced by its running
    maximum from the right, then summed over recall increments.
    ``eleven_point`` switches to the legacy mean over recall 0.0..1.0 in 0.1
    steps.
    """
    if not curve:
        return 0.0
    recalls = [r for r, _ in curve]
    precisions = [p for _, p in curve]
    # Monotone (nonincreasing) envelope from the right.
    envelope = precisions[:]
    for i in range(len(envelope) - 2, -1, -1):
        envelope[i] = max(envelope[i], envelope[i + 1])

    if eleven_point:
        total = 0.0
        for t in [i / 10.0 for i in range(11)]:
            total += max(
                (p for r, p in zip(recalls, envelope) if r >= t), default=0.0
            )
        return total / 11.0

    ap = 0.0
    prev_r = 0.0
    for r, p in zip(recalls, envelope):
        ap += (r - prev_r) * p
        prev_r = r
    return ap


def mean_ap(aps: Sequence[float]) -> float:
    """Unweighted mean of per-category APs."""
    if not aps:
        raise ValueError("mean AP undefined with no categories")
    return sum(aps) / len(aps)


@dataclass
class EvalReport:
    """Per-category PR curves and APs plus the overall mAP."""

    per_category: dict = field(default_factory=dict)  # cat -> {curve, ap, tp, fp, fn}
    map: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "categories": {
                str(cat): {
                    "ap": entry["ap"],
                    "tp": entry["tp"],
                    "fp": entry["fp"],
                    "fn": entry["fn"],
                    "curve": [[r, p] for r, p in entry["curve"]],
                }
                for cat, entry in self.per_category.items()
            },
            "map": self.map,
        }

    def curve_csv(self, cat: Category) -> str:
        lines = ["recall,precision"]
        lines += [f"{r},{p}" for r, p in self.per_category[cat]["curve"]]
        return "\n".join(lines) + "\n"


def evaluate_detections(
    dets: Sequence[ScoredDetection],
    gts: Sequence[tuple[Category, Box]],
    iou_thresh: float = 0.5,
    eleven_point: bool = False,
) -> EvalReport:
    """Full evaluation over the categories present in the ground truth.

    Detections of categories with no ground truth anywhere are excluded (no
    gts means no curve, so they cannot enter the mAP).
    """
    gt_cats = sorted({cat for cat, _ in gts}, key=repr)
    if not gt_cats:
        raise ValueError("no ground-truth categories to evaluate")
    report = EvalReport()
    aps = []
    for cat in gt_cats:
        cat_dets = [d for d in dets if d.category == cat]
        cat_gts = [(c, b) for c, b in gts if c == cat]
        match = match_detections(cat_dets, cat_gts, iou_thresh)
        curve = precision_recall_curve(match) if match.flags else []
        ap = average_precision(curve, eleven_point=eleven_point)
        report.per_category[cat] = {
            "curve": curve,
            "ap": ap,
            "tp": match.tp,
            "fp": match.fp,
            "fn": match.fn,
        }
        aps.append(ap)
    report.map = mean_ap(aps)
    return report
