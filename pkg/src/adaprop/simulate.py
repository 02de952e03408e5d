"""Synthetic scenes and a pseudo-detector for desk-scale pipeline exercise.

Default count ranges mirror the sparse/dense spread of a typical aerial
benchmark: a ground track field appears exactly once per image while storage
tanks and vehicles show up by the dozen.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .count_prior import (
    DEFAULT_BASE_LEVELS,
    CountPrediction,
    encode_count,
    in_ignore_band,
    level_diff,
)
from .geometry import Box
from .selection import ScoredDetection

__all__ = [
    "DEFAULT_COUNT_RANGES",
    "SceneSpec",
    "NoiseSpec",
    "sample_scene",
    "perturb_detections",
    "oracle_count_prediction",
]

# Per-category (min, max) objects per image.
DEFAULT_COUNT_RANGES: dict[str, tuple[int, int]] = {
    "airplane": (1, 31),
    "ship": (1, 15),
    "storage_tank": (6, 63),
    "baseball_diamond": (1, 8),
    "tennis_court": (1, 24),
    "basketball_court": (1, 6),
    "ground_track_field": (1, 1),
    "harbor": (3, 18),
    "bridge": (1, 5),
    "vehicle": (2, 48),
}


@dataclass(frozen=True)
class SceneSpec:
    """Scene generator parameters: count ranges, sizes, image, overlap cap."""

    count_ranges: dict[str, tuple[int, int]] = field(
        default_factory=lambda: dict(DEFAULT_COUNT_RANGES)
    )
    size_range: tuple[float, float] = (16.0, 64.0)
    image_w: float = 1024.0
    image_h: float = 1024.0
    max_overlap: float = 0.2
    max_retries: int = 10_000

    def __post_init__(self) -> None:
        for cat, (lo, hi) in self.count_ranges.items():
            if not 0 <= lo <= hi:
                raise ValueError(f"bad count range for {cat!r}: ({lo}, {hi})")
        lo, hi = self.size_range
        if not 0 < lo <= hi:
            raise ValueError("size range must be positive")
        if self.image_w <= 0 or self.image_h <= 0:
            raise ValueError("image dimensions must be positive")
        if not 0 <= self.max_overlap <= 1:
            raise ValueError("max_overlap must be in [0, 1]")


@dataclass(frozen=True)
class NoiseSpec:
    """Pseudo-detector controls: localization jitter, scores, misses, FPs."""

    jitter_std: float = 0.0
    true_score: tuple[float, float] = (0.7, 1.0)
    spurious_score: tuple[float, float] = (0.05, 0.5)
    fp_rate: float = 0.0
    miss_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.jitter_std < 0:
            raise ValueError("jitter_std must be >= 0")
        for name, rate in (("fp_rate", self.fp_rate), ("miss_rate", self.miss_rate)):
            if not 0 <= rate <= 1:
                raise ValueError(f"{name} must be in [0, 1]")
        for lo, hi in (self.true_score, self.spurious_score):
            if not 0 <= lo <= hi <= 1:
                raise ValueError("score ranges must satisfy 0 <= lo <= hi <= 1")


def _iou_vs_all(box: Box, others: list[Box]) -> float:
    from .geometry import iou

    return max((iou(box, o) for o in others), default=0.0)


def _random_box(rng: np.random.Generator, spec: SceneSpec) -> Box:
    lo, hi = spec.size_range
    w = rng.uniform(lo, min(hi, spec.image_w))
    h = rng.uniform(lo, min(hi, spec.image_h))
    x = rng.uniform(0.0, spec.image_w - w)
    y = rng.uniform(0.0, spec.image_h - h)
    return Box(x, y, x + w, y + h)


def sample_scene(
    spec: SceneSpec, seed: int
) -> tuple[list[tuple[str, Box]], dict[str, int]]:
    """Draw a scene: per category a uniform count, boxes placed by rejection.

    Placement retries until pairwise IoU with every already-placed box stays
    at or below ``spec.max_overlap``; exceeding the retry bound raises and
    names the offending category.  Deterministic under seed.
    """
    rng = np.random.default_rng(seed)
    gts: list[tuple[str, Box]] = []
    boxes: list[Box] = []
    counts: dict[str, int] = {}
    for cat, (lo, hi) in spec.count_ranges.items():
        n = int(rng.integers(lo, hi + 1))
        counts[cat] = n
        for _ in range(n):
            for _attempt in range(spec.max_retries):
                box = _random_box(rng, spec)
                if _iou_vs_all(box, boxes) <= spec.max_overlap:
                    break
            else:
                raise RuntimeError(
                    f"could not place a {cat!r} box after {spec.max_retries} retries"
                )
            boxes.append(box)
            gts.append((cat, box))
    return gts, counts


def perturb_detections(
    gts: list[tuple[str, Box]],
    noise: NoiseSpec,
    seed: int,
    image_w: float = 1024.0,
    image_h: float = 1024.0,
) -> list[ScoredDetection]:
    """Emit pseudo-detections: jittered survivors plus spurious boxes.

    Each ground truth is missed with ``miss_rate``, otherwise emitted with
    corner jitter (stddev ``jitter_std``) and a true-score draw; with
    ``fp_rate`` it additionally spawns one spurious same-category box placed
    uniformly in the image.  Deterministic under seed.
    """
    rng = np.random.default_rng(seed)
    dets: list[ScoredDetection] = []
    for cat, box in gts:
        if rng.uniform() >= noise.miss_rate:
            jitter = rng.normal(0.0, noise.jitter_std, size=4) if noise.jitter_std > 0 else np.zeros(4)
            x0, y0, x1, y1 = (np.array(box.to_list()) + jitter).tolist()
            jittered = Box(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))
            score = rng.uniform(*noise.true_score)
            dets.append(ScoredDetection(jittered, cat, float(score)))
        if rng.uniform() < noise.fp_rate:
            w = rng.uniform(8.0, min(96.0, image_w))
            h = rng.uniform(8.0, min(96.0, image_h))
            x = rng.uniform(0.0, image_w - w)
            y = rng.uniform(0.0, image_h - h)
            score = rng.uniform(*noise.spurious_score)
            dets.append(ScoredDetection(Box(x, y, x + w, y + h), cat, float(score)))
    return dets


def oracle_count_prediction(
    gt_counts: dict[str, int],
    levels: tuple[int, ...] = DEFAULT_BASE_LEVELS,
    margin: float = 20.0,
) -> CountPrediction:
    """Perfect count-prior outputs for integration tests.

    Positive levels (band score > 0, outside the ignore bands) get an
    object probability of ~1 and the exact log-ratio target; everything else
    gets probability ~0 and a zero regression.
    """
    cats = tuple(gt_counts.keys())
    C, E = len(cats), len(levels)
    scores = np.tile(np.array([-margin, margin]), (C, E, 1))
    regressions = np.zeros((C, E))
    for ci, cat in enumerate(cats):
        g = int(gt_counts[cat])
        if g <= 0:
            continue
        for ei, base in enumerate(levels):
            if level_diff(g, base) > 0 and not in_ignore_band(g, base):
                scores[ci, ei] = (margin, -margin)
                regressions[ci, ei] = encode_count(g, base)
    return CountPrediction(cats, tuple(int(b) for b in levels), scores, regressions)
