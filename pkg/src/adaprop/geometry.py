"""Axis-aligned box arithmetic, IoU, anchor grids, and offset encode/decode.

Coordinates are continuous (sub-pixel allowed); nothing in here rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Box",
    "AnchorSpec",
    "BoxOffsets",
    "iou",
    "iou_matrix",
    "generate_anchors",
    "encode_box",
    "decode_box",
    "is_inside",
]


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle in image coordinates (corners)."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"box corners out of order: {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0

    @classmethod
    def from_center(cls, cx: float, cy: float, w: float, h: float) -> "Box":
        return cls(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)

    def to_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "Box":
        if len(values) != 4:
            raise ValueError(f"box needs 4 coordinates, got {len(values)}")
        vals = [float(v) for v in values]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"box coordinates must be finite, got {vals}")
        return cls(*vals)


@dataclass(frozen=True)
class AnchorSpec:
    """Anchor template: side lengths, height:width ratios, and grid stride."""

    scales: tuple[float, ...] = (96.0, 128.0, 256.0, 512.0)
    ratios: tuple[float, ...] = (1.0, 2.0, 0.5)
    stride: float = 16.0

    def __post_init__(self) -> None:
        if not self.scales or any(s <= 0 for s in self.scales):
            raise ValueError("scales must be nonempty and positive")
        if not self.ratios or any(r <= 0 for r in self.ratios):
            raise ValueError("ratios must be nonempty and positive")
        if self.stride <= 0:
            raise ValueError("stride must be positive")

    @property
    def anchors_per_position(self) -> int:
        return len(self.scales) * len(self.ratios)


@dataclass(frozen=True)
class BoxOffsets:
    """Center offsets normalized by anchor size plus log size ratios."""

    t_x: float
    t_y: float
    t_w: float
    t_h: float

    def __post_init__(self) -> None:
        for v in (self.t_x, self.t_y, self.t_w, self.t_h):
            if not math.isfinite(v):
                raise ValueError(f"offsets must be finite: {self}")

    def to_list(self) -> list[float]:
        return [self.t_x, self.t_y, self.t_w, self.t_h]


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes; 0 when the union is empty."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return inter / union


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU of two (N,4) / (M,4) corner arrays, returned as (N,M)."""
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    ix = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    iy = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.clip(ix, 0, None) * np.clip(iy, 0, None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(union > 0, inter / np.maximum(union, 1e-300), 0.0)
    return out


def generate_anchors(grid_w: int, grid_h: int, spec: AnchorSpec) -> list[Box]:
    """Tile anchors over a grid_w x grid_h grid.

    Ordering is deterministic: row-major positions (y outer, x inner), then
    scale-major, ratio-minor.  Scale s with ratio r:1 keeps area s^2
    (width s/sqrt(r), height s*sqrt(r)); anchors are centered on their cell.
    """
    if grid_w < 1 or grid_h < 1:
        raise ValueError("grid dimensions must be >= 1")
    anchors: list[Box] = []
    for gy in range(grid_h):
        cy = (gy + 0.5) * spec.stride
        for gx in range(grid_w):
            cx = (gx + 0.5) * spec.stride
            for s in spec.scales:
                for r in spec.ratios:
                    w = s / math.sqrt(r)
                    h = s * math.sqrt(r)
                    anchors.append(Box.from_center(cx, cy, w, h))
    return anchors


def encode_box(anchor: Box, target: Box) -> BoxOffsets:
    """Encode a target box relative to an anchor in center/size form."""
    if anchor.width <= 0 or anchor.height <= 0:
        raise ValueError("anchor must have positive width and height")
    if target.width <= 0 or target.height <= 0:
        raise ValueError("degenerate target box (zero width or height)")
    ax, ay = anchor.center
    tx, ty = target.center
    return BoxOffsets(
        t_x=(tx - ax) / anchor.width,
        t_y=(ty - ay) / anchor.height,
        t_w=math.log(target.width / anchor.width),
        t_h=math.log(target.height / anchor.height),
    )


def decode_box(anchor: Box, offsets: BoxOffsets) -> Box:
    """Exact inverse of :func:`encode_box`."""
    if anchor.width <= 0 or anchor.height <= 0:
        raise ValueError("anchor must have positive width and height")
    ax, ay = anchor.center
    cx = offsets.t_x * anchor.width + ax
    cy = offsets.t_y * anchor.height + ay
    w = anchor.width * math.exp(offsets.t_w)
    h = anchor.height * math.exp(offsets.t_h)
    return Box.from_center(cx, cy, w, h)


def is_inside(b: Box, image_w: float, image_h: float) -> bool:
    """Whether the box lies fully inside the image (edges inclusive)."""
    if image_w <= 0 or image_h <= 0:
        raise ValueError("image dimensions must be positive")
    return b.x_min >= 0 and b.y_min >= 0 and b.x_max <= image_w and b.y_max <= image_h
