"""Scalar loss primitives with analytic gradients and a finite-difference gate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ValueGrad",
    "smooth_l1",
    "softmax",
    "softmax_ce",
    "binary_log_loss",
    "finite_diff_check",
]


@dataclass(frozen=True)
class ValueGrad:
    """A loss value together with its gradient w.r.t. the inputs."""

    value: float
    grad: np.ndarray


def smooth_l1(x: float) -> ValueGrad:
    """Smooth L1: quadratic below |x|=1, linear above; C1 at the transition."""
    if not math.isfinite(x):
        raise ValueError("smooth_l1 input must be finite")
    if abs(x) < 1.0:
        return ValueGrad(0.5 * x * x, np.array([x]))
    return ValueGrad(abs(x) - 0.5, np.array([math.copysign(1.0, x)]))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax (max-subtracted)."""
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_ce(logits: Sequence[float], label: int) -> ValueGrad:
    """Cross-entropy of softmax(logits) against a hard label.

    grad[c] = softmax[c] - 1{c == label}; the gradient sums to zero.
    """
    z = np.asarray(logits, dtype=float)
    if z.size == 0:
        raise ValueError("softmax_ce requires nonempty logits")
    if not 0 <= label < z.size:
        raise ValueError(f"label {label} out of range for {z.size} logits")
    shifted = z - z.max()
    log_norm = math.log(np.exp(shifted).sum())
    p = np.exp(shifted - log_norm)
    value = log_norm - shifted[label]
    grad = p.copy()
    grad[label] -= 1.0
    return ValueGrad(float(value), grad)


def binary_log_loss(scores: Sequence[float], label: int) -> ValueGrad:
    """Two-class log loss: softmax cross-entropy over exactly two scores."""
    z = np.asarray(scores, dtype=float)
    if z.size != 2:
        raise ValueError("binary_log_loss requires exactly two scores")
    if label not in (0, 1):
        raise ValueError("label must be 0 or 1")
    return softmax_ce(z, label)


def finite_diff_check(
    f: Callable[[np.ndarray], ValueGrad],
    x: np.ndarray,
    eps: float = 1e-5,
) -> float:
    """Max relative error between f's analytic gradient and central differences.

    Error per coordinate is |analytic - numeric| / max(1, |analytic|).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = np.asarray(x, dtype=float)
    analytic = np.asarray(f(x).grad, dtype=float).ravel()
    if analytic.shape != x.ravel().shape:
        raise ValueError("gradient length does not match input dimensionality")
    worst = 0.0
    flat = x.ravel()
    for i in range(flat.size):
        step = np.zeros_like(flat)
        step[i] = eps
        hi = f((flat + step).reshape(x.shape)).value
        lo = f((flat - step).reshape(x.shape)).value
        if not (math.isfinite(hi) and math.isfinite(lo)):
            raise ValueError("non-finite function evaluation during finite differences")
        numeric = (hi - lo) / (2.0 * eps)
        err = abs(analytic[i] - numeric) / max(1.0, abs(analytic[i]))
        worst = max(worst, err)
    return worst
