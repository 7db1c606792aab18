"""Uniform-grid time averaging shared by the walk and graph modules."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import ValidationError

CHUNK = 1 << 15


def min_steps(T: float, max_rate: float, resolution: float = 0.1) -> int:
    """Fewest trapezoid intervals on ``[0, T]`` with step ``<= resolution / max_rate``."""
    if max_rate <= 0.0:
        return 1
    return max(1, math.ceil(T * max_rate / resolution))


def time_average(f: Callable[[np.ndarray], np.ndarray], T: float, steps: int) -> np.ndarray:
    """Composite-trapezoid estimate of ``(1/T) * integral_0^T f(s) ds``.

    ``f`` maps a 1-d array of times to an array whose leading axis is time;
    the grid is processed in chunks so memory stays bounded for long runs.
    """
    if not (math.isfinite(T) and T > 0.0):
        raise ValidationError(f"averaging time T must be finite and > 0, got {T!r}")
    if steps < 1:
        raise ValidationError(f"steps must be >= 1, got {steps}")
    h = T / steps
    total = None
    for start in range(0, steps + 1, CHUNK):
        idx = np.arange(start, min(start + CHUNK, steps + 1))
        w = np.full(idx.shape, h)
        w[idx == 0] *= 0.5
        w[idx == steps] *= 0.5
        vals = np.asarray(f(idx * h))
        part = np.tensordot(w, vals, axes=(0, 0))
        total = part if total is None else total + part
    return total / T
