"""Input validation helpers shared across the public surfaces."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

FRAME_SHAPE = (80, 80)


def check_unit_interval(value: float, name: str, *, open_right: bool = False) -> float:
    """Validate a scalar in [0, 1] (or [0, 1) with open_right)."""
    v = float(value)
    if not np.isfinite(v) or v < 0.0 or v > 1.0 or (open_right and v == 1.0):
        hi = "1)" if open_right else "1]"
        raise ValueError(f"{name} must lie in [0, {hi}, got {value!r}")
    return v


def check_frame(frame: np.ndarray) -> np.ndarray:
    """Validate an 80x80 single-channel frame."""
    arr = np.asarray(frame)
    if arr.shape != FRAME_SHAPE:
        raise ValueError(f"frame must have shape {FRAME_SHAPE}, got {arr.shape}")
    return arr


def check_action(action: int, action_set: Sequence[int]) -> int:
    """Validate membership of an action in the declared action set."""
    a = int(action)
    if a != action or a not in tuple(action_set):
        raise ValueError(f"action {action!r} not in action set {tuple(action_set)}")
    return a


def check_seeds(seeds: Sequence[int]) -> tuple[int, ...]:
    """Validate a non-empty collection of integer seeds."""
    out = tuple(int(s) for s in seeds)
    if not out:
        raise ValueError("at least one seed is required")
    return out


def check_positive(value: float, name: str) -> float:
    v = float(value)
    if not np.isfinite(v) or v <= 0.0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return v
