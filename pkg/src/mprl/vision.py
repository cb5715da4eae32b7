"""Pixel-level sprite extraction from rendered frames.

This module works purely in frame coordinates: a centroid's y is the mean
matching row (downward from the top edge) and its x the mean matching
column (rightward from the left edge). Callers that track the ball in game
coordinates convert the column themselves; the simulator documents that
its game x axis runs from the right wall.
"""

from __future__ import annotations

import numpy as np

from .ball import Centroid
from .exceptions import BallNotFoundError, PaddleNotFoundError
from .validation import check_frame

BALL_VALUE = 236
AGENT_PADDLE_VALUE = 92
WINDOW_HALF_COLS = 6  # 12-column tracking window, full frame height


def _centroid_of(mask_rows: np.ndarray, mask_cols: np.ndarray) -> Centroid:
    return Centroid(x=float(mask_cols.mean()), y=float(mask_rows.mean()))


def find_ball(frame: np.ndarray, prior: Centroid | None = None) -> Centroid:
    """Locate the ball centroid by value matching.

    Without a prior the whole frame is scanned. With a prior only a
    12-column band around the prior's column (full height, clamped at the
    frame edges) is scanned, falling back to a full scan when the band is
    empty. Raises BallNotFoundError when no ball pixel exists anywhere.
    """
    arr = check_frame(frame)
    if prior is not None:
        center = int(np.floor(prior.x))
        lo = max(0, center - (WINDOW_HALF_COLS - 1))
        hi = min(arr.shape[1] - 1, center + WINDOW_HALF_COLS)
        rows, cols = np.nonzero(arr[:, lo : hi + 1] == BALL_VALUE)
        if rows.size:
            return Centroid(x=float(cols.mean()) + lo, y=float(rows.mean()))
    rows, cols = np.nonzero(arr == BALL_VALUE)
    if not rows.size:
        raise BallNotFoundError("no ball pixel in frame")
    return _centroid_of(rows, cols)


def find_paddle(frame: np.ndarray) -> float:
    """Centroid row of the agent paddle's pixels."""
    arr = check_frame(frame)
    rows = np.nonzero(arr == AGENT_PADDLE_VALUE)[0]
    if not rows.size:
        raise PaddleNotFoundError("no agent paddle pixel in frame")
    return float(rows.mean())
