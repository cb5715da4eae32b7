"""Ball model: three-frame finite-difference velocity estimation and
forward propagation to the defended plane.

The propagation is certainty-equivalent: the estimator's noise variance is
carried for diagnostics but dropped for prediction, since zero-mean noise
under a quadratic terminal cost shifts every action's expected cost by the
same constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import HorizonExceededError, NoImpactError


@dataclass(frozen=True)
class Centroid:
    """Sprite centroid in game coordinates (pixels)."""

    x: float
    y: float


@dataclass(frozen=True)
class BallTrack:
    """The three most recent ball centroids, oldest first, plus a flag set
    when any bounce (wall or paddle) happened since the previous frame."""

    p_tm2: Centroid
    p_tm1: Centroid
    p_t: Centroid
    bounce_since_last: bool = False


@dataclass(frozen=True)
class VelocityEstimate:
    """Per-axis velocity mean and sample variance, pixels/step."""

    v_x: float
    v_y: float
    var_x: float
    var_y: float


def estimate_velocity(track: BallTrack) -> VelocityEstimate:
    """Estimate the ball velocity from three consecutive centroids.

    With no bounce, each axis uses the mean of the two one-step differences
    and their population variance. After a bounce the older difference is
    stale, so the most recent difference is used alone with zero variance.
    """
    if track is None or None in (track.p_tm2, track.p_tm1, track.p_t):
        raise ValueError("track requires three consecutive centroids")
    v_x1 = track.p_t.x - track.p_tm1.x
    v_x2 = track.p_tm1.x - track.p_tm2.x
    v_y1 = track.p_t.y - track.p_tm1.y
    v_y2 = track.p_tm1.y - track.p_tm2.y
    if track.bounce_since_last:
        return VelocityEstimate(v_x=v_x1, v_y=v_y1, var_x=0.0, var_y=0.0)
    # Population variance of two samples reduces to ((d1 - d2) / 2)^2.
    return VelocityEstimate(
        v_x=0.5 * (v_x1 + v_x2),
        v_y=0.5 * (v_y1 + v_y2),
        var_x=((v_x1 - v_x2) / 2.0) ** 2,
        var_y=((v_y1 - v_y2) / 2.0) ** 2,
    )


def _fold(y: float, lo: float, hi: float) -> float:
    """Reflect a free-flight ordinate into [lo, hi] (triangle wave)."""
    span = hi - lo
    if span <= 0.0:
        return lo
    z = math.fmod(y - lo, 2.0 * span)
    if z < 0.0:
        z += 2.0 * span
    return lo + z if z <= span else lo + (2.0 * span - z)


def predict_arrival(
    pos: Centroid,
    vel: VelocityEstimate,
    paddle_plane_x: float,
    y_min: float,
    y_max: float,
    t_max: int = 200,
) -> tuple[int, float]:
    """Propagate the mean ball dynamics to the paddle plane.

    Returns (T, y_arrival): the number of steps until the ball first
    reaches or crosses paddle_plane_x, and its ordinate there after elastic
    reflections at y_min / y_max. Equivalent to stepping x += v_x,
    y += v_y with reflection, but computed in closed form: T is the first
    crossing count and the arrival ordinate is the fold of the free
    vertical flight into the court.

    Raises NoImpactError when v_x is zero or points away from the plane,
    HorizonExceededError when T would exceed t_max.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    dx = paddle_plane_x - pos.x
    if vel.v_x == 0.0 or dx == 0.0 or (dx > 0.0) != (vel.v_x > 0.0):
        raise NoImpactError(
            f"ball at x={pos.x} with v_x={vel.v_x} never reaches plane x={paddle_plane_x}"
        )
    steps = math.ceil(dx / vel.v_x)
    if steps > t_max:
        raise HorizonExceededError(f"arrival in {steps} steps exceeds horizon {t_max}")
    y_arrival = _fold(pos.y + steps * vel.v_y, y_min, y_max)
    return steps, y_arrival
