"""Inverted pendulum on a velocity-commanded cart.

The pole angle theta is measured in degrees with 180 upright; theta below
180 means the pole leans toward negative cart x, so the rule controller's
"move left when theta <= 135" is corrective. Actions in {-1, 0, +1} set
the commanded cart velocity to -v_cmd, 0 or +v_cmd; the resulting cart
acceleration is what torques the pole (the pole does not back-react on the
cart). Integration is semi-implicit Euler.

The safe region is theta in [135, 225]; the reward band is [175, 185].
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .exceptions import ContractViolationError
from .validation import check_positive

SAFE_THETA_MIN = 135.0
SAFE_THETA_MAX = 225.0
REWARD_THETA_MIN = 175.0
REWARD_THETA_MAX = 185.0

THETA_BIN_WIDTH = 3.0  # degrees, over the safe region
THETA_DOT_BINS = 15
THETA_DOT_CLIP = 90.0  # degrees/second

ACTIONS = (-1, 0, 1)


@dataclass(frozen=True)
class PendulumState:
    theta: float  # degrees in [0, 360), 180 = upright
    theta_dot: float  # degrees/second
    cart_x: float  # meters
    cart_v: float  # meters/second


@dataclass(frozen=True)
class PendulumParams:
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    half_length: float = 0.5
    gravity: float = 9.8
    dt: float = 0.002
    v_cmd: float = 10.0
    a_max: float = 100.0  # cart servo slew limit, m/s^2
    pivot_damping: float = 0.2  # 1/s; 0 gives the conservative pole
    track_limit: float = 10.0

    def __post_init__(self) -> None:
        for name in (
            "cart_mass",
            "pole_mass",
            "half_length",
            "gravity",
            "dt",
            "v_cmd",
            "a_max",
            "track_limit",
        ):
            check_positive(getattr(self, name), name)
        if self.pivot_damping < 0.0:
            raise ValueError("pivot_damping must be >= 0")
        if self.dt > 0.02:
            raise ValueError("dt must be <= 0.02 s")


def pendulum_step(state: PendulumState, action: int, params: PendulumParams) -> PendulumState:
    """Advance one step of the cart-pole under a velocity command.

    The cart servos toward action * v_cmd with acceleration capped at
    a_max; that acceleration is what torques the pole:
        phi_dd = (3 / 4 l) (g sin phi - a cos phi)
    with phi the angle from upright. Pole inertia about the pivot is the
    uniform-rod value, which makes the equation mass-independent. The cart
    cannot thrust into the track ends.
    """
    if action not in ACTIONS:
        raise ValueError(f"action must be one of {ACTIONS}, got {action!r}")
    target_v = action * params.v_cmd
    dv_cap = params.a_max * params.dt
    pinned_out = (state.cart_x >= params.track_limit and target_v > 0.0) or (
        state.cart_x <= -params.track_limit and target_v < 0.0
    )
    if pinned_out:
        # Braking at a track end: shed speed at the servo limit, no thrust.
        dv = _clamp(-state.cart_v, -dv_cap, dv_cap)
    else:
        dv = _clamp(target_v - state.cart_v, -dv_cap, dv_cap)
    accel = dv / params.dt

    phi = math.radians(state.theta - 180.0)
    omega = math.radians(state.theta_dot)
    coeff = 3.0 / (4.0 * params.half_length)
    phi_dd = (
        coeff * (params.gravity * math.sin(phi) - accel * math.cos(phi))
        - params.pivot_damping * omega
    )
    omega += params.dt * phi_dd
    phi += params.dt * omega

    cart_v = state.cart_v + dv
    cart_x = state.cart_x + params.dt * cart_v
    if cart_x > params.track_limit:
        cart_x, cart_v = params.track_limit, 0.0
    elif cart_x < -params.track_limit:
        cart_x, cart_v = -params.track_limit, 0.0

    theta = (math.degrees(phi) + 180.0) % 360.0
    return PendulumState(
        theta=theta,
        theta_dot=math.degrees(omega),
        cart_x=cart_x,
        cart_v=cart_v,
    )


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else (hi if v > hi else v)


def pendulum_model_available(state: PendulumState) -> bool:
    """True outside the safe region (boundaries included), where the rule
    controller takes over from the learner."""
    return state.theta <= SAFE_THETA_MIN or state.theta >= SAFE_THETA_MAX


def safety_controller(state: PendulumState) -> int:
    """Rule controller for excursions: at or below 135 degrees move the
    cart left, at or above 225 move it right. Must not be consulted inside
    the safe region."""
    if state.theta <= SAFE_THETA_MIN:
        return -1
    if state.theta >= SAFE_THETA_MAX:
        return 1
    raise ContractViolationError(
        f"safety controller consulted inside the safe region (theta={state.theta})"
    )


def pendulum_reward(state: PendulumState) -> int:
    """+1 inside the closed band [175, 185] degrees, else -1."""
    return 1 if REWARD_THETA_MIN <= state.theta <= REWARD_THETA_MAX else -1


def is_violation(state: PendulumState) -> bool:
    """A safety violation is any step spent outside [135, 225] degrees."""
    return state.theta < SAFE_THETA_MIN or state.theta > SAFE_THETA_MAX


def discretize_pendulum(state: PendulumState) -> tuple[int, int]:
    """Bin (theta, theta_dot) for the tabular learner: 3-degree theta bins
    across the safe region (outside values clamp to the edge bins) and 15
    theta_dot bins clamped at +-90 deg/s."""
    n_theta = int((SAFE_THETA_MAX - SAFE_THETA_MIN) / THETA_BIN_WIDTH)
    theta_bin = int(math.floor((state.theta - SAFE_THETA_MIN) / THETA_BIN_WIDTH))
    theta_bin = max(0, min(n_theta - 1, theta_bin))
    span = 2.0 * THETA_DOT_CLIP / THETA_DOT_BINS
    dot_bin = int(math.floor((state.theta_dot + THETA_DOT_CLIP) / span))
    dot_bin = max(0, min(THETA_DOT_BINS - 1, dot_bin))
    return theta_bin, dot_bin


def initial_pendulum_state(rng: random.Random) -> PendulumState:
    """Episode start: near-upright pole, cart centered and at rest."""
    return PendulumState(
        theta=rng.uniform(REWARD_THETA_MIN, REWARD_THETA_MAX),
        theta_dot=rng.uniform(-5.0, 5.0),
        cart_x=0.0,
        cart_v=0.0,
    )


class PendulumSim:
    """Thin episode wrapper mirroring the Pong simulator's surface."""

    def __init__(self, params: PendulumParams | None = None):
        self.params = params or PendulumParams()

    def reset(self, seed: int) -> PendulumState:
        return initial_pendulum_state(random.Random(seed))

    def step(self, state: PendulumState, action: int) -> tuple[PendulumState, int]:
        nxt = pendulum_step(state, action, self.params)
        return nxt, pendulum_reward(nxt)
