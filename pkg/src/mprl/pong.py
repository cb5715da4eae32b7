"""Deterministic, seedable Pong environment with value-coded 80x80 frames.

Geometry and conventions:

* Frames are 80x80 single-channel rasters; row 0 is the top of the court.
* Game coordinates: y is the frame row (increasing downward); x is the
  distance from the right wall (x = 79 - column, increasing leftward), so
  a negative x velocity means the ball is travelling toward the agent's
  paddle. The agent defends the right side of the screen (column 70), the
  built-in opponent the left side (column 9).
* Sprite values: background 144, opponent paddle 213, agent paddle 92,
  ball 236. Paddles are 1x8 bars, the ball a 2x2 block.

The ball moves on its centroid with integer velocities; walls reflect the
vertical component, paddle hits reflect the horizontal component and add a
placement-dependent vertical deflection. A crossing without paddle overlap
scores a point and re-serves from the center. First to 21 wins.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import StepAfterTerminalError
from .qtable import round_half_away
from .validation import check_action

Frame = np.ndarray  # 80x80 uint8 raster

COURT_SIZE = 80
BACKGROUND_VALUE = 144
BALL_VALUE = 236
AGENT_PADDLE_VALUE = 92
OPPONENT_PADDLE_VALUE = 213

AGENT_COLUMN = 70
OPPONENT_COLUMN = 9
AGENT_PLANE_X = float(COURT_SIZE - 1 - AGENT_COLUMN)  # 9.0
OPPONENT_PLANE_X = float(COURT_SIZE - 1 - OPPONENT_COLUMN)  # 70.0

PADDLE_HEIGHT = 8
PADDLE_HALF = PADDLE_HEIGHT / 2.0
PADDLE_Y_MIN = 4.5
PADDLE_Y_MAX = 74.5

BALL_Y_MIN = 0.0
BALL_Y_MAX = float(COURT_SIZE - 1)
MAX_BALL_VY = 3

SERVE_POSITION = (39.5, 39.5)
SERVE_VX_CHOICES = (-2, -1, 1, 2)
SERVE_VY_CHOICES = (-1, 0, 1)

# Arcade pacing: every RALLY_SPEEDUP_HITS paddle hits within one rally, the
# ball's horizontal speed steps up (capped), so no exchange lasts forever.
RALLY_SPEEDUP_HITS = 4
MAX_BALL_VX = 4

WIN_SCORE = 21
ACTIONS = (-1, 0, 1)

CENTER_X = (COURT_SIZE - 1) / 2.0


class GameEvent(enum.Enum):
    NONE = "none"
    WALL_BOUNCE = "wall_bounce"
    AGENT_BOUNCE = "agent_bounce"
    OPPONENT_BOUNCE = "opponent_bounce"
    AGENT_SCORED = "agent_scored"
    OPPONENT_SCORED = "opponent_scored"


@dataclass(frozen=True)
class PongState:
    ball_x: float
    ball_y: float
    ball_vx: float
    ball_vy: float
    agent_y: float
    opponent_y: float
    score_agent: int
    score_opponent: int
    step_index: int
    seed: int
    serve_index: int
    opp_hold: int  # consecutive states with the ball in the opponent half
    rally_hits: int = 0  # paddle bounces since the last serve


def _serve_velocity(seed: int, serve_index: int) -> tuple[float, float]:
    rng = random.Random(seed * 1_000_003 + serve_index)
    return float(rng.choice(SERVE_VX_CHOICES)), float(rng.choice(SERVE_VY_CHOICES))


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else (hi if v > hi else v)


class PongSim:
    """The environment. Instances hold only configuration; the mutable
    game state travels through reset()/step() as a value."""

    def __init__(self, opponent_lag: int = 2, paddle_speed: float = 1.0):
        if opponent_lag < 0:
            raise ValueError("opponent_lag must be >= 0")
        self.opponent_lag = int(opponent_lag)
        self.paddle_speed = float(paddle_speed)

    def reset(self, seed: int) -> PongState:
        vx, vy = _serve_velocity(seed, 0)
        return PongState(
            ball_x=SERVE_POSITION[0],
            ball_y=SERVE_POSITION[1],
            ball_vx=vx,
            ball_vy=vy,
            agent_y=39.5,
            opponent_y=39.5,
            score_agent=0,
            score_opponent=0,
            step_index=0,
            seed=int(seed),
            serve_index=0,
            opp_hold=0,
            rally_hits=0,
        )

    def episode_over(self, state: PongState) -> bool:
        return state.score_agent >= WIN_SCORE or state.score_opponent >= WIN_SCORE

    def opponent_policy(self, state: PongState) -> int:
        """Tracking-and-aiming controller, unit paddle speed, reacting only
        once the ball has spent more than `opponent_lag` steps in its half.

        When scrambling (far from the ball) it chases the ball's row; once
        close it lines up an off-center contact that deflects the ball
        toward whichever half the agent's paddle is not in. Aimed contacts
        keep every rally drifting, so two perfect defenses cannot lock into
        an endless straight exchange."""
        if state.ball_x <= CENTER_X or state.opp_hold <= self.opponent_lag:
            return 0
        diff = state.ball_y - state.opponent_y
        if abs(diff) > 6.0:
            return 1 if diff > 0 else -1
        # Aim away from the agent: contact offset +3 sends the ball down.
        desired_offset = 3.0 if state.agent_y <= 39.5 else -3.0
        aim = (state.ball_y - desired_offset) - state.opponent_y
        if abs(aim) <= 0.5:
            return 0
        return 1 if aim > 0 else -1

    def step(self, state: PongState, agent_action: int) -> tuple[PongState, GameEvent, int]:
        """Advance one step. Returns (next_state, event, env_reward) with
        env_reward +1 when the agent scores and -1 when it concedes."""
        if self.episode_over(state):
            raise StepAfterTerminalError("game already decided")
        action = check_action(agent_action, ACTIONS)

        opponent_y = _clamp(
            state.opponent_y + self.paddle_speed * self.opponent_policy(state),
            PADDLE_Y_MIN,
            PADDLE_Y_MAX,
        )
        agent_y = _clamp(
            state.agent_y + self.paddle_speed * action, PADDLE_Y_MIN, PADDLE_Y_MAX
        )

        # Vertical flight with wall reflection.
        y = state.ball_y + state.ball_vy
        vy = state.ball_vy
        wall = False
        while y < BALL_Y_MIN or y > BALL_Y_MAX:
            if y > BALL_Y_MAX:
                y = 2.0 * BALL_Y_MAX - y
            else:
                y = 2.0 * BALL_Y_MIN - y
            vy = -vy
            wall = True

        x = state.ball_x + state.ball_vx
        vx = state.ball_vx
        event = GameEvent.WALL_BOUNCE if wall else GameEvent.NONE
        reward = 0
        score_agent = state.score_agent
        score_opponent = state.score_opponent
        serve_index = state.serve_index
        rally_hits = state.rally_hits

        if vx < 0 and state.ball_x > AGENT_PLANE_X and x <= AGENT_PLANE_X:
            if abs(y - agent_y) <= PADDLE_HALF:
                x = 2.0 * AGENT_PLANE_X - x
                vx = -vx
                vy = _clamp(
                    vy + round_half_away((y - agent_y) / 2.0), -MAX_BALL_VY, MAX_BALL_VY
                )
                rally_hits += 1
                event = GameEvent.AGENT_BOUNCE
            else:
                event = GameEvent.OPPONENT_SCORED
                reward = -1
                score_opponent += 1
        elif vx > 0 and state.ball_x < OPPONENT_PLANE_X and x >= OPPONENT_PLANE_X:
            if abs(y - opponent_y) <= PADDLE_HALF:
                x = 2.0 * OPPONENT_PLANE_X - x
                vx = -vx
                vy = _clamp(
                    vy + round_half_away((y - opponent_y) / 2.0),
                    -MAX_BALL_VY,
                    MAX_BALL_VY,
                )
                rally_hits += 1
                event = GameEvent.OPPONENT_BOUNCE
            else:
                event = GameEvent.AGENT_SCORED
                reward = 1
                score_agent += 1

        if event in (GameEvent.AGENT_BOUNCE, GameEvent.OPPONENT_BOUNCE):
            if rally_hits % RALLY_SPEEDUP_HITS == 0 and abs(vx) < MAX_BALL_VX:
                vx += 1.0 if vx > 0 else -1.0

        if reward != 0:
            # Re-serve from the center; paddles re-center as well.
            serve_index += 1
            rally_hits = 0
            vx, vy = _serve_velocity(state.seed, serve_index)
            x, y = SERVE_POSITION
            agent_y = 39.5
            opponent_y = 39.5

        opp_hold = state.opp_hold + 1 if x > CENTER_X else 0

        next_state = replace(
            state,
            ball_x=x,
            ball_y=y,
            ball_vx=vx,
            ball_vy=vy,
            agent_y=agent_y,
            opponent_y=opponent_y,
            score_agent=score_agent,
            score_opponent=score_opponent,
            step_index=state.step_index + 1,
            serve_index=serve_index,
            opp_hold=opp_hold,
            rally_hits=rally_hits,
        )
        return next_state, event, reward

    def render(self, state: PongState) -> np.ndarray:
        """Rasterize the state into an 80x80 uint8 frame."""
        frame = np.full((COURT_SIZE, COURT_SIZE), BACKGROUND_VALUE, dtype=np.uint8)
        r = _paddle_top_row(state.opponent_y)
        frame[r : r + PADDLE_HEIGHT, OPPONENT_COLUMN] = OPPONENT_PADDLE_VALUE
        r = _paddle_top_row(state.agent_y)
        frame[r : r + PADDLE_HEIGHT, AGENT_COLUMN] = AGENT_PADDLE_VALUE
        row = int(np.floor(state.ball_y))
        col = int(np.floor(COURT_SIZE - 1 - state.ball_x))
        frame[max(row, 0) : row + 2, max(col, 0) : col + 2] = BALL_VALUE
        return frame


def _paddle_top_row(y: float) -> int:
    top = int(round(y - (PADDLE_HEIGHT - 1) / 2.0))
    return max(0, min(COURT_SIZE - PADDLE_HEIGHT, top))


def write_pgm(frame: np.ndarray, path: str) -> None:
    """Dump a frame as binary PGM (P5, maxval 255)."""
    arr = np.asarray(frame, dtype=np.uint8)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())
