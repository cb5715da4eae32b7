"""Hybrid controller orchestration: model-availability check, handover
between the predictive controller and the tabular learner, shaped reward
updates of the Q-table, and per-step bookkeeping.

One episode runner drives both testbeds through small adapters. On every
step the runner asks the adapter for a model-based action; when one exists
it is applied while the learner's hypothetical action is still computed,
and consecutive model-controlled steps shape the table with r_bar (the two
agreed) or r_underbar (they differed), targeting the previous step's
model action. When no model action exists the learner acts. Environment
rewards reach the table on the learner's own transitions: per step for the
pendulum's dense band reward, and once per scored point for Pong, credited
to the most recent learner-controlled state-action pair.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field, replace

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .ball import BallTrack, Centroid, estimate_velocity, predict_arrival
from .exceptions import HorizonExceededError, NoImpactError
from .mpc import solve_pong_paddle
from .pendulum import (
    PendulumSim,
    discretize_pendulum,
    is_violation,
    pendulum_model_available,
    safety_controller,
)
from .pong import (
    ACTIONS,
    AGENT_PLANE_X,
    BALL_Y_MAX,
    BALL_Y_MIN,
    COURT_SIZE,
    GameEvent,
    PongSim,
)
from .qtable import (
    QConfig,
    QTable,
    epsilon_greedy_action,
    q_update,
    round_half_away,
)
from .vision import find_ball, find_paddle

MPC = "MPC"
QL = "QL"


@dataclass(frozen=True)
class MprlConfig:
    """Hybrid-agent parameters: shaped rewards, handover threshold, learner
    configuration and the prediction horizon cap."""

    r_bar: float = 0.1
    r_underbar: float = 0.0
    h_y: float = 5.0
    qcfg: QConfig = field(default_factory=QConfig)
    horizon_cap: int = 200
    attack_zero_updates: bool = False

    def __post_init__(self) -> None:
        if not self.r_bar > 0.0:
            raise ValueError(f"r_bar must be positive, got {self.r_bar}")
        if self.r_underbar > 0.0:
            raise ValueError(f"r_underbar must be <= 0, got {self.r_underbar}")
        if not self.h_y > 0.0:
            raise ValueError(f"h_y must be positive, got {self.h_y}")
        if self.horizon_cap < 1:
            raise ValueError("horizon_cap must be >= 1")


@dataclass(frozen=True)
class StepRecord:
    step: int
    controller: str  # MPC | QL
    state: tuple[int, ...]
    u: int | None  # model action, None on learner steps
    a: int | None  # learner action, None when the learner is disabled
    applied: int
    shaped_reward: float | None  # shaped update applied during this step
    env_reward: float
    extras: tuple


@dataclass
class EpisodeLog:
    records: list[StepRecord]
    game_reward: float

    @property
    def steps(self) -> int:
        return len(self.records)

    @property
    def mpc_steps(self) -> int:
        return sum(1 for r in self.records if r.controller == MPC)

    @property
    def ql_steps(self) -> int:
        return sum(1 for r in self.records if r.controller == QL)

    @property
    def agreements(self) -> int:
        return sum(
            1 for r in self.records if r.controller == MPC and r.a is not None and r.a == r.u
        )


def model_available(
    track: BallTrack | None,
    paddle_y: float,
    h_y: float,
    *,
    plane_x: float = AGENT_PLANE_X,
    y_min: float = BALL_Y_MIN,
    y_max: float = BALL_Y_MAX,
    t_max: int = 200,
) -> tuple[bool, tuple[int, float] | None]:
    """Handover predicate: the ball model is usable iff the track is valid,
    the ball approaches the agent (v_x < 0), propagation reaches the plane,
    and the predicted gap to the paddle exceeds h_y. Returns the
    (T, y_arrival) prediction when available; every failure maps to False.
    """
    if track is None:
        return False, None
    vel = estimate_velocity(track)
    if vel.v_x >= 0.0:
        return False, None
    try:
        steps, y_arrival = predict_arrival(track.p_t, vel, plane_x, y_min, y_max, t_max)
    except (NoImpactError, HorizonExceededError):
        return False, None
    if abs(y_arrival - paddle_y) <= h_y:
        return False, None
    return True, (steps, y_arrival)


def learn_from_env_reward(
    table: QTable,
    transition: tuple[tuple[int, ...], int, tuple[int, ...]],
    env_reward: float,
    qcfg: QConfig,
) -> float:
    """Apply the one-step update with an environment reward to a recorded
    (state, action, next_state) transition."""
    state, action, next_state = transition
    return q_update(table, state, action, env_reward, next_state, qcfg)


class PongAdapter:
    """Pong perception and control hookup: renders frames, extracts the
    ball and paddle by value matching, maintains the three-frame track
    (game coordinates: x measured from the right wall), and evaluates the
    handover predicate."""

    action_set = ACTIONS
    reward_cadence = "event"
    extras_header = ("score_a", "score_o")

    def __init__(self, sim: PongSim, cfg: MprlConfig, frame_sink=None):
        self.sim = sim
        self.cfg = cfg
        self.frame_sink = frame_sink
        self.state = None
        self._positions: deque[Centroid] = deque(maxlen=3)
        self._bounce = False
        self._prior: Centroid | None = None
        self.paddle_y = 0.0

    def reset(self, seed: int) -> None:
        self.state = self.sim.reset(seed)
        self._positions.clear()
        self._bounce = False
        self._prior = None
        self._observe()

    def _observe(self) -> None:
        frame = self.sim.render(self.state)
        if self.frame_sink is not None:
            self.frame_sink(self.state.step_index, frame)
        found = find_ball(frame, self._prior)
        self._prior = found
        self.paddle_y = find_paddle(frame)
        self._positions.append(Centroid(x=float(COURT_SIZE - 1) - found.x, y=found.y))

    def track(self) -> BallTrack | None:
        if len(self._positions) < 3:
            return None
        p0, p1, p2 = self._positions
        return BallTrack(p_tm2=p0, p_tm1=p1, p_t=p2, bounce_since_last=self._bounce)

    def discrete_state(self) -> tuple[int, ...]:
        pos = self._positions[-1]
        tr = self.track()
        if tr is None:
            vx, vy = 0.0, 0.0
        else:
            vel = estimate_velocity(tr)
            vx, vy = vel.v_x, vel.v_y
        return (
            round_half_away(pos.x),
            round_half_away(pos.y),
            round_half_away(vx),
            round_half_away(vy),
            round_half_away(self.paddle_y),
        )

    def model_action(self) -> int | None:
        ok, prediction = model_available(
            self.track(),
            self.paddle_y,
            self.cfg.h_y,
            t_max=self.cfg.horizon_cap,
        )
        if not ok:
            return None
        steps, y_arrival = prediction
        return solve_pong_paddle(self.paddle_y, y_arrival, steps)

    def step(self, applied: int) -> tuple[float, tuple]:
        self.state, event, reward = self.sim.step(self.state, applied)
        if event in (GameEvent.AGENT_SCORED, GameEvent.OPPONENT_SCORED):
            # Ball teleported to the serve position: the track is stale.
            self._positions.clear()
            self._prior = None
            self._bounce = False
        else:
            self._bounce = event in (
                GameEvent.WALL_BOUNCE,
                GameEvent.AGENT_BOUNCE,
                GameEvent.OPPONENT_BOUNCE,
            )
        self._observe()
        return float(reward), (self.state.score_agent, self.state.score_opponent)

    def done(self) -> bool:
        return self.sim.episode_over(self.state)

    def game_reward(self) -> float:
        return float(self.state.score_agent - self.state.score_opponent)


class PendulumAdapter:
    """Pendulum hookup: the model is available outside the safe region,
    where the rule controller acts; inside, the learner balances on the
    dense band reward."""

    action_set = (-1, 0, 1)
    reward_cadence = "per_step"
    extras_header = ("theta", "theta_dot", "violation")

    def __init__(self, sim: PendulumSim):
        self.sim = sim
        self.state = None
        self._total_reward = 0.0

    def reset(self, seed: int) -> None:
        self.state = self.sim.reset(seed)
        self._total_reward = 0.0

    def discrete_state(self) -> tuple[int, ...]:
        return discretize_pendulum(self.state)

    def model_action(self) -> int | None:
        if pendulum_model_available(self.state):
            return safety_controller(self.state)
        return None

    def step(self, applied: int) -> tuple[float, tuple]:
        pre = self.state
        self.state, reward = self.sim.step(pre, applied)
        self._total_reward += reward
        extras = (pre.theta, pre.theta_dot, 1 if is_violation(pre) else 0)
        return float(reward), extras

    def done(self) -> bool:
        return False  # fixed-length episodes; the runner enforces the cap

    def game_reward(self) -> float:
        return self._total_reward


def run_episode(
    adapter,
    table: QTable,
    cfg: MprlConfig,
    rng: random.Random,
    *,
    use_mpc: bool = True,
    use_ql: bool = True,
    max_steps: int,
) -> EpisodeLog:
    """Run one episode of the hybrid control loop.

    use_mpc=False reduces the loop to plain Q-learning; use_ql=False gives
    the model-only controller (idle when no model action exists, no
    learning). shaped_reward on a record is the shaped update applied while
    processing that step, which targets the previous step's model action.
    """
    prev_mpc: tuple[tuple[int, ...], int, int | None] | None = None
    last_ql: tuple[tuple[int, ...], int] | None = None
    records: list[StepRecord] = []
    k = 0
    while k < max_steps and not adapter.done():
        s_k = adapter.discrete_state()
        u_k = adapter.model_action() if use_mpc else None
        shaped: float | None = None
        if u_k is not None:
            if use_ql and prev_mpc is not None:
                ps, pu, pa = prev_mpc
                shaped = cfg.r_bar if pa == pu else cfg.r_underbar
                q_update(table, ps, pu, shaped, s_k, cfg.qcfg)
            a_k = (
                epsilon_greedy_action(table, s_k, adapter.action_set, cfg.qcfg, rng)
                if use_ql
                else None
            )
            applied = u_k
            controller = MPC
            prev_mpc = (s_k, u_k, a_k)
        else:
            a_k = (
                epsilon_greedy_action(table, s_k, adapter.action_set, cfg.qcfg, rng)
                if use_ql
                else 0
            )
            applied = a_k
            controller = QL
            prev_mpc = None
            if use_ql:
                last_ql = (s_k, a_k)

        env_reward, extras = adapter.step(applied)

        if use_ql:
            s_next = adapter.discrete_state()
            if adapter.reward_cadence == "event":
                if env_reward != 0.0:
                    if last_ql is not None:
                        learn_from_env_reward(
                            table, (last_ql[0], last_ql[1], s_next), env_reward, cfg.qcfg
                        )
                elif cfg.attack_zero_updates and controller == QL:
                    learn_from_env_reward(table, (s_k, a_k, s_next), 0.0, cfg.qcfg)
            elif last_ql is not None:
                # Dense rewards: every step's reward reaches the most recent
                # learner-controlled pair (on learner steps that is the
                # current pair, i.e. the standard one-step update; during
                # takeovers the pair that preceded the excursion keeps
                # absorbing its consequences).
                learn_from_env_reward(
                    table, (last_ql[0], last_ql[1], s_next), env_reward, cfg.qcfg
                )

        records.append(
            StepRecord(
                step=k,
                controller=controller,
                state=s_k,
                u=u_k,
                a=a_k,
                applied=applied,
                shaped_reward=shaped,
                env_reward=env_reward,
                extras=extras,
            )
        )
        k += 1
    return EpisodeLog(records=records, game_reward=adapter.game_reward())


class HybridControlAgent(BaseEstimator):
    """Hybrid model-predictive / Q-learning agent with an estimator surface.

    Parameters mirror the experiment knobs (shaped rewards, handover
    threshold, learner rates, component toggles); fit() runs seeded
    episodes against the built-in simulator named by `env` and accumulates
    one persistent Q-table, predict() maps discrete states to greedy
    actions. use_mpc=False yields the pure learner, use_ql=False the pure
    model-based controller.
    """

    def __init__(
        self,
        env: str = "pong",
        r_bar: float = 0.1,
        r_underbar: float = 0.0,
        h_y: float = 5.0,
        alpha: float = 0.7,
        gamma: float = 0.7,
        epsilon: float = 0.0,
        epsilon_decay: float = 1.0,
        tie_break: str = "smallest",
        use_mpc: bool = True,
        use_ql: bool = True,
        horizon_cap: int = 200,
        opponent_lag: int = 2,
        episode_max_steps: int = 20000,
        pendulum_steps: int = 2000,
        attack_zero_updates: bool = False,
    ):
        self.env = env
        self.r_bar = r_bar
        self.r_underbar = r_underbar
        self.h_y = h_y
        self.alpha = alpha
        self.gamma = gamma
        self.epsilon = epsilon
        self.epsilon_decay = epsilon_decay
        self.tie_break = tie_break
        self.use_mpc = use_mpc
        self.use_ql = use_ql
        self.horizon_cap = horizon_cap
        self.opponent_lag = opponent_lag
        self.episode_max_steps = episode_max_steps
        self.pendulum_steps = pendulum_steps
        self.attack_zero_updates = attack_zero_updates

    def _config(self) -> MprlConfig:
        return MprlConfig(
            r_bar=self.r_bar,
            r_underbar=self.r_underbar,
            h_y=self.h_y,
            qcfg=QConfig(
                alpha=self.alpha,
                gamma=self.gamma,
                epsilon=self.epsilon,
                epsilon_decay=self.epsilon_decay,
                tie_break=self.tie_break,
            ),
            horizon_cap=self.horizon_cap,
            attack_zero_updates=self.attack_zero_updates,
        )

    def _make_adapter(self):
        if self.env == "pong":
            return PongAdapter(PongSim(opponent_lag=self.opponent_lag), self._config())
        if self.env == "pendulum":
            return PendulumAdapter(PendulumSim())
        raise ValueError(f"env must be 'pong' or 'pendulum', got {self.env!r}")

    def _max_steps(self) -> int:
        return self.episode_max_steps if self.env == "pong" else self.pendulum_steps

    def fit(self, episodes: int = 50, seed: int = 0, frame_sink=None):
        """Run `episodes` sequential episodes with one persistent Q-table.

        frame_sink, when given, receives (episode, step_index, frame) for
        every rendered Pong frame.
        """
        if episodes < 1:
            raise ValueError("episodes must be >= 1")
        cfg = self._config()
        adapter = self._make_adapter()
        self.q_table_ = QTable(adapter.action_set)
        self.episode_logs_: list[EpisodeLog] = []
        rng = random.Random(seed)
        for episode in range(episodes):
            if frame_sink is not None and isinstance(adapter, PongAdapter):
                adapter.frame_sink = lambda step, frame, _ep=episode: frame_sink(
                    _ep, step, frame
                )
            adapter.reset(seed=seed * 10_007 + episode)
            episode_cfg = replace(
                cfg, qcfg=replace(cfg.qcfg, epsilon=cfg.qcfg.epsilon_at(episode))
            )
            log = run_episode(
                adapter,
                self.q_table_,
                episode_cfg,
                rng,
                use_mpc=self.use_mpc,
                use_ql=self.use_ql,
                max_steps=self._max_steps(),
            )
            self.episode_logs_.append(log)
        self.history_ = [log.game_reward for log in self.episode_logs_]
        return self

    def predict(self, states):
        """Greedy actions for an iterable of discrete state tuples."""
        if not hasattr(self, "q_table_"):
            raise NotFittedError("fit() must run before predict()")
        from .qtable import greedy_action

        return [
            greedy_action(
                self.q_table_, tuple(int(c) for c in s), tie_break=self.tie_break
            )
            for s in states
        ]
