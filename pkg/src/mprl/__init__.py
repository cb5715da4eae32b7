"""Hybrid model-predictive / tabular Q-learning control lab.

A receding-horizon controller and a tabular Q-learner hand control back
and forth: the controller acts whenever a model of the current situation
is available and shapes the learner's rewards toward its own choices; the
learner acts everywhere else. Two built-in testbeds exercise the loop: a
deterministic, frame-rendered Pong game and an inverted pendulum on a
velocity-commanded cart.
"""

from .agents import (
    EpisodeLog,
    HybridControlAgent,
    MprlConfig,
    PendulumAdapter,
    PongAdapter,
    StepRecord,
    learn_from_env_reward,
    model_available,
    run_episode,
)
from .ball import BallTrack, Centroid, VelocityEstimate, estimate_velocity, predict_arrival
from .harness import BatchResult, RunConfig, episode_violations, run_batch, run_sweep
from .mpc import HorizonProblem, LinearModel, solve_enumerative, solve_pong_paddle
from .pendulum import (
    PendulumParams,
    PendulumSim,
    PendulumState,
    discretize_pendulum,
    pendulum_model_available,
    pendulum_reward,
    pendulum_step,
    safety_controller,
)
from .pong import Frame, GameEvent, PongSim, PongState, write_pgm
from .qtable import (
    QConfig,
    QTable,
    epsilon_greedy_action,
    greedy_action,
    q_update,
    round_half_away,
)
from .vision import find_ball, find_paddle

__all__ = [
    "BallTrack",
    "BatchResult",
    "Centroid",
    "EpisodeLog",
    "Frame",
    "GameEvent",
    "HorizonProblem",
    "HybridControlAgent",
    "LinearModel",
    "MprlConfig",
    "PendulumAdapter",
    "PendulumParams",
    "PendulumSim",
    "PendulumState",
    "PongAdapter",
    "PongSim",
    "PongState",
    "QConfig",
    "QTable",
    "RunConfig",
    "StepRecord",
    "VelocityEstimate",
    "discretize_pendulum",
    "episode_violations",
    "epsilon_greedy_action",
    "estimate_velocity",
    "find_ball",
    "find_paddle",
    "greedy_action",
    "learn_from_env_reward",
    "model_available",
    "pendulum_model_available",
    "pendulum_reward",
    "pendulum_step",
    "predict_arrival",
    "q_update",
    "round_half_away",
    "run_batch",
    "run_episode",
    "run_sweep",
    "safety_controller",
    "solve_enumerative",
    "solve_pong_paddle",
    "write_pgm",
]

__version__ = "0.1.0"
