"""Experiment runner: seeded batches over agents and environments,
deterministic CSV emission, and the parameter sweeps.

Per seed, one agent instance runs `episodes` sequential episodes with a
persistent Q-table (the table resets across seeds). Per-step and
per-episode CSVs are partitioned by seed; the run-level summary aggregates
mean/min/max game reward per episode index across seeds.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, replace

from .agents import EpisodeLog, HybridControlAgent
from .pong import write_pgm
from .validation import check_seeds

ENVIRONMENTS = ("pong", "pendulum")
AGENT_KINDS = ("mprl", "q_only", "mpc_only")
SWEEP_PARAMS = {"hy": "h_y", "rbar": "r_bar", "runderbar": "r_underbar"}

PONG_STEP_HEADER = (
    "episode",
    "step",
    "controller",
    "s1",
    "s2",
    "s3",
    "s4",
    "s5",
    "u",
    "a",
    "applied",
    "shaped_r",
    "env_r",
    "score_a",
    "score_o",
)
PENDULUM_STEP_HEADER = (
    "episode",
    "step",
    "theta",
    "theta_dot",
    "controller",
    "action",
    "reward",
    "violation",
)
EPISODE_HEADER = ("episode", "game_reward", "steps", "mpc_steps", "ql_steps", "agreements")
SUMMARY_HEADER = ("episode", "mean_reward", "min_reward", "max_reward")


@dataclass(frozen=True)
class RunConfig:
    environment: str = "pong"
    agent: str = "mprl"
    episodes: int = 50
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    r_bar: float = 0.1
    r_underbar: float = 0.0
    h_y: float = 5.0
    alpha: float = 0.7
    gamma: float = 0.7
    epsilon: float = 0.0
    epsilon_decay: float = 1.0
    tie_break: str = "smallest"
    opponent_lag: int = 2
    pendulum_steps: int = 2000
    episode_max_steps: int = 20000
    attack_zero_updates: bool = False
    out_dir: str | None = None
    dump_frames: bool = False

    def __post_init__(self) -> None:
        if self.environment not in ENVIRONMENTS:
            raise ValueError(f"environment must be one of {ENVIRONMENTS}")
        if self.agent not in AGENT_KINDS:
            raise ValueError(f"agent must be one of {AGENT_KINDS}")
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        object.__setattr__(self, "seeds", check_seeds(self.seeds))
        if self.dump_frames and self.environment != "pong":
            raise ValueError("frame dumps are only defined for pong")


@dataclass
class BatchResult:
    config: RunConfig
    per_seed_logs: dict[int, list[EpisodeLog]]
    summary_rows: list[tuple[int, float, float, float]]  # episode, mean, min, max

    def rewards(self, seed: int) -> list[float]:
        return [log.game_reward for log in self.per_seed_logs[seed]]

    def mean_reward(self, first_episode: int, last_episode: int) -> float:
        """Mean game reward over an inclusive 1-based episode window,
        pooled across seeds."""
        values = []
        for logs in self.per_seed_logs.values():
            values.extend(
                log.game_reward for log in logs[first_episode - 1 : last_episode]
            )
        return sum(values) / len(values)


def episode_violations(log: EpisodeLog) -> int:
    """Safety-violation step count of a pendulum episode."""
    return sum(record.extras[2] for record in log.records)


def _make_agent(cfg: RunConfig) -> HybridControlAgent:
    return HybridControlAgent(
        env=cfg.environment,
        r_bar=cfg.r_bar,
        r_underbar=cfg.r_underbar,
        h_y=cfg.h_y,
        alpha=cfg.alpha,
        gamma=cfg.gamma,
        epsilon=cfg.epsilon,
        epsilon_decay=cfg.epsilon_decay,
        tie_break=cfg.tie_break,
        use_mpc=cfg.agent != "q_only",
        use_ql=cfg.agent != "mpc_only",
        opponent_lag=cfg.opponent_lag,
        episode_max_steps=cfg.episode_max_steps,
        pendulum_steps=cfg.pendulum_steps,
        attack_zero_updates=cfg.attack_zero_updates,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return str(int(value)) if value.is_integer() else repr(value)
    return str(value)


def _write_rows(path: str, header: tuple[str, ...], rows) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _step_rows(cfg: RunConfig, logs: list[EpisodeLog]):
    for episode, log in enumerate(logs):
        for r in log.records:
            if cfg.environment == "pong":
                yield (
                    episode,
                    r.step,
                    r.controller,
                    *r.state,
                    _fmt(r.u),
                    _fmt(r.a),
                    r.applied,
                    _fmt(r.shaped_reward),
                    _fmt(r.env_reward),
                    r.extras[0],
                    r.extras[1],
                )
            else:
                yield (
                    episode,
                    r.step,
                    _fmt(r.extras[0]),
                    _fmt(r.extras[1]),
                    r.controller,
                    r.applied,
                    _fmt(r.env_reward),
                    r.extras[2],
                )


def _episode_rows(logs: list[EpisodeLog]):
    for episode, log in enumerate(logs):
        yield (
            episode,
            _fmt(log.game_reward),
            log.steps,
            log.mpc_steps,
            log.ql_steps,
            log.agreements,
        )


def run_batch(cfg: RunConfig) -> BatchResult:
    """Run the configured batch and return per-seed logs plus the
    aggregated per-episode summary. Writes CSVs when out_dir is set."""
    out = cfg.out_dir
    if out is not None:
        os.makedirs(out, exist_ok=True)
    per_seed: dict[int, list[EpisodeLog]] = {}
    for seed in cfg.seeds:
        agent = _make_agent(cfg)
        frame_sink = None
        if cfg.dump_frames and out is not None:
            frame_dir = os.path.join(out, "frames", f"seed{seed}")
            os.makedirs(frame_dir, exist_ok=True)

            def frame_sink(episode, step, frame, _dir=frame_dir):
                write_pgm(frame, os.path.join(_dir, f"ep{episode}_step{step}.pgm"))

        agent.fit(episodes=cfg.episodes, seed=seed, frame_sink=frame_sink)
        per_seed[seed] = agent.episode_logs_
        if out is not None:
            _write_rows(
                os.path.join(out, f"steps_seed{seed}.csv"),
                PONG_STEP_HEADER if cfg.environment == "pong" else PENDULUM_STEP_HEADER,
                _step_rows(cfg, agent.episode_logs_),
            )
            _write_rows(
                os.path.join(out, f"episodes_seed{seed}.csv"),
                EPISODE_HEADER,
                _episode_rows(agent.episode_logs_),
            )

    summary_rows = []
    for episode in range(cfg.episodes):
        rewards = [per_seed[s][episode].game_reward for s in cfg.seeds]
        summary_rows.append(
            (episode, sum(rewards) / len(rewards), min(rewards), max(rewards))
        )
    if out is not None:
        _write_rows(
            os.path.join(out, "summary.csv"),
            SUMMARY_HEADER,
            ((e, _fmt(m), _fmt(lo), _fmt(hi)) for e, m, lo, hi in summary_rows),
        )
    return BatchResult(config=cfg, per_seed_logs=per_seed, summary_rows=summary_rows)


def run_sweep(cfg: RunConfig, param: str, values) -> dict[float, BatchResult]:
    """One run_batch per value of the swept parameter, shared seeds.

    Results land in out_dir/<param>=<value>/ plus a top-level sweep CSV.
    """
    if param not in SWEEP_PARAMS:
        raise ValueError(f"param must be one of {tuple(SWEEP_PARAMS)}")
    values = tuple(float(v) for v in values)
    if not values:
        raise ValueError("at least one sweep value is required")
    results: dict[float, BatchResult] = {}
    for value in values:
        sub_out = (
            os.path.join(cfg.out_dir, f"{param}={_fmt(value)}")
            if cfg.out_dir is not None
            else None
        )
        sub = replace(cfg, **{SWEEP_PARAMS[param]: value}, out_dir=sub_out)
        results[value] = run_batch(sub)
    if cfg.out_dir is not None:
        rows = []
        for value in values:
            for episode, mean, lo, hi in results[value].summary_rows:
                rows.append((param, _fmt(value), episode, _fmt(mean), _fmt(lo), _fmt(hi)))
        _write_rows(
            os.path.join(cfg.out_dir, f"sweep_{param}.csv"),
            ("param", "value", "episode", "mean_reward", "min_reward", "max_reward"),
            rows,
        )
    return results
