"""Tabular Q-learning: sparse value storage, the one-step update, and
greedy / epsilon-greedy action selection.

States are tuples of integers, actions are integers, and absent table
entries read as exactly 0.0, so a fresh table behaves like one explicitly
initialized to zero over the whole (huge) state space.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from collections.abc import Iterable, Sequence

from .validation import check_unit_interval

DiscreteState = tuple[int, ...]
ActionId = int


def round_half_away(x: float) -> int:
    """Round to the nearest integer, halves away from zero.

    Python's built-in round() is banker's rounding; state keys need the
    sign-symmetric rule so that e.g. +0.5 and -0.5 land on +1 and -1.
    """
    if x >= 0.0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))


@dataclass(frozen=True)
class QConfig:
    """Learning-rate / discount / exploration configuration.

    alpha: learning rate in [0, 1].
    gamma: discount factor in [0, 1).
    epsilon: exploration rate in [0, 1]; 0 gives the pure greedy policy.
    tie_break: deterministic rule identifier; only "smallest" is defined
        (ties resolve to the smallest action id).
    """

    alpha: float = 0.7
    gamma: float = 0.7
    epsilon: float = 0.0
    epsilon_decay: float = 1.0  # per-episode multiplicative factor on epsilon
    tie_break: str = "smallest"  # or "null_first": prefer the action nearest 0

    def __post_init__(self) -> None:
        check_unit_interval(self.alpha, "alpha")
        check_unit_interval(self.gamma, "gamma", open_right=True)
        check_unit_interval(self.epsilon, "epsilon")
        check_unit_interval(self.epsilon_decay, "epsilon_decay")
        if self.tie_break not in ("smallest", "null_first"):
            raise ValueError(f"unknown tie_break rule {self.tie_break!r}")

    def epsilon_at(self, episode: int) -> float:
        """Exploration rate in effect during the given 0-based episode."""
        return self.epsilon * self.epsilon_decay**episode


class QTable:
    """Sparse state-action value table with default value 0.0.

    The table knows its action set so that row maxima (the bootstrap term
    of the update) and persistence are well defined without materializing
    rows for unseen states.
    """

    def __init__(self, actions: Sequence[ActionId] = (-1, 0, 1)):
        acts = tuple(int(a) for a in actions)
        if not acts:
            raise ValueError("action set must be non-empty")
        if len(set(acts)) != len(acts):
            raise ValueError("action set contains duplicates")
        self.actions: tuple[ActionId, ...] = acts
        self._values: dict[tuple[DiscreteState, ActionId], float] = {}

    def get(self, state: DiscreteState, action: ActionId) -> float:
        return self._values.get((state, action), 0.0)

    def set(self, state: DiscreteState, action: ActionId, value: float) -> None:
        self._values[(state, action)] = float(value)

    def max_value(self, state: DiscreteState) -> float:
        """max_a Q(state, a) over the declared action set."""
        return max(self._values.get((state, a), 0.0) for a in self.actions)

    def items(self) -> Iterable[tuple[tuple[DiscreteState, ActionId], float]]:
        return self._values.items()

    def __len__(self) -> int:
        return len(self._values)

    def save(self, path: str) -> None:
        """Write the table as text, one `s1,...,sn;a;value` line per entry,
        sorted by key so snapshots diff cleanly."""
        lines = []
        for (state, action), value in sorted(self._values.items()):
            lines.append(f"{','.join(str(c) for c in state)};{action};{value!r}")
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines))
            if lines:
                fh.write("\n")

    @classmethod
    def load(cls, path: str, actions: Sequence[ActionId] = (-1, 0, 1)) -> "QTable":
        table = cls(actions)
        with open(path, "r", encoding="ascii") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                state_part, action_part, value_part = line.split(";")
                state = tuple(int(c) for c in state_part.split(","))
                table.set(state, int(action_part), float(value_part))
        return table


def q_update(
    table: QTable,
    state: DiscreteState,
    action: ActionId,
    reward: float,
    next_state: DiscreteState,
    cfg: QConfig,
) -> float:
    """One-step value update.

    Q(s,a) <- (1 - alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a'))

    Touches exactly the (state, action) entry and returns its new value.
    """
    old = table.get(state, action)
    target = reward + cfg.gamma * table.max_value(next_state)
    new = (1.0 - cfg.alpha) * old + cfg.alpha * target
    table.set(state, action, new)
    return new


def greedy_action(
    table: QTable,
    state: DiscreteState,
    actions: Sequence[ActionId] | None = None,
    tie_break: str = "smallest",
) -> ActionId:
    """argmax_a Q(state, a) under a deterministic tie-break rule.

    "smallest" (the default) resolves ties to the smallest action id;
    "null_first" prefers the action nearest 0 (do nothing absent evidence),
    then the smaller id.
    """
    acts = table.actions if actions is None else tuple(int(a) for a in actions)
    if not acts:
        raise ValueError("action set must be non-empty")
    if tie_break == "null_first":
        ordered = sorted(acts, key=lambda a: (abs(a), a))
    else:
        ordered = sorted(acts)
    best_action: ActionId | None = None
    best_value = -math.inf
    for a in ordered:
        v = table.get(state, a)
        if v > best_value:
            best_value = v
            best_action = a
    assert best_action is not None
    return best_action


def epsilon_greedy_action(
    table: QTable,
    state: DiscreteState,
    actions: Sequence[ActionId],
    cfg: QConfig,
    rng: random.Random,
) -> ActionId:
    """Greedy with probability 1 - epsilon, otherwise uniform over the
    action set. With epsilon == 0 the rng is never consulted."""
    acts = tuple(int(a) for a in actions)
    if not acts:
        raise ValueError("action set must be non-empty")
    if cfg.epsilon > 0.0 and rng.random() < cfg.epsilon:
        return rng.choice(sorted(acts))
    return greedy_action(table, state, acts, tie_break=cfg.tie_break)
