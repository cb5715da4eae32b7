"""Receding-horizon optimization over finite discrete action sets.

Two solvers are provided: a generic exhaustive-enumeration solver for
small linear problems (affine dynamics, stage/terminal costs, optional
state box), and a closed-form specialization for the paddle-interception
cost, where the reachable set structure makes the optimal first move the
sign of the gap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from collections.abc import Callable, Sequence

import numpy as np

from .exceptions import CapExceededError, InfeasibleProblemError

DEFAULT_ENUMERATION_CAP = 3**12


@dataclass(frozen=True)
class LinearModel:
    """Time-invariant affine dynamics x' = A x + D + C u with optional
    per-component process-noise variance (diagnostic only; the solvers are
    certainty-equivalent)."""

    a: np.ndarray
    c: np.ndarray
    d: np.ndarray
    noise_variance: np.ndarray | None = None

    def __post_init__(self) -> None:
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        c = np.atleast_2d(np.asarray(self.c, dtype=float))
        d = np.atleast_1d(np.asarray(self.d, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"A must be square, got {a.shape}")
        n = a.shape[0]
        if c.shape[0] != n:
            raise ValueError(f"C must have {n} rows, got {c.shape}")
        if d.shape != (n,):
            raise ValueError(f"D must have shape ({n},), got {d.shape}")
        nv = self.noise_variance
        if nv is not None:
            nv = np.atleast_1d(np.asarray(nv, dtype=float))
            if nv.shape != (n,) or np.any(nv < 0.0):
                raise ValueError("noise_variance must be non-negative with one entry per state")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "noise_variance", nv)

    @property
    def state_dim(self) -> int:
        return self.a.shape[0]

    @property
    def input_dim(self) -> int:
        return self.c.shape[1]


@dataclass(frozen=True)
class HorizonProblem:
    """A finite-horizon problem instance.

    action_set is an ordered sequence of input vectors; the listed order is
    also the tie-break order of the enumerative solver. stage_cost is
    evaluated at (x_t, u_t) for t = 0..T-1 and terminal_cost at x_T; either
    may be omitted. state_box, when given, is a (low, high) pair of
    per-component bounds checked on every reached state x_1..x_T.
    """

    model: LinearModel
    horizon: int
    action_set: tuple
    state_box: tuple[np.ndarray, np.ndarray] | None = None
    stage_cost: Callable[[np.ndarray, np.ndarray], float] | None = None
    terminal_cost: Callable[[np.ndarray], float] | None = None

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        acts = tuple(
            np.atleast_1d(np.asarray(u, dtype=float)) for u in self.action_set
        )
        if not acts:
            raise ValueError("action_set must be non-empty")
        m = self.model.input_dim
        for u in acts:
            if u.shape != (m,):
                raise ValueError(f"action {u} does not match input dim {m}")
        object.__setattr__(self, "action_set", acts)
        if self.state_box is not None:
            lo = np.asarray(self.state_box[0], dtype=float)
            hi = np.asarray(self.state_box[1], dtype=float)
            n = self.model.state_dim
            if lo.shape != (n,) or hi.shape != (n,):
                raise ValueError("state_box bounds must match the state dimension")
            object.__setattr__(self, "state_box", (lo, hi))


def solve_enumerative(
    prob: HorizonProblem,
    x0: Sequence[float] | np.ndarray,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> tuple[np.ndarray, float]:
    """Exhaustively evaluate every action sequence on the noiseless dynamics.

    Returns (u0, cost) where u0 is the first action of the best sequence.
    Ties resolve to the lexicographically earliest sequence in action_set
    order. Raises CapExceededError when |action_set|^T > cap and
    InfeasibleProblemError when no sequence satisfies the state box.
    """
    n_actions = len(prob.action_set)
    if n_actions**prob.horizon > cap:
        raise CapExceededError(
            f"{n_actions}^{prob.horizon} sequences exceed the cap of {cap}"
        )
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (prob.model.state_dim,):
        raise ValueError("x0 must match the model state dimension")
    if prob.state_box is not None:
        lo, hi = prob.state_box
        if np.any(x0 < lo) or np.any(x0 > hi):
            raise ValueError("x0 violates the state box")

    a, c, d = prob.model.a, prob.model.c, prob.model.d
    best_cost = np.inf
    best_first: np.ndarray | None = None
    for seq in itertools.product(range(n_actions), repeat=prob.horizon):
        x = x0
        cost = 0.0
        feasible = True
        for idx in seq:
            u = prob.action_set[idx]
            if prob.stage_cost is not None:
                cost += float(prob.stage_cost(x, u))
            x = a @ x + d + c @ u
            if prob.state_box is not None:
                lo, hi = prob.state_box
                if np.any(x < lo) or np.any(x > hi):
                    feasible = False
                    break
        if not feasible:
            continue
        if prob.terminal_cost is not None:
            cost += float(prob.terminal_cost(x))
        if cost < best_cost:
            best_cost = cost
            best_first = prob.action_set[seq[0]]
    if best_first is None:
        raise InfeasibleProblemError("every action sequence violates the state box")
    return best_first, float(best_cost)


def solve_pong_paddle(y_paddle: float, y_arrival: float, horizon: int) -> int:
    """First move of the optimal paddle plan for the terminal cost
    (y_arrival - y_paddle_final)^2 with unit moves in {-1, 0, +1}.

    The terminal position reachable in T steps is [y_paddle - T,
    y_paddle + T], so an optimal plan moves toward the gap first and pads
    with no-ops once aligned; the first move is simply the sign of the gap
    (0 when already aligned).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    gap = y_arrival - y_paddle
    if gap == 0.0:
        return 0
    return 1 if gap > 0.0 else -1
