"""Pong environment: serving, stepping, collisions, scoring, rendering."""

import dataclasses

import numpy as np
import pytest

from mprl.exceptions import StepAfterTerminalError
from mprl.pong import (
    AGENT_COLUMN,
    AGENT_PADDLE_VALUE,
    AGENT_PLANE_X,
    BACKGROUND_VALUE,
    BALL_VALUE,
    GameEvent,
    OPPONENT_COLUMN,
    OPPONENT_PADDLE_VALUE,
    PongSim,

    write_pgm,
)


@pytest.fixture
def sim():
    return PongSim()


def place(state, **kwargs):
    return dataclasses.replace(state, **kwargs)


class TestReset:
    def test_same_seed_bit_identical(self, sim):
        assert sim.reset(42) == sim.reset(42)

    def test_initial_scores_zero(self, sim):
        s = sim.reset(0)
        assert (s.score_agent, s.score_opponent) == (0, 0)

    def test_serves_always_move_horizontally(self, sim):
        for seed in range(1000):
            s = sim.reset(seed)
            assert s.ball_vx != 0
            assert s.ball_vx in (-2.0, -1.0, 1.0, 2.0)
            assert s.ball_vy in (-1.0, 0.0, 1.0)


class TestStep:
    def test_free_flight(self, sim):
        s = place(
            sim.reset(0), ball_x=40.0, ball_y=30.5, ball_vx=-1.0, ball_vy=1.0, opp_hold=0
        )
        nxt, event, reward = sim.step(s, 0)
        assert (nxt.ball_x, nxt.ball_y) == (39.0, 31.5)
        assert event is GameEvent.NONE and reward == 0

    def test_wall_reflection(self, sim):
        s = place(sim.reset(0), ball_x=40.0, ball_y=78.5, ball_vx=1.0, ball_vy=2.0)
        nxt, event, _ = sim.step(s, 0)
        assert event is GameEvent.WALL_BOUNCE
        assert nxt.ball_y == pytest.approx(2 * 79.0 - 80.5)
        assert nxt.ball_vy == -2.0

    def test_agent_bounce_flips_vx(self, sim):
        s = place(
            sim.reset(0),
            ball_x=10.5,
            ball_y=40.5,
            ball_vx=-2.0,
            ball_vy=0.0,
            agent_y=40.5,
        )
        nxt, event, reward = sim.step(s, 0)
        assert event is GameEvent.AGENT_BOUNCE and reward == 0
        assert nxt.ball_vx == 2.0
        assert nxt.ball_x == pytest.approx(2 * AGENT_PLANE_X - 8.5)

    def test_miss_concedes_point(self, sim):
        s = place(
            sim.reset(0),
            ball_x=10.5,
            ball_y=20.0,
            ball_vx=-2.0,
            ball_vy=0.0,
            agent_y=60.0,
        )
        nxt, event, reward = sim.step(s, 0)
        assert event is GameEvent.OPPONENT_SCORED and reward == -1
        assert nxt.score_opponent == s.score_opponent + 1
        # re-served from center
        assert (nxt.ball_x, nxt.ball_y) == (39.5, 39.5)

    def test_agent_scores_on_opponent_miss(self, sim):
        s = place(
            sim.reset(0),
            ball_x=69.0,
            ball_y=10.0,
            ball_vx=2.0,
            ball_vy=0.0,
            opponent_y=60.0,
        )
        nxt, event, reward = sim.step(s, 0)
        assert event is GameEvent.AGENT_SCORED and reward == 1
        assert nxt.score_agent == s.score_agent + 1

    def test_deflection_rule(self, sim):
        # contact 3 px below the paddle center adds round(3/2) = 2 downward
        s = place(
            sim.reset(0),
            ball_x=10.5,
            ball_y=43.5,
            ball_vx=-2.0,
            ball_vy=0.0,
            agent_y=40.5,
        )
        nxt, event, _ = sim.step(s, 0)
        assert event is GameEvent.AGENT_BOUNCE
        assert nxt.ball_vy == 2.0

    def test_vy_clamped(self, sim):
        s = place(
            sim.reset(0),
            ball_x=10.5,
            ball_y=41.5,
            ball_vx=-2.0,
            ball_vy=2.0,
            agent_y=40.5,
        )
        nxt, event, _ = sim.step(s, 0)
        assert event is GameEvent.AGENT_BOUNCE
        assert nxt.ball_vy == 3.0  # 2 + round(3/2) = 4, clamped to 3

    def test_vx_magnitude_conserved_across_wall_bounce(self, sim):
        s = place(sim.reset(0), ball_x=40.0, ball_y=1.0, ball_vx=-2.0, ball_vy=-3.0)
        nxt, event, _ = sim.step(s, 0)
        assert event is GameEvent.WALL_BOUNCE
        assert abs(nxt.ball_vx) == 2.0

    def test_step_after_terminal_rejected(self, sim):
        s = place(sim.reset(0), score_agent=21)
        with pytest.raises(StepAfterTerminalError):
            sim.step(s, 0)

    def test_rally_speedup(self, sim):
        # four agent bounces escalate |vx| by one
        s = place(sim.reset(0), rally_hits=3, ball_x=10.5, ball_y=40.5,
                  ball_vx=-2.0, ball_vy=0.0, agent_y=40.5)
        nxt, event, _ = sim.step(s, 0)
        assert event is GameEvent.AGENT_BOUNCE
        assert nxt.ball_vx == 3.0

    def test_determinism_full_episode(self, sim):
        def run(seed):
            s = sim.reset(seed)
            trace = []
            k = 0
            while not sim.episode_over(s) and k < 3000:
                s, event, reward = sim.step(s, (k % 3) - 1)
                trace.append((s, event, reward))
                k += 1
            return trace

        assert run(11) == run(11)

    def test_score_increments_by_one(self, sim):
        s = sim.reset(5)
        total = s.score_agent + s.score_opponent
        for k in range(4000):
            if sim.episode_over(s):
                break
            s, event, reward = sim.step(s, 0)
            new_total = s.score_agent + s.score_opponent
            assert new_total - total in (0, 1)
            assert (new_total > total) == (reward != 0)
            total = new_total


class TestOpponent:
    def test_idle_when_ball_in_agent_half(self, sim):
        s = place(sim.reset(0), ball_x=20.0, opp_hold=10)
        assert sim.opponent_policy(s) == 0

    def test_tracks_after_lag(self, sim):
        s = place(sim.reset(0), ball_x=60.0, ball_y=50.0, opponent_y=40.0, opp_hold=5)
        assert sim.opponent_policy(s) == 1

    def test_no_reaction_before_lag(self, sim):
        s = place(sim.reset(0), ball_x=60.0, ball_y=50.0, opponent_y=40.0, opp_hold=1)
        assert sim.opponent_policy(s) == 0


class TestEpisodeOver:
    @pytest.mark.parametrize(
        "scores,want", [((0, 0), False), ((21, 5), True), ((20, 20), False), ((3, 21), True)]
    )
    def test_threshold(self, sim, scores, want):
        s = place(sim.reset(0), score_agent=scores[0], score_opponent=scores[1])
        assert sim.episode_over(s) is want


class TestRender:
    def test_ball_block_placement(self, sim):
        s = place(sim.reset(0), ball_x=39.0, ball_y=40.0)
        frame = sim.render(s)
        rows, cols = np.nonzero(frame == BALL_VALUE)
        assert sorted(set(rows)) == [40, 41]
        assert sorted(set(cols)) == [40, 41]

    def test_sprite_census(self, sim):
        s = place(sim.reset(0), ball_x=40.0, ball_y=10.0, agent_y=50.5, opponent_y=30.5)
        frame = sim.render(s)
        assert int((frame == AGENT_PADDLE_VALUE).sum()) == 8
        assert int((frame == BALL_VALUE).sum()) == 4
        assert int((frame == OPPONENT_PADDLE_VALUE).sum()) == 8
        values = set(np.unique(frame))
        assert values == {
            BACKGROUND_VALUE,
            BALL_VALUE,
            AGENT_PADDLE_VALUE,
            OPPONENT_PADDLE_VALUE,
        }

    def test_paddle_columns(self, sim):
        frame = sim.render(sim.reset(0))
        assert set(np.nonzero(frame == AGENT_PADDLE_VALUE)[1]) == {AGENT_COLUMN}
        assert set(np.nonzero(frame == OPPONENT_PADDLE_VALUE)[1]) == {OPPONENT_COLUMN}


class TestPgm:
    def test_header_and_payload(self, sim, tmp_path):
        frame = sim.render(sim.reset(0))
        path = tmp_path / "ep0_step0.pgm"
        write_pgm(frame, str(path))
        blob = path.read_bytes()
        assert blob.startswith(b"P5\n80 80\n255\n")
        assert blob[len(b"P5\n80 80\n255\n") :] == frame.tobytes()
