from collections import Counter

import pytest
from processaction import config as pacfg
from processaction.mdp import START, Mdp, State
from processaction.rl import MdpEnvironment, TrainConfig

S = State("s", -1)
T = State("go", 0)
U = State("e", 0)


@pytest.fixture
def mixed() -> Mdp:
    """START leads to a state where the agent, the environment and END compete."""
    return Mdp.from_counts(
        {(START, "s", S): 4, (S, "go", T): 1, (S, "e", U): 2},
        rewards={(S, "go", T): 3.0, (S, "e", U): -1.0},
        end_counts={S: 1, T: 1, U: 2},
        agent_actions={"go"},
    )


class TestMdpEnvironment:
    """Tests for sampling episodes from an MDP."""

    def test_chance_share(self, mixed: Mdp) -> None:
        """It should give the environment the share of its occurrences, END included."""
        env = MdpEnvironment(mixed, seed=0)
        assert env.chance_share(START) == 1.0
        assert env.chance_share(S) == pytest.approx(0.75)
        assert env.choices(S) == ["go"]
        assert env.choices(START) == []
        assert env.is_terminal(T)
        assert not env.is_terminal(S)

    def test_chance_moves(self, mixed: Mdp) -> None:
        """It should draw environment moves and END with their frequencies."""
        env = MdpEnvironment(mixed, seed=1)
        n = 20000
        drawn = Counter(
            None if m is None else m.action for m in (env.chance_move(S) for _ in range(n))
        )
        assert drawn[None] / n == pytest.approx(0.25, abs=0.02)
        assert drawn["e"] / n == pytest.approx(0.5, abs=0.02)
        assert drawn[pacfg.END_ACTION] / n == pytest.approx(0.25, abs=0.02)

    def test_end_move(self, mixed: Mdp) -> None:
        """It should end the episode with reward 0 on END."""
        env = MdpEnvironment(mixed, seed=2)
        moves = [env.chance_move(S) for _ in range(200)]
        ends = [m for m in moves if m is not None and m.action == pacfg.END_ACTION]
        assert ends
        assert all(m.target is None and m.reward == 0.0 for m in ends)

    def test_take(self, mixed: Mdp) -> None:
        """It should move to the target of the agent action with its reward."""
        env = MdpEnvironment(mixed, seed=0)
        move = env.take(S, "go")
        assert move.target == T
        assert move.reward == 3.0
        with pytest.raises(KeyError):
            env.take(S, "e")

    def test_stochastic_targets(self) -> None:
        """It should draw the target of an agent action from P(s, a, .)."""
        a, b = State("go", 0), State("go", 1)
        mdp = Mdp.from_counts({(START, "go", a): 3, (START, "go", b): 1}, agent_actions={"go"})
        env = MdpEnvironment(mdp, seed=3)
        targets = Counter(env.take(START, "go").target for _ in range(8000))
        assert targets[a] / 8000 == pytest.approx(0.75, abs=0.02)

    def test_seeded(self, mixed: Mdp) -> None:
        """It should repeat the same draws with the same seed."""
        a, b = MdpEnvironment(mixed, seed=5), MdpEnvironment(mixed, seed=5)
        assert [a.chance_move(S) for _ in range(20)] == [b.chance_move(S) for _ in range(20)]


class TestExplorationSchedule:
    """Tests for the decay of the exploration rate."""

    def test_reaches_end_at_horizon(self) -> None:
        """It should decay to epsilon_end after the horizon share of the episodes."""
        cfg = TrainConfig(episodes=1000, epsilon_start=1.0, epsilon_end=0.05, epsilon_horizon=0.8)
        assert cfg.epsilon(0) == 1.0
        assert cfg.epsilon(800) == pytest.approx(0.05)
        assert cfg.epsilon(999) == 0.05
        assert cfg.epsilon(400) > cfg.epsilon(401)

    def test_fixed_decay(self) -> None:
        """It should use an explicit decay when given."""
        cfg = TrainConfig(episodes=10, epsilon_decay=0.5, epsilon_end=0.1)
        assert cfg.epsilon(1) == 0.5
        assert cfg.epsilon(10) == 0.1

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"episodes": 0},
            {"gamma": 1.5},
            {"epsilon_start": 0.1, "epsilon_end": 0.2},
            {"alpha": 0.0},
            {"epsilon_decay": 1.5},
            {"max_episode_len": 0},
        ],
    )
    def test_invalid(self, kwargs: dict) -> None:  # type: ignore[type-arg]
        """It should refuse invalid settings."""
        with pytest.raises(ValueError):
            TrainConfig(**kwargs)
