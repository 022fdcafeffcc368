"""Small MDPs with known optimal policies."""

import numpy as np
import pytest
from processaction.mdp import START, Mdp, State

A = State("a", -1)
B = State("b", -1)


def overfitting_mdp() -> Mdp:
    """A frequent action worth 10 against a rare one worth 12."""
    return Mdp.from_counts(
        {(START, "a", A): 100, (START, "b", B): 2},
        rewards={(START, "a", A): 10.0, (START, "b", B): 12.0},
        end_counts={A: 100, B: 2},
        agent_actions={"a", "b"},
        gamma=1.0,
    )


def discounted_chain(gamma: float = 0.5) -> Mdp:
    """Agent 'go', environment 'wait', agent 'finish' worth 16 two steps later."""
    go, wait, finish = State("go", -1), State("wait", 0), State("finish", 0)
    return Mdp.from_counts(
        {(START, "go", go): 10, (go, "wait", wait): 10, (wait, "finish", finish): 10},
        rewards={(wait, "finish", finish): 16.0},
        end_counts={finish: 10},
        agent_actions={"go", "finish"},
        gamma=gamma,
    )


def delayed_reward_mdp() -> Mdp:
    """The reward of each agent action only shows on the environment move after it."""
    a2, b2 = State("paid", 0), State("unpaid", 0)
    return Mdp.from_counts(
        {(START, "a", A): 5, (START, "b", B): 5, (A, "paid", a2): 5, (B, "unpaid", b2): 5},
        rewards={(A, "paid", a2): 8.0, (B, "unpaid", b2): 2.0},
        end_counts={a2: 5, b2: 5},
        agent_actions={"a", "b"},
        gamma=1.0,
    )


def single_layer_mdp(rng: np.random.Generator, gamma: float = 0.99) -> Mdp:
    """The environment picks a root, the agent picks an action with stochastic payoff."""
    counts, rewards = {}, {}
    for i in range(int(rng.integers(2, 4))):
        root = State(f"r{i}", -1)
        counts[(START, root.last_activity, root)] = int(rng.integers(1, 10))
        for j in range(int(rng.integers(2, 5))):
            action = f"x{j}"
            for o in range(int(rng.integers(1, 3))):
                target = State(action, o)
                counts[(root, action, target)] = int(rng.integers(1, 10))
                rewards[(root, action, target)] = float(rng.integers(-10, 11))
    agents = {a for (_, a, _) in counts if a.startswith("x")}
    return Mdp.from_counts(counts, rewards, agent_actions=agents, gamma=gamma)


def two_layer_mdp(rng: np.random.Generator, gamma: float = 0.99) -> Mdp:
    """Two consecutive deterministic agent decisions with positive rewards."""
    counts, rewards = {}, {}
    for i in range(int(rng.integers(1, 3))):
        root = State(f"r{i}", -1)
        counts[(START, root.last_activity, root)] = int(rng.integers(1, 10))
        for j in range(int(rng.integers(2, 4))):
            mid = State(f"m{j}", i)
            counts[(root, mid.last_activity, mid)] = int(rng.integers(1, 10))
            rewards[(root, mid.last_activity, mid)] = float(rng.integers(1, 11))
            for k in range(int(rng.integers(2, 4))):
                leaf = State(f"f{k}", j)
                counts[(mid, leaf.last_activity, leaf)] = int(rng.integers(1, 10))
                rewards[(mid, leaf.last_activity, leaf)] = float(rng.integers(1, 11))
    agents = {a for (_, a, _) in counts if a[0] in "mf"}
    return Mdp.from_counts(counts, rewards, agent_actions=agents, gamma=gamma)


@pytest.fixture(name="overfitting_mdp")
def fixture_overfitting_mdp() -> Mdp:
    return overfitting_mdp()


@pytest.fixture(name="discounted_chain")
def fixture_discounted_chain() -> Mdp:
    return discounted_chain(0.5)


@pytest.fixture(name="delayed_reward_mdp")
def fixture_delayed_reward_mdp() -> Mdp:
    return delayed_reward_mdp()


@pytest.fixture(scope="session")
def random_mdps() -> list[Mdp]:
    """Fifty small MDPs with at most 20 states and 4 actions per state."""
    rng = np.random.default_rng(2024)
    return [single_layer_mdp(rng) for _ in range(25)] + [two_layer_mdp(rng) for _ in range(25)]
