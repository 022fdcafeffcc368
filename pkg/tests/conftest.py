"""Configuration for pytest."""

from dataclasses import dataclass

import pytest
from _pytest.config import Config
from processaction.clustering import KMeansModel
from processaction.encoding import NormalizationStats, alphabet_hash, encode_log, fit_stats
from processaction.eventlog import EventLog, split
from processaction.mdp import Mdp, build
from processaction.recommender import Recommender
from processaction.rl import Policy, QTable, ScalingFn, TrainConfig, mc_policy_iteration
from processaction.simgen import ProcessModel, generate_log, load_preset

LOAN_AGENTS = ("check_application", "create_offer", "call_customer", "cancel_application")


def pytest_configure(config: Config) -> None:
    """Pytest configuration hook."""
    config.addinivalue_line("markers", "e2e: mark as end-to-end test.")


@pytest.fixture(scope="session")
def loan_model() -> ProcessModel:
    return load_preset("loan_common_small")


@pytest.fixture(scope="session")
def loan_log(loan_model: ProcessModel) -> EventLog:
    return generate_log(loan_model, n_traces=400, seed=7)


@pytest.fixture
def toy_log() -> EventLog:
    """Four short cases of an agent choosing between 'a' and 'b' after 'x'."""
    return EventLog.from_sequences(
        [["x", "a", "y"], ["x", "b", "z"], ["x", "a", "y"], ["x", "b", "y"]],
        agent_activities={"a", "b"},
        rewards=[10.0, 0.0, 10.0, 4.0],
    )


@dataclass(frozen=True)
class Trained:
    """Artifacts trained on the loan log."""

    train: EventLog
    test: EventLog
    stats: NormalizationStats
    kmeans: KMeansModel
    mdp: Mdp
    policy: Policy
    qtable: QTable

    def recommender(self, fallback: bool = False) -> Recommender:
        return Recommender(self.policy, self.qtable, self.mdp, self.kmeans, self.stats, fallback)


@pytest.fixture(scope="session")
def trained(loan_log: EventLog) -> Trained:
    train, test = split(loan_log, 0.8, seed=0)
    stats = fit_stats(train)
    vectors = encode_log(train, stats).to_numpy()
    kmeans = KMeansModel(k=8, seed=0).fit(vectors, alphabet_hash(stats))
    mdp = build(train, kmeans, stats, gamma=1.0)
    policy, qtable = mc_policy_iteration(
        mdp, ScalingFn.from_spec("step:5"), TrainConfig(episodes=2000, seed=0), stats.alphabet
    )
    return Trained(train, test, stats, kmeans, mdp, policy, qtable)


@pytest.fixture(scope="session")
def toy_recommender() -> Recommender:
    """A single cluster and a policy that picks 'a' after 'x'."""
    log = EventLog.from_sequences(
        [["x", "a", "y"], ["x", "b", "z"], ["x", "a", "y"], ["x", "b", "y"], ["w", "y"]],
        agent_activities={"a", "b"},
        rewards=[10.0, 0.0, 10.0, 4.0, 1.0],
    )
    stats = fit_stats(log)
    kmeans = KMeansModel(k=1).fit(encode_log(log, stats).to_numpy(), alphabet_hash(stats))
    mdp = build(log, kmeans, stats, gamma=1.0)
    policy, qtable = mc_policy_iteration(
        mdp, ScalingFn("h0"), TrainConfig(300, seed=0), stats.alphabet
    )
    return Recommender(policy, qtable, mdp, kmeans, stats)
