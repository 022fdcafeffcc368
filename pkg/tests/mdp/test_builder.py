from collections import defaultdict

import numpy as np
import pytest
from processaction import config as pacfg
from processaction.clustering import KMeansModel
from processaction.encoding import NormalizationStats, alphabet_hash, encode_log, fit_stats
from processaction.eventlog import EventLog
from processaction.exceptions import EmptyLog, EncodingMismatch
from processaction.mdp import START, Mdp, State, build, state_of, validate


def _fit(log: EventLog, k: int, seed: int = 0) -> tuple:  # type: ignore[type-arg]
    stats = fit_stats(log)
    vectors = encode_log(log, stats).to_numpy()
    k = min(k, len(np.unique(vectors, axis=0)))
    return stats, KMeansModel(k=k, seed=seed).fit(vectors, alphabet_hash(stats))


def _random_log(rng: np.random.Generator) -> EventLog:
    sequences = [
        list(rng.choice(["a", "b", "c", "d"], size=int(rng.integers(1, 6))))
        for _ in range(int(rng.integers(2, 8)))
    ]
    rewards = [float(r) for r in rng.integers(-5, 6, size=len(sequences))]
    return EventLog.from_sequences(sequences, agent_activities={"a", "b"}, rewards=rewards)


def _replay(
    acts: tuple[str, ...],
    centroids: np.ndarray,  # type: ignore[type-arg]
    stats: NormalizationStats,
) -> list[State]:
    """States of all prefixes, from a hand-made encoding and the nearest centroid."""
    n = len(stats.alphabet)

    def cluster(prefix: tuple[str, ...]) -> int:
        v = np.zeros(2 * n + 1)
        for i, a in enumerate(stats.alphabet):
            if a in prefix:
                v[i] = prefix.count(a) / stats.f_max
                v[n + i] = (len(prefix) - prefix[::-1].index(a)) / stats.p_max
        return int(np.argmin(((centroids - v) ** 2).sum(axis=1)))

    states = [START]
    for k in range(1, len(acts) + 1):
        c = pacfg.START_CLUSTER if k == 1 else cluster(acts[: k - 1])
        states.append(State(acts[k - 1], c))
    return states


class TestStateOf:
    """Tests for mapping a prefix to its state."""

    def test_empty_prefix(self, toy_log: EventLog) -> None:
        """It should map the empty prefix to START."""
        stats, kmeans = _fit(toy_log, 2)
        assert state_of(toy_log.traces[0].prefix(0), kmeans, stats) == START

    def test_first_event(self, toy_log: EventLog) -> None:
        """It should pair the first activity with the START cluster."""
        stats, kmeans = _fit(toy_log, 2)
        s = state_of(toy_log.traces[0].prefix(1), kmeans, stats)
        assert s == State("x", pacfg.START_CLUSTER)

    def test_cluster_of_previous_prefix(self, toy_log: EventLog) -> None:
        """It should pair the last activity with the cluster of the shorter prefix."""
        stats, kmeans = _fit(toy_log, 2)
        t = toy_log.traces[0]
        vectors = encode_log(toy_log.select(["0"]), stats).to_numpy()
        s = state_of(t.prefix(3), kmeans, stats)
        assert s == State("y", kmeans.assign_one(vectors[1]))


class TestBuild:
    """Tests for mining the MDP of a log."""

    def test_toy_transition_rewards(self, toy_log: EventLog) -> None:
        """It should count edges and average the reward samples of each edge."""
        stats, kmeans = _fit(toy_log, 1)
        mdp = build(toy_log, kmeans, stats, gamma=1.0)
        x, a, b, y, z = (
            State("x", -1),
            State("a", 0),
            State("b", 0),
            State("y", 0),
            State("z", 0),
        )
        edges = {e.key: e for e in mdp.edges}
        assert edges[(START, "x", x)].count == 4
        assert edges[(x, "a", a)].count == 2
        assert edges[(x, "b", b)].probability == 1.0
        assert edges[(a, "y", y)].reward == 10.0
        assert edges[(b, "z", z)].probability == 0.5
        assert edges[(b, "y", y)].reward == 4.0
        assert edges[(x, "a", a)].reward == 0.0
        assert mdp.end_counts == {y: 3, z: 1}
        assert mdp.decision_states == [x]
        assert mdp.terminals == [y, z]

    def test_toy_agent_rewards(self, toy_log: EventLog) -> None:
        """It should attribute the samples to the last agent edge."""
        stats, kmeans = _fit(toy_log, 1)
        mdp = build(toy_log, kmeans, stats, gamma=1.0, reward_mode="agent")
        edges = {(e.source, e.action): e for e in mdp.edges}
        x = State("x", -1)
        assert edges[(x, "a")].reward == 5.0
        assert edges[(x, "a")].reward_samples == 4
        assert edges[(x, "b")].reward == 1.0
        assert edges[(START, "x")].reward_samples == 0
        assert edges[(State("a", 0), "y")].reward == 0.0

    def test_brute_force(self) -> None:
        """It should agree with a brute-force replay of every prefix."""
        rng = np.random.default_rng(42)
        for _ in range(200):
            log = _random_log(rng)
            stats, kmeans = _fit(log, 3)
            mdp = build(log, kmeans, stats, gamma=0.9)
            counts: dict = defaultdict(int)  # type: ignore[type-arg]
            sums: dict = defaultdict(float)  # type: ignore[type-arg]
            ends: dict = defaultdict(int)  # type: ignore[type-arg]
            for t in log:
                assert kmeans.centroids is not None
                states = _replay(t.activities, kmeans.centroids, stats)
                for k in range(1, len(t) + 1):
                    key = (states[k - 1], t.activities[k - 1], states[k])
                    counts[key] += 1
                    sums[key] += t.reward if k == len(t) else 0.0
                ends[states[-1]] += 1
            assert {e.key: e.count for e in mdp.edges} == dict(counts)
            for e in mdp.edges:
                assert e.reward == pytest.approx(sums[e.key] / counts[e.key])
            assert dict(mdp.end_counts) == dict(ends)
            assert validate(mdp).ok

    def test_probabilities_normalized(self, loan_log: EventLog) -> None:
        """It should normalize the outgoing probabilities of every state-action pair."""
        stats, kmeans = _fit(loan_log, 10)
        mdp = build(loan_log, kmeans, stats)
        totals: dict = defaultdict(float)  # type: ignore[type-arg]
        for e in mdp.edges:
            totals[(e.source, e.action)] += e.probability
        assert all(v == pytest.approx(1.0) for v in totals.values())
        assert sum(mdp.occurrence[(START, a)] for a in mdp.actions(START)) == len(loan_log)

    def test_metadata(self, toy_log: EventLog) -> None:
        """It should record the encoding and the clustering it was built with."""
        stats, kmeans = _fit(toy_log, 2)
        mdp = build(toy_log, kmeans, stats)
        assert mdp.alphabet_hash == alphabet_hash(stats)
        assert mdp.metadata["k"] == 2
        assert mdp.metadata["reward_mode"] == "transition"
        assert mdp.gamma == pacfg.gamma

    def test_encoding_mismatch(self, toy_log: EventLog) -> None:
        """It should refuse a k-means model fit on another encoding."""
        stats, kmeans = _fit(toy_log, 2)
        kmeans.alphabet_hash = "0" * 16
        with pytest.raises(EncodingMismatch):
            build(toy_log, kmeans, stats)

    def test_requires_rewards(self, toy_log: EventLog) -> None:
        """It should refuse traces without reward."""
        stats, kmeans = _fit(toy_log, 2)
        raw = EventLog.from_sequences([t.activities for t in toy_log], {"a", "b"})
        with pytest.raises(ValueError, match="reward"):
            build(raw, kmeans, stats)

    def test_invalid_reward_mode(self, toy_log: EventLog) -> None:
        """It should refuse unknown reward modes."""
        stats, kmeans = _fit(toy_log, 2)
        with pytest.raises(ValueError, match="reward mode"):
            build(toy_log, kmeans, stats, reward_mode="episode")

    def test_empty(self, toy_log: EventLog) -> None:
        """It should refuse an empty log."""
        stats, kmeans = _fit(toy_log, 2)
        with pytest.raises(EmptyLog):
            build(EventLog((), frozenset()), kmeans, stats)


class TestMdp:
    """Tests for the MDP container."""

    def test_from_counts(self) -> None:
        """It should derive probabilities and occurrence counts from edge counts."""
        s, t, u = State("s", 0), State("t", 0), State("u", 0)
        mdp = Mdp.from_counts(
            {(START, "s", s): 4, (s, "go", t): 3, (s, "go", u): 1},
            rewards={(s, "go", t): 2.0},
            agent_actions={"go"},
        )
        assert mdp.n(s, "go") == 4
        assert [e.probability for e in mdp.outgoing[s]["go"]] == [0.75, 0.25]
        assert mdp.agent_choices(s) == ["go"]
        assert mdp.environment_moves(START) == ["s"]
        assert mdp.outgoing[s]["go"][0].reward == 2.0

    def test_nonpositive_count(self) -> None:
        """It should refuse edges that were never replayed."""
        with pytest.raises(ValueError):
            Mdp.from_counts({(START, "a", State("a", -1)): 0})

    def test_mixed_states(self) -> None:
        """It should report states where both the agent and the environment can act."""
        s = State("s", -1)
        mdp = Mdp.from_counts(
            {(START, "s", s): 2, (s, "go", State("go", 0)): 1},
            end_counts={s: 1, State("go", 0): 1},
            agent_actions={"go"},
        )
        assert mdp.mixed_states == [s]

    def test_invalid_gamma(self) -> None:
        """It should refuse discount factors outside [0, 1]."""
        with pytest.raises(ValueError):
            Mdp((), gamma=1.5)
