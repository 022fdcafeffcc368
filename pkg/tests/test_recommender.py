from dataclasses import replace
from typing import Any

import pytest
from processaction.eventlog import EventLog, Trace
from processaction.exceptions import (
    EncodingMismatch,
    NotADecisionPoint,
    UnknownActivity,
    UnknownState,
)
from processaction.mdp import State
from processaction.recommender import Recommender, recommend


def _prefix(*activities: str) -> Trace:
    return EventLog.from_sequences([list(activities)], agent_activities={"a", "b"}).traces[0]


class TestRecommend:
    """Tests for recommending the next activity of an ongoing case."""

    def test_best_action(self, toy_recommender: Recommender) -> None:
        """It should recommend the policy action with its diagnostics."""
        rec = toy_recommender.recommend(_prefix("x"))
        assert rec.action == "a"
        assert rec.state == State("x", -1)
        assert rec.q_value == pytest.approx(10.0)
        assert rec.support == 2
        assert [a for a, _, _ in rec.alternatives] == ["a", "b"]
        assert rec.alternatives[1][1] == pytest.approx(2.0, abs=1.5)
        assert not rec.fallback

    def test_to_dict(self, toy_recommender: Recommender) -> None:
        """It should convert the recommendation to plain values."""
        d = toy_recommender.recommend(_prefix("x")).to_dict()
        assert d["action"] == "a"
        assert d["state"] == {"activity": "x", "cluster": -1}
        assert d["alternatives"][0]["support"] == 2

    def test_unknown_state(self, toy_recommender: Recommender) -> None:
        """It should refuse a state that was never observed."""
        with pytest.raises(UnknownState):
            toy_recommender.recommend(_prefix("w", "x"))

    def test_fallback(self, toy_recommender: Recommender) -> None:
        """It should answer an unknown state from the nearest known decision state."""
        fallback = Recommender(
            toy_recommender.policy,
            toy_recommender.qtable,
            toy_recommender.mdp,
            toy_recommender.kmeans,
            toy_recommender.stats,
            fallback=True,
        )
        rec = fallback.recommend(_prefix("w", "x"))
        assert rec.action == "a"
        assert rec.state == State("x", -1)
        assert rec.fallback

    def test_not_a_decision_point(self, toy_recommender: Recommender) -> None:
        """It should tell the caller to wait when only the environment can act."""
        with pytest.raises(NotADecisionPoint):
            toy_recommender.recommend(_prefix("x", "a"))

    def test_ended_case(self, toy_recommender: Recommender) -> None:
        """It should refuse a case that has reached a terminal state."""
        with pytest.raises(UnknownState, match="ended"):
            toy_recommender.recommend(_prefix("x", "a", "y"))
        r = toy_recommender
        fallback = Recommender(r.policy, r.qtable, r.mdp, r.kmeans, r.stats, fallback=True)
        with pytest.raises(UnknownState, match="ended"):
            fallback.recommend(_prefix("x", "a", "y"))
        records = toy_recommender.recommend_batch([_prefix("x", "b", "z")])
        assert records[0]["status"] == "UnknownState"

    def test_unknown_activity(self, toy_recommender: Recommender) -> None:
        """It should refuse activities outside the training alphabet."""
        with pytest.raises(UnknownActivity):
            toy_recommender.recommend(_prefix("x", "q"))

    def test_action_for(self, toy_recommender: Recommender) -> None:
        """It should return None instead of raising."""
        assert toy_recommender.action_for(_prefix("x")) == "a"
        assert toy_recommender.action_for(_prefix("w", "x")) is None
        assert toy_recommender.action_for(_prefix("x", "a")) is None
        assert toy_recommender.action_for(_prefix("q")) is None

    def test_batch(self, toy_recommender: Recommender) -> None:
        """It should report a status for every case."""
        prefixes = [_prefix("x"), _prefix("x", "a"), _prefix("w", "x"), _prefix("q")]
        statuses = [r["status"] for r in toy_recommender.recommend_batch(prefixes)]
        assert statuses == ["ok", "wait", "UnknownState", "UnknownActivity"]

    def test_function(self, toy_recommender: Recommender) -> None:
        """It should offer a one-shot function with the same result."""
        r = toy_recommender
        rec = recommend(_prefix("x"), r.policy, r.qtable, r.mdp, r.kmeans, r.stats)
        assert rec == r.recommend(_prefix("x"))

    def test_encoding_mismatch(self, toy_recommender: Recommender) -> None:
        """It should refuse artifacts built on another encoding."""
        r = toy_recommender
        mdp = replace(r.mdp, alphabet_hash="0" * 16)
        with pytest.raises(EncodingMismatch):
            Recommender(r.policy, r.qtable, mdp, r.kmeans, r.stats)


class TestLoanRecommendations:
    """Tests for recommendations on the generated loan process."""

    def test_recommends_allowed_actions(self, trained: Any) -> None:  # noqa: ANN401
        """It should only recommend agent actions observed in the state."""
        recommender = trained.recommender()
        recommended = 0
        for t in trained.test:
            for k in range(len(t)):
                prefix = t.prefix(k)
                action = recommender.action_for(prefix)
                if action is None:
                    continue
                state, _ = recommender.state(prefix)
                assert action in trained.mdp.agent_choices(state)
                assert action == trained.policy(state)
                recommended += 1
        assert recommended > 0
