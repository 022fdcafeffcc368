import pytest
from processaction import config as pacfg
from processaction.eventlog import (
    EventLog,
    decision_contexts,
    has_decision_point,
    split,
    summary,
)
from processaction.exceptions import DegeneratePartition, EmptyLog


class TestDecisionContexts:
    """Tests for finding the points at which the agent has a choice."""

    def test_contexts(self, toy_log: EventLog) -> None:
        """It should report contexts followed by at least two agent activities."""
        assert decision_contexts(toy_log) == frozenset({"x"})

    def test_start_context(self) -> None:
        """It should use the start activity as context of the first event."""
        log = EventLog.from_sequences([["a", "y"], ["b", "y"]], agent_activities={"a", "b"})
        assert decision_contexts(log) == frozenset({pacfg.START_ACTIVITY})

    def test_has_decision_point(self) -> None:
        """It should detect traces whose agent events could have gone differently."""
        log = EventLog.from_sequences(
            [["x", "a"], ["x", "b"], ["w", "a"]], agent_activities={"a", "b"}
        )
        contexts = decision_contexts(log)
        assert [has_decision_point(t, contexts) for t in log] == [True, True, False]


class TestSplit:
    """Tests for the random train/test split."""

    def test_sizes_and_disjoint(self, loan_log: EventLog) -> None:
        """It should assign every trace to exactly one side."""
        train, test = split(loan_log, 0.8, seed=1)
        assert len(train) == 320
        assert len(test) == 80
        assert set(train.case_ids).isdisjoint(test.case_ids)
        assert sorted(train.case_ids + test.case_ids) == sorted(loan_log.case_ids)

    def test_deterministic(self, loan_log: EventLog) -> None:
        """It should produce the same split for the same seed."""
        assert split(loan_log, 0.7, seed=3)[1].case_ids == split(loan_log, 0.7, seed=3)[1].case_ids
        assert split(loan_log, 0.7, seed=3)[1].case_ids != split(loan_log, 0.7, seed=4)[1].case_ids

    def test_exclude_no_decision(self) -> None:
        """It should drop test traces without decision point."""
        log = EventLog.from_sequences(
            [["x", "a"], ["x", "b"]] * 5 + [["w", "a"]] * 10, agent_activities={"a", "b"}
        )
        _, test = split(log, 0.5, seed=0, exclude_no_decision=True)
        assert len(test) > 0
        assert all(t.activities[0] == "x" for t in test)

    def test_invalid_fraction(self, toy_log: EventLog) -> None:
        """It should refuse fractions outside (0, 1)."""
        with pytest.raises(ValueError):
            split(toy_log, 1.0)
        with pytest.raises(ValueError):
            split(toy_log, 0.0)

    def test_degenerate(self, toy_log: EventLog) -> None:
        """It should refuse splits that leave one side empty."""
        with pytest.raises(DegeneratePartition):
            split(toy_log, 0.9)


class TestSummary:
    """Tests for describing a log."""

    def test_summary(self, toy_log: EventLog) -> None:
        """It should count traces, variants and events."""
        s = summary(toy_log)
        assert s["traces"] == 4
        assert s["variants"] == 3
        assert s["events"] == 12
        assert s["avg_length"] == 3.0
        assert s["accepted"] == 0.0

    def test_empty(self) -> None:
        """It should refuse an empty log."""
        with pytest.raises(EmptyLog):
            summary(EventLog((), frozenset()))
