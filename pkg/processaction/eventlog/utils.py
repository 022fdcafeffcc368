"""Utility functions for working with event logs."""

import logging
from typing import Union

import numpy as np

from processaction import config as pacfg
from processaction.exceptions import DegeneratePartition, EmptyLog

from .base import EventLog, Trace

logger = logging.getLogger(__name__)


def decision_contexts(log: EventLog) -> frozenset[str]:
    """Find the contexts in which the agent actually has a choice.

    A context is the activity preceding an agent event, or
    :attr:`~processaction.config.START_ACTIVITY` for the first event of a
    trace. It is a decision context if at least two distinct agent activities
    follow it somewhere in the log.

    Parameters
    ----------
    log : EventLog
        The event log.

    Returns
    -------
    frozenset(str)
        The decision contexts.
    """
    followers: dict[str, set[str]] = {}
    for t in log.traces:
        prev = pacfg.START_ACTIVITY
        for e in t.events:
            if e.is_agent:
                followers.setdefault(prev, set()).add(e.activity)
            prev = e.activity
    return frozenset(ctx for ctx, acts in followers.items() if len(acts) > 1)


def has_decision_point(trace: Trace, contexts: frozenset[str]) -> bool:
    """Check whether an agent decision in a trace could have gone differently.

    Parameters
    ----------
    trace : Trace
        The trace.
    contexts : frozenset(str)
        The decision contexts, see :func:`decision_contexts`.

    Returns
    -------
    bool
        True if one of the agent events of the trace follows a decision
        context.
    """
    prev = pacfg.START_ACTIVITY
    for e in trace.events:
        if e.is_agent and prev in contexts:
            return True
        prev = e.activity
    return False


def split(
    log: EventLog,
    train_fraction: float = 0.8,
    seed: int = 0,
    exclude_no_decision: bool = False,
) -> tuple[EventLog, EventLog]:
    """Randomly split a log in a train and a test log at trace level.

    Parameters
    ----------
    log : EventLog
        The event log.
    train_fraction : float
        Share of the traces that go to the train log.
    seed : int
        Seed of the random permutation.
    exclude_no_decision : bool
        Whether to drop test traces without an actual decision point, i.e.,
        whose outcome cannot be changed by the agent.

    Raises
    ------
    ValueError
        If `train_fraction` is not strictly between 0 and 1.
    DegeneratePartition
        If the train or the test log would be empty.

    Returns
    -------
    tuple(EventLog, EventLog)
        The train and the test log. Both keep the order of the input log.
    """
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(log)
    n_train = int(round(n * train_fraction))
    if n_train == 0 or n_train == n:
        raise DegeneratePartition(f"Splitting {n} traces with fraction {train_fraction}")
    perm = np.random.default_rng(seed).permutation(n)
    in_train = np.zeros(n, dtype=bool)
    in_train[perm[:n_train]] = True
    train = [t for t, m in zip(log.traces, in_train) if m]
    test = [t for t, m in zip(log.traces, in_train) if not m]
    if exclude_no_decision:
        contexts = decision_contexts(log)
        kept = [t for t in test if has_decision_point(t, contexts)]
        logger.info("Dropped %d test traces without decision point", len(test) - len(kept))
        test = kept
        if not test:
            raise DegeneratePartition("No test trace has a decision point")
    return log.with_traces(train), log.with_traces(test)


def summary(
    log: EventLog,
    accept_activity: str = "accept_offer",
    preaccept_activity: str = "application_preaccepted",
) -> dict[str, Union[int, float]]:
    """Describe the shape of an event log.

    Parameters
    ----------
    log : EventLog
        The event log.
    accept_activity : str
        The activity that marks a successful case.
    preaccept_activity : str
        The activity that marks a pre-accepted application.

    Raises
    ------
    EmptyLog
        If the log has no traces.

    Returns
    -------
    dict
        The number of traces, variants and events, the average trace length
        and the shares of pre-accepted and of accepted cases.
    """
    if len(log) == 0:
        raise EmptyLog("Cannot summarize an empty log")
    variants = {t.activities for t in log.traces}
    return {
        "traces": len(log),
        "variants": len(variants),
        "events": log.n_events,
        "avg_length": log.n_events / len(log),
        "preaccepted": float(np.mean([preaccept_activity in t.activities for t in log.traces])),
        "accepted": float(np.mean([accept_activity in t.activities for t in log.traces])),
    }
