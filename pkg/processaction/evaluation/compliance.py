"""Analyses of a test log against a policy.

A trace follows a policy when every agent activity of the trace is the one
the policy recommends in the state reached before it. Agent activities in
states the policy does not know (states never observed in training, or
prefixes with unknown activities) do not follow the policy. Environment
activities are unconstrained.
"""

import logging
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import pandas as pd
from pandera.typing import DataFrame

from processaction.encoding import encode_prefixes
from processaction.eventlog import EventLog, Trace
from processaction.mdp import State, replay_states
from processaction.recommender import Recommender

from .schema import PrefixGainSchema

logger = logging.getLogger(__name__)


def policy_states(trace: Trace, recommender: Recommender) -> list[Optional[State]]:
    """Return the states visited by a trace in the MDP of a recommender.

    Parameters
    ----------
    trace : Trace
        The trace.
    recommender : Recommender
        The trained artifacts.

    Returns
    -------
    list(State or None)
        The states of the prefixes of length 0, 1, ..., len(trace). Prefixes
        that contain an activity outside the training alphabet map to None.
    """
    index = recommender.stats.index
    known = next((i for i, a in enumerate(trace.activities) if a not in index), len(trace))
    head = trace.prefix(known)
    labels = (
        recommender.kmeans.assign(encode_prefixes(head, recommender.stats)[:-1])
        if known > 1
        else np.zeros(0, dtype=int)
    )
    states: list[Optional[State]] = list(replay_states(head, labels))
    return states + [None] * (len(trace) - known)


def decisions_followed(trace: Trace, recommender: Recommender) -> list[bool]:
    """Check, for each event of a trace, whether it follows the policy.

    Parameters
    ----------
    trace : Trace
        The trace.
    recommender : Recommender
        The trained artifacts.

    Returns
    -------
    list(bool)
        One flag per event; environment events are always True.
    """
    states = policy_states(trace, recommender)
    policy = recommender.policy
    return [
        not e.is_agent or (s is not None and policy(s) == e.activity)
        for s, e in zip(states, trace.events)
    ]


def compliant_from(trace: Trace, recommender: Recommender) -> list[bool]:
    """Check from which positions on a trace follows the policy.

    Returns
    -------
    list(bool)
        Entry k (0 <= k <= len(trace)) tells whether all events after the
        first k ones follow the policy. Entry 0 tells whether the whole
        trace follows the policy.
    """
    followed = decisions_followed(trace, recommender)
    out = [True] * (len(trace) + 1)
    for k in range(len(trace) - 1, -1, -1):
        out[k] = out[k + 1] and followed[k]
    return out


def _check_rewards(test_log: EventLog) -> None:
    if any(t.reward is None for t in test_log.traces):
        raise ValueError("All traces of the test log must be enriched with a reward")


def _name(recommender: Recommender, name: Optional[str]) -> str:
    return name or recommender.policy.name


@dataclass(frozen=True)
class OptimalTraceResult:
    """Average KPI of the test traces that follow a policy.

    Parameters
    ----------
    policy : str
        The name of the policy.
    n_traces : int
        The number of test traces.
    n_compliant : int
        The number of test traces that follow the policy.
    compliant_mean : float
        Their average KPI; NaN if there are none.
    log_mean : float
        The average KPI of all test traces.
    """

    policy: str
    n_traces: int
    n_compliant: int
    compliant_mean: float
    log_mean: float

    @property
    def no_data(self) -> bool:
        """Whether no test trace follows the policy."""
        return self.n_compliant == 0

    def to_dict(self) -> dict[str, Any]:
        """Convert to a JSON-serializable dict; a missing mean becomes None."""
        return {
            "policy": self.policy,
            "n_traces": self.n_traces,
            "n_compliant": self.n_compliant,
            "compliant_mean": None if self.no_data else self.compliant_mean,
            "log_mean": self.log_mean,
            "no_data": self.no_data,
        }


def optimal_trace_analysis(
    test_log: EventLog, recommender: Recommender, name: Optional[str] = None
) -> OptimalTraceResult:
    """Compare the KPI of the test traces that follow a policy to the log average.

    Parameters
    ----------
    test_log : EventLog
        The enriched test log.
    recommender : Recommender
        The trained artifacts of the policy.
    name : str, optional
        The name of the policy. Defaults to the name stored in the policy.

    Returns
    -------
    OptimalTraceResult
        The number and average KPI of the compliant traces and the average
        KPI of the whole log.
    """
    _check_rewards(test_log)
    rewards = np.array([t.reward for t in test_log.traces], dtype=np.float64)
    mask = np.array([compliant_from(t, recommender)[0] for t in test_log.traces], dtype=bool)
    result = OptimalTraceResult(
        policy=_name(recommender, name),
        n_traces=len(test_log),
        n_compliant=int(mask.sum()),
        compliant_mean=float(rewards[mask].mean()) if mask.any() else float("nan"),
        log_mean=float(rewards.mean()) if len(rewards) else float("nan"),
    )
    logger.info(
        "%s: %d of %d test traces follow the policy",
        result.policy,
        result.n_compliant,
        result.n_traces,
    )
    return result


@dataclass(frozen=True)
class PrefixGainResult:
    """Estimated gain of following a policy from each test prefix on.

    Parameters
    ----------
    policy : str
        The name of the policy.
    detail : pd.DataFrame
        One row per test prefix with columns ``case_id``, ``k``,
        ``ground_truth`` (KPI of the test trace), ``estimate`` (average KPI
        of the test traces sharing the prefix that follow the policy after
        it, NaN if there are none), ``n_matches`` (number of such traces),
        ``gain`` (estimate minus ground truth) and ``compliant`` (whether
        the trace itself follows the policy after the prefix, or throughout
        when the prefix is the complete trace).
    """

    policy: str
    detail: pd.DataFrame

    def summary(self) -> DataFrame[PrefixGainSchema]:
        """Aggregate the gain per prefix length."""
        d = self.detail
        if d.empty:
            return PrefixGainSchema.validate(
                pd.DataFrame(columns=list(PrefixGainSchema.to_schema().columns))
            )
        grouped = d.groupby("k", sort=True)
        out = pd.DataFrame(
            {
                "n_prefixes": grouped.size(),
                "n_estimated": grouped["estimate"].count(),
                "estimate": grouped["estimate"].mean(),
                "ground_truth": grouped["ground_truth"].mean(),
                "gain": grouped["gain"].mean(),
            }
        ).reset_index()
        out["no_estimate"] = out["n_estimated"] == 0
        out.insert(0, "policy", self.policy)
        return PrefixGainSchema.validate(out)

    def flat(self) -> pd.DataFrame:
        """Return (prefix_length, gain, count) per prefix length, for plotting."""
        s = self.summary()
        return pd.DataFrame(
            {"prefix_length": s["k"], "gain": s["gain"], "count": s["n_estimated"]}
        )


def prefix_gain_analysis(
    test_log: EventLog, recommender: Recommender, name: Optional[str] = None
) -> PrefixGainResult:
    """Estimate, per test prefix, the KPI of following a policy from there on.

    For each prefix σ_k of each test trace σ, the estimate is the average
    KPI of the test traces τ with the same first k activities that follow
    the policy after position k, and the ground truth is the KPI of σ. At
    k = len(σ) no decision is left, so the estimate averages the complete
    test traces equal to σ that follow the policy throughout, the same
    traces :func:`optimal_trace_analysis` averages.

    Parameters
    ----------
    test_log : EventLog
        The enriched test log.
    recommender : Recommender
        The trained artifacts of the policy.
    name : str, optional
        The name of the policy. Defaults to the name stored in the policy.

    Returns
    -------
    PrefixGainResult
        The per-prefix detail, with per-length aggregation.
    """
    _check_rewards(test_log)
    # prefix trie: node ids of the activity prefixes of every trace
    trie: dict[tuple[int, str], int] = {}
    nodes: list[list[int]] = []
    for t in test_log.traces:
        ids = [0]
        for a in t.activities:
            key = (ids[-1], a)
            if key not in trie:
                trie[key] = len(trie) + 1
            ids.append(trie[key])
        nodes.append(ids)
    # complete traces get a node of their own, apart from the longer traces through it
    ends: dict[int, int] = {}
    for ids in nodes:
        ends.setdefault(ids[-1], len(trie) + len(ends) + 1)

    totals = np.zeros(len(trie) + len(ends) + 1)
    counts = np.zeros(len(trie) + len(ends) + 1, dtype=np.int64)
    compliance = [compliant_from(t, recommender) for t in test_log.traces]
    for t, ids, ok in zip(test_log.traces, nodes, compliance):
        reward = float(t.reward)  # type: ignore[arg-type]
        for k in range(1, len(t) + 1):
            if ok[k]:
                totals[ids[k]] += reward
                counts[ids[k]] += 1
        if ok[0]:
            totals[ends[ids[-1]]] += reward
            counts[ends[ids[-1]]] += 1

    rows = []
    for t, ids, ok in zip(test_log.traces, nodes, compliance):
        for k in range(1, len(t) + 1):
            node = ends[ids[k]] if k == len(t) else ids[k]
            n = int(counts[node])
            estimate = totals[node] / n if n else float("nan")
            rows.append(
                {
                    "case_id": t.case_id,
                    "k": k,
                    "ground_truth": float(t.reward),  # type: ignore[arg-type]
                    "estimate": estimate,
                    "n_matches": n,
                    "gain": estimate - float(t.reward),  # type: ignore[arg-type]
                    "compliant": ok[0] if k == len(t) else ok[k],
                }
            )
    columns = ["case_id", "k", "ground_truth", "estimate", "n_matches", "gain", "compliant"]
    detail = pd.DataFrame(rows, columns=columns)
    return PrefixGainResult(_name(recommender, name), detail)
