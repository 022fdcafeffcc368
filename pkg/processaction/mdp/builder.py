"""Construction of the MDP by replaying the traces of a log."""

import logging
from collections import defaultdict

import numpy as np

from processaction import config as pacfg
from processaction.clustering import KMeansModel
from processaction.encoding import NormalizationStats, alphabet_hash, encode, encode_log
from processaction.eventlog import EventLog, Trace
from processaction.exceptions import EmptyLog, EncodingMismatch, UnknownActivity

from .base import START, EdgeKey, Mdp, State

logger = logging.getLogger(__name__)

REWARD_MODES = ("transition", "agent")


def _check_encoding(kmeans: KMeansModel, stats: NormalizationStats) -> None:
    if kmeans.alphabet_hash is not None and kmeans.alphabet_hash != alphabet_hash(stats):
        raise EncodingMismatch(
            f"k-means model was fit on encoding {kmeans.alphabet_hash}, "
            f"stats describe encoding {alphabet_hash(stats)}"
        )
    if kmeans.dim != stats.dim:
        raise EncodingMismatch(
            f"k-means centroids have dimension {kmeans.dim}, the encoding {stats.dim}"
        )


def state_of(trace_prefix: Trace, kmeans: KMeansModel, stats: NormalizationStats) -> State:
    """Map a prefix to its state.

    The state of a prefix pairs its last activity with the cluster of the
    prefix without that activity. The empty prefix maps to START and a prefix
    of length one pairs its activity with the START cluster.

    Parameters
    ----------
    trace_prefix : Trace
        The prefix. A prefix without reward is an ongoing execution.
    kmeans : KMeansModel
        The fitted k-means model.
    stats : NormalizationStats
        The normalization constants.

    Raises
    ------
    UnknownActivity
        If the prefix contains an activity outside the alphabet.

    Returns
    -------
    State
        The state.
    """
    k = len(trace_prefix)
    if k == 0:
        return START
    last = trace_prefix.events[-1].activity
    if last not in stats.index:
        raise UnknownActivity(last)
    if k == 1:
        return State(last, pacfg.START_CLUSTER)
    return State(last, kmeans.assign_one(encode(trace_prefix, k - 1, stats)))


def replay_states(trace: Trace, labels: np.ndarray) -> list[State]:  # type: ignore[type-arg]
    """Return the states visited by a trace.

    Parameters
    ----------
    trace : Trace
        The trace.
    labels : np.ndarray
        The cluster of each non-empty prefix of the trace.

    Returns
    -------
    list(State)
        The states of the prefixes of length 0, 1, ..., len(trace).
    """
    states = [START]
    for k, e in enumerate(trace.events, start=1):
        cluster = pacfg.START_CLUSTER if k == 1 else int(labels[k - 2])
        states.append(State(e.activity, cluster))
    return states


def build(
    log: EventLog,
    kmeans: KMeansModel,
    stats: NormalizationStats,
    gamma: float = pacfg.gamma,
    reward_mode: str = "transition",
) -> Mdp:
    """Build the MDP of a log by replaying its traces.

    Every event e_k of every trace adds one traversal of the edge
    (s(σ_k-1), Act(e_k), s(σ_k)). Each prefix σ_k also yields one reward
    sample r(σ_k), which is 0 for proper prefixes and the trace reward for
    the complete trace. With ``reward_mode="transition"`` the sample is
    attributed to the edge replayed by σ_k. With ``reward_mode="agent"`` it
    is attributed to the edge of the last agent event at or before position
    k, so only agent edges carry rewards; samples before the first agent
    event are dropped.

    Parameters
    ----------
    log : EventLog
        The enriched training log.
    kmeans : KMeansModel
        The k-means model fit on the prefixes of the log.
    stats : NormalizationStats
        The normalization constants of the log.
    gamma : float
        The discount factor of the MDP.
    reward_mode : {'transition', 'agent'}
        How reward samples are attributed to edges.

    Raises
    ------
    EmptyLog
        If the log has no events.
    EncodingMismatch
        If the k-means model was fit on another encoding.
    ValueError
        If a trace has no reward or the reward mode is unknown.

    Returns
    -------
    Mdp
        The MDP.
    """
    if reward_mode not in REWARD_MODES:
        raise ValueError(f"Unknown reward mode '{reward_mode}', expected one of {REWARD_MODES}")
    if len(log) == 0 or log.n_events == 0:
        raise EmptyLog("Cannot build an MDP from an empty log")
    if any(t.reward is None for t in log.traces):
        raise ValueError("All traces must be enriched with a reward")
    _check_encoding(kmeans, stats)

    labels = kmeans.assign(encode_log(log, stats).to_numpy())
    counts: dict[EdgeKey, int] = defaultdict(int)
    reward_sums: dict[EdgeKey, float] = defaultdict(float)
    reward_samples: dict[EdgeKey, int] = defaultdict(int)
    end_counts: dict[State, int] = defaultdict(int)
    offset = 0
    for t in log.traces:
        n = len(t)
        if n == 0:
            continue
        states = replay_states(t, labels[offset : offset + n])
        offset += n
        keys = [(states[k - 1], e.activity, states[k]) for k, e in enumerate(t.events, start=1)]
        last_agent = None
        for k, key in enumerate(keys, start=1):
            counts[key] += 1
            sample = float(t.reward) if k == n else 0.0  # type: ignore[arg-type]
            if reward_mode == "transition":
                target = key
            else:
                if t.events[k - 1].is_agent:
                    last_agent = key
                if last_agent is None:
                    continue
                target = last_agent
            reward_sums[target] += sample
            reward_samples[target] += 1
        end_counts[states[-1]] += 1

    rewards = {key: reward_sums[key] / reward_samples[key] for key in reward_samples}
    mdp = Mdp.from_counts(
        counts,
        rewards=rewards,
        reward_samples=reward_samples,
        end_counts=end_counts,
        agent_actions=log.agent_activities,
        gamma=gamma,
        alphabet_hash=alphabet_hash(stats),
        metadata={"k": kmeans.k, "kmeans_seed": kmeans.seed, "reward_mode": reward_mode},
    )
    logger.info("Built %r from %d traces", mdp, len(log))
    return mdp
