"""Runtime recommendation of the next activity of an ongoing case."""

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import numpy.typing as npt

from processaction import config as pacfg
from processaction.clustering import KMeansModel
from processaction.encoding import NormalizationStats, alphabet_hash, encode
from processaction.eventlog import Trace
from processaction.exceptions import (
    EncodingMismatch,
    NotADecisionPoint,
    ProcessActionError,
    UnknownActivity,
    UnknownState,
)
from processaction.mdp import Mdp, State, state_of
from processaction.rl import Policy, QTable, ranked_actions

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Recommendation:
    """The recommended next activity of a case.

    Parameters
    ----------
    action : str
        The recommended activity.
    q_value : float
        The unscaled q-value of the activity.
    scaled_q : float
        The scaled q-value of the activity.
    support : int
        The number of occurrences n(s, a) of the activity in the state.
    state : State
        The state the prefix was mapped to.
    alternatives : list(tuple)
        (action, scaled q-value, support) of all agent actions of the state,
        best first.
    fallback : bool
        Whether the state was replaced by the nearest known state.
    """

    action: str
    q_value: float
    scaled_q: float
    support: int
    state: State
    alternatives: list[tuple[str, float, int]] = field(default_factory=list)
    fallback: bool = False

    def to_dict(self) -> dict[str, Any]:
        """Convert to a JSON-serializable dict."""
        return {
            "action": self.action,
            "q_value": self.q_value,
            "scaled_q": self.scaled_q,
            "support": self.support,
            "state": {"activity": self.state.last_activity, "cluster": self.state.cluster},
            "alternatives": [
                {"action": a, "scaled_q": sq, "support": n} for a, sq, n in self.alternatives
            ],
            "fallback": self.fallback,
        }


class Recommender:
    """Recommend next activities with a trained policy.

    Parameters
    ----------
    policy : Policy
        The policy.
    qtable : QTable
        The q-values the policy was extracted from.
    mdp : Mdp
        The MDP the policy was trained on.
    kmeans : KMeansModel
        The k-means model used to build the MDP.
    stats : NormalizationStats
        The normalization constants used to build the MDP.
    fallback : bool
        Whether prefixes that map to an unknown state are answered from the
        nearest known decision state with the same last activity.

    Raises
    ------
    EncodingMismatch
        If the artifacts were not built with the same encoding.
    """

    def __init__(
        self,
        policy: Policy,
        qtable: QTable,
        mdp: Mdp,
        kmeans: KMeansModel,
        stats: NormalizationStats,
        fallback: bool = False,
    ) -> None:
        fingerprint = alphabet_hash(stats)
        for name, other in (("MDP", mdp.alphabet_hash), ("policy", policy.alphabet_hash)):
            if other is not None and other != fingerprint:
                raise EncodingMismatch(
                    f"The {name} was built on encoding {other}, not {fingerprint}"
                )
        self.policy = policy
        self.qtable = qtable
        self.mdp = mdp
        self.kmeans = kmeans
        self.stats = stats
        self.fallback = fallback
        self._known = set(mdp.states)
        self._by_activity: dict[str, list[State]] = {}
        for s in sorted(policy.action_of):
            self._by_activity.setdefault(s.last_activity, []).append(s)

    def _centroid(self, cluster: int) -> npt.NDArray[np.float64]:
        if cluster == pacfg.START_CLUSTER:
            return np.zeros(self.stats.dim)
        return self.kmeans.centroids[cluster]  # type: ignore[index]

    def _nearest(self, prefix: Trace, state: State) -> State:
        candidates = self._by_activity.get(state.last_activity, [])
        if not candidates:
            raise UnknownState(f"No decision state with last activity {state.last_activity}")
        k = len(prefix)
        v = encode(prefix, k - 1, self.stats) if k > 1 else np.zeros(self.stats.dim)
        dists = [float(np.sum((v - self._centroid(s.cluster)) ** 2)) for s in candidates]
        best = min(range(len(candidates)), key=lambda i: (dists[i], candidates[i]))
        logger.debug("Unknown state %s falls back to %s", state, candidates[best])
        return candidates[best]

    def state(self, prefix: Trace) -> tuple[State, bool]:
        """Map a prefix to the decision state used for its recommendation.

        Parameters
        ----------
        prefix : Trace
            The ongoing case.

        Raises
        ------
        UnknownActivity
            If the prefix contains an activity outside the training alphabet.
        UnknownState
            If the state is not in the MDP and no fallback applies, or if
            the case has ended in a terminal state.
        NotADecisionPoint
            If only the environment can act in the state.

        Returns
        -------
        tuple(State, bool)
            The state and whether it was obtained by fallback.
        """
        for a in prefix.activities:
            if a not in self.stats.index:
                raise UnknownActivity(a)
        s = state_of(prefix, self.kmeans, self.stats)
        if s in self.policy.action_of:
            return s, False
        if s in self._known and s not in self.mdp.outgoing:
            raise UnknownState(f"The case has ended in state {s}")
        if s in self._known and not self.mdp.agent_choices(s):
            raise NotADecisionPoint(f"Wait for the environment to act in state {s}")
        if not self.fallback:
            raise UnknownState(f"State {s} was never observed")
        return self._nearest(prefix, s), True

    def recommend(self, prefix: Trace) -> Recommendation:
        """Recommend the next activity of an ongoing case.

        Parameters
        ----------
        prefix : Trace
            The ongoing case.

        Raises
        ------
        UnknownActivity
            If the prefix contains an activity outside the training alphabet.
        UnknownState
            If the state is not in the MDP and no fallback applies.
        NotADecisionPoint
            If only the environment can act in the state.

        Returns
        -------
        Recommendation
            The recommendation with its diagnostics.
        """
        s, used_fallback = self.state(prefix)
        ranked = ranked_actions(self.qtable, self.policy.scaling, self.mdp, s)
        action = self.policy.action_of[s]
        ranked.sort(key=lambda r: r[0] != action)
        _, q, sq, n = ranked[0]
        return Recommendation(
            action=action,
            q_value=q,
            scaled_q=sq,
            support=n,
            state=s,
            alternatives=[(a, sq_, n_) for a, _, sq_, n_ in ranked],
            fallback=used_fallback,
        )

    def action_for(self, prefix: Trace) -> Optional[str]:
        """Return the recommended activity, or None if there is none.

        Parameters
        ----------
        prefix : Trace
            The ongoing case.

        Returns
        -------
        str, optional
            The recommended activity.
        """
        try:
            return self.recommend(prefix).action
        except (UnknownState, NotADecisionPoint, UnknownActivity):
            return None

    def recommend_batch(self, prefixes: Iterable[Trace]) -> list[dict[str, Any]]:
        """Recommend the next activity of several cases.

        Parameters
        ----------
        prefixes : iterable(Trace)
            The ongoing cases.

        Returns
        -------
        list(dict)
            One JSON-serializable record per case. Cases without a
            recommendation get a status and a message instead.
        """
        out = []
        for p in prefixes:
            try:
                rec = self.recommend(p)
                out.append({"case_id": p.case_id, "status": "ok", **rec.to_dict()})
            except NotADecisionPoint as e:
                out.append({"case_id": p.case_id, "status": "wait", "message": str(e)})
            except ProcessActionError as e:
                out.append(
                    {"case_id": p.case_id, "status": type(e).__name__, "message": str(e)}
                )
        return out


def recommend(
    prefix: Trace,
    policy: Policy,
    qtable: QTable,
    mdp: Mdp,
    kmeans: KMeansModel,
    stats: NormalizationStats,
    fallback: bool = False,
) -> Recommendation:
    """Recommend the next activity of an ongoing case.

    See :meth:`Recommender.recommend`.

    Parameters
    ----------
    prefix : Trace
        The ongoing case.
    policy : Policy
        The policy.
    qtable : QTable
        The q-values the policy was extracted from.
    mdp : Mdp
        The MDP the policy was trained on.
    kmeans : KMeansModel
        The k-means model used to build the MDP.
    stats : NormalizationStats
        The normalization constants used to build the MDP.
    fallback : bool
        Whether to fall back to the nearest known decision state.

    Returns
    -------
    Recommendation
        The recommendation with its diagnostics.
    """
    return Recommender(policy, qtable, mdp, kmeans, stats, fallback).recommend(prefix)
