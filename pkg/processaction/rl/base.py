"""Q-tables, policies and training settings."""

import json
import math
import os
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Optional

from processaction import config as pacfg
from processaction.exceptions import NoActionsAvailable
from processaction.mdp import Mdp, State

from .scaling import ScalingFn, h_value

StateAction = tuple[State, str]


@dataclass(frozen=True)
class TrainConfig:
    """Settings of a training run.

    Parameters
    ----------
    episodes : int
        Number of simulated episodes.
    gamma : float, optional
        Discount factor. Defaults to the discount factor of the MDP.
    epsilon_start : float
        Exploration rate of the first episode.
    epsilon_end : float
        Lowest exploration rate.
    epsilon_decay : float, optional
        Multiplicative decay of the exploration rate per episode. By default
        it is chosen such that `epsilon_end` is reached after
        `epsilon_horizon` of the episodes.
    epsilon_horizon : float
        Share of the episodes after which `epsilon_end` is reached.
    alpha : float
        Learning rate (Q-learning only).
    seed : int
        Seed of the episode sampling.
    max_episode_len : int
        Maximum number of steps of an episode.
    """

    episodes: int = 10000
    gamma: Optional[float] = None
    epsilon_start: float = pacfg.epsilon_start
    epsilon_end: float = pacfg.epsilon_end
    epsilon_decay: Optional[float] = None
    epsilon_horizon: float = pacfg.epsilon_horizon
    alpha: float = 0.1
    seed: int = 0
    max_episode_len: int = pacfg.max_episode_len

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise ValueError("episodes must be positive")
        if self.gamma is not None and not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0 <= self.epsilon_end <= self.epsilon_start <= 1:
            raise ValueError("Expected 0 <= epsilon_end <= epsilon_start <= 1")
        if self.epsilon_decay is not None and not 0 < self.epsilon_decay <= 1:
            raise ValueError("epsilon_decay must lie in (0, 1]")
        if not 0 < self.epsilon_horizon <= 1:
            raise ValueError("epsilon_horizon must lie in (0, 1]")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.max_episode_len < 1:
            raise ValueError("max_episode_len must be positive")

    @property
    def decay(self) -> float:
        """The per-episode decay of the exploration rate."""
        if self.epsilon_decay is not None:
            return self.epsilon_decay
        if self.epsilon_end == 0 or self.epsilon_start == 0:
            return 1.0
        steps = max(self.epsilon_horizon * self.episodes, 1.0)
        return float((self.epsilon_end / self.epsilon_start) ** (1.0 / steps))

    def epsilon(self, episode: int) -> float:
        """Return the exploration rate of an episode (0-based)."""
        return max(self.epsilon_end, self.epsilon_start * self.decay**episode)

    def to_dict(self) -> dict[str, Any]:
        """Convert to a JSON-serializable dict."""
        return {
            "episodes": self.episodes,
            "gamma": self.gamma,
            "epsilon_start": self.epsilon_start,
            "epsilon_end": self.epsilon_end,
            "epsilon_decay": self.epsilon_decay,
            "epsilon_horizon": self.epsilon_horizon,
            "alpha": self.alpha,
            "seed": self.seed,
            "max_episode_len": self.max_episode_len,
        }


@dataclass
class QTable:
    """Tabular state-action values.

    Parameters
    ----------
    values : dict
        Map from (state, action) to q(s, a).
    visits : dict
        Map from (state, action) to the number of updates of q(s, a).
    gamma : float
        The discount factor the values were estimated with.
    """

    values: dict[StateAction, float] = field(default_factory=dict)
    visits: dict[StateAction, int] = field(default_factory=dict)
    gamma: float = pacfg.gamma

    @classmethod
    def for_mdp(cls, mdp: Mdp, gamma: Optional[float] = None) -> "QTable":
        """Create a zero table with one entry per agent state-action pair of an MDP."""
        pairs = [(s, a) for (s, a) in sorted(mdp.occurrence) if mdp.is_agent(a)]
        return cls(
            {p: 0.0 for p in pairs},
            {p: 0 for p in pairs},
            mdp.gamma if gamma is None else gamma,
        )

    def q(self, state: State, action: str) -> float:
        """Return q(s, a), 0 for unknown pairs."""
        return self.values.get((state, action), 0.0)


@dataclass(frozen=True)
class Policy:
    """A deterministic mapping from states to agent actions.

    Parameters
    ----------
    action_of : dict
        Map from decision state to the chosen action.
    scaling : ScalingFn
        The scaling function used to choose the actions.
    provenance : dict
        Training metadata (algorithm, episodes, seed, exploration schedule).
    alphabet : tuple(str)
        The activity alphabet of the training log.
    alphabet_hash : str, optional
        Fingerprint of the encoding of the MDP.
    """

    action_of: Mapping[State, str]
    scaling: ScalingFn = ScalingFn()
    provenance: Mapping[str, Any] = field(default_factory=dict)
    alphabet: tuple[str, ...] = ()
    alphabet_hash: Optional[str] = None

    def __call__(self, state: State) -> Optional[str]:
        return self.action_of.get(state)

    @property
    def name(self) -> str:
        """The name of the policy."""
        return str(self.provenance.get("name", self.scaling.name))


def ranked_actions(
    qtable: QTable, scaling: ScalingFn, mdp: Mdp, state: State
) -> list[tuple[str, float, float, int]]:
    """Rank the agent actions of a state by scaled q-value.

    Ties are broken by the higher number of occurrences, then by the
    lexicographically smallest label.

    Parameters
    ----------
    qtable : QTable
        The q-values.
    scaling : ScalingFn
        The scaling function.
    mdp : Mdp
        The MDP.
    state : State
        The state.

    Returns
    -------
    list(tuple)
        (action, q, scaled q, n) for each agent action, best first.
    """
    rows = []
    for a in mdp.agent_choices(state):
        n = mdp.n(state, a)
        q = qtable.q(state, a)
        rows.append((a, q, q * h_value(scaling, n), n))
    return sorted(rows, key=lambda r: (-r[2], -r[3], r[0]))


def greedy_action(qtable: QTable, scaling: ScalingFn, mdp: Mdp, state: State) -> str:
    """Return the agent action with the highest scaled q-value.

    Parameters
    ----------
    qtable : QTable
        The q-values.
    scaling : ScalingFn
        The scaling function.
    mdp : Mdp
        The MDP.
    state : State
        The state.

    Raises
    ------
    NoActionsAvailable
        If the agent cannot act in the state.

    Returns
    -------
    str
        The action. Ties are broken by the higher number of occurrences,
        then by the lexicographically smallest label.
    """
    ranked = ranked_actions(qtable, scaling, mdp, state)
    if not ranked:
        raise NoActionsAvailable(f"No agent action in state {state}")
    return ranked[0][0]


def extract_policy(
    qtable: QTable,
    scaling: ScalingFn,
    mdp: Mdp,
    provenance: Optional[Mapping[str, Any]] = None,
    alphabet: tuple[str, ...] = (),
) -> Policy:
    """Build the greedy policy of a q-table.

    Parameters
    ----------
    qtable : QTable
        The q-values.
    scaling : ScalingFn
        The scaling function.
    mdp : Mdp
        The MDP.
    provenance : dict, optional
        Training metadata.
    alphabet : tuple(str)
        The activity alphabet of the training log.

    Returns
    -------
    Policy
        The greedy policy in every decision state.
    """
    return Policy(
        {s: greedy_action(qtable, scaling, mdp, s) for s in sorted(mdp.decision_states)},
        scaling,
        dict(provenance or {}),
        tuple(alphabet),
        mdp.alphabet_hash,
    )


def _finite(x: float) -> Optional[float]:
    return x if math.isfinite(x) else None


def policy_to_dict(policy: Policy, qtable: QTable, mdp: Mdp) -> dict[str, Any]:
    """Convert a policy and its q-values to a JSON-serializable dict."""
    entries = []
    for (s, a), q in sorted(qtable.values.items()):
        n = mdp.n(s, a)
        entries.append(
            {
                "activity": s.last_activity,
                "cluster": s.cluster,
                "action": a,
                "q": _finite(q),
                "scaled_q": _finite(q * h_value(policy.scaling, n)),
                "n": n,
                "visits": qtable.visits.get((s, a), 0),
            }
        )
    return {
        "name": policy.name,
        "scaling": policy.scaling.to_dict(),
        "provenance": dict(policy.provenance),
        "alphabet": list(policy.alphabet),
        "alphabet_hash": policy.alphabet_hash,
        "gamma": qtable.gamma,
        "policy": [
            {"activity": s.last_activity, "cluster": s.cluster, "action": a}
            for s, a in sorted(policy.action_of.items())
        ],
        "q": entries,
    }


def policy_from_dict(d: Mapping[str, Any]) -> tuple[Policy, QTable]:
    """Create a policy and its q-values from a dict produced by :func:`policy_to_dict`."""
    values: dict[StateAction, float] = {}
    visits: dict[StateAction, int] = {}
    for r in d["q"]:
        key = (State(r["activity"], int(r["cluster"])), r["action"])
        values[key] = float(r["q"]) if r["q"] is not None else float("nan")
        visits[key] = int(r["visits"])
    policy = Policy(
        {State(r["activity"], int(r["cluster"])): r["action"] for r in d["policy"]},
        ScalingFn.from_dict(d["scaling"]),
        dict(d["provenance"]),
        tuple(d["alphabet"]),
        d["alphabet_hash"],
    )
    return policy, QTable(values, visits, float(d["gamma"]))


def save_policy(
    policy: Policy, qtable: QTable, mdp: Mdp, filepath: str, overwrite: bool = True
) -> None:
    """Save a policy with its q-values in JSON format.

    Parameters
    ----------
    policy : Policy
        The policy.
    qtable : QTable
        The q-values the policy was extracted from.
    mdp : Mdp
        The MDP, to report the occurrence counts.
    filepath : str
        Path to the file to save the policy to.
    overwrite : bool
        Whether to silently overwrite any existing file at the target
        location.

    Raises
    ------
    ValueError
        If the specified output file already exists and "overwrite" is set
        to False.
    """
    if not overwrite and os.path.isfile(filepath):
        raise ValueError(
            'save_policy got overwrite="False", but a file '
            f"({filepath}) exists already. No data was saved."
        )
    with open(filepath, "w") as f:
        json.dump(policy_to_dict(policy, qtable, mdp), f, sort_keys=True)


def load_policy(path: str) -> tuple[Policy, QTable]:
    """Load a policy saved with :func:`save_policy`.

    Parameters
    ----------
    path : str
        Path of the JSON file.

    Returns
    -------
    tuple(Policy, QTable)
        The policy and its q-values.
    """
    with open(path) as f:
        return policy_from_dict(json.load(f))
