"""States, edges and the Markov decision process mined from a log."""

from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional

from processaction import config as pacfg


class State(NamedTuple):
    """A state of the mined MDP.

    A state pairs the last activity of a prefix with the cluster of the
    prefix without that activity.
    """

    last_activity: str
    cluster: int

    def __str__(self) -> str:
        return f"{self.last_activity}@{self.cluster}"


START = State(pacfg.START_ACTIVITY, pacfg.START_CLUSTER)
"""The state of the empty prefix."""

EdgeKey = tuple[State, str, State]


@dataclass(frozen=True)
class Edge:
    """A transition of the MDP.

    Parameters
    ----------
    source : State
        The state in which the action is taken.
    action : str
        The activity label.
    target : State
        The state reached.
    count : int
        Number of times the transition was replayed.
    probability : float
        ``count / n(source, action)``.
    reward : float
        Mean reward of the prefixes attributed to the transition.
    reward_samples : int
        Number of prefixes averaged into the reward.
    """

    source: State
    action: str
    target: State
    count: int
    probability: float
    reward: float = 0.0
    reward_samples: int = 0

    @property
    def key(self) -> EdgeKey:
        """The (source, action, target) triple."""
        return (self.source, self.action, self.target)


@dataclass(frozen=True)
class Mdp:
    """A Markov decision process mined from an event log.

    The MDP is a directed multigraph over states. An edge is labelled with
    the activity that was executed; activities of the agent are the actions
    a policy can choose, the others are moves of the environment. A state
    without outgoing edges is terminal. A state that has outgoing edges and
    in which traces also ended carries an END pseudo-action, kept apart from
    the edges in `end_counts`.

    Parameters
    ----------
    edges : tuple(Edge)
        The transitions.
    end_counts : dict
        Number of traces that ended in each state.
    agent_actions : frozenset(str)
        The activities owned by the agent.
    gamma : float
        The discount factor.
    alphabet_hash : str, optional
        Fingerprint of the encoding the MDP was built with.
    metadata : dict
        Provenance information (clustering, reward attribution, ...).
    """

    edges: tuple[Edge, ...]
    end_counts: Mapping[State, int] = field(default_factory=dict)
    agent_actions: frozenset[str] = frozenset()
    gamma: float = pacfg.gamma
    alphabet_hash: Optional[str] = None
    metadata: Mapping[str, Any] = field(default_factory=dict)
    _outgoing: dict[State, dict[str, tuple[Edge, ...]]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if not 0 <= self.gamma <= 1:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        edges = tuple(sorted(self.edges, key=lambda e: (e.source, e.action, e.target)))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "agent_actions", frozenset(self.agent_actions))
        object.__setattr__(self, "end_counts", {s: c for s, c in self.end_counts.items() if c})
        out: dict[State, dict[str, list[Edge]]] = defaultdict(lambda: defaultdict(list))
        for e in edges:
            out[e.source][e.action].append(e)
        object.__setattr__(
            self,
            "_outgoing",
            {s: {a: tuple(es) for a, es in acts.items()} for s, acts in out.items()},
        )

    @property
    def outgoing(self) -> dict[State, dict[str, tuple[Edge, ...]]]:
        """Map from state to action to the edges leaving the state with that action."""
        return self._outgoing

    @property
    def states(self) -> list[State]:
        """All states, sorted, including START."""
        found = {START} | set(self.end_counts)
        for e in self.edges:
            found.add(e.source)
            found.add(e.target)
        return sorted(found)

    @property
    def terminals(self) -> list[State]:
        """The states without outgoing edges."""
        return [s for s in self.states if s not in self.outgoing]

    @property
    def occurrence(self) -> dict[tuple[State, str], int]:
        """Map from (state, action) to its number of occurrences n(s, a)."""
        return {
            (s, a): sum(e.count for e in es)
            for s, acts in self.outgoing.items()
            for a, es in acts.items()
        }

    def n(self, state: State, action: str) -> int:
        """Return the number of occurrences of an action in a state."""
        return sum(e.count for e in self.outgoing.get(state, {}).get(action, ()))

    def is_agent(self, action: str) -> bool:
        """Whether an action is owned by the agent."""
        return action in self.agent_actions

    def actions(self, state: State) -> list[str]:
        """Return all actions leaving a state, sorted."""
        return sorted(self.outgoing.get(state, {}))

    def agent_choices(self, state: State) -> list[str]:
        """Return the agent actions available in a state, sorted."""
        return [a for a in self.actions(state) if self.is_agent(a)]

    def environment_moves(self, state: State) -> list[str]:
        """Return the environment actions leaving a state, sorted."""
        return [a for a in self.actions(state) if not self.is_agent(a)]

    def end_count(self, state: State) -> int:
        """Return the number of traces that ended in a state."""
        return self.end_counts.get(state, 0)

    @property
    def decision_states(self) -> list[State]:
        """The states in which the agent can act."""
        return [s for s in self.outgoing if self.agent_choices(s)]

    @property
    def mixed_states(self) -> list[State]:
        """The states with both agent actions and environment moves (or END)."""
        return sorted(
            s
            for s in self.outgoing
            if self.agent_choices(s) and (self.environment_moves(s) or self.end_count(s))
        )

    def __repr__(self) -> str:
        return (
            f"Mdp(states={len(self.states)}, edges={len(self.edges)}, "
            f"decision_states={len(self.decision_states)}, gamma={self.gamma})"
        )

    @classmethod
    def from_counts(
        cls,
        counts: Mapping[EdgeKey, int],
        rewards: Optional[Mapping[EdgeKey, float]] = None,
        reward_samples: Optional[Mapping[EdgeKey, int]] = None,
        end_counts: Optional[Mapping[State, int]] = None,
        agent_actions: Iterable[str] = (),
        gamma: float = pacfg.gamma,
        alphabet_hash: Optional[str] = None,
        metadata: Optional[Mapping[str, Any]] = None,
    ) -> "Mdp":
        """Create an MDP from transition counts.

        Parameters
        ----------
        counts : dict
            Map from (source, action, target) to the number of replays.
        rewards : dict, optional
            Map from (source, action, target) to the mean reward. Missing
            transitions have reward 0.
        reward_samples : dict, optional
            Map from (source, action, target) to the number of averaged
            rewards. Defaults to the counts.
        end_counts : dict, optional
            Number of traces that ended in each state.
        agent_actions : iterable(str)
            The activities owned by the agent.
        gamma : float
            The discount factor.
        alphabet_hash : str, optional
            Fingerprint of the encoding.
        metadata : dict, optional
            Provenance information.

        Raises
        ------
        ValueError
            If a count is not positive.

        Returns
        -------
        Mdp
            The MDP, with probabilities ``count / n(source, action)``.
        """
        n_sa: dict[tuple[State, str], int] = defaultdict(int)
        for (s, a, _), c in counts.items():
            if c <= 0:
                raise ValueError(f"Edge counts must be positive, got {c} for ({s}, {a})")
            n_sa[(s, a)] += c
        rewards = rewards or {}
        samples = reward_samples if reward_samples is not None else counts
        edges = tuple(
            Edge(
                source=s,
                action=a,
                target=t,
                count=c,
                probability=c / n_sa[(s, a)],
                reward=float(rewards.get((s, a, t), 0.0)),
                reward_samples=int(samples.get((s, a, t), 0)),
            )
            for (s, a, t), c in counts.items()
        )
        return cls(
            edges=edges,
            end_counts=dict(end_counts or {}),
            agent_actions=frozenset(agent_actions),
            gamma=gamma,
            alphabet_hash=alphabet_hash,
            metadata=dict(metadata or {}),
        )
