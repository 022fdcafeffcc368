"""Episode sampling on a mined MDP."""

from typing import NamedTuple, Optional, Union

import numpy as np
import numpy.typing as npt

from processaction import config as pacfg
from processaction.mdp import START, Mdp, State


class Move(NamedTuple):
    """One step of an episode.

    A move with `target` None ends the episode (the END pseudo-action).
    """

    action: str
    target: Optional[State]
    reward: float


class _Outcomes(NamedTuple):
    targets: list[State]
    rewards: npt.NDArray[np.float64]
    cumprob: npt.NDArray[np.float64]


def _outcomes(
    targets: list[State], rewards: list[float], weights: list[float]
) -> _Outcomes:
    w = np.asarray(weights, dtype=np.float64)
    return _Outcomes(targets, np.asarray(rewards, dtype=np.float64), np.cumsum(w) / w.sum())


class MdpEnvironment:
    """Sampling view of an MDP.

    In every non-terminal state the environment has priority: it moves with
    a probability equal to the share of environment moves (END included)
    among all occurrences at the state. Otherwise the agent chooses one of
    its actions and the target state is drawn from P(s, a, .).

    Parameters
    ----------
    mdp : Mdp
        The MDP.
    seed : int or np.random.Generator
        Seed or generator of the random draws.
    """

    def __init__(self, mdp: Mdp, seed: Union[int, np.random.Generator] = 0) -> None:
        self.mdp = mdp
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        self._chance: dict[State, _Outcomes] = {}
        self._chance_share: dict[State, float] = {}
        self._agent: dict[State, dict[str, _Outcomes]] = {}
        self._env_actions: dict[State, list[str]] = {}
        for s, acts in mdp.outgoing.items():
            env_targets: list[State] = []
            env_rewards: list[float] = []
            env_weights: list[float] = []
            env_actions: list[str] = []
            agent_weight = 0
            for a in sorted(acts):
                edges = acts[a]
                if mdp.is_agent(a):
                    agent_weight += sum(e.count for e in edges)
                    self._agent.setdefault(s, {})[a] = _outcomes(
                        [e.target for e in edges],
                        [e.reward for e in edges],
                        [e.count for e in edges],
                    )
                else:
                    for e in edges:
                        env_actions.append(a)
                        env_targets.append(e.target)
                        env_rewards.append(e.reward)
                        env_weights.append(e.count)
            end = mdp.end_count(s)
            if end:
                env_actions.append(pacfg.END_ACTION)
                env_targets.append(s)
                env_rewards.append(0.0)
                env_weights.append(end)
            chance_weight = sum(env_weights)
            if chance_weight:
                self._chance[s] = _outcomes(env_targets, env_rewards, env_weights)
                self._env_actions[s] = env_actions
            self._chance_share[s] = chance_weight / (chance_weight + agent_weight)

    def reset(self) -> State:
        """Return the initial state."""
        return START

    def is_terminal(self, state: State) -> bool:
        """Whether no move leaves a state."""
        return state not in self.mdp.outgoing

    def choices(self, state: State) -> list[str]:
        """Return the agent actions available in a state, sorted."""
        return list(self._agent.get(state, {}))

    def chance_share(self, state: State) -> float:
        """Return the probability that the environment moves in a state."""
        return self._chance_share.get(state, 0.0)

    def _draw(self, outcomes: _Outcomes) -> int:
        if len(outcomes.cumprob) == 1:
            return 0
        i = int(np.searchsorted(outcomes.cumprob, self.rng.random(), side="right"))
        return min(i, len(outcomes.cumprob) - 1)

    def chance_move(self, state: State) -> Optional[Move]:
        """Let the environment act in a state if it has priority.

        Parameters
        ----------
        state : State
            A non-terminal state.

        Returns
        -------
        Move, optional
            The move of the environment, or None if the agent must act.
        """
        share = self.chance_share(state)
        if share == 0.0:
            return None
        if share < 1.0 and self.rng.random() >= share:
            return None
        outcomes = self._chance[state]
        i = self._draw(outcomes)
        action = self._env_actions[state][i]
        if action == pacfg.END_ACTION:
            return Move(action, None, 0.0)
        return Move(action, outcomes.targets[i], float(outcomes.rewards[i]))

    def take(self, state: State, action: str) -> Move:
        """Execute an agent action.

        Parameters
        ----------
        state : State
            The current state.
        action : str
            One of :meth:`choices`.

        Raises
        ------
        KeyError
            If the action is not available in the state.

        Returns
        -------
        Move
            The resulting move.
        """
        outcomes = self._agent[state][action]
        i = self._draw(outcomes)
        return Move(action, outcomes.targets[i], float(outcomes.rewards[i]))
