"""Exact dynamic programming on the mined MDP."""

import logging
from typing import Optional

from processaction import config as pacfg
from processaction.mdp import START, Mdp, State

from .base import StateAction

logger = logging.getLogger(__name__)


def value_iteration(
    mdp: Mdp, gamma: Optional[float] = None, tol: float = 1e-10, max_iter: int = 100000
) -> tuple[dict[State, float], dict[StateAction, float]]:
    """Compute the optimal values of an MDP by value iteration.

    The dynamics are those of :class:`~processaction.rl.MdpEnvironment`: in a
    state with environment moves, the environment acts with the probability
    of its share of the occurrences; otherwise the agent chooses the best
    action. Terminal states and the END pseudo-action are worth 0.

    Parameters
    ----------
    mdp : Mdp
        The MDP.
    gamma : float, optional
        The discount factor. Defaults to the discount factor of the MDP.
    tol : float
        Iteration stops when no value changes by more than `tol`.
    max_iter : int
        Maximum number of sweeps.

    Returns
    -------
    tuple(dict, dict)
        The optimal state values V(s) and the optimal action values Q(s, a)
        of every agent state-action pair.
    """
    gamma = mdp.gamma if gamma is None else gamma
    values = {s: 0.0 for s in mdp.states}
    layout = []
    for s, acts in sorted(mdp.outgoing.items()):
        env_edges = [e for a, es in acts.items() if not mdp.is_agent(a) for e in es]
        env_weight = sum(e.count for e in env_edges) + mdp.end_count(s)
        agent = {a: es for a, es in sorted(acts.items()) if mdp.is_agent(a)}
        agent_weight = sum(e.count for es in agent.values() for e in es)
        share = env_weight / (env_weight + agent_weight)
        layout.append((s, env_edges, env_weight, agent, share))

    def backup(edges: tuple, v: dict[State, float]) -> float:  # type: ignore[type-arg]
        return sum(e.probability * (e.reward + gamma * v[e.target]) for e in edges)

    q: dict[StateAction, float] = {}
    for it in range(1, max_iter + 1):
        delta = 0.0
        for s, env_edges, env_weight, agent, share in layout:
            v = 0.0
            if share > 0:
                v += share * sum(
                    e.count / env_weight * (e.reward + gamma * values[e.target]) for e in env_edges
                )
            if agent:
                for a, es in agent.items():
                    q[(s, a)] = backup(es, values)
                v += (1 - share) * max(q[(s, a)] for a in agent)
            delta = max(delta, abs(v - values[s]))
            values[s] = v
        if delta <= tol:
            logger.debug("Value iteration converged after %d sweeps", it)
            break
    else:
        logger.warning("Value iteration stopped after %d sweeps without converging", max_iter)
    for s, _, _, agent, _ in layout:
        for a, es in agent.items():
            q[(s, a)] = backup(es, values)
    return values, q


def optimal_actions(
    q: dict[StateAction, float], state: State, atol: float = 1e-6
) -> set[str]:
    """Return the set of actions whose optimal value is within `atol` of the best one.

    Parameters
    ----------
    q : dict
        Optimal action values, see :func:`value_iteration`.
    state : State
        The state.
    atol : float
        Tolerance on the value.

    Returns
    -------
    set(str)
        The optimal actions; empty if the agent cannot act.
    """
    acts = {a: v for (s, a), v in q.items() if s == state}
    if not acts:
        return set()
    top = max(acts.values())
    return {a for a, v in acts.items() if v >= top - atol}


def state_visit_probability(
    mdp: Mdp, policy: dict[State, str], max_len: int = pacfg.max_episode_len
) -> dict[State, float]:
    """Compute the probability that an episode under a policy visits each state.

    Parameters
    ----------
    mdp : Mdp
        The MDP.
    policy : dict
        Map from decision state to action.
    max_len : int
        Number of steps to propagate.

    Returns
    -------
    dict
        An upper bound of the probability of visiting each state, computed
        as the expected number of visits capped at 1.
    """
    visits = {s: 0.0 for s in mdp.states}
    front = {START: 1.0}
    visits[START] = 1.0
    for _ in range(max_len):
        nxt: dict[State, float] = {}
        for s, p in front.items():
            acts = mdp.outgoing.get(s)
            if not acts or p < 1e-12:
                continue
            env_edges = [e for a, es in acts.items() if not mdp.is_agent(a) for e in es]
            env_weight = sum(e.count for e in env_edges) + mdp.end_count(s)
            agent_weight = sum(e.count for a, es in acts.items() if mdp.is_agent(a) for e in es)
            share = env_weight / (env_weight + agent_weight)
            for e in env_edges:
                nxt[e.target] = nxt.get(e.target, 0.0) + p * share * e.count / env_weight
            if agent_weight and s in policy:
                for e in acts[policy[s]]:
                    nxt[e.target] = nxt.get(e.target, 0.0) + p * (1 - share) * e.probability
        for s, p in nxt.items():
            visits[s] = min(1.0, visits[s] + p)
        front = nxt
        if not front:
            break
    return visits