"""Monte Carlo policy iteration with scaled q-values."""

import logging
from collections.abc import Sequence
from typing import Callable

from processaction.exceptions import NoAgentDecisions
from processaction.mdp import START, Mdp, State

from .base import Policy, QTable, StateAction, TrainConfig, extract_policy
from .environment import MdpEnvironment
from .scaling import ScalingFn, h_value

logger = logging.getLogger(__name__)

Step = tuple[State, str, float, bool]


def _check_trainable(mdp: Mdp) -> None:
    if not mdp.decision_states:
        raise NoAgentDecisions("The MDP has no state in which the agent can act")
    if START not in mdp.outgoing:
        raise ValueError("START has no outgoing edge")


def _epsilon_greedy(
    env: MdpEnvironment,
    values: dict[StateAction, float],
    support: dict[StateAction, tuple[float, int]],
) -> Callable[[State, float], str]:
    """Build an ε-greedy action selector over the scaled q-values."""

    def choose(state: State, epsilon: float) -> str:
        actions = env.choices(state)
        if len(actions) > 1 and env.rng.random() < epsilon:
            return actions[int(env.rng.integers(len(actions)))]
        return min(
            actions,
            key=lambda a: (
                -values[(state, a)] * support[(state, a)][0],
                -support[(state, a)][1],
                a,
            ),
        )

    return choose


def run_episode(
    env: MdpEnvironment, choose: Callable[[State, float], str], epsilon: float, max_len: int
) -> list[Step]:
    """Sample an episode from START.

    Parameters
    ----------
    env : MdpEnvironment
        The environment.
    choose : callable
        Picks the action of the agent in a state, given the exploration rate.
    epsilon : float
        The exploration rate.
    max_len : int
        Maximum number of steps.

    Returns
    -------
    list(tuple)
        (state, action, reward, chosen by agent) for every step.
    """
    steps: list[Step] = []
    state = env.reset()
    while len(steps) < max_len and not env.is_terminal(state):
        move = env.chance_move(state)
        decided = move is None
        if move is None:
            move = env.take(state, choose(state, epsilon))
        steps.append((state, move.action, move.reward, decided))
        if move.target is None:
            break
        state = move.target
    return steps


def mc_policy_iteration(
    mdp: Mdp,
    scaling: ScalingFn = ScalingFn(),
    cfg: TrainConfig = TrainConfig(),
    alphabet: Sequence[str] = (),
) -> tuple[Policy, QTable]:
    """Learn a policy with on-policy every-visit Monte Carlo control.

    Each episode starts in START. The environment moves according to the
    MDP; the agent picks its actions ε-greedily with respect to the scaled
    q-values q(s, a) * h(n(s, a)). After the episode, the discounted returns
    are computed backwards and every visited agent state-action pair moves
    its q-value towards the return with an incremental mean. The q-table
    stores unscaled values; the scaling only steers action selection.

    Parameters
    ----------
    mdp : Mdp
        The MDP.
    scaling : ScalingFn
        The scaling function. A linear function is fitted on the MDP.
    cfg : TrainConfig
        The training settings.
    alphabet : list(str)
        The activity alphabet of the training log, stored in the policy.

    Raises
    ------
    NoAgentDecisions
        If the agent cannot act in any state.

    Returns
    -------
    tuple(Policy, QTable)
        The greedy policy and the unscaled q-values.
    """
    _check_trainable(mdp)
    scaling = scaling.fit(mdp)
    gamma = mdp.gamma if cfg.gamma is None else cfg.gamma
    env = MdpEnvironment(mdp, cfg.seed)
    qtable = QTable.for_mdp(mdp, gamma)
    values, visits = qtable.values, qtable.visits
    support = {(s, a): (h_value(scaling, mdp.n(s, a)), mdp.n(s, a)) for (s, a) in values}
    choose = _epsilon_greedy(env, values, support)

    report_every = max(cfg.episodes // 10, 1)
    total = 0.0
    for episode in range(cfg.episodes):
        steps = run_episode(env, choose, cfg.epsilon(episode), cfg.max_episode_len)
        g = 0.0
        for state, action, reward, decided in reversed(steps):
            g = reward + gamma * g
            if decided:
                key = (state, action)
                visits[key] += 1
                values[key] += (g - values[key]) / visits[key]
        total += g
        if (episode + 1) % report_every == 0:
            logger.info(
                "%s: episode %d/%d, epsilon %.3f, mean return %.2f",
                scaling.name,
                episode + 1,
                cfg.episodes,
                cfg.epsilon(episode),
                total / report_every,
            )
            total = 0.0

    provenance = {
        "algorithm": "monte_carlo",
        "name": scaling.name,
        **cfg.to_dict(),
        "gamma": gamma,
        "epsilon_decay": cfg.decay,
    }
    return extract_policy(qtable, scaling, mdp, provenance, tuple(alphabet)), qtable
