"""Tabular Q-learning on the mined MDP."""

import logging
from collections.abc import Sequence
from typing import Optional

from processaction.mdp import Mdp, State

from .base import Policy, QTable, StateAction, TrainConfig, extract_policy
from .environment import MdpEnvironment
from .montecarlo import _check_trainable, _epsilon_greedy
from .scaling import ScalingFn

logger = logging.getLogger(__name__)


def q_learning(
    mdp: Mdp,
    cfg: TrainConfig = TrainConfig(),
    scaling: ScalingFn = ScalingFn(),
    alphabet: Sequence[str] = (),
) -> tuple[Policy, QTable]:
    """Learn a policy with off-policy temporal-difference control.

    The agent acts ε-greedily. After each agent decision (s, a), the rewards
    of the environment moves that follow are accumulated (discounted) until
    the next decision state s' or the end of the episode, and::

        Q(s, a) <- Q(s, a) + alpha * (R + gamma^m * max_a' Q(s', a') - Q(s, a))

    where m is the number of steps between both decisions. The end of an
    episode, including truncation at `max_episode_len`, is treated as
    terminal.

    Parameters
    ----------
    mdp : Mdp
        The MDP.
    cfg : TrainConfig
        The training settings.
    scaling : ScalingFn
        The scaling function applied when acting and when extracting the
        greedy policy. The updates use the unscaled values.
    alphabet : list(str)
        The activity alphabet of the training log, stored in the policy.

    Raises
    ------
    NoAgentDecisions
        If the agent cannot act in any state.

    Returns
    -------
    tuple(Policy, QTable)
        The greedy policy and the learned q-values.
    """
    _check_trainable(mdp)
    scaling = scaling.fit(mdp)
    gamma = mdp.gamma if cfg.gamma is None else cfg.gamma
    env = MdpEnvironment(mdp, cfg.seed)
    qtable = QTable.for_mdp(mdp, gamma)
    values, visits = qtable.values, qtable.visits
    support = {(s, a): (1.0, mdp.n(s, a)) for (s, a) in values}
    choose = _epsilon_greedy(env, values, support)

    def update(key: StateAction, target: float) -> None:
        visits[key] += 1
        values[key] += cfg.alpha * (target - values[key])

    def best(state: State) -> float:
        return max(values[(state, a)] for a in env.choices(state))

    report_every = max(cfg.episodes // 10, 1)
    for episode in range(cfg.episodes):
        epsilon = cfg.epsilon(episode)
        state = env.reset()
        pending: Optional[StateAction] = None
        ret, discount = 0.0, 1.0
        steps = 0
        while steps < cfg.max_episode_len and not env.is_terminal(state):
            move = env.chance_move(state)
            if move is None:
                if pending is not None:
                    update(pending, ret + discount * best(state))
                action = choose(state, epsilon)
                move = env.take(state, action)
                pending = (state, action)
                ret, discount = move.reward, gamma
            elif pending is not None:
                ret += discount * move.reward
                discount *= gamma
            steps += 1
            if move.target is None:
                break
            state = move.target
        if pending is not None:
            update(pending, ret)
        if (episode + 1) % report_every == 0:
            logger.info(
                "q-learning: episode %d/%d, epsilon %.3f", episode + 1, cfg.episodes, epsilon
            )

    provenance = {
        "algorithm": "q_learning",
        "name": f"q_{scaling.name[3:]}",
        **cfg.to_dict(),
        "gamma": gamma,
        "epsilon_decay": cfg.decay,
    }
    return extract_policy(qtable, scaling, mdp, provenance, tuple(alphabet)), qtable
