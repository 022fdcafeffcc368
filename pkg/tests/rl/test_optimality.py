"""Learned policies against the optimal policy computed by value iteration.

A learned greedy action may differ from the optimal set only where the gap
between their optimal values is within the estimation error of the learned
q-values. The error bounds are derived per state-action pair:

- Monte Carlo averages the returns of every visit. Returns of a pair lie in
  a known interval, so by Hoeffding's inequality the mean strays from its
  expectation by more than ``range * sqrt(ln(2/δ) / 2n)`` with probability
  at most δ. The expectation lies below the optimal value by at most the
  loss of the worst continuation after the pair.
- Q-learning with a constant step α is an exponentially weighted average
  of its targets, whose squared weights sum to at most α / (2 - α). Its
  error adds the spread of the targets, the weight still on the initial
  value, and the error of the successor states.
"""

import math
from collections.abc import Mapping

import pytest
from processaction.mdp import Mdp, State
from processaction.rl import (
    QTable,
    ScalingFn,
    TrainConfig,
    mc_policy_iteration,
    optimal_actions,
    q_learning,
    state_visit_probability,
    value_iteration,
)

EPISODES = 50000
REACH = 0.01
DELTA = 1e-6
Z = math.sqrt(math.log(2 / DELTA) / 2)

Errors = dict[tuple[State, str], tuple[float, float]]
Values = dict[tuple[State, str], float]


def _return_bounds(mdp: Mdp) -> dict[State, tuple[float, float]]:
    """Lowest and highest discounted return from each state over all continuations."""
    bounds: dict[State, tuple[float, float]] = {}

    def visit(s: State) -> tuple[float, float]:
        if s not in bounds:
            options = [0.0] if mdp.end_count(s) or s not in mdp.outgoing else []
            for edges in mdp.outgoing.get(s, {}).values():
                for e in edges:
                    lo, hi = visit(e.target)
                    options += [e.reward + mdp.gamma * lo, e.reward + mdp.gamma * hi]
            bounds[s] = (min(options), max(options))
        return bounds[s]

    for s in mdp.states:
        visit(s)
    return bounds


def _mc_errors(mdp: Mdp, qtable: QTable, v: dict[State, float]) -> Errors:
    bounds = _return_bounds(mdp)
    errors: Errors = {}
    for (s, a), n in qtable.visits.items():
        edges = mdp.outgoing[s][a]
        lo = min(e.reward + mdp.gamma * bounds[e.target][0] for e in edges)
        hi = max(e.reward + mdp.gamma * bounds[e.target][1] for e in edges)
        noise = (hi - lo) * Z / math.sqrt(n) if n else math.inf
        bias = max(mdp.gamma * (v[e.target] - bounds[e.target][0]) for e in edges)
        errors[(s, a)] = (noise, bias)
    return errors


def _q_errors(
    mdp: Mdp, qtable: QTable, v: dict[State, float], q: Values, alpha: float
) -> Errors:
    weight = Z * math.sqrt(alpha / (2 - alpha))
    errors: dict[tuple[State, str], float] = {}

    def state_error(s: State) -> float:
        return max((pair_error(s, b) for b in mdp.agent_choices(s)), default=0.0)

    def pair_error(s: State, a: str) -> float:
        if (s, a) not in errors:
            n = qtable.visits[(s, a)]
            targets = [e.reward + mdp.gamma * v[e.target] for e in mdp.outgoing[s][a]]
            residual = (1 - alpha) ** n * abs(q[(s, a)])
            downstream = max(mdp.gamma * state_error(e.target) for e in mdp.outgoing[s][a])
            noise = (max(targets) - min(targets)) * weight
            errors[(s, a)] = noise + residual + downstream if n else math.inf
        return errors[(s, a)]

    return {(s, a): (pair_error(s, a), 0.0) for (s, a) in qtable.visits}


def _check(mdp: Mdp, policy: Mapping[State, str], errors: Errors, q: Values) -> int:
    """Assert near-optimal choices in reachable states; count the states without ambiguity."""
    optimal = {s: sorted(optimal_actions(q, s))[0] for s in mdp.decision_states}
    reach = state_visit_probability(mdp, optimal)
    clear = 0
    for s in mdp.decision_states:
        if reach[s] < REACH:
            continue
        best = optimal[s]
        top = q[(s, best)]
        noise_b, bias_b = errors[(s, best)]
        slack = {a: errors[(s, a)][0] + noise_b + bias_b for a in mdp.agent_choices(s)}
        chosen = policy[s]
        assert top - q[(s, chosen)] <= slack[chosen] + 1e-9, f"state {s}"
        others = [a for a in mdp.agent_choices(s) if a not in optimal_actions(q, s)]
        if all(top - q[(s, a)] > slack[a] for a in others):
            assert chosen in optimal_actions(q, s), f"state {s}"
            clear += 1
    return clear


@pytest.mark.e2e
class TestOptimality:
    """Tests against the optimal policy computed by value iteration."""

    def test_monte_carlo(self, random_mdps: list[Mdp]) -> None:
        """It should pick an optimal action wherever its estimates can tell."""
        clear = 0
        for mdp in random_mdps:
            v, q = value_iteration(mdp)
            policy, qtable = mc_policy_iteration(
                mdp, ScalingFn("h0"), TrainConfig(EPISODES, seed=1)
            )
            clear += _check(mdp, policy.action_of, _mc_errors(mdp, qtable, v), q)
        assert clear >= 25

    def test_q_learning(self, random_mdps: list[Mdp]) -> None:
        """It should pick an optimal action wherever its estimates can tell."""
        alpha = 0.05
        clear = 0
        for mdp in random_mdps:
            v, q = value_iteration(mdp)
            policy, qtable = q_learning(mdp, TrainConfig(EPISODES, alpha=alpha, seed=2))
            clear += _check(mdp, policy.action_of, _q_errors(mdp, qtable, v, q, alpha), q)
        assert clear >= 25

