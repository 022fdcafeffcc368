"""Policy-in-the-loop simulation of a process model."""

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np
import numpy.typing as npt
import pandas as pd

from processaction import config as pacfg
from processaction.evaluation import compare_policies
from processaction.exceptions import IncompatibleAlphabet
from processaction.recommender import Recommender

from .generator import EXCEPTION, MAX_EVENTS, STALL, PolicyFn, arrivals, case_rng, simulate_case
from .model import ProcessModel, validate_model

logger = logging.getLogger(__name__)

LOG_POLICY = "log"

PolicyLike = Union[Recommender, PolicyFn, None]


@dataclass(frozen=True)
class SimResult:
    """The outcome of simulating a policy.

    Parameters
    ----------
    name : str
        The name of the policy.
    rewards : np.ndarray
        The reward of each simulated case, in case order.
    exceptions : int
        Number of cases stopped because a recommended activity was not
        allowed.
    stalls : int
        Number of cases stopped because the environment stopped responding.
    no_recommendation : int
        Number of agent turns without recommendation, at which the agent
        followed the model instead.
    """

    name: str
    rewards: npt.NDArray[np.float64]
    exceptions: int = 0
    stalls: int = 0
    no_recommendation: int = 0

    @property
    def n(self) -> int:
        """The number of simulated cases."""
        return len(self.rewards)

    @property
    def mean(self) -> float:
        """The average reward."""
        return float(np.mean(self.rewards))

    @property
    def std(self) -> float:
        """The sample standard deviation of the reward."""
        return float(np.std(self.rewards, ddof=1)) if self.n > 1 else 0.0

    @property
    def sem(self) -> float:
        """The standard error of the average reward."""
        return self.std / np.sqrt(self.n) if self.n > 0 else float("nan")

    def to_dict(self) -> dict[str, Any]:
        """Summarize as a JSON-serializable dict."""
        return {
            "policy": self.name,
            "mean": self.mean,
            "std": self.std,
            "sem": self.sem,
            "n": self.n,
            "exceptions": self.exceptions,
            "stalls": self.stalls,
            "no_recommendation": self.no_recommendation,
        }


@dataclass(frozen=True)
class SimReport:
    """Simulation results of several policies on the same cases.

    Parameters
    ----------
    model : str
        The name of the simulated model.
    seed : int
        The seed of the simulation.
    results : dict
        The result of each policy, by name.
    """

    model: str
    seed: int
    results: Mapping[str, SimResult] = field(default_factory=dict)

    def summary(self) -> pd.DataFrame:
        """Return one row per policy with the reward statistics."""
        return pd.DataFrame([r.to_dict() for r in self.results.values()])

    def pairwise(self, alpha: float = pacfg.significance_level) -> pd.DataFrame:
        """Compare the rewards of all pairs of policies.

        See :func:`processaction.evaluation.compare_policies`.
        """
        return compare_policies({n: r.rewards for n, r in self.results.items()}, alpha)

    def to_dict(self) -> dict[str, Any]:
        """Convert to a JSON-serializable dict."""
        return {
            "model": self.model,
            "seed": self.seed,
            "policies": [r.to_dict() for r in self.results.values()],
            "pairwise": self.pairwise().to_dict(orient="records") if len(self.results) > 1 else [],
        }


def check_alphabet(model: ProcessModel, recommender: Recommender) -> None:
    """Check that a policy was trained on activities of the model.

    Raises
    ------
    IncompatibleAlphabet
        If the training alphabet contains activities unknown to the model.
    """
    unknown = sorted(set(recommender.stats.alphabet) - set(model.activities))
    if unknown:
        raise IncompatibleAlphabet(
            f"The policy knows activities that model {model.name} does not: {unknown}"
        )


def simulate_with_policy(
    model: ProcessModel,
    policy: PolicyLike,
    n_traces: int = pacfg.sim_traces,
    seed: int = 0,
    stall_limit: int = pacfg.stall_limit,
    max_events: int = MAX_EVENTS,
    name: Optional[str] = None,
) -> SimResult:
    """Simulate the process with a policy recommending the agent activities.

    Case i of every simulation with the same seed uses the same random
    stream, so that policies are compared on common random numbers.

    Parameters
    ----------
    model : ProcessModel
        The process model.
    policy : Recommender or callable, optional
        Recommends the next agent activity of an ongoing case. If None, the
        agent follows the branch weights of the model and the rewards are
        those of :func:`~processaction.simgen.generate_log`.
    n_traces : int
        Number of simulated cases.
    seed : int
        Seed of the simulation.
    stall_limit : int
        Number of consecutive agent activities after which a case stalls.
    max_events : int
        Maximum number of events of a case.
    name : str, optional
        The name of the result. Defaults to the policy name.

    Raises
    ------
    IncompatibleAlphabet
        If the policy was trained on activities the model does not know.

    Returns
    -------
    SimResult
        The rewards of the simulated cases.
    """
    validate_model(model)
    if n_traces < 1:
        raise ValueError(f"n_traces must be at least 1, got {n_traces}")
    fn: Optional[PolicyFn]
    if isinstance(policy, Recommender):
        check_alphabet(model, policy)
        fn = policy.action_for
        name = name or policy.policy.name
    else:
        fn = policy
        name = name or (LOG_POLICY if policy is None else getattr(policy, "__name__", "policy"))

    times = arrivals(model, n_traces, seed)
    rewards = np.empty(n_traces)
    exceptions = stalls = no_rec = 0
    for i in range(n_traces):
        outcome = simulate_case(
            model, str(i), case_rng(seed, i), float(times[i]), fn, stall_limit, max_events
        )
        rewards[i] = outcome.trace.reward
        exceptions += outcome.status == EXCEPTION
        stalls += outcome.status == STALL
        no_rec += outcome.no_recommendation
    result = SimResult(name, rewards, exceptions, stalls, no_rec)
    logger.info(
        "Simulated %d cases with %s: mean reward %.2f (sem %.2f), %d exceptions, %d stalls",
        n_traces,
        name,
        result.mean,
        result.sem,
        exceptions,
        stalls,
    )
    return result


def simulate_log_policy(
    model: ProcessModel, n_traces: int = pacfg.sim_traces, seed: int = 0
) -> SimResult:
    """Simulate the unguided process, as recorded in a generated log."""
    return simulate_with_policy(model, None, n_traces, seed, name=LOG_POLICY)


def simulate_policies(
    model: ProcessModel,
    policies: Mapping[str, PolicyLike],
    n_traces: int = pacfg.sim_traces,
    seed: int = 0,
    stall_limit: int = pacfg.stall_limit,
    include_log: bool = True,
) -> SimReport:
    """Simulate several policies on the same cases.

    Parameters
    ----------
    model : ProcessModel
        The process model.
    policies : dict
        The policies by name.
    n_traces : int
        Number of simulated cases per policy.
    seed : int
        Seed of the simulation.
    stall_limit : int
        Number of consecutive agent activities after which a case stalls.
    include_log : bool
        Whether to add the unguided process as policy "log".

    Returns
    -------
    SimReport
        The results of all policies.
    """
    results: dict[str, SimResult] = {}
    if include_log:
        results[LOG_POLICY] = simulate_log_policy(model, n_traces, seed)
    for name, policy in policies.items():
        results[name] = simulate_with_policy(
            model, policy, n_traces, seed, stall_limit, name=name
        )
    return SimReport(model.name, seed, results)
