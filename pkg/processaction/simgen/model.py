"""Stochastic process models used to generate synthetic event logs.

A model is a graph of gateways. Each gateway is owned by the agent or by the
environment and has a number of branches; a branch executes an activity (or
nothing, for a silent branch) and continues in another gateway or ends the
case. Environment gateways draw a branch at random; their probabilities are
either fixed or given by a multinomial logit over the case features (the
silent default branch has logit 0)::

    P(branch i) = exp(z_i) / (1 + sum_j exp(z_j))
    z_i = intercept + sum_f coef_f * feature_f

The features are the number of times selected activities were executed and
``log_amount = ln(amount / median amount)``. Agent gateways are decided by
the recommender, or by the branch weights when the log is generated.
"""

import json
import math
import os
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from typing import Any, Optional

import numpy as np
import numpy.typing as npt

from processaction import config as pacfg
from processaction.exceptions import InvalidModel

END = "end"
PRESET_DIR = os.path.join(os.path.dirname(__file__), "presets")


@dataclass(frozen=True)
class ActivitySpec:
    """An activity of the model.

    Parameters
    ----------
    owner : str
        Either "agent" or "environment".
    duration_median : float
        Median duration in hours; durations are log-normal. 0 means the
        activity takes no working time.
    duration_sigma : float
        Shape of the log-normal duration.
    """

    owner: str
    duration_median: float = 0.0
    duration_sigma: float = 0.0

    def sample_duration(self, rng: np.random.Generator) -> float:
        """Draw the duration of one execution, in hours."""
        if self.duration_median <= 0:
            return 0.0
        if self.duration_sigma <= 0:
            return self.duration_median
        return float(rng.lognormal(math.log(self.duration_median), self.duration_sigma))


@dataclass(frozen=True)
class Branch:
    """An outgoing branch of a gateway.

    Parameters
    ----------
    activity : str, optional
        The activity executed; None for a silent branch.
    next : str
        The next gateway, or "end".
    probability : float, optional
        Fixed probability (environment gateways).
    logit : dict, optional
        Intercept and feature coefficients (environment gateways).
    weight : float
        Relative frequency with which the agent picks the branch when the log
        is generated (agent gateways).
    max_count : int, optional
        The branch is not allowed once its activity was executed this many
        times.
    """

    activity: Optional[str]
    next: str
    probability: Optional[float] = None
    logit: Optional[Mapping[str, float]] = None
    weight: float = 1.0
    max_count: Optional[int] = None

    def allowed(self, counts: Mapping[str, int]) -> bool:
        """Whether the branch can be taken given the activity counts of the case."""
        if self.max_count is None or self.activity is None:
            return True
        return counts.get(self.activity, 0) < self.max_count


@dataclass(frozen=True)
class Gateway:
    """A branching point of the model.

    Parameters
    ----------
    name : str
        The identifier of the gateway.
    owner : str
        Either "agent" or "environment".
    branches : tuple(Branch)
        The outgoing branches.
    single : bool
        Whether the gateway is a single decision point (visited at most once
        per case) rather than a multiple decision point inside a loop.
    """

    name: str
    owner: str
    branches: tuple[Branch, ...]
    single: bool = True


@dataclass(frozen=True)
class ProcessModel:
    """A stochastic process model.

    Parameters
    ----------
    name : str
        The name of the model.
    activities : dict
        The activities, with owner and duration distribution.
    gateways : dict
        The gateways by name.
    start : str
        The first gateway.
    amount_median : float
        Median of the log-normal requested amount.
    amount_sigma : float
        Shape of the log-normal requested amount.
    amount_round : int
        The amount is rounded to a multiple of this value.
    preaccept_gateway : str
        The gateway deciding pre-acceptance. Its first branch is taken with
        `preaccept_probability`, its second with the complement.
    preaccept_probability : float
        Probability that an application is pre-accepted.
    features : dict
        Map from feature name to the activity whose executions it counts.
    interarrival_hours : float
        Mean time between two new cases.
    wait_hours : float
        Mean waiting time between two consecutive events of a case.
    accept_activity : str
        The activity that marks an accepted offer.
    interest_rate : float
        Share of the amount earned on acceptance.
    labor_cost : float
        Cost per hour of agent working time.
    n_traces : int
        Default number of traces to generate.
    """

    name: str
    activities: Mapping[str, ActivitySpec]
    gateways: Mapping[str, Gateway]
    start: str
    amount_median: float = 15000.0
    amount_sigma: float = 0.4
    amount_round: int = 100
    preaccept_gateway: Optional[str] = None
    preaccept_probability: float = 0.5
    features: Mapping[str, str] = field(default_factory=dict)
    interarrival_hours: float = 1.0
    wait_hours: float = 4.0
    accept_activity: str = "accept_offer"
    interest_rate: float = pacfg.interest_rate
    labor_cost: float = pacfg.labor_cost
    n_traces: int = 2000

    @property
    def agent_activities(self) -> frozenset[str]:
        """The activities owned by the agent."""
        return frozenset(a for a, s in self.activities.items() if s.owner == pacfg.AGENT)

    def with_preaccept_probability(self, p: float) -> "ProcessModel":
        """Return a copy with another pre-acceptance probability."""
        model = replace(self, preaccept_probability=p)
        validate_model(model)
        return model

    def sample_amount(self, rng: np.random.Generator) -> float:
        """Draw the requested amount of a case."""
        amount = rng.lognormal(math.log(self.amount_median), self.amount_sigma)
        return float(max(self.amount_round, round(amount / self.amount_round) * self.amount_round))

    def feature_values(self, counts: Mapping[str, int], amount: float) -> dict[str, float]:
        """Compute the case features that condition the gateways."""
        values = {f: float(counts.get(a, 0)) for f, a in self.features.items()}
        values["log_amount"] = math.log(amount / self.amount_median)
        return values

    def probabilities(
        self, gateway: Gateway, features: Mapping[str, float]
    ) -> npt.NDArray[np.float64]:
        """Compute the branch probabilities of an environment gateway.

        Parameters
        ----------
        gateway : Gateway
            An environment gateway.
        features : dict
            The current case features.

        Returns
        -------
        np.ndarray
            The probability of each branch.
        """
        if gateway.name == self.preaccept_gateway:
            p = self.preaccept_probability
            return np.array([p, 1.0 - p])
        if all(b.logit is None for b in gateway.branches):
            return np.array([b.probability for b in gateway.branches], dtype=np.float64)
        z = np.array(
            [
                0.0
                if b.logit is None
                else b.logit.get("intercept", 0.0)
                + sum(c * features.get(f, 0.0) for f, c in b.logit.items() if f != "intercept")
                for b in gateway.branches
            ]
        )
        w = np.exp(z - z.max())
        return w / w.sum()

    def to_dict(self) -> dict[str, Any]:
        """Convert to a JSON-serializable dict, the format of the preset files."""
        return {
            "name": self.name,
            "start": self.start,
            "n_traces": self.n_traces,
            "amount": {
                "median": self.amount_median,
                "sigma": self.amount_sigma,
                "round": self.amount_round,
            },
            "preaccept_gateway": self.preaccept_gateway,
            "preaccept_probability": self.preaccept_probability,
            "features": dict(self.features),
            "interarrival_hours": self.interarrival_hours,
            "wait_hours": self.wait_hours,
            "kpi": {
                "accept_activity": self.accept_activity,
                "interest_rate": self.interest_rate,
                "labor_cost": self.labor_cost,
            },
            "activities": {
                a: {
                    "owner": s.owner,
                    "duration": {"median": s.duration_median, "sigma": s.duration_sigma},
                }
                for a, s in self.activities.items()
            },
            "gateways": [
                {
                    "name": g.name,
                    "owner": g.owner,
                    "single": g.single,
                    "branches": [
                        {
                            k: v
                            for k, v in {
                                "activity": b.activity,
                                "next": b.next,
                                "probability": b.probability,
                                "logit": dict(b.logit) if b.logit is not None else None,
                                "weight": b.weight,
                                "max_count": b.max_count,
                            }.items()
                            if v is not None or k == "activity"
                        }
                        for b in g.branches
                    ],
                }
                for g in self.gateways.values()
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ProcessModel":
        """Create a model from a dict in the format of the preset files.

        Raises
        ------
        InvalidModel
            If a required entry is missing or the model is inconsistent.
        """
        try:
            activities = {
                a: ActivitySpec(
                    owner=s["owner"],
                    duration_median=float(s.get("duration", {}).get("median", 0.0)),
                    duration_sigma=float(s.get("duration", {}).get("sigma", 0.0)),
                )
                for a, s in d["activities"].items()
            }
            gateways = {
                g["name"]: Gateway(
                    name=g["name"],
                    owner=g["owner"],
                    single=bool(g.get("single", True)),
                    branches=tuple(
                        Branch(
                            activity=b.get("activity"),
                            next=b["next"],
                            probability=b.get("probability"),
                            logit=b.get("logit"),
                            weight=float(b.get("weight", 1.0)),
                            max_count=b.get("max_count"),
                        )
                        for b in g["branches"]
                    ),
                )
                for g in d["gateways"]
            }
            amount = d.get("amount", {})
            kpi = d.get("kpi", {})
            model = cls(
                name=d["name"],
                activities=activities,
                gateways=gateways,
                start=d["start"],
                amount_median=float(amount.get("median", 15000.0)),
                amount_sigma=float(amount.get("sigma", 0.4)),
                amount_round=int(amount.get("round", 100)),
                preaccept_gateway=d.get("preaccept_gateway"),
                preaccept_probability=float(d.get("preaccept_probability", 0.5)),
                features=dict(d.get("features", {})),
                interarrival_hours=float(d.get("interarrival_hours", 1.0)),
                wait_hours=float(d.get("wait_hours", 4.0)),
                accept_activity=kpi.get("accept_activity", "accept_offer"),
                interest_rate=float(kpi.get("interest_rate", pacfg.interest_rate)),
                labor_cost=float(kpi.get("labor_cost", pacfg.labor_cost)),
                n_traces=int(d.get("n_traces", 2000)),
            )
        except (KeyError, TypeError, AttributeError) as e:
            raise InvalidModel(f"Malformed process model: {e!r}") from e
        validate_model(model)
        return model


def _reachable_end(model: ProcessModel) -> set[str]:
    """Return the gateways from which the end can be reached."""
    good = {END}
    changed = True
    while changed:
        changed = False
        for g in model.gateways.values():
            if g.name not in good and any(b.next in good for b in g.branches):
                good.add(g.name)
                changed = True
    return good


def validate_model(model: ProcessModel) -> None:  # noqa: C901
    """Check the consistency of a process model.

    Parameters
    ----------
    model : ProcessModel
        The model.

    Raises
    ------
    InvalidModel
        If an activity, owner or gateway is undefined, a probability table
        does not sum to 1, an agent gateway has no positive weight, or the
        end cannot be reached from every gateway.
    """
    if model.start not in model.gateways:
        raise InvalidModel(f"Start gateway '{model.start}' is not defined")
    if not 0 <= model.preaccept_probability <= 1:
        raise InvalidModel(f"preaccept_probability {model.preaccept_probability} not in [0, 1]")
    for a, spec in model.activities.items():
        if spec.owner not in pacfg.owners:
            raise InvalidModel(f"Activity '{a}' has unknown owner '{spec.owner}'")
    for f, a in model.features.items():
        if a not in model.activities:
            raise InvalidModel(f"Feature '{f}' counts unknown activity '{a}'")
    for g in model.gateways.values():
        if g.owner not in pacfg.owners:
            raise InvalidModel(f"Gateway '{g.name}' has unknown owner '{g.owner}'")
        if not g.branches:
            raise InvalidModel(f"Gateway '{g.name}' has no branches")
        for b in g.branches:
            if b.next != END and b.next not in model.gateways:
                raise InvalidModel(f"Gateway '{g.name}' continues in unknown '{b.next}'")
            if b.activity is None:
                if g.owner == pacfg.AGENT:
                    raise InvalidModel(f"Agent gateway '{g.name}' has a silent branch")
                continue
            if b.activity not in model.activities:
                raise InvalidModel(f"Gateway '{g.name}' uses unknown activity '{b.activity}'")
            if model.activities[b.activity].owner != g.owner:
                raise InvalidModel(
                    f"Activity '{b.activity}' is not owned by the owner of gateway '{g.name}'"
                )
        if g.owner == pacfg.AGENT:
            if sum(b.weight for b in g.branches) <= 0:
                raise InvalidModel(f"Agent gateway '{g.name}' has no positive weight")
        elif g.name == model.preaccept_gateway:
            if len(g.branches) != 2:
                raise InvalidModel(f"Pre-acceptance gateway '{g.name}' needs exactly 2 branches")
        elif all(b.logit is None for b in g.branches):
            probs = [b.probability for b in g.branches]
            if any(p is None or p < 0 for p in probs):
                raise InvalidModel(f"Gateway '{g.name}' has a missing or negative probability")
            total = sum(probs)  # type: ignore[arg-type]
            if abs(total - 1.0) > 1e-9:
                raise InvalidModel(f"Probabilities of gateway '{g.name}' sum to {total}")
        elif sum(b.logit is None for b in g.branches) != 1:
            raise InvalidModel(f"Logit gateway '{g.name}' needs exactly one default branch")
    if model.preaccept_gateway is not None and model.preaccept_gateway not in model.gateways:
        raise InvalidModel(f"Pre-acceptance gateway '{model.preaccept_gateway}' is not defined")
    stuck = set(model.gateways) - _reachable_end(model)
    if stuck:
        raise InvalidModel(f"The end cannot be reached from {sorted(stuck)}")


def load_model(path: str) -> ProcessModel:
    """Load a process model from a JSON file.

    Parameters
    ----------
    path : str
        Path of the JSON file.

    Raises
    ------
    InvalidModel
        If the model is inconsistent.

    Returns
    -------
    ProcessModel
        The model.
    """
    with open(path) as f:
        return ProcessModel.from_dict(json.load(f))


def available_presets() -> list[str]:
    """Return the names of the shipped models."""
    return sorted(f[:-5] for f in os.listdir(PRESET_DIR) if f.endswith(".json"))


def load_preset(name: str) -> ProcessModel:
    """Load one of the shipped models.

    Parameters
    ----------
    name : str
        The name of the preset, see :func:`available_presets`.

    Raises
    ------
    ValueError
        If there is no such preset.

    Returns
    -------
    ProcessModel
        The model.
    """
    if name not in available_presets():
        raise ValueError(f"Unknown preset '{name}', choose from {available_presets()}")
    return load_model(os.path.join(PRESET_DIR, f"{name}.json"))
