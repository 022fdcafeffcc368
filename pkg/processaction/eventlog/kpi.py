"""Trace-level KPI used as the reward signal."""

from dataclasses import dataclass
from typing import Optional

import pandas as pd

from processaction import config as pacfg
from processaction.exceptions import MissingAttribute

from .base import EventLog, Scalar, Trace

KPI_KINDS = ("loan_profit", "custom")


@dataclass(frozen=True)
class KpiSpec:
    """Definition of the KPI of a trace.

    The ``loan_profit`` KPI is the interest earned on an accepted loan offer
    minus the cost of the working time spent on the case::

        reward = interest_rate * amount * accepted - labor_cost * work_hours

    The ``custom`` KPI evaluates `expression` with :func:`pandas.eval` over
    the case attributes, extended with ``work_hours``, ``n_events`` and
    ``accepted``.

    Parameters
    ----------
    kind : {'loan_profit', 'custom'}
        The kind of KPI.
    interest_rate : float
        Share of the amount earned when the offer is accepted.
    labor_cost : float
        Cost per hour of working time.
    expression : str, optional
        The expression of a custom KPI.
    accept_activity : str
        The activity that marks an accepted offer.
    amount_attribute : str
        The case attribute with the requested amount.
    duration_attribute : str
        The event attribute with the duration (in hours) of the activity.
    idle_threshold : float
        Upper bound (hours) on the working time derived from the gap between
        two events.
    count_environment_time : bool
        Whether the working time of environment activities is charged too.
    """

    kind: str = "loan_profit"
    interest_rate: float = pacfg.interest_rate
    labor_cost: float = pacfg.labor_cost
    expression: Optional[str] = None
    accept_activity: str = "accept_offer"
    amount_attribute: str = "amount"
    duration_attribute: str = "duration"
    idle_threshold: float = pacfg.idle_threshold
    count_environment_time: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KPI_KINDS:
            raise ValueError(f"Unknown KPI kind '{self.kind}', expected one of {KPI_KINDS}")
        if self.interest_rate < 0:
            raise ValueError("interest_rate must be non-negative")
        if self.labor_cost < 0:
            raise ValueError("labor_cost must be non-negative")
        if self.kind == "custom" and not self.expression:
            raise ValueError("A custom KPI needs an expression")


def work_hours(trace: Trace, kpi: KpiSpec = KpiSpec()) -> float:
    """Compute the working time charged to a trace.

    The duration of an event is read from its duration attribute. If absent,
    it is the time until the next event of the case, capped by the idle
    threshold; the last event then takes no time.

    Parameters
    ----------
    trace : Trace
        The trace.
    kpi : KpiSpec
        Defines which events are charged and where durations are found.

    Returns
    -------
    float
        The working time in hours.
    """
    total = 0.0
    events = trace.events
    for i, e in enumerate(events):
        if not (e.is_agent or kpi.count_environment_time):
            continue
        if kpi.duration_attribute in e.payload:
            total += float(e.payload[kpi.duration_attribute])
        elif i + 1 < len(events):
            gap = (events[i + 1].timestamp - e.timestamp) / pd.Timedelta(hours=1)
            total += min(gap, kpi.idle_threshold)
    return total


def trace_reward(trace: Trace, kpi: KpiSpec = KpiSpec()) -> float:
    """Compute the KPI of a complete trace.

    Parameters
    ----------
    trace : Trace
        The trace, with ownership tags set.
    kpi : KpiSpec
        The KPI definition.

    Raises
    ------
    MissingAttribute
        If an attribute needed by the KPI is not defined for the trace.

    Returns
    -------
    float
        The reward of the trace.
    """
    hours = work_hours(trace, kpi)
    accepted = kpi.accept_activity in trace.activities
    attrs = trace.attributes
    if kpi.kind == "custom":
        scope: dict[str, Scalar] = {
            **attrs,
            "work_hours": hours,
            "n_events": len(trace),
            "accepted": accepted,
        }
        try:
            return float(pd.eval(kpi.expression, engine="python", local_dict=scope))
        except pd.errors.UndefinedVariableError as e:
            raise MissingAttribute(f"Trace {trace.case_id}: {e}") from e
    earned = 0.0
    if accepted:
        if kpi.amount_attribute not in attrs:
            raise MissingAttribute(
                f"Trace {trace.case_id} has no attribute '{kpi.amount_attribute}'"
            )
        earned = kpi.interest_rate * float(attrs[kpi.amount_attribute])
    return earned - kpi.labor_cost * hours


def enrich(log: EventLog, kpi: KpiSpec = KpiSpec()) -> EventLog:
    """Set the reward of every trace of a log.

    Parameters
    ----------
    log : EventLog
        The event log. Ownership tags follow the agent activities of the log.
    kpi : KpiSpec
        The KPI definition.

    Returns
    -------
    EventLog
        A copy of the log in which every trace carries its KPI as reward.
    """
    return log.with_traces(
        Trace(t.case_id, t.events, trace_reward(t, kpi)) for t in log.traces
    )
