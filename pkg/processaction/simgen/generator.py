"""Walks a process model to produce complete cases."""

import logging
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import pandas as pd

from processaction import config as pacfg
from processaction.eventlog import Event, EventLog, Trace

from .model import END, Branch, Gateway, ProcessModel, validate_model

logger = logging.getLogger(__name__)

#: Signature of a policy in the loop: maps the ongoing case to an activity.
PolicyFn = Callable[[Trace], Optional[str]]

EPOCH = pd.Timestamp("2024-01-01T00:00:00Z")
MAX_EVENTS: int = 1000

OK = "ok"
EXCEPTION = "exception"
STALL = "stall"


@dataclass(frozen=True)
class CaseOutcome:
    """The result of simulating one case.

    Parameters
    ----------
    trace : Trace
        The executed events, with the reward accumulated until the case
        stopped.
    status : {'ok', 'exception', 'stall'}
        How the case stopped.
    no_recommendation : int
        Number of agent turns at which the policy gave no recommendation.
    """

    trace: Trace
    status: str
    no_recommendation: int = 0


def _timestamp(hours: float) -> pd.Timestamp:
    return EPOCH + pd.Timedelta(milliseconds=round(hours * 3_600_000))


def _draw(rng: np.random.Generator, weights: Sequence[float]) -> int:
    cum = np.cumsum(weights)
    i = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return min(i, len(weights) - 1)


def _weighted_choice(rng: np.random.Generator, branches: Sequence[Branch]) -> Branch:
    return branches[_draw(rng, [b.weight for b in branches])]


def simulate_case(
    model: ProcessModel,
    case_id: str,
    rng: np.random.Generator,
    arrival_hours: float = 0.0,
    policy: Optional[PolicyFn] = None,
    stall_limit: int = pacfg.stall_limit,
    max_events: int = MAX_EVENTS,
) -> CaseOutcome:
    """Simulate a single case of a process model.

    Environment gateways draw their branch from the model probabilities. At
    an agent gateway the policy is asked for the next activity given the
    events so far; without policy, or when the policy has no
    recommendation, the agent follows the branch weights of the model.
    Because an environment gateway follows every agent activity that
    expects a response, the environment always acts before the agent
    decides again.

    A case stops with an exception when the recommended activity is not
    allowed at the current gateway, and stalls after `stall_limit`
    consecutive agent activities without an environment event or once it
    has `max_events` events. In both cases the reward is the one
    accumulated so far.

    Parameters
    ----------
    model : ProcessModel
        The process model.
    case_id : str
        The identifier of the case.
    rng : np.random.Generator
        The random generator of the case.
    arrival_hours : float
        Arrival time of the case, in hours after the epoch.
    policy : callable, optional
        Maps the ongoing case to the next agent activity.
    stall_limit : int
        Maximum number of consecutive agent activities.
    max_events : int
        Maximum number of events of a case.

    Returns
    -------
    CaseOutcome
        The simulated case.
    """
    amount = model.sample_amount(rng)
    counts: Counter[str] = Counter()
    events: list[Event] = []
    clock = arrival_hours
    hours = 0.0
    streak = 0
    no_rec = 0
    status = OK
    gateway = model.start

    while gateway != END:
        if len(events) >= max_events:
            status = STALL
            break
        g: Gateway = model.gateways[gateway]
        if g.owner == pacfg.ENVIRONMENT:
            probs = model.probabilities(g, model.feature_values(counts, amount))
            branch = g.branches[_draw(rng, probs)]
        elif streak >= stall_limit:
            status = STALL
            break
        else:
            allowed = [b for b in g.branches if b.allowed(counts)]
            wanted = None
            if policy is not None:
                prefix = Trace(case_id, tuple(events))
                wanted = policy(prefix)
                if wanted is None:
                    no_rec += 1
            if wanted is None:
                if not allowed:
                    status = EXCEPTION
                    break
                branch = _weighted_choice(rng, allowed)
            else:
                match = [b for b in allowed if b.activity == wanted]
                if not match:
                    logger.debug("Case %s: '%s' is not allowed at '%s'", case_id, wanted, gateway)
                    status = EXCEPTION
                    break
                branch = match[0]

        if branch.activity is not None:
            spec = model.activities[branch.activity]
            duration = spec.sample_duration(rng)
            events.append(
                Event(
                    branch.activity,
                    _timestamp(clock),
                    spec.owner,
                    {"amount": amount, "duration": duration},
                )
            )
            counts[branch.activity] += 1
            if spec.owner == pacfg.AGENT:
                hours += duration
                streak += 1
            else:
                streak = 0
            clock += duration + float(rng.exponential(model.wait_hours))
        gateway = branch.next

    earned = model.interest_rate * amount if counts[model.accept_activity] else 0.0
    reward = earned - model.labor_cost * hours
    return CaseOutcome(Trace(case_id, tuple(events), reward), status, no_rec)


def arrivals(model: ProcessModel, n_traces: int, seed: int) -> np.ndarray:
    """Draw the arrival times (hours) of `n_traces` cases."""
    gaps = np.random.default_rng(seed).exponential(model.interarrival_hours, n_traces)
    return np.cumsum(gaps)


def case_rng(seed: int, index: int) -> np.random.Generator:
    """Return the random generator of case `index`.

    Each case has its own stream, so that case i sees the same amount and
    the same environment draws under every policy as long as the policies
    act alike.
    """
    return np.random.default_rng([seed, index])


def generate_log(model: ProcessModel, n_traces: Optional[int] = None, seed: int = 0) -> EventLog:
    """Generate a synthetic event log by walking the process model.

    Every event carries the requested amount of the case and the duration
    of the activity (hours) as payload; every trace carries its reward.

    Parameters
    ----------
    model : ProcessModel
        The process model.
    n_traces : int, optional
        Number of cases. Defaults to the size configured in the model.
    seed : int
        Seed of the random generators.

    Raises
    ------
    InvalidModel
        If the model is inconsistent.
    ValueError
        If `n_traces` is smaller than 1.

    Returns
    -------
    EventLog
        The generated log, with the agent activities of the model.
    """
    validate_model(model)
    n = model.n_traces if n_traces is None else n_traces
    if n < 1:
        raise ValueError(f"n_traces must be at least 1, got {n}")
    times = arrivals(model, n, seed)
    traces = []
    for i in range(n):
        outcome = simulate_case(model, str(i), case_rng(seed, i), float(times[i]))
        traces.append(outcome.trace)
    log = EventLog(tuple(traces), model.agent_activities)
    accepted = sum(model.accept_activity in t.activities for t in traces)
    logger.info(
        "Generated %d cases (%d events) from model %s; %.1f%% accepted",
        n,
        log.n_events,
        model.name,
        100.0 * accepted / n,
    )
    return log


def _closure(model: ProcessModel, gateways: set[str]) -> set[str]:
    """Add the gateways reachable through silent branches."""
    todo = list(gateways)
    out = set(gateways)
    while todo:
        g = todo.pop()
        if g == END:
            continue
        for b in model.gateways[g].branches:
            if b.activity is None and b.next not in out:
                out.add(b.next)
                todo.append(b.next)
    return out


def replay_trace(model: ProcessModel, trace: Trace) -> list[str]:
    """Replay a trace against the control flow of a model.

    Parameters
    ----------
    model : ProcessModel
        The process model.
    trace : Trace
        A complete trace.

    Returns
    -------
    list(str)
        The violations found; empty if the model can produce the trace.
    """
    violations = []
    counts: Counter[str] = Counter()
    current = _closure(model, {model.start})
    for i, e in enumerate(trace.events):
        spec = model.activities.get(e.activity)
        if spec is None:
            violations.append(f"Event {i}: unknown activity '{e.activity}'")
            return violations
        if spec.owner != e.owner:
            violations.append(f"Event {i}: '{e.activity}' is owned by the {spec.owner}")
        nxt = {
            b.next
            for g in current
            if g != END
            for b in model.gateways[g].branches
            if b.activity == e.activity and b.allowed(counts)
        }
        if not nxt:
            violations.append(f"Event {i}: '{e.activity}' is not allowed after {sorted(current)}")
            return violations
        counts[e.activity] += 1
        current = _closure(model, nxt)
    if END not in current:
        violations.append(f"The case does not end after '{trace.activities[-1:]}'")
    return violations
