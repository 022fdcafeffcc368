"""Event, trace and event log types.

An event log is a collection of traces. Each trace is an ordered sequence of
events recorded for one case; each event is the execution of an activity by
either the agent (the actor receiving recommendations) or the environment.
"""

import json
import os
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Union, cast

import pandas as pd
from pandera.typing import DataFrame

from processaction import config as pacfg
from processaction.exceptions import EmptyLog, UnknownActivity

from .schema import EventLogSchema

Scalar = Union[int, float, str, bool]

_BASE_COLUMNS = ("case_id", "activity", "timestamp", "owner")


@dataclass(frozen=True)
class Event:
    """The execution of an activity.

    Parameters
    ----------
    activity : str
        The activity label.
    timestamp : pd.Timestamp
        When the activity was executed (UTC).
    owner : str
        Either :attr:`processaction.config.AGENT` or
        :attr:`processaction.config.ENVIRONMENT`.
    payload : dict
        Additional attributes of the event.
    """

    activity: str
    timestamp: pd.Timestamp
    owner: str = pacfg.ENVIRONMENT
    payload: Mapping[str, Scalar] = field(default_factory=dict)

    @property
    def is_agent(self) -> bool:
        """Whether the event was executed by the agent."""
        return self.owner == pacfg.AGENT


@dataclass(frozen=True)
class Trace:
    """An ordered finite sequence of events of a single case.

    A trace without reward models an ongoing execution (a runtime prefix).

    Parameters
    ----------
    case_id : str
        The identifier of the case.
    events : tuple(Event)
        The events, ordered by timestamp.
    reward : float, optional
        The KPI value of the complete trace. Set by
        :func:`processaction.eventlog.enrich`.
    """

    case_id: str
    events: tuple[Event, ...]
    reward: Optional[float] = None

    def __post_init__(self) -> None:
        for prev, nxt in zip(self.events, self.events[1:]):
            if nxt.timestamp < prev.timestamp:
                raise ValueError(f"Events of case {self.case_id} are not ordered by timestamp")

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    @property
    def activities(self) -> tuple[str, ...]:
        """The activity labels of the events."""
        return tuple(e.activity for e in self.events)

    @property
    def attributes(self) -> dict[str, Scalar]:
        """The case attributes, taken from the first event that defines each of them."""
        attrs: dict[str, Scalar] = {}
        for e in self.events:
            for k, v in e.payload.items():
                attrs.setdefault(k, v)
        return attrs

    def prefix(self, k: int) -> "Trace":
        """Return the prefix with the first `k` events.

        Only the complete prefix keeps the reward of the trace.

        Parameters
        ----------
        k : int
            The prefix length.

        Returns
        -------
        Trace
            The prefix.
        """
        if k >= len(self.events):
            return self
        return Trace(self.case_id, self.events[: max(k, 0)], None)


def frequency(trace_prefix: Trace, activity: str, alphabet: Optional[Iterable[str]] = None) -> int:
    """Count the occurrences of an activity in a prefix.

    Parameters
    ----------
    trace_prefix : Trace
        The prefix.
    activity : str
        The activity label.
    alphabet : iterable(str), optional
        When given, `activity` must belong to it.

    Raises
    ------
    UnknownActivity
        If the activity is not in the alphabet.

    Returns
    -------
    int
        The number of occurrences, 0 if the activity is missing.
    """
    if alphabet is not None and activity not in set(alphabet):
        raise UnknownActivity(activity)
    return sum(1 for e in trace_prefix.events if e.activity == activity)


def position(trace_prefix: Trace, activity: str, alphabet: Optional[Iterable[str]] = None) -> int:
    """Return the last (1-based) position at which an activity occurs in a prefix.

    Parameters
    ----------
    trace_prefix : Trace
        The prefix.
    activity : str
        The activity label.
    alphabet : iterable(str), optional
        When given, `activity` must belong to it.

    Raises
    ------
    UnknownActivity
        If the activity is not in the alphabet.

    Returns
    -------
    int
        The position of the last occurrence, 0 if the activity is missing.
    """
    if alphabet is not None and activity not in set(alphabet):
        raise UnknownActivity(activity)
    for i in range(len(trace_prefix.events) - 1, -1, -1):
        if trace_prefix.events[i].activity == activity:
            return i + 1
    return 0


@dataclass(frozen=True)
class EventLog:
    """A collection of traces.

    Events are (re)tagged with their owner on construction: an activity is
    owned by the agent iff it belongs to `agent_activities`.

    Parameters
    ----------
    traces : tuple(Trace)
        The traces of the log.
    agent_activities : frozenset(str)
        The activities controlled by the agent.

    Attributes
    ----------
    alphabet : tuple(str)
        All activity labels occurring in the log plus the declared agent
        activities, sorted lexicographically.

    Raises
    ------
    EmptyLog
        If a trace has no events.
    """

    traces: tuple[Trace, ...]
    agent_activities: frozenset[str] = frozenset()
    alphabet: tuple[str, ...] = field(init=False)

    def __post_init__(self) -> None:
        for t in self.traces:
            if not t.events:
                raise EmptyLog(f"Case {t.case_id} has no events")
        traces = tuple(_tag(t, self.agent_activities) for t in self.traces)
        object.__setattr__(self, "traces", traces)
        object.__setattr__(self, "agent_activities", frozenset(self.agent_activities))
        labels = {e.activity for t in self.traces for e in t.events}
        object.__setattr__(self, "alphabet", tuple(sorted(labels | self.agent_activities)))

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    @property
    def case_ids(self) -> list[str]:
        """The case ids of all traces, in log order."""
        return [t.case_id for t in self.traces]

    @property
    def n_events(self) -> int:
        """The total number of events."""
        return sum(len(t) for t in self.traces)

    def trace(self, case_id: str) -> Trace:
        """Return the trace with the given case id.

        Parameters
        ----------
        case_id : str
            The case id.

        Raises
        ------
        KeyError
            If no trace has this case id.

        Returns
        -------
        Trace
            The trace.
        """
        for t in self.traces:
            if t.case_id == case_id:
                return t
        raise KeyError(case_id)

    def select(self, case_ids: Iterable[str]) -> "EventLog":
        """Return the sub-log with the given cases, in log order.

        Parameters
        ----------
        case_ids : iterable(str)
            The cases to keep.

        Returns
        -------
        EventLog
            The sub-log.
        """
        keep = set(case_ids)
        return EventLog(tuple(t for t in self.traces if t.case_id in keep), self.agent_activities)

    def with_traces(self, traces: Iterable[Trace]) -> "EventLog":
        """Return a log with the same agent activities and other traces."""
        return EventLog(tuple(traces), self.agent_activities)

    @classmethod
    def from_sequences(
        cls,
        sequences: Sequence[Sequence[str]],
        agent_activities: Iterable[str] = (),
        rewards: Optional[Sequence[Optional[float]]] = None,
        payloads: Optional[Sequence[Mapping[str, Scalar]]] = None,
        start: str = "2024-01-01T00:00:00Z",
    ) -> "EventLog":
        """Create a log from activity sequences.

        Events are spaced one hour apart. The payload of a trace is attached
        to each of its events.

        Parameters
        ----------
        sequences : list(list(str))
            The activity labels of each trace.
        agent_activities : iterable(str)
            The activities controlled by the agent.
        rewards : list(float), optional
            The reward of each trace.
        payloads : list(dict), optional
            The case attributes of each trace.
        start : str
            Timestamp of the first event of each trace.

        Returns
        -------
        EventLog
            The event log; case ids are "0", "1", ...
        """
        t0 = pd.Timestamp(start)
        hour = pd.Timedelta(hours=1)
        traces = []
        for i, seq in enumerate(sequences):
            payload = dict(payloads[i]) if payloads is not None else {}
            events = tuple(Event(a, t0 + j * hour, payload=payload) for j, a in enumerate(seq))
            reward = rewards[i] if rewards is not None else None
            traces.append(Trace(str(i), events, reward))
        return cls(tuple(traces), frozenset(agent_activities))

    def to_dataframe(self) -> DataFrame[EventLogSchema]:
        """Convert the log to a flat event table.

        Returns
        -------
        pd.DataFrame
            One row per event with the columns of
            :class:`~processaction.eventlog.schema.EventLogSchema` followed by
            the payload columns.
        """
        rows = [
            {
                "case_id": t.case_id,
                "activity": e.activity,
                "timestamp": e.timestamp,
                "owner": e.owner,
                **e.payload,
            }
            for t in self.traces
            for e in t.events
        ]
        df = pd.DataFrame(rows, columns=None if rows else [*_BASE_COLUMNS])
        return EventLogSchema.validate(df)

    @classmethod
    def from_dataframe(
        cls, events: pd.DataFrame, agent_activities: Iterable[str] = ()
    ) -> "EventLog":
        """Create a log from a flat event table.

        Cases keep the order of their first appearance; events are sorted by
        timestamp within a case, ties keep the table order.

        Parameters
        ----------
        events : pd.DataFrame
            A table with at least the columns ``case_id``, ``activity`` and
            ``timestamp``. All other columns except ``owner`` become payload.
        agent_activities : iterable(str)
            The activities controlled by the agent.

        Raises
        ------
        EmptyLog
            If the table has no rows.

        Returns
        -------
        EventLog
            The event log.
        """
        if len(events) == 0:
            raise EmptyLog("The event table has no rows")
        agents = frozenset(agent_activities)
        df = events.copy()
        df["owner"] = [pacfg.AGENT if a in agents else pacfg.ENVIRONMENT for a in df["activity"]]
        df = EventLogSchema.validate(df)
        payload_cols = [c for c in df.columns if c not in _BASE_COLUMNS]
        traces = []
        for case_id, group in df.groupby("case_id", sort=False):
            group = group.sort_values("timestamp", kind="stable")
            payloads: list[dict[Any, Any]]
            if payload_cols:
                payloads = group[payload_cols].to_dict("records")
            else:
                payloads = [{}] * len(group)
            evs = tuple(
                Event(a, ts, o, {k: v for k, v in p.items() if not _isna(v)})
                for a, ts, o, p in zip(
                    group["activity"], group["timestamp"], group["owner"], payloads
                )
            )
            traces.append(Trace(str(case_id), evs))
        return cls(tuple(traces), agents)


def _isna(v: Any) -> bool:  # noqa: ANN401
    return v is None or (isinstance(v, float) and v != v)


def _tag(trace: Trace, agents: frozenset[str]) -> Trace:
    if all((e.activity in agents) == e.is_agent for e in trace.events):
        return trace
    events = tuple(
        replace(e, owner=pacfg.AGENT if e.activity in agents else pacfg.ENVIRONMENT)
        for e in trace.events
    )
    return Trace(trace.case_id, events, trace.reward)


def write_jsonl(log: EventLog, path: str, overwrite: bool = True) -> None:
    """Write a log to a line-delimited JSON file.

    The first line holds the agent activities, every following line one
    trace.

    Parameters
    ----------
    log : EventLog
        The event log.
    path : str
        Path of the output file.
    overwrite : bool
        Whether to silently overwrite any existing file at the target
        location.

    Raises
    ------
    ValueError
        If the file exists and `overwrite` is False.
    """
    if not overwrite and os.path.isfile(path):
        raise ValueError(f"write_jsonl got overwrite=False, but a file ({path}) exists already.")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"agent_activities": sorted(log.agent_activities)}) + "\n")
        for t in log.traces:
            record = {
                "case_id": t.case_id,
                "reward": t.reward,
                "events": [
                    {
                        "activity": e.activity,
                        "timestamp": e.timestamp.isoformat(),
                        "payload": dict(e.payload),
                    }
                    for e in t.events
                ],
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_jsonl(path: str) -> EventLog:
    """Read a log written by :func:`write_jsonl`.

    Parameters
    ----------
    path : str
        Path of the file.

    Raises
    ------
    EmptyLog
        If the file contains no trace.

    Returns
    -------
    EventLog
        The event log.
    """
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        traces = []
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            events = tuple(
                Event(e["activity"], pd.Timestamp(e["timestamp"]), payload=e["payload"])
                for e in record["events"]
            )
            reward = cast(Optional[float], record["reward"])
            traces.append(Trace(record["case_id"], events, reward))
    if not traces:
        raise EmptyLog(path)
    return EventLog(tuple(traces), frozenset(header["agent_activities"]))
