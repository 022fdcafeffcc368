"""CSV reader and writer for event logs."""

import logging
import os
from collections.abc import Iterable
from dataclasses import dataclass

import pandas as pd

from processaction.exceptions import EmptyLog, MissingColumn, UnparseableTimestamp

from .base import EventLog

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CsvSchema:
    """Mapping from the columns of a CSV file to the fields of an event.

    Parameters
    ----------
    case_id : str
        Name of the column with the case identifiers.
    activity : str
        Name of the column with the activity labels.
    timestamp : str
        Name of the column with the timestamps.
    timestamp_format : str
        A :func:`pandas.to_datetime` format string. Default is "ISO8601".
    """

    case_id: str = "case_id"
    activity: str = "activity"
    timestamp: str = "timestamp"
    timestamp_format: str = "ISO8601"

    @property
    def columns(self) -> dict[str, str]:
        """Map from source column to event field."""
        return {self.case_id: "case_id", self.activity: "activity", self.timestamp: "timestamp"}


def parse_csv(
    path: str, schema: CsvSchema = CsvSchema(), agent_activities: Iterable[str] = ()
) -> EventLog:
    """Parse an event log from a CSV file.

    Events are grouped by case id. Within a case, events are sorted by
    timestamp; events with the same timestamp keep the file order. All columns
    that are not mapped by the schema become event payload.

    Parameters
    ----------
    path : str
        Path of the CSV file. The file must have a header row.
    schema : CsvSchema
        The column mapping.
    agent_activities : iterable(str)
        The activities controlled by the agent.

    Raises
    ------
    MissingColumn
        If a mapped column is not in the file.
    UnparseableTimestamp
        If a timestamp does not match the declared format.
    EmptyLog
        If the file contains no events.

    Returns
    -------
    EventLog
        The parsed event log.
    """
    df = pd.read_csv(path, dtype={schema.case_id: str, schema.activity: str})
    for col in schema.columns:
        if col not in df.columns:
            raise MissingColumn(f"Column '{col}' not found in {path}")
    if len(df) == 0:
        raise EmptyLog(f"No events in {path}")
    df = df.rename(columns=schema.columns)
    ts = pd.to_datetime(df["timestamp"], format=schema.timestamp_format, utc=True, errors="coerce")
    bad = ts.isna()
    if bad.any():
        row = int(bad.to_numpy().nonzero()[0][0])
        raise UnparseableTimestamp(
            f"Row {row + 1}: '{df['timestamp'].iloc[row]}' does not match format "
            f"'{schema.timestamp_format}'"
        )
    df["timestamp"] = ts.dt.floor("ms")
    df = df.drop(columns=[c for c in ("owner",) if c in df.columns])
    log = EventLog.from_dataframe(df, agent_activities)
    logger.info("Parsed %d traces with %d events from %s", len(log), log.n_events, path)
    return log


def write_csv(log: EventLog, path: str, overwrite: bool = True) -> None:
    """Write a log to a CSV file that can be read back with :func:`parse_csv`.

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
        raise ValueError(f"write_csv got overwrite=False, but a file ({path}) exists already.")
    df = log.to_dataframe().drop(columns="owner")
    df["timestamp"] = df["timestamp"].map(lambda t: t.isoformat(timespec="milliseconds"))
    df.to_csv(path, index=False)
