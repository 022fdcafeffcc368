"""Schema of a flat event log table.

Each event log is exchanged as a dataframe with one row per event. Besides
the columns of this schema, the table can contain any number of payload
columns (e.g., the requested loan amount or the duration of the activity).
"""

import pandas as pd
import pandera as pa
from pandera.typing import Series

from processaction import config as pacfg


class EventLogSchema(pa.DataFrameModel):
    """Definition of a dataframe containing the events of an event log."""

    case_id: Series[str] = pa.Field()
    """The identifier of the case (trace) the event belongs to."""
    activity: Series[str] = pa.Field(str_length={"min_value": 1})
    """The activity label of the event."""
    timestamp: Series[pd.DatetimeTZDtype] = pa.Field(dtype_kwargs={"unit": "ns", "tz": "UTC"})
    """The instant at which the event happened."""
    owner: Series[str] = pa.Field(isin=pacfg.owners)
    """Whether the activity is performed by the agent or by the environment."""

    class Config:  # noqa: D106
        strict = False
        coerce = True
