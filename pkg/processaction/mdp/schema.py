"""Schema of the tabular view of an MDP."""

import pandera as pa
from pandera.typing import Series

from processaction import config as pacfg


class MdpEdgeSchema(pa.DataFrameModel):
    """Definition of a dataframe containing the edges of an MDP."""

    source_activity: Series[str]
    """The last activity of the source state."""
    source_cluster: Series[int] = pa.Field(ge=pacfg.START_CLUSTER)
    """The cluster of the source state."""
    action: Series[str]
    """The activity executed."""
    owner: Series[str] = pa.Field(isin=pacfg.owners)
    """Whether the action is chosen by the agent or by the environment."""
    target_activity: Series[str]
    """The last activity of the target state."""
    target_cluster: Series[int] = pa.Field(ge=pacfg.START_CLUSTER)
    """The cluster of the target state."""
    count: Series[int] = pa.Field(gt=0)
    """The number of replays of the edge."""
    probability: Series[float] = pa.Field(gt=0, le=1)
    """The transition probability."""
    reward: Series[float]
    """The mean reward of the edge."""
    reward_samples: Series[int] = pa.Field(ge=0)
    """The number of rewards averaged."""

    class Config:  # noqa: D106
        strict = True
        coerce = True


class MdpStateSchema(pa.DataFrameModel):
    """Definition of a dataframe containing the states of an MDP."""

    activity: Series[str]
    """The last activity of the state."""
    cluster: Series[int] = pa.Field(ge=pacfg.START_CLUSTER)
    """The cluster of the prefix before the last activity."""
    terminal: Series[bool]
    """Whether the state has no outgoing edges."""
    end_count: Series[int] = pa.Field(ge=0)
    """The number of traces that ended in the state."""
    decision: Series[bool]
    """Whether the agent can act in the state."""

    class Config:  # noqa: D106
        strict = True
        coerce = True
