"""Schema of the evaluation tables."""

import pandera as pa
from pandera.typing import Series


class OptimalTraceSchema(pa.DataFrameModel):
    """Definition of a dataframe with the policy-compliant traces of a test log."""

    policy: Series[str]
    """The name of the policy."""
    n_traces: Series[int] = pa.Field(ge=0)
    """The number of traces in the test log."""
    n_compliant: Series[int] = pa.Field(ge=0)
    """The number of traces that follow the policy."""
    compliant_mean: Series[float] = pa.Field(nullable=True)
    """The average KPI of the compliant traces, missing if there are none."""
    log_mean: Series[float]
    """The average KPI of all traces."""
    no_data: Series[bool]
    """Whether no trace follows the policy."""

    class Config:  # noqa: D106
        strict = True
        coerce = True


class PrefixGainSchema(pa.DataFrameModel):
    """Definition of a dataframe with the gain per prefix length."""

    policy: Series[str]
    """The name of the policy."""
    k: Series[int] = pa.Field(ge=1)
    """The prefix length."""
    n_prefixes: Series[int] = pa.Field(ge=0)
    """The number of test prefixes of this length."""
    n_estimated: Series[int] = pa.Field(ge=0)
    """The number of prefixes with at least one compliant continuation."""
    estimate: Series[float] = pa.Field(nullable=True)
    """The average estimated KPI of following the policy."""
    ground_truth: Series[float]
    """The average KPI of the test traces."""
    gain: Series[float] = pa.Field(nullable=True)
    """The average of estimate minus ground truth over estimated prefixes."""
    no_estimate: Series[bool]
    """Whether no prefix of this length has a compliant continuation."""

    class Config:  # noqa: D106
        strict = True
        coerce = True


class PairwiseSchema(pa.DataFrameModel):
    """Definition of a dataframe comparing the rewards of pairs of policies."""

    policy_a: Series[str]
    """The first policy."""
    policy_b: Series[str]
    """The second policy."""
    mean_a: Series[float]
    """The average reward of the first policy."""
    mean_b: Series[float]
    """The average reward of the second policy."""
    difference: Series[float]
    """mean_a - mean_b."""
    p_value: Series[float] = pa.Field(ge=0, le=1, nullable=True)
    """The p-value of Welch's t-test."""
    significant: Series[bool]
    """Whether the p-value is at most the significance level."""
    degenerate: Series[bool]
    """Whether both samples are constant."""

    class Config:  # noqa: D106
        strict = True
        coerce = True
