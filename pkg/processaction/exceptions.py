"""Exceptions and warnings raised by processaction."""


class ProcessActionError(Exception):
    """Base class of all errors raised by processaction."""


class MissingColumn(ProcessActionError, KeyError):
    """Exception raised when a required column is missing in the input data."""


class UnparseableTimestamp(ProcessActionError, ValueError):
    """Exception raised when a timestamp does not match the declared format."""


class EmptyLog(ProcessActionError, ValueError):
    """Exception raised when an event log without traces is used."""


class MissingAttribute(ProcessActionError, KeyError):
    """Exception raised when a trace lacks an attribute needed by the KPI."""


class DegeneratePartition(ProcessActionError, ValueError):
    """Exception raised when a split would leave one of both parts empty."""


class UnknownActivity(ProcessActionError, KeyError):
    """Exception raised for an activity label outside the known alphabet."""


class OutOfRangePrefix(ProcessActionError, IndexError):
    """Exception raised when a prefix length exceeds the trace length."""


class KTooLarge(ProcessActionError, ValueError):
    """Exception raised when more clusters are requested than distinct vectors exist."""


class DimensionMismatch(ProcessActionError, ValueError):
    """Exception raised when a vector does not match the centroid dimension."""


class SingleCluster(ProcessActionError, ValueError):
    """Exception raised when a silhouette is requested with one populated cluster."""


class EncodingMismatch(ProcessActionError, ValueError):
    """Exception raised when a k-means model was fit on another encoding."""


class NoAgentDecisions(ProcessActionError, ValueError):
    """Exception raised when an MDP has no state in which the agent can act."""


class NoActionsAvailable(ProcessActionError, ValueError):
    """Exception raised when a state offers no agent action."""


class UnknownState(ProcessActionError, KeyError):
    """Exception raised when a prefix maps to a state that is not in the MDP."""


class NotADecisionPoint(ProcessActionError):
    """Exception raised when only the environment can act in a state.

    The caller should wait for the environment to act.
    """


class InvalidModel(ProcessActionError, ValueError):
    """Exception raised when a process model is inconsistent."""


class IncompatibleAlphabet(ProcessActionError, ValueError):
    """Exception raised when a policy was trained on another activity alphabet."""


class InsufficientSamples(ProcessActionError, ValueError):
    """Exception raised when a statistical test gets too few samples."""


class ConfigError(ProcessActionError, ValueError):
    """Exception raised when a pipeline configuration is invalid."""


class MissingArtifact(ProcessActionError, FileNotFoundError):
    """Exception raised when a pipeline stage needs an artifact that is absent or stale."""


class AlphabetMismatch(ProcessActionError, ValueError):
    """Exception raised when artifacts were built from different activity alphabets."""


class ConstantRewardWarning(UserWarning):
    """Warning raised when all traces have the same reward."""


class DegenerateRangeWarning(UserWarning):
    """Warning raised when all state-action pairs occur equally often."""
