"""Fixed-length encoding of trace prefixes.

A prefix σ_k is encoded by the frequency of each activity in the prefix, the
last position at which each activity occurs and the normalized reward of the
prefix, which is non-zero only for complete traces::

    v = (f_a1/f_max, ..., f_an/f_max, p_a1/p_max, ..., p_an/p_max, r)

"""

import hashlib
import warnings
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np
import numpy.typing as npt
import pandas as pd

from processaction.eventlog import EventLog, Trace
from processaction.exceptions import (
    ConstantRewardWarning,
    EmptyLog,
    OutOfRangePrefix,
    UnknownActivity,
)


@dataclass(frozen=True)
class NormalizationStats:
    """Normalization constants of the prefix encoding.

    Parameters
    ----------
    f_max : int
        Highest frequency of any activity in any prefix of the training log.
    p_max : int
        Length of the longest training trace.
    r_min : float
        Lowest trace reward in the training log.
    r_max : float
        Highest trace reward in the training log.
    alphabet : tuple(str)
        The activity labels, in encoding order.
    """

    f_max: int
    p_max: int
    r_min: float
    r_max: float
    alphabet: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.f_max < 1 or self.p_max < 1:
            raise ValueError("f_max and p_max must be positive")
        if self.r_max < self.r_min:
            raise ValueError("r_max must not be smaller than r_min")
        object.__setattr__(self, "alphabet", tuple(self.alphabet))

    @property
    def constant_reward(self) -> bool:
        """Whether all training traces have the same reward."""
        return self.r_max == self.r_min

    @property
    def dim(self) -> int:
        """The dimension of an encoded prefix."""
        return 2 * len(self.alphabet) + 1

    @property
    def index(self) -> dict[str, int]:
        """Map from activity label to its index in the alphabet."""
        return {a: i for i, a in enumerate(self.alphabet)}

    @property
    def feature_names(self) -> list[str]:
        """The names of the components of an encoded prefix."""
        return (
            [f"f_{a}" for a in self.alphabet] + [f"p_{a}" for a in self.alphabet] + ["reward"]
        )

    def to_dict(self) -> dict[str, Union[int, float, list[str]]]:
        """Convert to a JSON-serializable dict."""
        return {
            "f_max": self.f_max,
            "p_max": self.p_max,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "alphabet": list(self.alphabet),
        }

    @classmethod
    def from_dict(cls, d: dict[str, object]) -> "NormalizationStats":
        """Create from a dict produced by :meth:`to_dict`."""
        return cls(
            int(d["f_max"]),  # type: ignore[call-overload]
            int(d["p_max"]),  # type: ignore[call-overload]
            float(d["r_min"]),  # type: ignore[arg-type]
            float(d["r_max"]),  # type: ignore[arg-type]
            tuple(d["alphabet"]),  # type: ignore[call-overload]
        )


def alphabet_hash(alphabet: Union[NormalizationStats, Sequence[str]]) -> str:
    """Compute a short fingerprint of an ordered alphabet.

    Parameters
    ----------
    alphabet : NormalizationStats or list(str)
        The alphabet, or the stats holding it.

    Returns
    -------
    str
        The first 16 hex digits of the SHA-256 digest.
    """
    labels = alphabet.alphabet if isinstance(alphabet, NormalizationStats) else alphabet
    return hashlib.sha256("\x1f".join(labels).encode("utf-8")).hexdigest()[:16]


def fit_stats(log: EventLog) -> NormalizationStats:
    """Compute the normalization constants on a training log.

    Parameters
    ----------
    log : EventLog
        The enriched training log.

    Raises
    ------
    EmptyLog
        If the log has no traces.
    ValueError
        If a trace has no reward.

    Returns
    -------
    NormalizationStats
        The normalization constants. The alphabet is sorted lexicographically.
    """
    if len(log) == 0 or log.n_events == 0:
        raise EmptyLog("Cannot fit normalization constants on an empty log")
    rewards = [t.reward for t in log.traces]
    if any(r is None for r in rewards):
        raise ValueError("All traces must be enriched with a reward")
    f_max = max(max(Counter(t.activities).values(), default=0) for t in log.traces)
    p_max = max(len(t) for t in log.traces)
    r_min, r_max = float(np.min(rewards)), float(np.max(rewards))  # type: ignore[arg-type]
    if r_min == r_max:
        warnings.warn(
            f"All traces have reward {r_min}; complete traces are encoded with reward 1",
            ConstantRewardWarning,
        )
    return NormalizationStats(int(f_max), p_max, r_min, r_max, tuple(sorted(log.alphabet)))


def normalized_reward(trace: Trace, k: int, stats: NormalizationStats) -> float:
    """Compute the normalized reward of a prefix.

    Parameters
    ----------
    trace : Trace
        The trace.
    k : int
        The prefix length, 1 <= k <= len(trace).
    stats : NormalizationStats
        The normalization constants.

    Raises
    ------
    OutOfRangePrefix
        If `k` is not a valid prefix length.

    Returns
    -------
    float
        0 for proper prefixes and for traces without reward, the min-max
        normalized trace reward otherwise.
    """
    if not 0 < k <= len(trace):
        raise OutOfRangePrefix(f"Prefix length {k} for a trace of length {len(trace)}")
    if k < len(trace) or trace.reward is None:
        return 0.0
    if stats.constant_reward:
        return 1.0
    return (trace.reward - stats.r_min) / (stats.r_max - stats.r_min)


def encode_prefixes(trace: Trace, stats: NormalizationStats) -> npt.NDArray[np.float64]:
    """Encode all non-empty prefixes of a trace.

    Parameters
    ----------
    trace : Trace
        The trace.
    stats : NormalizationStats
        The normalization constants.

    Raises
    ------
    UnknownActivity
        If the trace contains an activity outside the alphabet.

    Returns
    -------
    np.ndarray, shape(len(trace), 2n+1)
        Row k-1 holds the encoding of the prefix of length k. Values of
        runtime prefixes are not clipped and can exceed 1.
    """
    index = stats.index
    n, length = len(stats.alphabet), len(trace)
    try:
        idx = np.array([index[a] for a in trace.activities], dtype=np.int64)
    except KeyError as e:
        raise UnknownActivity(e.args[0]) from e
    onehot = np.zeros((length, n), dtype=np.float64)
    onehot[np.arange(length), idx] = 1.0
    freq = np.cumsum(onehot, axis=0)
    pos = np.maximum.accumulate(onehot * np.arange(1, length + 1)[:, None], axis=0)
    reward = np.zeros((length, 1), dtype=np.float64)
    if length:
        reward[-1, 0] = normalized_reward(trace, length, stats)
    return np.hstack([freq / stats.f_max, pos / stats.p_max, reward])


def encode(trace: Trace, k: int, stats: NormalizationStats) -> npt.NDArray[np.float64]:
    """Encode the prefix of length `k` of a trace.

    Parameters
    ----------
    trace : Trace
        The trace.
    k : int
        The prefix length, 1 <= k <= len(trace).
    stats : NormalizationStats
        The normalization constants.

    Raises
    ------
    OutOfRangePrefix
        If `k` is not a valid prefix length.
    UnknownActivity
        If the prefix contains an activity outside the alphabet.

    Returns
    -------
    np.ndarray, shape(2n+1,)
        The encoded prefix.
    """
    if not 0 < k <= len(trace):
        raise OutOfRangePrefix(f"Prefix length {k} for a trace of length {len(trace)}")
    prefix = trace if k == len(trace) else trace.prefix(k)
    return encode_prefixes(prefix, stats)[-1]


def encode_log(log: EventLog, stats: NormalizationStats) -> pd.DataFrame:
    """Encode all prefixes of all traces of a log.

    Parameters
    ----------
    log : EventLog
        The event log.
    stats : NormalizationStats
        The normalization constants.

    Returns
    -------
    pd.DataFrame
        One row per prefix, indexed by (case_id, k), with one column per
        component of the encoding.
    """
    blocks = [encode_prefixes(t, stats) for t in log.traces]
    index = pd.MultiIndex.from_tuples(
        [(t.case_id, k) for t in log.traces for k in range(1, len(t) + 1)], names=["case_id", "k"]
    )
    values = np.vstack(blocks) if blocks else np.zeros((0, stats.dim))
    return pd.DataFrame(values, index=index, columns=stats.feature_names)
