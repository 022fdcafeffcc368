"""Statistical comparison of the rewards of policies."""

from collections.abc import Mapping, Sequence
from typing import Union

import numpy as np
import numpy.typing as npt
import pandas as pd
from pandera.typing import DataFrame
from scipy import stats

from processaction import config as pacfg
from processaction.exceptions import InsufficientSamples

from .schema import PairwiseSchema

Samples = Union[Sequence[float], npt.NDArray[np.float64]]


def welch_test(a: Samples, b: Samples) -> tuple[float, float, bool]:
    """Compare the means of two samples with Welch's unequal-variance t-test.

    If both samples are constant the test is undefined; the p-value is then
    1 if the means are equal and 0 otherwise.

    Parameters
    ----------
    a : array-like
        The first sample.
    b : array-like
        The second sample.

    Raises
    ------
    InsufficientSamples
        If a sample has fewer than 2 values.

    Returns
    -------
    tuple(float, float, bool)
        The difference of the means, the two-sided p-value and whether the
        degenerate branch was taken.
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if len(x) < 2 or len(y) < 2:
        raise InsufficientSamples(f"Need at least 2 samples per policy, got {len(x)} and {len(y)}")
    diff = float(x.mean() - y.mean())
    if np.ptp(x) == 0 and np.ptp(y) == 0:
        return diff, 1.0 if diff == 0 else 0.0, True
    p = float(stats.ttest_ind(x, y, equal_var=False).pvalue)
    return diff, p, False


def compare_policies(
    samples: Mapping[str, Samples], alpha: float = pacfg.significance_level
) -> DataFrame[PairwiseSchema]:
    """Test the difference of the average reward of every pair of policies.

    Parameters
    ----------
    samples : dict
        The reward samples of each policy, by name.
    alpha : float
        The significance level.

    Raises
    ------
    InsufficientSamples
        If a policy has fewer than 2 samples.

    Returns
    -------
    pd.DataFrame
        One row per ordered pair of distinct policies. The difference is
        antisymmetric and the p-value symmetric in the pair.
    """
    for name, s in samples.items():
        if len(s) < 2:
            raise InsufficientSamples(f"Policy {name} has {len(s)} samples, need at least 2")
    names = list(samples)
    rows = []
    for a in names:
        for b in names:
            if a == b:
                continue
            diff, p, degenerate = welch_test(samples[a], samples[b])
            rows.append(
                {
                    "policy_a": a,
                    "policy_b": b,
                    "mean_a": float(np.mean(samples[a])),
                    "mean_b": float(np.mean(samples[b])),
                    "difference": diff,
                    "p_value": p,
                    "significant": bool(p <= alpha),
                    "degenerate": degenerate,
                }
            )
    columns = list(PairwiseSchema.to_schema().columns)
    return PairwiseSchema.validate(pd.DataFrame(rows, columns=columns))


def difference_matrix(pairwise: pd.DataFrame) -> pd.DataFrame:
    """Pivot a pairwise table to a matrix of mean differences.

    Cells hold the difference with its p-value, formatted as in a
    publication table; the diagonal is empty.

    Parameters
    ----------
    pairwise : pd.DataFrame
        The output of :func:`compare_policies`.

    Returns
    -------
    pd.DataFrame
        Rows are the first and columns the second policy of each pair.
    """
    cells = pairwise.assign(
        cell=[
            f"{d:+.2f} (p={p:.3f}){'*' if s else ''}"
            for d, p, s in zip(
                pairwise["difference"], pairwise["p_value"], pairwise["significant"]
            )
        ]
    )
    order = list(dict.fromkeys([*pairwise["policy_a"], *pairwise["policy_b"]]))
    matrix = cells.pivot(index="policy_a", columns="policy_b", values="cell")
    return matrix.reindex(index=order, columns=order).fillna("")
