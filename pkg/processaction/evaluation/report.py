"""Evaluation reports and their export."""

import json
import os
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Optional

import pandas as pd
from pandera.typing import DataFrame

from processaction.eventlog import EventLog
from processaction.recommender import Recommender

from .compliance import (
    OptimalTraceResult,
    PrefixGainResult,
    optimal_trace_analysis,
    prefix_gain_analysis,
)
from .schema import OptimalTraceSchema, PairwiseSchema, PrefixGainSchema
from .significance import difference_matrix


@dataclass(frozen=True)
class EvalReport:
    """Test-log analyses of several policies.

    Parameters
    ----------
    optimal_traces : dict
        The compliant-trace analysis of each policy, by name.
    prefix_gains : dict
        The prefix-gain analysis of each policy, by name.
    pairwise : pd.DataFrame, optional
        Pairwise comparison of simulated rewards, see
        :func:`~processaction.evaluation.compare_policies`.
    """

    optimal_traces: Mapping[str, OptimalTraceResult] = field(default_factory=dict)
    prefix_gains: Mapping[str, PrefixGainResult] = field(default_factory=dict)
    pairwise: Optional[pd.DataFrame] = None

    def optimal_trace_table(self) -> DataFrame[OptimalTraceSchema]:
        """Return one row per policy with the compliant-trace statistics."""
        rows = [r.to_dict() for r in self.optimal_traces.values()]
        df = pd.DataFrame(rows, columns=list(OptimalTraceSchema.to_schema().columns))
        df["compliant_mean"] = df["compliant_mean"].astype(float)
        return OptimalTraceSchema.validate(df)

    def prefix_gain_table(self) -> DataFrame[PrefixGainSchema]:
        """Return the gain per policy and prefix length."""
        frames = [r.summary() for r in self.prefix_gains.values()]
        if not frames:
            return PrefixGainSchema.validate(
                pd.DataFrame(columns=list(PrefixGainSchema.to_schema().columns))
            )
        return PrefixGainSchema.validate(pd.concat(frames, ignore_index=True))

    def to_dict(self) -> dict[str, Any]:
        """Convert to a JSON-serializable dict."""
        gains = self.prefix_gain_table()
        gains = gains.astype(object).where(gains.notna(), None)
        return {
            "optimal_traces": [r.to_dict() for r in self.optimal_traces.values()],
            "prefix_gain": gains.to_dict(orient="records"),
            "pairwise": []
            if self.pairwise is None
            else PairwiseSchema.validate(self.pairwise).to_dict(orient="records"),
        }


def evaluate_log(test_log: EventLog, recommenders: Mapping[str, Recommender]) -> EvalReport:
    """Run both test-log analyses for several policies.

    Parameters
    ----------
    test_log : EventLog
        The enriched test log.
    recommenders : dict
        The trained artifacts of each policy, by name.

    Returns
    -------
    EvalReport
        The report, without pairwise comparison.
    """
    return EvalReport(
        optimal_traces={
            n: optimal_trace_analysis(test_log, r, n) for n, r in recommenders.items()
        },
        prefix_gains={n: prefix_gain_analysis(test_log, r, n) for n, r in recommenders.items()},
    )


def _check_target(path: str, overwrite: bool) -> None:
    if not overwrite and os.path.isfile(path):
        raise ValueError(
            f'write_report got overwrite="False", but a file ({path}) exists already. '
            "No data was saved."
        )


def write_json(report: Mapping[str, Any], path: str, overwrite: bool = True) -> None:
    """Write a report as indented JSON with sorted keys.

    Parameters
    ----------
    report : dict
        A JSON-serializable report.
    path : str
        The output file.
    overwrite : bool
        Whether to overwrite an existing file.

    Raises
    ------
    ValueError
        If the file exists and `overwrite` is False.
    """
    _check_target(path, overwrite)
    with open(path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")


def write_tables(report: EvalReport, directory: str, overwrite: bool = True) -> list[str]:
    """Write the tables of an evaluation report as CSV files.

    Writes ``optimal_traces.csv``, ``prefix_gain.csv``, ``prefix_gain_flat.csv``
    and, if the report has a pairwise comparison, ``pairwise.csv`` and
    ``pairwise_matrix.csv``.

    Parameters
    ----------
    report : EvalReport
        The report.
    directory : str
        The output directory; created if needed.
    overwrite : bool
        Whether to overwrite existing files.

    Returns
    -------
    list(str)
        The paths written.
    """
    os.makedirs(directory, exist_ok=True)
    tables = {
        "optimal_traces.csv": report.optimal_trace_table(),
        "prefix_gain.csv": report.prefix_gain_table(),
        "prefix_gain_flat.csv": pd.concat(
            [r.flat().assign(policy=n) for n, r in report.prefix_gains.items()]
            or [pd.DataFrame(columns=["prefix_length", "gain", "count", "policy"])],
            ignore_index=True,
        ),
    }
    if report.pairwise is not None:
        tables["pairwise.csv"] = report.pairwise
        tables["pairwise_matrix.csv"] = difference_matrix(report.pairwise)
    written = []
    for fname, df in tables.items():
        path = os.path.join(directory, fname)
        _check_target(path, overwrite)
        df.to_csv(path, index=fname == "pairwise_matrix.csv")
        written.append(path)
    return written
