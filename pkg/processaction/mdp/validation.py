"""Consistency checks of a mined MDP."""

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Optional

import pandas as pd

from .base import START, Mdp, State

TOLERANCE = 1e-9


@dataclass(frozen=True)
class Violation:
    """A broken invariant of an MDP.

    Parameters
    ----------
    kind : str
        One of "normalization", "probability", "count", "occurrence",
        "reachability" and "no_start".
    state : State, optional
        The offending state.
    action : str, optional
        The offending action.
    message : str
        A human readable description.
    """

    kind: str
    state: Optional[State]
    action: Optional[str]
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """The findings of :func:`validate`.

    Mixed states (with both agent actions and environment moves) are allowed
    and only reported for information.
    """

    violations: list[Violation] = field(default_factory=list)
    mixed_states: list[State] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """Whether no violation was found."""
        return not self.violations

    def to_frame(self) -> pd.DataFrame:
        """Return the violations as a table."""
        return pd.DataFrame(
            [
                {
                    "kind": v.kind,
                    "state": str(v.state) if v.state is not None else None,
                    "action": v.action,
                    "message": v.message,
                }
                for v in self.violations
            ],
            columns=["kind", "state", "action", "message"],
        )


def validate(mdp: Mdp, n: Optional[dict[tuple[State, str], int]] = None) -> ValidationReport:
    """Check the invariants of an MDP.

    Parameters
    ----------
    mdp : Mdp
        The MDP.
    n : dict, optional
        Occurrence counts n(s, a) to check against the edge counts, e.g.
        loaded from an export. Defaults to the counts of the MDP.

    Returns
    -------
    ValidationReport
        The violations, each naming the state and action involved.
    """
    violations = []
    totals: dict[tuple[State, str], float] = defaultdict(float)
    for e in mdp.edges:
        totals[(e.source, e.action)] += e.probability
        if e.count <= 0:
            violations.append(
                Violation("count", e.source, e.action, f"Edge to {e.target} has count {e.count}")
            )
        if not 0 < e.probability <= 1:
            violations.append(
                Violation(
                    "probability",
                    e.source,
                    e.action,
                    f"Edge to {e.target} has probability {e.probability}",
                )
            )
    for (s, a), total in sorted(totals.items()):
        if abs(total - 1.0) > TOLERANCE:
            violations.append(
                Violation("normalization", s, a, f"Probabilities of ({s}, {a}) sum to {total!r}")
            )
    if n is not None:
        for (s, a), expected in sorted(mdp.occurrence.items()):
            if n.get((s, a)) != expected:
                msg = f"n({s}, {a}) = {n.get((s, a))}, edges sum to {expected}"
                violations.append(Violation("occurrence", s, a, msg))
    if mdp.edges and START not in mdp.outgoing:
        violations.append(Violation("no_start", START, None, "START has no outgoing edge"))
    reached = {START}
    queue = deque([START])
    while queue:
        s = queue.popleft()
        for es in mdp.outgoing.get(s, {}).values():
            for e in es:
                if e.target not in reached:
                    reached.add(e.target)
                    queue.append(e.target)
    for s in mdp.states:
        if s not in reached:
            msg = f"{s} is not reachable from START"
            violations.append(Violation("reachability", s, None, msg))
    return ValidationReport(violations, mdp.mixed_states)
