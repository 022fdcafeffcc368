"""Import and export of MDPs."""

import json
import os

import pandas as pd
from pandera.typing import DataFrame

from processaction import config as pacfg

from .base import Edge, Mdp, State
from .schema import MdpEdgeSchema, MdpStateSchema


def edges_frame(mdp: Mdp) -> DataFrame[MdpEdgeSchema]:
    """Return the edges of an MDP as a table.

    Parameters
    ----------
    mdp : Mdp
        The MDP.

    Returns
    -------
    pd.DataFrame
        One row per edge.
    """
    rows = [
        {
            "source_activity": e.source.last_activity,
            "source_cluster": e.source.cluster,
            "action": e.action,
            "owner": pacfg.AGENT if mdp.is_agent(e.action) else pacfg.ENVIRONMENT,
            "target_activity": e.target.last_activity,
            "target_cluster": e.target.cluster,
            "count": e.count,
            "probability": e.probability,
            "reward": e.reward,
            "reward_samples": e.reward_samples,
        }
        for e in mdp.edges
    ]
    columns = list(MdpEdgeSchema.to_schema().columns)
    return MdpEdgeSchema.validate(pd.DataFrame(rows, columns=columns))


def states_frame(mdp: Mdp) -> DataFrame[MdpStateSchema]:
    """Return the states of an MDP as a table.

    Parameters
    ----------
    mdp : Mdp
        The MDP.

    Returns
    -------
    pd.DataFrame
        One row per state.
    """
    rows = [
        {
            "activity": s.last_activity,
            "cluster": s.cluster,
            "terminal": s not in mdp.outgoing,
            "end_count": mdp.end_count(s),
            "decision": bool(mdp.agent_choices(s)),
        }
        for s in mdp.states
    ]
    columns = list(MdpStateSchema.to_schema().columns)
    return MdpStateSchema.validate(pd.DataFrame(rows, columns=columns))


def to_dict(mdp: Mdp) -> dict[str, object]:
    """Convert an MDP to a JSON-serializable dict."""
    return {
        "gamma": mdp.gamma,
        "alphabet_hash": mdp.alphabet_hash,
        "agent_actions": sorted(mdp.agent_actions),
        "metadata": dict(mdp.metadata),
        "end_counts": [
            {"activity": s.last_activity, "cluster": s.cluster, "count": c}
            for s, c in sorted(mdp.end_counts.items())
        ],
        "edges": edges_frame(mdp).to_dict(orient="records"),
    }


def from_dict(d: dict[str, object]) -> Mdp:
    """Create an MDP from a dict produced by :func:`to_dict`."""
    edges = tuple(
        Edge(
            source=State(r["source_activity"], int(r["source_cluster"])),
            action=r["action"],
            target=State(r["target_activity"], int(r["target_cluster"])),
            count=int(r["count"]),
            probability=float(r["probability"]),
            reward=float(r["reward"]),
            reward_samples=int(r["reward_samples"]),
        )
        for r in d["edges"]  # type: ignore[attr-defined]
    )
    end_counts = {
        State(r["activity"], int(r["cluster"])): int(r["count"])
        for r in d["end_counts"]  # type: ignore[attr-defined]
    }
    return Mdp(
        edges=edges,
        end_counts=end_counts,
        agent_actions=frozenset(d["agent_actions"]),  # type: ignore[arg-type]
        gamma=float(d["gamma"]),  # type: ignore[arg-type]
        alphabet_hash=d["alphabet_hash"],  # type: ignore[arg-type]
        metadata=d["metadata"],  # type: ignore[arg-type]
    )


def save_mdp(mdp: Mdp, filepath: str, overwrite: bool = True) -> None:
    """Save an MDP in JSON format.

    Parameters
    ----------
    mdp : Mdp
        The MDP.
    filepath : str
        Path to the file to save the MDP to.
    overwrite : bool
        Whether to silently overwrite any existing file at the target
        location.

    Raises
    ------
    ValueError
        If the specified output file already exists and "overwrite" is set
        to False.
    """
    if not overwrite and os.path.isfile(filepath):
        raise ValueError(
            'save_mdp got overwrite="False", but a file '
            f"({filepath}) exists already. No data was saved."
        )
    with open(filepath, "w") as f:
        json.dump(to_dict(mdp), f, sort_keys=True)


def load_mdp(path: str) -> Mdp:
    """Load an MDP saved with :func:`save_mdp`.

    Parameters
    ----------
    path : str
        Path of the JSON file.

    Returns
    -------
    Mdp
        The MDP.
    """
    with open(path) as f:
        return from_dict(json.load(f))


def to_dot(mdp: Mdp, name: str = "mdp") -> str:
    """Render an MDP in the Graphviz DOT language.

    Agent actions are drawn as solid edges, environment moves as dashed
    edges. Terminal states are drawn as double circles.

    Parameters
    ----------
    mdp : Mdp
        The MDP.
    name : str
        The name of the graph.

    Returns
    -------
    str
        The DOT source.
    """
    lines = [f'digraph "{name}" {{']
    for s in mdp.states:
        shape = "doublecircle" if s not in mdp.outgoing else "ellipse"
        label = str(s) if mdp.end_count(s) == 0 else f"{s}\\nend={mdp.end_count(s)}"
        lines.append(f'  "{s}" [shape={shape}, label="{label}"];')
    for e in mdp.edges:
        style = "solid" if mdp.is_agent(e.action) else "dashed"
        lines.append(
            f'  "{e.source}" -> "{e.target}" '
            f'[label="{e.action}\\np={e.probability:.3f}\\nr={e.reward:.2f}", style={style}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
