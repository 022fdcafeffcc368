"""Implements the Markov decision process mined from an event log."""

__all__ = [
    "State",
    "Edge",
    "Mdp",
    "START",
    "build",
    "state_of",
    "replay_states",
    "validate",
    "ValidationReport",
    "Violation",
    "MdpEdgeSchema",
    "MdpStateSchema",
    "edges_frame",
    "states_frame",
    "save_mdp",
    "load_mdp",
    "to_dot",
]

from .base import START, Edge, Mdp, State
from .builder import build, replay_states, state_of
from .io import edges_frame, load_mdp, save_mdp, states_frame, to_dot
from .schema import MdpEdgeSchema, MdpStateSchema
from .validation import ValidationReport, Violation, validate
