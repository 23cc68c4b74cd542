"""Trivium under permanent stuck-at-0 faults: simulation, case detection and key recovery."""

from .core import Iv, Key, Keystream, State, initialize, keystream, load_input_state, state_update
from .faults import CaseLabel, FaultMask, classify_case

__all__ = [
    "CaseLabel",
    "FaultMask",
    "Iv",
    "Key",
    "Keystream",
    "State",
    "classify_case",
    "initialize",
    "keystream",
    "load_input_state",
    "state_update",
]
