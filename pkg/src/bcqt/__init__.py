"""Simulation and noise analysis of bidirectional controlled teleportation
over an eight-qubit entangled channel."""

from bcqt.channel import ChannelCode, build_channel, channel_table
from bcqt.noise import (
    NoiseKind,
    NoiseSpec,
    compare,
    f_closed,
    fidelity_sim,
    find_crossing,
    run_noisy_protocol,
)
from bcqt.protocol import InputStates, OutcomeRecord, enumerate_branches, run_protocol

__all__ = [
    "ChannelCode",
    "InputStates",
    "NoiseKind",
    "NoiseSpec",
    "OutcomeRecord",
    "build_channel",
    "compare",
    "channel_table",
    "enumerate_branches",
    "f_closed",
    "fidelity_sim",
    "find_crossing",
    "run_noisy_protocol",
    "run_protocol",
]

__version__ = "0.1.0"
