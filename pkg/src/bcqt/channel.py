"""Preparation of the eight-qubit channel and the controller's encoding.

The base circuit puts ``b0``, ``a1`` and ``a2`` in superposition and copies
them out with CNOTs (``b0 -> b1``, ``b0 -> a0``, ``a1 -> b2``, ``a2 -> b3``).
The controller then chooses a 3-bit code over ``(a0, b2, b3)`` and XORs the
selected qubits into ``c``, which yields one of eight channel variants.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from bcqt.errors import InvalidArgumentError
from bcqt.qcore import CHANNEL_REGISTER, Register, StateVector, apply_cnot, apply_single, basis_state

CODE_QUBITS = ("a0", "b2", "b3")


@dataclass(frozen=True, order=True)
class ChannelCode:
    """Controller's choice of which of ``(a0, b2, b3)`` feed qubit ``c``."""

    bits: tuple[int, int, int]

    def __post_init__(self) -> None:
        bits = tuple(int(b) for b in self.bits)
        if len(bits) != 3 or any(b not in (0, 1) for b in bits):
            raise InvalidArgumentError(f"a channel code is three bits, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def parse(cls, code: Union[str, "ChannelCode", tuple[int, int, int]]) -> "ChannelCode":
        if isinstance(code, ChannelCode):
            return code
        if isinstance(code, str):
            if len(code) != 3 or set(code) - {"0", "1"}:
                raise InvalidArgumentError(f"channel code must look like '001', got {code!r}")
            return cls(tuple(int(ch) for ch in code))
        return cls(tuple(code))

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    @property
    def popcount(self) -> int:
        return sum(self.bits)

    @property
    def controls(self) -> tuple[str, ...]:
        return tuple(q for q, b in zip(CODE_QUBITS, self.bits) if b)


def all_codes() -> Iterator[ChannelCode]:
    for value in range(8):
        yield ChannelCode.parse(format(value, "03b"))


# Kets of each channel variant on (a0 b0 b1 a1 a2 c b2 b3), copied from the
# reference table.  Kept independent of the circuit so tests can check it.
CHANNEL_KETS: dict[str, tuple[str, ...]] = {
    "000": ("00000000", "00001001", "00010010", "00011011", "11100000", "11101001", "11110010", "11111011"),
    "001": ("00000000", "00001101", "00010010", "00011111", "11100000", "11101101", "11110010", "11111111"),
    "010": ("00000000", "00001001", "00010110", "00011111", "11100000", "11101001", "11110110", "11111111"),
    "011": ("00000000", "00001101", "00010110", "00011011", "11100000", "11101101", "11110110", "11111011"),
    "100": ("00000000", "00001001", "00010010", "00011011", "11100100", "11101101", "11110110", "11111111"),
    "101": ("00000000", "00001101", "00010010", "00011111", "11100100", "11101001", "11110110", "11111011"),
    "110": ("00000000", "00001001", "00010110", "00011111", "11100100", "11101101", "11110010", "11111011"),
    "111": ("00000000", "00001101", "00010110", "00011011", "11100100", "11101001", "11110010", "11111111"),
}


@dataclass(frozen=True)
class GateCount:
    hadamard: int
    cnot: int


def _check_register(register: Register) -> None:
    if register != CHANNEL_REGISTER:
        raise InvalidArgumentError(
            f"channel register must be {CHANNEL_REGISTER.labels}, got {register.labels}"
        )


def prepare_base(register: Register = CHANNEL_REGISTER) -> StateVector:
    _check_register(register)
    state = basis_state(register, "0" * len(register))
    for q in ("b0", "a1", "a2"):
        state = apply_single(state, q, "H")
    state = apply_cnot(state, "b0", "b1")
    for control, target in (("b0", "a0"), ("a1", "b2"), ("a2", "b3")):
        state = apply_cnot(state, control, target)
    return state


def apply_controller_encoding(state: StateVector, code: Union[ChannelCode, str]) -> StateVector:
    for control in ChannelCode.parse(code).controls:
        state = apply_cnot(state, control, "c")
    return state


def channel_table(code: Union[ChannelCode, str]) -> tuple[str, ...]:
    return CHANNEL_KETS[str(ChannelCode.parse(code))]


def build_channel(code: Union[ChannelCode, str]) -> StateVector:
    return apply_controller_encoding(prepare_base(), code)


def gate_count(code: Union[ChannelCode, str]) -> GateCount:
    """Gates used by :func:`build_channel`: three H and four base CNOTs plus one per set bit."""
    return GateCount(hadamard=3, cnot=4 + ChannelCode.parse(code).popcount)


def check_against_table(
    state: StateVector, kets: tuple[str, ...], tol: float = 1e-12
) -> list[str]:
    """Return human-readable mismatches between ``state`` and a uniform ket list."""
    problems = []
    expected = 1.0 / np.sqrt(len(kets))
    target = np.zeros_like(state.amplitudes)
    for ket in kets:
        target[int(ket, 2)] = expected
    diff = np.abs(state.amplitudes - target)
    for i in np.flatnonzero(diff > tol):
        ket = format(int(i), f"0{state.num_qubits}b")
        problems.append(f"|{ket}>: got {state.amplitudes[i]:.6g}, expected {target[i].real:.6g}")
    return problems
