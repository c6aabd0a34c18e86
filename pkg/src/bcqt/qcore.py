"""Dense state-vector engine used by the protocol simulation.

States are stored as flat complex arrays of length ``2**n``.  The leftmost
label of a :class:`Register` is the most significant bit of a basis index,
so the ket ``|a0 b0 b1 ...>`` written left to right is read directly as a
binary number.

Every operation is a pure function: arrays are never mutated in place and
every result owns a fresh, read-only buffer.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from bcqt.errors import DisentanglementError, InvalidArgumentError

PURE_TOL = 1e-12
PIPELINE_TOL = 1e-9

_SQRT1_2 = 1.0 / np.sqrt(2.0)

GATES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2,
}

# Single-qubit kets addressable by name; "+"/"-" are the X eigenstates.
KETS: dict[str, np.ndarray] = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) * _SQRT1_2,
    "-": np.array([1, -1], dtype=complex) * _SQRT1_2,
}


class Basis(enum.Enum):
    """Single-qubit measurement basis. Outcome 0 is |0> or |+>."""

    Z = "Z"
    X = "X"

    def ket(self, outcome: int) -> np.ndarray:
        if outcome not in (0, 1):
            raise InvalidArgumentError(f"outcome must be 0 or 1, got {outcome!r}")
        if self is Basis.Z:
            return KETS[str(outcome)]
        return KETS["+" if outcome == 0 else "-"]


@dataclass(frozen=True)
class Register:
    """Ordered qubit labels; position ``i`` is bit ``n - 1 - i`` of an index."""

    labels: tuple[str, ...]
    position: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise InvalidArgumentError(f"duplicate qubit labels in {labels}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "position", {q: i for i, q in enumerate(labels)})

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, q: object) -> bool:
        return q in self.position

    def __add__(self, other: "Register") -> "Register":
        return Register(self.labels + other.labels)

    def index(self, q: str) -> int:
        try:
            return self.position[q]
        except KeyError:
            raise InvalidArgumentError(f"qubit {q!r} not in register {self.labels}") from None

    def without(self, q: str) -> "Register":
        self.index(q)
        return Register(tuple(label for label in self.labels if label != q))


CHANNEL_REGISTER = Register(("a0", "b0", "b1", "a1", "a2", "c", "b2", "b3"))
PAYLOAD_REGISTER = Register(("A0", "A1", "B0", "B1"))
PROTOCOL_REGISTER = CHANNEL_REGISTER + PAYLOAD_REGISTER
OUTPUT_REGISTER = Register(("b0", "b1", "a1", "a2"))


class StateVector:
    """Amplitudes over a register. Possibly unnormalized (a measurement branch)."""

    __slots__ = ("register", "amplitudes")

    def __init__(self, register: Register, amplitudes: Iterable[complex]) -> None:
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** len(register):
            raise InvalidArgumentError(
                f"{amps.size} amplitudes do not fit a {len(register)}-qubit register"
            )
        amps.flags.writeable = False
        self.register = register
        self.amplitudes = amps

    def __repr__(self) -> str:
        return f"StateVector({self.register.labels}, norm_sq={self.norm_sq():.6g})"

    @property
    def num_qubits(self) -> int:
        return len(self.register)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> "StateVector":
        norm = np.sqrt(self.norm_sq())
        if norm == 0.0:
            raise InvalidArgumentError("cannot normalize the zero vector")
        return StateVector(self.register, self.amplitudes / norm)

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(self.register + other.register, np.kron(self.amplitudes, other.amplitudes))

    def amplitude(self, bits: str) -> complex:
        return complex(self.amplitudes[_bits_to_index(self.register, bits)])

    def support(self, tol: float = PURE_TOL) -> dict[str, complex]:
        """Nonzero amplitudes keyed by their bitstring."""
        n = self.num_qubits
        return {
            format(i, f"0{n}b"): complex(a)
            for i, a in enumerate(self.amplitudes)
            if abs(a) > tol
        }

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def allclose(self, other: "StateVector", atol: float = PURE_TOL) -> bool:
        return self.register == other.register and bool(
            np.allclose(self.amplitudes, other.amplitudes, rtol=0.0, atol=atol)
        )


@dataclass(frozen=True)
class PureEnsemble:
    """Mixed state as ``sum_i v_i v_i^dagger`` over unnormalized components."""

    components: tuple[StateVector, ...]

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise InvalidArgumentError("an ensemble needs at least one component")
        reg = comps[0].register
        if any(v.register != reg for v in comps):
            raise InvalidArgumentError("ensemble components must share one register")
        object.__setattr__(self, "components", comps)

    @property
    def register(self) -> Register:
        return self.components[0].register

    def weight(self) -> float:
        return sum(v.norm_sq() for v in self.components)

    def density_matrix(self) -> np.ndarray:
        rho = np.zeros((2 ** len(self.register),) * 2, dtype=complex)
        for v in self.components:
            rho += np.outer(v.amplitudes, v.amplitudes.conj())
        return rho


def _bits_to_index(register: Register, bits: str) -> int:
    if len(bits) != len(register) or set(bits) - {"0", "1"}:
        raise InvalidArgumentError(
            f"expected a {len(register)}-character bitstring, got {bits!r}"
        )
    return int(bits, 2)


def basis_state(register: Register, bits: str) -> StateVector:
    amps = np.zeros(2 ** len(register), dtype=complex)
    amps[_bits_to_index(register, bits)] = 1.0
    return StateVector(register, amps)


def apply_matrix(state: StateVector, q: str, matrix: np.ndarray) -> StateVector:
    """Apply an arbitrary 2x2 operator (unitary or not) to qubit ``q``."""
    k = state.register.index(q)
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (2, 2):
        raise InvalidArgumentError(f"expected a 2x2 matrix, got shape {matrix.shape}")
    out = np.tensordot(matrix, state.as_tensor(), axes=([1], [k]))
    return StateVector(state.register, np.moveaxis(out, 0, k))


def apply_single(state: StateVector, q: str, gate: str) -> StateVector:
    try:
        matrix = GATES[gate]
    except KeyError:
        raise InvalidArgumentError(f"unknown gate {gate!r}; expected one of {sorted(GATES)}") from None
    if gate == "I":
        state.register.index(q)
        return state
    return apply_matrix(state, q, matrix)


def apply_pauli_string(state: StateVector, qubits: Sequence[str], paulis: str) -> StateVector:
    """Apply e.g. ``"XXIZ"`` to ``qubits`` position by position."""
    if len(qubits) != len(paulis):
        raise InvalidArgumentError("one Pauli letter per qubit is required")
    for q, p in zip(qubits, paulis):
        state = apply_single(state, q, p)
    return state


def apply_cnot(state: StateVector, control: str, target: str) -> StateVector:
    if control == target:
        raise InvalidArgumentError("control and target must differ")
    c = state.register.index(control)
    t = state.register.index(target)
    out = state.as_tensor().copy()
    sel = [slice(None)] * state.num_qubits
    sel[c] = 1
    sel = tuple(sel)
    # indexing drops the control axis, shifting later axes down by one
    out[sel] = np.flip(out[sel], axis=t - 1 if t > c else t)
    return StateVector(state.register, out)


def project(
    state: StateVector, q: str, basis: Basis, outcome: int
) -> tuple[StateVector, float]:
    """Project qubit ``q`` onto a basis eigenstate without renormalizing.

    Returns:
        The projected state (the measured qubit stays in the register,
        collapsed onto the outcome eigenstate) and the outcome probability
        relative to the input's squared norm.
    """
    e = basis.ket(outcome)
    projected = apply_matrix(state, q, np.outer(e, e.conj()))
    total = state.norm_sq()
    prob = projected.norm_sq() / total if total > 0.0 else 0.0
    return projected, prob


def discard(
    state: StateVector, q: str, asserted: Union[str, int], tol: float = PIPELINE_TOL
) -> StateVector:
    """Remove qubit ``q``, which must be unentangled and equal to ``asserted``.

    ``asserted`` is one of ``0``, ``1``, ``"0"``, ``"1"``, ``"+"``, ``"-"``.

    Raises:
        DisentanglementError: if the state is not ``asserted`` (x) rest to
            within ``tol`` in every amplitude.
    """
    try:
        e = KETS[str(asserted)]
    except KeyError:
        raise InvalidArgumentError(f"cannot assert qubit state {asserted!r}") from None
    k = state.register.index(q)
    tensor = state.as_tensor()
    rest = np.tensordot(e.conj(), tensor, axes=([0], [k]))
    rebuilt = np.moveaxis(np.multiply.outer(e, rest), 0, k)
    residual = float(np.max(np.abs(tensor - rebuilt), initial=0.0))
    if residual > tol:
        raise DisentanglementError(
            f"qubit {q!r} is not in state |{asserted}> (x) rest: residual {residual:.3g}"
        )
    return StateVector(state.register.without(q), rest)


def reduced_density_matrix(state: StateVector, keep: Sequence[str]) -> np.ndarray:
    """Partial trace of ``|state><state|`` onto ``keep`` (in the order given)."""
    idx = [state.register.index(q) for q in keep]
    rest = [i for i in range(state.num_qubits) if i not in idx]
    psi = np.transpose(state.as_tensor(), idx + rest).reshape(2 ** len(idx), -1)
    return psi @ psi.conj().T


def fidelity_pure(target: StateVector, rho: PureEnsemble) -> float:
    """``<target| rho |target>`` with no normalization of ``rho``."""
    if target.register != rho.register:
        raise InvalidArgumentError(
            f"register mismatch: {target.register.labels} vs {rho.register.labels}"
        )
    return float(sum(abs(np.vdot(target.amplitudes, v.amplitudes)) ** 2 for v in rho.components))
