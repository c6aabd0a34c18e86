"""Bidirectional controlled teleportation over the eight-qubit channel.

Alice sends the two-qubit entangled state ``alpha0|00> + alpha1|11>`` held on
``(A0, A1)`` to Bob, who ends up with it on ``(b0, b1)``.  Bob sends an
arbitrary two-qubit state on ``(B0, B1)`` to Alice, who ends up with it on
``(a1, a2)``.  Charlie holds ``c`` and releases the transfer by measuring it.

The run is split into the numbered steps of the scheme:

1. compose the channel with both payloads (:func:`compose_system`)
2. CNOTs ``A0 -> a0``, ``B0 -> b2``, ``B1 -> b3`` (:func:`step2_encode`)
3. Z measurement of ``a0, b2, b3`` (:func:`step3_measure_z`)
4. X corrections on ``b0, b1, a1, a2`` (:func:`step4_x_corrections`)
5. X-basis measurement of ``A0, A1, B0, B1`` (:func:`step5_measure_x`)
6. Z corrections (:func:`step6_z_corrections`)
7. X-basis measurement of ``c`` (:func:`step7_measure_c`)
8. code-dependent Z corrections (:func:`step8_final_corrections`)

Post-measurement states are never renormalized; probabilities are returned
alongside them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Collection, Iterator, Optional, Sequence, Union

import numpy as np

from bcqt.channel import ChannelCode, build_channel
from bcqt.errors import InvalidArgumentError, ZeroProbabilityBranchError
from bcqt.qcore import (
    OUTPUT_REGISTER,
    PAYLOAD_REGISTER,
    PROTOCOL_REGISTER,
    PURE_TOL,
    Basis,
    StateVector,
    apply_cnot,
    apply_pauli_string,
    discard,
    project,
    reduced_density_matrix,
)

Z_QUBITS = ("a0", "b2", "b3")
X_QUBITS = ("A0", "A1", "B0", "B1")
CORRECTED_QUBITS = ("b0", "b1", "a1", "a2")
SIGNS = ("+", "-")

_ZERO_PROB = 1e-14

CodeLike = Union[ChannelCode, str]


@dataclass(frozen=True)
class InputStates:
    """The two payloads: ``alpha`` on (A0, A1) and ``beta`` on (B0, B1)."""

    alpha: tuple[complex, complex]
    beta: tuple[complex, complex, complex, complex]

    def __post_init__(self) -> None:
        alpha = tuple(complex(a) for a in self.alpha)
        beta = tuple(complex(b) for b in self.beta)
        if len(alpha) != 2 or len(beta) != 4:
            raise InvalidArgumentError("alpha needs 2 amplitudes and beta needs 4")
        for name, amps in (("alpha", alpha), ("beta", beta)):
            norm = sum(abs(a) ** 2 for a in amps)
            if abs(norm - 1.0) > PURE_TOL:
                raise InvalidArgumentError(f"{name} has squared norm {norm!r}, expected 1")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def normalized(cls, alpha: Sequence[complex], beta: Sequence[complex]) -> "InputStates":
        a = np.asarray(alpha, dtype=complex)
        b = np.asarray(beta, dtype=complex)
        return cls(tuple(a / np.linalg.norm(a)), tuple(b / np.linalg.norm(b)))

    @property
    def is_real(self) -> bool:
        return all(v.imag == 0.0 for v in self.alpha + self.beta)

    def alpha_vector(self) -> np.ndarray:
        """``alpha0|00> + alpha1|11>`` as a length-4 array."""
        return np.array([self.alpha[0], 0, 0, self.alpha[1]], dtype=complex)

    def beta_vector(self) -> np.ndarray:
        return np.array(self.beta, dtype=complex)

    def payload(self) -> StateVector:
        return StateVector(PAYLOAD_REGISTER, np.kron(self.alpha_vector(), self.beta_vector()))

    def ideal_output(self) -> StateVector:
        """Target state on (b0, b1, a1, a2): alpha on Bob's pair, beta on Alice's."""
        return StateVector(OUTPUT_REGISTER, np.kron(self.alpha_vector(), self.beta_vector()))


@dataclass(frozen=True, order=True)
class OutcomeRecord:
    """All measurement results of one run.

    ``z`` are the bits of (a0, b2, b3), ``x`` the signs of (A0, A1, B0, B1),
    ``c`` the sign of the controller's qubit.
    """

    z: tuple[int, int, int]
    x: tuple[str, str, str, str]
    c: str

    def __post_init__(self) -> None:
        z = tuple(int(b) for b in self.z)
        x = tuple(self.x)
        if len(z) != 3 or any(b not in (0, 1) for b in z):
            raise InvalidArgumentError(f"z outcome must be three bits, got {self.z!r}")
        if len(x) != 4 or any(s not in SIGNS for s in x) or self.c not in SIGNS:
            raise InvalidArgumentError(f"x and c outcomes must be '+'/'-' signs, got {self.x!r}, {self.c!r}")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "x", x)

    @classmethod
    def parse(cls, text: str) -> "OutcomeRecord":
        """Parse the compact ``"0,00/++,+-/-"`` form produced by ``str()``."""
        try:
            z, x, c = text.replace(" ", "").split("/")
            za, zb = z.split(",")
            xa, xb = x.split(",")
        except ValueError:
            raise InvalidArgumentError(f"cannot parse outcome record {text!r}") from None
        return cls(tuple(int(b) for b in za + zb), tuple(xa + xb), c)

    def __str__(self) -> str:
        z = "".join(map(str, self.z))
        x = "".join(self.x)
        return f"{z[0]},{z[1:]}/{x[:2]},{x[2:]}/{self.c}"

    @property
    def index(self) -> int:
        """Position in the canonical branch order (0..255)."""
        z = self.z[0] * 4 + self.z[1] * 2 + self.z[2]
        x = int("".join("0" if s == "+" else "1" for s in self.x), 2)
        return (z * 16 + x) * 2 + (0 if self.c == "+" else 1)


def all_records() -> list[OutcomeRecord]:
    """The 256 branches in canonical order: z bits, then x signs, then c."""
    return [
        OutcomeRecord(z, x, c)
        for z in itertools.product((0, 1), repeat=3)
        for x in itertools.product(SIGNS, repeat=4)
        for c in SIGNS
    ]


@dataclass(frozen=True)
class ReconstructionResult:
    branch: OutcomeRecord
    probability: float
    final_state: StateVector
    fidelity_A: float
    fidelity_B: float


# -- correction maps --------------------------------------------------------


def x_correction(z_bits: Sequence[int]) -> str:
    """Pauli string on (b0, b1, a1, a2) undoing the Z-measurement flips."""
    a0, b2, b3 = z_bits
    return ("XX" if a0 else "II") + ("X" if b2 else "I") + ("X" if b3 else "I")


def z_correction(x_signs: Sequence[str]) -> str:
    """Pauli string on (b0, b1, a1, a2) undoing the X-measurement phases."""
    return "".join("Z" if s == "-" else "I" for s in x_signs)


def final_corrections(code: CodeLike, c_sign: str) -> tuple[str, ...]:
    """Admissible controller-dependent corrections, preferred one first.

    A set ``a0`` bit in the code can be undone with Z on either ``b1``
    (preferred) or ``b0``, since Bob's payload lives on ``|00>, |11>``.
    """
    code = ChannelCode.parse(code)
    if c_sign not in SIGNS:
        raise InvalidArgumentError(f"c outcome must be '+' or '-', got {c_sign!r}")
    if c_sign == "+":
        return ("IIII",)
    a0, b2, b3 = code.bits
    tail = ("Z" if b2 else "I") + ("Z" if b3 else "I")
    if a0:
        return ("IZ" + tail, "ZI" + tail)
    return ("II" + tail,)


# -- steps ------------------------------------------------------------------


def compose_system(channel: StateVector, inputs: InputStates) -> StateVector:
    system = channel.tensor(inputs.payload())
    if system.register != PROTOCOL_REGISTER:
        raise InvalidArgumentError("channel must be on the eight-qubit channel register")
    return system


def step2_encode(state: StateVector) -> StateVector:
    for control, target in zip(("A0", "B0", "B1"), Z_QUBITS):
        state = apply_cnot(state, control, target)
    return state


def _project_all(
    state: StateVector, qubits: Sequence[str], basis: Basis, outcomes: Sequence[int]
) -> StateVector:
    for q, o in zip(qubits, outcomes):
        state, _ = project(state, q, basis, o)
    return state


def _measure(
    state: StateVector,
    qubits: Sequence[str],
    basis: Basis,
    forced: Optional[Sequence[int]],
    rng: Optional[np.random.Generator],
) -> tuple[StateVector, tuple[int, ...], float]:
    initial = state.norm_sq()
    if forced is not None:
        outcomes = tuple(forced)
        if len(outcomes) != len(qubits):
            raise InvalidArgumentError(f"expected {len(qubits)} forced outcomes, got {outcomes!r}")
        state = _project_all(state, qubits, basis, outcomes)
    else:
        if rng is None:
            raise InvalidArgumentError("sampling needs a random generator")
        picked = []
        # one uniform draw per qubit, in register order
        for q in qubits:
            zero, p0 = project(state, q, basis, 0)
            if rng.random() < p0:
                state = zero
                picked.append(0)
            else:
                state, _ = project(state, q, basis, 1)
                picked.append(1)
        outcomes = tuple(picked)
    prob = state.norm_sq() / initial if initial > 0.0 else 0.0
    if prob < _ZERO_PROB:
        raise ZeroProbabilityBranchError(
            f"outcome {outcomes} on {tuple(qubits)} has probability {prob:.3g}"
        )
    return state, outcomes, prob


def _sign_bits(signs: Sequence[str]) -> tuple[int, ...]:
    if any(s not in SIGNS for s in signs):
        raise InvalidArgumentError(f"signs must be '+' or '-', got {signs!r}")
    return tuple(0 if s == "+" else 1 for s in signs)


def _bits_sign(bits: Sequence[int]) -> tuple[str, ...]:
    return tuple(SIGNS[b] for b in bits)


def step3_measure_z(
    state: StateVector,
    forced: Optional[Sequence[int]] = None,
    rng: Optional[np.random.Generator] = None,
) -> tuple[StateVector, tuple[int, int, int], float]:
    return _measure(state, Z_QUBITS, Basis.Z, forced, rng)


def step4_x_corrections(state: StateVector, z_bits: Sequence[int]) -> StateVector:
    return apply_pauli_string(state, CORRECTED_QUBITS, x_correction(z_bits))


def step5_measure_x(
    state: StateVector,
    forced: Optional[Sequence[str]] = None,
    rng: Optional[np.random.Generator] = None,
) -> tuple[StateVector, tuple[str, str, str, str], float]:
    bits = None if forced is None else _sign_bits(forced)
    state, outcomes, prob = _measure(state, X_QUBITS, Basis.X, bits, rng)
    return state, _bits_sign(outcomes), prob


def step6_z_corrections(state: StateVector, x_signs: Sequence[str]) -> StateVector:
    return apply_pauli_string(state, CORRECTED_QUBITS, z_correction(x_signs))


def step7_measure_c(
    state: StateVector,
    forced: Optional[str] = None,
    rng: Optional[np.random.Generator] = None,
) -> tuple[StateVector, str, float]:
    bits = None if forced is None else _sign_bits((forced,))
    state, outcomes, prob = _measure(state, ("c",), Basis.X, bits, rng)
    return state, SIGNS[outcomes[0]], prob


def step8_final_corrections(
    state: StateVector, c_sign: str, code: CodeLike, alternative: int = 0
) -> StateVector:
    return apply_pauli_string(state, CORRECTED_QUBITS, final_corrections(code, c_sign)[alternative])


def release_output(state: StateVector, record: OutcomeRecord) -> StateVector:
    """Discard every measured qubit, leaving (b0, b1, a1, a2)."""
    for q, bit in zip(Z_QUBITS, record.z):
        state = discard(state, q, bit)
    for q, sign in zip(X_QUBITS, record.x):
        state = discard(state, q, sign)
    return discard(state, "c", record.c)


def payload_fidelities(final: StateVector, inputs: InputStates) -> tuple[float, float]:
    """Fidelities of Alice's received beta and Bob's received alpha."""
    final = final.normalized()
    beta = inputs.beta_vector()
    alpha = inputs.alpha_vector()
    rho_a = reduced_density_matrix(final, ("a1", "a2"))
    rho_b = reduced_density_matrix(final, ("b0", "b1"))
    fid_a = float(np.vdot(beta, rho_a @ beta).real)
    fid_b = float(np.vdot(alpha, rho_b @ alpha).real)
    return fid_a, fid_b


def run_protocol(
    inputs: InputStates,
    code: CodeLike,
    *,
    branch: Optional[OutcomeRecord] = None,
    seed: Optional[int] = None,
) -> ReconstructionResult:
    """Run all eight steps once, either on a forced branch or sampled from ``seed``.

    Sampling uses ``numpy.random.default_rng(seed)`` and draws one uniform
    number per measured qubit in step order, so a seed fixes the branch.
    """
    if (branch is None) == (seed is None):
        raise InvalidArgumentError("pass exactly one of branch= or seed=")
    code = ChannelCode.parse(code)
    rng = None if seed is None else np.random.default_rng(seed)

    state = step2_encode(compose_system(build_channel(code), inputs))
    state, z, p3 = step3_measure_z(state, None if branch is None else branch.z, rng)
    state = step4_x_corrections(state, z)
    state, x, p5 = step5_measure_x(state, None if branch is None else branch.x, rng)
    state = step6_z_corrections(state, x)
    state, c, p7 = step7_measure_c(state, None if branch is None else branch.c, rng)
    state = step8_final_corrections(state, c, code)

    record = OutcomeRecord(z, x, c)
    final = release_output(state, record)
    fid_a, fid_b = payload_fidelities(final, inputs)
    return ReconstructionResult(record, p3 * p5 * p7, final, fid_a, fid_b)


def iter_branches(
    system: StateVector, code: CodeLike, skip: Collection[str] = ()
) -> Iterator[tuple[OutcomeRecord, StateVector]]:
    """Yield every branch's corrected, unnormalized output in canonical order.

    ``system`` is the composed 12-qubit state before step 2; it need not be
    normalized.  Zero-weight branches are yielded as zero vectors rather than
    raising.  ``skip`` may name ``"step4"``, ``"step6"`` or ``"step8"`` to
    leave those corrections out (for negative controls).

    Measured qubits are discarded as soon as their outcome is fixed, which
    keeps the shared prefixes of the branch tree small.
    """
    code = ChannelCode.parse(code)
    encoded = step2_encode(system)
    for z in itertools.product((0, 1), repeat=3):
        after_z = _project_all(encoded, Z_QUBITS, Basis.Z, z)
        for q, bit in zip(Z_QUBITS, z):
            after_z = discard(after_z, q, bit)
        if "step4" not in skip:
            after_z = step4_x_corrections(after_z, z)
        for xb in itertools.product((0, 1), repeat=4):
            x = _bits_sign(xb)
            after_x = _project_all(after_z, X_QUBITS, Basis.X, xb)
            for q, sign in zip(X_QUBITS, x):
                after_x = discard(after_x, q, sign)
            if "step6" not in skip:
                after_x = step6_z_corrections(after_x, x)
            for cb, c in enumerate(SIGNS):
                state, _ = project(after_x, "c", Basis.X, cb)
                state = discard(state, "c", c)
                if "step8" not in skip:
                    state = step8_final_corrections(state, c, code)
                yield OutcomeRecord(z, x, c), state


def enumerate_branches(
    inputs: InputStates, code: CodeLike, skip: Collection[str] = ()
) -> list[ReconstructionResult]:
    """All 256 branches with exact probabilities, in canonical order."""
    system = compose_system(build_channel(code), inputs)
    results = []
    for record, final in iter_branches(system, code, skip):
        fid_a, fid_b = payload_fidelities(final, inputs)
        results.append(ReconstructionResult(record, final.norm_sq(), final, fid_a, fid_b))
    return results


def default_input_suite(seed: int = 0) -> list[InputStates]:
    """Payloads used for exhaustive verification.

    Basis payloads, a Bell-type alpha with uniform beta, the unequal real
    pair used for the damping comparison, three random real and three random
    complex pairs drawn from ``numpy.random.default_rng(seed)``.
    """
    r = np.sqrt(0.5)
    suite = [
        InputStates((1, 0), (1, 0, 0, 0)),
        InputStates((r, r), (0.5, 0.5, 0.5, 0.5)),
        InputStates((0.5, np.sqrt(3) / 2), (0.5, 0, 0, np.sqrt(3) / 2)),
    ]
    rng = np.random.default_rng(seed)
    for _ in range(3):
        suite.append(InputStates.normalized(rng.normal(size=2), rng.normal(size=4)))
    for _ in range(3):
        alpha = rng.normal(size=2) + 1j * rng.normal(size=2)
        beta = rng.normal(size=4) + 1j * rng.normal(size=4)
        suite.append(InputStates.normalized(alpha, beta))
    return suite
