"""Amplitude- and phase-damping of the transmitted channel qubits.

The noise acts on the seven qubits that travel from the controller to the
two users (``c`` stays home).  All seven see the *same* Kraus index, i.e.
the channel becomes ``sum_m E_m^{(x)7} rho E_m^{(x)7 dagger}``.  That map is
not trace preserving, and the deficit is kept on purpose: the fidelity
formulas below are written for exactly this convention.

Because the mixture has rank at most three, it is carried as a
:class:`~bcqt.qcore.PureEnsemble` and pushed through the pure-state protocol
component by component.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import optimize

from bcqt.channel import ChannelCode, build_channel
from bcqt.errors import InvalidArgumentError, NoCrossingError, UnsupportedInputsError
from bcqt.protocol import InputStates, OutcomeRecord, all_records, compose_system, iter_branches
from bcqt.qcore import (
    OUTPUT_REGISTER,
    PIPELINE_TOL,
    PureEnsemble,
    Register,
    StateVector,
    apply_matrix,
)

logger = logging.getLogger(__name__)

FIRST_BRANCH = "0,00/++,++/+"

NOISY_QUBITS = ("a0", "a1", "a2", "b0", "b1", "b2", "b3")

CodeLike = Union[ChannelCode, str]


class NoiseKind(enum.Enum):
    AMPLITUDE_DAMPING = "ad"
    PHASE_DAMPING = "pd"

    @classmethod
    def parse(cls, kind: Union[str, "NoiseKind"]) -> "NoiseKind":
        if isinstance(kind, NoiseKind):
            return kind
        try:
            return cls(kind.lower())
        except ValueError:
            raise InvalidArgumentError(f"noise kind must be 'ad' or 'pd', got {kind!r}") from None


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind
    eta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", NoiseKind.parse(self.kind))
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidArgumentError(f"decoherence rate must lie in [0, 1], got {self.eta!r}")


@dataclass(frozen=True)
class DensityMatrix:
    """Unnormalized output state on (b0, b1, a1, a2).

    ``branch_deviation`` is set by :func:`run_noisy_protocol`: the largest
    entrywise gap between any single branch's contribution scaled by 256
    and the branch sum.  Zero means the output does not depend on which
    measurement results occurred.
    """

    entries: np.ndarray
    register: Register = OUTPUT_REGISTER
    branch_deviation: Optional[float] = None
    worst_branch: Optional[OutcomeRecord] = None

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.entries, self.entries.conj().T, rtol=0.0, atol=tol))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries).min())

    def expectation(self, psi: StateVector) -> float:
        if psi.register != self.register:
            raise InvalidArgumentError("state and density matrix live on different registers")
        return float(np.vdot(psi.amplitudes, self.entries @ psi.amplitudes).real)


def kraus_ops(spec: NoiseSpec) -> tuple[np.ndarray, ...]:
    eta = spec.eta
    if spec.kind is NoiseKind.AMPLITUDE_DAMPING:
        return (
            np.array([[1, 0], [0, np.sqrt(1 - eta)]], dtype=complex),
            np.array([[0, np.sqrt(eta)], [0, 0]], dtype=complex),
        )
    return (
        np.sqrt(1 - eta) * np.eye(2, dtype=complex),
        np.sqrt(eta) * np.array([[1, 0], [0, 0]], dtype=complex),
        np.sqrt(eta) * np.array([[0, 0], [0, 1]], dtype=complex),
    )


def apply_correlated_noise(channel: StateVector, spec: NoiseSpec) -> PureEnsemble:
    """One ensemble component per Kraus index, each applied to all noisy qubits."""
    if spec.eta == 0.0:
        return PureEnsemble((channel,))
    components = []
    for op in kraus_ops(spec):
        state = channel
        for q in NOISY_QUBITS:
            state = apply_matrix(state, q, op)
        components.append(state)
    return PureEnsemble(tuple(components))


def branch_contributions(inputs: InputStates, code: CodeLike, spec: NoiseSpec) -> np.ndarray:
    """Per-branch unnormalized output operators, shape ``(256, 16, 16)``.

    Entry ``k`` is ``sum_m v_{m,k} v_{m,k}^dagger`` over ensemble components
    ``m`` for branch ``k`` in canonical order.
    """
    ensemble = apply_correlated_noise(build_channel(code), spec)
    out = np.zeros((256, 16, 16), dtype=complex)
    for component in ensemble.components:
        system = compose_system(component, inputs)
        for k, (_, final) in enumerate(iter_branches(system, code)):
            v = final.amplitudes
            out[k] += np.outer(v, v.conj())
    return out


def run_noisy_protocol(inputs: InputStates, code: CodeLike, spec: NoiseSpec) -> DensityMatrix:
    """Sum of corrected branch outputs over all branches and noise components."""
    contributions = branch_contributions(inputs, code, spec)
    rho = contributions.sum(axis=0)
    gaps = np.abs(256.0 * contributions - rho).reshape(256, -1).max(axis=1)
    worst = int(np.argmax(gaps))
    result = DensityMatrix(rho, branch_deviation=float(gaps[worst]), worst_branch=all_records()[worst])
    if result.branch_deviation > PIPELINE_TOL:
        logger.info(
            "output depends on the measurement branch: max gap %.3g at %s (%s, eta=%g, code %s)",
            result.branch_deviation, result.worst_branch, spec.kind.value, spec.eta, code,
        )
    return result


def conditional_output(
    inputs: InputStates, code: CodeLike, spec: NoiseSpec, branch: OutcomeRecord
) -> DensityMatrix:
    """Output of a single branch scaled by 256, i.e. conditioned on that record
    under the noiseless branch weight."""
    contributions = branch_contributions(inputs, code, spec)
    return DensityMatrix(256.0 * contributions[branch.index])


def fidelity_sim(inputs: InputStates, code: CodeLike, spec: NoiseSpec) -> float:
    return run_noisy_protocol(inputs, code, spec).expectation(inputs.ideal_output())


# -- closed forms -----------------------------------------------------------


def _real_amplitudes(inputs: InputStates) -> tuple[float, float, float, float, float, float]:
    if not inputs.is_real:
        raise UnsupportedInputsError("closed-form expressions assume real amplitudes")
    a0, a1 = (v.real for v in inputs.alpha)
    b00, b01, b10, b11 = (v.real for v in inputs.beta)
    return a0, a1, b00, b01, b10, b11


def _damped_weights(eta: float) -> np.ndarray:
    """Amplitude-damping factors on |0000>, |0001>, ..., |1111> (zero off support)."""
    q = 1.0 - eta
    w = np.zeros(16)
    w[[0b0000, 0b0001, 0b0010, 0b0011]] = [1.0, q, q, q**2]
    w[[0b1100, 0b1101, 0b1110, 0b1111]] = [q**1.5, q**2.5, q**2.5, q**3.5]
    return w


def rho_amp_closed(inputs: InputStates, eta: float) -> DensityMatrix:
    a0, a1, b00, b01, b10, b11 = _real_amplitudes(inputs)
    psi = inputs.ideal_output().amplitudes.real * _damped_weights(eta)
    rho = np.outer(psi, psi).astype(complex)
    rho[0, 0] += eta**7 * a1**2 * b11**2
    return DensityMatrix(rho)


def rho_phase_closed(inputs: InputStates, eta: float) -> DensityMatrix:
    a0, a1, b00, b01, b10, b11 = _real_amplitudes(inputs)
    phi = inputs.ideal_output().amplitudes.real
    rho = ((1 - eta) ** 7 * np.outer(phi, phi)).astype(complex)
    rho[0, 0] += eta**7 * a0**2 * b00**2
    rho[15, 15] += eta**7 * a1**2 * b11**2
    return DensityMatrix(rho)


def f_amp_closed(inputs: InputStates, eta: float) -> float:
    a0, a1, b00, b01, b10, b11 = _real_amplitudes(inputs)
    q = 1.0 - eta
    bracket = (
        a0**2 * b00**2
        + q * a0**2 * b01**2
        + q * a0**2 * b10**2
        + q**2 * a0**2 * b11**2
        + np.sqrt(q**3) * a1**2 * b00**2
        + np.sqrt(q**5) * a1**2 * b01**2
        + np.sqrt(q**5) * a1**2 * b10**2
        + np.sqrt(q**7) * a1**2 * b11**2
    )
    return float(bracket**2 + eta**7 * a0**2 * a1**2 * b00**2 * b11**2)


def f_phase_closed(inputs: InputStates, eta: float) -> float:
    a0, a1, b00, b01, b10, b11 = _real_amplitudes(inputs)
    return float((1 - eta) ** 7 + eta**7 * a0**4 * b00**4 + eta**7 * a1**4 * b11**4)


def rho_closed(inputs: InputStates, spec: NoiseSpec) -> DensityMatrix:
    if spec.kind is NoiseKind.AMPLITUDE_DAMPING:
        return rho_amp_closed(inputs, spec.eta)
    return rho_phase_closed(inputs, spec.eta)


def f_closed(inputs: InputStates, spec: NoiseSpec) -> float:
    if spec.kind is NoiseKind.AMPLITUDE_DAMPING:
        return f_amp_closed(inputs, spec.eta)
    return f_phase_closed(inputs, spec.eta)


def ensemble_weight_closed(spec: NoiseSpec) -> float:
    """Trace of the noisy channel written out for the amplitude-damping case."""
    if spec.kind is not NoiseKind.AMPLITUDE_DAMPING:
        raise InvalidArgumentError("closed-form weight is only tabulated for amplitude damping")
    q = 1.0 - spec.eta
    return (1 + 2 * q**2 + q**4 + q**3 + 2 * q**5 + q**7 + spec.eta**7) / 8


# -- crossing ---------------------------------------------------------------


def bisect_root(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-6
) -> float:
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoCrossingError(f"no sign change on [{lo}, {hi}]: f = {f_lo:.6g}, {f_hi:.6g}")
    return float(optimize.bisect(f, lo, hi, xtol=tol))


def find_crossing(
    inputs: InputStates, eta_lo: float = 0.01, eta_hi: float = 0.99, tol: float = 1e-6
) -> float:
    """Decoherence rate where the amplitude- and phase-damping fidelities cross."""
    return bisect_root(
        lambda eta: f_amp_closed(inputs, eta) - f_phase_closed(inputs, eta), eta_lo, eta_hi, tol
    )


# -- simulator vs closed form -----------------------------------------------


@dataclass
class ComparisonRow:
    inputs: InputStates
    kind: NoiseKind
    eta: float
    f_sim: float
    f_closed: Optional[float]
    rho_gap: Optional[float]
    branch_deviation: float
    # closed form vs the output conditioned on the first canonical branch
    conditional_gap: Optional[float] = None

    @property
    def f_gap(self) -> Optional[float]:
        return None if self.f_closed is None else abs(self.f_sim - self.f_closed)


@dataclass
class ComparisonReport:
    code: ChannelCode
    tol: float
    rows: list[ComparisonRow] = field(default_factory=list)

    def _worst(self, key: Callable[[ComparisonRow], Optional[float]]) -> Optional[ComparisonRow]:
        rows = [r for r in self.rows if key(r) is not None]
        return max(rows, key=key) if rows else None

    @property
    def worst_fidelity(self) -> Optional[ComparisonRow]:
        return self._worst(lambda r: r.f_gap)

    @property
    def worst_rho(self) -> Optional[ComparisonRow]:
        return self._worst(lambda r: r.rho_gap)

    @property
    def agrees(self) -> bool:
        f = self.worst_fidelity
        rho = self.worst_rho
        return (f is None or f.f_gap <= self.tol) and (rho is None or rho.rho_gap <= self.tol)

    def render(self) -> str:
        lines = [f"simulator vs closed form, code {self.code}, tolerance {self.tol:g}"]
        for kind in NoiseKind:
            rows = [r for r in self.rows if r.kind is kind]
            if not rows:
                continue
            supported = [r for r in rows if r.f_closed is not None]
            lines.append(f"[{kind.value}] {len(rows)} grid points, {len(supported)} with closed form")
            if supported:
                wf = max(supported, key=lambda r: r.f_gap)
                wr = max(supported, key=lambda r: r.rho_gap)
                wc = max(supported, key=lambda r: r.conditional_gap)
                lines.append(f"  max |f_sim - f_closed| = {wf.f_gap:.3e} at {_where(wf)}")
                lines.append(f"  max |rho_sim - rho_closed| = {wr.rho_gap:.3e} at {_where(wr)}")
                lines.append(
                    f"  max |rho_branch({FIRST_BRANCH}) - rho_closed| = "
                    f"{wc.conditional_gap:.3e} at {_where(wc)}"
                )
            wb = max(rows, key=lambda r: r.branch_deviation)
            lines.append(f"  max branch dependence = {wb.branch_deviation:.3e} at {_where(wb)}")
            if len(supported) < len(rows):
                lines.append(f"  {len(rows) - len(supported)} complex inputs: closed form unsupported")
        if self.agrees:
            lines.append("RESULT: agreement within tolerance")
        else:
            lines.append("RESULT: DISCREPANCY between simulation and closed form (see maxima above)")
        return "\n".join(lines)


def _fmt_inputs(inputs: InputStates) -> str:
    def fmt(z: complex) -> str:
        return f"{z.real:.6g}" if z.imag == 0 else f"{z:.6g}"

    return "alpha=(" + ", ".join(map(fmt, inputs.alpha)) + ") beta=(" + ", ".join(map(fmt, inputs.beta)) + ")"


def _where(row: ComparisonRow) -> str:
    return f"eta={row.eta:g} {_fmt_inputs(row.inputs)}"


def compare(
    inputs_list: Sequence[InputStates],
    etas: Sequence[float],
    code: CodeLike = "001",
    kinds: Sequence[NoiseKind] = tuple(NoiseKind),
    tol: float = PIPELINE_TOL,
) -> ComparisonReport:
    """Run the simulator and the closed forms over a grid and collect the gaps."""
    code = ChannelCode.parse(code)
    report = ComparisonReport(code, tol)
    for kind in kinds:
        for inputs in inputs_list:
            for eta in etas:
                spec = NoiseSpec(kind, float(eta))
                contributions = branch_contributions(inputs, code, spec)
                rho = contributions.sum(axis=0)
                deviation = float(np.abs(256.0 * contributions - rho).max())
                f_sim = DensityMatrix(rho).expectation(inputs.ideal_output())
                f_cl = rho_gap = cond_gap = None
                if inputs.is_real:
                    closed = rho_closed(inputs, spec).entries
                    f_cl = f_closed(inputs, spec)
                    rho_gap = float(np.abs(rho - closed).max())
                    cond_gap = float(np.abs(256.0 * contributions[0] - closed).max())
                report.rows.append(
                    ComparisonRow(inputs, kind, spec.eta, f_sim, f_cl, rho_gap, deviation, cond_gap)
                )
    return report
