"""Acceptance checks, one test per criterion.

Each test records a one-line PASS/FAIL verdict (printed, and repeated in the
terminal summary) before asserting.
"""

import time
from pathlib import Path

import numpy as np

from bcqt.channel import CHANNEL_KETS, all_codes, build_channel
from bcqt.cli import compare_input_suite
from bcqt.noise import (
    NoiseKind,
    NoiseSpec,
    apply_correlated_noise,
    compare,
    f_amp_closed,
    f_phase_closed,
    find_crossing,
)
from bcqt.protocol import (
    InputStates,
    default_input_suite,
    enumerate_branches,
    final_corrections,
    step7_measure_c,
    x_correction,
    z_correction,
)
from bcqt.qcore import apply_pauli_string
from test_protocol import (
    DISTINCT,
    SCALE,
    C_MINUS_ROWS,
    X_FIX_ROWS,
    Z_FIX_ROWS,
    after_step6,
    released_c,
)

REPORT_PATH = Path(__file__).resolve().parents[1] / "reports" / "closed_form_comparison.txt"

R2 = np.sqrt(0.5)
S3 = np.sqrt(3) / 2
GRID_21 = np.round(np.linspace(0, 1, 21), 12)
GRID_101 = np.linspace(0, 1, 101)


def test_criterion_1_channel_exactness(criterion):
    worst = 0.0
    for code in all_codes():
        expected = np.zeros(256)
        expected[[int(k, 2) for k in CHANNEL_KETS[str(code)]]] = 1 / np.sqrt(8)
        worst = max(worst, float(np.abs(build_channel(code).amplitudes - expected).max()))
    ok = worst <= 1e-12
    criterion(1, ok, f"8 channels vs the ket table, max amplitude error {worst:.2e} (tol 1e-12)")
    assert ok


def test_criterion_2_noiseless_reconstruction(criterion):
    start = time.perf_counter()
    suite = default_input_suite()
    worst_f = worst_p = 0.0
    for inp in suite:
        for code in all_codes():
            results = enumerate_branches(inp, code)
            worst_p = max(worst_p, abs(sum(r.probability for r in results) - 1))
            for r in results:
                worst_f = max(worst_f, abs(r.fidelity_A - 1), abs(r.fidelity_B - 1))
    elapsed = time.perf_counter() - start
    n_complex = sum(not s.is_real for s in suite)
    ok = len(suite) >= 8 and n_complex > 0 and worst_f <= 1e-9 and worst_p <= 1e-9 and elapsed < 60
    criterion(
        2, ok,
        f"{len(suite)} inputs ({n_complex} complex) x 8 codes x 256 branches: "
        f"max |F-1| {worst_f:.1e}, max |sum p - 1| {worst_p:.1e}, {elapsed:.1f}s",
    )
    assert ok


def test_criterion_3_branch_uniformity(criterion):
    worst = 0.0
    real = [s for s in default_input_suite() if s.is_real]
    for inp in real:
        for code in all_codes():
            worst = max(worst, max(abs(r.probability - 1 / 256) for r in enumerate_branches(inp, code)))
    ok = worst <= 1e-9
    criterion(3, ok, f"{len(real)} real inputs x 8 codes: max |p - 1/256| {worst:.1e}")
    assert ok


def test_criterion_4_correction_tables(criterion):
    problems = []
    for z, op in X_FIX_ROWS.items():
        if x_correction(z) != op:
            problems.append(f"X row {z}")
    for signs, op in Z_FIX_ROWS.items():
        if z_correction(tuple(signs[0] + signs[1])) != op:
            problems.append(f"Z row {signs}")
    alternatives = 0
    a, b = DISTINCT.alpha, DISTINCT.beta
    ideal = np.zeros(16, dtype=complex)
    for i in (0, 1):
        for jk in range(4):
            ideal[(0b1100 if i else 0) | jk] = a[i] * b[jk]
    for code, (_, ops) in C_MINUS_ROWS.items():
        if final_corrections(code, "-") != ops or final_corrections(code, "+") != ("IIII",):
            problems.append(f"controller row {code}")
        state, _, _ = step7_measure_c(after_step6(DISTINCT, code), forced="-")
        out = released_c(state, "-")
        for op in ops:
            fixed = apply_pauli_string(out, ("b0", "b1", "a1", "a2"), op)
            alternatives += 1
            if not np.allclose(SCALE * fixed.amplitudes, ideal, atol=1e-12):
                problems.append(f"alternative {op} for {code}")
    ok = not problems
    criterion(
        4, ok,
        f"8 X rows, 16 Z rows, 16 controller rows, {alternatives} '-' alternatives recover the ideal"
        + (f"; mismatches: {problems}" if problems else ""),
    )
    assert ok


def test_criterion_5_noise_state_oracle(criterion):
    ch = build_channel("001")
    worst = 0.0
    for eta in GRID_21:
        q = 1 - eta
        exps = {k: sum(int(x) for i, x in enumerate(k) if i != 5) for k in CHANNEL_KETS["001"]}
        psi = np.zeros(256)
        for k, e in exps.items():
            psi[int(k, 2)] = q ** (e / 2)
        expected = np.outer(psi, psi) / 8
        expected[0b00000100, 0b00000100] += eta**7 / 8
        got = apply_correlated_noise(ch, NoiseSpec(NoiseKind.AMPLITUDE_DAMPING, eta)).density_matrix()
        worst = max(worst, float(np.abs(got - expected).max()))

        flat = np.zeros(256)
        flat[[int(k, 2) for k in CHANNEL_KETS["001"]]] = 1
        expected = (1 - eta) ** 7 * np.outer(flat, flat) / 8
        expected[0, 0] += eta**7 / 8
        expected[255, 255] += eta**7 / 8
        got = apply_correlated_noise(ch, NoiseSpec(NoiseKind.PHASE_DAMPING, eta)).density_matrix()
        worst = max(worst, float(np.abs(got - expected).max()))
    ok = worst <= 1e-12
    criterion(5, ok, f"noisy channel vs the AD/PD mixtures on 21 eta values: max error {worst:.1e}")
    assert ok


def test_criterion_6_closed_form_agreement(criterion):
    start = time.perf_counter()
    suite = compare_input_suite()
    report = compare(suite, GRID_21, code="001")
    text = report.render()
    REPORT_PATH.parent.mkdir(exist_ok=True)
    REPORT_PATH.write_text(text + "\n", encoding="utf-8")
    elapsed = time.perf_counter() - start
    worst = report.worst_fidelity
    generated = REPORT_PATH.exists() and "max |f_sim - f_closed|" in REPORT_PATH.read_text()
    if report.agrees:
        verdict = "exact agreement"
    else:
        verdict = (
            f"discrepancy report written to {REPORT_PATH.name}: max |f_sim - f_closed| "
            f"{worst.f_gap:.3e} ({worst.kind.value}, eta={worst.eta:g})"
        )
    ok = len(suite) >= 5 and (report.agrees or generated) and elapsed < 120
    criterion(6, ok, f"{len(suite)} real inputs x 21 eta x 2 kinds, {elapsed:.0f}s; {verdict}")
    assert ok


def test_criterion_7_uniform_ordering(criterion):
    inp = InputStates((R2, R2), (0.5, 0.5, 0.5, 0.5))
    margins = [f_amp_closed(inp, e) - f_phase_closed(inp, e) for e in GRID_101]
    ok = min(margins) >= -1e-12
    criterion(7, ok, f"F^A - F^P over 101 eta values, min {min(margins):.3e}")
    assert ok


def test_criterion_8_unequal_crossing(criterion):
    inp = InputStates((0.5, S3), (0.5, 0, 0, S3))
    eta = find_crossing(inp)
    ok = abs(eta - 0.6708) <= 0.02
    criterion(8, ok, f"F^A = F^P at eta = {eta:.5f} (target 0.6708 +- 0.02)")
    assert ok


def test_criterion_9_unit_peaks(criterion):
    inp = InputStates((1, 0), (1, 0, 0, 0))
    phase = f_phase_closed(inp, 1.0)
    amp = max(abs(f_amp_closed(inp, e) - 1) for e in GRID_101)
    ok = abs(phase - 1) <= 1e-12 and amp <= 1e-12
    criterion(9, ok, f"F^P(eta=1) = {phase:.12g}, max |F^A - 1| over 101 eta = {amp:.1e}")
    assert ok


def _slices():
    """Fidelity slices; each yields (label, fidelity fn, inputs)."""
    params = np.linspace(0, 1, 11)
    for a in params:
        yield "ad/alpha", f_amp_closed, InputStates.normalized((a, np.sqrt(1 - a * a)), (R2, 0, 0, R2))
    for b in params:
        yield "ad/beta", f_amp_closed, InputStates.normalized((R2, R2), (b, 0, 0, np.sqrt(1 - b * b)))
    for a in params:
        yield "pd/alpha", f_phase_closed, InputStates.normalized((a, np.sqrt(1 - a * a)), (1, 0, 0, 0))
    for b in params:
        yield "pd/beta", f_phase_closed, InputStates.normalized((0.5, S3), (b, 0, 0, np.sqrt(1 - b * b)))


def test_criterion_10_monotonicity(criterion):
    violations = {}
    worst = (0.0, None)
    for label, fn, inp in _slices():
        f = np.array([fn(inp, e) for e in GRID_101])
        rise = np.diff(f)
        if rise.max() > 1e-12:
            violations[label] = violations.get(label, 0) + 1
            k = int(np.argmax(rise))
            if rise[k] > worst[0]:
                worst = (float(rise[k]), f"{label} at eta={GRID_101[k + 1]:.2f}")
    ok = not violations
    detail = "nonincreasing on all four slices"
    if violations:
        counts = ", ".join(f"{k}: {v}/11" for k, v in sorted(violations.items()))
        detail = f"curves that rise somewhere: {counts}; largest step up {worst[0]:.3e} ({worst[1]})"
    criterion(10, ok, detail)
    assert ok
