"""Sparse reference simulator for the tests.

States are dicts mapping bitstrings to amplitudes.  Nothing here imports the
package under test: the channel comes from the reference ket lists and the
gates are written directly as bit manipulations.
"""

import itertools
import math

REG = ("a0", "b0", "b1", "a1", "a2", "c", "b2", "b3", "A0", "A1", "B0", "B1")
POS = {q: i for i, q in enumerate(REG)}
S = 1 / math.sqrt(2)


def from_kets(kets, amp):
    return {k: amp for k in kets}


def tensor(left, right):
    return {a + b: x * y for a, x in left.items() for b, y in right.items()}


def payload(alpha, beta):
    a = {"00": alpha[0], "11": alpha[1]}
    b = {format(i, "02b"): v for i, v in enumerate(beta)}
    return tensor(a, b)


def _set(bits, i, v):
    return bits[:i] + v + bits[i + 1:]


def cnot(state, control, target, pos=POS):
    c, t = pos[control], pos[target]
    out = {}
    for k, v in state.items():
        if k[c] == "1":
            k = _set(k, t, "1" if k[t] == "0" else "0")
        out[k] = out.get(k, 0) + v
    return out


def x_gate(state, q, pos=POS):
    i = pos[q]
    return {_set(k, i, "1" if k[i] == "0" else "0"): v for k, v in state.items()}


def z_gate(state, q, pos=POS):
    i = pos[q]
    return {k: (-v if k[i] == "1" else v) for k, v in state.items()}


def diag(state, q, d0, d1, pos=POS):
    i = pos[q]
    return {k: v * (d0 if k[i] == "0" else d1) for k, v in state.items()}


def lower(state, q, factor, pos=POS):
    """|1> -> factor |0>, |0> -> 0 on qubit q."""
    i = pos[q]
    return {_set(k, i, "0"): v * factor for k, v in state.items() if k[i] == "1"}


def project_z(state, q, bit, pos=POS):
    i = pos[q]
    return {k: v for k, v in state.items() if k[i] == str(bit)}


def project_x(state, q, sign, pos=POS):
    """Apply |s><s| with |s> = (|0> + s|1>)/sqrt2, s = +-1."""
    i = pos[q]
    s = 1 if sign == "+" else -1
    out = {}
    for k, v in state.items():
        phase = 1 if k[i] == "0" else s
        # <s|k_i> = phase / sqrt2, then |s> = (|0> + s|1>)/sqrt2
        for bit, coef in (("0", 1), ("1", s)):
            kk = _set(k, i, bit)
            out[kk] = out.get(kk, 0) + v * phase * coef / 2
    return {k: v for k, v in out.items() if v != 0}


def norm_sq(state):
    return sum(abs(v) ** 2 for v in state.values())


def dense(state, n):
    import numpy as np

    vec = np.zeros(2**n, dtype=complex)
    for k, v in state.items():
        vec[int(k, 2)] += v
    return vec


def reduce_to(state, keep):
    """Marginal ket on ``keep`` after checking every other qubit is fixed."""
    idx = [POS[q] for q in keep]
    others = [i for i in range(len(REG)) if i not in idx]
    out = {}
    for k, v in state.items():
        kk = "".join(k[i] for i in idx)
        out[kk] = out.get(kk, 0) + v
    return out, {"".join(k[i] for i in others) for k in state}


def run_branch(system, code, z, x, c):
    """Full noiseless pipeline on a sparse 12-qubit state, X-measured qubits
    projected onto |+->, corrections written out from the rules."""
    s = system
    for ctl, tgt in (("A0", "a0"), ("B0", "b2"), ("B1", "b3")):
        s = cnot(s, ctl, tgt)
    for q, bit in zip(("a0", "b2", "b3"), z):
        s = project_z(s, q, bit)
    if z[0]:
        s = x_gate(x_gate(s, "b0"), "b1")
    if z[1]:
        s = x_gate(s, "a1")
    if z[2]:
        s = x_gate(s, "a2")
    for q, sign in zip(("A0", "A1", "B0", "B1"), x):
        s = project_x(s, q, sign)
    for q, sign in zip(("b0", "b1", "a1", "a2"), x):
        if sign == "-":
            s = z_gate(s, q)
    s = project_x(s, "c", c)
    if c == "-":
        if code[0] == "1":
            s = z_gate(s, "b1")
        if code[1] == "1":
            s = z_gate(s, "a1")
        if code[2] == "1":
            s = z_gate(s, "a2")
    return s


def all_branches():
    signs = ("+", "-")
    for z in itertools.product((0, 1), repeat=3):
        for x in itertools.product(signs, repeat=4):
            for c in signs:
                yield z, x, c


def output_vector(state, z, x, c):
    """Contract the measured qubits against their outcome kets; returns the
    16-entry vector on (b0, b1, a1, a2)."""
    import numpy as np

    out = np.zeros(16, dtype=complex)
    measured_x = list(zip(("A0", "A1", "B0", "B1", "c"), tuple(x) + (c,)))
    for k, v in state.items():
        if any(k[POS[q]] != str(b) for q, b in zip(("a0", "b2", "b3"), z)):
            continue
        coef = v
        for q, sign in measured_x:
            if k[POS[q]] == "1" and sign == "-":
                coef = -coef
            coef *= S
        idx = int("".join(k[POS[q]] for q in ("b0", "b1", "a1", "a2")), 2)
        out[idx] += coef
    return out
