"""Command-line front end.

Exit status: 0 when every check passes, 1 on a verification failure or a
simulator/closed-form discrepancy, 2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, TextIO

import numpy as np

from bcqt.channel import CHANNEL_KETS, all_codes, build_channel, check_against_table, gate_count
from bcqt.errors import InvalidArgumentError
from bcqt.noise import NoiseKind, NoiseSpec, compare, f_closed, fidelity_sim
from bcqt.protocol import (
    SIGNS,
    InputStates,
    default_input_suite,
    enumerate_branches,
    final_corrections,
    x_correction,
    z_correction,
)
from bcqt.qcore import PIPELINE_TOL

logger = logging.getLogger("bcqt")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CSV_HEADER = (
    "eta", "kind", "alpha0", "alpha1", "beta00", "beta01", "beta10", "beta11",
    "code", "f_sim", "f_closed", "abs_diff",
)

_R = float(np.sqrt(0.5))
UNIFORM_ALPHA = (_R, _R)
UNIFORM_BETA = (0.5, 0.5, 0.5, 0.5)

# renormalize silently-ish below this, reject above
_RENORM_LIMIT = 1e-6


class ConfigError(ValueError):
    pass


@dataclass
class SweepConfig:
    kinds: tuple[NoiseKind, ...] = tuple(NoiseKind)
    eta_start: float = 0.0
    eta_stop: float = 1.0
    eta_steps: int = 21
    alpha: tuple[float, float] = UNIFORM_ALPHA
    beta: tuple[float, float, float, float] = UNIFORM_BETA
    code: str = "001"
    out: Optional[Path] = None
    seed: int = 0
    explicit_inputs: bool = field(default=False, repr=False)

    def validate(self) -> InputStates:
        """Check ranges and return normalized inputs, or raise ConfigError."""
        if not 0.0 <= self.eta_start <= self.eta_stop <= 1.0:
            raise ConfigError(
                f"need 0 <= eta-start <= eta-stop <= 1, got {self.eta_start}, {self.eta_stop}"
            )
        if self.eta_steps < 2:
            raise ConfigError(f"--steps must be at least 2, got {self.eta_steps}")
        if self.code not in CHANNEL_KETS:
            raise ConfigError(f"--code must be one of 000..111, got {self.code!r}")
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        for name, amps in (("alpha", alpha), ("beta", beta)):
            off = abs(float(amps @ amps) - 1.0)
            if off > _RENORM_LIMIT:
                raise ConfigError(f"{name} amplitudes have squared norm {amps @ amps:.9g}, expected 1")
            if off > PIPELINE_TOL:
                logger.warning("renormalizing %s (squared norm off by %.2g)", name, off)
        try:
            return InputStates.normalized(alpha, beta)
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from None

    def etas(self) -> np.ndarray:
        return np.linspace(self.eta_start, self.eta_stop, self.eta_steps)


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


# -- subcommands ------------------------------------------------------------


def cmd_verify_channel(
    out: Optional[TextIO] = None, golden: Mapping[str, Sequence[str]] = CHANNEL_KETS
) -> int:
    out = out or sys.stdout
    failures = []
    for code in all_codes():
        key = str(code)
        problems = check_against_table(build_channel(code), tuple(golden[key]))
        gates = gate_count(code)
        status = "PASS" if not problems else "FAIL"
        out.write(f"code {key}: {status}  ({gates.hadamard} H + {gates.cnot} CNOT)\n")
        for p in problems:
            out.write(f"    {p}\n")
        if problems:
            failures.append(key)
    out.write(f"{8 - len(failures)}/8 channels match the table\n")
    if failures:
        out.write(f"mismatching codes: {', '.join(failures)}\n")
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify_protocol(
    inputs: Optional[Sequence[InputStates]] = None,
    seed: int = 0,
    out: Optional[TextIO] = None,
    skip: Sequence[str] = (),
    tol: float = PIPELINE_TOL,
) -> int:
    out = out or sys.stdout
    suite = list(inputs) if inputs is not None else default_input_suite(seed)
    failed = 0
    for n, inp in enumerate(suite):
        bad = []
        for code in all_codes():
            results = enumerate_branches(inp, code, skip)
            total = sum(r.probability for r in results)
            if abs(total - 1.0) > tol:
                bad.append(f"code {code}: probabilities sum to {total:.15g}")
            for r in results:
                if abs(r.fidelity_A - 1.0) > tol or abs(r.fidelity_B - 1.0) > tol:
                    bad.append(
                        f"code {code} branch {r.branch}: "
                        f"F_A={r.fidelity_A:.12g} F_B={r.fidelity_B:.12g}"
                    )
        status = "PASS" if not bad else f"FAIL ({len(bad)} problems)"
        out.write(f"input {n}: 8 codes x 256 branches {status}\n")
        for line in bad[:20]:
            out.write(f"    {line}\n")
        if len(bad) > 20:
            out.write(f"    ... {len(bad) - 20} more\n")
        failed += bool(bad)
    out.write(f"{len(suite) - failed}/{len(suite)} inputs reconstructed perfectly\n")
    return EXIT_FAIL if failed else EXIT_OK


def sweep_rows(config: SweepConfig) -> list[list[str]]:
    inputs = config.validate()
    alpha = [_fmt(v.real) for v in inputs.alpha]
    beta = [_fmt(v.real) for v in inputs.beta]
    rows = []
    for eta in config.etas():
        for kind in config.kinds:
            spec = NoiseSpec(kind, float(eta))
            f_sim = fidelity_sim(inputs, config.code, spec)
            f_cl = f_closed(inputs, spec)
            rows.append(
                [_fmt(eta), kind.value, *alpha, *beta, config.code,
                 _fmt(f_sim), _fmt(f_cl), _fmt(abs(f_sim - f_cl))]
            )
    return rows


def cmd_sweep(config: SweepConfig, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    rows = sweep_rows(config)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    text = buf.getvalue()
    if config.out is None:
        out.write(text)
        return EXIT_OK
    try:
        config.out.write_text(text, encoding="utf-8")
    except OSError as exc:
        logger.error("cannot write %s: %s", config.out, exc)
        return EXIT_FAIL
    out.write(f"wrote {len(rows)} rows to {config.out}\n")
    return EXIT_OK


def compare_input_suite() -> list[InputStates]:
    """Real payloads used by default when comparing with the closed forms."""
    r = _R
    s3 = float(np.sqrt(3)) / 2
    return [
        InputStates((1, 0), (1, 0, 0, 0)),
        InputStates(UNIFORM_ALPHA, UNIFORM_BETA),
        InputStates((0.5, s3), (0.5, 0, 0, s3)),
        InputStates((0.6, 0.8), (r, 0, 0, r)),
        InputStates((r, r), (0.8, 0, 0, 0.6)),
        InputStates.normalized((0.3, -0.7), (0.1, 0.5, -0.4, 0.7)),
    ]


def cmd_compare(config: SweepConfig, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    if config.explicit_inputs:
        suite = [config.validate()]
    else:
        config.validate()
        suite = compare_input_suite()
    report = compare(suite, config.etas(), config.code, config.kinds)
    text = report.render() + "\n"
    out.write(text)
    if config.out is not None:
        try:
            config.out.write_text(text, encoding="utf-8")
        except OSError as exc:
            logger.error("cannot write %s: %s", config.out, exc)
            return EXIT_FAIL
    return EXIT_OK if report.agrees else EXIT_FAIL


def render_tables() -> str:
    lines = ["X corrections after the Z measurement, on (b0)(b1)(a1)(a2)", "a0 b2b3  op"]
    for v in range(8):
        z = tuple(int(b) for b in format(v, "03b"))
        lines.append(f"{z[0]}  {z[1]}{z[2]}    {x_correction(z)}")
    lines += ["", "Z corrections after the X measurement, on (b0)(b1)(a1)(a2)", "A0A1 B0B1  op"]
    for v in range(16):
        signs = tuple(SIGNS[int(b)] for b in format(v, "04b"))
        lines.append(f"{signs[0]}{signs[1]}   {signs[2]}{signs[3]}    {z_correction(signs)}")
    lines += ["", "Controller corrections, on (b0)(b1)(a1)(a2)", "code c  op"]
    for code in all_codes():
        for sign in SIGNS:
            lines.append(f"{code}  {sign}  {' OR '.join(final_corrections(code, sign))}")
    return "\n".join(lines) + "\n"


def cmd_tables(out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    out.write(render_tables())
    return EXIT_OK


# -- argument parsing -------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcqt", description="Simulate and verify eight-qubit bidirectional controlled teleportation."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("verify-channel", help="compare all eight channel variants with the table")
    vp = sub.add_parser("verify-protocol", help="run every branch for every code on a payload suite")
    vp.add_argument("--seed", type=int, default=0, help="seed for the random payloads")
    _add_amplitudes(vp, default=None)

    for name, help_text in (
        ("sweep", "fidelity versus decoherence rate as CSV"),
        ("compare", "max gap between simulated and closed-form output"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--kind", choices=("ad", "pd", "both"), default="both")
        p.add_argument("--eta-start", type=float, default=0.0)
        p.add_argument("--eta-stop", type=float, default=1.0)
        p.add_argument("--steps", type=int, default=21)
        p.add_argument("--code", default="001")
        p.add_argument("--out", type=Path)
        p.add_argument("--seed", type=int, default=0)
        _add_amplitudes(p, default=None)

    sub.add_parser("tables", help="print the implemented correction tables")
    return parser


def _add_amplitudes(parser: argparse.ArgumentParser, default: Optional[float]) -> None:
    for flag in ("alpha0", "alpha1", "beta00", "beta01", "beta10", "beta11"):
        parser.add_argument(f"--{flag}", type=float, default=default)


def _amplitudes(args: argparse.Namespace) -> Optional[tuple[tuple[float, ...], tuple[float, ...]]]:
    alpha = (args.alpha0, args.alpha1)
    beta = (args.beta00, args.beta01, args.beta10, args.beta11)
    given = [v is not None for v in alpha + beta]
    if not any(given):
        return None
    # unspecified amplitudes default to zero once any is given
    return tuple(v or 0.0 for v in alpha), tuple(v or 0.0 for v in beta)


def _config(args: argparse.Namespace) -> SweepConfig:
    kinds = tuple(NoiseKind) if args.kind == "both" else (NoiseKind.parse(args.kind),)
    config = SweepConfig(
        kinds=kinds, eta_start=args.eta_start, eta_stop=args.eta_stop, eta_steps=args.steps,
        code=args.code, out=args.out, seed=args.seed,
    )
    amps = _amplitudes(args)
    if amps is not None:
        config.alpha, config.beta = amps
        config.explicit_inputs = True
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "verify-channel":
            return cmd_verify_channel()
        if args.command == "verify-protocol":
            amps = _amplitudes(args)
            if amps is None:
                return cmd_verify_protocol(seed=args.seed)
            config = SweepConfig(alpha=amps[0], beta=amps[1])
            return cmd_verify_protocol([config.validate()])
        if args.command == "tables":
            return cmd_tables()
        config = _config(args)
        if args.command == "sweep":
            return cmd_sweep(config)
        return cmd_compare(config)
    except ConfigError as exc:
        print(f"bcqt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
