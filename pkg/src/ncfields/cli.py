"""Command-line front end: parameter sweeps written as CSV or JSON tables.

Tables go to ``--out``, to ``$NCFIELDS_OUTPUT_DIR/<default name>`` when
that variable is set, or to standard output.  Summaries and diagnostics go
to standard error.

Exit codes: 0 success, 1 tolerance violation or step failure, 2 usage
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Callable, Iterable, Sequence

import numpy as np

from . import chiral_edge as ce
from .dynamics import (
    exact_evolve,
    frequency_bin,
    frequency_extract,
    max_stable_step,
    midpoint_evolve,
)
from .errors import InvalidModelError, StepFailureError
from .spectra import closed_form_spectrum, oracle_spectrum, spectrum_deviation
from .symplectic_core import DeformationKind, DeformationParams, canonicalization_residual
from .textio import format_float, format_table, parse_record

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2
EXIT_IO = 3

OUTPUT_DIR_ENV = "NCFIELDS_OUTPUT_DIR"

SPECTRUM_TOL = 1e-8
DRESSING_TOL = 1e-12
DISPERSION_TOL = 1e-12

SPECTRUM_COLUMNS = (
    "kind",
    "theta",
    "n",
    "closed_minus",
    "closed_plus",
    "oracle_minus",
    "oracle_plus",
    "deviation",
    "stable",
)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------


def parse_float_list(text: str) -> list[float]:
    """Comma-separated reals, e.g. ``0,0.5,-1``."""
    try:
        values = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc
    if not values or not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError(f"need at least one finite number: {text!r}")
    return values


def parse_int_range(text: str) -> list[int]:
    """Integers as ``a..b`` (inclusive), ``a:b`` (inclusive) or ``a,b,c``."""
    text = str(text).strip()
    try:
        for sep in ("..", ":"):
            if sep in text:
                lo, hi = (int(v) for v in text.split(sep, 1))
                values = list(range(lo, hi + 1))
                break
        else:
            values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer range: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError(f"empty integer range: {text!r}")
    return values


def parse_state(text: str) -> list[float]:
    values = parse_float_list(text)
    if len(values) != 4:
        raise argparse.ArgumentTypeError("state needs four numbers q1,q2,p1,p2")
    return values


def _kinds(choice: str) -> list[DeformationKind]:
    if choice == "both":
        return [DeformationKind.E_DEFORMED, DeformationKind.B_DEFORMED]
    return [DeformationKind.parse(choice)]


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _emit(args: argparse.Namespace, default_name: str, header, rows) -> None:
    text = format_table(header, list(rows), args.format)
    path = args.out
    if path is None and os.environ.get(OUTPUT_DIR_ENV):
        ext = "json" if args.format == "json" else "csv"
        path = os.path.join(os.environ[OUTPUT_DIR_ENV], f"{default_name}.{ext}")
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _note(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_spectrum(args: argparse.Namespace) -> int:
    rows = []
    worst = 0.0
    for kind in _kinds(args.kind):
        for theta in args.theta:
            params = DeformationParams(kind, theta)
            for n in args.n:
                if n == 0:
                    raise UsageError("mode n = 0 has no oscillation frequencies")
                closed = closed_form_spectrum(params, n, doubled_splitting=args.doubled_splitting)
                oracle = oracle_spectrum(params, n)
                dev = spectrum_deviation(closed, oracle)
                worst = max(worst, dev)
                rows.append(
                    (
                        kind.value,
                        theta,
                        n,
                        closed.omega_minus,
                        closed.omega_plus,
                        oracle.omega_minus,
                        oracle.omega_plus,
                        dev,
                        closed.stable,
                    )
                )
    _emit(args, "spectrum", SPECTRUM_COLUMNS, rows)
    _note(f"max deviation {format_float(worst)} (tolerance {format_float(args.tol)})")
    return EXIT_TOLERANCE if worst > args.tol else EXIT_OK


def cmd_dressing_check(args: argparse.Namespace) -> int:
    n_modes = args.n_max
    if n_modes < 1:
        raise UsageError("--n-max must be >= 1")
    rows = []
    ok = True
    for kind in _kinds(args.kind):
        for theta in args.theta:
            res = canonicalization_residual(DeformationParams(kind, theta), n_modes)
            passed = res < DRESSING_TOL
            ok = ok and passed
            rows.append((kind.value, theta, n_modes, res, passed))
    _emit(args, "dressing", ("kind", "theta", "n_modes", "residual", "ok"), rows)
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_evolve(args: argparse.Namespace) -> int:
    if args.kind == "both":
        raise UsageError("evolve needs a single --kind")
    if len(args.theta) != 1 or len(args.n) != 1:
        raise UsageError("evolve needs a single --theta and a single --n")
    if not (args.dt > 0 and args.t_end > 0):
        raise UsageError("--dt and --t-end must be positive")
    params = DeformationParams(DeformationKind.parse(args.kind), args.theta[0])
    n = args.n[0]
    steps = int(round(args.t_end / args.dt))
    if steps < 1:
        raise UsageError("--t-end must be at least one step long")
    limit = max_stable_step(params, n)
    try:
        if args.dt >= limit:
            raise StepFailureError(
                f"dt={args.dt!r} exceeds the step limit 2/||K|| = {format_float(limit)}"
            )
        if args.method == "midpoint":
            traj = midpoint_evolve(params, n, args.state, args.dt, steps)
        else:
            traj = exact_evolve(params, n, args.state, args.dt * np.arange(steps + 1))
    except StepFailureError as exc:
        _note(f"step failure: {exc}")
        return EXIT_TOLERANCE

    with_energy = ((t, *x, h) for t, x, h in zip(traj.times, traj.states, traj.energy))
    _emit(args, "trajectory", ("t", "q1", "q2", "p1", "p2", "H"), with_energy)

    drift = traj.energy_drift()
    _note(f"energy drift {format_float(drift)}")
    if len(traj) >= 256:
        peaks = frequency_extract(traj)
        _note(f"fft bin {format_float(frequency_bin(traj))}")
        _note("fft peaks " + " ".join(format_float(w) for w in peaks))
    else:
        _note("fft peaks skipped (fewer than 256 samples)")
    if n != 0:
        closed = closed_form_spectrum(params, n)
        _note(f"closed form {format_float(closed.omega_minus)} {format_float(closed.omega_plus)}")
    return EXIT_TOLERANCE if drift > args.tol else EXIT_OK


def cmd_qhe_velocities(args: argparse.Namespace) -> int:
    if args.model is not None:
        try:
            with open(args.model, encoding="utf-8") as fh:
                model = ce.ChiralModel.from_text(fh.read())
        except OSError as exc:
            raise OSError(f"cannot read model file: {exc}") from exc
        rows = [(i + 1, v) for i, v in enumerate(ce.chiral_velocities(model))]
        _emit(args, "velocities", ("branch", "velocity"), rows)
        return EXIT_OK
    rows = []
    for theta in args.theta:
        v_left, v_right = ce.chiral_velocities(ce.edge_metric(theta))
        rows.append((theta, v_left, v_right, ce.theta_bar(theta)))
    _emit(args, "velocities", ("theta", "v_left", "v_right", "theta_bar"), rows)
    return EXIT_OK


def cmd_qhe_filling(args: argparse.Namespace) -> int:
    rows = []
    for m in args.m:
        for tb in args.theta_bar:
            if m < 0 or tb <= 0:
                raise UsageError("need m >= 0 and theta_bar > 0")
            res = ce.filling_factor(m, tb)
            rows.append((m, tb, res.exponent, res.nu))
    _emit(args, "filling", ("m", "theta_bar", "exponent", "nu"), rows)
    return EXIT_OK


def cmd_qhe_jain(args: argparse.Namespace) -> int:
    rows = []
    bad = 0
    for m in args.m:
        for p in args.p:
            if m < 0 or p < 1:
                raise UsageError("need m >= 0 and p >= 1")
            res = ce.jain_theta_bar(m, p, variant=args.variant)
            bad += not res.consistent
            rows.append(res.to_row())
    _emit(args, "jain", ce.JAIN_CSV_HEADER, rows)
    if bad:
        _note(f"{bad} of {len(rows)} rows miss the target filling p/(2m+p)")
    return EXIT_TOLERANCE if bad else EXIT_OK


def cmd_qhe_dispersion(args: argparse.Namespace) -> int:
    if min(args.n) < 1:
        raise UsageError("dispersion needs n >= 1")
    rows = []
    worst = 0.0
    n_max = max(args.n)
    for theta in args.theta:
        oracle = ce.dispersion_oracle(theta, n_max)
        for n in args.n:
            e = ce.nonlinear_dispersion(theta, n)
            dev = abs(e - oracle[n - 1]) / e
            worst = max(worst, dev)
            rows.append((theta, n, e, oracle[n - 1], dev))
    _emit(args, "dispersion", ("theta", "n", "energy", "oracle", "rel_deviation"), rows)
    return EXIT_TOLERANCE if worst > DISPERSION_TOL else EXIT_OK


def cmd_qhe_phases(args: argparse.Namespace) -> int:
    rows = []
    for m in args.m:
        if m < 0:
            raise UsageError("need m >= 0")
        for theta in args.theta:
            for s in ce.SECTORS:
                for sp in ce.SECTORS:
                    for pos in (1, -1):
                        z = ce.statistical_phase(m, theta, s, sp, pos)
                        rows.append((m, theta, s, sp, pos, z.real, z.imag))
    _emit(args, "phases", ("m", "theta", "s", "s_prime", "position_sign", "re", "im"), rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(
    *,
    kind: str | None = None,
    theta: str = "0,0.5,1",
    n: str | None = None,
    with_tol: float | None = None,
) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="flat key=value file supplying defaults")
    p.add_argument("--out", help="output file (default: $%s/<name> or stdout)" % OUTPUT_DIR_ENV)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    if kind is not None:
        p.add_argument("--kind", choices=("E", "B", "both"), default=kind)
    p.add_argument("--theta", type=parse_float_list, default=theta, help="comma-separated values")
    if n is not None:
        p.add_argument("--n", type=parse_int_range, default=n, help="a..b, a:b or a,b,c")
    if with_tol is not None:
        p.add_argument("--tol", type=float, default=with_tol)
    return p


def build_parser() -> tuple[argparse.ArgumentParser, list[argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="ncfields",
        description="Spectra, dynamics and edge-mode tables for deformed symplectic field models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    leaves: list[argparse.ArgumentParser] = []

    p = sub.add_parser(
        "spectrum",
        parents=[_common(kind="both", n="1..8", with_tol=SPECTRUM_TOL)],
        help="closed-form and oracle mode frequencies",
    )
    p.add_argument(
        "--doubled-splitting",
        action="store_true",
        help="use the splitting theta*n^2 for E-kind (does not solve the dynamics)",
    )
    p.set_defaults(func=cmd_spectrum)
    leaves.append(p)

    p = sub.add_parser(
        "dressing-check",
        parents=[_common(kind="both", theta="-10,-1,-0.1,0,0.1,1,10")],
        help="pullback residual of the dressing map",
    )
    p.add_argument("--n-max", type=int, default=8, help="number of mode blocks")
    p.set_defaults(func=cmd_dressing_check)
    leaves.append(p)

    p = sub.add_parser(
        "evolve",
        parents=[_common(kind="B", theta="1", n="1", with_tol=1e-8)],
        help="time evolution of one mode block",
    )
    p.add_argument("--state", type=parse_state, default="1,0,0,0", help="q1,q2,p1,p2")
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--t-end", type=float, default=100.0)
    p.add_argument("--method", choices=("exact", "midpoint"), default="exact")
    p.set_defaults(func=cmd_evolve)
    leaves.append(p)

    qhe = sub.add_parser("qhe", help="chiral edge and quantum Hall tables")
    qsub = qhe.add_subparsers(dest="qhe_command", required=True)

    q = qsub.add_parser("velocities", parents=[_common(theta="0,0.5,1,3")])
    q.add_argument("--model", help="model file in key=value form (kind, N, theta, omega)")
    q.set_defaults(func=cmd_qhe_velocities)
    leaves.append(q)

    q = qsub.add_parser("filling", parents=[_common()])
    q.add_argument("--m", type=parse_int_range, default="0..3")
    q.add_argument("--theta-bar", type=parse_float_list, default="1")
    q.set_defaults(func=cmd_qhe_filling)
    leaves.append(q)

    q = qsub.add_parser("jain", parents=[_common()])
    q.add_argument("--m", type=parse_int_range, default="1..3")
    q.add_argument("--p", type=parse_int_range, default="1..5")
    q.add_argument("--variant", choices=ce.JAIN_VARIANTS, default="published")
    q.set_defaults(func=cmd_qhe_jain)
    leaves.append(q)

    q = qsub.add_parser("dispersion", parents=[_common(theta="0,0.5,1", n="1..4")])
    q.set_defaults(func=cmd_qhe_dispersion)
    leaves.append(q)

    q = qsub.add_parser("phases", parents=[_common(theta="0,0.3,1")])
    q.add_argument("--m", type=parse_int_range, default="0..3")
    q.set_defaults(func=cmd_qhe_phases)
    leaves.append(q)

    return parser, leaves


def _find_config(argv: Sequence[str]) -> str | None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(list(argv))
    return known.config


def _apply_config(path: str, leaves: Iterable[argparse.ArgumentParser]) -> None:
    with open(path, encoding="utf-8") as fh:
        record = parse_record(fh.read())
    values = {k.replace("-", "_"): v for k, v in record.items()}
    known = set()
    for leaf in leaves:
        dests = {a.dest for a in leaf._actions}
        known |= dests
        leaf.set_defaults(**{k: v for k, v in values.items() if k in dests})
    unknown = sorted(set(values) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, leaves = build_parser()
    try:
        config = _find_config(argv)
        if config is not None:
            _apply_config(config, leaves)
    except UsageError as exc:
        _note(f"ncfields: error: {exc}")
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        _note(f"ncfields: error: cannot load config: {exc}")
        return EXIT_IO if isinstance(exc, OSError) else EXIT_USAGE

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    func: Callable[[argparse.Namespace], int] = args.func
    try:
        return func(args)
    except (UsageError, InvalidModelError, ValueError) as exc:
        _note(f"ncfields: error: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _note(f"ncfields: I/O error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
