"""Command-line interface: ``qsd validate|trajectory|yaglom|sst|basins|cycle|example``.

Exit codes: 0 success, 2 validation or configuration error, 3 method
precondition failure, 4 degenerate input (alpha equal to pi), 1 numerical
failure. Errors are reported on stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

import numpy as np

from . import io as qio
from .chain import check_reversibility, reversible_chain, stationary_distribution
from .conditioning import conditional_trajectory, separation_profile
from .dynamics import BURN_IN, CYCLE_TOL, MAX_PERIOD, detect_cycle
from .errors import DegenerateInput, NotReversible, NumericalError, PreconditionError, QsdError, UnsupportedDimension, ValidationError
from .spectral import eigendecompose
from .sst import sst_profile
from .yaglom import classify_basins, yaglom_limit
from .zoo import FwParams, make_fw, make_nonrev_four, make_nonrev_triangle, make_triangle, make_two_block

EXIT_OK, EXIT_NUMERICAL, EXIT_VALIDATION, EXIT_PRECONDITION, EXIT_DEGENERATE = 0, 1, 2, 3, 4
DEFAULT_STEPS = 200


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags already; keep the JSON error format
    def error(self, message):
        _emit_error("UsageError", message, EXIT_VALIDATION)
        raise SystemExit(EXIT_VALIDATION)


def _emit_error(kind: str, message: str, code: int, hint: Optional[str] = None) -> None:
    err = {"error": kind, "message": message, "exit_code": code}
    if hint:
        err["hint"] = hint
    sys.stderr.write(qio.dumps(err, indent=None) + "\n")


def _exit_code(exc: QsdError) -> int:
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, PreconditionError):
        return EXIT_PRECONDITION
    if isinstance(exc, DegenerateInput):
        return EXIT_DEGENERATE
    return EXIT_NUMERICAL


def _alpha(args, n):
    return qio.parse_alpha(args.alpha, n)


def _spectrum_or_none(kernel, pi):
    try:
        chain = reversible_chain(kernel, pi)
        return chain, eigendecompose(chain, lazy=None)
    except PreconditionError:
        return None, None


def cmd_validate(args) -> str:
    kernel = qio.load_kernel(args.kernel)
    pi = stationary_distribution(kernel)
    reversible, violation = check_reversibility(kernel, pi)
    report = {
        "valid": True,
        "n": kernel.n,
        "irreducible": kernel.irreducible,
        "aperiodic": kernel.aperiodic,
        "reversible": reversible,
        "detailed_balance_violation": violation,
        "pi": pi,
    }
    if reversible:
        chain = reversible_chain(kernel, pi)
        report["positive_spectrum"] = chain.positive_spectrum
        try:
            spec = eigendecompose(chain, lazy=0.5 if not chain.positive_spectrum else None)
            report["eigenvalues"] = spec.eigenvalues
            report["spectrum_of_lazy_chain"] = spec.lazy_gamma is not None
        except NumericalError as exc:
            report["eigenvalues"] = None
            report["eigensolver_error"] = str(exc)
    else:
        report["positive_spectrum"] = None
        report["eigenvalues"] = None
    return qio.dumps(report)


def cmd_trajectory(args) -> str:
    kernel = qio.load_kernel(args.kernel)
    alpha = _alpha(args, kernel.n)
    traj, profile = conditional_trajectory(alpha, kernel, args.steps)
    if args.format == "json":
        return qio.dumps(
            {
                "s": profile.s,
                "mu": traj.mu,
                "phi": traj.phi,
                "terminated_at": traj.terminated_at,
            }
        )
    return qio.trajectory_csv(traj, profile)


def _reversible(kernel):
    try:
        return reversible_chain(kernel)
    except NotReversible as exc:
        raise NotReversible(f"{exc}; the spectral formula needs a reversible chain") from None


def cmd_yaglom(args) -> str:
    kernel = qio.load_kernel(args.kernel)
    alpha = _alpha(args, kernel.n)
    chain = _reversible(kernel)
    report = yaglom_limit(alpha, chain, lazy=args.lazy)
    return qio.dumps(qio.yaglom_to_dict(report))


def cmd_sst(args) -> str:
    kernel = qio.load_kernel(args.kernel)
    alpha = _alpha(args, kernel.n)
    prof = sst_profile(separation_profile(alpha, kernel, args.steps))
    if args.format == "json":
        return qio.dumps(qio.sst_to_dict(prof))
    return qio.sst_csv(prof)


def cmd_basins(args) -> str:
    kernel = qio.load_kernel(args.kernel)
    if kernel.n != 3:
        raise UnsupportedDimension(f"basins are defined for 3 states, got {kernel.n}")
    chain = _reversible(kernel)
    bm = classify_basins(chain, args.resolution, lazy=args.lazy, workers=args.workers)
    if args.format == "json":
        return qio.dumps(
            {
                "resolution": bm.resolution,
                "classes": bm.classes,
                "counts": bm.counts(),
                "probes": bm.probes,
                "class_ids": bm.class_ids,
                "lambda_alpha": bm.lambdas,
                "skipped": bm.skipped,
            }
        )
    return qio.basins_csv(bm)


def cmd_cycle(args) -> str:
    kernel = qio.load_kernel(args.kernel)
    alpha = _alpha(args, kernel.n)
    T = max(args.steps, args.burn_in + 2 * args.max_period)
    traj, _ = conditional_trajectory(alpha, kernel, T)
    report = detect_cycle(traj, burn_in=args.burn_in, max_period=args.max_period, tol=args.tol)
    return qio.dumps(qio.cycle_to_dict(report))


def cmd_example(args) -> str:
    name = args.name
    if name == "triangle":
        kernel = make_triangle().kernel
    elif name == "two-block":
        kernel = make_two_block(args.n, args.epsilon, args.gamma).kernel
    elif name == "fw":
        if args.rates is not None:
            params = FwParams.from_rates(*args.rates, beta=args.beta)
        else:
            params = FwParams(args.beta, tuple(args.deltas))
        kernel = make_fw(params).kernel
    elif name == "nonrev3":
        kernel = make_nonrev_triangle(args.p)
    else:
        kernel = make_nonrev_four(args.epsilon)
    return qio.dumps(qio.kernel_to_dict(kernel))


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="qsd", description="Yaglom limits and strong stationary times of finite Markov chains.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, alpha=True, steps=True):
        p.add_argument("--kernel", required=True, help="kernel JSON file", default=argparse.SUPPRESS)
        if alpha:
            p.add_argument("--alpha", default="dirac:0", help="initial law: JSON file, 'dirac:k' (0-based) or 'uniform'")
        if steps:
            p.add_argument("--steps", type=int, default=DEFAULT_STEPS, help="horizon T")
        p.add_argument("--out", default=None, help="output file; stdout if omitted")

    p = sub.add_parser("validate", help="check a kernel and summarize it", formatter_class=fmt)
    common(p, alpha=False, steps=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("trajectory", help="separation and conditional laws", formatter_class=fmt)
    common(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("yaglom", help="spectral Yaglom limit", formatter_class=fmt)
    common(p, steps=False)
    p.add_argument("--lazy", type=float, nargs="?", const=0.5, default=None, help="lazy gamma if the spectrum is not positive")
    p.set_defaults(func=cmd_yaglom, format="json")

    p = sub.add_parser("sst", help="law of the optimal strong stationary time", formatter_class=fmt)
    common(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    p.set_defaults(func=cmd_sst)

    p = sub.add_parser("basins", help="basins of attraction on a 3-state simplex", formatter_class=fmt)
    common(p, alpha=False, steps=False)
    p.add_argument("--resolution", type=int, default=100, help="grid points per simplex edge")
    p.add_argument("--lazy", type=float, nargs="?", const=0.5, default=None, help="lazy gamma if the spectrum is not positive")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    p.set_defaults(func=cmd_basins)

    p = sub.add_parser("cycle", help="period detection for the conditional laws", formatter_class=fmt)
    common(p)
    p.add_argument("--burn-in", type=int, default=BURN_IN, help="steps discarded before the search")
    p.add_argument("--max-period", type=int, default=MAX_PERIOD, help="largest period tried")
    p.add_argument("--tol", type=float, default=CYCLE_TOL, help="sup-norm tolerance for a repeat")
    p.set_defaults(func=cmd_cycle)

    p = sub.add_parser("example", help="emit a fixture kernel as JSON", formatter_class=fmt)
    p.add_argument("name", choices=("triangle", "two-block", "fw", "nonrev3", "nonrev4"))
    p.add_argument("--n", type=int, default=4, help="two-block: block size")
    p.add_argument("--epsilon", type=float, default=0.1, help="two-block, nonrev4")
    p.add_argument("--gamma", type=float, default=0.3, help="two-block: laziness")
    p.add_argument("--beta", type=float, default=8.0, help="fw: inverse temperature")
    p.add_argument("--deltas", type=float, nargs=4, default=[2.0, 3.0, 1.0, 2.0], metavar="D", help="fw: barriers")
    p.add_argument("--rates", type=float, nargs=4, default=None, metavar="R", help="fw: a b c d directly")
    p.add_argument("--p", type=float, default=0.9, help="nonrev3: rotation strength")
    p.add_argument("--out", default=None, help="output file; stdout if omitted")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = args.func(args)
    except QsdError as exc:
        code = _exit_code(exc)
        hint = None
        if isinstance(exc, NotReversible) and args.command in ("yaglom", "basins"):
            hint = "the chain is not reversible; run `qsd cycle` to inspect the conditional laws instead"
        elif args.command == "yaglom" and isinstance(exc, PreconditionError):
            hint = "pass --lazy to analyse the lazy chain (gamma = 0.5 by default)"
        _emit_error(type(exc).__name__, str(exc), code, hint)
        return code
    qio.write_text(text, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
