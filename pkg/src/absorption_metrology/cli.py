"""Command-line sweeps that write the figure datasets as CSV.

Examples::

    absorption-metrology fig2 --alpha 0.05 --from 1 --to 25 --points 25
    absorption-metrology fig6 --alpha 0.05 --nbar 25 --from 0 --to 0.9 --points 91 --out fig6.csv
    absorption-metrology fig7 --alpha 0.05 --alpha0 0,0.05,0.1 --from 5 --to 25
    absorption-metrology estimate --seed 42

A ``--config`` file holds ``key = value`` lines named like the long flags
(``alpha0 = 0.05``, ``from = 1``); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import counting, resilience, su11
from .errors import ConvergenceError, NotEstimableError, PreconditionError, SingularMatrixError
from .estimator import ExperimentConfig, crlb_check
from .gaussian import nbar_to_r, r_to_nbar

FIG2_HEADER = [
    "nbar",
    "delta_alpha_qfi",
    "delta_alpha_sql",
    "advantage_db_amplitude",
    "advantage_db_power",
    "advantage_db_fisher",
]
FIG4_HEADER = ["nbar", "delta_alpha_qfi", "delta_alpha_su11", "ratio"]
FIG6_HEADER = ["alpha0", "qfi_tmsv", "qfi_coherent", "ratio_db"]

_SWEEP_DEFAULTS = {
    "fig2": (1.0, 25.0, 25),
    "fig4": (1.0, 25.0, 25),
    "fig6": (0.0, 0.9, 91),
    "fig7": (5.0, 25.0, 21),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(header, rows, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def sweep_values(start: float, stop: float, points: int) -> np.ndarray:
    if not start < stop:
        raise PreconditionError(f"--from ({start}) must be below --to ({stop})")
    if points < 2:
        raise PreconditionError(f"--points must be at least 2, got {points}")
    return np.linspace(start, stop, points)


def _map(func, values, jobs: int):
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(func, values))
    return [func(v) for v in values]


def fig2_rows(alpha: float, nbars, jobs: int = 1):
    def row(nbar):
        qfi_bound = counting.ancilla_bound(nbar, alpha)
        sql = counting.standard_limit(nbar, alpha)
        gain = sql / qfi_bound
        fisher_gain = (nbar / (alpha * (1 - alpha))) / (nbar / (1 - alpha))
        return (
            nbar,
            qfi_bound,
            sql,
            10 * math.log10(gain),
            20 * math.log10(gain),
            10 * math.log10(fisher_gain),
        )

    return _map(row, nbars, jobs)


def fig4_rows(alpha: float, nbars, jobs: int = 1):
    def row(nbar):
        qfi_bound = counting.ancilla_bound(nbar, alpha)
        tr = su11.sensitivity(nbar_to_r(nbar), alpha)
        return (nbar, qfi_bound, tr, tr / qfi_bound)

    return _map(row, nbars, jobs)


def fig6_rows(alpha: float, nbar: float, alpha0s, jobs: int = 1):
    def row(alpha0):
        config = resilience.LossyProtocolConfig(nbar, alpha, alpha0)
        f_tmsv = resilience.qfi_tmsv(config)
        f_coh = resilience.qfi_coherent(config)
        return (alpha0, f_tmsv, f_coh, resilience.qfi_ratio_db(config))

    return _map(row, alpha0s, jobs)


def fig7_header(alpha0s):
    labels = [repr(float(a0)) for a0 in alpha0s]
    return (
        ["nbar"]
        + [f"delta_alpha_tr_alpha0_{x}" for x in labels]
        + [f"delta_alpha_coherent_alpha0_{x}" for x in labels]
    )


def fig7_rows(alpha: float, alpha0s, nbars, jobs: int = 1):
    def row(nbar):
        configs = [resilience.LossyProtocolConfig(nbar, alpha, a0) for a0 in alpha0s]
        tr = [resilience.tr_sensitivity_with_loss(c) for c in configs]
        coh = [resilience.coherent_baseline(c) for c in configs]
        return (nbar, *tr, *coh)

    return _map(row, nbars, jobs)


def read_config(path: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value file mirroring the flags")
    common.add_argument("--alpha", type=float, help="sample absorption")
    strength = common.add_mutually_exclusive_group()
    strength.add_argument("--nbar", type=float, help="photons per beam from the OPA")
    strength.add_argument("--r", type=float, help="squeezing strength, nbar = sinh^2 r")
    common.add_argument("--alpha0", type=_float_list, help="extra input loss (comma list for fig7)")
    common.add_argument("--points", type=_positive_int, help="number of sweep points")
    common.add_argument("--from", dest="start", type=float, help="sweep start")
    common.add_argument("--to", dest="stop", type=float, help="sweep stop")
    common.add_argument("--phi", type=float, default=0.0, help="OPA pump phase")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int, help="seed for the estimate subcommand")
    common.add_argument("--jobs", type=_positive_int, default=1, help="parallel sweep workers")

    parser = _Parser(
        prog="absorption-metrology",
        description="Precision limits for absorption estimation with squeezed probes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fig2", parents=[common], help="ancilla bound vs standard limit over nbar")
    sub.add_parser("fig4", parents=[common], help="ancilla bound vs SU(1,1) readout over nbar")
    sub.add_parser("fig6", parents=[common], help="QFI ratio in dB over alpha0")
    sub.add_parser("fig7", parents=[common], help="time-reversal precision under alpha0 over nbar")
    est = sub.add_parser("estimate", parents=[common], help="Monte Carlo MLE vs Cramér-Rao bound")
    est.add_argument("--shots", type=_positive_int, help="measurements per trial")
    est.add_argument("--trials", type=_positive_int, help="repetitions of the experiment")
    return parser


_CONFIG_TYPES = {
    "alpha": float,
    "nbar": float,
    "r": float,
    "alpha0": _float_list,
    "points": _positive_int,
    "from": float,
    "to": float,
    "phi": float,
    "out": str,
    "seed": int,
    "jobs": _positive_int,
    "shots": _positive_int,
    "trials": _positive_int,
}
_CONFIG_DEST = {"from": "start", "to": "stop"}


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        given = {a.split("=", 1)[0] for a in argv if a.startswith("--")}
        for key, raw in read_config(args.config).items():
            if key not in _CONFIG_TYPES:
                raise UsageError(f"unknown config key {key!r}")
            dest = _CONFIG_DEST.get(key, key)
            if f"--{key}" in given or (key in ("nbar", "r") and given & {"--nbar", "--r"}):
                continue
            try:
                setattr(args, dest, _CONFIG_TYPES[key](raw))
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
        if args.nbar is not None and args.r is not None:
            raise UsageError("give either nbar or r, not both")
    return args


def _fixed_nbar(args, default: float) -> float:
    if args.r is not None:
        return r_to_nbar(args.r)
    return default if args.nbar is None else args.nbar


def _sweep(args):
    start, stop, points = _SWEEP_DEFAULTS[args.command]
    return sweep_values(
        start if args.start is None else args.start,
        stop if args.stop is None else args.stop,
        points if args.points is None else args.points,
    )


def run(args, out) -> None:
    alpha = args.alpha
    if args.command == "fig2":
        alpha = 0.05 if alpha is None else alpha
        write_csv(FIG2_HEADER, fig2_rows(alpha, _sweep(args), args.jobs), out)
    elif args.command == "fig4":
        alpha = 0.05 if alpha is None else alpha
        write_csv(FIG4_HEADER, fig4_rows(alpha, _sweep(args), args.jobs), out)
    elif args.command == "fig6":
        alpha = 0.05 if alpha is None else alpha
        nbar = _fixed_nbar(args, 25.0)
        write_csv(FIG6_HEADER, fig6_rows(alpha, nbar, _sweep(args), args.jobs), out)
    elif args.command == "fig7":
        alpha = 0.05 if alpha is None else alpha
        alpha0s = [0.0, 0.05, 0.1] if args.alpha0 is None else args.alpha0
        rows = fig7_rows(alpha, alpha0s, _sweep(args), args.jobs)
        write_csv(fig7_header(alpha0s), rows, out)
    elif args.command == "estimate":
        config = ExperimentConfig(
            nbar=_fixed_nbar(args, 5.0),
            alpha_true=0.1 if alpha is None else alpha,
            shots=10_000 if args.shots is None else args.shots,
            trials=200 if args.trials is None else args.trials,
            seed=42 if args.seed is None else args.seed,
        )
        report = crlb_check(config, workers=args.jobs)
        json.dump(report.to_dict(), out, indent=2)
        out.write("\n")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        buffer = io.StringIO()
        run(args, buffer)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buffer.getvalue())
        else:
            sys.stdout.write(buffer.getvalue())
    except (
        PreconditionError,
        NotEstimableError,
        SingularMatrixError,
        ConvergenceError,
        UsageError,
        OSError,
    ) as exc:
        message = " ".join(str(exc).split())
        print(f"error: {message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
