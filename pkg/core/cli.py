"""
Command-line front end

    check FILE        all certificates as a JSON report
    iterate FILE      trajectory of V as CSV rows plus a terminal line
    scan-abc          (a, b, c) grid sweep as CSV
    witness FILE      best Kadison-Schwarz witness with its dense matrix

Exit codes: 0 success, 2 parse or usage error, 3 internal consistency
fault. witness exits 1 when no violation was found.
"""
from __future__ import annotations
import sys
import logging
import argparse
from typing import Any, Dict, List, Optional, Sequence, TextIO

import numpy as np
import pandas as pd
from pydantic import ValidationError

from .config import Settings, load_settings
from .dynamics import certificates, dynamics_class, iterate
from .families import AbcParams, abc_regime, abc_to_tensor, check_bb5, not_ks_predicate
from .ks_cert import KsCertError, ef_difference, ks_difference_matrix, ks_oracle, ks_scan
from .linalg import LinalgError, eig_hermitian
from .models import StateVec
from .operator_file import OperatorFileError, read_operator_file
from .pauli import pauli_to_dense
from .report import FLOAT_FORMAT, ReportError, build_report, dumps_report, to_jsonable, witness_block, write_report
from .utils import map_ordered, parse_range, parse_vector

# Configure logging
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_FOUND = 1
EXIT_USAGE = 2
EXIT_FAULT = 3

SCAN_COLUMNS = [
    "a", "b", "c", "bb5", "e14", "e15", "not_ks", "regime", "dynamics_class", "ks_worst_margin",
]


class CliError(Exception):
    """Invalid command-line input detected after argument parsing"""
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qqo",
        description="Certify positivity and Kadison-Schwarz properties of quantum quadratic "
                    "operators on 2x2 matrices and classify their Bloch-ball dynamics.",
    )
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level (stderr)")
    parser.add_argument("--config", default=None, help="JSON settings file")
    parser.add_argument("--workers", type=int, default=None, help="Worker threads for sample scans")

    sub = parser.add_subparsers(dest="command", required=True)

    def sampling_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=None, help="Seed (unsigned 64-bit)")
        p.add_argument("--samples", type=int, default=None, help="Random (f, w) pairs for the KS scan")

    check = sub.add_parser("check", help="Run all certificates on an operator file")
    check.add_argument("file")
    sampling_flags(check)
    check.add_argument("--format", choices=["json"], default="json")
    check.add_argument("--output", default=None, help="Write the report to this file instead of stdout")

    it = sub.add_parser("iterate", help="Iterate V from an initial state")
    it.add_argument("file")
    it.add_argument("--init", required=True, help="Initial state f1,f2,f3")
    it.add_argument("--steps", type=int, default=None)
    it.add_argument("--tol", type=float, default=None)
    it.add_argument("--format", choices=["csv", "json"], default="csv")

    scan = sub.add_parser("scan-abc", help="Sweep the (a, b, c) family")
    scan.add_argument("--a", default="0", help="lo:hi:step, lo:hi (with --grid) or a value")
    scan.add_argument("--b", default="0")
    scan.add_argument("--c", default="0")
    scan.add_argument("--grid", type=int, default=None, help="Points per lo:hi range")
    sampling_flags(scan)
    scan.add_argument("--format", choices=["csv"], default="csv")

    witness = sub.add_parser("witness", help="Search for a Kadison-Schwarz witness")
    witness.add_argument("file")
    sampling_flags(witness)
    witness.add_argument("--format", choices=["json"], default="json")
    return parser


def _settings_from_args(args: argparse.Namespace) -> Settings:
    return load_settings(
        args.config,
        seed=getattr(args, "seed", None),
        ks_pairs=getattr(args, "samples", None),
        workers=args.workers,
        steps=getattr(args, "steps", None),
        tol=getattr(args, "tol", None),
    )


def cmd_check(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    parsed = read_operator_file(args.file)
    report = build_report(parsed, settings=settings)
    if args.output:
        write_report(args.output, report)
        logger.info("Report written to %s", args.output)
    else:
        out.write(dumps_report(report))
    return EXIT_OK


def cmd_iterate(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    parsed = read_operator_file(args.file)
    try:
        f0 = StateVec(parse_vector(args.init), slack=settings.tolerances.state_norm)
    except ValueError as e:
        raise CliError(f"Invalid --init: {e}")

    trajectory = iterate(parsed.tensor, f0, settings=settings)
    points = np.array(trajectory.points)
    limit = trajectory.limit

    if args.format == "json":
        payload = {"points": points, "terminal": trajectory.terminal, "limit": limit}
        out.write(dumps_report(payload))
        return EXIT_OK

    frame = pd.DataFrame({
        "n": np.arange(len(points)),
        "f1": points[:, 0],
        "f2": points[:, 1],
        "f3": points[:, 2],
        "norm": np.linalg.norm(points, axis=1),
    })
    out.write(frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))
    terminal = f"terminal,{trajectory.terminal}"
    if limit is not None:
        terminal += "," + ",".join(FLOAT_FORMAT % v for v in limit)
    out.write(terminal + "\n")
    return EXIT_OK


def _scan_row(point: Sequence[float], settings: Settings) -> Dict[str, Any]:
    params = AbcParams(a=point[0], b=point[1], c=point[2])
    tensor = abc_to_tensor(params)
    not_ks = not_ks_predicate(params, settings=settings)
    ks = ks_scan(tensor, settings=settings)
    return {
        "a": params.a,
        "b": params.b,
        "c": params.c,
        "bb5": str(check_bb5(params, settings=settings).verdict).lower(),
        "e14": not_ks.e14,
        "e15": not_ks.e15,
        "not_ks": str(not_ks.proved_not_ks).lower(),
        "regime": abc_regime(params, settings=settings),
        "dynamics_class": dynamics_class(certificates(tensor, settings=settings)),
        "ks_worst_margin": ks.best.margin,
    }


def cmd_scan_abc(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    try:
        axes = [parse_range(r, args.grid) for r in (args.a, args.b, args.c)]
    except ValueError as e:
        raise CliError(str(e))
    points = [(a, b, c) for a in axes[0] for b in axes[1] for c in axes[2]]
    if not points:
        raise CliError("The parameter grid is empty")

    inner = settings.model_copy(update={"workers": 1})
    rows = map_ordered(lambda p: _scan_row(p, inner), points, settings.workers)
    frame = pd.DataFrame(rows, columns=SCAN_COLUMNS)
    out.write(frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))
    return EXIT_OK


def cmd_witness(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    parsed = read_operator_file(args.file)
    report = ks_scan(parsed.tensor, settings=settings)
    best = report.best
    x = best.element()
    ef = pauli_to_dense(ef_difference(parsed.tensor, best.f, x))

    payload: Dict[str, Any] = {
        "operator": {"file": parsed.path, "sha256": parsed.sha256},
        "seed": settings.seed,
        "samples": settings.ks_pairs,
        "found": report.violation_found,
        "channel": best.channel,
        "witness": witness_block(best),
        "dense_min_eigenvalue": ks_oracle(parsed.tensor, x, settings=settings),
        "ef_min_eigenvalue": float(eig_hermitian(ef, settings=settings)[0]),
        "dense_matrix": ks_difference_matrix(parsed.tensor, x),
        "oracle": witness_block(report.worst["oracle"]),
    }
    out.write(dumps_report(to_jsonable(payload)))
    return EXIT_OK if report.violation_found else EXIT_NOT_FOUND


COMMANDS = {
    "check": cmd_check,
    "iterate": cmd_iterate,
    "scan-abc": cmd_scan_abc,
    "witness": cmd_witness,
}


def main(argv: Optional[List[str]] = None, out: Optional[TextIO] = None) -> int:
    """
    Parse arguments, run the command and map failures to exit codes

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])
        out: Output stream for reports (defaults to stdout)

    Returns:
        Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_USAGE

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    out = out or sys.stdout

    try:
        settings = _settings_from_args(args)
        return COMMANDS[args.command](args, settings, out)
    except OperatorFileError as e:
        logger.error("Operator file error: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (CliError, ValidationError, FileNotFoundError, ReportError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (KsCertError, LinalgError) as e:
        logger.error("Internal consistency fault: %s", e)
        print(f"internal fault: {e}", file=sys.stderr)
        return EXIT_FAULT
