"""Command-line front end: CSV evidence in, one JSON object out.

Input is one record per line, ``p,weight`` or just ``p`` (weight defaults
to 1), from a file or standard input.  ``wfisher combine`` prints the
combined result; ``wfisher check`` additionally runs the Monte Carlo
estimator and reports the z-score between the analytic and simulated
values.

Exit codes: 0 success, 1 invalid input or usage, 2 conditioning failure,
3 analytic/Monte-Carlo mismatch (check only).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from typing import IO

from .core import CombineOptions, WeightedEvidence, combine
from .errors import ConditioningError, InvalidEvidenceError, MethodError, WFisherError
from .oracle import mc_tail

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CONDITIONING = 2
EXIT_MISMATCH = 3

_Z_LIMIT = 4.0


@dataclass(frozen=True)
class InputRecord:
    """One parsed evidence line."""

    p: float
    w: float = 1.0

    @classmethod
    def parse(cls, fields: list[str], line_no: int) -> "InputRecord":
        if not 1 <= len(fields) <= 2:
            raise InvalidEvidenceError(
                f"line {line_no}: expected 'p' or 'p,weight', got {len(fields)} fields"
            )
        try:
            p = float(fields[0])
        except ValueError:
            raise InvalidEvidenceError(
                f"line {line_no}: p-value {fields[0]!r} is not a number"
            ) from None
        if math.isnan(p) or math.isinf(p) or not 0.0 < p <= 1.0:
            raise InvalidEvidenceError(
                f"line {line_no}: p-value must be in (0, 1], got {fields[0]}"
            )
        w = 1.0
        if len(fields) == 2:
            try:
                w = float(fields[1])
            except ValueError:
                raise InvalidEvidenceError(
                    f"line {line_no}: weight {fields[1]!r} is not a number"
                ) from None
            if math.isnan(w) or math.isinf(w) or w <= 0.0:
                raise InvalidEvidenceError(
                    f"line {line_no}: weight must be positive and finite, got {fields[1]}"
                )
        return cls(p=p, w=w)


def read_evidence(stream: IO[str]) -> WeightedEvidence:
    """Parse CSV records into evidence, reporting errors by line number."""
    records = []
    for line_no, fields in enumerate(csv.reader(stream), start=1):
        if not fields or (len(fields) == 1 and not fields[0].strip()):
            continue  # blank line
        rec = InputRecord.parse([f.strip() for f in fields], line_no)
        records.append((rec.p, rec.w))
    if not records:
        raise InvalidEvidenceError("no input records found")
    return WeightedEvidence(tuple(records))


def _open_input(path: str):
    if path == "-":
        return sys.stdin, False
    return open(path, "r", encoding="utf-8"), True


def _options_from_args(args: argparse.Namespace) -> CombineOptions:
    return CombineOptions(
        method=args.method,
        rel_tol=args.tol,
        fallback_mc=args.fallback_mc,
        mc_samples=args.mc_samples,
        mc_seed=args.seed,
    )


def _emit(payload: dict) -> None:
    # json.dumps renders floats with repr(): the shortest digit string that
    # round-trips, so identical inputs give byte-identical output
    sys.stdout.write(json.dumps(payload) + "\n")


def run_combine(args: argparse.Namespace) -> int:
    stream, owned = _open_input(args.input)
    try:
        evidence = read_evidence(stream)
    finally:
        if owned:
            stream.close()
    result = combine(evidence, _options_from_args(args))
    _emit(result.as_dict())
    return EXIT_OK


def run_check(args: argparse.Namespace) -> int:
    stream, owned = _open_input(args.input)
    try:
        evidence = read_evidence(stream)
    finally:
        if owned:
            stream.close()
    result = combine(evidence, _options_from_args(args))
    p_analytic = result.p_combined
    if args.corrupt_analytic:  # negative-control hook for the test suite
        p_analytic = min(1.0, p_analytic + 0.25)
    estimate = mc_tail(evidence.weights, result.statistic.value, args.mc_samples, args.seed)
    z = estimate.z_score(p_analytic)
    _emit(
        {
            "p_analytic": p_analytic,
            "p_mc": estimate.p_hat,
            "std_err": estimate.std_err,
            "z": z,
            "n_samples": estimate.n_samples,
            "seed": estimate.seed,
            "method": result.method.value,
        }
    )
    return EXIT_OK if abs(z) <= _Z_LIMIT else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfisher",
        description="Combine p-values from independent tests with arbitrary positive weights.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--input",
        default="-",
        metavar="PATH|-",
        help="CSV input: one 'p,weight' or 'p' per line (default: stdin)",
    )
    common.add_argument(
        "--method",
        choices=("auto", "identical", "distinct", "general"),
        default="auto",
        help="force a tail-evaluation path (default: auto)",
    )
    common.add_argument(
        "--tol",
        type=float,
        default=1e-9,
        metavar="REL",
        help="relative tolerance for clustering weights (default: 1e-9)",
    )
    common.add_argument(
        "--mc-samples",
        type=int,
        default=1_000_000,
        metavar="N",
        help="Monte Carlo sample count (default: 1000000)",
    )
    common.add_argument(
        "--seed", type=int, default=0, metavar="S", help="Monte Carlo seed (default: 0)"
    )
    common.add_argument(
        "--fallback-mc",
        action="store_true",
        help="fall back to Monte Carlo instead of failing on ill-conditioned input",
    )

    p_combine = sub.add_parser(
        "combine", parents=[common], help="combine weighted p-values into one p-value"
    )
    p_combine.set_defaults(handler=run_combine)

    p_check = sub.add_parser(
        "check",
        parents=[common],
        help="compare the analytic combination against the Monte Carlo oracle",
    )
    p_check.add_argument("--corrupt-analytic", action="store_true", help=argparse.SUPPRESS)
    p_check.set_defaults(handler=run_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (InvalidEvidenceError, MethodError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConditioningError as exc:
        print(f"conditioning error: {exc}", file=sys.stderr)
        return EXIT_CONDITIONING
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except WFisherError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
