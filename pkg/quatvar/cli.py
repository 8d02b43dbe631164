"""Command-line front end: ``quatvar <command> [options]``.

Every check writes ``<output>/<check>.json``. The exit code is 0 when every check passed, 1
when one failed or was inconclusive and 2 for usage errors and unsupported configurations.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from . import _debug
from .class_graph import brandt, brandt_report, default_class_set, eigen_report, eigenfunctions
from .constants import A2_BRANCHES, constants_table, rallis_constant_check
from .exceptions import UnsupportedConfiguration, UserError
from .finite_fourier import local_integrals_report, verify_ugly_lemma
from .logger import logger
from .report import CheckReport, to_jsonable
from .run_config import RunConfig
from .theta_q import arith_variance_report, mu_measure, seesaw_check, shimura_t9_check
from .tree_fix import (
    fix_table,
    mean_statistics,
    verify_closed_form_samples,
    verify_local_pushforward,
    verify_triples_agree,
)
from .util._pretty_print import pretty_print_class_set, pretty_print_report

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

DEFAULT_XMAX = 10**5
SLOW_XMAX = 10**6
SUPPORTED_PRIME = 23
DEFAULT_BOUNDS = {"N": 2, "nmax": 99, "dmax": 450}
"""Per-check bounds used when the command line leaves them unset."""

CHECKS = (
    "brandt",
    "fix-prop",
    "fix-closed-form",
    "triples",
    "fourier",
    "seesaw",
    "mean",
    "t9",
    "rallis",
    "eigen",
    "local-integrals",
    "arithvar",
    "all",
)

ALL_SUITE: tuple[tuple[str, tuple[int, ...]], ...] = (
    ("brandt", ()),
    ("eigen", ()),
    ("triples", ()),
    ("fix-prop", (2, 3, 4)),
    ("fix-closed-form", (2, 3, 4)),
    ("mean", (2, 3, 4)),
    ("fourier", (2, 3)),
    ("seesaw", (2, 3)),
    ("t9", ()),
    ("local-integrals", ()),
    ("rallis", ()),
    ("arithvar", ()),
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quatvar", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--prime", type=int, default=23, help="Ramified finite prime of B (default: 23)")
    parser.add_argument("--slack", type=int, default=2, help="Torsion level is N + slack (default: 2)")
    parser.add_argument("--output", type=Path, default=Path("reports"), help="Report directory (default: reports)")
    parser.add_argument("--format", choices=("json", "csv"), default="json", help="Format of data exports")
    parser.add_argument("--slow", action="store_true", help="Use the slow bounds (N = 4 Fourier, x = 10^6 variance)")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("classset", help="Build the right-ideal classes of the maximal order")
    p = sub.add_parser("brandt", help="Brandt matrix B(n)")
    p.add_argument("--n", type=int, required=True)
    sub.add_parser("eigen", help="Hecke eigenfunctions and their checks")
    p = sub.add_parser("fix", help="Fix# on every residue class of every S_E^0")
    p.add_argument("--N", type=int, default=2)

    p = sub.add_parser("verify", help="Run a verification check")
    p.add_argument("check", choices=CHECKS)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--dmax", type=int, default=None)
    p.add_argument("--xmax", type=int, default=None)

    p = sub.add_parser("theta", help="Export the mu_D tables")
    p.add_argument("--dmax", type=int, required=True)
    p.add_argument("--k", type=int, choices=(1, 2), default=1)
    p = sub.add_parser("arithvar", help="Arithmetic-variance partial sums")
    p.add_argument("--xmax", type=int, default=None)
    sub.add_parser("constants", help="Dump the constants table")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(
        ramified_prime=args.prime,
        torsion_precision_slack=args.slack,
        dmax=getattr(args, "dmax", None),
        nmax=getattr(args, "nmax", None),
        xmax=getattr(args, "xmax", None),
        N=getattr(args, "N", None),
        output=args.output,
        format=args.format,
    )
    return config.validate()


def _require_supported_prime(config: RunConfig, command: str) -> None:
    if config.ramified_prime != SUPPORTED_PRIME:
        raise UnsupportedConfiguration(
            f"'{command}' depends on the level-{SUPPORTED_PRIME} eigenforms and is only "
            f"implemented for p = {SUPPORTED_PRIME}, got p = {config.ramified_prime}"
        )


def _write_json(path: Path, payload: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def _emit(report: CheckReport, config: RunConfig, name: str | None = None) -> CheckReport:
    path = report.write(config.output, name)
    logger.info("%s: %s (%d cases) -> %s", name or report.check, report.status, report.cases_total, path)
    if not report.passed:
        print(pretty_print_report(report))
    return report


def _run_check(check: str, config: RunConfig, slow: bool) -> CheckReport:
    config = config.with_bounds(xmax=SLOW_XMAX if slow else DEFAULT_XMAX, **DEFAULT_BOUNDS)
    n = config.N
    if check == "brandt":
        return brandt_report(config=config)
    if check == "fix-prop":
        return verify_local_pushforward(n, config=config)
    if check == "fix-closed-form":
        return verify_closed_form_samples(n, config=config)
    if check == "triples":
        return verify_triples_agree(config=config)
    if check == "fourier":
        return verify_ugly_lemma(n, config)
    if check == "seesaw":
        return seesaw_check(n, config.nmax, config=config)
    if check == "mean":
        return mean_statistics(n, config=config)
    if check == "t9":
        return shimura_t9_check(config.dmax, config=config)
    if check == "rallis":
        return rallis_constant_check(config)
    if check == "eigen":
        return eigen_report(config=config)
    if check == "local-integrals":
        return local_integrals_report({f"Psi_{k + 1}": a2 for k, a2 in enumerate(A2_BRANCHES)}, config)
    if check == "arithvar":
        return arith_variance_report(config.xmax, config=config)
    raise UserError(f"unknown check {check!r}")


def _verify(args: argparse.Namespace, config: RunConfig) -> int:
    _require_supported_prime(config, f"verify {args.check}")
    if args.check != "all":
        report = _emit(_run_check(args.check, config, args.slow), config)
        return EXIT_PASS if report.passed else EXIT_FAIL

    reports = []
    for check, levels in ALL_SUITE:
        if check == "fourier" and args.slow:
            levels = (*levels, 4)
        if not levels:
            reports.append(_emit(_run_check(check, config, args.slow), config))
            continue
        for n in levels:
            level_config = config.resolve(RunConfig(N=n))
            reports.append(_emit(_run_check(check, level_config, args.slow), config, f"{check}-N{n}"))
    failed = [r.check for r in reports if not r.passed]
    logger.info("verify all: %d/%d checks passed", len(reports) - len(failed), len(reports))
    return EXIT_FAIL if failed else EXIT_PASS


def _classset(args: argparse.Namespace, config: RunConfig) -> int:
    class_set = default_class_set(config.ramified_prime)
    print(pretty_print_class_set(class_set))
    _write_json(config.output / "classset.json", class_set)
    return EXIT_PASS


def _brandt(args: argparse.Namespace, config: RunConfig) -> int:
    matrix = brandt(args.n, default_class_set(config.ramified_prime))
    for row in matrix.entries:
        print(" ".join(str(v) for v in row))
    _write_json(config.output / f"brandt-n{args.n}.json", matrix)
    return EXIT_PASS


def _eigen(args: argparse.Namespace, config: RunConfig) -> int:
    _require_supported_prime(config, "eigen")
    report = _emit(eigen_report(config=config), config)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _fix(args: argparse.Namespace, config: RunConfig) -> int:
    _require_supported_prime(config, "fix")
    _write_json(config.output / f"fix-N{args.N}.json", fix_table(args.N, config=config))
    return EXIT_PASS


def _theta(args: argparse.Namespace, config: RunConfig) -> int:
    _require_supported_prime(config, "theta")
    class_set = default_class_set()
    mu = mu_measure(args.dmax, class_set, eigenfunctions(class_set))
    rows = mu.csv_rows(args.k - 1)
    header = ["D", "mu_E1", "mu_E2", "mu_E3", "muPsi_a", "muPsi_b"]
    if config.format == "json":
        path = _write_json(config.output / f"theta-k{args.k}.json", [dict(zip(header, row)) for row in rows])
    else:
        config.output.mkdir(parents=True, exist_ok=True)
        path = config.output / f"theta-k{args.k}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    logger.info("theta: %d rows -> %s", len(rows), path)
    return EXIT_PASS


def _arithvar(args: argparse.Namespace, config: RunConfig) -> int:
    _require_supported_prime(config, "arithvar")
    report = _emit(_run_check("arithvar", config, args.slow), config)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _constants(args: argparse.Namespace, config: RunConfig) -> int:
    table = constants_table()
    print(json.dumps(to_jsonable(table), sort_keys=True, indent=2))
    _write_json(config.output / "constants.json", table)
    return EXIT_PASS


COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "classset": _classset,
    "brandt": _brandt,
    "eigen": _eigen,
    "fix": _fix,
    "verify": _verify,
    "theta": _theta,
    "arithvar": _arithvar,
    "constants": _constants,
}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if _debug.DEBUG else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        config = _config_from_args(args)
        return COMMANDS[args.command](args, config)
    except (UserError, UnsupportedConfiguration) as e:
        print(f"quatvar: error: {e.message}", file=sys.stderr)
        return EXIT_USAGE


__all__ = ["main"]
