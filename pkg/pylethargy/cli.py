# -*- coding: utf-8 -*-
#
# cli.py
#
# This file is part of pylethargy.
#
# pylethargy is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# pylethargy is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with pylethargy.  If not, see <https://www.gnu.org/licenses/>.

"""The `pylethargy` executable: one subcommand per check or
construction, all reading the same JSON problem files.

Exit codes: 0 pass, 2 fail, 3 solver budget exhausted, 64 usage error.
"""

# allowing postponed evaluation of annotations; see:
# https://www.python.org/dev/peps/pep-0563/
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from pylethargy import VERSION
from pylethargy.basecommand import (
    PROBLEM_VERSION,
    BaseCommand,
    Problem,
    RunReport,
    UsageError,
    Verdict,
    read_matrix_csv,
)
from pylethargy.core import DATA_DIR, DEFAULT_SEED, FEASIBILITY_TOL, Family, SolverConfig
from pylethargy.distance import distance_profile
from pylethargy.frechet import (
    BANACH,
    RayConfig,
    check_al_condition,
    corollary_transforms,
    deviation_inf,
    verify_frechet_bounds,
)
from pylethargy.lethargy import (
    KonyaginConfig,
    check_condition_strict,
    check_condition_weak,
    ratio_report,
    synthesize_exact,
    synthesize_konyagin,
    verify_bounds,
)
from pylethargy.operators import (
    OperatorMethod,
    approximation_numbers,
    approximation_numbers_oracle,
    bernstein_pair_diagonal,
    hmr_operator,
    koenig_limit_check,
    kolmogorov_diameters,
    marcus_chain_check,
    operator_norm,
    to_bound_check,
)

__all__ = ["COMMANDS", "DEMO_MARCUS_MATRIX", "build_parser", "main", "run_demo"]

logger = logging.getLogger(__name__)

USAGE_EXIT = 64
SEED_VARIABLE = "LETHARGY_SEED"


def _solver_config(command: BaseCommand, restarts: int = 8) -> SolverConfig:
    problem = command.problem
    tol = command.tol if command.tol is not None else problem.number_option("tol", FEASIBILITY_TOL)
    return SolverConfig(
        tol=tol,
        restarts=problem.int_option("restarts", restarts),
        seed=command.seed,
        workers=problem.int_option("workers"),
    )


def _c_value(command: BaseCommand) -> KonyaginConfig:
    problem = command.problem
    c = command.c if command.c is not None else problem.number_option("c")
    if c is None:
        raise UsageError("c", f"'{command.NAME}' needs --c or run.c")
    try:
        return KonyaginConfig(
            c, problem.number_option("K"), problem.int_option("i0", 1), command.seed
        )
    except (ValueError, TypeError) as error:
        raise UsageError("c", str(error)) from error


def _chain(command: BaseCommand):
    return command.problem.chain(command.seed)


def _x(command: BaseCommand, name: str, chain) -> Any:
    return command.problem.vector(name, chain.ambient_dim)


# -- lethargy commands
class CheckCommand(BaseCommand):
    """Summability of a target sequence, strict and weak."""

    NAME = "check"
    HEADER = ("n", "d_n", "tail_sum", "margin", "strict", "weak")
    REQUIRED = frozenset({"sequence"})

    def compute(self):
        d = self.problem.sequence()
        strict = check_condition_strict(d)
        weak = check_condition_weak(d)
        strict_ok = {row[0]: row[4] for row in strict.margins}
        self.details.update(
            strict_passed=strict.passed,
            weak_passed=weak.passed,
            strict_first_violation=strict.first_violation,
            weak_first_violation=weak.first_violation,
            labels=weak.labels,
        )
        rows = [
            (n, d_n, tail, margin, strict_ok.get(n), ok)
            for n, d_n, tail, margin, ok in weak.margins
        ]
        return rows, weak.passed


class SynthCommand(BaseCommand):
    """An element with prescribed distances to every level of a chain."""

    NAME = "synth"
    HEADER = ("level", "d_target", "rho", "residual")
    REQUIRED = frozenset({"chain", "sequence"})
    OPTIONAL = frozenset({"ambient_dim", "norm", "z", "run"})

    def compute(self):
        chain = _chain(self)
        d = self.problem.sequence()
        norm = self.problem.norm()
        z = _x(self, "z", chain) if "z" in self.problem else None
        result = synthesize_exact(chain, d, z, norm, _solver_config(self, 16))
        profile = distance_profile(result.x, chain, norm)
        self.details.update(
            x=result.x,
            lam=result.lam,
            z=result.z,
            anchor=result.anchor,
            labels=result.labels,
            norm_bound_slack=result.norm_bound_slack,
            restarts_used=result.restarts_used,
            max_residual=result.max_residual,
        )
        rows = [
            (level, d.values[level - 1], found.value, residual)
            for level, (found, residual) in enumerate(zip(profile, result.residuals), start=1)
        ]
        return rows, True

    def budget_rows(self, best):
        self.details.update(x=best.x, lam=best.lam, max_residual=best.max_residual)
        d = self.problem.sequence()
        return [
            (level, d.values[level - 1], None, residual)
            for level, residual in enumerate(best.residuals, start=1)
        ]


def _bound_rows(report) -> list[tuple]:
    c = report.c
    return [(row.n, row.ratio, c, 4 * c, row.case, row.passed) for row in report.rows]


class KonyaginCommand(BaseCommand):
    """The scaled element bounded by c d_n and 4c d_n on every level."""

    NAME = "konyagin"
    HEADER = ("n", "ratio", "lower", "upper", "case", "pass")
    REQUIRED = frozenset({"chain", "sequence"})
    OPTIONAL = frozenset({"ambient_dim", "norm", "z", "run"})

    def compute(self):
        chain = _chain(self)
        d = self.problem.sequence()
        cfg = _c_value(self)
        z = _x(self, "z", chain) if "z" in self.problem else None
        result = synthesize_konyagin(
            chain, d, cfg, self.problem.norm(), z, _solver_config(self, 16)
        )
        self.details.update(
            x_c=result.x_c,
            targets=result.targets,
            inserted=len(result.interleaving.inserted),
            first_dyadic=result.interleaving.first_dyadic,
        )
        return _bound_rows(result.report), result.report.passed


class VerifyCommand(BaseCommand):
    """Check c d_n <= rho(x, Y_n) <= 4c d_n for a given x."""

    NAME = "verify"
    HEADER = KonyaginCommand.HEADER
    REQUIRED = frozenset({"chain", "sequence", "x"})
    OPTIONAL = frozenset({"ambient_dim", "norm", "run"})

    def compute(self):
        chain = _chain(self)
        cfg = _c_value(self)
        tol = self.tol if self.tol is not None else FEASIBILITY_TOL
        report = verify_bounds(
            _x(self, "x", chain), chain, self.problem.sequence(), cfg.c, self.problem.norm(), tol
        )
        return _bound_rows(report), report.passed


class RatiosCommand(BaseCommand):
    """rho(x, Y_n) / d_n along a chain."""

    NAME = "ratios"
    HEADER = ("n", "d_n", "rho", "ratio", "reaches_target")
    REQUIRED = frozenset({"chain", "sequence", "x"})
    OPTIONAL = frozenset({"ambient_dim", "norm", "run"})

    def compute(self):
        chain = _chain(self)
        report = ratio_report(
            _x(self, "x", chain), chain, self.problem.sequence(), self.problem.norm()
        )
        self.details.update(sup=report.sup, inf=report.inf, increasing=report.is_increasing)
        return report.rows, True


class ProfileCommand(BaseCommand):
    """Distances of x to every level of a chain."""

    NAME = "profile"
    HEADER = ("level", "rank", "d_target", "rho", "method", "exact", "residual")
    REQUIRED = frozenset({"chain", "x"})
    OPTIONAL = frozenset({"ambient_dim", "norm", "sequence", "run"})

    def compute(self):
        chain = _chain(self)
        d = self.problem.sequence() if "sequence" in self.problem else None
        results = distance_profile(
            _x(self, "x", chain), chain, self.problem.norm(), _solver_config(self)
        )
        rows = []
        for level, found in enumerate(results, start=1):
            target = d.values[level - 1] if d is not None and level <= d.N else None
            rows.append(
                (
                    level,
                    chain.ranks[level - 1],
                    target,
                    found.value,
                    found.method,
                    found.is_exact,
                    found.residual,
                )
            )
        return rows, True


# -- F-norm commands
def _ray_config(command: BaseCommand) -> RayConfig:
    problem = command.problem
    defaults = RayConfig()
    try:
        return RayConfig(
            problem.number_option("t_max", defaults.t_max),
            problem.int_option("steps", defaults.steps),
            None,
            problem.int_option("samples", defaults.samples),
            command.seed,
        )
    except (ValueError, TypeError) as error:
        raise UsageError("run", str(error)) from error


def _deviations(command: BaseCommand):
    return deviation_inf(
        _chain(command),
        command.problem.norm("fnorm"),
        command.problem.int_option("N"),
        _ray_config(command),
        command.problem.int_option("workers"),
    )


class DevCommand(BaseCommand):
    """F-norm deviations between consecutive levels."""

    NAME = "dev"
    HEADER = ("n", "deviation", "method", "residual")
    REQUIRED = frozenset({"chain", "fnorm"})
    OPTIONAL = frozenset({"ambient_dim", "run"})

    def compute(self):
        report = _deviations(self)
        self.details.update(inf=report.inf, N=report.N, trend=report.trend)
        rows = [(e.n, e.value, e.method, e.residual) for e in report.entries]
        return rows, True


class ALCheckCommand(BaseCommand):
    """The weighted summability condition for F-spaces."""

    NAME = "alcheck"
    HEADER = ("n", "partial_sum", "tail_bound", "threshold", "pass")
    REQUIRED = frozenset({"e"})
    OPTIONAL = frozenset({"delta", "chain", "fnorm", "ambient_dim", "run"})

    def compute(self):
        problem = self.problem
        delta = problem.sequence("delta") if "delta" in problem else None
        dev = problem.option("dev")
        if dev == "banach":
            dev = BANACH
        elif dev is not None:
            dev = problem.number_option("dev")
        elif "chain" in problem:
            dev = _deviations(self)
        else:
            dev = BANACH
        report = check_al_condition(problem.sequence("e"), delta, dev)
        self.details.update(banach_mode=report.banach_mode, truncated=report.truncated)
        return report.rows, report.passed


class FVerifyCommand(BaseCommand):
    """Check e_n/3 <= rho_F(x, V_n) <= 3 e_n."""

    NAME = "fverify"
    HEADER = ("n", "e_n", "rho", "ratio", "pass")
    REQUIRED = frozenset({"chain", "x", "e"})
    OPTIONAL = frozenset({"ambient_dim", "fnorm", "run"})

    def compute(self):
        chain = _chain(self)
        report = verify_frechet_bounds(
            _x(self, "x", chain),
            chain,
            self.problem.sequence("e"),
            self.problem.int_option("n0"),
            self.problem.norm("fnorm"),
        )
        self.details["certified"] = all(row.certified for row in report.rows)
        rows = [(row.n, row.e_n, row.rho, row.ratio, row.passed) for row in report.rows]
        return rows, report.passed


class CorollaryCommand(BaseCommand):
    """Square-root targets and the implication sqrt(e) >= e."""

    NAME = "corollary"
    HEADER = ("n", "e_n", "shapiro", "tyuremskikh", "implication", "boundary")
    REQUIRED = frozenset({"e"})

    def compute(self):
        report = corollary_transforms(self.problem.sequence("e"))
        return report.rows, all(row.implication for row in report.rows)


# -- operator commands
class AppnumCommand(BaseCommand):
    """Approximation numbers of an operator."""

    NAME = "appnum"
    HEADER = ("n", "a_n", "lower", "upper", "method")
    REQUIRED = frozenset({"operator"})

    def compute(self):
        T = self.problem.operator()
        report = approximation_numbers(
            T,
            self.problem.int_option("restarts", 32),
            self.seed,
            self.problem.int_option("workers"),
        )
        norm = operator_norm(T, seed=self.seed)
        self.details.update(norm=norm.value, norm_exact=norm.exact)
        if report.method is OperatorMethod.SAMPLED_UPPER_BOUND:
            rows = [(n, a, 0.0, a, report.method) for n, a in enumerate(report.values, start=1)]
        elif report.intervals is None:
            rows = [(n, a, a, a, report.method) for n, a in enumerate(report.values, start=1)]
        else:
            rows = [
                (i.n, a, i.lower, i.upper, report.method)
                for i, a in zip(report.intervals, report.values)
            ]
        return rows, True


class WidthsCommand(BaseCommand):
    """Kolmogorov widths of the image of the unit ball."""

    NAME = "widths"
    HEADER = ("n", "width", "method")
    REQUIRED = frozenset({"operator"})

    def compute(self):
        report = kolmogorov_diameters(
            self.problem.operator(), self.problem.int_option("samples", 32), self.seed
        )
        self.details.update(exact=report.exact, sampling_slack=report.sampling_slack)
        slack = report.sampling_slack
        passed = slack is None or slack >= -FEASIBILITY_TOL
        rows = [(n, width, report.method) for n, width in enumerate(report.values)]
        return rows, passed


class BPCommand(BaseCommand):
    """An operator whose approximation numbers are the given sequence."""

    NAME = "bp"
    HEADER = ("n", "d_n", "a_n", "lower", "upper", "method")
    REQUIRED = frozenset({"sequence"})
    OPTIONAL = frozenset({"norm", "ambient_dim", "run"})

    def compute(self):
        problem = self.problem
        d = problem.sequence()
        norm = problem.norm()
        if norm.family is not Family.LP:
            raise UsageError("norm", "Bernstein pairs live on lp spaces")
        dim = problem.ambient_dim or d.N
        construction = problem.option("construction", "diagonal")
        tol = 1e-9 * max(1.0, d.values[0])
        if construction == "hmr":
            if not norm.is_hilbert:
                raise UsageError("norm", "the similarity construction is Euclidean")
            T = hmr_operator(d, dim, self.seed, problem.number_option("spread", 0.5))
            C = T.h_constant
            report = approximation_numbers(T)
            rows = [
                (n, d_n, a_n, d_n / C, C * d_n, report.method)
                for n, (d_n, a_n) in enumerate(zip(d.values, report.values), start=1)
            ]
            self.details["h_constant"] = C
        elif construction == "diagonal":
            T = bernstein_pair_diagonal(d, norm.p, dim)
            report = approximation_numbers(T)
            rows = []
            for n, (d_n, a_n) in enumerate(zip(d.values, report.values), start=1):
                if report.method is OperatorMethod.CLOSED_FORM and dim <= 4:
                    interval = approximation_numbers_oracle(
                        T, n, problem.int_option("restarts", 32), self.seed
                    )
                    lower, upper = interval.lower, interval.upper
                else:
                    lower = upper = a_n
                rows.append((n, d_n, a_n, lower, upper, report.method))
        else:
            raise UsageError("run.construction", f"expected 'diagonal' or 'hmr'; got {construction!r}")
        passed = all(
            lower - tol <= d_n <= upper + tol and lower - tol <= a_n <= upper + tol
            for _, d_n, a_n, lower, upper, _ in rows
        )
        return rows, passed


class KoenigCommand(BaseCommand):
    """a_n(T^m)^(1/m) against the n-th eigenvalue modulus."""

    NAME = "koenig"
    HEADER = ("m", "g_m", "gap")
    REQUIRED = frozenset({"operator"})

    def compute(self):
        report = koenig_limit_check(
            self.problem.operator(),
            self.problem.int_option("n", 1),
            self.problem.int_option("m_max", 64),
        )
        self.details.update(n=report.n, modulus=report.modulus, gap=report.gap)
        rows = [
            (m, g, abs(g - report.modulus)) for m, g in enumerate(report.values, start=1)
        ]
        return rows, self.tol is None or report.gap <= self.tol


class MarcusCommand(BaseCommand):
    """Widths, approximation numbers and eigenvalues of a symmetric matrix, chained."""

    NAME = "marcus"
    HEADER = ("n", "width", "a_n", "lambda_bound", "width_bound", "pass")
    REQUIRED = frozenset({"operator"})

    def compute(self):
        report = marcus_chain_check(self.problem.operator())
        rows = [
            (
                row.n,
                row.width,
                row.a_n,
                row.lambda_bound,
                row.width_bound,
                row.first and row.second and row.third,
            )
            for row in report.rows
        ]
        return rows, report.passed


class TOBoundCommand(BaseCommand):
    """Two-sided bounds of approximation numbers by a sequence."""

    NAME = "tobound"
    HEADER = ("m", "a_m", "lower", "upper", "pass")
    REQUIRED = frozenset({"operator", "sequence"})

    def compute(self):
        report = to_bound_check(self.problem.operator(), self.problem.sequence())
        self.details.update(norm=report.norm, norm_passed=report.norm_passed)
        return report.rows, report.passed


COMMANDS: dict[str, type[BaseCommand]] = {
    command.NAME: command
    for command in (
        CheckCommand,
        SynthCommand,
        KonyaginCommand,
        VerifyCommand,
        RatiosCommand,
        ProfileCommand,
        DevCommand,
        ALCheckCommand,
        FVerifyCommand,
        CorollaryCommand,
        AppnumCommand,
        WidthsCommand,
        BPCommand,
        KoenigCommand,
        MarcusCommand,
        TOBoundCommand,
    )
}


# -- demo
DEMO_MARCUS_MATRIX = ((3.0, 0.0, 0.0), (0.0, 2.0, 0.0), (0.0, 0.0, 1.0))


def _problem(**blocks: Any) -> Problem:
    return Problem({"version": PROBLEM_VERSION, **blocks})


def _geometric(first: float, ratio: float, length: int) -> dict:
    return {"geometric": {"first": first, "ratio": ratio, "length": length}}


def _demo_condition(seed: int) -> tuple[list[RunReport], bool]:
    halves = CheckCommand(_problem(sequence=_geometric(0.5, 0.5, 40)), seed).execute()
    fifths = CheckCommand(_problem(sequence=_geometric(0.4, 0.4, 40)), seed).execute()
    ok = (
        not halves.details["strict_passed"]
        and halves.details["weak_passed"]
        and fifths.details["strict_passed"]
    )
    return [halves, fifths], ok


def _demo_konyagin(seed: int) -> tuple[list[RunReport], bool]:
    reports = []
    chain = {"random": {"dim": 16, "ranks": list(range(1, 13))}}
    sequence = {"values": [1 / (n + 1) for n in range(1, 13)]}
    for c in (0.25, 0.5, 1.0):
        problem = _problem(chain=chain, sequence=sequence, run={"c": c})
        reports.append(KonyaginCommand(problem, seed).execute())
    ok = all(report.verdict is Verdict.PASS for report in reports)
    return reports, ok


def _demo_bernstein(seed: int) -> tuple[list[RunReport], bool]:
    problem = _problem(sequence={"values": [1.0, 0.5, 0.25]})
    report = BPCommand(problem, seed).execute()
    return [report], report.verdict is Verdict.PASS


def _demo_marcus(seed: int) -> tuple[list[RunReport], bool]:
    matrix = [list(row) for row in DEMO_MARCUS_MATRIX]
    report = MarcusCommand(_problem(operator={"matrix": matrix}), seed).execute()
    return [report], report.verdict is Verdict.PASS


def _demo_frechet(seed: int) -> tuple[list[RunReport], bool]:
    ranks = list(range(1, 11))
    product = DevCommand(
        _problem(
            chain={"coordinate": {"dim": 11, "ranks": ranks}},
            fnorm={"family": "fnorm_product"},
        ),
        seed,
    ).execute()
    of_norm = DevCommand(
        _problem(
            chain={"random": {"dim": 11, "ranks": ranks}},
            fnorm={"family": "fnorm_of_norm", "base": {"family": "lp", "p": 2}},
        ),
        seed,
    ).execute()
    ok = (
        product.verdict is Verdict.PASS
        and of_norm.verdict is Verdict.PASS
        and all(
            math.isclose(row[1], 2.0 ** -(row[0] + 1), rel_tol=1e-9) for row in product.rows
        )
        and all(row[1] >= 1 - 1e-3 for row in of_norm.rows)
    )
    return [product, of_norm], ok


DEMO_ITEMS = {
    "condition": _demo_condition,
    "konyagin": _demo_konyagin,
    "bernstein": _demo_bernstein,
    "marcus": _demo_marcus,
    "frechet": _demo_frechet,
}


def run_demo(out: Optional[Path], as_json: bool, seed: int) -> int:
    """Run every demo item, write its reports to `out` and return the
    exit code; failing items are logged and named on stderr.
    """

    out = Path(out) if out is not None else DATA_DIR / "demo"
    out.mkdir(parents=True, exist_ok=True)
    failed = []
    bundle = {}
    for name, item in DEMO_ITEMS.items():
        reports, ok = item(seed)
        if not ok:
            logger.error("Demo item '%s' failed.", name)
            failed.append(name)
        bundle[name] = {"passed": ok, "reports": [report.to_dict() for report in reports]}
        if not as_json:
            for k, report in enumerate(reports, start=1):
                (out / f"{name}-{k}.csv").write_text(report.to_csv(), encoding="utf-8")
    if as_json:
        envelope = {"version": PROBLEM_VERSION, "seed": seed, "items": bundle, "failed": failed}
        text = json.dumps(envelope, indent=2, sort_keys=True) + "\n"
        (out / "demo.json").write_text(text, encoding="utf-8")
    if failed:
        print(f"demo: failing item(s): {', '.join(failed)}", file=sys.stderr)
        return Verdict.FAIL.value
    logger.info("Demo bundle written to '%s'.", out)
    return Verdict.PASS.value


# -- entry point
class ArgumentParser(argparse.ArgumentParser):
    """Exits with the usage code instead of argparse's 2, which is
    the FAIL verdict here.
    """

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--file", type=Path, help="JSON problem file")
    common.add_argument("--out", type=Path, help="output file (directory for demo)")
    common.add_argument("--seed", type=int, help=f"overrides the problem seed and ${SEED_VARIABLE}")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--json", action="store_true", help="same as --format json")
    common.add_argument("--c", type=float, help="lower bound constant in (0, 1]")
    common.add_argument("--tol", type=float, help="acceptance tolerance")
    common.add_argument("--matrix", type=Path, help="CSV matrix replacing the operator's")
    common.add_argument("--timing", action="store_true", help="add wall time to JSON reports")

    parser = ArgumentParser(prog="pylethargy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)
    for name, command in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(command.__doc__ or "").strip() or None)
    sub.add_parser("demo", parents=[common], help="run the curated report bundle")
    return parser


def _resolve_seed(flag: Optional[int], problem: Optional[Problem]) -> int:
    if flag is not None:
        return flag
    if problem is not None and problem.seed is not None:
        return problem.seed
    env = os.environ.get(SEED_VARIABLE)
    if env:
        try:
            return int(env)
        except ValueError as error:
            raise UsageError(SEED_VARIABLE, f"expected an integer; got {env!r}") from error
    return DEFAULT_SEED


def _run(args: argparse.Namespace) -> int:
    as_json = args.json or args.format == "json"
    if args.command == "demo":
        return run_demo(args.out, as_json, _resolve_seed(args.seed, None))
    if args.file is None:
        raise UsageError("--file", f"'{args.command}' needs a problem file")
    problem = Problem.from_path(args.file)
    if args.matrix is not None:
        problem.matrix_override = read_matrix_csv(args.matrix)
    command = COMMANDS[args.command](
        problem,
        _resolve_seed(args.seed, problem),
        c=args.c,
        tol=args.tol,
        timing=args.timing,
    )
    report = command.execute()
    text = report.to_json() if as_json else report.to_csv()
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if "error" in report.details:
        print(f"{args.command}: {report.details['error']}", file=sys.stderr)
    return report.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit:
        return int(exit.code or 0)
    try:
        return _run(args)
    except UsageError as error:
        logger.error("Usage error: %s", error)
        print(f"pylethargy: error: {error}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
