# -*- coding: utf-8 -*-
#
# basecommand.py
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

"""Declares the `Problem` a subcommand reads and the `BaseCommand`
class, which runs one subcommand and packs its outcome in a `RunReport`.
"""

# allowing postponed evaluation of annotations; see:
# https://www.python.org/dev/peps/pep-0563/
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import time
from abc import ABC, abstractmethod
from collections import namedtuple
from enum import Enum
from pathlib import Path
from typing import Any, ClassVar, Iterable, Optional, Sequence, Union, final

import numpy as np

from pylethargy.core import NormSpec, TailModel, TargetSequence, as_vector
from pylethargy.operators import OperatorSpec
from pylethargy.spaces import (
    SubspaceChain,
    chain_coordinates,
    chain_polynomials,
    chain_random,
)
from pylethargy.utils import (
    BaseLethargyError,
    InfeasibleAtBudgetError,
    type_check,
    typename,
)

__all__ = [
    "BaseCommand",
    "PROBLEM_VERSION",
    "Problem",
    "RunReport",
    "UsageError",
    "Verdict",
    "read_matrix_csv",
]

logger = logging.getLogger(__name__)

PROBLEM_VERSION = 1
BLOCKS = frozenset(
    {
        "version",
        "seed",
        "ambient_dim",
        "norm",
        "fnorm",
        "chain",
        "sequence",
        "e",
        "delta",
        "x",
        "z",
        "operator",
        "run",
    }
)


class UsageError(BaseLethargyError):
    """Raised for malformed problem files and arguments.

    `where` is either `path:line:column` or a dotted field path.
    """

    def __init__(self, where: str, message: str) -> None:
        self.where = where
        self.message = message
        super().__init__(where, message)

    def __str__(self) -> str:
        return f"{self.where}: {self.message}"


# -- field parsing
def _number(value: Any, where: str) -> float:
    if isinstance(value, str) and value in ("inf", "-inf"):
        return float(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UsageError(where, f"expected a number; got {value!r}")
    return float(value)


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise UsageError(where, f"expected an integer; got {value!r}")
    return value


def _numbers(value: Any, where: str) -> list[float]:
    if not isinstance(value, list):
        raise UsageError(where, f"expected a list of numbers; got {value!r}")
    return [_number(item, f"{where}[{k}]") for k, item in enumerate(value)]


def _mapping(value: Any, where: str) -> dict:
    if not isinstance(value, dict):
        raise UsageError(where, f"expected an object; got {typename(value)}")
    return value


def _only_key(block: dict, where: str, choices: Sequence[str]) -> str:
    keys = [key for key in choices if key in block]
    if len(keys) != 1:
        raise UsageError(where, f"expected exactly one of {list(choices)}; got {sorted(block)}")
    return keys[0]


def parse_norm(block: Any, where: str) -> NormSpec:
    """{"family": "lp", "p": 2}, {"family": "grid_sup", "grid": [...]},
    {"family": "fnorm_product", "weights": [...]} or
    {"family": "fnorm_of_norm", "base": {...}}.
    """

    block = _mapping(block, where)
    family = block.get("family")
    try:
        if family == "lp":
            return NormSpec.lp(_number(block.get("p", 2), f"{where}.p"))
        if family == "grid_sup":
            return NormSpec.grid_sup(_numbers(block.get("grid"), f"{where}.grid"))
        if family == "fnorm_product":
            weights = block.get("weights")
            if weights is not None:
                weights = _numbers(weights, f"{where}.weights")
            return NormSpec.fnorm_product(weights)
        if family == "fnorm_of_norm":
            base = block.get("base")
            base = parse_norm(base, f"{where}.base") if base is not None else None
            return NormSpec.fnorm_of_norm(base)
    except (BaseLethargyError, ValueError, TypeError) as error:
        if isinstance(error, UsageError):
            raise
        raise UsageError(where, str(error)) from error
    raise UsageError(f"{where}.family", f"unknown norm family {family!r}")


def parse_sequence(block: Any, where: str) -> TargetSequence:
    """{"values": [...]} or {"geometric": {"first", "ratio", "length"}},
    with optional "n0" and "tail" ("truncated", "none" or
    {"geometric": ratio}).
    """

    block = _mapping(block, where)
    key = _only_key(block, where, ("values", "geometric"))
    n0 = _integer(block.get("n0", 1), f"{where}.n0")
    try:
        if key == "values":
            values = _numbers(block["values"], f"{where}.values")
            tail = None
        else:
            spec = _mapping(block["geometric"], f"{where}.geometric")
            first = _number(spec.get("first", 1.0), f"{where}.geometric.first")
            ratio = _number(spec.get("ratio"), f"{where}.geometric.ratio")
            length = _integer(spec.get("length"), f"{where}.geometric.length")
            values = [first * ratio ** k for k in range(length)]
            tail = TailModel.geometric(ratio)
        if "tail" in block:
            tail = _tail(block["tail"], f"{where}.tail")
        return TargetSequence(values, n0, tail)
    except (BaseLethargyError, ValueError, TypeError) as error:
        if isinstance(error, UsageError):
            raise
        raise UsageError(where, str(error)) from error


def _tail(value: Any, where: str) -> Optional[TailModel]:
    if value == "truncated":
        return None
    if value == "none":
        return TailModel.none()
    if isinstance(value, dict) and set(value) == {"geometric"}:
        return TailModel.geometric(_number(value["geometric"], f"{where}.geometric"))
    raise UsageError(where, f"expected 'truncated', 'none' or {{'geometric': r}}; got {value!r}")


def read_matrix_csv(path: Union[str, Path]) -> np.ndarray:
    """Row-major matrix file: a `rows,cols` header, the two sizes, then
    one line per row.
    """

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        raise UsageError(str(path), f"cannot read matrix: {error.strerror}") from error
    lines = list(csv.reader(io.StringIO(text)))
    if not lines or [cell.strip() for cell in lines[0]] != ["rows", "cols"]:
        raise UsageError(f"{path}:1", "expected the header 'rows,cols'")
    try:
        rows, cols = (int(cell) for cell in lines[1])
    except (IndexError, ValueError) as error:
        raise UsageError(f"{path}:2", "expected two integer sizes") from error
    body = [line for line in lines[2:] if line]
    if len(body) != rows:
        raise UsageError(f"{path}:{len(lines)}", f"expected {rows} rows; got {len(body)}")
    matrix = np.zeros((rows, cols))
    for k, line in enumerate(body):
        lineno = k + 3
        if len(line) != cols:
            raise UsageError(f"{path}:{lineno}", f"expected {cols} entries; got {len(line)}")
        try:
            matrix[k] = [float(cell) for cell in line]
        except ValueError as error:
            raise UsageError(f"{path}:{lineno}", str(error)) from error
    return matrix


class Problem:
    """A parsed problem file: version tag plus named blocks.

    Blocks are converted lazily, on the accessor's first call, so
    every diagnostic names the field it comes from.
    """

    def __init__(
        self, data: dict, digest: str = "", origin: Optional[Path] = None
    ) -> None:
        data = _mapping(data, "problem")
        version = data.get("version")
        if version != PROBLEM_VERSION:
            raise UsageError("version", f"expected {PROBLEM_VERSION}; got {version!r}")
        unknown = set(data) - BLOCKS
        if unknown:
            raise UsageError(sorted(unknown)[0], "unknown block")
        self.data = data
        if not digest:
            canonical = json.dumps(data, sort_keys=True).encode("utf-8")
            digest = hashlib.sha256(canonical).hexdigest()
        self.digest = digest
        self.origin = origin
        self.matrix_override: Optional[np.ndarray] = None

    @classmethod
    def from_path(cls, path: Union[str, Path]) -> Problem:
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as error:
            raise UsageError(str(path), f"cannot read problem file: {error.strerror}") from error
        try:
            data = json.loads(raw.decode("utf-8"))
        except UnicodeDecodeError as error:
            raise UsageError(str(path), "problem files must be UTF-8") from error
        except json.JSONDecodeError as error:
            raise UsageError(f"{path}:{error.lineno}:{error.colno}", error.msg) from error
        return cls(data, hashlib.sha256(raw).hexdigest(), path)

    @classmethod
    def empty(cls) -> Problem:
        return cls({"version": PROBLEM_VERSION})

    @property
    def blocks(self) -> frozenset[str]:
        return frozenset(self.data) - {"version"}

    def __contains__(self, name: str) -> bool:
        return name in self.data

    def __repr__(self) -> str:
        return f"{typename(self)}(blocks={sorted(self.blocks)}, digest={self.digest[:12]!r})"

    # accessors
    @property
    def seed(self) -> Optional[int]:
        if "seed" not in self.data:
            return None
        return _integer(self.data["seed"], "seed")

    @property
    def ambient_dim(self) -> Optional[int]:
        if "ambient_dim" not in self.data:
            return None
        dim = _integer(self.data["ambient_dim"], "ambient_dim")
        if dim < 1:
            raise UsageError("ambient_dim", f"must be positive; got {dim}")
        return dim

    def option(self, key: str, default: Any = None) -> Any:
        run = _mapping(self.data.get("run", {}), "run")
        return run.get(key, default)

    def number_option(self, key: str, default: Optional[float] = None) -> Optional[float]:
        value = self.option(key)
        return default if value is None else _number(value, f"run.{key}")

    def int_option(self, key: str, default: Optional[int] = None) -> Optional[int]:
        value = self.option(key)
        return default if value is None else _integer(value, f"run.{key}")

    def norm(self, name: str = "norm") -> NormSpec:
        if name not in self.data:
            return NormSpec.lp(2) if name == "norm" else NormSpec.fnorm_product()
        return parse_norm(self.data[name], name)

    def sequence(self, name: str = "sequence") -> TargetSequence:
        return parse_sequence(self.data[name], name)

    def vector(self, name: str, dim: Optional[int] = None) -> np.ndarray:
        values = _numbers(self.data[name], name)
        try:
            return as_vector(values, dim)
        except BaseLethargyError as error:
            raise UsageError(name, str(error)) from error

    def chain(self, seed: int = 0) -> SubspaceChain:
        """{"levels": [[column, ...], ...]} or one of the generators
        {"polynomial": {"grid", "degrees"}}, {"coordinate": {"ranks"}},
        {"random": {"ranks", "seed"}}.
        """

        block = _mapping(self.data["chain"], "chain")
        key = _only_key(block, "chain", ("levels", "polynomial", "coordinate", "random"))
        where = f"chain.{key}"
        try:
            if key == "levels":
                levels = block["levels"]
                if not isinstance(levels, list):
                    raise UsageError(where, "expected a list of levels")
                for k, level in enumerate(levels):
                    if not isinstance(level, list):
                        raise UsageError(f"{where}[{k}]", "expected a list of columns")
                    for j, column in enumerate(level):
                        _numbers(column, f"{where}[{k}][{j}]")
                return SubspaceChain.from_columns(levels, self.ambient_dim)
            spec = _mapping(block[key], where)
            if key == "polynomial":
                grid = spec.get("grid")
                if isinstance(grid, dict):
                    points = _integer(grid.get("points"), f"{where}.grid.points")
                    grid = np.linspace(-1.0, 1.0, points)
                else:
                    grid = _numbers(grid, f"{where}.grid")
                degrees = [
                    _integer(deg, f"{where}.degrees[{k}]")
                    for k, deg in enumerate(spec.get("degrees", []))
                ]
                return chain_polynomials(grid, degrees)
            dim = spec.get("dim", self.ambient_dim)
            if dim is None:
                raise UsageError(where, "needs 'dim' or a top-level ambient_dim")
            dim = _integer(dim, f"{where}.dim")
            ranks = [
                _integer(rank, f"{where}.ranks[{k}]")
                for k, rank in enumerate(spec.get("ranks", []))
            ]
            if key == "coordinate":
                return chain_coordinates(dim, ranks)
            chain_seed = _integer(spec.get("seed", seed), f"{where}.seed")
            return chain_random(dim, ranks, chain_seed)
        except (BaseLethargyError, ValueError, TypeError) as error:
            if isinstance(error, UsageError):
                raise
            raise UsageError(where, str(error)) from error

    def operator(self) -> OperatorSpec:
        """{"matrix": [[...]]} or {"csv": path}, plus optional "domain",
        "codomain" (lp norms) and "h_constant"; `--matrix` wins over both.
        """

        block = _mapping(self.data["operator"], "operator")
        if self.matrix_override is not None:
            matrix = self.matrix_override
        else:
            key = _only_key(block, "operator", ("matrix", "csv"))
            if key == "matrix":
                rows = block["matrix"]
                if not isinstance(rows, list) or not rows:
                    raise UsageError("operator.matrix", "expected a list of rows")
                matrix = [_numbers(row, f"operator.matrix[{k}]") for k, row in enumerate(rows)]
                if len({len(row) for row in matrix}) != 1:
                    raise UsageError("operator.matrix", "rows have different lengths")
            else:
                path = Path(block["csv"])
                if not path.is_absolute() and self.origin is not None:
                    path = self.origin.parent / path
                matrix = read_matrix_csv(path)
        domain = parse_norm(block["domain"], "operator.domain") if "domain" in block else None
        codomain = (
            parse_norm(block["codomain"], "operator.codomain") if "codomain" in block else None
        )
        h_constant = block.get("h_constant")
        if h_constant is not None:
            h_constant = _number(h_constant, "operator.h_constant")
        try:
            return OperatorSpec(matrix, domain, codomain, h_constant)
        except (BaseLethargyError, ValueError, TypeError) as error:
            raise UsageError("operator", str(error)) from error


# -- reports
class Verdict(Enum):
    """Exit codes of a run."""

    PASS = 0
    FAIL = 2
    BUDGET = 3


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value) if not isinstance(value.value, int) else value.name.lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, Enum):
        return _cell(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, set, frozenset, np.ndarray)):
        items = sorted(value, key=_cell) if isinstance(value, (set, frozenset)) else value
        return [_jsonable(item) for item in items]
    return str(value)


class RunReport(
    namedtuple(
        "_RunReport",
        "subcommand digest verdict seed header rows details wall_time",
    )
):
    """Outcome of one subcommand. `wall_time` is `None` unless timing
    was requested, so untimed reports depend only on input and seed.
    """

    __slots__ = ()

    @property
    def exit_code(self) -> int:
        return self.verdict.value

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([_cell(value) for value in row])
        return buffer.getvalue()

    def to_dict(self) -> dict:
        envelope = {
            "version": PROBLEM_VERSION,
            "subcommand": self.subcommand,
            "digest": self.digest,
            "verdict": self.verdict.name.lower(),
            "exit_code": self.exit_code,
            "seed": self.seed,
            "header": list(self.header),
            "rows": [dict(zip(self.header, row)) for row in self.rows],
            "details": self.details,
        }
        if self.wall_time is not None:
            envelope["wall_time"] = self.wall_time
        return _jsonable(envelope)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


class BaseCommand(ABC):
    """Abstract class that implements the `execute` method.

    A concrete subcommand sets NAME, HEADER and the problem blocks it
    REQUIRES or accepts (OPTIONAL), and overrides `compute`; it
    shouldn't override `execute`.
    """

    NAME: ClassVar[str] = ""
    HEADER: ClassVar[tuple[str, ...]] = ()
    REQUIRED: ClassVar[frozenset[str]] = frozenset()
    OPTIONAL: ClassVar[frozenset[str]] = frozenset({"run"})
    # every command accepts these
    COMMON: ClassVar[frozenset[str]] = frozenset({"seed"})

    def __init__(
        self,
        problem: Problem,
        seed: int,
        *,  # makes the remaining arguments keyword-only
        c: Optional[float] = None,
        tol: Optional[float] = None,
        timing: bool = False,
    ) -> None:
        type_check(problem, Problem)
        self.check_blocks(problem)
        self.problem = problem
        self.seed = seed
        self.c = c
        self.tol = tol
        self.timing = timing
        self.details: dict[str, Any] = {}

    @classmethod
    def check_blocks(cls, problem: Problem) -> None:
        missing = cls.REQUIRED - problem.blocks
        if missing:
            raise UsageError(sorted(missing)[0], f"'{cls.NAME}' needs this block")
        extra = problem.blocks - cls.REQUIRED - cls.OPTIONAL - cls.COMMON
        if extra:
            raise UsageError(sorted(extra)[0], f"'{cls.NAME}' doesn't use this block")

    # hooks: don't need to be overridden
    def on_run(self) -> Any:
        logger.info("Running '%s' on %r with seed %d.", self.NAME, self.problem, self.seed)

    def after_run(self, report: RunReport) -> Any:
        pass

    def budget_rows(self, best: Any) -> Iterable[Sequence[Any]]:
        """Rows describing the best incumbent when the budget ran out."""

        return ()

    # the following method MUST be overridden
    @abstractmethod
    def compute(self) -> tuple[Iterable[Sequence[Any]], bool]:
        """Return the report rows and whether the run passed."""

    # MAIN ENTRY: shouldn't be overridden
    @final
    def execute(self) -> RunReport:
        """Run `compute`, turning solver budget exhaustion into a BUDGET
        verdict and any other library error into a FAIL verdict whose
        message lands in `details["error"]`. Usage errors propagate.
        """

        self.on_run()
        start = time.perf_counter()
        try:
            rows, passed = self.compute()
            rows = tuple(tuple(row) for row in rows)
            verdict = Verdict.PASS if passed else Verdict.FAIL
        except UsageError:
            raise
        except InfeasibleAtBudgetError as error:
            logger.warning("'%s' ran out of budget: %s", self.NAME, error)
            rows = tuple(tuple(row) for row in self.budget_rows(error.best))
            verdict = Verdict.BUDGET
            self.details["error"] = str(error)
        except BaseLethargyError as error:
            logger.error("'%s' failed: %s", self.NAME, error)
            rows = ()
            verdict = Verdict.FAIL
            self.details["error"] = f"{typename(error)}: {error}"
        elapsed = time.perf_counter() - start
        logger.info("'%s' finished in %.3f s: %s.", self.NAME, elapsed, verdict.name)
        report = RunReport(
            self.NAME,
            self.problem.digest,
            verdict,
            self.seed,
            self.HEADER,
            rows,
            dict(self.details),
            elapsed if self.timing else None,
        )
        self.after_run(report)
        return report
