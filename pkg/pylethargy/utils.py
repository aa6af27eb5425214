# -*- coding: utf-8 -*-
#
# utils.py
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

"""Declares a few auxiliary functions and the package's exceptions.

The functions aren't related to approximation theory at all; the
numerical types shared by every module are in core.py.
"""

# allowing postponed evaluation of annotations; see:
# https://www.python.org/dev/peps/pep-0563/
from __future__ import annotations

import inspect
from collections.abc import Collection
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Any, Callable, Iterable, Optional, Sequence, Type, TypeVar, Union

import numpy as np

__all__ = [
    "Expectation",
    # generic functions
    "check_positive_int",
    "classname",
    "is_container",
    "run_concurrently",
    "spawn_generators",
    "type_check",
    "typename",
    # exceptions
    "BaseLethargyError",
    "ChainError",
    "DimensionError",
    "DivergentTailError",
    "ExpectationError",
    "HypothesisViolationError",
    "InfeasibleAtBudgetError",
    "InterleaveError",
    "InterleaveFailure",
    "NonPositiveError",
    "NormError",
    "OperatorError",
    "SequenceError",
    "SolverError",
]


# -- CONSTANTS
Expectation = Union[Type, Sequence[Type]]
_T = TypeVar("_T")
_R = TypeVar("_R")


# -- GENERAL-PURPOSE FUNCTIONS
def typename(thing: Any, /) -> str:
    """Return the name of its argument's class."""

    return thing.__class__.__name__


def classname(thing: Any, /) -> str:
    """Return its argument's name, if it's a class,
    or the name of its argument's class.
    """

    if inspect.isclass(thing):
        return thing.__name__
    return typename(thing)


def is_container(thing: Any, /) -> bool:
    """Determine whether the argument is an iterable, but not a `str`."""

    cls = type(thing)
    return issubclass(cls, Collection) and not issubclass(cls, str)


def type_check(
    value: Any, expected: Expectation, was_positive: bool = True
) -> None:
    """Verify whether `value` is of an appropriate type, or
    is not of a forbidden one.

    :param Any value: the object to check
    :param Expectation expected: a class or a sequence of classes
    :param bool was_positive: if `True`, raises `ExpectationError` if
           the type of `value` IS NOT an instance of `expected`.
           If `False`, raises the error if it IS.
    """

    # Enum classes are iterable too, so classes are checked first
    if not isinstance(expected, type) and is_container(expected):
        matches = isinstance(value, tuple(expected))
    else:
        matches = isinstance(value, expected)
    if matches != was_positive:
        raise ExpectationError(value, expected, was_positive=was_positive)


def check_positive_int(integer: int, /, name: str = "value") -> int:
    """Raise `ExpectationError` if `integer` is not an `int` (numpy
    integers included, `bool` excluded), and `NonPositiveError` if
    it's smaller than 1.
    """

    if isinstance(integer, bool):
        raise ExpectationError(integer, int, f"{name} must be an integer")
    type_check(integer, (int, np.integer))
    if integer < 1:
        raise NonPositiveError(integer, name)
    return int(integer)


def spawn_generators(seed: int, count: int) -> list[np.random.Generator]:
    """Independent generators, one per restart, all derived from `seed`."""

    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def run_concurrently(
    function: Callable[[_T], _R],
    items: Iterable[_T],
    workers: Optional[int] = None,
) -> list[_R]:
    """Map `function` over `items`, returning results in input order.

    With `workers` unset (or 1) the map runs in this thread.
    """

    items = list(items)
    if not workers or workers == 1 or len(items) < 2:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # Executor.map yields in submission order, whatever finishes first
        return list(pool.map(function, items))


# -- CLASSES
class ExpectationError(TypeError):
    """Raised when the type of an argument is incorrect.

    Just like `TypeError`, but more verbose.
    """

    def __init__(
        self,
        problem: Any,
        expectation: Expectation,
        *args: str,
        was_positive: bool = True,
    ) -> None:
        if is_container(expectation):
            self.expectation = "/".join(map(classname, expectation))
        else:
            self.expectation = classname(expectation)
        self.problem = repr(problem)
        self.problem_type = typename(problem)
        if args:
            self.message = "".join(args).rstrip() + ". "
        else:
            self.message = ""
        self.was_positive = was_positive
        super().__init__(*args)

    def __str__(self) -> str:
        if self.was_positive:
            msg = (
                f"{self.message}Expected {self.expectation}, "
                f"but {self.problem} is {self.problem_type}"
            )
        else:
            msg = (
                f"{self.message}Found {self.problem} of "
                f"type {self.problem_type}, but "
                "the following class(es) is/are "
                f"not allowed: {self.expectation}"
            )
        return msg


class NonPositiveError(ValueError):
    """Raised when a count or a dimension is smaller than 1."""

    def __init__(self, number: Any, name: str = "value") -> None:
        self.number = number
        self.name = name
        super().__init__(number, name)

    def __str__(self) -> str:
        return f"{self.name} must be a positive integer; but {self.number} found"


# Specific exceptions
class BaseLethargyError(Exception):
    pass


class NormError(BaseLethargyError):
    """Raised when a norm specification is invalid, or when an
    operation doesn't support the given norm family.
    """


class DimensionError(BaseLethargyError):
    """Raised when vectors, bases and matrices don't fit together, or
    when a brute-force oracle is asked for more than it can afford.
    """


class ChainError(BaseLethargyError):
    """Raised when a subspace chain is malformed."""


class SequenceError(BaseLethargyError):
    """Raised when a target sequence isn't non-increasing and
    non-negative, or its metadata is inconsistent.
    """


class DivergentTailError(SequenceError):
    """Raised when a geometric tail makes a weighted series diverge."""

    def __init__(self, ratio: float, limit: float = 0.5) -> None:
        self.ratio = ratio
        self.limit = limit
        super().__init__(ratio, limit)

    def __str__(self) -> str:
        return (
            f"tail ratio {self.ratio!r} makes the 2^(j-n)-weighted series "
            f"diverge; ratios must be smaller than {self.limit!r}"
        )


class InterleaveFailure(Enum):
    INSUFFICIENT_DIMENSION = "insufficient_dimension"
    NON_MERGEABLE = "non_mergeable"


class InterleaveError(BaseLethargyError):
    """Raised when the dyadic ladder cannot be merged into a chain.

    `kind` tells why, `indices` are the offending (1-based) levels.
    """

    def __init__(
        self, kind: InterleaveFailure, indices: Sequence[int], detail: str = ""
    ) -> None:
        self.kind = kind
        self.indices = tuple(indices)
        self.detail = detail
        super().__init__(kind, self.indices, detail)

    def __str__(self) -> str:
        msg = f"{self.kind.name} at level(s) {list(self.indices)}"
        if self.detail:
            msg = f"{msg}: {self.detail}"
        return msg


class HypothesisViolationError(BaseLethargyError):
    """Raised when the inputs fall outside a construction's hypotheses
    (e.g. a target sequence that increases somewhere).
    """


class SolverError(BaseLethargyError):
    pass


class InfeasibleAtBudgetError(SolverError):
    """Raised when every restart failed to meet the tolerance.

    The best incumbent is kept in `best` so callers can still inspect
    it; this signals a solver failure, not a mathematical one.
    """

    def __init__(self, best: Any, residual: float, tolerance: float) -> None:
        self.best = best
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(residual, tolerance)

    def __str__(self) -> str:
        return (
            f"no restart reached tolerance {self.tolerance:.3e}; "
            f"best residual {self.residual:.3e}"
        )


class OperatorError(BaseLethargyError):
    """Raised when an operator lacks a property the operation needs
    (square, symmetric, Hilbert norms, small dimension...).
    """
