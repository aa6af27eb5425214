# -*- coding: utf-8 -*-
#
# core.py
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

"""Declares the value types shared by every module: norm
specifications, vectors, target sequences, solver settings and
distance results.

Subspace chains are not here; they're `pylethargy.spaces.SubspaceChain`.

This module also defines DATA_DIR, which is the `pathlib.Path` where we
store run data (logs and demo bundles), and the numerical tolerances.
"""

# allowing postponed evaluation of annotations; see:
# https://www.python.org/dev/peps/pep-0563/
from __future__ import annotations

import math
import os
from collections import namedtuple
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import appdirs  # https://pypi.org/project/appdirs
import numpy as np

from pylethargy import APPNAME
from pylethargy.utils import (
    DimensionError,
    NormError,
    SequenceError,
    check_positive_int,
    type_check,
    typename,
)

__all__ = [
    "DATA_DIR",
    "CONDITION_TOL",
    "DEFAULT_SEED",
    "FEASIBILITY_TOL",
    "IDENTITY_TOL",
    "RANK_TOL",
    "RAY_T_MAX",
    # enums
    "Family",
    "Flag",
    "Method",
    "TailKind",
    # value types
    "Certificate",
    "DistanceResult",
    "NormSpec",
    "SolverConfig",
    "TailModel",
    "TargetSequence",
    "Vector",
    "as_vector",
]


_ENV_DIR = os.environ.get("LETHARGY_DATA_DIR")
DATA_DIR = Path(_ENV_DIR) if _ENV_DIR else Path(appdirs.user_data_dir(appname=APPNAME))

# rank and span containment, relative to the largest column norm
RANK_TOL = 1e-10
# synthesized distances must match their targets to this, relative to max(d1, 1)
FEASIBILITY_TOL = 1e-6
# summability checks, relative to the terms being compared
CONDITION_TOL = 1e-12
# identities that hold exactly in exact arithmetic
IDENTITY_TOL = 1e-9
RAY_T_MAX = 1e6
DEFAULT_SEED = 0

Vector = np.ndarray


class Family(Enum):
    """Which distance structure governs a space."""

    LP = "lp"
    GRID_SUP = "grid_sup"
    FNORM_PRODUCT = "fnorm_product"
    FNORM_OF_NORM = "fnorm_of_norm"


class Method(Enum):
    """How a distance value was obtained."""

    TRIVIAL = "trivial"
    PROJECTION = "projection"
    LINEAR_PROGRAM = "linear_program"
    CONVEX_DESCENT = "convex_descent"
    CLOSED_FORM = "closed_form"
    TRANSFORM = "transform"
    MULTISTART = "multistart"


class Flag(Enum):
    UPPER_BOUND = "upper_bound"
    LOWER_BOUND = "lower_bound"
    UNCONVERGED = "unconverged"
    TRUNCATED = "truncated"
    OUTSIDE_LEMMA_HYPOTHESIS = "outside_lemma_hypothesis"
    EXTERIOR_REPLACED = "exterior_replaced"


class TailKind(Enum):
    NONE = "none"  # exactly zero beyond the represented values
    GEOMETRIC = "geometric"


def as_vector(coords: Iterable[float], dim: Optional[int] = None) -> Vector:
    """Return a read-only, finite, one-dimensional float array.

    Raise `DimensionError` if it's not 1-D or its length differs from
    `dim`, and `ValueError` if some entry is NaN or infinite.
    """

    array = np.array(coords, dtype=float)
    if array.ndim != 1 or not array.size:
        raise DimensionError(f"expected a non-empty 1-D vector; got shape {array.shape}")
    if dim is not None and array.size != dim:
        raise DimensionError(f"expected a vector of dimension {dim}; got {array.size}")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"vector entries must be finite; got {array}")
    array.flags.writeable = False
    return array


def _parse_p(p: Union[float, str]) -> float:
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "∞"):
            return math.inf
        p = float(p)
    type_check(p, (int, float, np.integer, np.floating))
    p = float(p)
    if math.isnan(p) or p < 1:
        raise NormError(f"LP requires p >= 1 (infinity allowed); got {p!r}")
    return p


class NormSpec(namedtuple("_NormSpec", "family p grid weights base")):
    """Namedtuple describing a norm or an F-norm on R^dim.

    Use the classmethods `lp`, `grid_sup`, `fnorm_product` and
    `fnorm_of_norm` rather than the bare constructor.
    A GRID_SUP vector holds the values of a function at the grid
    points, so its dimension must equal the number of points.
    FNORM_PRODUCT weights default to 2^-i (i counted from 1).
    """

    __slots__ = ()

    def __new__(
        cls,
        family: Family,
        p: Optional[float] = None,
        grid: Optional[Sequence[float]] = None,
        weights: Optional[Sequence[float]] = None,
        base: Optional[NormSpec] = None,
    ) -> NormSpec:
        type_check(family, Family)
        if family is Family.LP:
            p = _parse_p(2.0 if p is None else p)
        elif family is Family.GRID_SUP:
            if grid is None:
                raise NormError("GRID_SUP requires grid points")
            grid = tuple(float(t) for t in grid)
            if not grid:
                raise NormError("GRID_SUP requires at least one grid point")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise NormError("GRID_SUP grid must be strictly increasing")
            if grid[0] < 0 or grid[-1] > 1:
                raise NormError("GRID_SUP grid points must lie in [0, 1]")
        elif family is Family.FNORM_PRODUCT:
            if weights is not None:
                weights = tuple(float(w) for w in weights)
                if not weights or not all(math.isfinite(w) and w > 0 for w in weights):
                    raise NormError("FNORM_PRODUCT weights must be positive and finite")
        elif family is Family.FNORM_OF_NORM:
            if base is None:
                raise NormError("FNORM_OF_NORM requires a base norm")
            type_check(base, NormSpec)
            if base.is_fnorm:
                raise NormError("FNORM_OF_NORM base must be a norm, not an F-norm")
        return super(NormSpec, cls).__new__(cls, family, p, grid, weights, base)

    @classmethod
    def lp(cls, p: Union[float, str] = 2.0) -> NormSpec:
        return cls(Family.LP, p=p)

    @classmethod
    def grid_sup(cls, grid: Sequence[float]) -> NormSpec:
        return cls(Family.GRID_SUP, grid=grid)

    @classmethod
    def fnorm_product(cls, weights: Optional[Sequence[float]] = None) -> NormSpec:
        return cls(Family.FNORM_PRODUCT, weights=weights)

    @classmethod
    def fnorm_of_norm(cls, base: Optional[NormSpec] = None) -> NormSpec:
        return cls(Family.FNORM_OF_NORM, base=base if base is not None else cls.lp(2))

    @property
    def is_fnorm(self) -> bool:
        return self.family in (Family.FNORM_PRODUCT, Family.FNORM_OF_NORM)

    @property
    def is_hilbert(self) -> bool:
        return self.family is Family.LP and self.p == 2

    def weights_for(self, dim: int) -> np.ndarray:
        if self.family is not Family.FNORM_PRODUCT:
            raise NormError(f"{self.family.name} has no coordinate weights")
        dim = check_positive_int(dim, "dim")
        if self.weights is None:
            return 2.0 ** -np.arange(1, dim + 1)
        if len(self.weights) < dim:
            raise DimensionError(
                f"{len(self.weights)} weights given for dimension {dim}"
            )
        return np.array(self.weights[:dim])

    def weight_sum(self, dim: int) -> float:
        """The (finite) total weight over the ambient dimension, which
        bounds every product F-norm value.
        """

        return math.fsum(self.weights_for(dim))

    def check_dim(self, dim: int) -> None:
        if self.family is Family.GRID_SUP and len(self.grid) != dim:
            raise DimensionError(
                f"GRID_SUP has {len(self.grid)} points; vectors have dimension {dim}"
            )
        if self.family is Family.FNORM_PRODUCT:
            self.weights_for(dim)
        if self.family is Family.FNORM_OF_NORM:
            self.base.check_dim(dim)

    def evaluate(self, x: np.ndarray, axis: int = -1) -> Union[float, np.ndarray]:
        """The (F-)norm of `x`, vectorised along `axis`."""

        x = np.asarray(x, dtype=float)
        family = self.family
        if family is Family.LP:
            return np.linalg.norm(x, ord=self.p, axis=axis)
        if family is Family.GRID_SUP:
            return np.max(np.abs(x), axis=axis)
        if family is Family.FNORM_PRODUCT:
            weights = self.weights_for(x.shape[axis])
            absx = np.abs(np.moveaxis(x, axis, -1))
            return np.sum(weights * absx / (1.0 + absx), axis=-1)
        value = self.base.evaluate(x, axis=axis)
        return value / (1.0 + value)

    def __str__(self) -> str:
        family = self.family
        if family is Family.LP:
            return f"lp({self.p:g})"
        if family is Family.GRID_SUP:
            return f"grid_sup({len(self.grid)} points)"
        if family is Family.FNORM_PRODUCT:
            return "fnorm_product(" + ("2^-i" if self.weights is None else "custom") + ")"
        return f"fnorm_of_norm({self.base})"


class TailModel(namedtuple("_TailModel", "kind ratio")):
    """What a target sequence does beyond its represented values."""

    __slots__ = ()

    def __new__(cls, kind: TailKind, ratio: float = 0.0) -> TailModel:
        type_check(kind, TailKind)
        ratio = float(ratio)
        if kind is TailKind.GEOMETRIC and not 0 <= ratio < 1:
            raise SequenceError(f"geometric tail needs 0 <= ratio < 1; got {ratio!r}")
        if kind is TailKind.NONE:
            ratio = 0.0
        return super(TailModel, cls).__new__(cls, kind, ratio)

    @classmethod
    def geometric(cls, ratio: float) -> TailModel:
        return cls(TailKind.GEOMETRIC, ratio)

    @classmethod
    def none(cls) -> TailModel:
        return cls(TailKind.NONE)


class TargetSequence(namedtuple("_TargetSequence", "values n0 tail")):
    """A non-increasing, non-negative sequence d_1 >= d_2 >= ... >= d_N.

    Indices are 1-based, as in `value(n)`.
    `tail` is `None` when nothing is known beyond d_N (the sequence is
    then TRUNCATED), a `TailModel` of kind NONE when every later term is
    zero, and a GEOMETRIC one when d_{N+k} = d_N * ratio^k.
    """

    __slots__ = ()

    def __new__(
        cls,
        values: Iterable[float],
        n0: int = 1,
        tail: Optional[TailModel] = None,
    ) -> TargetSequence:
        values = tuple(float(v) for v in values)
        if not values:
            raise SequenceError("a target sequence needs at least one value")
        if not all(math.isfinite(v) for v in values):
            raise SequenceError(f"values must be finite; got {values}")
        if min(values) < 0:
            raise SequenceError(f"values must be non-negative; got {values}")
        for n, (a, b) in enumerate(zip(values, values[1:]), start=1):
            if b > a:
                raise SequenceError(
                    f"values must be non-increasing; d_{n + 1} = {b!r} > d_{n} = {a!r}"
                )
        n0 = check_positive_int(n0, "n0")
        if n0 > len(values):
            raise SequenceError(f"n0 = {n0} exceeds the {len(values)} represented values")
        if tail is not None:
            type_check(tail, TailModel)
        return super(TargetSequence, cls).__new__(cls, values, n0, tail)

    @classmethod
    def geometric(
        cls, first: float, ratio: float, length: int, n0: int = 1, with_tail: bool = True
    ) -> TargetSequence:
        """d_n = first * ratio^(n-1) for n = 1..length."""

        length = check_positive_int(length, "length")
        values = [first * ratio ** k for k in range(length)]
        tail = TailModel.geometric(ratio) if with_tail else None
        return cls(values, n0, tail)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def N(self) -> int:
        return len(self.values)

    @property
    def is_truncated(self) -> bool:
        return self.tail is None

    @property
    def is_strictly_decreasing_until_zero(self) -> bool:
        """Whether the positive part is strictly decreasing."""

        positive = [v for v in self.values if v > 0]
        return all(b < a for a, b in zip(positive, positive[1:]))

    def value(self, n: int) -> float:
        """d_n, using the tail model beyond N."""

        n = check_positive_int(n, "n")
        if n <= self.N:
            return self.values[n - 1]
        if self.tail is None:
            raise SequenceError(f"d_{n} is beyond the truncation N = {self.N}")
        if self.tail.kind is TailKind.NONE:
            return 0.0
        return self.values[-1] * self.tail.ratio ** (n - self.N)

    def beyond(self) -> float:
        """Sum of every term after d_N (zero for truncated sequences)."""

        if self.tail is None or self.tail.kind is TailKind.NONE:
            return 0.0
        ratio = self.tail.ratio
        return self.values[-1] * ratio / (1.0 - ratio)

    def tail_sum(self, n: int) -> float:
        """Sum of d_k over k > n, the tail model included."""

        return math.fsum(self.values[n:]) + self.beyond()

    def scaled(self, factor: float) -> TargetSequence:
        return type(self)((factor * v for v in self.values), self.n0, self.tail)

    def head(self, length: int) -> TargetSequence:
        """The first `length` values; the result is TRUNCATED unless
        nothing is dropped.
        """

        if length >= self.N:
            return self
        return type(self)(self.values[:length], min(self.n0, length), None)

    def __str__(self) -> str:
        tail = "truncated" if self.tail is None else self.tail.kind.value
        return f"{typename(self)}(N={self.N}, n0={self.n0}, tail={tail})"


class SolverConfig(
    namedtuple(
        "_SolverConfig",
        "tol grad_tol max_iter restarts seed workers tie_break",
        defaults=(FEASIBILITY_TOL, 1e-8, 10_000, 8, DEFAULT_SEED, None, True),
    )
):
    """Immutable per-call solver settings.

    `tol` is the acceptance tolerance of synthesized distances,
    `grad_tol` the gradient tolerance of iterative descents (scaled by
    1 + |x|), `workers` the thread count for concurrent restarts and
    levels (`None` runs them sequentially) and `tie_break` whether LP
    optima are replaced by the optimum of smallest Euclidean norm.
    """

    __slots__ = ()


Certificate = namedtuple("Certificate", "method residual iterations restarts flags")


class DistanceResult(namedtuple("_DistanceResult", "value minimizer certificate is_exact")):
    __slots__ = ()

    @property
    def method(self) -> Method:
        return self.certificate.method

    @property
    def flags(self) -> frozenset:
        return self.certificate.flags

    @property
    def residual(self) -> float:
        return self.certificate.residual
