# -*- coding: utf-8 -*-
#
# spaces.py
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

"""Declares `SubspaceChain`, its validation, and the chain generators:
polynomial chains on a grid, coordinate and random chains, and the
interleaving of a dyadic ladder into a given chain.

Levels are numbered from 1 in every report, as Y_1 c Y_2 c ... c Y_m;
Y_0 stands for {0} and Y_{m+1} for the whole space.
"""

# allowing postponed evaluation of annotations; see:
# https://www.python.org/dev/peps/pep-0563/
from __future__ import annotations

import logging
import math
from collections import namedtuple
from enum import Enum
from typing import Iterator, Optional, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial import legendre

from pylethargy.core import RANK_TOL, TargetSequence
from pylethargy.utils import (
    ChainError,
    InterleaveError,
    InterleaveFailure,
    SequenceError,
    check_positive_int,
    typename,
)

__all__ = [
    "ChainIssue",
    "ChainReport",
    "Interleaving",
    "IssueKind",
    "SubspaceChain",
    "chain_coordinates",
    "chain_polynomials",
    "chain_random",
    "coordinate_support",
    "interleave_chain",
    "numerical_rank",
    "orthonormal_basis",
    "validate_chain",
]

logger = logging.getLogger(__name__)

# ladder values closer than this (relatively) to some d_n are d_n
MATCH_TOL = 1e-12


def _pivoted_qr(matrix: np.ndarray) -> tuple[np.ndarray, int]:
    """Orthonormal factor of a column-pivoted QR and the numerical rank,
    counting |R_kk| > RANK_TOL * |R_00| (|R_00| is the largest column norm).
    """

    dim, cols = matrix.shape
    if not cols:
        return np.zeros((dim, 0)), 0
    q, r, _ = scipy.linalg.qr(matrix, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag[0] == 0:
        return np.zeros((dim, 0)), 0
    rank = int(np.count_nonzero(diag > RANK_TOL * diag[0]))
    return q[:, :rank], rank


def numerical_rank(matrix: np.ndarray) -> int:
    return _pivoted_qr(np.asarray(matrix, dtype=float))[1]


def orthonormal_basis(matrix: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the numerical range of `matrix`."""

    return _pivoted_qr(np.asarray(matrix, dtype=float))[0]


def coordinate_support(q: np.ndarray) -> Optional[tuple[int, ...]]:
    """For orthonormal `q` spanning a coordinate subspace, the spanning
    coordinates (0-based); `None` for any other subspace.
    """

    row_mass = np.sum(q * q, axis=1)
    on = row_mass > 0.5
    if not np.allclose(row_mass, on.astype(float), atol=1e-9):
        return None
    if int(np.count_nonzero(on)) != q.shape[1]:
        return None
    return tuple(int(i) for i in np.flatnonzero(on))


def _sign_fixed(columns: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""

    if not columns.shape[1]:
        return columns
    rows = np.argmax(np.abs(columns), axis=0)
    signs = np.sign(columns[rows, np.arange(columns.shape[1])])
    signs[signs == 0] = 1.0
    return columns * signs


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


class SubspaceChain:
    """Finite sequence of subspaces of R^ambient_dim, each given by
    basis columns.

    Construction only checks shapes and finiteness; whether the levels
    really are strictly nested is `validate_chain`'s job.
    The chain is immutable; 0-based indexing returns the basis matrices.
    """

    def __init__(
        self, bases: Sequence[np.ndarray], ambient_dim: Optional[int] = None
    ) -> None:
        if not len(bases):
            raise ChainError("a chain needs at least one level")
        matrices = []
        for level, basis in enumerate(bases, start=1):
            matrix = np.asarray(basis, dtype=float)
            if matrix.ndim == 1:
                matrix = matrix.reshape(-1, 1)
            if matrix.ndim != 2:
                raise ChainError(f"level {level}: basis must be a matrix")
            if not np.all(np.isfinite(matrix)):
                raise ChainError(f"level {level}: basis has non-finite entries")
            matrices.append(matrix)
        dims = {matrix.shape[0] for matrix in matrices}
        if ambient_dim is None:
            ambient_dim = max(dims)
        ambient_dim = check_positive_int(ambient_dim, "ambient_dim")
        if dims != {ambient_dim}:
            raise ChainError(
                f"every basis must have {ambient_dim} rows; found {sorted(dims)}"
            )
        self.ambient_dim = ambient_dim
        self.bases = tuple(_readonly(matrix) for matrix in matrices)
        factors = [_pivoted_qr(matrix) for matrix in matrices]
        self._orthonormal = tuple(_readonly(q) for q, _ in factors)
        self.ranks = tuple(rank for _, rank in factors)

    @classmethod
    def from_columns(
        cls, levels: Sequence[Sequence[Sequence[float]]], ambient_dim: Optional[int] = None
    ) -> SubspaceChain:
        """Build from the problem-file layout: one list of column
        vectors per level.
        """

        bases = []
        for level, columns in enumerate(levels, start=1):
            columns = [np.asarray(col, dtype=float) for col in columns]
            if not columns:
                if ambient_dim is None:
                    raise ChainError(f"level {level}: empty level needs ambient_dim")
                bases.append(np.zeros((ambient_dim, 0)))
                continue
            if len({col.shape for col in columns}) != 1 or columns[0].ndim != 1:
                raise ChainError(f"level {level}: columns must be vectors of one length")
            bases.append(np.column_stack(columns))
        return cls(bases, ambient_dim)

    def __len__(self) -> int:
        return len(self.bases)

    def __getitem__(self, index: int) -> np.ndarray:
        return self.bases[index]

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.bases)

    def __repr__(self) -> str:
        return f"{typename(self)}(ambient_dim={self.ambient_dim}, ranks={self.ranks})"

    @property
    def column_counts(self) -> tuple[int, ...]:
        return tuple(basis.shape[1] for basis in self.bases)

    def orthonormal(self, level: int) -> np.ndarray:
        """Orthonormal basis of Y_level (1-based; 0 gives {0} and
        m+1 the whole space).
        """

        if level == 0:
            return np.zeros((self.ambient_dim, 0))
        if level == len(self) + 1:
            return np.eye(self.ambient_dim)
        if not 1 <= level <= len(self):
            raise IndexError(f"level {level} outside 0..{len(self) + 1}")
        return self._orthonormal[level - 1]

    def complement(self, level: int) -> np.ndarray:
        """Orthonormal basis of the orthogonal complement of Y_level
        inside Y_{level+1}, sign-normalized so each column's largest
        entry is positive.
        """

        inner = self.orthonormal(level)
        outer = self.orthonormal(level + 1)
        if not inner.shape[1]:
            return _sign_fixed(outer.copy())
        kernel = scipy.linalg.null_space(inner.T @ outer, rcond=RANK_TOL)
        return _sign_fixed(outer @ kernel)

    def coordinate_support(self, level: int) -> Optional[tuple[int, ...]]:
        """The coordinates spanning Y_level when it is a coordinate
        subspace, else `None`.
        """

        return coordinate_support(self.orthonormal(level))

    def contains(self, level: int, vector: np.ndarray) -> bool:
        q = self.orthonormal(level)
        vector = np.asarray(vector, dtype=float)
        scale = max(float(np.linalg.norm(vector)), 1e-300)
        return float(np.linalg.norm(vector - q @ (q.T @ vector))) <= RANK_TOL * scale

    def truncated(self, levels: int) -> SubspaceChain:
        return type(self)(self.bases[:levels], self.ambient_dim)

    def check_integrity(self) -> None:
        """Raise `ChainError` unless the chain validates."""

        report = validate_chain(self)
        if not report.passed:
            raise ChainError(f"invalid chain: {report}")


class IssueKind(Enum):
    RANK_DEFICIENT = "rank_deficient"
    NOT_NESTED = "not_nested"
    NOT_STRICT = "not_strict"
    NO_EXTERIOR = "no_exterior"


ChainIssue = namedtuple("ChainIssue", "kind level detail")


class ChainReport(namedtuple("_ChainReport", "passed issues")):
    __slots__ = ()

    def __str__(self) -> str:
        if self.passed:
            return "chain passes"
        return "; ".join(
            f"{issue.kind.name} at level {issue.level} ({issue.detail})"
            for issue in self.issues
        )


def validate_chain(chain: SubspaceChain) -> ChainReport:
    """Check full column rank, nestedness, strict growth and room for an
    exterior point; failures are reported, never raised.
    """

    issues = []
    for level, (basis, rank) in enumerate(zip(chain.bases, chain.ranks), start=1):
        if rank != basis.shape[1]:
            issues.append(
                ChainIssue(
                    IssueKind.RANK_DEFICIENT,
                    level,
                    f"rank {rank} < {basis.shape[1]} columns",
                )
            )
    for level in range(1, len(chain)):
        inner = chain.bases[level - 1]
        outer_q = chain.orthonormal(level + 1)
        if inner.shape[1]:
            scale = max(
                float(np.max(np.linalg.norm(inner, axis=0))),
                float(np.max(np.linalg.norm(chain.bases[level], axis=0), initial=0.0)),
            )
            leftover = inner - outer_q @ (outer_q.T @ inner)
            worst = float(np.max(np.linalg.norm(leftover, axis=0)))
            if worst > RANK_TOL * scale:
                issues.append(
                    ChainIssue(
                        IssueKind.NOT_NESTED,
                        level + 1,
                        f"a column of level {level} leaves level {level + 1} by {worst:.3e}",
                    )
                )
        if chain.ranks[level] <= chain.ranks[level - 1]:
            issues.append(
                ChainIssue(
                    IssueKind.NOT_STRICT,
                    level + 1,
                    f"rank {chain.ranks[level]} <= {chain.ranks[level - 1]}",
                )
            )
    if chain.ranks[-1] >= chain.ambient_dim:
        issues.append(
            ChainIssue(
                IssueKind.NO_EXTERIOR,
                len(chain),
                f"last level fills R^{chain.ambient_dim}",
            )
        )
    report = ChainReport(not issues, tuple(issues))
    logger.debug("Validated %r: %s", chain, report)
    return report


def chain_polynomials(grid: Sequence[float], degrees: Sequence[int]) -> SubspaceChain:
    """Polynomials of each degree sampled on `grid`, as a chain.

    The columns are an orthonormalized Legendre-Vandermonde basis (on
    the grid mapped to [-1, 1]); orthonormalization keeps every span.
    """

    points = np.asarray(grid, dtype=float)
    if points.ndim != 1 or not points.size:
        raise ChainError("grid must be a non-empty list of points")
    steps = np.diff(points)
    if np.any(steps == 0):
        raise ChainError("degenerate grid: repeated points")
    if np.any(steps < 0):
        raise ChainError("grid points must be sorted")
    degrees = [int(deg) for deg in degrees]
    if not degrees or degrees[0] < 0:
        raise ChainError("degrees must be non-negative")
    if any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise ChainError(f"degrees must be strictly increasing; got {degrees}")
    top = degrees[-1]
    if points.size < top + 1:
        raise ChainError(f"{points.size} grid points cannot carry degree {top}")
    lo, hi = points[0], points[-1]
    mapped = np.zeros_like(points) if hi == lo else 2 * (points - lo) / (hi - lo) - 1
    vander = legendre.legvander(mapped, top)
    q, _ = np.linalg.qr(vander)
    return SubspaceChain([q[:, : deg + 1] for deg in degrees], points.size)


def _check_ranks(dim: int, ranks: Sequence[int]) -> list[int]:
    dim = check_positive_int(dim, "dim")
    ranks = [int(r) for r in ranks]
    if not ranks or ranks[0] < 0 or ranks[-1] > dim:
        raise ChainError(f"ranks must lie in 0..{dim}; got {ranks}")
    if any(b <= a for a, b in zip(ranks, ranks[1:])):
        raise ChainError(f"ranks must be strictly increasing; got {ranks}")
    return ranks


def chain_coordinates(dim: int, ranks: Sequence[int]) -> SubspaceChain:
    """V_k = span{e_1, ..., e_{ranks[k]}}."""

    ranks = _check_ranks(dim, ranks)
    eye = np.eye(dim)
    return SubspaceChain([eye[:, :r] for r in ranks], dim)


def chain_random(dim: int, ranks: Sequence[int], seed: int = 0) -> SubspaceChain:
    """Nested spans of the leading columns of one seeded Gaussian matrix."""

    ranks = _check_ranks(dim, ranks)
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((dim, max(ranks[-1], 1)))
    q, _ = np.linalg.qr(gauss)
    return SubspaceChain([q[:, :r] for r in ranks], dim)


class Interleaving(
    namedtuple(
        "_Interleaving",
        "chain sequence index_map dyadic inserted floor K i0",
    )
):
    """Result of `interleave_chain`.

    `index_map[n-1]` is the merged level of original level n;
    `dyadic` maps merged levels to their ladder value K*2^-i;
    `inserted` lists the merged levels that are new;
    `floor` is the first ladder value below the whole sequence.
    All indices are 1-based.
    """

    __slots__ = ()

    @property
    def first_dyadic(self) -> int:
        return min(self.dyadic)


def interleave_chain(
    chain: SubspaceChain,
    d: TargetSequence,
    K: Optional[float] = None,
    i0: int = 1,
    seed: int = 0,
) -> Interleaving:
    """Merge the ladder {K*2^-i : i >= i0, K*2^-i >= d_m} into (d, Y).

    A ladder value equal to some d_n marks the first level of that tie
    run; every other one becomes a new level between Y_g and Y_{g+1},
    spanned by Y_g plus seeded directions from the complement of Y_g in
    Y_{g+1}. `r` new levels in one gap need a rank jump of r + 1.
    """

    chain.check_integrity()
    m = len(chain)
    if d.N < m:
        raise SequenceError(f"{d.N} targets for a chain of {m} levels")
    values = d.values[:m]
    if values[-1] <= 0:
        raise SequenceError("interleaving needs strictly positive targets")
    if K is None:
        K = 2.0 * values[0]
    K = float(K)
    if not K > 0 or not math.isfinite(K):
        raise ValueError(f"K must be positive; got {K!r}")
    i0 = check_positive_int(i0, "i0")

    ladder = []
    i = i0
    while K * 2.0 ** -i >= values[-1] * (1 - MATCH_TOL):
        ladder.append(K * 2.0 ** -i)
        i += 1
    floor = K * 2.0 ** -i
    if not ladder:
        raise InterleaveError(
            InterleaveFailure.NON_MERGEABLE,
            [m],
            f"ladder starts at {floor!r}, below d_{m} = {values[-1]!r}",
        )

    # ties above the ladder can't be re-targeted, see lethargy.konyagin_targets
    top = ladder[0]
    for n in range(1, m):
        if values[n] == values[n - 1] and values[n] > top * (1 + MATCH_TOL):
            raise InterleaveError(
                InterleaveFailure.NON_MERGEABLE,
                [n, n + 1],
                f"tied targets {values[n]!r} above the ladder's top {top!r}",
            )

    matched: dict[int, float] = {}
    gaps: dict[int, list[float]] = {}
    for rung in ladder:
        hit = next(
            (n for n, v in enumerate(values, start=1) if abs(v - rung) <= MATCH_TOL * rung),
            None,
        )
        if hit is not None:
            matched[hit] = values[hit - 1]
            continue
        # Y_g has d_g > rung > d_{g+1}; g = 0 stands for {0}
        gap = sum(1 for v in values if v > rung)
        gaps.setdefault(gap, []).append(rung)

    rng = np.random.default_rng(seed)
    for gap in sorted(gaps):
        jump = chain.ranks[gap] - (chain.ranks[gap - 1] if gap else 0)
        if jump < len(gaps[gap]) + 1:
            raise InterleaveError(
                InterleaveFailure.INSUFFICIENT_DIMENSION,
                [gap, gap + 1] if gap else [1],
                f"{len(gaps[gap])} level(s) to insert but the rank only grows by {jump}",
            )

    bases: list[np.ndarray] = []
    merged: list[float] = []
    index_map: list[int] = []
    dyadic: dict[int, float] = {}
    inserted: list[int] = []
    for gap in range(m):
        base = chain.bases[gap - 1] if gap else np.zeros((chain.ambient_dim, 0))
        rungs = gaps.get(gap, [])
        if rungs:
            comp = chain.complement(gap)
            mix = rng.standard_normal((comp.shape[1], len(rungs)))
            directions, _ = np.linalg.qr(comp @ mix)
            for k, rung in enumerate(rungs, start=1):
                bases.append(np.column_stack([base, directions[:, :k]]))
                merged.append(rung)
                dyadic[len(merged)] = rung
                inserted.append(len(merged))
        bases.append(chain.bases[gap])
        merged.append(values[gap])
        index_map.append(len(merged))
        if gap + 1 in matched:
            dyadic[len(merged)] = matched[gap + 1]

    n0 = index_map[min(d.n0, m) - 1]
    sequence = TargetSequence(merged, n0, d.tail if d.N == m else None)
    extended = SubspaceChain(bases, chain.ambient_dim)
    extended.check_integrity()
    logger.info(
        "Interleaved %d ladder value(s) into %d levels (%d inserted, K=%r, i0=%d).",
        len(ladder),
        m,
        len(inserted),
        K,
        i0,
    )
    return Interleaving(
        extended,
        sequence,
        tuple(index_map),
        dyadic,
        tuple(inserted),
        floor,
        K,
        i0,
    )
