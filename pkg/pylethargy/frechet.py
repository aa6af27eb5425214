# -*- coding: utf-8 -*-
#
# frechet.py
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

"""Chains in F-normed spaces.

The deviation of V_n from V_{n+1} is sup{rho_F(v, V_n) : v in V_{n+1}};
without homogeneity it need not be reached, so it is computed as a
closed form, a limit along rays, or a sampled lower bound. The rest of
the module checks the weighted summability condition that makes
lethargy hold in F-spaces and the two-sided bounds it promises.
"""

# allowing postponed evaluation of annotations; see:
# https://www.python.org/dev/peps/pep-0563/
from __future__ import annotations

import logging
import math
from collections import namedtuple
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from pylethargy.core import (
    IDENTITY_TOL,
    RAY_T_MAX,
    Family,
    NormSpec,
    SolverConfig,
    TailKind,
    TailModel,
    TargetSequence,
    Vector,
    as_vector,
)
from pylethargy.distance import distance_onb
from pylethargy.spaces import SubspaceChain, chain_coordinates, coordinate_support
from pylethargy.utils import (
    ChainError,
    DimensionError,
    DivergentTailError,
    HypothesisViolationError,
    NormError,
    SequenceError,
    check_positive_int,
    run_concurrently,
    spawn_generators,
    type_check,
)

__all__ = [
    "ALConditionReport",
    "BANACH",
    "CorollaryReport",
    "DeviationEntry",
    "DeviationMethod",
    "DeviationReport",
    "DeviationTrend",
    "FrechetBoundReport",
    "ProductWitness",
    "RayConfig",
    "check_al_condition",
    "corollary_transforms",
    "deviation",
    "deviation_inf",
    "product_witness",
    "verify_frechet_bounds",
]

logger = logging.getLogger(__name__)

BOUND_TOL = 1e-9


class DeviationMethod(Enum):
    CLOSED_FORM = "closed_form"
    RAY_LIMIT = "ray_limit"
    SAMPLED_LOWER_BOUND = "sampled_lower_bound"


class DeviationTrend(Enum):
    BOUNDED_BELOW = "bounded_below"
    DECAYING = "decaying"


class Deviation(Enum):
    """Stand-in for deviations of a Banach space, where the sup over
    an unbounded subspace is infinite.
    """

    BANACH = "banach"


BANACH = Deviation.BANACH


class RayConfig(
    namedtuple("_RayConfig", "t_max steps directions samples seed", defaults=(RAY_T_MAX, 13, None, 16, 0))
):
    """How rays t * v are laid out: `steps` log-spaced t in [1, t_max],
    along the columns of `directions` (default: an orthonormal basis
    of the relative complement) plus `samples` seeded random ones for
    the sampled method.
    """

    __slots__ = ()

    def __new__(
        cls,
        t_max: float = RAY_T_MAX,
        steps: int = 13,
        directions: Optional[np.ndarray] = None,
        samples: int = 16,
        seed: int = 0,
    ) -> RayConfig:
        t_max = float(t_max)
        if not t_max >= 1:
            raise ValueError(f"t_max must be >= 1; got {t_max!r}")
        steps = check_positive_int(steps, "steps")
        if directions is not None:
            directions = np.array(directions, dtype=float)
            if directions.ndim == 1:
                directions = directions.reshape(-1, 1)
            directions.flags.writeable = False
        samples = int(samples)
        if samples < 0:
            raise ValueError(f"samples must be >= 0; got {samples!r}")
        return super(RayConfig, cls).__new__(cls, t_max, steps, directions, samples, int(seed))

    @property
    def ladder(self) -> np.ndarray:
        return np.geomspace(1.0, self.t_max, self.steps)


DeviationEntry = namedtuple("DeviationEntry", "n value method residual")


def _check_fnorm(fnorm: NormSpec) -> None:
    type_check(fnorm, NormSpec)
    if not fnorm.is_fnorm:
        raise NormError(f"deviations are for F-norms; got {fnorm}")


def _ray_sup(
    directions: np.ndarray, inner: np.ndarray, fnorm: NormSpec, ladder: np.ndarray
) -> float:
    config = SolverConfig(tie_break=False)
    best = 0.0
    for v in directions.T:
        for t in ladder:
            best = max(best, distance_onb(t * v, inner, fnorm, config).value)
    return best


def deviation(
    chain: SubspaceChain, fnorm: NormSpec, n: int, ray: Optional[RayConfig] = None
) -> DeviationEntry:
    """d_{n,V} for levels n and n+1 of `chain` (1-based); the last
    level is compared with the whole space.

    `residual` is the gap to the cap the value tends to: 1 for
    F-norms of norms, the total weight of the new coordinates (or of
    all coordinates) for product F-norms.
    """

    type_check(chain, SubspaceChain)
    _check_fnorm(fnorm)
    ray = ray or RayConfig()
    n = check_positive_int(n, "n")
    if n > len(chain):
        raise ChainError(f"level {n} outside a chain of {len(chain)} levels")
    dim = chain.ambient_dim
    fnorm.check_dim(dim)
    inner = chain.orthonormal(n)
    outer = chain.orthonormal(n + 1)

    if ray.directions is not None:
        directions = ray.directions
        if directions.shape[0] != dim:
            raise DimensionError(f"directions have dimension {directions.shape[0]}, not {dim}")
        for v in directions.T:
            if not chain.contains(n + 1, v):
                raise DimensionError(f"a ray direction leaves level {n + 1}")
    else:
        directions = chain.complement(n)

    if fnorm.family is Family.FNORM_OF_NORM:
        value = _ray_sup(directions, inner, fnorm, ray.ladder)
        return DeviationEntry(n, value, DeviationMethod.RAY_LIMIT, 1.0 - value)

    weights = fnorm.weights_for(dim)
    inner_support = coordinate_support(inner) if inner.shape[1] else ()
    outer_support = coordinate_support(outer)
    if ray.directions is None and inner_support is not None and outer_support is not None:
        # sup of sum w_j t/(1+t) over the new coordinates, reached as t -> inf
        fresh = sorted(set(outer_support) - set(inner_support))
        value = math.fsum(weights[fresh])
        return DeviationEntry(n, value, DeviationMethod.CLOSED_FORM, 0.0)

    rngs = spawn_generators(ray.seed, ray.samples)
    sampled = [outer @ rng.standard_normal(outer.shape[1]) for rng in rngs]
    sampled = [v / np.linalg.norm(v) for v in sampled if np.linalg.norm(v) > 0]
    if sampled:
        directions = np.column_stack([directions] + sampled)
    value = _ray_sup(directions, inner, fnorm, ray.ladder)
    cap = math.fsum(weights)
    logger.warning("d_{%d,V} for %s is a sampled lower bound: %.6g", n, fnorm, value)
    return DeviationEntry(n, value, DeviationMethod.SAMPLED_LOWER_BOUND, cap - value)


class DeviationReport(namedtuple("_DeviationReport", "entries inf N trend")):
    """d_{n,V} for n = 1..N and their infimum d_V over that range.

    `trend` is evidence only: BOUNDED_BELOW when the smallest deviation
    is at least half the largest, DECAYING otherwise.
    """

    __slots__ = ()

    def value(self, n: int) -> float:
        for entry in self.entries:
            if entry.n == n:
                return entry.value
        return self.inf


def deviation_inf(
    chain: SubspaceChain,
    fnorm: NormSpec,
    N: Optional[int] = None,
    ray: Optional[RayConfig] = None,
    workers: Optional[int] = None,
) -> DeviationReport:
    type_check(chain, SubspaceChain)
    N = len(chain) if N is None else check_positive_int(N, "N")
    if N > len(chain):
        raise ChainError(f"N = {N} exceeds the chain length {len(chain)}")
    entries = tuple(
        run_concurrently(lambda n: deviation(chain, fnorm, n, ray), range(1, N + 1), workers)
    )
    values = [entry.value for entry in entries]
    inf = min(values)
    trend = DeviationTrend.BOUNDED_BELOW if inf >= 0.5 * max(values) else DeviationTrend.DECAYING
    logger.info("d_V over %d levels of %s: %.6g (%s).", N, fnorm, inf, trend.value)
    return DeviationReport(entries, inf, N, trend)


# -- summability
ALRow = namedtuple("ALRow", "n partial tail threshold passed")


class ALConditionReport(namedtuple("_ALConditionReport", "rows banach_mode truncated passed")):
    """Per n: sum_{j>=n} 2^(j-n) (delta_j + e_j) < min(d_{n,V}, e_{n-1})
    with e_0 = inf. `tail` is the closed-form sum beyond the represented
    terms; truncated sequences have none and never pass.
    """

    __slots__ = ()


def _weighted_tail(seq: TargetSequence, n: int) -> Optional[float]:
    """sum_{j>N} 2^(j-n) s_j under the tail model of `seq`."""

    if seq.tail is None:
        return None
    if seq.tail.kind is TailKind.NONE:
        return 0.0
    ratio = seq.tail.ratio
    if 2 * ratio >= 1:
        raise DivergentTailError(ratio)
    return 2.0 ** (seq.N - n) * seq.values[-1] * 2 * ratio / (1 - 2 * ratio)


def check_al_condition(
    e: TargetSequence,
    delta: Optional[TargetSequence] = None,
    dev: Union[DeviationReport, float, Deviation] = BANACH,
    n_range: Optional[Sequence[int]] = None,
) -> ALConditionReport:
    type_check(e, TargetSequence)
    banach_mode = dev is BANACH
    if delta is None:
        if not banach_mode:
            raise SequenceError("delta may only be omitted for Banach spaces")
        delta = TargetSequence([0.0] * e.N, tail=TailModel.none())
    type_check(delta, TargetSequence)
    if delta.N != e.N:
        raise SequenceError(f"e has {e.N} values but delta has {delta.N}")
    if isinstance(dev, DeviationReport):
        deviation_at = dev.value
    elif banach_mode:
        deviation_at = lambda n: math.inf
    else:
        constant = float(dev)
        deviation_at = lambda n: constant
    n_range = range(1, e.N + 1) if n_range is None else n_range
    terms = [d + x for d, x in zip(delta.values, e.values)]
    truncated = e.is_truncated or delta.is_truncated
    rows = []
    for n in n_range:
        n = check_positive_int(n, "n")
        if n > e.N:
            raise SequenceError(f"n = {n} is beyond the {e.N} represented values")
        partial = math.fsum(2.0 ** (j - n) * terms[j - 1] for j in range(n, e.N + 1))
        tails = [_weighted_tail(delta, n), _weighted_tail(e, n)]
        tail = None if None in tails else sum(tails)
        previous = math.inf if n == 1 else e.values[n - 2]
        threshold = min(deviation_at(n), previous)
        passed = tail is not None and partial + tail < threshold
        rows.append(ALRow(n, partial, tail, threshold, passed))
    passed = not truncated and all(row.passed for row in rows)
    logger.info("AL condition (banach=%s) over %d levels: %s.", banach_mode, len(rows), passed)
    return ALConditionReport(tuple(rows), banach_mode, truncated, passed)


# -- bounds
FrechetRow = namedtuple("FrechetRow", "n e_n rho ratio passed certified")


class FrechetBoundReport(namedtuple("_FrechetBoundReport", "rows passed")):
    """e_n / 3 <= rho_F(x, V_n) <= 3 e_n for the checked levels;
    `certified` marks exact distances.
    """

    __slots__ = ()


def verify_frechet_bounds(
    x: Vector,
    chain: SubspaceChain,
    e: TargetSequence,
    n0: Optional[int] = None,
    fnorm: Optional[NormSpec] = None,
) -> FrechetBoundReport:
    type_check(chain, SubspaceChain)
    type_check(e, TargetSequence)
    fnorm = fnorm if fnorm is not None else NormSpec.fnorm_product()
    x = as_vector(x, chain.ambient_dim)
    n0 = e.n0 if n0 is None else check_positive_int(n0, "n0")
    config = SolverConfig(tie_break=False)
    rows = []
    for n in range(n0, min(len(chain), e.N) + 1):
        e_n = e.values[n - 1]
        if e_n <= 0:
            raise SequenceError(f"e_{n} = {e_n!r}; the bounds need positive targets")
        result = distance_onb(x, chain.orthonormal(n), fnorm, config)
        ratio = result.value / e_n
        passed = 1 / 3 - BOUND_TOL <= ratio <= 3 + BOUND_TOL
        rows.append(FrechetRow(n, e_n, result.value, ratio, passed, result.is_exact))
    return FrechetBoundReport(tuple(rows), all(row.passed for row in rows))


CorollaryRow = namedtuple("CorollaryRow", "n e_n shapiro tyuremskikh implication boundary")


class CorollaryReport(
    namedtuple("_CorollaryReport", "rows shapiro_targets tyuremskikh_targets")
):
    """sqrt(e_n) and 3 sqrt(e_n), the targets the two corollaries feed
    to the bound theorem; `implication` is sqrt(e_n) >= e_n, and
    `boundary` marks e_n = 1 where both sides agree.
    """

    __slots__ = ()


def corollary_transforms(e: TargetSequence) -> CorollaryReport:
    type_check(e, TargetSequence)
    roots = [math.sqrt(v) for v in e.values]
    rows = tuple(
        CorollaryRow(
            n,
            v,
            root,
            3 * root,
            root >= v,
            math.isclose(v, 1.0, rel_tol=IDENTITY_TOL),
        )
        for n, (v, root) in enumerate(zip(e.values, roots), start=1)
    )
    tail = e.tail
    if tail is not None and tail.kind is TailKind.GEOMETRIC:
        tail = TailModel.geometric(math.sqrt(tail.ratio))
    shapiro = TargetSequence(roots, e.n0, tail)
    return CorollaryReport(rows, shapiro, shapiro.scaled(3.0))


ProductWitness = namedtuple("ProductWitness", "x chain fnorm")


def product_witness(
    e: TargetSequence, weights: Optional[Sequence[float]] = None
) -> ProductWitness:
    """x with rho_F(x, V_n) = e_n exactly, for the coordinate chain
    V_n = span{e_1..e_n} in dimension N+1 and a product F-norm.

    rho_F(x, V_n) = sum_{j>n} w_j s_j with s_j = |x_j| / (1 + |x_j|),
    so consecutive differences fix every s_j; each must stay below 1.
    """

    type_check(e, TargetSequence)
    dim = e.N + 1
    fnorm = NormSpec.fnorm_product(weights)
    w = fnorm.weights_for(dim)
    drops = [a - b for a, b in zip(e.values, e.values[1:] + (0.0,))]
    x = np.zeros(dim)
    for j, (drop, weight) in enumerate(zip(drops, w[1:]), start=1):
        s = drop / weight
        if s >= 1:
            raise HypothesisViolationError(
                f"e_{j} - e_{j + 1} = {drop!r} is not below w_{j + 1} = {weight!r}"
            )
        x[j] = s / (1 - s)
    chain = chain_coordinates(dim, range(1, e.N + 1))
    return ProductWitness(as_vector(x), chain, fnorm)
