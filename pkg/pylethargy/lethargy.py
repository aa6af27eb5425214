# -*- coding: utf-8 -*-
#
# lethargy.py
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

"""Lethargy constructions on finite chains.

* summability checks d_n > (or >=) sum of the later terms;
* `synthesize_exact`, an element x with rho(x, Y_k) = d_k exactly;
* `synthesize_konyagin`, an x_c with c d_n <= rho(x_c, Y_n) <= 4c d_n;
* verifiers and ratio reports for any candidate x.
"""

# allowing postponed evaluation of annotations; see:
# https://www.python.org/dev/peps/pep-0563/
from __future__ import annotations

import logging
import math
from collections import namedtuple
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq, least_squares

from pylethargy.core import (
    CONDITION_TOL,
    FEASIBILITY_TOL,
    Flag,
    NormSpec,
    SolverConfig,
    TailModel,
    TargetSequence,
    Vector,
    as_vector,
)
from pylethargy.distance import distance_onb
from pylethargy.spaces import Interleaving, SubspaceChain, interleave_chain
from pylethargy.utils import (
    HypothesisViolationError,
    InfeasibleAtBudgetError,
    NormError,
    SequenceError,
    check_positive_int,
    run_concurrently,
    spawn_generators,
    type_check,
)

__all__ = [
    "BoundCase",
    "BoundReport",
    "BoundRow",
    "ConditionReport",
    "KonyaginConfig",
    "KonyaginResult",
    "RatioReport",
    "RatioRow",
    "SynthesisResult",
    "check_condition_strict",
    "check_condition_weak",
    "konyagin_targets",
    "ratio_report",
    "synthesize_exact",
    "synthesize_konyagin",
    "verify_bounds",
]

logger = logging.getLogger(__name__)

SYNTHESIS_RESTARTS = 16


# -- summability
class ConditionReport(
    namedtuple("_ConditionReport", "passed strict first_violation margins labels")
):
    """`margins` holds (n, d_n, tail sum, d_n - tail sum, passed) rows
    for every checked n >= n0; `first_violation` is `None` on a pass.
    """

    __slots__ = ()


def _condition(d: TargetSequence, strict: bool) -> ConditionReport:
    type_check(d, TargetSequence)
    rows = []
    first = None
    for n in range(d.n0, d.N + 1):
        d_n = d.values[n - 1]
        if strict and d_n == 0:
            continue  # only levels with d_n > 0 are constrained
        tail = d.tail_sum(n)
        margin = d_n - tail
        if strict:
            ok = margin > CONDITION_TOL * d_n
        else:
            ok = margin >= -CONDITION_TOL * max(d_n, tail)
        rows.append((n, d_n, tail, margin, ok))
        if not ok and first is None:
            first = n
    labels = frozenset({Flag.TRUNCATED}) if d.is_truncated else frozenset()
    kind = "strict" if strict else "weak"
    logger.info("%s condition on %s: first violation %s.", kind, d, first)
    return ConditionReport(first is None, strict, first, tuple(rows), labels)


def check_condition_strict(d: TargetSequence) -> ConditionReport:
    """d_n > sum_{k>n} d_k for every n >= n0 with d_n > 0."""

    return _condition(d, strict=True)


def check_condition_weak(d: TargetSequence) -> ConditionReport:
    """d_n >= sum_{k>n} d_k for every n >= n0."""

    return _condition(d, strict=False)


# -- exact synthesis
class SynthesisResult(
    namedtuple(
        "_SynthesisResult",
        "x lam residuals norm_bound_slack restarts_used z anchor labels",
    )
):
    """An element x = lam * z + y with y in the chain's last level.

    `z` is the exterior point actually used (see `anchor`: when the
    targets end in zeros, z is replaced by a direction of
    Y_{anchor+1} outside Y_anchor).
    """

    __slots__ = ()

    @property
    def max_residual(self) -> float:
        return max(self.residuals)


def _positive_prefix(values: Sequence[float]) -> int:
    return sum(1 for v in values if v > 0)


def _prepare(
    chain: SubspaceChain, d: TargetSequence, norm: NormSpec
) -> tuple[tuple[float, ...], set[Flag]]:
    type_check(chain, SubspaceChain)
    type_check(d, TargetSequence)
    type_check(norm, NormSpec)
    if norm.is_fnorm:
        raise NormError(f"exact synthesis needs a norm; {norm} is an F-norm")
    chain.check_integrity()
    m = len(chain)
    if d.N < m:
        raise SequenceError(f"{d.N} targets for a chain of {m} levels")
    values = d.values[:m]
    if values[0] <= 0:
        raise HypothesisViolationError("d_1 must be positive")
    labels = set()
    if not TargetSequence(values).is_strictly_decreasing_until_zero:
        labels.add(Flag.OUTSIDE_LEMMA_HYPOTHESIS)
        logger.warning("Tied targets %s: outside the strictly decreasing case.", values)
    return values, labels


def _exterior(chain: SubspaceChain, z: Optional[np.ndarray], anchor: int, labels: set) -> Vector:
    """The exterior point: z itself when every target is positive, else
    its component in Y_{anchor+1} outside Y_anchor.
    """

    m = len(chain)
    if z is None:
        z = chain.complement(m)[:, 0]
    z = np.array(as_vector(z, chain.ambient_dim))
    outside = chain.orthonormal(m)
    leftover = z - outside @ (outside.T @ z)
    if np.linalg.norm(leftover) <= 1e-10 * max(float(np.linalg.norm(z)), 1e-300):
        raise HypothesisViolationError("z lies in the span of the chain's last level")
    if anchor == m:
        return z
    labels.add(Flag.EXTERIOR_REPLACED)
    comp = chain.complement(anchor)
    replaced = comp @ (comp.T @ z)
    if np.linalg.norm(replaced) <= 1e-10 * np.linalg.norm(z):
        replaced = comp[:, 0]
    logger.info("Trailing zero targets: exterior point moved into level %d.", anchor + 1)
    return replaced


def _backward_pass(
    chain: SubspaceChain,
    targets: Sequence[float],
    z: np.ndarray,
    norm: NormSpec,
    config: SolverConfig,
    rng: Optional[np.random.Generator],
) -> tuple[np.ndarray, float]:
    """Walk from the innermost positive target back to the first.

    x starts as lam * z with rho(x, Y_p) = d_p. At each level k, x is
    first replaced by its error against Y_{k+1} (so |x| = d_{k+1} and
    rho(x, Y_k) <= d_k), then pushed along a direction v of Y_{k+1}
    outside Y_k until rho(x, Y_k) = d_k; both moves stay inside
    Y_{k+1}, so the deeper distances are untouched.
    """

    p = len(targets)
    dist = lambda v, level: distance_onb(v, chain.orthonormal(level), norm, config)
    lam = targets[-1] / dist(z, p).value
    x = lam * z
    for k in range(p - 1, 0, -1):
        x = x - dist(x, k + 1).minimizer
        comp = chain.complement(k)
        if rng is None:
            v = comp[:, 0]
        else:
            v = comp @ rng.standard_normal(comp.shape[1])
            v /= np.linalg.norm(v)
        d_k = targets[k - 1]
        gap = lambda t: dist(x + t * v, k).value - d_k
        start = gap(0.0)
        if start < -1e-15 * d_k:
            hi = (d_k + targets[k]) / dist(v, k).value
            while gap(hi) < 0:  # guards round-off at the bracket's end
                hi *= 2
            t = brentq(gap, 0.0, hi, xtol=1e-15 * (1 + hi), maxiter=config.max_iter)
            x = x + t * v
    x = x - dist(x, 1).minimizer
    return x, lam


def _evaluate(
    chain: SubspaceChain,
    values: Sequence[float],
    x: np.ndarray,
    norm: NormSpec,
    config: SolverConfig,
) -> tuple[float, ...]:
    return tuple(
        abs(distance_onb(x, chain.orthonormal(level), norm, config).value - d)
        for level, d in enumerate(values, start=1)
    )


def synthesize_exact(
    chain: SubspaceChain,
    d: TargetSequence,
    z: Optional[np.ndarray] = None,
    norm: Optional[NormSpec] = None,
    config: Optional[SolverConfig] = None,
) -> SynthesisResult:
    """Find x with rho(x, Y_k) = d_k on every level of `chain`.

    The result satisfies |x| <= d_1 + 1, x - lam z in Y_m and lam > 0.
    Restart 0 is deterministic; if it misses the tolerance, seeded
    restarts run concurrently and a least-squares polish closes in on
    the best of them. Raises `InfeasibleAtBudgetError` (holding that
    best attempt) when nothing meets the tolerance.
    """

    norm = norm or NormSpec.lp(2)
    config = config or SolverConfig(restarts=SYNTHESIS_RESTARTS)
    values, labels = _prepare(chain, d, norm)
    anchor = _positive_prefix(values)
    z = _exterior(chain, z, anchor, labels)
    inner = config._replace(tie_break=False)
    targets = values[:anchor]
    tolerance = config.tol * max(values[0], 1.0)

    def attempt(rng: Optional[np.random.Generator]) -> SynthesisResult:
        x, lam = _backward_pass(chain, targets, z, norm, inner, rng)
        residuals = _evaluate(chain, values, x, norm, inner)
        slack = values[0] + 1.0 - float(norm.evaluate(x))
        return SynthesisResult(x, lam, residuals, slack, 0, z, anchor, frozenset(labels))

    best = attempt(None)
    used = 1
    if best.max_residual > tolerance:
        logger.warning(
            "Deterministic pass missed by %.3e; trying %d seeded restarts.",
            best.max_residual,
            config.restarts - 1,
        )
        rngs = spawn_generators(config.seed, max(config.restarts - 1, 0))
        others = run_concurrently(attempt, rngs, config.workers)
        used += len(others)
        # min keeps the first of equal residuals, i.e. the lowest restart index
        best = min([best] + others, key=lambda result: result.max_residual)
    if best.max_residual > tolerance:
        best = _polish(chain, values, best, norm, inner)
    best = best._replace(
        x=as_vector(best.x), z=as_vector(best.z), restarts_used=used
    )
    if best.max_residual > tolerance:
        raise InfeasibleAtBudgetError(best, best.max_residual, tolerance)
    logger.info(
        "Synthesized x on %d levels: max residual %.3e, lambda %.6g, %d restart(s).",
        len(values),
        best.max_residual,
        best.lam,
        used,
    )
    return best


def _polish(
    chain: SubspaceChain,
    values: Sequence[float],
    best: SynthesisResult,
    norm: NormSpec,
    config: SolverConfig,
) -> SynthesisResult:
    """Least squares over (log lam, coefficients in Y_anchor)."""

    anchor, z = best.anchor, best.z
    q = chain.orthonormal(anchor)
    scale = max(values[0], 1.0)

    def unpack(params: np.ndarray) -> tuple[np.ndarray, float]:
        lam = math.exp(params[0])
        return lam * z + q @ params[1:], lam

    def residuals(params: np.ndarray) -> np.ndarray:
        x, _ = unpack(params)
        return np.array(
            [
                distance_onb(x, chain.orthonormal(level), norm, config).value - d
                for level, d in enumerate(values[:anchor], start=1)
            ]
        ) / scale

    start = np.concatenate([[math.log(best.lam)], q.T @ (best.x - best.lam * z)])
    res = least_squares(residuals, start, method="trf", max_nfev=config.max_iter)
    x, lam = unpack(res.x)
    polished = _evaluate(chain, values, x, norm, config)
    if max(polished) < best.max_residual:
        slack = values[0] + 1.0 - float(norm.evaluate(x))
        logger.info("Polish improved the residual to %.3e.", max(polished))
        return best._replace(x=x, lam=lam, residuals=polished, norm_bound_slack=slack)
    return best


# -- Konyagin pipeline
class KonyaginConfig(namedtuple("_KonyaginConfig", "c K i0 seed", defaults=(None, 1, 0))):
    """c in (0, 1]; `K` defaults to 2 d_1 when left as `None`."""

    __slots__ = ()

    def __new__(
        cls, c: float, K: Optional[float] = None, i0: int = 1, seed: int = 0
    ) -> KonyaginConfig:
        c = float(c)
        if not 0 < c <= 1:
            raise ValueError(f"c must lie in (0, 1]; got {c!r}")
        if K is not None:
            K = float(K)
            if not K > 0:
                raise ValueError(f"K must be positive; got {K!r}")
        i0 = check_positive_int(i0, "i0")
        return super(KonyaginConfig, cls).__new__(cls, c, K, i0, int(seed))


class BoundCase(Enum):
    EXACT = "exact"  # ladder levels and levels above the ladder
    BETWEEN = "between"  # levels strictly between two ladder values


BoundRow = namedtuple(
    "BoundRow", "n d_n rho ratio lower upper passed case", defaults=(None,)
)


class BoundReport(namedtuple("_BoundReport", "rows c passed")):
    """c d_n <= rho(x, Y_n) <= 4c d_n per level; ratios checked to
    `FEASIBILITY_TOL`.
    """

    __slots__ = ()

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(row.ratio for row in self.rows)


class KonyaginResult(
    namedtuple("_KonyaginResult", "x_c report x interleaving targets")
):
    __slots__ = ()


def konyagin_targets(interleaving: Interleaving) -> tuple[float, ...]:
    """Targets for the merged chain.

    Ladder levels and the levels above the ladder keep their value.
    The k-th of m levels between ladder values 2L and L gets
    L + (d - L)(m + 1 - k)/(m + 1), d being its own value; after the
    last ladder level, L is the next (absent) ladder value. The targets
    are strictly decreasing and lie in (d/2, d] for in-between levels.
    """

    values = interleaving.sequence.values
    dyadic = sorted(interleaving.dyadic)
    targets = list(values)
    bounds = dyadic + [len(values) + 1]
    for upper, lower in zip(bounds, bounds[1:]):
        floor = values[lower - 1] if lower <= len(values) else interleaving.floor
        between = range(upper + 1, lower)
        count = len(between)
        for k, level in enumerate(between, start=1):
            d = values[level - 1]
            targets[level - 1] = floor + (d - floor) * (count + 1 - k) / (count + 1)
    return tuple(targets)


def synthesize_konyagin(
    chain: SubspaceChain,
    d: TargetSequence,
    cfg: KonyaginConfig,
    norm: Optional[NormSpec] = None,
    z: Optional[np.ndarray] = None,
    config: Optional[SolverConfig] = None,
) -> KonyaginResult:
    """Interleave the dyadic ladder, solve exactly on the merged chain
    and scale by 4c; the report covers the original levels.
    """

    norm = norm or NormSpec.lp(2)
    type_check(cfg, KonyaginConfig)
    m = len(chain)
    if d.N < m:
        raise SequenceError(f"{d.N} targets for a chain of {m} levels")
    if min(d.values[:m]) <= 0:
        raise HypothesisViolationError("the Konyagin pipeline needs positive targets")
    merged = interleave_chain(chain, d, cfg.K, cfg.i0, cfg.seed)
    targets = konyagin_targets(merged)
    solved = synthesize_exact(
        merged.chain,
        TargetSequence(targets, tail=TailModel.none()),
        z,
        norm,
        config,
    )
    x_c = as_vector(4 * cfg.c * solved.x)
    first = merged.first_dyadic
    cases = [
        BoundCase.EXACT if (j in merged.dyadic or j < first) else BoundCase.BETWEEN
        for j in merged.index_map
    ]
    report = verify_bounds(x_c, chain, d, cfg.c, norm, cases=cases)
    logger.info("Konyagin pipeline with c=%g: %s.", cfg.c, "pass" if report.passed else "FAIL")
    return KonyaginResult(x_c, report, solved.x, merged, targets)


def verify_bounds(
    x: np.ndarray,
    chain: SubspaceChain,
    d: TargetSequence,
    c: float,
    norm: Optional[NormSpec] = None,
    tol: float = FEASIBILITY_TOL,
    cases: Optional[Sequence[BoundCase]] = None,
) -> BoundReport:
    """Check c d_n <= rho(x, Y_n) <= 4c d_n on every level of `chain`
    (for d_n = 0 both bounds collapse to rho <= tol).
    """

    norm = norm or NormSpec.lp(2)
    x = as_vector(x, chain.ambient_dim)
    m = min(len(chain), d.N)
    rows = []
    for n in range(1, m + 1):
        d_n = d.values[n - 1]
        rho = distance_onb(x, chain.orthonormal(n), norm).value
        if d_n > 0:
            ratio = rho / d_n
            passed = c - tol <= ratio <= 4 * c + tol
        else:
            ratio = math.inf if rho > 0 else 0.0
            passed = rho <= tol
        case = cases[n - 1] if cases is not None else None
        rows.append(BoundRow(n, d_n, rho, ratio, c * d_n, 4 * c * d_n, passed, case))
    return BoundReport(tuple(rows), float(c), all(row.passed for row in rows))


# -- ratio reports
RatioRow = namedtuple("RatioRow", "n d_n rho ratio reaches_target")


class RatioReport(namedtuple("_RatioReport", "rows sup inf")):
    """rho(x, Y_n)/d_n per level; d_n = 0 gives the `math.inf`
    sentinel, left out of `sup` and `inf`.
    """

    __slots__ = ()

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(row.ratio for row in self.rows)

    @property
    def is_increasing(self) -> bool:
        finite = [r for r in self.ratios if math.isfinite(r)]
        return all(b > a for a, b in zip(finite, finite[1:]))


def ratio_report(
    x: np.ndarray,
    chain: SubspaceChain,
    d: TargetSequence,
    norm: Optional[NormSpec] = None,
) -> RatioReport:
    norm = norm or NormSpec.lp(2)
    x = as_vector(x, chain.ambient_dim)
    rows = []
    for n in range(1, min(len(chain), d.N) + 1):
        d_n = d.values[n - 1]
        rho = distance_onb(x, chain.orthonormal(n), norm).value
        ratio = rho / d_n if d_n > 0 else math.inf
        rows.append(RatioRow(n, d_n, rho, ratio, rho >= d_n))
    finite = [row.ratio for row in rows if math.isfinite(row.ratio)]
    sup = max(finite) if finite else math.nan
    inf = min(finite) if finite else math.nan
    return RatioReport(tuple(rows), sup, inf)
