# -*- coding: utf-8 -*-
#
# distance.py
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

"""Best-approximation distances rho(x, Y) = inf |x - y| over y in Y.

Every solver works on an orthonormal basis Q of Y, so minimizers are
Q @ c and the Euclidean norm of c is the one of the minimizer.
"""

# allowing postponed evaluation of annotations; see:
# https://www.python.org/dev/peps/pep-0563/
from __future__ import annotations

import itertools
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog, minimize

from pylethargy.core import (
    IDENTITY_TOL,
    Certificate,
    DistanceResult,
    Family,
    Flag,
    Method,
    NormSpec,
    SolverConfig,
    as_vector,
)
from pylethargy.spaces import SubspaceChain, coordinate_support, orthonormal_basis
from pylethargy.utils import (
    DimensionError,
    SolverError,
    run_concurrently,
    spawn_generators,
    type_check,
)

__all__ = [
    "distance",
    "distance_onb",
    "distance_oracle",
    "distance_profile",
]

logger = logging.getLogger(__name__)

_LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}
# oracle grid: points per axis (odd, so the center is a grid point)
ORACLE_POINTS = 17
ORACLE_MAX_RANK = 3


def _result(
    value: float,
    minimizer: np.ndarray,
    method: Method,
    exact: bool,
    residual: float = 0.0,
    iterations: int = 0,
    restarts: int = 0,
    flags: Sequence[Flag] = (),
) -> DistanceResult:
    minimizer = np.array(minimizer, dtype=float)
    minimizer.flags.writeable = False
    certificate = Certificate(method, float(residual), int(iterations), int(restarts), frozenset(flags))
    return DistanceResult(max(float(value), 0.0), minimizer, certificate, exact)


def _checked(x: np.ndarray, q: np.ndarray, norm: NormSpec) -> np.ndarray:
    type_check(norm, NormSpec)
    x = as_vector(x)
    if q.ndim != 2 or q.shape[0] != x.size:
        raise DimensionError(
            f"vector of dimension {x.size} against a basis of shape {q.shape}"
        )
    norm.check_dim(x.size)
    return x


def distance(
    x: np.ndarray,
    basis: np.ndarray,
    norm: NormSpec,
    config: Optional[SolverConfig] = None,
) -> DistanceResult:
    """rho(x, span(basis)) in `norm`, with a minimizer and a certificate.

    The basis columns need not be orthonormal nor independent.
    """

    basis = np.asarray(basis, dtype=float)
    if basis.ndim == 1:
        basis = basis.reshape(-1, 1)
    if basis.ndim != 2:
        raise DimensionError(f"basis must be a matrix; got shape {basis.shape}")
    return distance_onb(x, orthonormal_basis(basis), norm, config)


def distance_onb(
    x: np.ndarray,
    q: np.ndarray,
    norm: NormSpec,
    config: Optional[SolverConfig] = None,
) -> DistanceResult:
    """Same as `distance`, for a basis `q` known to be orthonormal."""

    config = config or SolverConfig()
    x = _checked(x, q, norm)
    if not q.shape[1]:
        return _result(norm.evaluate(x), np.zeros_like(x), Method.TRIVIAL, True)
    family = norm.family
    if family is Family.FNORM_OF_NORM:
        inner = distance_onb(x, q, norm.base, config)
        rho = inner.value
        return _result(
            rho / (1.0 + rho),
            inner.minimizer,
            Method.TRANSFORM,
            inner.is_exact,
            inner.residual,
            inner.certificate.iterations,
            inner.certificate.restarts,
            inner.flags,
        )
    if family is Family.FNORM_PRODUCT:
        support = coordinate_support(q)
        if support is not None:
            return _product_closed_form(x, support, norm)
        return _product_multistart(x, q, norm, config)
    if family is Family.LP and norm.p == 2:
        return _projection(x, q)
    if family is Family.GRID_SUP or norm.p in (1.0, math.inf):
        return _linear_program(x, q, norm, config)
    return _convex_descent(x, q, norm, config)


def _projection(x: np.ndarray, q: np.ndarray) -> DistanceResult:
    projection = q @ (q.T @ x)
    value = float(np.linalg.norm(x - projection))
    total = float(x @ x)
    # Pythagoras: value^2 + |proj|^2 = |x|^2
    residual = abs(value ** 2 + float(projection @ projection) - total) / max(total, 1e-300)
    return _result(value, projection, Method.PROJECTION, True, residual)


def _lp_system(x: np.ndarray, q: np.ndarray, norm: NormSpec):
    """Cost, inequality matrix and bound of min |x - Qc| as an LP.

    sup norms: variables (c, t), +-(x - Qc) <= t;
    l1: variables (c, s), +-(x - Qc) <= s, minimize sum(s).
    """

    dim, rank = q.shape
    if norm.family is Family.LP and norm.p == 1.0:
        slack = np.eye(dim)
        cost = np.concatenate([np.zeros(rank), np.ones(dim)])
    else:
        slack = np.ones((dim, 1))
        cost = np.concatenate([np.zeros(rank), [1.0]])
    a_ub = np.block([[-q, -slack], [q, -slack]])
    b_ub = np.concatenate([-x, x])
    return cost, a_ub, b_ub


def _linear_program(
    x: np.ndarray, q: np.ndarray, norm: NormSpec, config: SolverConfig
) -> DistanceResult:
    rank = q.shape[1]
    cost, a_ub, b_ub = _lp_system(x, q, norm)
    res = linprog(
        cost,
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=(None, None),
        method="highs-ds",
        options=_LP_OPTIONS,
    )
    if res.status != 0:
        raise SolverError(f"HiGHS failed on a distance LP: {res.message}")
    coeffs = res.x[:rank]
    # all variables are free, so the dual objective is b_ub . y
    gap = abs(res.fun - float(b_ub @ res.ineqlin.marginals))
    value = float(norm.evaluate(x - q @ coeffs))
    if config.tie_break:
        coeffs = _smallest_optimum(x, q, norm, value, coeffs, res.x[rank:])
        value = float(norm.evaluate(x - q @ coeffs))
    return _result(value, q @ coeffs, Method.LINEAR_PROGRAM, True, gap, res.nit)


def _smallest_optimum(
    x: np.ndarray,
    q: np.ndarray,
    norm: NormSpec,
    value: float,
    coeffs: np.ndarray,
    slacks: np.ndarray,
) -> np.ndarray:
    """Among coefficient vectors reaching `value`, the one closest to 0."""

    rank = q.shape[1]
    cap = value * (1 + 1e-10) + 1e-14
    _, a_ub, b_ub = _lp_system(x, q, norm)
    if norm.family is Family.LP and norm.p == 1.0:
        constraints = [
            {"type": "ineq", "fun": lambda v: b_ub - a_ub @ v, "jac": lambda v: -a_ub},
            {
                "type": "ineq",
                "fun": lambda v: np.array([cap - np.sum(v[rank:])]),
                "jac": lambda v: np.concatenate([np.zeros(rank), -np.ones(v.size - rank)])[None, :],
            },
        ]
        start = np.concatenate([coeffs, slacks])
    else:
        # the sup-norm slack is pinned at the optimal value
        pinned_a = a_ub[:, :rank]
        pinned_b = b_ub + cap
        constraints = [
            {"type": "ineq", "fun": lambda v: pinned_b - pinned_a @ v[:rank], "jac": lambda v: -pinned_a},
        ]
        start = coeffs.copy()

    def objective(v: np.ndarray):
        c = v[:rank]
        grad = np.zeros_like(v)
        grad[:rank] = 2 * c
        return float(c @ c), grad

    res = minimize(
        objective,
        start,
        jac=True,
        method="SLSQP",
        constraints=constraints,
        options={"maxiter": 200, "ftol": 1e-14},
    )
    candidate = res.x[:rank]
    new_value = float(norm.evaluate(x - q @ candidate))
    if new_value <= value * (1 + IDENTITY_TOL) + 1e-15 and candidate @ candidate < coeffs @ coeffs:
        return candidate
    return coeffs


def _convex_descent(
    x: np.ndarray, q: np.ndarray, norm: NormSpec, config: SolverConfig
) -> DistanceResult:
    p = norm.p
    scale = float(norm.evaluate(x))
    if scale == 0:
        return _result(0.0, np.zeros_like(x), Method.CONVEX_DESCENT, False)
    u = x / scale

    def objective(c: np.ndarray):
        r = u - q @ c
        absr = np.abs(r)
        value = float(np.sum(absr ** p)) / p
        grad = -q.T @ (np.sign(r) * absr ** (p - 1))
        return value, grad

    gtol = config.grad_tol * (1 + float(np.linalg.norm(u)))
    start = q.T @ u  # Euclidean projection as a warm start
    res = minimize(
        objective,
        start,
        jac=True,
        method="BFGS",
        options={"gtol": gtol, "maxiter": config.max_iter},
    )
    grad_norm = float(np.linalg.norm(objective(res.x)[1]))
    flags = ()
    if not res.success and grad_norm > gtol:
        flags = (Flag.UNCONVERGED,)
        logger.warning(
            "LP(%g) descent stopped at gradient %.3e (> %.3e): %s",
            p,
            grad_norm,
            gtol,
            res.message,
        )
    coeffs = res.x * scale
    value = float(norm.evaluate(x - q @ coeffs))
    return _result(value, q @ coeffs, Method.CONVEX_DESCENT, False, grad_norm, res.nit, flags=flags)


def _product_closed_form(
    x: np.ndarray, support: tuple[int, ...], norm: NormSpec
) -> DistanceResult:
    minimizer = np.zeros_like(x)
    minimizer[list(support)] = x[list(support)]
    value = float(norm.evaluate(x - minimizer))
    return _result(value, minimizer, Method.CLOSED_FORM, True)


def _vertex_starts(x: np.ndarray, q: np.ndarray) -> list[np.ndarray]:
    """Coefficients zeroing x - Qc on well-conditioned row subsets."""

    dim, rank = q.shape
    starts = []
    for rows in itertools.islice(itertools.combinations(range(dim), rank), 32):
        block = q[list(rows)]
        if abs(np.linalg.det(block)) > 1e-8:
            starts.append(np.linalg.solve(block, x[list(rows)]))
    return starts


def _product_multistart(
    x: np.ndarray, q: np.ndarray, norm: NormSpec, config: SolverConfig
) -> DistanceResult:
    """The product F-norm objective isn't convex; best of several
    Powell descents, reported as an upper bound.
    """

    rank = q.shape[1]

    def objective(c: np.ndarray) -> float:
        return float(norm.evaluate(x - q @ c))

    scale = max(float(np.linalg.norm(x)), 1.0)
    starts = [q.T @ x, np.zeros(rank)] + _vertex_starts(x, q)
    for rng in spawn_generators(config.seed, config.restarts):
        starts.append(rng.standard_normal(rank) * scale)

    def descend(start: np.ndarray):
        return minimize(
            objective,
            start,
            method="Powell",
            options={"xtol": 1e-10, "ftol": 1e-14, "maxiter": config.max_iter},
        )

    runs = run_concurrently(descend, starts, config.workers)
    values = [float(run.fun) for run in runs]
    best = int(np.argmin(values))
    coeffs = runs[best].x
    spread = max(values) - min(values)
    logger.debug("product F-norm multistart: %d starts, spread %.3e", len(starts), spread)
    return _result(
        objective(coeffs),
        q @ coeffs,
        Method.MULTISTART,
        False,
        spread,
        sum(int(run.nit) for run in runs),
        len(starts),
        (Flag.UPPER_BOUND,),
    )


def _lipschitz(norm: NormSpec, dim: int) -> float:
    """Bound on |N(Qd)| / |d|_2 for orthonormal Q."""

    family = norm.family
    if family is Family.LP:
        return dim ** max(0.0, 1.0 / norm.p - 0.5)
    if family is Family.GRID_SUP:
        return 1.0
    if family is Family.FNORM_PRODUCT:
        return float(np.linalg.norm(norm.weights_for(dim)))
    return _lipschitz(norm.base, dim)


def distance_oracle(
    x: np.ndarray,
    basis: np.ndarray,
    norm: NormSpec,
    resolution: float = 1e-6,
) -> float:
    """Brute-force rho(x, span(basis)) by nested coefficient grids.

    Each stage evaluates a 17^r grid around the incumbent, recenters on
    the best point and halves the box (unless the best point sits on
    the box's edge, where it only recenters). Stops once the grid
    spacing can't hide more than `resolution` in value.
    """

    basis = np.asarray(basis, dtype=float)
    if basis.ndim == 1:
        basis = basis.reshape(-1, 1)
    q = orthonormal_basis(basis)
    x = _checked(x, q, norm)
    rank = q.shape[1]
    if rank > ORACLE_MAX_RANK:
        raise DimensionError(f"the oracle handles rank <= {ORACLE_MAX_RANK}; got {rank}")
    if not rank:
        return float(norm.evaluate(x))
    lipschitz = _lipschitz(norm, x.size)
    half = 2.0 * x.size * max(float(np.linalg.norm(x)), 1e-12)
    center = np.zeros(rank)
    offsets = np.linspace(-1.0, 1.0, ORACLE_POINTS)
    mesh = np.array(list(itertools.product(offsets, repeat=rank)))
    edge = np.any(np.abs(mesh) == 1.0, axis=1)
    best = float(norm.evaluate(x))
    stages = 0
    while lipschitz * half * math.sqrt(rank) > resolution and stages < 10_000:
        candidates = center + half * mesh
        values = norm.evaluate(x[None, :] - candidates @ q.T, axis=-1)
        low = float(values.min())
        # among tied grid points, the one nearest the box center
        ties = np.flatnonzero(values <= low + 1e-15 * max(1.0, low))
        index = int(ties[np.argmin(np.sum(mesh[ties] ** 2, axis=1))])
        best = min(best, float(values[index]))
        center = candidates[index]
        if not edge[index]:
            half /= 2.0
        stages += 1
    logger.debug("oracle: %d stages, value %.12g", stages, best)
    return best


def distance_profile(
    x: np.ndarray,
    chain: SubspaceChain,
    norm: NormSpec,
    config: Optional[SolverConfig] = None,
) -> tuple[DistanceResult, ...]:
    """rho(x, Y_k) for every level, ordered by level.

    Exact methods must give a non-increasing profile.
    """

    config = config or SolverConfig()
    chain.check_integrity()
    x = as_vector(x, chain.ambient_dim)
    levels = range(1, len(chain) + 1)
    results = run_concurrently(
        lambda level: distance_onb(x, chain.orthonormal(level), norm, config),
        levels,
        config.workers,
    )
    for level, (before, after) in enumerate(zip(results, results[1:]), start=2):
        if before.is_exact and after.is_exact:
            slack = IDENTITY_TOL * max(1.0, before.value)
            if after.value > before.value + slack:
                raise SolverError(
                    f"distance grew from {before.value!r} to {after.value!r} at level {level}"
                )
    return tuple(results)
