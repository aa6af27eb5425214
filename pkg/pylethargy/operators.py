# -*- coding: utf-8 -*-
#
# operators.py
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

"""Operators between finite-dimensional lp spaces.

Operator norms, approximation numbers a_n(T) = inf{|T - S| : rank S < n}
(so a_1 = |T|), Kolmogorov widths of T(unit ball) indexed by the
dimension of the approximating subspace (so d_0 = |T|), eigenvalues,
diagonal and similarity-built operators with prescribed approximation
numbers, and checks of the classical inequalities linking them.
"""

# allowing postponed evaluation of annotations; see:
# https://www.python.org/dev/peps/pep-0563/
from __future__ import annotations

import itertools
import logging
import math
from collections import namedtuple
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import linprog, minimize

from pylethargy.core import (
    FEASIBILITY_TOL,
    IDENTITY_TOL,
    Family,
    NormSpec,
    SolverConfig,
    TargetSequence,
)
from pylethargy.distance import distance
from pylethargy.utils import (
    DimensionError,
    HypothesisViolationError,
    NormError,
    OperatorError,
    SolverError,
    check_positive_int,
    run_concurrently,
    spawn_generators,
    type_check,
)

__all__ = [
    "ApproxNumberReport",
    "KoenigReport",
    "MarcusReport",
    "OperatorMethod",
    "OperatorNorm",
    "OperatorSpec",
    "OracleInterval",
    "SpectrumReport",
    "TOBoundReport",
    "WidthReport",
    "approximation_numbers",
    "approximation_numbers_oracle",
    "bernstein_pair_diagonal",
    "eigenvalues",
    "hmr_operator",
    "koenig_limit_check",
    "kolmogorov_diameters",
    "marcus_chain_check",
    "operator_norm",
    "to_bound_check",
]

logger = logging.getLogger(__name__)

ORACLE_MAX_DIM = 4
ORACLE_RESTARTS = 32
VERTEX_MAX_COLS = 16


class OperatorMethod(Enum):
    SVD_EXACT = "svd_exact"
    CLOSED_FORM = "closed_form"
    VERTEX_ENUMERATION = "vertex_enumeration"
    MULTISTART = "multistart"
    ORACLE = "oracle"
    ELLIPSOID = "ellipsoid"
    SAMPLED_UPPER_BOUND = "sampled_upper_bound"


class OperatorSpec(
    namedtuple("_OperatorSpec", "matrix domain_norm codomain_norm h_constant")
):
    """A matrix (rows = codomain dimension) between two lp spaces.

    `h_constant` is the optional resolvent constant C of an H-operator;
    C = 1 between Euclidean spaces is only accepted for symmetric
    matrices.
    """

    __slots__ = ()

    def __new__(
        cls,
        matrix: Sequence[Sequence[float]],
        domain_norm: Optional[NormSpec] = None,
        codomain_norm: Optional[NormSpec] = None,
        h_constant: Optional[float] = None,
    ) -> OperatorSpec:
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or not matrix.size:
            raise OperatorError(f"expected a non-empty matrix; got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise OperatorError("matrix entries must be finite")
        matrix.flags.writeable = False
        domain_norm = domain_norm if domain_norm is not None else NormSpec.lp(2)
        codomain_norm = codomain_norm if codomain_norm is not None else NormSpec.lp(2)
        for norm in (domain_norm, codomain_norm):
            type_check(norm, NormSpec)
            if norm.family is not Family.LP:
                raise NormError(f"operators act between lp spaces; got {norm}")
        if h_constant is not None:
            h_constant = float(h_constant)
            if not h_constant > 0:
                raise OperatorError(f"h_constant must be positive; got {h_constant!r}")
            if h_constant == 1 and domain_norm.is_hilbert and codomain_norm.is_hilbert:
                if not _is_symmetric(matrix):
                    raise OperatorError("C = 1 on a Hilbert space needs a symmetric matrix")
        return super(OperatorSpec, cls).__new__(
            cls, matrix, domain_norm, codomain_norm, h_constant
        )

    @property
    def p(self) -> float:
        return self.domain_norm.p

    @property
    def q(self) -> float:
        return self.codomain_norm.p

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def is_hilbert(self) -> bool:
        return self.domain_norm.is_hilbert and self.codomain_norm.is_hilbert

    def with_matrix(self, matrix: np.ndarray) -> OperatorSpec:
        return type(self)(matrix, self.domain_norm, self.codomain_norm)

    def scaled(self, factor: float) -> OperatorSpec:
        return self.with_matrix(factor * self.matrix)


def _is_symmetric(matrix: np.ndarray) -> bool:
    if matrix.shape[0] != matrix.shape[1]:
        return False
    scale = max(float(np.max(np.abs(matrix))), 1e-300)
    return bool(np.allclose(matrix, matrix.T, rtol=0, atol=IDENTITY_TOL * scale))


def _is_diagonal(matrix: np.ndarray) -> bool:
    return matrix.shape[0] == matrix.shape[1] and not np.any(matrix - np.diag(np.diag(matrix)))


def _conjugate(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def _sign_vertices(cols: int) -> np.ndarray:
    """Vertices of the cube [-1, 1]^cols, one of each +- pair."""

    rest = np.array(list(itertools.product((1.0, -1.0), repeat=cols - 1)), dtype=float)
    rest = rest.reshape(2 ** (cols - 1), cols - 1)
    return np.column_stack([np.ones(len(rest)), rest])


# -- operator norms
OperatorNorm = namedtuple("OperatorNorm", "value method exact")


def _exact_norm(matrix: np.ndarray, p: float, q: float) -> Optional[OperatorNorm]:
    """|A|_{p->q} when some closed form or finite enumeration gives it."""

    rows, cols = matrix.shape
    if not np.any(matrix):
        return OperatorNorm(0.0, OperatorMethod.CLOSED_FORM, True)
    if p == 2 and q == 2:
        return OperatorNorm(float(np.linalg.norm(matrix, 2)), OperatorMethod.SVD_EXACT, True)
    if math.isinf(q):
        # sup over the domain ball of each row's functional: its dual norm
        value = float(np.max(np.linalg.norm(matrix, ord=_conjugate(p), axis=1)))
        return OperatorNorm(value, OperatorMethod.CLOSED_FORM, True)
    if p == 1:
        value = float(np.max(np.linalg.norm(matrix, ord=q, axis=0)))
        return OperatorNorm(value, OperatorMethod.CLOSED_FORM, True)
    if p == q and _is_diagonal(matrix):
        return OperatorNorm(float(np.max(np.abs(np.diag(matrix)))), OperatorMethod.CLOSED_FORM, True)
    if math.isinf(p) and cols <= VERTEX_MAX_COLS:
        images = _sign_vertices(cols) @ matrix.T
        value = float(np.max(np.linalg.norm(images, ord=q, axis=1)))
        return OperatorNorm(value, OperatorMethod.VERTEX_ENUMERATION, True)
    return None


def _norm_multistart(matrix: np.ndarray, p: float, q: float, restarts: int, seed: int) -> float:
    """Largest |Ax|_q / |x|_p found by local ascent; a lower bound."""

    rows, cols = matrix.shape

    def negative_ratio(x: np.ndarray) -> float:
        size = np.linalg.norm(x, ord=p)
        return 0.0 if size == 0 else -float(np.linalg.norm(matrix @ x, ord=q) / size)

    _, _, vt = np.linalg.svd(matrix)
    starts = list(vt[: min(rows, cols)]) + list(np.eye(cols))
    starts += [rng.standard_normal(cols) for rng in spawn_generators(seed, restarts)]
    runs = [minimize(negative_ratio, start, method="Powell") for start in starts]
    return max(-float(run.fun) for run in runs)


def operator_norm(T: OperatorSpec, restarts: int = 8, seed: int = 0) -> OperatorNorm:
    """|T|_{p->q}: exact for the closed-form and enumerable pairs,
    otherwise a multistart maximum flagged by `exact = False`.
    """

    type_check(T, OperatorSpec)
    found = _exact_norm(T.matrix, T.p, T.q)
    if found is not None:
        return found
    value = _norm_multistart(T.matrix, T.p, T.q, restarts, seed)
    logger.warning("(%g -> %g) norm is only a lower bound: %.6g", T.p, T.q, value)
    return OperatorNorm(value, OperatorMethod.MULTISTART, False)


# -- approximation numbers
OracleInterval = namedtuple("OracleInterval", "n lower upper")


class ApproxNumberReport(namedtuple("_ApproxNumberReport", "values method intervals")):
    """a_1 >= a_2 >= ... for n = 1..min(rows, cols); `intervals` holds
    the oracle's `OracleInterval`s (ORACLE method only).
    """

    __slots__ = ()


def _equivalence_factor(rows: int, cols: int, p: float, q: float) -> float:
    """m_q / M_p with |y|_q >= m_q |y|_2 and |x|_p <= M_p |x|_2."""

    m_q = rows ** min(0.0, 1.0 / q - 0.5)
    big_p = cols ** max(0.0, 1.0 / p - 0.5)
    return m_q / big_p


def _min_ratio_on_subspace(matrix: np.ndarray, w: np.ndarray, p: float, q: float) -> Optional[float]:
    """inf of |A x|_q / |x|_p over x in span(w), exactly, by linear
    programs over the faces of the domain sphere; `None` when no exact
    route exists for (p, q).
    """

    if q not in (1.0, math.inf) or p not in (1.0, math.inf):
        return None
    cols, n = w.shape
    image = matrix @ w
    rows = image.shape[0]
    # variables: beta (n) then the codomain slack(s)
    if q == 1.0:
        slack = np.eye(rows)
        cost = np.concatenate([np.zeros(n), np.ones(rows)])
    else:
        slack = np.ones((rows, 1))
        cost = np.concatenate([np.zeros(n), [1.0]])
    extra = slack.shape[1]
    codomain = np.block([[image, -slack], [-image, -slack]])
    padding = np.zeros((cols, extra))
    problems = []
    if math.isinf(p):
        # |x|_inf = 1: some coordinate equals 1, all lie in [-1, 1]
        a_ub = np.vstack([codomain, np.hstack([w, padding]), np.hstack([-w, padding])])
        b_ub = np.concatenate([np.zeros(2 * rows), np.ones(2 * cols)])
        for row in w:
            if np.any(row):
                problems.append((a_ub, b_ub, row))
    else:
        # |x|_1 = 1 on a sign pattern s: s_i x_i >= 0, sum s_i x_i = 1
        b_ub = np.zeros(2 * rows + cols)
        for signs in _sign_vertices(cols):
            a_ub = np.vstack([codomain, np.hstack([-signs[:, None] * w, padding])])
            problems.append((a_ub, b_ub, signs @ w))
    best = math.inf
    for a_ub, b_ub, row in problems:
        res = linprog(
            cost,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=np.concatenate([row, np.zeros(extra)])[None, :],
            b_eq=[1.0],
            bounds=(None, None),
            method="highs-ds",
        )
        if res.status == 0:
            best = min(best, float(res.fun))
    return best if math.isfinite(best) else None


def _bernstein_lower(matrix: np.ndarray, n: int, p: float, q: float) -> float:
    """max over candidate n-dimensional E of inf_{x in E} |Ax|_q/|x|_p,
    each a lower bound on a_n (a rank < n operator kills some x in E).
    """

    rows, cols = matrix.shape
    _, _, vt = np.linalg.svd(matrix)
    candidates = [vt[:n].T]
    candidates += [np.eye(cols)[:, list(subset)] for subset in itertools.combinations(range(cols), n)]
    best = 0.0
    for w in candidates:
        if p == 2 and q == 2:
            q_w, _ = np.linalg.qr(w)
            value = float(np.linalg.svd(matrix @ q_w, compute_uv=False)[-1])
        else:
            value = _min_ratio_on_subspace(matrix, w, p, q)
            if value is None:
                continue
        best = max(best, value)
    return best


def approximation_numbers_oracle(
    T: OperatorSpec, n: int, restarts: int = ORACLE_RESTARTS, seed: int = 0, workers: Optional[int] = None
) -> OracleInterval:
    """An interval certified to contain a_n(T), for dimensions <= 4.

    The upper end is the best |T - U V^T| over Powell descents on
    rank n-1 factors (from the truncated SVD and seeded random
    starts); the lower end the best of the norm-equivalence bound and
    exact Bernstein-type bounds on candidate subspaces.
    """

    type_check(T, OperatorSpec)
    n = check_positive_int(n, "n")
    matrix = T.matrix
    rows, cols = matrix.shape
    if max(rows, cols) > ORACLE_MAX_DIM:
        raise DimensionError(f"the oracle handles dimensions <= {ORACLE_MAX_DIM}; got {T.shape}")
    p, q = T.p, T.q
    if _exact_norm(np.ones((rows, cols)), p, q) is None:
        raise OperatorError(f"no exact ({p:g} -> {q:g}) operator norm to drive the oracle")
    if not np.any(matrix) or n > min(rows, cols):
        return OracleInterval(n, 0.0, 0.0)
    if n == 1:
        value = _exact_norm(matrix, p, q).value
        return OracleInterval(1, value, value)

    rank = n - 1

    def objective(params: np.ndarray) -> float:
        u = params[: rows * rank].reshape(rows, rank)
        v = params[rows * rank :].reshape(cols, rank)
        return _exact_norm(matrix - u @ v.T, p, q).value

    left, sigma, right = np.linalg.svd(matrix)
    truncated = np.concatenate(
        [(left[:, :rank] * sigma[:rank]).ravel(), right[:rank].T.ravel()]
    )
    scale = math.sqrt(max(float(sigma[0]), 1e-300))
    starts = [truncated]
    starts += [
        rng.standard_normal(truncated.size) * scale
        for rng in spawn_generators(seed, max(restarts - 1, 0))
    ]
    runs = run_concurrently(
        lambda start: minimize(objective, start, method="Powell", options={"xtol": 1e-12, "ftol": 1e-14}),
        starts,
        workers,
    )
    upper = min([objective(truncated)] + [objective(run.x) for run in runs])

    lower = _equivalence_factor(rows, cols, p, q) * float(sigma[n - 1])
    lower = max(lower, _bernstein_lower(matrix, n, p, q))
    lower = max(0.0, lower - 1e-12 * max(1.0, float(sigma[0])))
    upper = max(upper, lower)
    logger.debug("oracle a_%d in [%.12g, %.12g]", n, lower, upper)
    return OracleInterval(n, lower, upper)


def _truncation_upper_bounds(T: OperatorSpec, restarts: int, seed: int) -> ApproxNumberReport:
    """|T - T_{n-1}|_{p->q} for the truncated SVDs T_{n-1}; each bounds
    a_n from above when the residual norm is exact.
    """

    matrix = T.matrix
    left, sigma, right = np.linalg.svd(matrix)
    values = []
    for n in range(1, sigma.size + 1):
        rank = n - 1
        residual = matrix - (left[:, :rank] * sigma[:rank]) @ right[:rank]
        value = operator_norm(T.with_matrix(residual), restarts, seed + n).value
        values.append(value if not values else min(value, values[-1]))
    logger.warning(
        "(%g -> %g) approximation numbers of a %dx%d matrix are truncation upper bounds",
        T.p,
        T.q,
        *matrix.shape,
    )
    return ApproxNumberReport(tuple(values), OperatorMethod.SAMPLED_UPPER_BOUND, None)


def approximation_numbers(
    T: OperatorSpec, restarts: int = ORACLE_RESTARTS, seed: int = 0, workers: Optional[int] = None
) -> ApproxNumberReport:
    """a_n(T) for n = 1..min(rows, cols).

    Euclidean pairs use singular values, diagonal matrices on (p -> p)
    their sorted absolute diagonal, small pairs with an exact norm
    the oracle's upper ends (made non-increasing), and anything else
    the norms of truncated-SVD residuals.
    """

    type_check(T, OperatorSpec)
    matrix = T.matrix
    rows, cols = matrix.shape
    size = min(rows, cols)
    if T.is_hilbert:
        values = np.linalg.svd(matrix, compute_uv=False)
        return ApproxNumberReport(tuple(float(v) for v in values), OperatorMethod.SVD_EXACT, None)
    if T.p == T.q and _is_diagonal(matrix):
        values = sorted(np.abs(np.diag(matrix)), reverse=True)
        return ApproxNumberReport(tuple(float(v) for v in values), OperatorMethod.CLOSED_FORM, None)
    if max(rows, cols) > ORACLE_MAX_DIM or _exact_norm(np.ones((rows, cols)), T.p, T.q) is None:
        return _truncation_upper_bounds(T, restarts, seed)
    intervals = tuple(
        approximation_numbers_oracle(T, n, restarts, seed + n, workers)
        for n in range(1, size + 1)
    )
    values = []
    for interval in intervals:
        upper = interval.upper if not values else min(interval.upper, values[-1])
        values.append(upper)
    return ApproxNumberReport(tuple(values), OperatorMethod.ORACLE, intervals)


# -- constructions
def _as_targets(d: Union[TargetSequence, Sequence[float]], dim: int) -> tuple[float, ...]:
    values = d.values if isinstance(d, TargetSequence) else tuple(float(v) for v in d)
    if len(values) < dim:
        raise HypothesisViolationError(f"{len(values)} targets for dimension {dim}")
    values = values[:dim]
    if min(values) < 0 or any(b > a for a, b in zip(values, values[1:])):
        raise HypothesisViolationError(f"targets must be non-increasing and >= 0; got {values}")
    return values


def bernstein_pair_diagonal(
    d: Union[TargetSequence, Sequence[float]], p: Union[float, str] = 2.0, dim: Optional[int] = None
) -> OperatorSpec:
    """diag(d_1, ..., d_dim) on (p -> p); its approximation numbers are
    exactly d_1, ..., d_dim.
    """

    if dim is None:
        dim = len(d.values) if isinstance(d, TargetSequence) else len(d)
    dim = check_positive_int(dim, "dim")
    values = _as_targets(d, dim)
    norm = NormSpec.lp(p)
    return OperatorSpec(np.diag(values), norm, norm, 1.0 if norm.is_hilbert else None)


def hmr_operator(
    d: Union[TargetSequence, Sequence[float]],
    dim: Optional[int] = None,
    seed: int = 0,
    spread: float = 0.5,
) -> OperatorSpec:
    """T = X diag(d) X^-1 on (2 -> 2) for a seeded, non-orthogonal X.

    The columns of X and the rows of X^-1 form a biorthogonal system,
    the eigenvalues are d, and cond(X) is a resolvent constant C, so
    d_n / C <= a_n(T) <= C d_n.
    """

    if dim is None:
        dim = len(d.values) if isinstance(d, TargetSequence) else len(d)
    dim = check_positive_int(dim, "dim")
    values = _as_targets(d, dim)
    if not 0 <= spread < 1:
        raise ValueError(f"spread must lie in [0, 1); got {spread!r}")
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((dim, dim))
    basis = np.eye(dim) + spread * gauss / np.linalg.norm(gauss, 2)
    matrix = basis @ np.diag(values) @ np.linalg.inv(basis)
    return OperatorSpec(matrix, NormSpec.lp(2), NormSpec.lp(2), float(np.linalg.cond(basis)))


# -- widths
class WidthReport(namedtuple("_WidthReport", "values method exact sampling_slack")):
    """d_0 >= d_1 >= ...: `values[k]` is the width for k-dimensional
    subspaces. `sampling_slack` is the smallest (sampled - exact) seen
    by the Euclidean cross-check, `None` for upper-bound reports.
    """

    __slots__ = ()


def _residual_norm(matrix: np.ndarray, subspace: np.ndarray) -> float:
    """sup over the unit ball of the distance from Ax to span(subspace)."""

    q, _ = np.linalg.qr(subspace) if subspace.shape[1] else (subspace, None)
    return float(np.linalg.norm(matrix - q @ (q.T @ matrix), 2))


def _sup_distance(matrix: np.ndarray, subspace: np.ndarray, p: float, q: float) -> float:
    """sup of dist_q(Ax, span(subspace)) over the vertices of a polytope
    holding the lp ball (cross-polytope for p = 1, cube otherwise).
    """

    cols = matrix.shape[1]
    vertices = np.eye(cols) if p == 1 else _sign_vertices(cols)
    norm = NormSpec.lp(q)
    config = SolverConfig(tie_break=False)
    return max(distance(matrix @ v, subspace, norm, config).value for v in vertices)


def kolmogorov_diameters(T: OperatorSpec, samples: int = 32, seed: int = 0) -> WidthReport:
    """Widths of T(unit ball) for subspace dimensions 0..min(rows, cols).

    Between Euclidean spaces the image is an ellipsoid and d_k is the
    (k+1)-th singular value; random subspaces cross-check that no
    sampled subspace beats it. Other pairs give sampled upper bounds.
    """

    type_check(T, OperatorSpec)
    matrix = T.matrix
    rows, cols = matrix.shape
    size = min(rows, cols)
    left, sigma, _ = np.linalg.svd(matrix)
    rngs = spawn_generators(seed, size + 1)
    if T.is_hilbert:
        values = [float(sigma[k]) if k < sigma.size else 0.0 for k in range(size + 1)]
        slack = math.inf
        for k in range(size + 1):
            slack = min(slack, _residual_norm(matrix, left[:, :k]) - values[k])
            for _ in range(samples):
                subspace = rngs[k].standard_normal((rows, k))
                slack = min(slack, _residual_norm(matrix, subspace) - values[k])
        if slack < -FEASIBILITY_TOL:
            logger.error("A sampled subspace beat the ellipsoid width by %.3e.", -slack)
        return WidthReport(tuple(values), OperatorMethod.ELLIPSOID, True, slack)
    if T.p != 1 and cols > VERTEX_MAX_COLS:
        raise OperatorError(f"no polytope bound for ({T.p:g} -> {T.q:g}) at {cols} columns")
    values = []
    for k in range(size + 1):
        candidates = [left[:, :k]] + [
            rngs[k].standard_normal((rows, k)) for _ in range(samples)
        ]
        best = min(_sup_distance(matrix, subspace, T.p, T.q) for subspace in candidates)
        values.append(best if not values else min(best, values[-1]))
    return WidthReport(tuple(values), OperatorMethod.SAMPLED_UPPER_BOUND, False, None)


# -- eigenvalues
class SpectrumReport(namedtuple("_SpectrumReport", "values")):
    """Eigenvalues by non-increasing modulus, with multiplicity."""

    __slots__ = ()

    @property
    def moduli(self) -> tuple[float, ...]:
        return tuple(abs(value) for value in self.values)


def eigenvalues(T: Union[OperatorSpec, np.ndarray]) -> SpectrumReport:
    matrix = T.matrix if isinstance(T, OperatorSpec) else np.asarray(T, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise OperatorError(f"eigenvalues need a square matrix; got shape {matrix.shape}")
    try:
        if _is_symmetric(matrix):
            values = np.linalg.eigvalsh(matrix)
        else:
            values = np.linalg.eigvals(matrix)
    except np.linalg.LinAlgError as error:
        raise SolverError(f"eigenvalue iteration did not converge: {error}") from error
    order = np.argsort(-np.abs(values), kind="stable")
    values = values[order]
    scale = max(float(np.max(np.abs(values))), 1.0)
    if np.all(np.abs(np.imag(values)) <= 1e-12 * scale):
        return SpectrumReport(tuple(float(np.real(v)) for v in values))
    return SpectrumReport(tuple(complex(v) for v in values))


# -- limit and chain checks
class KoenigReport(namedtuple("_KoenigReport", "n values modulus gap")):
    """g_m = a_n(T^m)^(1/m) for m = 1..m_max and |g_{m_max} - |lambda_n||."""

    __slots__ = ()


def _scaled_power(matrix: np.ndarray, power: int) -> tuple[np.ndarray, float]:
    """(P, e) with T^power = P * exp(e), by binary powering with every
    product rescaled to unit max-entry.
    """

    result = np.eye(matrix.shape[0])
    log_result = 0.0
    base = matrix.copy()
    log_base = 0.0
    while power:
        if power & 1:
            result = result @ base
            log_result += log_base
            top = float(np.max(np.abs(result)))
            if top == 0:
                return result, 0.0
            result /= top
            log_result += math.log(top)
        power >>= 1
        if power:
            base = base @ base
            log_base *= 2
            top = float(np.max(np.abs(base)))
            if top == 0:
                return np.zeros_like(matrix), 0.0
            base /= top
            log_base += math.log(top)
    return result, log_result


def koenig_limit_check(T: OperatorSpec, n: int = 1, m_max: int = 64) -> KoenigReport:
    type_check(T, OperatorSpec)
    if not T.is_hilbert:
        raise OperatorError("the limit check uses Euclidean approximation numbers")
    matrix = T.matrix
    dim = matrix.shape[0]
    if matrix.shape[1] != dim:
        raise OperatorError("powers need a square matrix")
    n = check_positive_int(n, "n")
    if n > dim:
        raise DimensionError(f"n = {n} exceeds the dimension {dim}")
    m_max = check_positive_int(m_max, "m_max")
    values = []
    for m in range(1, m_max + 1):
        scaled, log_scale = _scaled_power(matrix, m)
        sigma = np.linalg.svd(scaled, compute_uv=False)
        top = float(sigma[0]) if sigma.size else 0.0
        s_n = float(sigma[n - 1])
        # subnormal or zero: the power has lost rank n
        if top == 0 or s_n < np.finfo(float).tiny:
            values.append(0.0)
        else:
            values.append(math.exp((math.log(s_n) + log_scale) / m))
    modulus = eigenvalues(matrix).moduli[n - 1]
    gap = abs(values[-1] - modulus)
    logger.info("Limit check n=%d, m_max=%d: gap %.3e.", n, m_max, gap)
    return KoenigReport(n, tuple(values), modulus, gap)


MarcusRow = namedtuple(
    "MarcusRow",
    "n width a_n lambda_bound width_bound first second third",
)


class MarcusReport(namedtuple("_MarcusReport", "rows C passed")):
    """Per n: d_n <= a_n, a_n <= 2 sqrt(2) C |lambda_n| and
    2 sqrt(2) C |lambda_n| <= 8 C (C + 1) d_{n-1}.

    `width` is d_n (n-dimensional subspaces) and `width_bound` uses
    d_{n-1}, the width aligned with a_n (rank < n operators).
    """

    __slots__ = ()


def marcus_chain_check(T: OperatorSpec, tol: float = IDENTITY_TOL) -> MarcusReport:
    type_check(T, OperatorSpec)
    if not T.is_hilbert:
        raise OperatorError("the chain check is for Euclidean spaces")
    if not _is_symmetric(T.matrix):
        raise OperatorError("the chain check needs a symmetric matrix")
    C = 1.0
    widths = kolmogorov_diameters(T).values
    approx = approximation_numbers(T).values
    moduli = eigenvalues(T).moduli
    scale = max(approx[0], 1.0) * tol
    rows = []
    for n in range(1, len(approx) + 1):
        a_n = approx[n - 1]
        lam_bound = 2 * math.sqrt(2) * C * moduli[n - 1]
        width_bound = 8 * C * (C + 1) * widths[n - 1]
        rows.append(
            MarcusRow(
                n,
                widths[n],
                a_n,
                lam_bound,
                width_bound,
                widths[n] <= a_n + scale,
                a_n <= lam_bound + scale,
                lam_bound <= width_bound + scale,
            )
        )
    passed = all(row.first and row.second and row.third for row in rows)
    return MarcusReport(tuple(rows), C, passed)


TORow = namedtuple("TORow", "m a_m lower upper passed")


class TOBoundReport(namedtuple("_TOBoundReport", "norm norm_passed rows passed")):
    """|T| <= 2 d_1 and d_m / 9 <= a_m <= 3 d_k, k = max(1, m // 4)."""

    __slots__ = ()


def to_bound_check(T: OperatorSpec, d: TargetSequence, tol: float = IDENTITY_TOL) -> TOBoundReport:
    type_check(T, OperatorSpec)
    type_check(d, TargetSequence)
    approx = approximation_numbers(T).values
    norm = approx[0]
    slack = tol * max(1.0, d.values[0])
    norm_passed = norm <= 2 * d.values[0] + slack
    rows = []
    for m in range(1, min(len(approx), d.N) + 1):
        a_m = approx[m - 1]
        lower = d.values[m - 1] / 9
        upper = 3 * d.values[max(1, m // 4) - 1]
        rows.append(TORow(m, a_m, lower, upper, lower - slack <= a_m <= upper + slack))
    passed = norm_passed and all(row.passed for row in rows)
    return TOBoundReport(norm, norm_passed, tuple(rows), passed)
