# -*- coding: utf-8 -*-
#
# test.py
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

"""pytest test suite.

To run, simply:
>>> pytest pylethargy/test.py
"""

# allowing postponed evaluation of annotations; see:
# https://www.python.org/dev/peps/pep-0563/
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, seed, settings, strategies as st
from hypothesis.extra.numpy import arrays

from . import cli
from .basecommand import Problem, UsageError, Verdict, read_matrix_csv
from .core import Family, Flag, Method, NormSpec, TailModel, TargetSequence
from .distance import distance, distance_oracle, distance_profile
from .frechet import (
    BANACH,
    DeviationMethod,
    DeviationTrend,
    RayConfig,
    check_al_condition,
    corollary_transforms,
    deviation,
    deviation_inf,
    product_witness,
    verify_frechet_bounds,
)
from .lethargy import (
    KonyaginConfig,
    check_condition_strict,
    check_condition_weak,
    ratio_report,
    synthesize_exact,
    synthesize_konyagin,
    verify_bounds,
)
from .operators import (
    OperatorMethod,
    OperatorSpec,
    approximation_numbers,
    approximation_numbers_oracle,
    bernstein_pair_diagonal,
    eigenvalues,
    hmr_operator,
    koenig_limit_check,
    kolmogorov_diameters,
    marcus_chain_check,
    operator_norm,
    to_bound_check,
)
from .spaces import (
    IssueKind,
    SubspaceChain,
    chain_coordinates,
    chain_polynomials,
    chain_random,
    interleave_chain,
    validate_chain,
)
from .utils import (
    ChainError,
    DimensionError,
    DivergentTailError,
    ExpectationError,
    HypothesisViolationError,
    InterleaveError,
    InterleaveFailure,
    NonPositiveError,
    NormError,
    OperatorError,
    SequenceError,
    check_positive_int,
    classname,
    is_container,
    type_check,
)

LP1 = NormSpec.lp(1)
LP2 = NormSpec.lp(2)
LPINF = NormSpec.lp("inf")

vectors5 = arrays(np.float64, 5, elements=st.floats(-10, 10, allow_subnormal=False))


def _e(dim: int, *indices: int) -> np.ndarray:
    x = np.zeros(dim)
    for i in indices:
        x[i] = 1.0
    return x


class TestUtils:
    def test_classname(self) -> None:
        for name in ("_Foo", "_Bar", "_Baz"):
            exec(f"class {name}: pass")  # create a class
            cls = locals()[name]
            assert name == classname(cls) == classname(cls())

    def test_is_container(self) -> None:
        assert is_container((1, 2))
        assert is_container(np.zeros(2))
        assert not is_container("abc")
        assert not is_container(3)

    def test_type_check(self) -> None:
        type_check(1.0, float)
        type_check(1, (int, float))
        type_check(Family.LP, Family)
        type_check(Method.PROJECTION, (Family, Method))
        with pytest.raises(ExpectationError):
            type_check("LP", Family)
        with pytest.raises(ExpectationError):
            type_check("1", (int, float))
        with pytest.raises(ExpectationError):
            type_check(1, int, was_positive=False)

    def test_check_positive_int(self) -> None:
        assert check_positive_int(3) == 3
        assert check_positive_int(np.int64(2)) == 2
        with pytest.raises(ExpectationError):
            check_positive_int(True)
        with pytest.raises(ExpectationError):
            check_positive_int(2.0)
        with pytest.raises(NonPositiveError):
            check_positive_int(0, "dim")


class TestCore:
    def test_norm_spec(self) -> None:
        assert LPINF.p == math.inf
        assert LP2.is_hilbert and not LP1.is_hilbert
        assert NormSpec.fnorm_of_norm().base == LP2
        with pytest.raises(NormError):
            NormSpec.lp(0.5)
        with pytest.raises(NormError):
            NormSpec.grid_sup([0.5, 0.2])
        with pytest.raises(NormError):
            NormSpec.grid_sup([0.0, 2.0])
        with pytest.raises(NormError):
            NormSpec.fnorm_product([0.5, -1.0])
        with pytest.raises(NormError):
            NormSpec.fnorm_of_norm(NormSpec.fnorm_product())

    def test_weights(self) -> None:
        fnorm = NormSpec.fnorm_product()
        assert np.allclose(fnorm.weights_for(3), [0.5, 0.25, 0.125])
        assert fnorm.weight_sum(3) == 0.875
        with pytest.raises(DimensionError):
            NormSpec.fnorm_product([0.5, 0.25]).weights_for(3)
        with pytest.raises(NormError):
            LP2.weights_for(3)

    def test_evaluate(self) -> None:
        x = np.array([3.0, -4.0])
        assert LP2.evaluate(x) == 5.0
        assert LP1.evaluate(x) == 7.0
        assert LPINF.evaluate(x) == 4.0
        assert NormSpec.fnorm_of_norm().evaluate(x) == 5.0 / 6.0
        assert NormSpec.fnorm_product().evaluate(x) == pytest.approx(0.5 * 0.75 + 0.25 * 0.8)
        assert np.allclose(LP2.evaluate(np.eye(2) * 2, axis=0), [2.0, 2.0])

    @seed(1)
    @settings(deadline=None)
    @given(vectors5, vectors5)
    def test_fnorm_axioms(self, x: np.ndarray, y: np.ndarray) -> None:
        for fnorm in (NormSpec.fnorm_product(), NormSpec.fnorm_of_norm(LP1)):
            fx, fy = fnorm.evaluate(x), fnorm.evaluate(y)
            assert fnorm.evaluate(x + y) <= fx + fy + 1e-12
            assert fnorm.evaluate(-x) == pytest.approx(fx, abs=1e-12)
            assert fx >= 0
            assert (fx == 0) == (not np.any(x))

    def test_fnorm_not_homogeneous(self) -> None:
        fnorm = NormSpec.fnorm_of_norm()
        x = np.array([1.0, 0.0])
        assert fnorm.evaluate(2 * x) != 2 * fnorm.evaluate(x)

    def test_target_sequence(self) -> None:
        d = TargetSequence([1.0, 0.5, 0.5, 0.0])
        assert d.N == len(d) == 4
        assert d.is_truncated
        assert not d.is_strictly_decreasing_until_zero
        assert d.value(2) == 0.5
        with pytest.raises(SequenceError):
            d.value(5)
        for bad in ([], [1.0, 2.0], [1.0, -1.0], [math.inf]):
            with pytest.raises(SequenceError):
                TargetSequence(bad)
        with pytest.raises(SequenceError):
            TargetSequence([1.0], n0=2)

    def test_tail_models(self) -> None:
        d = TargetSequence.geometric(0.5, 0.5, 5)
        assert d.tail == TailModel.geometric(0.5)
        assert d.value(7) == pytest.approx(2.0 ** -7)
        assert d.tail_sum(1) == pytest.approx(0.5)
        assert d.beyond() == pytest.approx(2.0 ** -5)
        finite = TargetSequence([1.0, 0.5], tail=TailModel.none())
        assert finite.value(9) == 0.0
        assert finite.tail_sum(0) == 1.5
        assert d.head(3).is_truncated
        with pytest.raises(SequenceError):
            TailModel.geometric(1.0)


class TestSpaces:
    def test_validate_examples(self) -> None:
        e1, e2 = _e(3, 0), _e(3, 1)
        good = SubspaceChain([e1, np.column_stack([e1, e2])])
        assert validate_chain(good).passed
        assert str(validate_chain(good)) == "chain passes"

        reversed_ = validate_chain(SubspaceChain([np.column_stack([e1, e2]), e1]))
        assert not reversed_.passed
        assert IssueKind.NOT_STRICT in {issue.kind for issue in reversed_.issues}

        deficient = validate_chain(SubspaceChain([e1, np.column_stack([e1, e1 + 1e-14 * e2])]))
        assert not deficient.passed
        assert IssueKind.RANK_DEFICIENT in {issue.kind for issue in deficient.issues}

    def test_validation_ignores_basis_representation(self) -> None:
        chain = chain_random(6, [1, 3, 4], seed=2)
        mixer = np.array([[2.0, 1.0, 0.0], [0.0, 1.0, 3.0], [1.0, 0.0, 1.0]])
        bases = [chain[0] * 5.0, chain[1] @ mixer, chain[2]]
        assert validate_chain(SubspaceChain(bases)).passed
        assert validate_chain(chain).passed

    def test_chain_errors(self) -> None:
        with pytest.raises(ChainError):
            SubspaceChain([])
        with pytest.raises(ChainError):
            SubspaceChain([np.zeros((3, 1)), np.zeros((4, 2))])
        with pytest.raises(ChainError):
            SubspaceChain([np.array([[math.nan], [1.0]])])
        with pytest.raises(ChainError):
            chain_coordinates(4, [2, 2])
        with pytest.raises(ChainError):
            SubspaceChain([_e(2, 0), np.eye(2)]).check_integrity()

    def test_polynomials(self) -> None:
        grid = np.linspace(0.0, 1.0, 33)
        chain = chain_polynomials(grid, [0, 1, 2])
        assert chain.ranks == (1, 2, 3)
        assert validate_chain(chain).passed
        # the quadratic t^2 sampled on the grid lies in the last level
        assert chain.contains(3, grid ** 2)
        assert not chain.contains(2, grid ** 2)
        with pytest.raises(ChainError):
            chain_polynomials(grid, [1, 1])
        with pytest.raises(ChainError):
            chain_polynomials([0.0, 0.5, 0.5, 1.0], [0, 1])
        full = validate_chain(chain_polynomials([0.0, 0.5, 1.0], [0, 1, 2]))
        assert [issue.kind for issue in full.issues] == [IssueKind.NO_EXTERIOR]

    def test_orthonormal_and_complement(self) -> None:
        chain = chain_coordinates(4, [1, 3])
        assert chain.orthonormal(0).shape == (4, 0)
        assert np.array_equal(chain.orthonormal(3), np.eye(4))
        comp = chain.complement(1)
        assert comp.shape == (4, 2)
        assert np.allclose(comp.T @ comp, np.eye(2))
        assert np.allclose(chain.orthonormal(1).T @ comp, 0.0)
        assert chain.coordinate_support(2) == (0, 1, 2)
        assert chain_random(4, [2], seed=1).coordinate_support(1) is None

    def test_interleave_dyadic(self) -> None:
        chain = chain_coordinates(8, [1, 2, 3])
        merged = interleave_chain(chain, TargetSequence([1.0, 0.5, 0.25]), K=2.0)
        assert merged.inserted == ()
        assert merged.index_map == (1, 2, 3)
        assert merged.sequence.values == (1.0, 0.5, 0.25)
        assert merged.first_dyadic == 1

    def test_interleave_inserts(self) -> None:
        chain = chain_coordinates(8, [1, 3])
        merged = interleave_chain(chain, TargetSequence([1.0, 1 / 3]), K=2.0, seed=4)
        assert merged.inserted == (2,)
        assert merged.index_map == (1, 3)
        assert merged.sequence.values == pytest.approx((1.0, 0.5, 1 / 3))
        assert merged.chain.ranks == (1, 2, 3)
        assert validate_chain(merged.chain).passed
        for n, level in enumerate(merged.index_map, start=1):
            for column in chain[n - 1].T:
                assert merged.chain.contains(level, column)
            assert merged.chain.ranks[level - 1] == chain.ranks[n - 1]

    def test_interleave_failures(self) -> None:
        with pytest.raises(InterleaveError) as info:
            interleave_chain(chain_coordinates(3, [1, 2]), TargetSequence([1.0, 1 / 3]))
        assert info.value.kind is InterleaveFailure.INSUFFICIENT_DIMENSION
        with pytest.raises(InterleaveError) as info:
            interleave_chain(chain_coordinates(8, [1, 2, 5]), TargetSequence([1.0, 1.0, 0.2]), K=1.0)
        assert info.value.kind is InterleaveFailure.NON_MERGEABLE
        assert info.value.indices == (1, 2)


class TestDistance:
    def test_projection(self) -> None:
        result = distance(_e(3, 2), np.eye(3)[:, :2], LP2)
        assert result.value == pytest.approx(1.0)
        assert np.allclose(result.minimizer, 0.0)
        assert result.method is Method.PROJECTION and result.is_exact

    def test_sup_norm_midpoint(self) -> None:
        result = distance(np.array([1.0, 1.0]), np.array([1.0, -1.0]), LPINF)
        assert result.value == pytest.approx(1.0, abs=1e-9)
        assert np.allclose(result.minimizer, 0.0, atol=1e-8)
        assert result.method is Method.LINEAR_PROGRAM

    def test_empty_basis(self) -> None:
        x = np.array([1.0, -2.0, 2.0])
        result = distance(x, np.zeros((3, 0)), LP2)
        assert result.value == 3.0
        assert result.method is Method.TRIVIAL

    def test_dimension_mismatch(self) -> None:
        with pytest.raises(DimensionError):
            distance(np.ones(3), np.eye(4)[:, :1], LP2)
        with pytest.raises(DimensionError):
            distance(np.ones(3), np.eye(3)[:, :1], NormSpec.grid_sup([0.0, 1.0]))

    def test_product_fnorm_closed_form(self) -> None:
        rng = np.random.default_rng(5)
        fnorm = NormSpec.fnorm_product()
        chain = chain_coordinates(6, [1, 2, 3, 4, 5])
        weights = 2.0 ** -np.arange(1, 7)
        for _ in range(20):
            x = rng.standard_normal(6) * 3
            for n in range(1, 6):
                result = distance(x, chain[n - 1], fnorm)
                expected = math.fsum(weights[n:] * np.abs(x[n:]) / (1 + np.abs(x[n:])))
                assert result.value == pytest.approx(expected, abs=1e-12)
                assert result.value <= 2.0 ** -n
                assert result.method is Method.CLOSED_FORM

    @seed(1)
    @settings(deadline=None)
    @given(vectors5)
    def test_product_fnorm_cap(self, x: np.ndarray) -> None:
        chain = chain_coordinates(5, [1, 2, 3, 4])
        for n in range(1, 5):
            assert distance(x, chain[n - 1], NormSpec.fnorm_product()).value <= 2.0 ** -n

    def test_fnorm_of_norm_transform(self) -> None:
        x = np.array([1.0, 2.0, 2.0])
        basis = _e(3, 0)
        rho = distance(x, basis, LP2).value
        assert rho == pytest.approx(math.sqrt(8))
        for t in (0.5, 1.0, 3.0):
            found = distance(t * x, basis, NormSpec.fnorm_of_norm()).value
            assert found == pytest.approx(t * rho / (1 + t * rho))

    def test_lp_descent_flags_inexact(self) -> None:
        result = distance(np.array([1.0, 2.0, -1.0, 0.5]), np.eye(4)[:, :2], NormSpec.lp(3))
        assert result.method is Method.CONVEX_DESCENT
        assert not result.is_exact
        assert result.value == pytest.approx((1 + 0.5 ** 3) ** (1 / 3), rel=1e-6)

    @seed(1)
    @settings(deadline=None, max_examples=40)
    @given(vectors5, st.floats(-5, 5, allow_subnormal=False))
    def test_homogeneity_and_translation(self, x: np.ndarray, t: float) -> None:
        basis = chain_random(5, [2], seed=3)[0]
        for norm in (LP1, LP2, LPINF):
            rho = distance(x, basis, norm).value
            assert distance(t * x, basis, norm).value == pytest.approx(abs(t) * rho, rel=1e-7, abs=1e-8)
            shifted = x + basis @ np.array([1.5, -2.0])
            assert distance(shifted, basis, norm).value == pytest.approx(rho, rel=1e-7, abs=1e-8)
            assert rho <= norm.evaluate(x) + 1e-9

    def test_random_rank2_matches_oracle(self) -> None:
        rng = np.random.default_rng(7)
        basis = rng.standard_normal((5, 2))
        for _ in range(3):
            x = rng.standard_normal(5)
            exact = distance(x, basis, LP2).value
            assert distance_oracle(x, basis, LP2, 1e-9) == pytest.approx(exact, abs=1e-8)

    def test_oracle_examples(self) -> None:
        assert distance_oracle(_e(3, 2), np.eye(3)[:, :2], LP2) == pytest.approx(1.0, abs=1e-6)
        assert distance_oracle(np.array([1.0, 1.0, 0.0]), _e(3, 2), LP1) == pytest.approx(2.0, abs=1e-6)
        with pytest.raises(DimensionError):
            distance_oracle(np.ones(5), np.eye(5)[:, :4], LP2)

    def test_linear_programs_match_oracle(self) -> None:
        rng = np.random.default_rng(17)
        for trial in range(25):
            norm = (LP1, LPINF)[trial % 2]
            dim = int(rng.integers(4, 7))
            rank = int(rng.integers(1, 4))
            basis = rng.standard_normal((dim, rank))
            x = rng.standard_normal(dim)
            result = distance(x, basis, norm)
            assert result.method is Method.LINEAR_PROGRAM
            found = distance_oracle(x, basis, norm)
            # the oracle evaluates actual points of the subspace
            assert found >= result.value - 1e-7
            assert found == pytest.approx(result.value, abs=1e-5)

    def test_oracle_lp15(self) -> None:
        rng = np.random.default_rng(11)
        norm = NormSpec.lp(1.5)
        for _ in range(3):
            x = rng.standard_normal(4)
            basis = rng.standard_normal((4, 2))
            assert distance_oracle(x, basis, norm) == pytest.approx(distance(x, basis, norm).value, abs=1e-5)

    def test_profile(self) -> None:
        chain = chain_coordinates(3, [1, 2])
        assert [r.value for r in distance_profile(_e(3, 2), chain, LP2)] == pytest.approx([1.0, 1.0])
        ones = distance_profile(np.ones(3), chain, LP2)
        assert [r.value for r in ones] == pytest.approx([math.sqrt(2), 1.0])

    def test_profile_kink(self) -> None:
        grid = np.linspace(0.0, 1.0, 257)
        chain = chain_polynomials(grid, [0, 1])
        kink = np.abs(grid - 0.5)
        profile = distance_profile(kink, chain, NormSpec.grid_sup(grid))
        assert [r.value for r in profile] == pytest.approx([0.25, 0.25], abs=1e-9)


class TestCondition:
    def test_halves(self) -> None:
        d = TargetSequence.geometric(0.5, 0.5, 30)
        strict = check_condition_strict(d)
        assert not strict.passed and strict.first_violation == 1
        weak = check_condition_weak(d)
        assert weak.passed
        assert all(abs(row[3]) <= 1e-12 for row in weak.margins)
        assert weak.labels == frozenset()

    def test_faster_than_halves(self) -> None:
        d = TargetSequence.geometric(0.4, 0.4, 30)
        report = check_condition_strict(d)
        assert report.passed
        for n, d_n, _, margin, _ in report.margins:
            assert margin == pytest.approx(d_n * (1 - 1 / 1.5))

    def test_zeros_and_finite(self) -> None:
        assert check_condition_strict(TargetSequence([0.0, 0.0], tail=TailModel.none())).passed
        finite = TargetSequence([1.0, 0.5, 0.25, 0.0], tail=TailModel.none())
        assert check_condition_weak(finite).passed

    def test_harmonic_truncated(self) -> None:
        d = TargetSequence([1 / n for n in range(1, 21)])
        report = check_condition_weak(d)
        assert not report.passed
        assert report.first_violation == 1
        assert Flag.TRUNCATED in report.labels

    def test_starts_at_n0(self) -> None:
        d = TargetSequence([1.0, 0.1, 0.09, 0.001], n0=3, tail=TailModel.none())
        report = check_condition_strict(d)
        assert report.passed
        assert [row[0] for row in report.margins] == [3, 4]


class TestSynthesis:
    def test_orthogonal_witness(self) -> None:
        chain = SubspaceChain([_e(2, 0)])
        result = synthesize_exact(chain, TargetSequence([1.0]), z=_e(2, 1))
        assert np.allclose(np.abs(result.x), [0.0, 1.0])
        assert result.max_residual <= 1e-12
        assert result.norm_bound_slack >= 0

    def test_pythagoras_witness(self) -> None:
        chain = chain_coordinates(3, [1, 2])
        result = synthesize_exact(chain, TargetSequence([math.sqrt(2), 1.0]), z=_e(3, 2))
        assert np.allclose(np.abs(result.x), [0.0, 1.0, 1.0], atol=1e-9)
        assert result.lam > 0
        # x - lam z lies in the last level
        assert chain.contains(2, result.x - result.lam * result.z)

    @pytest.mark.parametrize("norm", [LP2, LPINF, LP1])
    def test_random_chains(self, norm: NormSpec) -> None:
        rng = np.random.default_rng(13)
        for trial in range(50):
            dim = int(rng.integers(4, 9))
            length = int(rng.integers(1, min(4, dim - 1) + 1))
            ranks = sorted(rng.choice(np.arange(1, dim), size=length, replace=False).tolist())
            chain = chain_random(dim, ranks, seed=trial)
            d = TargetSequence.geometric(1.0, 0.4, length)
            result = synthesize_exact(chain, d, norm=norm)
            assert result.max_residual <= 1e-6
            assert result.lam > 0
            assert chain.contains(length, result.x - result.lam * result.z)
            assert norm.evaluate(result.x) <= d.values[0] + 1 + 1e-6
            profile = distance_profile(result.x, chain, norm)
            assert [r.value for r in profile] == pytest.approx(d.values, abs=1e-6)

    def test_trailing_zeros(self) -> None:
        chain = chain_coordinates(5, [1, 2, 3])
        result = synthesize_exact(chain, TargetSequence([1.0, 0.5, 0.0]))
        assert Flag.EXTERIOR_REPLACED in result.labels
        assert result.anchor == 2
        assert result.max_residual <= 1e-6
        assert chain.contains(3, result.x)

    def test_ties_are_labelled(self) -> None:
        chain = chain_coordinates(4, [1, 2])
        result = synthesize_exact(chain, TargetSequence([1.0, 1.0]))
        assert Flag.OUTSIDE_LEMMA_HYPOTHESIS in result.labels

    def test_rejections(self) -> None:
        chain = chain_coordinates(3, [1, 2])
        with pytest.raises(HypothesisViolationError):
            synthesize_exact(chain, TargetSequence([1.0, 0.5]), z=_e(3, 0))
        with pytest.raises(HypothesisViolationError):
            synthesize_exact(chain, TargetSequence([0.0, 0.0]))
        with pytest.raises(NormError):
            synthesize_exact(chain, TargetSequence([1.0, 0.5]), norm=NormSpec.fnorm_product())
        with pytest.raises(SequenceError):
            synthesize_exact(chain, TargetSequence([1.0]))


class TestKonyagin:
    CHAIN = chain_random(16, list(range(1, 13)), seed=0)
    TARGETS = TargetSequence([1 / (n + 1) for n in range(1, 13)])

    @pytest.mark.parametrize("c", [0.25, 0.5, 1.0])
    def test_bounds_hold(self, c: float) -> None:
        result = synthesize_konyagin(self.CHAIN, self.TARGETS, KonyaginConfig(c))
        assert result.report.passed
        for row in result.report.rows:
            assert c - 1e-6 <= row.ratio <= 4 * c + 1e-6
        assert verify_bounds(result.x_c, self.CHAIN, self.TARGETS, c).passed

    def test_narrowest_interval(self) -> None:
        result = synthesize_konyagin(self.CHAIN, self.TARGETS, KonyaginConfig(0.25))
        assert all(0.25 - 1e-6 <= r <= 1 + 1e-6 for r in result.report.ratios)

    def test_dyadic_upper_endpoint(self) -> None:
        chain = chain_coordinates(6, [1, 2, 3])
        d = TargetSequence([1.0, 0.5, 0.25])
        result = synthesize_konyagin(chain, d, KonyaginConfig(1.0))
        assert result.interleaving.inserted == ()
        assert result.report.ratios == pytest.approx((4.0, 4.0, 4.0), rel=1e-6)

    def test_scaling(self) -> None:
        chain = chain_coordinates(8, [1, 4])
        d = TargetSequence([1.0, 1 / 3])
        result = synthesize_konyagin(chain, d, KonyaginConfig(0.5, seed=2))
        assert len(result.interleaving.inserted) == 1
        assert result.report.passed
        for n in (1, 2):
            scaled = distance(result.x_c, chain[n - 1], LP2).value
            plain = distance(result.x, chain[n - 1], LP2).value
            assert scaled == pytest.approx(2.0 * plain)

    def test_config(self) -> None:
        for c in (0.0, 1.5, -1.0):
            with pytest.raises(ValueError):
                KonyaginConfig(c)
        with pytest.raises(ValueError):
            KonyaginConfig(0.5, K=0.0)
        with pytest.raises(HypothesisViolationError):
            synthesize_konyagin(
                chain_coordinates(4, [1, 2]), TargetSequence([1.0, 0.0]), KonyaginConfig(0.5)
            )

    def test_verify_failures(self) -> None:
        chain = chain_coordinates(4, [1, 2])
        d = TargetSequence([1.0, 0.5])
        zero = verify_bounds(np.zeros(4), chain, d, 0.5)
        assert not zero.passed
        assert not any(row.passed for row in zero.rows)
        result = synthesize_konyagin(chain, d, KonyaginConfig(0.5))
        assert result.report.passed
        assert not verify_bounds(10 * result.x_c, chain, d, 0.5).passed


class TestRatios:
    def test_exact_solution(self) -> None:
        chain = chain_random(6, [1, 2, 4], seed=9)
        d = TargetSequence([1.0, 0.4, 0.1])
        x = synthesize_exact(chain, d).x
        report = ratio_report(x, chain, d)
        assert report.ratios == pytest.approx((1.0, 1.0, 1.0), abs=1e-6)

    def test_not_big_o_witness(self) -> None:
        m = 8
        chain = chain_coordinates(m + 1, range(1, m + 1))
        d = TargetSequence([2.0 ** -n for n in range(1, m + 1)])
        report = ratio_report(_e(m + 1, m), chain, d)
        assert report.ratios == pytest.approx([2.0 ** n for n in range(1, m + 1)])
        assert report.is_increasing
        assert report.sup == pytest.approx(2.0 ** m)
        assert report.inf == pytest.approx(2.0)

    def test_zero_target_sentinel(self) -> None:
        chain = chain_coordinates(3, [1, 2])
        report = ratio_report(np.ones(3), chain, TargetSequence([1.0, 0.0]))
        assert report.rows[1].ratio == math.inf
        assert report.sup == report.inf == pytest.approx(math.sqrt(2))


class TestOperators:
    def test_spec(self) -> None:
        T = OperatorSpec([[1.0, 2.0], [3.0, 4.0]])
        assert T.is_hilbert and T.shape == (2, 2)
        with pytest.raises(ValueError):
            T.matrix[0, 0] = 5.0
        with pytest.raises(NormError):
            OperatorSpec([[1.0]], NormSpec.fnorm_product())
        with pytest.raises(OperatorError):
            OperatorSpec([[1.0, 2.0], [3.0, 4.0]], h_constant=1.0)
        with pytest.raises(OperatorError):
            OperatorSpec([[math.nan]])

    def test_norms(self) -> None:
        assert operator_norm(OperatorSpec(np.eye(2))).value == pytest.approx(1.0)
        A = [[1.0, 2.0], [3.0, 4.0]]
        assert operator_norm(OperatorSpec(A, LPINF, LPINF)).value == pytest.approx(7.0)
        assert operator_norm(OperatorSpec(A, LP1, LP1)).value == pytest.approx(6.0)
        assert operator_norm(OperatorSpec(A, LP1, LPINF)).value == pytest.approx(4.0)
        assert operator_norm(OperatorSpec(np.diag([3.0, 2.0]))).value == pytest.approx(3.0)
        vertex = operator_norm(OperatorSpec(A, LPINF, LP2))
        assert vertex.method is OperatorMethod.VERTEX_ENUMERATION
        assert vertex.value == pytest.approx(math.sqrt(9 + 49))

    def test_multistart_norm(self) -> None:
        norm = NormSpec.lp(3)
        found = operator_norm(OperatorSpec([[1.0, 2.0], [0.0, 1.0]], norm, LP2))
        assert not found.exact
        assert found.method is OperatorMethod.MULTISTART
        assert found.value >= math.sqrt(5) - 1e-9  # image of e_2

    def test_hilbert_numbers(self) -> None:
        report = approximation_numbers(OperatorSpec(np.diag([3.0, 2.0, 1.0])))
        assert report.values == pytest.approx((3.0, 2.0, 1.0))
        assert report.method is OperatorMethod.SVD_EXACT
        rank_one = np.outer([1.0, 2.0, 2.0], [3.0, 4.0])
        values = approximation_numbers(OperatorSpec(rank_one)).values
        assert values[0] == pytest.approx(15.0)
        assert values[1] <= 1e-9 * 15.0

    def test_scaling(self) -> None:
        T = OperatorSpec(np.random.default_rng(3).standard_normal((3, 3)))
        base = approximation_numbers(T).values
        assert approximation_numbers(T.scaled(-2.0)).values == pytest.approx([2 * v for v in base])
        assert base[0] == pytest.approx(operator_norm(T).value, rel=1e-9)

    def test_closed_form_and_oracle(self) -> None:
        T = OperatorSpec(np.diag([1.0, 0.5, 0.25]), LPINF, LPINF)
        report = approximation_numbers(T)
        assert report.method is OperatorMethod.CLOSED_FORM
        assert report.values == (1.0, 0.5, 0.25)
        for n, a_n in enumerate(report.values, start=1):
            interval = approximation_numbers_oracle(T, n, restarts=4)
            assert interval.lower - 1e-9 <= a_n <= interval.upper + 1e-9

    def test_oracle_examples(self) -> None:
        hilbert = approximation_numbers_oracle(OperatorSpec(np.diag([3.0, 2.0, 1.0])), 2, restarts=4)
        assert hilbert.lower - 1e-9 <= 2.0 <= hilbert.upper + 1e-9
        l1 = approximation_numbers_oracle(OperatorSpec(np.diag([1.0, 0.5]), LP1, LP1), 2, restarts=4)
        assert l1.lower - 1e-9 <= 0.5 <= l1.upper + 1e-9
        assert l1.upper - l1.lower <= 0.05
        zero = approximation_numbers_oracle(OperatorSpec(np.zeros((3, 3)), LPINF, LPINF), 2)
        assert zero.lower == zero.upper == 0.0

    def test_oracle_limits(self) -> None:
        with pytest.raises(DimensionError):
            approximation_numbers_oracle(OperatorSpec(np.eye(5)), 2)
        with pytest.raises(OperatorError):
            approximation_numbers_oracle(OperatorSpec(np.ones((2, 2)), LP2, LP1), 2)

    def test_oracle_drives_non_diagonal(self) -> None:
        T = OperatorSpec([[1.0, 2.0], [3.0, 4.0]], LPINF, LPINF)
        report = approximation_numbers(T, restarts=4)
        assert report.method is OperatorMethod.ORACLE
        assert report.values[0] == pytest.approx(7.0)
        assert report.values[1] <= report.values[0]
        for interval in report.intervals:
            assert interval.lower <= interval.upper + 1e-12

    def test_truncation_upper_bounds(self) -> None:
        matrix = np.random.default_rng(5).standard_normal((5, 5))
        sigma = np.linalg.svd(matrix, compute_uv=False)
        T = OperatorSpec(matrix, LPINF, LPINF)
        report = approximation_numbers(T, restarts=2)
        assert report.method is OperatorMethod.SAMPLED_UPPER_BOUND
        assert report.intervals is None
        assert report.values[0] == pytest.approx(operator_norm(T).value)
        for n, a_n in enumerate(report.values, start=1):
            # |R|_{inf->inf} >= |R|_{2->2} / sqrt(5) for every rank < n residual
            assert a_n >= sigma[n - 1] / math.sqrt(5) - 1e-9
        assert list(report.values) == sorted(report.values, reverse=True)
        assert len(to_bound_check(T, TargetSequence([1.0] * 5)).rows) == 5

        l3 = NormSpec.lp(3)
        square = OperatorSpec([[1.0, 2.0], [3.0, 4.0]], l3, l3)
        report = approximation_numbers(square, restarts=2)
        assert report.method is OperatorMethod.SAMPLED_UPPER_BOUND
        top = np.linalg.svd(square.matrix, compute_uv=False)[0]
        assert report.values[0] >= top * 2 ** (-1 / 6) - 1e-9
        assert 0.0 < report.values[1] <= report.values[0]

    def test_bernstein_pairs(self) -> None:
        halves = bernstein_pair_diagonal(TargetSequence([1.0, 0.5, 0.25]))
        assert approximation_numbers(halves).values == pytest.approx((1.0, 0.5, 0.25))
        assert halves.h_constant == 1.0
        ties = bernstein_pair_diagonal([1.0, 1.0, 1.0])
        assert approximation_numbers(ties).values == pytest.approx((1.0, 1.0, 1.0))
        sup = bernstein_pair_diagonal([1.0, 0.5], p="inf", dim=2)
        for n, target in ((1, 1.0), (2, 0.5)):
            interval = approximation_numbers_oracle(sup, n, restarts=4)
            assert interval.lower - 1e-9 <= target <= interval.upper + 1e-9
        with pytest.raises(HypothesisViolationError):
            bernstein_pair_diagonal([0.5, 1.0])
        with pytest.raises(HypothesisViolationError):
            bernstein_pair_diagonal([1.0, 0.5], dim=3)

    def test_similarity_construction(self) -> None:
        d = (1.0, 0.5, 0.25)
        T = hmr_operator(d, seed=3)
        C = T.h_constant
        assert C >= 1.0
        assert sorted(eigenvalues(T).values, reverse=True) == pytest.approx(d)
        for d_n, a_n in zip(d, approximation_numbers(T).values):
            assert d_n / C - 1e-9 <= a_n <= C * d_n + 1e-9

    def test_widths(self) -> None:
        report = kolmogorov_diameters(OperatorSpec(np.diag([3.0, 2.0, 1.0])))
        assert report.values == pytest.approx((3.0, 2.0, 1.0, 0.0))
        assert report.method is OperatorMethod.ELLIPSOID and report.exact
        assert report.sampling_slack >= -1e-6
        assert kolmogorov_diameters(OperatorSpec(np.eye(4))).values == pytest.approx((1, 1, 1, 1, 0))
        assert kolmogorov_diameters(OperatorSpec(np.zeros((2, 2)))).values == (0.0, 0.0, 0.0)

    def test_sampled_widths(self) -> None:
        report = kolmogorov_diameters(OperatorSpec(np.diag([2.0, 1.0]), LPINF, LPINF), samples=4)
        assert report.method is OperatorMethod.SAMPLED_UPPER_BOUND
        assert not report.exact
        assert report.values[0] == pytest.approx(2.0)
        assert list(report.values) == sorted(report.values, reverse=True)

    def test_eigenvalues(self) -> None:
        assert eigenvalues(OperatorSpec(np.diag([1.0, 3.0, 2.0]))).values == pytest.approx((3, 2, 1))
        assert eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]])).values == (0.0, 0.0)
        rotation = eigenvalues(np.array([[0.0, -1.0], [1.0, 0.0]]))
        assert rotation.moduli == pytest.approx((1.0, 1.0))
        rng = np.random.default_rng(21)
        gauss = rng.standard_normal((3, 3))
        symmetric = gauss + gauss.T
        roots = np.sort(np.real(np.roots(np.poly(symmetric))))
        assert np.sort(eigenvalues(symmetric).values) == pytest.approx(roots, abs=1e-8)
        with pytest.raises(OperatorError):
            eigenvalues(np.ones((2, 3)))

    def test_koenig(self) -> None:
        diagonal = OperatorSpec(np.diag([3.0, 2.0, 1.0]))
        for n, lam in ((1, 3.0), (2, 2.0), (3, 1.0)):
            report = koenig_limit_check(diagonal, n, m_max=64)
            assert report.values == pytest.approx([lam] * 64, rel=1e-9)
            assert report.gap <= 1e-9
        upper = OperatorSpec([[2.0, 1.0], [0.0, 1.0]])
        assert koenig_limit_check(upper, 1, 64).gap == pytest.approx(1.086e-2, abs=1e-4)
        assert koenig_limit_check(upper, 1, 128).gap <= 1e-2
        nilpotent = koenig_limit_check(OperatorSpec([[0.0, 1.0], [0.0, 0.0]]), 1, 2)
        assert nilpotent.values[1] == 0.0 and nilpotent.gap == 0.0
        with pytest.raises(OperatorError):
            koenig_limit_check(OperatorSpec(np.eye(2), LP1, LP1))
        with pytest.raises(DimensionError):
            koenig_limit_check(diagonal, 4)

    def test_koenig_large_powers(self) -> None:
        report = koenig_limit_check(OperatorSpec(np.diag([1e3, 1.0])), 1, 256)
        assert report.values[-1] == pytest.approx(1e3)

    def test_marcus(self) -> None:
        report = marcus_chain_check(OperatorSpec(np.diag([3.0, 2.0, 1.0])))
        assert report.passed
        first = report.rows[0]
        assert (first.width, first.a_n) == pytest.approx((2.0, 3.0))
        assert first.lambda_bound == pytest.approx(2 * math.sqrt(2) * 3)
        identity = marcus_chain_check(OperatorSpec(np.eye(4)))
        assert identity.passed
        assert identity.rows[0].lambda_bound == pytest.approx(2 * math.sqrt(2))
        with pytest.raises(OperatorError):
            marcus_chain_check(OperatorSpec([[1.0, 2.0], [0.0, 1.0]]))

    def test_marcus_random_symmetric(self) -> None:
        rng = np.random.default_rng(17)
        for _ in range(20):
            dim = int(rng.integers(1, 7))
            gauss = rng.standard_normal((dim, dim))
            assert marcus_chain_check(OperatorSpec(gauss + gauss.T)).passed

    def test_two_sided_bounds(self) -> None:
        d = TargetSequence([1.0, 0.5, 0.25, 0.125, 0.0625])
        assert to_bound_check(bernstein_pair_diagonal(d), d).passed
        tripled = to_bound_check(OperatorSpec(3 * np.eye(3)), TargetSequence([1.0, 1.0, 1.0]))
        assert not tripled.norm_passed and not tripled.passed
        zero = to_bound_check(OperatorSpec(np.zeros((2, 2))), TargetSequence([1.0, 0.5]))
        assert zero.norm_passed
        assert not any(row.passed for row in zero.rows)


class TestFrechet:
    PRODUCT = NormSpec.fnorm_product()
    COORDINATES = chain_coordinates(11, range(1, 11))

    def test_product_deviations(self) -> None:
        for n in (1, 5, 10):
            entry = deviation(self.COORDINATES, self.PRODUCT, n)
            assert entry.value == pytest.approx(2.0 ** -(n + 1), rel=1e-9)
            assert entry.method is DeviationMethod.CLOSED_FORM
        report = deviation_inf(self.COORDINATES, self.PRODUCT, 10)
        assert [e.value for e in report.entries] == pytest.approx([2.0 ** -(n + 1) for n in range(1, 11)])
        assert report.inf == pytest.approx(2.0 ** -11)
        assert report.trend is DeviationTrend.DECAYING
        assert report.value(3) == pytest.approx(2.0 ** -4)

    def test_fnorm_of_norm_deviations(self) -> None:
        chain = chain_random(11, range(1, 11), seed=1)
        for base in (LP2, LP1):
            report = deviation_inf(chain, NormSpec.fnorm_of_norm(base), 10)
            assert all(e.value >= 1 - 1e-3 for e in report.entries)
            assert all(e.method is DeviationMethod.RAY_LIMIT for e in report.entries)
            assert report.trend is DeviationTrend.BOUNDED_BELOW

    def test_ray_limit_grows_with_t_max(self) -> None:
        chain = chain_random(5, [1, 2], seed=4)
        fnorm = NormSpec.fnorm_of_norm()
        values = [deviation(chain, fnorm, 1, RayConfig(t_max=t)).value for t in (1.0, 1e2, 1e4)]
        assert values == sorted(values)

    def test_inner_rays_vanish(self) -> None:
        chain = chain_coordinates(4, [1, 2])
        ray = RayConfig(directions=chain.orthonormal(1))
        assert deviation(chain, NormSpec.fnorm_of_norm(), 1, ray).value <= 1e-8
        with pytest.raises(DimensionError):
            deviation(chain, NormSpec.fnorm_of_norm(), 1, RayConfig(directions=_e(4, 3)))

    def test_single_level(self) -> None:
        report = deviation_inf(chain_coordinates(3, [1]), self.PRODUCT)
        assert len(report.entries) == 1
        assert report.inf == pytest.approx(0.375)

    def test_sampled_lower_bound(self) -> None:
        chain = chain_random(4, [1, 2], seed=6)
        entry = deviation(chain, self.PRODUCT, 1, RayConfig(samples=4, steps=5))
        assert entry.method is DeviationMethod.SAMPLED_LOWER_BOUND
        assert 0 < entry.value <= self.PRODUCT.weight_sum(4)

    def test_deviation_errors(self) -> None:
        with pytest.raises(NormError):
            deviation(self.COORDINATES, LP2, 1)
        with pytest.raises(ChainError):
            deviation(self.COORDINATES, self.PRODUCT, 11)

    def test_al_condition(self) -> None:
        eighths = TargetSequence.geometric(1 / 8, 1 / 8, 12)
        report = check_al_condition(eighths, eighths, 1.0)
        assert report.passed and not report.banach_mode
        for row in report.rows:
            assert row.partial + row.tail == pytest.approx((8 / 3) * 8.0 ** -row.n)
        with pytest.raises(DivergentTailError):
            halves = TargetSequence.geometric(0.5, 0.5, 12)
            check_al_condition(halves, halves, 1.0)

    def test_al_banach_mode(self) -> None:
        eighths = TargetSequence.geometric(1 / 8, 1 / 8, 12)
        report = check_al_condition(eighths, dev=BANACH)
        assert report.passed and report.banach_mode
        for row in report.rows:
            assert row.partial + row.tail == pytest.approx((4 / 3) * 8.0 ** -row.n)
        with pytest.raises(SequenceError):
            check_al_condition(eighths, dev=1.0)

    def test_al_truncated_never_passes(self) -> None:
        e = TargetSequence([8.0 ** -j for j in range(1, 6)])
        report = check_al_condition(e, dev=BANACH)
        assert report.truncated and not report.passed
        assert all(row.tail is None for row in report.rows)

    def test_al_with_deviation_report(self) -> None:
        chain = chain_coordinates(7, range(1, 7))
        report = deviation_inf(chain, self.PRODUCT)
        e = TargetSequence.geometric(1 / 64, 1 / 8, 6)
        assert check_al_condition(e, e, report).passed

    def test_witness_and_bounds(self) -> None:
        e = TargetSequence([1 / 8, 1 / 16, 1 / 64])
        witness = product_witness(e)
        report = verify_frechet_bounds(witness.x, witness.chain, e, fnorm=witness.fnorm)
        assert report.passed
        for row in report.rows:
            assert row.ratio == pytest.approx(1.0, abs=1e-9)
            assert row.certified
        zero = verify_frechet_bounds(np.zeros(4), witness.chain, e)
        assert not any(row.passed for row in zero.rows)
        with pytest.raises(HypothesisViolationError):
            product_witness(TargetSequence([1 / 4, 1 / 8, 1 / 16]))

    def test_corollaries(self) -> None:
        report = corollary_transforms(TargetSequence([1 / 4, 1 / 16]))
        assert report.shapiro_targets.values == pytest.approx((1 / 2, 1 / 4))
        assert report.tyuremskikh_targets.values == pytest.approx((3 / 2, 3 / 4))
        assert all(row.implication for row in report.rows)
        big = corollary_transforms(TargetSequence([4.0, 1.0]))
        assert [row.implication for row in big.rows] == [False, True]
        assert [row.boundary for row in big.rows] == [False, True]
        geometric = corollary_transforms(TargetSequence.geometric(0.25, 0.25, 3))
        assert geometric.shapiro_targets.tail.ratio == pytest.approx(0.5)


class TestProblem:
    def test_versions_and_blocks(self) -> None:
        with pytest.raises(UsageError):
            Problem({"version": 2})
        with pytest.raises(UsageError) as info:
            Problem({"version": 1, "chian": {}})
        assert info.value.where == "chian"
        assert Problem.empty().digest == Problem({"version": 1}).digest

    def test_sequences(self) -> None:
        problem = Problem(
            {
                "version": 1,
                "sequence": {"geometric": {"first": 1, "ratio": 0.5, "length": 4}},
                "e": {"values": [1, 0.5], "tail": "none"},
                "delta": {"values": [1, 0.5], "tail": {"geometric": 0.25}},
            }
        )
        assert problem.sequence().tail == TailModel.geometric(0.5)
        assert problem.sequence("e").tail == TailModel.none()
        assert problem.sequence("delta").value(3) == pytest.approx(0.125)
        with pytest.raises(UsageError):
            Problem({"version": 1, "sequence": {"values": [1, 2]}}).sequence()

    def test_chains_and_norms(self) -> None:
        problem = Problem(
            {
                "version": 1,
                "ambient_dim": 5,
                "chain": {"coordinate": {"ranks": [1, 3]}},
                "norm": {"family": "lp", "p": "inf"},
                "fnorm": {"family": "fnorm_of_norm", "base": {"family": "lp", "p": 1}},
            }
        )
        assert problem.chain().ranks == (1, 3)
        assert problem.norm() == LPINF
        assert problem.norm("fnorm") == NormSpec.fnorm_of_norm(LP1)
        levels = Problem({"version": 1, "chain": {"levels": [[[1, 0, 0]], [[1, 0, 0], [0, 1, 0]]]}})
        assert levels.chain().ranks == (1, 2)
        with pytest.raises(UsageError):
            Problem({"version": 1, "chain": {"coordinate": {"ranks": [1]}}}).chain()

    def test_matrix_csv(self, tmp_path: Path) -> None:
        good = tmp_path / "good.csv"
        good.write_text("rows,cols\n2,2\n1,2\n3,4\n", encoding="utf-8")
        assert np.array_equal(read_matrix_csv(good), [[1.0, 2.0], [3.0, 4.0]])
        bad = tmp_path / "bad.csv"
        bad.write_text("rows,cols\n2,2\n1,2\n3\n", encoding="utf-8")
        with pytest.raises(UsageError) as info:
            read_matrix_csv(bad)
        assert info.value.where.endswith(":4")

    def test_syntax_error_location(self, tmp_path: Path) -> None:
        path = tmp_path / "broken.json"
        path.write_text('{"version": 1,\n "sequence": }', encoding="utf-8")
        with pytest.raises(UsageError) as info:
            Problem.from_path(path)
        assert info.value.where.startswith(f"{path}:2:")


class TestCLI:
    @staticmethod
    def _write(tmp_path: Path, **blocks) -> str:
        path = tmp_path / "problem.json"
        path.write_text(json.dumps({"version": 1, **blocks}), encoding="utf-8")
        return str(path)

    def test_check(self, tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
        path = self._write(tmp_path, sequence={"geometric": {"first": 0.5, "ratio": 0.5, "length": 10}})
        assert cli.main(["check", "--file", path]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "n,d_n,tail_sum,margin,strict,weak"
        assert len(lines) == 11
        assert lines[1].endswith(",false,true")

    def test_usage_errors(self, tmp_path: Path) -> None:
        assert cli.main(["nosuch"]) == cli.USAGE_EXIT
        assert cli.main(["check"]) == cli.USAGE_EXIT
        assert cli.main(["check", "--file", str(tmp_path / "missing.json")]) == cli.USAGE_EXIT
        path = tmp_path / "v2.json"
        path.write_text('{"version": 2}', encoding="utf-8")
        assert cli.main(["check", "--file", str(path)]) == cli.USAGE_EXIT
        wrong_block = self._write(tmp_path, sequence={"values": [1]}, operator={"matrix": [[1]]})
        assert cli.main(["check", "--file", wrong_block]) == cli.USAGE_EXIT
        for matrix in ([[1.0, 2.0], [3.0]], [[1.0, "inf"]], [[]]):
            with pytest.raises(UsageError):
                Problem({"version": 1, "operator": {"matrix": matrix}}).operator()
            ragged = self._write(tmp_path, operator={"matrix": matrix})
            assert cli.main(["appnum", "--file", ragged]) == cli.USAGE_EXIT

    def test_konyagin(self, tmp_path: Path) -> None:
        path = self._write(
            tmp_path,
            chain={"coordinate": {"dim": 6, "ranks": [1, 2, 3]}},
            sequence={"values": [1, 0.5, 0.25]},
        )
        assert cli.main(["konyagin", "--file", path, "--c", "0.25"]) == 0
        assert cli.main(["konyagin", "--file", path]) == cli.USAGE_EXIT
        assert cli.main(["konyagin", "--file", path, "--c", "2"]) == cli.USAGE_EXIT

    def test_json_is_deterministic(self, tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
        path = self._write(
            tmp_path,
            chain={"random": {"dim": 5, "ranks": [1, 3]}},
            sequence={"values": [1, 0.3]},
            norm={"family": "lp", "p": 1},
        )
        outputs = []
        for _ in range(2):
            assert cli.main(["synth", "--file", path, "--json", "--seed", "3"]) == 0
            outputs.append(capsys.readouterr().out)
        assert outputs[0] == outputs[1]
        report = json.loads(outputs[0])
        assert report["verdict"] == "pass" and report["seed"] == 3
        assert "wall_time" not in report

    def test_seed_from_environment(
        self, tmp_path: Path, capsys: pytest.CaptureFixture, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv(cli.SEED_VARIABLE, "7")
        path = self._write(tmp_path, e={"values": [0.25, 0.0625]})
        assert cli.main(["corollary", "--file", path, "--format", "json"]) == 0
        assert json.loads(capsys.readouterr().out)["seed"] == 7

    def test_library_errors_fail(self, tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
        path = self._write(
            tmp_path,
            e={"geometric": {"first": 0.5, "ratio": 0.5, "length": 5}},
            run={"dev": "banach"},
        )
        assert cli.main(["alcheck", "--file", path]) == Verdict.FAIL.value
        assert "DivergentTailError" in capsys.readouterr().err

    def test_operator_from_csv(self, tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
        (tmp_path / "m.csv").write_text("rows,cols\n2,2\n3,0\n0,2\n", encoding="utf-8")
        path = self._write(tmp_path, operator={"csv": "m.csv"})
        out = tmp_path / "widths.csv"
        assert cli.main(["widths", "--file", path, "--out", str(out)]) == 0
        assert out.read_text(encoding="utf-8").splitlines()[1:] == [
            "0,3.0,ellipsoid",
            "1,2.0,ellipsoid",
            "2,0.0,ellipsoid",
        ]

    def test_demo(self, tmp_path: Path) -> None:
        out = tmp_path / "demo"
        assert cli.main(["demo", "--out", str(out)]) == 0
        assert (out / "condition-1.csv").exists()
        assert (out / "konyagin-3.csv").exists()
        assert (out / "frechet-2.csv").exists()
        again = tmp_path / "again"
        assert cli.main(["demo", "--out", str(again)]) == 0
        names = sorted(path.name for path in out.iterdir())
        assert names == sorted(path.name for path in again.iterdir())
        for name in names:
            assert (out / name).read_bytes() == (again / name).read_bytes()
        for target in (out, again):
            assert cli.main(["demo", "--out", str(target), "--json"]) == 0
        assert (out / "demo.json").read_bytes() == (again / "demo.json").read_bytes()

    def test_demo_reports_failures(
        self, tmp_path: Path, capsys: pytest.CaptureFixture, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setattr(cli, "DEMO_MARCUS_MATRIX", ((1.0, 2.0), (0.0, 1.0)))
        assert cli.main(["demo", "--out", str(tmp_path), "--json"]) == Verdict.FAIL.value
        assert "marcus" in capsys.readouterr().err
        bundle = json.loads((tmp_path / "demo.json").read_text(encoding="utf-8"))
        assert bundle["failed"] == ["marcus"]
