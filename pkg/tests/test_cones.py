"""Descriptions, membership, and generator expansions."""

from fractions import Fraction

import numpy as np
import pytest

from momentsos.cones import (
    GeneratorProduct,
    PositivityOracle,
    SemialgebraicDescription,
    TooManyGeneratorsError,
    contains_point,
    module_generators,
    preorder_products,
    variety_description,
)
from momentsos.polycore import Polynomial, evaluate

X = Polynomial.variable(1, 0)
X2, Y2 = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
BALL = SemialgebraicDescription(2, [1 - X2**2 - Y2**2])
HALF_UNIT = SemialgebraicDescription(1, [X, 1 - X])


class TestContainsPoint:
    def test_ball_center(self):
        assert contains_point(BALL, (0, 0))

    def test_ball_outside(self):
        # f1(2, 0) = -3
        assert not contains_point(BALL, (2, 0))

    def test_no_generators_means_everything(self):
        K = SemialgebraicDescription(3, [])
        assert contains_point(K, (5, -7, 100))

    def test_boundary_with_tolerance(self):
        assert contains_point(BALL, (1, 0), tol=0)


class TestPreorderProducts:
    def test_empty_description(self):
        K = SemialgebraicDescription(2, [])
        prods = preorder_products(K)
        assert len(prods) == 1
        assert prods[0].polynomial == Polynomial.constant(2, 1)

    def test_single_generator(self):
        K = SemialgebraicDescription(1, [X])
        polys = [gp.polynomial for gp in preorder_products(K)]
        assert polys == [Polynomial.constant(1, 1), X]

    def test_unit_interval_products(self):
        polys = [gp.polynomial for gp in preorder_products(HALF_UNIT)]
        assert polys == [Polynomial.constant(1, 1), X, 1 - X, X - X**2]

    def test_selector_order(self):
        sels = [gp.selector for gp in preorder_products(HALF_UNIT)]
        assert sels == [(0, 0), (1, 0), (0, 1), (1, 1)]

    def test_guard(self):
        gens = [Polynomial.variable(21, j) for j in range(21)]
        with pytest.raises(TooManyGeneratorsError):
            preorder_products(SemialgebraicDescription(21, gens))

    def test_products_nonnegative_on_members(self):
        rng = np.random.default_rng(2)
        prods = preorder_products(HALF_UNIT)
        for _ in range(50):
            t = Fraction(int(rng.integers(0, 17)), 16)
            assert contains_point(HALF_UNIT, (t,), tol=0)
            for gp in prods:
                assert evaluate(gp.polynomial, (t,)) >= 0


class TestModuleGenerators:
    def test_ball(self):
        gens = module_generators(BALL)
        assert gens == [Polynomial.constant(2, 1), 1 - X2**2 - Y2**2]

    def test_empty(self):
        assert module_generators(SemialgebraicDescription(2, [])) == [
            Polynomial.constant(2, 1)
        ]

    def test_simplex_listing(self):
        K = SemialgebraicDescription(2, [X2, Y2, 1 - X2 - Y2])
        assert len(module_generators(K)) == 4

    def test_module_subset_of_preorder(self):
        prods = [gp.polynomial for gp in preorder_products(HALF_UNIT)]
        for g in module_generators(HALF_UNIT):
            assert g in prods


class TestVarietyDescription:
    def test_circle(self):
        g = X2**2 + Y2**2 - 1
        K = variety_description([g])
        assert K.generators == (g, -g)

    def test_empty_ideal_rejected(self):
        with pytest.raises(ValueError):
            variety_description([])

    def test_origin_in_plane(self):
        K = variety_description([X2, Y2])
        assert len(K.generators) == 4
        assert contains_point(K, (0, 0), tol=0)
        assert not contains_point(K, (1, 0))


class TestPositivityOracle:
    def test_samples_lie_inside(self):
        oracle = PositivityOracle.build(BALL, radius=1.0, count=64)
        assert oracle.points
        for p in oracle.points:
            assert contains_point(BALL, p)

    def test_extra_points_validated(self):
        with pytest.raises(ValueError):
            PositivityOracle(BALL, [(2.0, 2.0)])

    def test_deterministic(self):
        a = PositivityOracle.build(BALL, count=32)
        b = PositivityOracle.build(BALL, count=32)
        assert a.points == b.points

    def test_nonnegative_predicate(self):
        oracle = PositivityOracle.build(BALL, count=64)
        assert oracle.nonnegative(Polynomial.constant(2, 1) - X2**2 - Y2**2)
        assert not oracle.nonnegative(X2 - Fraction(1, 2))


class TestJson:
    def test_roundtrip(self):
        text = BALL.to_json()
        assert SemialgebraicDescription.from_json(text) == BALL
