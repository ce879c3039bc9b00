"""Certificate searches: module, preordering, Archimedean, emptiness."""

import dataclasses
from fractions import Fraction

import numpy as np
import pytest

from momentsos.certify import (
    ArchimedeanWitness,
    Certificate,
    DegreeTooLowError,
    MalformedSelectorError,
    NotFoundAtDegree,
    archimedean_witness,
    putinar_search,
    refute_nonempty,
    schmudgen_search,
    verify_certificate,
)
from momentsos.cones import PositivityOracle, SemialgebraicDescription
from momentsos.numerics import Unknown, check_infeasibility_witness
from momentsos.polycore import Polynomial, evaluate
from momentsos.sos import SosDecomposition

X = Polynomial.variable(1, 0)
X2, Y2 = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
BALL = SemialgebraicDescription(2, [1 - X2**2 - Y2**2])
HALFLINE = SemialgebraicDescription(1, [X])
UNIT = SemialgebraicDescription(1, [X, 1 - X])


class TestPutinar:
    def test_ball_certificate_exact(self):
        g = 3 - X2**2
        out = putinar_search(g, BALL, degree=2)
        assert isinstance(out, Certificate)
        report = verify_certificate(out)
        assert report.exact

    def test_ball_certificate_evaluates_nonnegative(self):
        g = 3 - X2**2
        out = putinar_search(g, BALL, degree=2)
        oracle = PositivityOracle.build(BALL, count=200)
        assert oracle.min_value(g) >= -1e-9

    def test_constant_one_degree_zero(self):
        out = putinar_search(Polynomial.constant(2, 1), BALL, degree=0)
        assert isinstance(out, Certificate)
        assert verify_certificate(out).exact

    def test_negative_constant_not_found(self):
        out = putinar_search(Polynomial.constant(2, -1), BALL, degree=2)
        assert isinstance(out, NotFoundAtDegree)
        assert check_infeasibility_witness(
            _rebuild_problem(Polynomial.constant(2, -1), BALL, 2, "module"), out.witness
        )["valid"]

    def test_degree_too_low(self):
        with pytest.raises(DegreeTooLowError):
            putinar_search(3 - X2**4, BALL, degree=2)

    def test_monotone_in_degree(self):
        g = 3 - X2**2
        for degree in (2, 4):
            out = putinar_search(g, BALL, degree=degree)
            assert isinstance(out, Certificate)
            assert verify_certificate(out).max_coeff_error <= 1e-6


def _rebuild_problem(g, K, degree, kind):
    from momentsos.certify import _build_system

    return _build_system(kind, g, K, degree).sdp_problem()


class TestSchmudgen:
    def test_unit_interval_product_multiplier(self):
        g = X - X**2
        out = schmudgen_search(g, UNIT, degree=2)
        assert isinstance(out, Certificate)
        assert verify_certificate(out).exact

    def test_degree_zero_unit_multipliers(self):
        out = schmudgen_search(1 + X, HALFLINE, degree=2)
        assert isinstance(out, Certificate)
        assert verify_certificate(out).max_coeff_error <= 1e-6

    def test_block_count_for_three_generators(self):
        from momentsos.certify import _selector_products

        K = SemialgebraicDescription(2, [X2, Y2, 1 - X2 - Y2])
        assert len(_selector_products("preordering", K)) == 8

    def test_module_certificate_reverifies_as_preordering(self):
        out = putinar_search(3 - X2**2, BALL, degree=2)
        assert isinstance(out, Certificate)
        as_preorder = dataclasses.replace(out, kind="preordering")
        assert verify_certificate(as_preorder).exact == verify_certificate(out).exact


class TestArchimedean:
    def test_ball_lambda_one(self):
        out = archimedean_witness(BALL, degree=2)
        assert isinstance(out, ArchimedeanWitness)
        lam = out.bounds[0]
        assert float(lam) <= 1 + 1e-6
        assert verify_certificate(out.certificates[0]).max_coeff_error <= 1e-6

    def test_box_per_coordinate(self):
        box = SemialgebraicDescription(2, [1 - X2**2, 1 - Y2**2])
        out = archimedean_witness(box, degree=2, per_coordinate=True)
        assert isinstance(out, ArchimedeanWitness)
        assert out.mode == "coordinate"
        assert len(out.bounds) == 2
        for lam, cert in zip(out.bounds, out.certificates):
            assert float(lam) <= 1 + 1e-6
            assert verify_certificate(cert).max_coeff_error <= 1e-6

    @pytest.mark.parametrize("degree", [2, 4, 6, 8])
    def test_halfline_never_archimedean(self, degree):
        out = archimedean_witness(HALFLINE, degree=degree)
        assert isinstance(out, NotFoundAtDegree)

    def test_sampled_norm_bound(self):
        out = archimedean_witness(BALL, degree=2)
        lam = float(out.bounds[0])
        oracle = PositivityOracle.build(BALL, count=200)
        for point in oracle.points:
            assert sum(x * x for x in point) <= lam + 1e-6


class TestRefuteNonempty:
    def test_shifted_negative_parabola(self):
        K = SemialgebraicDescription(1, [-1 - X**2])
        out = refute_nonempty(K, degree=2)
        assert isinstance(out, Certificate)
        report = verify_certificate(out)
        assert report.exact
        assert out.target == Polynomial.constant(1, -1)

    def test_incompatible_linear_constraints(self):
        K = SemialgebraicDescription(1, [X, -X - 1])
        out = refute_nonempty(K, degree=2)
        assert isinstance(out, Certificate)
        assert verify_certificate(out).exact

    def test_nonempty_interval_not_refuted(self):
        K = SemialgebraicDescription(1, [1 - X**2])
        for degree in (2, 4, 6):
            out = refute_nonempty(K, degree=degree)
            assert isinstance(out, NotFoundAtDegree)


class TestVerifyCertificate:
    def test_perturbed_multiplier_error_reported(self):
        out = putinar_search(3 - X2**2, BALL, degree=2)
        sel = next(iter(out.multipliers))
        dec = out.multipliers[sel]
        bumped = SosDecomposition(
            weights=dec.weights,
            squares=tuple(
                h + Polynomial.constant(2, Fraction(1, 10**7)) for h in dec.squares
            ),
        )
        cert = dataclasses.replace(
            out, multipliers={**out.multipliers, sel: bumped}
        )
        report = verify_certificate(cert)
        assert not report.exact
        assert 1e-8 <= report.max_coeff_error <= 1e-5

    def test_empty_certificate_for_zero_target(self):
        cert = Certificate(
            kind="module",
            target=Polynomial.zero(2),
            description=BALL,
            degree=2,
            multipliers={},
        )
        assert verify_certificate(cert).exact

    def test_malformed_selector_for_module(self):
        K = SemialgebraicDescription(1, [X, 1 - X])
        dec = SosDecomposition(weights=(Fraction(1),), squares=(Polynomial.constant(1, 1),))
        cert = Certificate(
            kind="module", target=X - X**2, description=K, degree=2,
            multipliers={(1, 1): dec},
        )
        with pytest.raises(MalformedSelectorError):
            verify_certificate(cert)

    def test_multiplier_reports_present(self):
        out = putinar_search(3 - X2**2, BALL, degree=2)
        report = verify_certificate(out)
        for rep in report.multiplier_reports.values():
            assert rep.weights_positive and rep.degree_ok

    def test_json_roundtrip(self):
        out = putinar_search(3 - X2**2, BALL, degree=2)
        back = Certificate.from_json(out.to_json())
        assert verify_certificate(back).exact == verify_certificate(out).exact
        assert back.multipliers == out.multipliers
