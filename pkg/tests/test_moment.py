"""Moment sequences, Riesz functional, moment and localizing matrices."""

from fractions import Fraction

import numpy as np
import pytest

from momentsos.moment import (
    FlatnessReport,
    IncompleteSequenceError,
    InsufficientDegreeError,
    TruncatedMomentSequence,
    flatness_check,
    hankel,
    localizing_matrix,
    moment_matrix,
    riesz_apply,
    sequence_from_list,
)
from momentsos.numerics import is_psd
from momentsos.polycore import Polynomial, coeff_vector, monomial_basis

from helpers import atom_moment_oracle, random_polynomial

X = Polynomial.variable(1, 0)

DIRAC2 = sequence_from_list([1, 2, 4, 8, 16])          # unit mass at x = 2
PM1 = sequence_from_list([1, 0, 1, 0, 1])              # (delta_{-1} + delta_1)/2


def test_oracle_agreement():
    # frozen lists above match the brute-force atomic oracle
    for k in range(5):
        assert DIRAC2[(k,)] == atom_moment_oracle([(2,)], [1], (k,))
        assert PM1[(k,)] == atom_moment_oracle(
            [(-1,), (1,)], [Fraction(1, 2), Fraction(1, 2)], (k,)
        )


class TestRiesz:
    def test_dirac_powers(self):
        assert riesz_apply(DIRAC2, X**2) == 4

    def test_mass(self):
        assert riesz_apply(DIRAC2, Polynomial.constant(1, 1)) == 1

    def test_symmetric_pair_odd_moment(self):
        assert riesz_apply(PM1, X**3) == 0

    def test_linear_in_polynomial(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            p = random_polynomial(rng, 1, 4)
            q = random_polynomial(rng, 1, 4)
            assert riesz_apply(PM1, p + q) == riesz_apply(PM1, p) + riesz_apply(PM1, q)

    def test_degree_overflow(self):
        with pytest.raises(InsufficientDegreeError):
            riesz_apply(DIRAC2, X**5)

    def test_exactness(self):
        assert isinstance(riesz_apply(DIRAC2, X), Fraction)


class TestMomentMatrix:
    def test_pm1_order1(self):
        M = moment_matrix(PM1, 1)
        assert np.array_equal(M.array, np.eye(2))

    def test_dirac_rank_one(self):
        M = moment_matrix(DIRAC2, 1)
        assert np.array_equal(M.array, np.array([[1.0, 2.0], [2.0, 4.0]]))
        assert np.linalg.matrix_rank(M.array) == 1

    def test_order_zero(self):
        y = sequence_from_list([1])
        assert np.array_equal(moment_matrix(y, 0).array, np.array([[1.0]]))

    def test_exact_entries_present(self):
        M = moment_matrix(PM1, 1)
        assert M.exact_entries[0][0] == 1

    def test_insufficient_degree(self):
        with pytest.raises(InsufficientDegreeError):
            moment_matrix(PM1, 3)

    def test_quadratic_form_identity(self):
        # L_y(p*q) = c(p)^T M_n(y) c(q), exactly
        rng = np.random.default_rng(3)
        basis = monomial_basis(1, 2)
        M = moment_matrix(PM1, 2)
        for _ in range(15):
            p = random_polynomial(rng, 1, 2)
            q = random_polynomial(rng, 1, 2)
            cp = coeff_vector(p, basis)
            cq = coeff_vector(q, basis)
            bilinear = sum(
                cp[i] * M.exact_entries[i][j] * cq[j]
                for i in range(len(basis))
                for j in range(len(basis))
            )
            assert bilinear == riesz_apply(PM1, p * q)


class TestLocalizingMatrix:
    def test_shift_by_x_detects_negative_support(self):
        L = localizing_matrix(PM1, X, 1)
        assert np.array_equal(L.array, np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert not is_psd(L.array)

    def test_dirac_shift_order_zero(self):
        L = localizing_matrix(DIRAC2, X, 0)
        assert np.array_equal(L.array, np.array([[2.0]]))
        assert is_psd(L.array)

    def test_unit_shift_equals_moment_matrix(self):
        one = Polynomial.constant(1, 1)
        assert np.array_equal(
            localizing_matrix(PM1, one, 2).array, moment_matrix(PM1, 2).array
        )

    def test_degree_overflow(self):
        with pytest.raises(InsufficientDegreeError):
            localizing_matrix(PM1, X**3, 1)

    def test_supported_measure_gives_psd(self):
        # measure on [0, infinity): localizing by x stays PSD
        y = sequence_from_list(
            [atom_moment_oracle([(1,), (3,)], [1, 2], (k,)) for k in range(5)]
        )
        assert is_psd(localizing_matrix(y, X, 1).array)


class TestHankel:
    def test_pm1(self):
        assert np.array_equal(hankel([1, 0, 1], 1).array, np.eye(2))

    def test_dirac(self):
        assert np.array_equal(hankel([1, 2, 4], 1).array, np.array([[1.0, 2.0], [2.0, 4.0]]))

    def test_scaled_point_mass_at_zero(self):
        H = hankel([2, 0, 0], 1).array
        assert np.array_equal(H, np.array([[2.0, 0.0], [0.0, 0.0]]))
        assert is_psd(H) and np.linalg.matrix_rank(H) == 1

    def test_agrees_with_moment_matrix(self):
        assert np.array_equal(hankel([1, 0, 1, 0, 1], 2).array, moment_matrix(PM1, 2).array)

    def test_too_short(self):
        with pytest.raises(InsufficientDegreeError):
            hankel([1, 0], 1)


class TestFlatness:
    def test_dirac_flat(self):
        report = flatness_check(DIRAC2)
        assert report.flat and report.rank_n == report.rank_n1 == 1

    def test_pm1_flat(self):
        report = flatness_check(PM1)
        assert report.flat and report.rank_n == report.rank_n1 == 2

    def test_rank_jump_not_flat(self):
        # Hankel(1,0,1,0,2): order-1 matrix is the identity (rank 2) but the
        # order-2 matrix [[1,0,1],[0,1,0],[1,0,2]] has determinant 1, rank 3
        y = sequence_from_list([1, 0, 1, 0, 2])
        report = flatness_check(y)
        assert report.rank_n == 2 and report.rank_n1 == 3
        assert not report.flat

    def test_psd_required(self):
        y = sequence_from_list([1, 0, -1, 0, 1])
        report = flatness_check(y)
        assert not report.flat

    def test_degree_parity_enforced(self):
        with pytest.raises(InsufficientDegreeError):
            flatness_check(sequence_from_list([1, 0, 1, 0], degree=3))

    def test_atomic_measures_have_bounded_rank(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            k = int(rng.integers(1, 4))
            atoms = []
            while len(atoms) < k:
                cand = (Fraction(int(rng.integers(-8, 9)), 8),)
                if cand not in atoms:
                    atoms.append(cand)
            weights = [Fraction(int(rng.integers(1, 20)), 10) for _ in range(k)]
            vals = [atom_moment_oracle(atoms, weights, (j,)) for j in range(2 * k + 3)]
            y = sequence_from_list(vals)
            for n in range((len(vals) - 1) // 2 + 1):
                M = moment_matrix(y, n).array
                assert is_psd(M, 1e-8)
                assert np.linalg.matrix_rank(M, tol=1e-8) <= k


class TestSequence:
    def test_completeness_enforced(self):
        with pytest.raises(IncompleteSequenceError):
            TruncatedMomentSequence(1, 2, {(0,): 1, (2,): 1})

    def test_zero_mass_flagged(self):
        y = sequence_from_list([0, 0, 0])
        assert y.zero_mass

    def test_json_roundtrip_exact(self):
        text = PM1.to_json()
        assert TruncatedMomentSequence.from_json(text) == PM1

    def test_json_roundtrip_float(self):
        y = sequence_from_list([1.0, 0.5, 0.3])
        back = TruncatedMomentSequence.from_json(y.to_json())
        assert back.values == y.values
        assert not back.exact
