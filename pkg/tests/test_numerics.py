"""Eigendecomposition, PSD tests, numerical rank, and the feasibility solver."""

import numpy as np
import pytest

from momentsos.numerics import (
    Feasible,
    InfeasibleWitness,
    NonFiniteMatrixError,
    SdpProblem,
    Unknown,
    check_infeasibility_witness,
    eigh,
    is_psd,
    numerical_rank,
    solve_feasibility,
    sym,
)


class TestEigh:
    def test_identity(self):
        w, _ = eigh(np.eye(2))
        assert np.allclose(w, [1.0, 1.0])

    def test_swap_matrix(self):
        # characteristic polynomial lambda^2 - 1 has roots -1, 1
        w, _ = eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(w, [-1.0, 1.0])

    def test_diagonal_ascending(self):
        w, _ = eigh(np.diag([2.0, 0.0]))
        assert np.allclose(w, [0.0, 2.0])

    def test_reconstruction_and_orthonormality(self):
        rng = np.random.default_rng(0)
        for n in (2, 5, 12):
            M = sym(rng.standard_normal((n, n)))
            w, V = eigh(M)
            norm = 1.0 + np.linalg.norm(M)
            assert np.linalg.norm((V * w) @ V.T - M) <= 1e-10 * norm
            assert np.linalg.norm(V.T @ V - np.eye(n)) <= 1e-10

    def test_nonfinite_rejected(self):
        with pytest.raises(NonFiniteMatrixError):
            eigh(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestIsPsd:
    def test_identity(self):
        assert is_psd(np.eye(3), 1e-8)

    def test_swap_matrix_indefinite(self):
        assert not is_psd(np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_rank_one_boundary(self):
        # eigenvalues 0 and 2
        assert is_psd(np.ones((2, 2)))


class TestNumericalRank:
    def test_zero_matrix(self):
        assert numerical_rank(np.zeros((3, 3))) == 0

    def test_proportional_rows(self):
        assert numerical_rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1

    def test_identity(self):
        assert numerical_rank(np.eye(4)) == 4


def _unit_problem(value: float) -> SdpProblem:
    return SdpProblem(n=1, constraints=[(np.array([[1.0]]), value)])


class TestSolveFeasibility:
    def test_scalar_feasible(self):
        out = solve_feasibility(_unit_problem(1.0))
        assert isinstance(out, Feasible)
        assert out.gram[0, 0] == pytest.approx(1.0, abs=1e-7)
        assert out.residual <= 1e-8

    def test_scalar_infeasible(self):
        out = solve_feasibility(_unit_problem(-1.0))
        assert isinstance(out, InfeasibleWitness)
        assert out.margin > 0
        report = check_infeasibility_witness(_unit_problem(-1.0), out)
        assert report["valid"]

    def test_feasible_outcome_rechecked(self):
        # random feasible problem: marginals of a planted PSD matrix
        rng = np.random.default_rng(1)
        n = 6
        R = rng.standard_normal((n, n))
        G_star = R @ R.T
        constraints = []
        for _ in range(8):
            A = sym(rng.standard_normal((n, n)))
            constraints.append((A, float(np.sum(A * G_star))))
        prob = SdpProblem(n=n, constraints=constraints)
        out = solve_feasibility(prob, seed=3)
        assert isinstance(out, Feasible)
        assert is_psd(out.gram, 1e-8)
        res = max(abs(float(np.sum(A * out.gram)) - b) for A, b in prob.constraints)
        assert res <= 1e-8 * max(1.0, max(abs(b) for _, b in prob.constraints))

    def test_boundary_feasible_rank_deficient(self):
        # unique solution of rank one: G must equal the outer product cc^T
        c = np.array([1.0, -2.0, 0.5])
        G_star = np.outer(c, c)
        basis = []
        for i in range(3):
            for j in range(i, 3):
                E = np.zeros((3, 3))
                E[i, j] = E[j, i] = 1.0
                basis.append(E)
        prob = SdpProblem(
            n=3, constraints=[(E, float(np.sum(E * G_star))) for E in basis]
        )
        out = solve_feasibility(prob)
        assert isinstance(out, Feasible)
        assert np.allclose(out.gram, G_star, atol=1e-6)

    def test_facial_reduction_unlocks_dual(self):
        # G_22 = 0 forces the last row to vanish; the remaining system on the
        # leading 1x1 block demands G_00 = -1, impossible for a PSD matrix.
        # Without the exact face step there is no separating functional.
        A1 = np.zeros((2, 2)); A1[1, 1] = 1.0
        A2 = np.zeros((2, 2)); A2[0, 1] = A2[1, 0] = 1.0; A2 = sym(A2)
        A3 = np.zeros((2, 2)); A3[0, 0] = 1.0
        prob = SdpProblem(n=2, constraints=[(A1, 0.0), (A2, 0.0), (A3, -1.0)])
        out = solve_feasibility(prob)
        assert isinstance(out, InfeasibleWitness)
        assert out.facial_steps
        assert check_infeasibility_witness(prob, out)["valid"]

    def test_deterministic_given_seed(self):
        prob = _unit_problem(2.0)
        a = solve_feasibility(prob, seed=5)
        b = solve_feasibility(prob, seed=5)
        assert np.array_equal(a.gram, b.gram)

    def test_weakly_infeasible_caught_by_face_step(self):
        # G_00 = 0 and G_01 = 1 with G PSD: the face step zeroes row 0, after
        # which the second equation loses all support while b = 1.
        A1 = np.zeros((2, 2)); A1[0, 0] = 1.0
        A2 = np.zeros((2, 2)); A2[0, 1] = A2[1, 0] = 0.5
        prob = SdpProblem(n=2, constraints=[(A1, 0.0), (A2, 1.0)])
        out = solve_feasibility(prob, seed=0)
        assert isinstance(out, InfeasibleWitness)
        assert check_infeasibility_witness(prob, out)["valid"]

    def test_unknown_for_rotated_weak_infeasibility(self):
        # the same geometry rotated so no equation is diagonal-only: the
        # distance to the cone is zero but never attained, and no separating
        # functional exists, so the honest answer is Unknown
        theta = np.pi / 6
        Q = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        A1 = Q @ np.array([[1.0, 0.0], [0.0, 0.0]]) @ Q.T
        A2 = Q @ np.array([[0.0, 0.5], [0.5, 0.0]]) @ Q.T
        prob = SdpProblem(n=2, constraints=[(sym(A1), 0.0), (sym(A2), 1.0)])
        out = solve_feasibility(prob, max_iter=4000, seed=0)
        assert isinstance(out, Unknown)

    def test_witness_margin_positive_and_checked(self):
        prob = _unit_problem(-3.0)
        out = solve_feasibility(prob)
        assert isinstance(out, InfeasibleWitness)
        report = check_infeasibility_witness(prob, out)
        assert report["valid"] and report["margin"] > 0
