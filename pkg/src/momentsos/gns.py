"""Finite-dimensional realization of a flat moment functional.

A flat sequence (rank M_{n+1} = rank M_n = r, both PSD) induces an inner
product on polynomials modulo the kernel of the moment matrix.  The
quotient is r-dimensional, multiplication by each coordinate acts on it as
an r x r matrix, and those matrices commute and are self-adjoint for the
quotient Gram matrix.  Joint diagonalization of a random combination reads
off r atoms whose coordinates are Rayleigh quotients; a Vandermonde least
squares then recovers the weights.  Together: the sequence is the moment
vector of the recovered r-atom measure, which the caller can re-check
through the Riesz functional.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .cones import SemialgebraicDescription, contains_point
from .moment import TruncatedMomentSequence, flatness_check, moment_matrix
from .polycore import evaluate, monomial_basis


class NotFlatError(ValueError):
    """The sequence fails the rank condition, so no quotient is available."""


class RankDeficiencyInstabilityError(ValueError):
    """Column expansion residuals are too large to trust the quotient."""


class DegenerateCombinationError(ValueError):
    """Every tried random combination had clustered eigenvalues."""


class IllConditionedVandermondeError(ValueError):
    """Weight recovery is numerically meaningless for these atoms."""


@dataclass(frozen=True)
class QuotientBasis:
    """Monomials whose moment-matrix columns span the column space."""

    exponents: tuple          # selected exponents, graded-lex order
    indices: tuple            # their positions in the order-n basis
    column_coefficients: dict  # exponent (degree <= n+1) -> coefficient vector


@dataclass(frozen=True)
class MultiplicationOperators:
    """Coordinate multiplication matrices on the quotient."""

    matrices: tuple           # d arrays of shape (r, r); column b holds x_j * b
    gram: np.ndarray          # inner products of the quotient basis
    dimension: int
    basis: QuotientBasis

    def symmetrized(self) -> list[np.ndarray]:
        """G^(1/2) M_j G^(-1/2), symmetric because M_j is G-self-adjoint."""
        w, V = np.linalg.eigh(self.gram)
        if w[0] <= 0:
            raise RankDeficiencyInstabilityError(
                "quotient Gram matrix is not positive definite"
            )
        root = (V * np.sqrt(w)) @ V.T
        inv_root = (V / np.sqrt(w)) @ V.T
        out = []
        for M in self.matrices:
            S = root @ M @ inv_root
            out.append((S + S.T) / 2.0)
        return out

    def operator_norms(self) -> list[float]:
        return [float(np.max(np.abs(np.linalg.eigvalsh(S)))) for S in self.symmetrized()]


def build_operators(y: TruncatedMomentSequence, tol: float = 1e-7):
    """Quotient basis and multiplication matrices for a flat sequence.

    Requires degree 2n + 2 data; raises NotFlatError when the rank
    condition fails and RankDeficiencyInstabilityError when the column
    expansions do not close within tolerance.
    """
    report = flatness_check(y, tol)
    if not report.flat:
        raise NotFlatError(
            f"rank {report.rank_n} vs {report.rank_n1}, psd {report.psd_n}/{report.psd_n1}"
        )
    n = report.n
    d = y.dimension
    M1 = moment_matrix(y, n + 1).array
    basis_n1 = monomial_basis(d, n + 1)
    basis_n = monomial_basis(d, n)
    scale = max(1.0, float(np.linalg.norm(M1)))

    # greedy graded-lex-first independent columns among degree <= n columns
    selected: list[int] = []
    Q = np.zeros((M1.shape[0], 0))
    for idx in range(len(basis_n)):
        col = M1[:, idx]
        resid = col - Q @ (Q.T @ col)
        if np.linalg.norm(resid) > tol * scale:
            selected.append(idx)
            Q = np.hstack([Q, (resid / np.linalg.norm(resid))[:, None]])
    r = len(selected)
    if r != report.rank_n:
        raise RankDeficiencyInstabilityError(
            f"greedy column count {r} disagrees with numerical rank {report.rank_n}"
        )
    if r == 0:
        raise NotFlatError("zero-mass sequence has no quotient")

    C = M1[:, selected]
    # coefficients of every degree <= n+1 column over the selected ones
    coeffs, residuals, *_ = np.linalg.lstsq(C, M1, rcond=None)
    closure = float(np.max(np.abs(C @ coeffs - M1)))
    if closure > 1000 * tol * scale:
        raise RankDeficiencyInstabilityError(
            f"column expansion residual {closure:.3e} exceeds tolerance"
        )
    column_coefficients = {
        exp: coeffs[:, j].copy() for j, exp in enumerate(basis_n1.exponents)
    }

    exponents = tuple(basis_n.exponents[i] for i in selected)
    quotient = QuotientBasis(
        exponents=exponents,
        indices=tuple(selected),
        column_coefficients=column_coefficients,
    )

    matrices = []
    for j in range(d):
        M_j = np.empty((r, r))
        for col_idx, b_exp in enumerate(exponents):
            shifted = tuple(e + (1 if k == j else 0) for k, e in enumerate(b_exp))
            M_j[:, col_idx] = column_coefficients[shifted]
        matrices.append(M_j)

    gram = M1[np.ix_(selected, selected)]
    return quotient, MultiplicationOperators(
        matrices=tuple(matrices), gram=gram, dimension=d, basis=quotient
    )


def extract_atoms(ops: MultiplicationOperators, seed: int = 0, tol: float = 1e-8,
                  max_retries: int = 12) -> list[tuple]:
    """Joint eigenvalues of the multiplication matrices, as points.

    Diagonalizes a random combination of the symmetrized operators and
    reads each coordinate as a Rayleigh quotient.  Eigenvalue clustering
    below the gap threshold triggers a reseed instead of a silent
    misassignment.
    """
    S = ops.symmetrized()
    r = S[0].shape[0] if S else 0
    d = ops.dimension
    commute_scale = max(1.0, max(float(np.linalg.norm(M)) for M in S))
    for a in range(d):
        for b in range(a + 1, d):
            if np.linalg.norm(S[a] @ S[b] - S[b] @ S[a]) > 1e-6 * commute_scale:
                raise DegenerateCombinationError(
                    "multiplication operators do not commute within tolerance"
                )
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        c = rng.standard_normal(d)
        c /= np.linalg.norm(c)
        T = sum(cj * Sj for cj, Sj in zip(c, S))
        w, U = np.linalg.eigh(T)
        spread = max(float(w[-1] - w[0]), 1.0)
        if r > 1 and np.min(np.diff(w)) < 1e-8 * spread:
            continue
        atoms = []
        for i in range(r):
            u = U[:, i]
            atoms.append(tuple(float(u @ Sj @ u) for Sj in S))
        return atoms
    raise DegenerateCombinationError(
        f"eigenvalues stayed clustered over {max_retries} random combinations"
    )


def solve_weights(y: TruncatedMomentSequence, atoms: Sequence, tol: float = 1e-6,
                  order: Optional[int] = None):
    """Least-squares weights matching the truncated moments of the atoms.

    Solves sum_i w_i x_i^alpha = y_alpha over all |alpha| <= n in the least
    squares sense, requires w_i >= -tol, clips, and renormalizes to the
    mass.  Returns (weights, residual).
    """
    atoms = [tuple(a) for a in atoms]
    if len(set(atoms)) != len(atoms):
        raise ValueError("atoms must be distinct")
    if not atoms:
        raise ValueError("no atoms to weight")
    d = y.dimension
    if order is None:
        order = max(0, y.degree // 2 - 1) if y.degree >= 2 else 0
    basis = monomial_basis(d, order)
    V = np.empty((len(basis), len(atoms)))
    rhs = np.empty(len(basis))
    for row, alpha in enumerate(basis.exponents):
        rhs[row] = float(y.values[alpha])
        for col, point in enumerate(atoms):
            v = 1.0
            for x, a in zip(point, alpha):
                v *= float(x) ** a
            V[row, col] = v
    sv = np.linalg.svd(V, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise IllConditionedVandermondeError(
            f"Vandermonde condition {sv[0] / max(sv[-1], 1e-300):.2e} is unusable"
        )
    weights, *_ = np.linalg.lstsq(V, rhs, rcond=None)
    residual = float(np.max(np.abs(V @ weights - rhs)))
    mass = float(y.mass)
    if np.any(weights < -tol * max(1.0, mass)):
        raise IllConditionedVandermondeError(
            f"recovered weight {weights.min():.3e} is negative beyond tolerance"
        )
    weights = np.clip(weights, 0.0, None)
    total = float(weights.sum())
    if total > 0 and mass > 0:
        weights = weights * (mass / total)
    return weights, residual


@dataclass(frozen=True)
class AtomSupportReport:
    point: tuple
    inside: bool
    violations: tuple  # (generator index, value) pairs


def verify_support(atoms: Sequence, K: SemialgebraicDescription,
                   tol: float = 1e-8) -> list[AtomSupportReport]:
    """Check each atom against the description; list violating generators."""
    reports = []
    for point in atoms:
        violations = []
        for i, g in enumerate(K.generators):
            value = float(evaluate(g, tuple(float(x) for x in point)))
            if value < -tol:
                violations.append((i, value))
        reports.append(
            AtomSupportReport(
                point=tuple(float(x) for x in point),
                inside=contains_point(K, tuple(float(x) for x in point), tol),
                violations=tuple(violations),
            )
        )
    return reports
