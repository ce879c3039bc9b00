"""Sums of squares via Gram matrices, with refutation witnesses.

Writing p = v_m(x)^T G v_m(x) for a symmetric G turns "p is a sum of
squares" into semidefinite feasibility: coefficient matching fixes the
linear marginals of G and any PSD solution factors into squares.  The
number of squares never exceeds the basis size binom(d+m, m).

Both answers are re-verified before being returned.  A decomposition is
expanded symbolically over the rationals; when the numeric Gram matrix
rationalizes onto the constraint set and passes an exact LDL^T, the
certificate is exact, otherwise the coefficient error is reported.  A
refutation is a moment vector y with L_y(1) = 1, L_y(p) < 0 and
M_m(y) >= eps * I: since any sum of squares q satisfies
L_y(q) = c(q)^T M_m(y) c(q) >= 0, such a y is incompatible with p being
one.  Witnesses are built by mixing the solver's dual vector with the
moments of a product Gaussian, whose moment matrix is positive definite
and whose entries are integers (double factorials).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import _exact
from .moment import TruncatedMomentSequence, moment_matrix, riesz_apply
from .numerics import (
    Feasible,
    InfeasibleWitness,
    SdpProblem,
    Unknown,
    eigh,
    solve_feasibility,
    sym,
)
from .polycore import (
    MonomialBasis,
    Polynomial,
    evaluate,
    monomial_basis,
)


class OddDegreeError(ValueError):
    """A nonzero polynomial of odd degree is never a sum of squares."""


class NotNonnegativeError(ValueError):
    """Carries a point at which the polynomial is negative."""

    def __init__(self, witness, value):
        self.witness = tuple(witness)
        self.value = value
        super().__init__(f"polynomial is negative at {self.witness}: {value}")


# ---------------------------------------------------------------------------
# block coefficient systems (shared with the certificate searches)
# ---------------------------------------------------------------------------


class BlockSystem:
    """Equations matching coefficients of sum_e sigma_e * f_e to a target.

    Each block is (label, f_e, basis) and contributes the Gram matrix of
    one multiplier sigma_e.  The system is kept twice: exact rational rows
    for re-projection, and float matrices for the numeric solver.
    """

    def __init__(self, dimension: int, degree: int, blocks, target: Polynomial):
        if target.dimension != dimension:
            raise ValueError("target dimension mismatch")
        self.dimension = dimension
        self.degree = degree
        self.blocks = list(blocks)  # (label, Polynomial, MonomialBasis)
        self.target = target
        self.gammas = monomial_basis(dimension, degree).exponents

        sizes = [len(basis) for _, _, basis in self.blocks]
        self.offsets = np.concatenate(([0], np.cumsum([q * q for q in sizes]))).astype(int)
        self.matrix_offsets = np.concatenate(([0], np.cumsum(sizes))).astype(int)
        self.total_vec = int(self.offsets[-1])
        self.order = int(self.matrix_offsets[-1])

        gamma_index = {g: i for i, g in enumerate(self.gammas)}
        rows: list[dict[int, Fraction]] = [dict() for _ in self.gammas]
        for bi, (_, f, basis) in enumerate(self.blocks):
            exps = basis.exponents
            q = len(exps)
            base = self.offsets[bi]
            for a, alpha in enumerate(exps):
                for b, beta in enumerate(exps):
                    pair = tuple(x + y for x, y in zip(alpha, beta))
                    flat = base + a * q + b
                    for delta, c in f.terms.items():
                        gamma = tuple(x + y for x, y in zip(pair, delta))
                        gi = gamma_index.get(gamma)
                        if gi is None:
                            raise ValueError(
                                f"block product overflows degree {degree} at {gamma}"
                            )
                        row = rows[gi]
                        row[flat] = row.get(flat, Fraction(0)) + c
        self.rows_exact = rows
        self.b_exact = [target.coeff(g) for g in self.gammas]

    def sdp_problem(self) -> SdpProblem:
        n = self.order
        constraints = []
        for row, b in zip(self.rows_exact, self.b_exact):
            A = np.zeros((n, n))
            for flat, c in row.items():
                bi = int(np.searchsorted(self.offsets, flat, side="right") - 1)
                local = flat - self.offsets[bi]
                q = len(self.blocks[bi][2])
                a, bcol = divmod(int(local), q)
                off = self.matrix_offsets[bi]
                A[off + a, off + bcol] += float(c)
            A = (A + A.T) / 2.0
            constraints.append((A, float(b)))
        return SdpProblem(n=n, constraints=constraints)

    def split_gram(self, G: np.ndarray) -> list[np.ndarray]:
        out = []
        for bi in range(len(self.blocks)):
            off = self.matrix_offsets[bi]
            q = len(self.blocks[bi][2])
            out.append(G[off : off + q, off : off + q])
        return out

    def flatten(self, grams: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([g.ravel() for g in grams]) if grams else np.zeros(0)

    def unflatten_exact(self, vec: Sequence[Fraction]) -> list[list[list[Fraction]]]:
        out = []
        for bi in range(len(self.blocks)):
            q = len(self.blocks[bi][2])
            base = self.offsets[bi]
            out.append(
                [[vec[base + a * q + b] for b in range(q)] for a in range(q)]
            )
        return out


def rationalize_block_solution(system: BlockSystem, grams: Sequence[np.ndarray]):
    """Round, re-project exactly, and factor each block; None on failure.

    Returns a list of (weights, squares) per block with exact Fractions.
    """
    flat = system.flatten(grams)
    for cap in _exact.RATIONALIZATION_CAPS:
        x = _exact.rationalize(flat, cap)
        # symmetrize exactly within each block
        mats = system.unflatten_exact(x)
        for M in mats:
            q = len(M)
            for a in range(q):
                for b in range(a + 1, q):
                    v = (M[a][b] + M[b][a]) / 2
                    M[a][b] = M[b][a] = v
        x = []
        for bi, M in enumerate(mats):
            for row in M:
                x.extend(row)
        if any(_exact.residual_exact(x, system.rows_exact, system.b_exact)):
            x = _exact.project_affine_exact(x, system.rows_exact, system.b_exact)
            if x is None:
                continue
        mats = system.unflatten_exact(x)
        factors = []
        for M in mats:
            ldl = _exact.psd_ldl(M)
            if ldl is None:
                factors = None
                break
            factors.append(ldl)
        if factors is None:
            continue
        out = []
        for (pivots, columns), (_, _, basis) in zip(factors, system.blocks):
            weights, squares = [], []
            for d_k, col in zip(pivots, columns):
                if d_k == 0:
                    continue
                h = Polynomial(
                    system.dimension,
                    {alpha: c for alpha, c in zip(basis.exponents, col)},
                )
                weights.append(d_k)
                squares.append(h)
            out.append((weights, squares))
        return out
    return None


def float_block_squares(system: BlockSystem, grams, trunc_tol: float):
    """Eigendecompose each block and keep eigenpairs above trunc_tol * max."""
    out = []
    for G, (_, _, basis) in zip(grams, system.blocks):
        if G.shape[0] == 0:
            out.append(([], []))
            continue
        w, V = eigh(G)
        lam_max = max(float(w[-1]), 0.0)
        weights, squares = [], []
        for lam, vec in zip(w, V.T):
            if lam <= trunc_tol * max(lam_max, 1e-300):
                continue
            h = Polynomial(
                system.dimension,
                {
                    alpha: Fraction(float(c))
                    for alpha, c in zip(basis.exponents, vec)
                    if c != 0.0
                },
            )
            weights.append(Fraction(float(lam)))
            squares.append(h)
        out.append((weights, squares))
    return out


# ---------------------------------------------------------------------------
# Gram systems for a single polynomial
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GramSystem:
    """The coefficient-matching system p = v_m^T G v_m for one polynomial."""

    polynomial: Polynomial
    basis: MonomialBasis
    system: BlockSystem

    @property
    def equations(self):
        return list(zip(self.system.gammas, self.system.b_exact))

    def pairs(self, gamma):
        """Basis index pairs (a, b) with alpha_a + alpha_b = gamma."""
        gamma = tuple(gamma)
        exps = self.basis.exponents
        idx = {e: i for i, e in enumerate(exps)}
        out = []
        for a, alpha in enumerate(exps):
            beta = tuple(g - x for g, x in zip(gamma, alpha))
            b = idx.get(beta)
            if b is not None:
                out.append((a, b))
        return out

    def sdp_problem(self) -> SdpProblem:
        return self.system.sdp_problem()


def gram_system(p: Polynomial) -> GramSystem:
    if p.is_zero:
        raise ValueError("the zero polynomial has no Gram system")
    deg = p.total_degree
    if deg % 2 != 0:
        raise OddDegreeError(
            f"degree {deg} is odd, so the polynomial cannot be a sum of squares"
        )
    m = deg // 2
    basis = monomial_basis(p.dimension, m)
    one = Polynomial.constant(p.dimension, 1)
    system = BlockSystem(p.dimension, 2 * m, [((), one, basis)], p)
    return GramSystem(polynomial=p, basis=basis, system=system)


# ---------------------------------------------------------------------------
# outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SosDecomposition:
    """p = sum_k weight_k * square_k^2 with positive rational weights."""

    weights: tuple
    squares: tuple

    def __post_init__(self):
        if len(self.weights) != len(self.squares):
            raise ValueError("weights and squares must align")
        for w in self.weights:
            if not isinstance(w, Fraction) or w <= 0:
                raise ValueError("weights must be positive Fractions")

    def __len__(self):
        return len(self.weights)

    def expansion(self) -> Polynomial:
        if not self.squares:
            raise ValueError("empty decomposition has no dimension")
        total = Polynomial.zero(self.squares[0].dimension)
        for w, h in zip(self.weights, self.squares):
            total = total + w * (h * h)
        return total

    def to_json_dict(self) -> dict:
        return {
            "weights": [str(w) for w in self.weights],
            "squares": [h.to_json_dict() for h in self.squares],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data) -> "SosDecomposition":
        return cls(
            weights=tuple(Fraction(w) for w in data["weights"]),
            squares=tuple(Polynomial.from_json_dict(h) for h in data["squares"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "SosDecomposition":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class NotSosWitness:
    """Moment vector separating p from the cone of sums of squares.

    ``sequence`` is exact with unit mass; ``epsilon`` lower-bounds both
    margins: lambda_min(M_m(y)) >= epsilon and L_y(p) <= -epsilon.
    """

    sequence: TruncatedMomentSequence
    order: int
    epsilon: float
    riesz_value: Fraction

    def to_json_dict(self) -> dict:
        data = self.sequence.to_json_dict()
        data["epsilon"] = self.epsilon
        data["riesz_value"] = str(self.riesz_value)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


@dataclass(frozen=True)
class SosReport:
    exact: bool
    max_coeff_error: float


def verify_sos(p: Polynomial, dec: SosDecomposition) -> SosReport:
    """Expand sum w_k h_k^2 exactly and compare coefficients against p."""
    diff = dec.expansion() - p
    if diff.is_zero:
        return SosReport(exact=True, max_coeff_error=0.0)
    err = max(abs(float(c)) for c in diff.terms.values())
    return SosReport(exact=False, max_coeff_error=err)


def verify_not_sos(p: Polynomial, witness: NotSosWitness) -> dict:
    """Re-check a witness: unit mass, exact L_y(p) < 0, M_m(y) >= eps I."""
    y = witness.sequence
    report = {"mass_is_one": y.mass == 1}
    L = riesz_apply(y, p)
    report["riesz_value"] = L
    report["riesz_negative"] = L < 0
    M = moment_matrix(y, witness.order).array
    lam_min = float(np.linalg.eigvalsh(M)[0])
    safety = 1e-12 * max(1.0, float(np.linalg.norm(M)))
    report["lambda_min"] = lam_min
    report["psd_margin_ok"] = lam_min - safety >= witness.epsilon
    report["riesz_margin_ok"] = float(-L) >= witness.epsilon
    report["valid"] = bool(
        report["mass_is_one"]
        and report["riesz_negative"]
        and report["psd_margin_ok"]
        and report["riesz_margin_ok"]
        and witness.epsilon > 0
    )
    return report


# ---------------------------------------------------------------------------
# witness construction
# ---------------------------------------------------------------------------


def _double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def gaussian_moments(dimension: int, degree: int) -> dict:
    """Moments of the standard product Gaussian: integers, PD moment matrix."""
    out = {}
    for alpha in monomial_basis(dimension, degree).exponents:
        if any(a % 2 for a in alpha):
            out[alpha] = Fraction(0)
        else:
            v = 1
            for a in alpha:
                v *= _double_factorial(a - 1) if a else 1
            out[alpha] = Fraction(v)
    return out


def _scan_for_negative_point(p: Polynomial, seed: int = 0) -> Optional[tuple]:
    """Search for a rational point with p < 0, exactly evaluated.

    Covers a coarse grid, seeded rational directions with geometrically
    growing radii (which settles every odd-degree polynomial), and axis
    rays.  Returns None when nothing negative is found; that is not a
    proof of nonnegativity.
    """
    d = p.dimension
    if p.is_zero:
        return None
    candidates = []
    if d <= 3:
        axis = [Fraction(k, 2) for k in range(-4, 5)]
        grid = [()]
        for _ in range(d):
            grid = [g + (a,) for g in grid for a in axis]
        candidates.extend(grid)
    rng = np.random.default_rng(seed)
    directions = []
    for j in range(d):
        e = [Fraction(0)] * d
        e[j] = Fraction(1)
        directions.append(tuple(e))
    directions.append(tuple(Fraction(1) for _ in range(d)))
    for _ in range(12):
        directions.append(
            tuple(Fraction(int(rng.integers(-9, 10)), 4) for _ in range(d))
        )
    for direction in directions:
        if all(x == 0 for x in direction):
            continue
        for k in range(0, 41, 2):
            t = Fraction(2) ** k
            candidates.append(tuple(t * x for x in direction))
            candidates.append(tuple(-t * x for x in direction))
    for point in candidates:
        if evaluate(p, point) < 0:
            return point
    return None


def _witness_from_point(p: Polynomial, point, m: int) -> NotSosWitness:
    """Mix Gaussian moments with an atom at a rational point where p < 0."""
    d = p.dimension
    gauss = gaussian_moments(d, 2 * m)
    L_g = sum((c * gauss[a] for a, c in p.terms.items()), Fraction(0))
    value = evaluate(p, point)
    if value >= 0:
        raise ValueError("witness point must have p < 0")
    w = max(Fraction(0), L_g + 1) / (-value)
    mass = 1 + w
    values = {}
    for alpha, g in gauss.items():
        atom = Fraction(1)
        for x, a in zip(point, alpha):
            atom *= Fraction(x) ** a
        values[alpha] = (g + w * atom) / mass
    y = TruncatedMomentSequence(d, 2 * m, values)
    L = riesz_apply(y, p)
    M = moment_matrix(y, m).array
    lam_min = float(np.linalg.eigvalsh(M)[0])
    safety = 1e-12 * max(1.0, float(np.linalg.norm(M)))
    eps = min(lam_min - safety, float(-L))
    return NotSosWitness(sequence=y, order=m, epsilon=eps, riesz_value=L)


def _witness_via_sdp(p: Polynomial, m: int, tol: float, seed: int,
                     max_iter: int) -> Optional[NotSosWitness]:
    """Search for a separating pseudo-moment vector directly.

    The unknown is a PSD matrix with moment structure (entries equal along
    anti-diagonal classes alpha + beta = gamma), unit mass, and
    L_y(p) = -c for a shrinking grid of targets c.  A feasible solution is
    mixed with Gaussian moments (both matrices PSD, so the mixture stays
    PSD), rationalized, and re-verified exactly.
    """
    d = p.dimension
    basis = monomial_basis(d, m)
    size = len(basis)
    exps = basis.exponents

    classes: dict[tuple, list] = {}
    for i in range(size):
        for j in range(i, size):
            gamma = tuple(a + b for a, b in zip(exps[i], exps[j]))
            classes.setdefault(gamma, []).append((i, j))

    def entry_matrix(i, j):
        A = np.zeros((size, size))
        if i == j:
            A[i, i] = 1.0
        else:
            A[i, j] = A[j, i] = 0.5
        return A

    constraints = []
    for positions in classes.values():
        first = positions[0]
        for pos in positions[1:]:
            constraints.append((sym(entry_matrix(*pos) - entry_matrix(*first)), 0.0))
    constraints.append((entry_matrix(0, 0), 1.0))

    target = np.zeros((size, size))
    for gamma, c in p.terms.items():
        i, j = classes[gamma][0]
        target += float(c) * entry_matrix(i, j)
    target = sym(target)

    gauss = gaussian_moments(d, 2 * m)
    L_gauss = float(sum((c * gauss[a] for a, c in p.terms.items()), Fraction(0)))

    for k in range(8):
        c = 4.0 ** (-k)
        prob = SdpProblem(
            n=size, constraints=constraints + [(target, -c)]
        )
        out = solve_feasibility(prob, tol=tol, max_iter=max_iter, seed=seed)
        if not isinstance(out, Feasible):
            continue
        G = out.gram
        vals_float = {}
        for gamma, positions in classes.items():
            vals_float[gamma] = float(np.mean([G[i, j] for i, j in positions]))

        s = min(1.0, c / (4.0 * max(1.0, abs(L_gauss))))
        raw = {
            gamma: Fraction(
                vals_float[gamma] + s * float(gauss[gamma])
            ).limit_denominator(10**6)
            for gamma in gauss
        }
        mass = raw[(0,) * d]
        if mass <= 0:
            continue
        values = {gamma: v / mass for gamma, v in raw.items()}
        y = TruncatedMomentSequence(d, 2 * m, values)
        L = riesz_apply(y, p)
        if L >= 0:
            continue
        M = moment_matrix(y, m).array
        lam_min = float(np.linalg.eigvalsh(M)[0])
        safety = 1e-12 * max(1.0, float(np.linalg.norm(M)))
        eps = min(lam_min - safety, float(-L))
        if eps <= 0:
            continue
        witness = NotSosWitness(sequence=y, order=m, epsilon=eps, riesz_value=L)
        if verify_not_sos(p, witness)["valid"]:
            return witness
    return None


# ---------------------------------------------------------------------------
# the decomposition driver
# ---------------------------------------------------------------------------


def sos_decompose(p: Polynomial, tol: float = 1e-8, seed: int = 0,
                  max_iter: int = 50000):
    """Decompose p as a weighted sum of squares or refute with a witness.

    Returns SosDecomposition, NotSosWitness, or Unknown.  Decompositions
    are re-verified symbolically before being returned and made exact
    whenever the Gram matrix rationalizes; witnesses are always exact.
    """
    if p.is_zero:
        raise ValueError("the zero polynomial is excluded; test for it directly")
    deg = p.total_degree
    d = p.dimension

    if deg == 0:
        c = p.coeff((0,) * d)
        if c > 0:
            return SosDecomposition(
                weights=(c,), squares=(Polynomial.constant(d, 1),)
            )
        return _witness_from_point(p, (Fraction(0),) * d, 1)

    m_witness = (deg + 1) // 2
    point = _scan_for_negative_point(p, seed=seed)
    if point is not None:
        witness = _witness_from_point(p, point, m_witness)
        if verify_not_sos(p, witness)["valid"]:
            return witness
    if deg % 2 != 0:
        # a negative ray always exists; if the scan missed it, report honestly
        return Unknown(
            iterations=0, residual=float("nan"), gap=float("nan"),
            message="odd degree but no negative point located by the scan",
        )

    gram = gram_system(p)
    out = solve_feasibility(gram.sdp_problem(), tol=tol, max_iter=max_iter, seed=seed)

    if isinstance(out, Feasible):
        grams = gram.system.split_gram(out.gram)
        exact = rationalize_block_solution(gram.system, grams)
        if exact is not None:
            weights, squares = exact[0]
            if not weights:
                # every pivot vanished, so the target must be zero; p is not
                return Unknown(
                    iterations=0, residual=out.residual, gap=0.0,
                    message="rationalization produced an empty decomposition",
                )
            dec = SosDecomposition(weights=tuple(weights), squares=tuple(squares))
            if verify_sos(p, dec).exact:
                return dec
        weights, squares = float_block_squares(gram.system, grams, tol)[0]
        if weights:
            dec = SosDecomposition(weights=tuple(weights), squares=tuple(squares))
            report = verify_sos(p, dec)
            scale = max(1.0, max(abs(float(c)) for c in p.terms.values()))
            if report.max_coeff_error <= 1e3 * max(tol, out.residual) * scale:
                return dec
        return Unknown(
            iterations=0, residual=out.residual, gap=0.0,
            message="feasible Gram matrix failed symbolic verification",
        )

    # primal infeasible or undecided: search for a separating moment vector
    witness = _witness_via_sdp(p, deg // 2, tol, seed, max_iter)
    if witness is not None:
        return witness
    if isinstance(out, InfeasibleWitness):
        return Unknown(
            iterations=0, residual=float("nan"), gap=float("nan"),
            message="infeasible Gram system but no strict witness verified",
        )
    return out


# ---------------------------------------------------------------------------
# univariate two-squares decomposition
# ---------------------------------------------------------------------------


def _probe_negative_univariate(p: Polynomial, centers) -> Optional[Fraction]:
    """Probes around candidate locations for a negative value of p."""
    points = set()
    for c in centers:
        c = Fraction(c).limit_denominator(10**6)
        points.add(c)
        for k in range(1, 30, 4):
            delta = Fraction(1, 2**k)
            points.add(c + delta)
            points.add(c - delta)
    span = max((abs(c) for c in points), default=Fraction(1)) + 1
    for k in range(0, 60, 3):
        points.add(span * 2**k)
        points.add(-span * 2**k)
    points.add(Fraction(0))
    for t in sorted(points):
        if evaluate(p, (t,)) < 0:
            return t
    return None


def two_squares_univariate(p: Polynomial, tol: float = 1e-6):
    """Write a nonnegative univariate polynomial as q^2 + r^2.

    Nonnegativity is verified first: even degree, positive leading
    coefficient, and even multiplicity of real roots; otherwise
    NotNonnegativeError carries a witness point.  Roots come from the
    companion matrix; conjugate pairs compose through
    (ac - bd)^2 + (ad + bc)^2, exactly when the data is rational.
    """
    if p.dimension != 1:
        raise ValueError("two-squares decomposition is univariate")
    if p.is_zero:
        z = Polynomial.zero(1)
        return z, z
    deg = p.total_degree
    lead = p.coeff((deg,))
    if deg % 2 != 0 or lead < 0:
        witness = _probe_negative_univariate(p, [0])
        if witness is None:  # pragma: no cover - scan is exhaustive on rays
            raise NotNonnegativeError((0,), evaluate(p, (Fraction(0),)))
        raise NotNonnegativeError((witness,), evaluate(p, (witness,)))
    if deg == 0:
        root = _exact.fraction_sqrt(lead)
        if root is not None:
            return Polynomial.constant(1, root), Polynomial.zero(1)
        q = Polynomial(1, {(0,): Fraction(float(lead) ** 0.5)})
        return q, Polynomial.zero(1)

    coeffs = [float(p.coeff((k,))) for k in range(deg, -1, -1)]
    roots = np.roots(coeffs)
    scale = 1.0 + float(np.max(np.abs(roots)))
    real_mask = np.abs(roots.imag) <= 1e-7 * scale
    reals = sorted(float(r) for r in roots[real_mask].real)
    complex_roots = [r for r in roots[~real_mask] if r.imag > 0]

    # probe around and between the real roots; a sign change means a root of
    # odd multiplicity and disproves nonnegativity with an explicit point
    centers = list(reals)
    for i in range(len(reals) - 1):
        centers.append((reals[i] + reals[i + 1]) / 2.0)
    witness = _probe_negative_univariate(p, centers or [0.0])
    if witness is not None:
        raise NotNonnegativeError((witness,), evaluate(p, (witness,)))

    # conjugate pairs keep the real count even, and without sign changes the
    # sorted list splits into even-multiplicity blocks, so adjacent pairing
    # reconstructs the double roots (the expansion check below still guards)
    pairs = [
        (reals[i] + reals[i + 1]) / 2.0 for i in range(0, len(reals) - 1, 2)
    ]

    factors = [(r, 0.0) for r in pairs] + [(float(z.real), float(z.imag)) for z in complex_roots]
    factors.sort(key=lambda ab: (abs(ab[1]), ab[0]))

    # try exact reconstruction: snap roots and the leading coefficient
    exact_factors = []
    for a, b in factors:
        exact_factors.append(
            (Fraction(a).limit_denominator(10**4), Fraction(b).limit_denominator(10**4))
        )
    sqrt_lead = _exact.fraction_sqrt(lead)
    if sqrt_lead is not None:
        product = Polynomial.constant(1, lead)
        x = Polynomial.variable(1, 0)
        for a, b in exact_factors:
            product = product * ((x - a) ** 2 + Polynomial.constant(1, b**2))
        if product == p:
            q, r = Polynomial.constant(1, sqrt_lead), Polynomial.zero(1)
            for a, b in exact_factors:
                u, v = x - a, Polynomial.constant(1, b)
                q, r = q * u - r * v, q * v + r * u
            return q, r

    x = Polynomial.variable(1, 0)
    q = Polynomial.constant(1, Fraction(float(lead) ** 0.5))
    r = Polynomial.zero(1)
    for a, b in factors:
        u = x - Fraction(a)
        v = Polynomial.constant(1, Fraction(b))
        q, r = q * u - r * v, q * v + r * u
    err_poly = q * q + r * r - p
    err = 0.0 if err_poly.is_zero else max(abs(float(c)) for c in err_poly.terms.values())
    coeff_scale = max(1.0, max(abs(float(c)) for c in p.terms.values()))
    if err > tol * coeff_scale:
        raise ArithmeticError(
            f"two-squares composition error {err:.3e} exceeds tolerance"
        )
    return q, r
