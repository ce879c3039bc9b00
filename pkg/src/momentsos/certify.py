"""Degree-bounded membership certificates for quadratic modules and preorderings.

A certificate for g writes it as sum_e sigma_e * f^e with every sigma_e a
verified sum of squares: selectors e range over [1, f_1, ..., f_s] for the
module kind (|e| <= 1) and over all 2^s products for the preordering kind.
The search fixes a total degree 2t, allocates multiplier degrees
2 * floor((2t - deg f^e) / 2), and solves one joint semidefinite
feasibility problem over all Gram blocks.

``NotFoundAtDegree`` is a statement about the truncated search only; the
membership theorems guarantee certificates for strictly positive targets
at some unspecified degree, so absence at 2t disproves nothing beyond 2t.
Every returned certificate re-verifies symbolically before the caller
sees it, exactly whenever the Gram blocks rationalize.

Special searches: an Archimedean witness finds lambda with
lambda - sum_j x_j^2 in the module (lambda enters the block system as a
free 1x1 block, then shrinks by bisection over verified fixed-lambda
solves), and an emptiness refutation certifies -1 in the preordering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .cones import SemialgebraicDescription, module_generators, preorder_products
from .numerics import Feasible, InfeasibleWitness, Unknown, solve_feasibility
from .polycore import Polynomial, monomial_basis
from .sos import (
    BlockSystem,
    SosDecomposition,
    float_block_squares,
    rationalize_block_solution,
    verify_sos,
)

MODULE = "module"
PREORDERING = "preordering"

_LAMBDA_LABEL = ("free-scalar",)


class MalformedSelectorError(ValueError):
    """A selector is incompatible with the certificate kind."""


class DegreeTooLowError(ValueError):
    """The requested degree bound cannot even contain the target."""


@dataclass(frozen=True)
class Certificate:
    kind: str
    target: Polynomial
    description: SemialgebraicDescription
    degree: int
    multipliers: dict  # selector tuple -> SosDecomposition

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "degree": self.degree,
            "multipliers": [
                {"e": list(sel), "sos": dec.to_json_dict()}
                for sel, dec in sorted(self.multipliers.items())
            ],
            "target": self.target.to_json_dict(),
            "description": self.description.to_json_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data) -> "Certificate":
        return cls(
            kind=data["kind"],
            target=Polynomial.from_json_dict(data["target"]),
            description=SemialgebraicDescription.from_json_dict(data["description"]),
            degree=int(data["degree"]),
            multipliers={
                tuple(int(v) for v in item["e"]): SosDecomposition.from_json_dict(item["sos"])
                for item in data["multipliers"]
            },
        )

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class NotFoundAtDegree:
    """No certificate exists within this degree truncation."""

    degree: int
    witness: Optional[InfeasibleWitness] = None


@dataclass(frozen=True)
class ArchimedeanWitness:
    """lambda bounds with embedded certificates.

    mode "sum": a single lambda with lambda - sum_j x_j^2 certified.
    mode "coordinate": one lambda_j per coordinate for lambda_j - x_j^2.
    """

    mode: str
    bounds: tuple  # Fractions
    certificates: tuple  # Certificates aligned with bounds


@dataclass(frozen=True)
class MultiplierReport:
    weights_positive: bool
    squares: int
    degree_ok: bool


@dataclass(frozen=True)
class CertificateReport:
    exact: bool
    max_coeff_error: float
    multiplier_reports: dict


def _selector_products(kind: str, K: SemialgebraicDescription):
    """(selector, product polynomial) pairs for the requested cone."""
    s = len(K.generators)
    if kind == MODULE:
        out = [((0,) * s, Polynomial.constant(K.dimension, 1))]
        for i, g in enumerate(K.generators):
            sel = [0] * s
            sel[i] = 1
            out.append((tuple(sel), g))
        return out
    if kind == PREORDERING:
        return [(gp.selector, gp.polynomial) for gp in preorder_products(K)]
    raise ValueError(f"unknown certificate kind {kind!r}")


def _allocated_basis_degree(degree: int, product: Polynomial) -> Optional[int]:
    if product.is_zero:
        return None
    rem = degree - max(0, product.total_degree)
    if rem < 0:
        return None
    return rem // 2


def _build_system(kind, g, K, degree, extra_blocks=()):
    blocks = []
    for sel, product in _selector_products(kind, K):
        bdeg = _allocated_basis_degree(degree, product)
        if bdeg is None:
            continue
        blocks.append((sel, product, monomial_basis(K.dimension, bdeg)))
    blocks.extend(extra_blocks)
    return BlockSystem(K.dimension, degree, blocks, g)


def _certificate_from_feasible(system, kind, g, K, degree, gram, tol):
    grams = system.split_gram(gram)
    labels = [label for label, _, _ in system.blocks]

    def assemble(per_block):
        multipliers = {}
        for label, (weights, squares) in zip(labels, per_block):
            if label == _LAMBDA_LABEL or not weights:
                continue
            multipliers[label] = SosDecomposition(
                weights=tuple(weights), squares=tuple(squares)
            )
        return Certificate(
            kind=kind, target=g, description=K, degree=degree, multipliers=multipliers
        )

    exact = rationalize_block_solution(system, grams)
    if exact is not None:
        cert = assemble(exact)
        if verify_certificate(cert).exact:
            return cert
    cert = assemble(float_block_squares(system, grams, tol))
    report = verify_certificate(cert)
    scale = max(1.0, *(abs(float(c)) for c in g.terms.values())) if not g.is_zero else 1.0
    if report.max_coeff_error <= 1e-6 * scale:
        return cert
    return None


def _search(kind, g, K, degree, tol, seed, max_iter):
    if degree < 0 or degree % 2 != 0:
        raise DegreeTooLowError("the degree bound must be an even nonnegative integer")
    if not g.is_zero and g.total_degree > degree:
        raise DegreeTooLowError(
            f"target degree {g.total_degree} exceeds the bound {degree}"
        )
    system = _build_system(kind, g, K, degree)
    out = solve_feasibility(system.sdp_problem(), tol=tol, max_iter=max_iter, seed=seed)
    if isinstance(out, Feasible):
        cert = _certificate_from_feasible(system, kind, g, K, degree, out.gram, tol)
        if cert is not None:
            return cert
        return Unknown(
            iterations=0, residual=out.residual, gap=0.0,
            message="feasible blocks failed symbolic verification",
        )
    if isinstance(out, InfeasibleWitness):
        return NotFoundAtDegree(degree=degree, witness=out)
    return out


def putinar_search(g: Polynomial, K: SemialgebraicDescription, degree: int,
                   tol: float = 1e-8, seed: int = 0, max_iter: int = 50000):
    """Search the quadratic module for g at the given even degree bound."""
    return _search(MODULE, g, K, degree, tol, seed, max_iter)


def schmudgen_search(g: Polynomial, K: SemialgebraicDescription, degree: int,
                     tol: float = 1e-8, seed: int = 0, max_iter: int = 50000):
    """Search the preordering (all generator products) for g."""
    return _search(PREORDERING, g, K, degree, tol, seed, max_iter)


def refute_nonempty(K: SemialgebraicDescription, degree: int, tol: float = 1e-8,
                    seed: int = 0, max_iter: int = 50000):
    """Certify K = empty by writing -1 as a preordering member."""
    minus_one = Polynomial.constant(K.dimension, -1)
    return _search(PREORDERING, minus_one, K, degree, tol, seed, max_iter)


def _sum_of_coordinate_squares(d: int, coords) -> Polynomial:
    total = Polynomial.zero(d)
    for j in coords:
        total = total + Polynomial.variable(d, j) ** 2
    return total


def archimedean_witness(K: SemialgebraicDescription, degree: int, tol: float = 1e-8,
                        seed: int = 0, per_coordinate: bool = False,
                        tighten: bool = True, max_iter: int = 50000):
    """Find lambda > 0 with lambda - sum_j x_j^2 in the module (or lambda_j
    - x_j^2 per coordinate), shrinking lambda by bisection.

    Returns ArchimedeanWitness, NotFoundAtDegree, or Unknown.
    """
    d = K.dimension
    coords_list = [range(d)] if not per_coordinate else [[j] for j in range(d)]
    bounds, certs = [], []
    for coords in coords_list:
        sq = _sum_of_coordinate_squares(d, coords)
        out = _free_scalar_search(K, sq, degree, tol, seed, max_iter)
        if isinstance(out, NotFoundAtDegree) or isinstance(out, Unknown):
            return out
        lam, cert = out
        if tighten:
            lam, cert = _tighten_lambda(K, sq, degree, tol, seed, lam, cert, max_iter)
        bounds.append(lam)
        certs.append(cert)
    return ArchimedeanWitness(
        mode="coordinate" if per_coordinate else "sum",
        bounds=tuple(bounds),
        certificates=tuple(certs),
    )


def _free_scalar_search(K, square_sum, degree, tol, seed, max_iter):
    """Solve with lambda as a free 1x1 block; returns (lambda, certificate)."""
    if degree < 2 or degree % 2 != 0:
        raise DegreeTooLowError("an Archimedean search needs an even degree >= 2")
    d = K.dimension
    lam_block = (
        _LAMBDA_LABEL,
        Polynomial.constant(d, -1),
        monomial_basis(d, 0),
    )
    system = _build_system(MODULE, -square_sum, K, degree, extra_blocks=[lam_block])
    out = solve_feasibility(system.sdp_problem(), tol=tol, max_iter=max_iter, seed=seed)
    if isinstance(out, InfeasibleWitness):
        return NotFoundAtDegree(degree=degree, witness=out)
    if isinstance(out, Unknown):
        return out
    lam_index = [label for label, _, _ in system.blocks].index(_LAMBDA_LABEL)
    lam_float = float(system.split_gram(out.gram)[lam_index][0, 0])
    # verify at a nearby fixed rational value, nudging upward if needed
    for bump in (0, 1e-9, 1e-6, 1e-3, 0.1, 1.0):
        lam = Fraction(lam_float * (1 + bump) + bump).limit_denominator(10**9)
        cert = _fixed_lambda_certificate(K, square_sum, lam, degree, tol, seed)
        if cert is not None:
            return lam, cert
    return Unknown(
        iterations=0, residual=float("nan"), gap=float("nan"),
        message="free-scalar solution did not verify at any nearby fixed value",
    )


def _fixed_lambda_certificate(K, square_sum, lam: Fraction, degree, tol, seed):
    target = Polynomial.constant(K.dimension, lam) - square_sum
    out = _search(MODULE, target, K, degree, tol, seed, max_iter=4000)
    return out if isinstance(out, Certificate) else None


def _tighten_lambda(K, square_sum, degree, tol, seed, lam_hi, cert_hi, max_iter):
    lo = Fraction(0)
    hi, cert = lam_hi, cert_hi
    for _ in range(80):
        if float(hi - lo) <= 5e-7 * max(1.0, float(hi)):
            break
        mid = (lo + hi) / 2
        got = _fixed_lambda_certificate(K, square_sum, mid, degree, tol, seed)
        if got is not None:
            hi, cert = mid, got
        else:
            lo = mid
    # prefer a clean rational value when one verifies in the bracket
    for cand in sorted(
        {
            Fraction(round(float(hi))),
            Fraction(float(hi)).limit_denominator(16),
            Fraction(float(hi)).limit_denominator(256),
        }
    ):
        if lo < cand <= hi:
            got = _fixed_lambda_certificate(K, square_sum, cand, degree, tol, seed)
            if got is not None:
                return cand, got
            break
    return hi, cert


def verify_certificate(cert: Certificate) -> CertificateReport:
    """Expand the certificate exactly and compare against its target."""
    K = cert.description
    s = len(K.generators)
    products = dict(_selector_products(PREORDERING, K)) if s <= 20 else None

    expansion = Polynomial.zero(K.dimension)
    reports = {}
    for sel, dec in cert.multipliers.items():
        if len(sel) != s or any(v not in (0, 1) for v in sel):
            raise MalformedSelectorError(f"selector {sel} does not address {s} generators")
        if cert.kind == MODULE and sum(sel) > 1:
            raise MalformedSelectorError(
                f"selector {sel} selects a product, which the module kind forbids"
            )
        if products is not None:
            product = products[sel]
        else:
            product = Polynomial.constant(K.dimension, 1)
            for i, bit in enumerate(sel):
                if bit:
                    product = product * K.generators[i]
        term = dec.expansion() * product
        expansion = expansion + term
        sq_deg = max(
            (h.total_degree for h in dec.squares if not h.is_zero), default=0
        )
        f_deg = max(0, product.total_degree) if not product.is_zero else 0
        reports[sel] = MultiplierReport(
            weights_positive=all(w > 0 for w in dec.weights),
            squares=len(dec),
            degree_ok=2 * sq_deg + f_deg <= cert.degree,
        )

    diff = expansion - cert.target
    if diff.is_zero:
        return CertificateReport(exact=True, max_coeff_error=0.0, multiplier_reports=reports)
    err = max(abs(float(c)) for c in diff.terms.values())
    return CertificateReport(exact=False, max_coeff_error=err, multiplier_reports=reports)
