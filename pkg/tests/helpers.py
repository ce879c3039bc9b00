"""Shared test utilities: random generators and independent oracles."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import sympy

from momentsos.polycore import Polynomial, monomial_basis


def rational(rng: np.random.Generator, lo=-3, hi=3, dens=(1, 2, 3, 4)) -> Fraction:
    """Random Fraction in [lo, hi] with a small denominator."""
    den = int(rng.choice(dens))
    num = int(rng.integers(lo * den, hi * den + 1))
    return Fraction(num, den)


def random_polynomial(
    rng: np.random.Generator,
    dimension: int,
    degree: int,
    n_terms: int = 5,
    lo=-3,
    hi=3,
) -> Polynomial:
    basis = monomial_basis(dimension, degree)
    terms = {}
    for _ in range(n_terms):
        alpha = basis.exponents[int(rng.integers(0, len(basis)))]
        terms[alpha] = rational(rng, lo, hi)
    return Polynomial(dimension, terms)


def to_sympy(p: Polynomial, symbols):
    expr = sympy.Integer(0)
    for alpha, c in p.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for x, a in zip(symbols, alpha):
            term *= x**a
        expr += term
    return sympy.expand(expr)


def sympy_equal(p: Polynomial, expr, symbols) -> bool:
    """Independent check that p equals a sympy expression."""
    return sympy.expand(to_sympy(p, symbols) - expr) == 0


def atom_moment_oracle(atoms, weights, alpha) -> Fraction:
    """Brute-force moment of a finite atomic measure: sum_i w_i x_i^alpha."""
    total = Fraction(0)
    for point, w in zip(atoms, weights):
        term = Fraction(w)
        for x, a in zip(point, alpha):
            term *= Fraction(x) ** a
        total += term
    return total
