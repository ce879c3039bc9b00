"""Sparse multivariate polynomials over exact rationals.

Everything downstream (certificate verification, moment functionals,
witness checks) reduces to arithmetic in this module, so coefficients are
``fractions.Fraction`` throughout and no floating point ever enters a
polynomial unless the caller converts explicitly.

Monomials are exponent tuples ``alpha = (a_1, ..., a_d)`` of nonnegative
integers.  The canonical order is graded lexicographic: first by total
degree, then lexicographically with the first variable largest, so a basis
in dimension 2 lists ``1, x, y, x^2, xy, y^2, ...``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence, Union

Exponent = tuple  # tuple[int, ...], a multi-index
Scalar = Union[int, Fraction, str]

NEG_INF = float("-inf")


class DimensionMismatchError(ValueError):
    """Operands live in polynomial rings of different dimensions."""


class DegreeOverflowError(ValueError):
    """A polynomial exceeds the degree bound of the requested basis."""


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(
        f"coefficients must be exact (int, Fraction, or 'num/den' string), got {type(value).__name__}"
    )


def _check_exponent(alpha, dimension: int) -> Exponent:
    exp = tuple(int(a) for a in alpha)
    if len(exp) != dimension:
        raise DimensionMismatchError(
            f"exponent {exp} has length {len(exp)}, expected dimension {dimension}"
        )
    if any(a < 0 for a in exp):
        raise ValueError(f"exponent {exp} has a negative entry")
    return exp


def grlex_key(alpha: Exponent):
    """Sort key realizing graded lexicographic order (x1 largest)."""
    return (sum(alpha), tuple(-a for a in alpha))


class Polynomial:
    """Immutable sparse polynomial with Fraction coefficients.

    ``terms`` maps exponent tuples to nonzero Fractions.  Instances are
    treated as values: no method mutates ``self`` and all operators return
    fresh objects, so they are safe to share between threads.
    """

    __slots__ = ("dimension", "terms")

    def __init__(self, dimension: int, terms: Mapping[Exponent, Scalar] | None = None):
        if dimension < 1:
            raise ValueError("dimension must be a positive integer")
        clean: dict[Exponent, Fraction] = {}
        for alpha, c in (terms or {}).items():
            coeff = _as_fraction(c)
            if coeff == 0:
                continue
            clean[_check_exponent(alpha, dimension)] = coeff
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, dimension: int) -> "Polynomial":
        return cls(dimension, {})

    @classmethod
    def constant(cls, dimension: int, value: Scalar) -> "Polynomial":
        return cls(dimension, {(0,) * dimension: value})

    @classmethod
    def variable(cls, dimension: int, index: int) -> "Polynomial":
        """The coordinate polynomial x_{index} (0-based)."""
        if not 0 <= index < dimension:
            raise ValueError(f"variable index {index} out of range for dimension {dimension}")
        alpha = [0] * dimension
        alpha[index] = 1
        return cls(dimension, {tuple(alpha): 1})

    @classmethod
    def monomial(cls, alpha: Iterable[int], coeff: Scalar = 1) -> "Polynomial":
        alpha = tuple(int(a) for a in alpha)
        return cls(len(alpha), {alpha: coeff})

    # -- structure ----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def total_degree(self):
        """Max total degree of a term; -inf sentinel for the zero polynomial."""
        if not self.terms:
            return NEG_INF
        return max(sum(alpha) for alpha in self.terms)

    def coeff(self, alpha: Iterable[int]) -> Fraction:
        return self.terms.get(tuple(int(a) for a in alpha), Fraction(0))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: grlex_key(item[0]))

    def _require_same_dimension(self, other: "Polynomial"):
        if self.dimension != other.dimension:
            raise DimensionMismatchError(
                f"dimension mismatch: {self.dimension} vs {other.dimension}"
            )

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.dimension, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._require_same_dimension(other)
        acc = dict(self.terms)
        for alpha, c in other.terms.items():
            s = acc.get(alpha, Fraction(0)) + c
            if s == 0:
                acc.pop(alpha, None)
            else:
                acc[alpha] = s
        return Polynomial(self.dimension, acc)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.dimension, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.dimension, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Polynomial.zero(self.dimension)
            return Polynomial(
                self.dimension, {a: c * other for a, c in self.terms.items()}
            )
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._require_same_dimension(other)
        acc: dict[Exponent, Fraction] = {}
        for a1, c1 in self.terms.items():
            for a2, c2 in other.terms.items():
                prod = tuple(x + y for x, y in zip(a1, a2))
                s = acc.get(prod, Fraction(0)) + c1 * c2
                if s == 0:
                    acc.pop(prod, None)
                else:
                    acc[prod] = s
        return Polynomial(self.dimension, acc)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if exponent < 0:
            raise ValueError("negative powers are not polynomials")
        result = Polynomial.constant(self.dimension, 1)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.dimension == other.dimension
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.dimension, frozenset(self.terms.items())))

    # -- evaluation ---------------------------------------------------

    def __call__(self, point: Sequence):
        return evaluate(self, point)

    def __repr__(self):
        if self.is_zero:
            return "Polynomial(0)"
        parts = []
        for alpha, c in self.sorted_terms():
            mono = "*".join(
                f"x{j}" if a == 1 else f"x{j}^{a}" for j, a in enumerate(alpha) if a
            )
            parts.append(f"{c}" if not mono else f"{c}*{mono}")
        return "Polynomial(" + " + ".join(parts) + ")"

    # -- serialization ------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "d": self.dimension,
            "terms": [
                {"c": str(c), "e": list(alpha)} for alpha, c in self.sorted_terms()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Polynomial":
        d = int(data["d"])
        terms: dict[Exponent, Fraction] = {}
        for item in data.get("terms", []):
            alpha = _check_exponent(item["e"], d)
            terms[alpha] = terms.get(alpha, Fraction(0)) + Fraction(str(item["c"]))
        return cls(d, terms)

    @classmethod
    def from_json(cls, text: str) -> "Polynomial":
        return cls.from_json_dict(json.loads(text))


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def sub(p: Polynomial, q: Polynomial) -> Polynomial:
    return p - q


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def evaluate(p: Polynomial, point: Sequence):
    """Evaluate p at a point.

    Exact when every coordinate is an int or Fraction; float otherwise.
    """
    if len(point) != p.dimension:
        raise DimensionMismatchError(
            f"point has length {len(point)}, expected {p.dimension}"
        )
    exact = all(isinstance(x, (int, Fraction)) for x in point)
    total = Fraction(0) if exact else 0.0
    for alpha, c in p.terms.items():
        term = c if exact else float(c)
        for x, a in zip(point, alpha):
            if a:
                term *= x**a
        total += term
    return total


class MonomialBasis:
    """All exponents of total degree <= ``degree`` in graded-lex order."""

    __slots__ = ("dimension", "degree", "exponents", "_index")

    def __init__(self, dimension: int, degree: int):
        if dimension < 1 or degree < 0:
            raise ValueError("need dimension >= 1 and degree >= 0")
        exps = sorted(_exponents_up_to(dimension, degree), key=grlex_key)
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "exponents", tuple(exps))
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(exps)})

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("MonomialBasis is immutable")

    def __len__(self):
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def index(self, alpha: Exponent) -> int:
        return self._index[tuple(alpha)]

    def __contains__(self, alpha) -> bool:
        return tuple(alpha) in self._index

    def __repr__(self):
        return f"MonomialBasis(d={self.dimension}, m={self.degree}, size={len(self)})"


def _exponents_up_to(dimension: int, degree: int):
    if dimension == 1:
        for a in range(degree + 1):
            yield (a,)
        return
    for a in range(degree + 1):
        for rest in _exponents_up_to(dimension - 1, degree - a):
            yield (a,) + rest


def monomial_basis(dimension: int, degree: int) -> MonomialBasis:
    basis = MonomialBasis(dimension, degree)
    assert len(basis) == comb(dimension + degree, degree)
    return basis


def coeff_vector(p: Polynomial, basis: MonomialBasis) -> list[Fraction]:
    """Coefficients of p against the basis; errors if p does not fit."""
    if p.dimension != basis.dimension:
        raise DimensionMismatchError(
            f"polynomial dimension {p.dimension} vs basis dimension {basis.dimension}"
        )
    if not p.is_zero and p.total_degree > basis.degree:
        raise DegreeOverflowError(
            f"degree {p.total_degree} exceeds basis degree {basis.degree}"
        )
    vec = [Fraction(0)] * len(basis)
    for alpha, c in p.terms.items():
        vec[basis.index(alpha)] = c
    return vec


def from_coeff_vector(vec: Sequence[Scalar], basis: MonomialBasis) -> Polynomial:
    """Inverse of coeff_vector."""
    if len(vec) != len(basis):
        raise ValueError(f"vector length {len(vec)} does not match basis size {len(basis)}")
    return Polynomial(
        basis.dimension, {alpha: c for alpha, c in zip(basis.exponents, vec)}
    )


def motzkin() -> Polynomial:
    """The classical nonnegative polynomial in two variables that is not a
    sum of squares: 1 - 3 x^2 y^2 + x^2 y^4 + x^4 y^2."""
    return Polynomial(2, {(0, 0): 1, (2, 2): -3, (2, 4): 1, (4, 2): 1})
