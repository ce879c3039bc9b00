"""Semialgebraic descriptions and the cones attached to them.

A description is a finite list of polynomial inequalities f_i >= 0 cutting
out the set K.  Two cones of certified-nonnegative polynomials sit on top:
the module generated by [1, f_1, ..., f_s] (one sum-of-squares multiplier
per generator) and the preordering generated by all 2^s products
f_1^{e_1} ... f_s^{e_s} with e in {0,1}^s.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from scipy.stats import qmc

from .polycore import DimensionMismatchError, Polynomial, evaluate

PREORDER_GUARD = 20


class TooManyGeneratorsError(ValueError):
    """Preordering expansion would need more than 2^20 products."""


@dataclass(frozen=True)
class SemialgebraicDescription:
    """K = {x : f_i(x) >= 0 for all i}; s = 0 describes the whole space."""

    dimension: int
    generators: tuple

    def __init__(self, dimension: int, generators: Sequence[Polynomial] = ()):
        gens = tuple(generators)
        for g in gens:
            if g.dimension != dimension:
                raise DimensionMismatchError(
                    f"generator of dimension {g.dimension} in a description of dimension {dimension}"
                )
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "generators", gens)

    def to_json_dict(self) -> dict:
        return {
            "d": self.dimension,
            "generators": [g.to_json_dict() for g in self.generators],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data) -> "SemialgebraicDescription":
        d = int(data["d"])
        gens = [Polynomial.from_json_dict(g) for g in data.get("generators", [])]
        return cls(d, gens)

    @classmethod
    def from_json(cls, text: str) -> "SemialgebraicDescription":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class GeneratorProduct:
    """A product f_1^{e_1} ... f_s^{e_s} with its selector e in {0,1}^s."""

    selector: tuple
    polynomial: Polynomial


def contains_point(K: SemialgebraicDescription, point, tol: float = 1e-12) -> bool:
    """True iff f_i(point) >= -tol for every generator."""
    if len(point) != K.dimension:
        raise DimensionMismatchError(
            f"point of length {len(point)} against dimension {K.dimension}"
        )
    return all(evaluate(g, point) >= -tol for g in K.generators)


def module_generators(K: SemialgebraicDescription) -> list[Polynomial]:
    """[1, f_1, ..., f_s], the generators carrying one multiplier each."""
    return [Polynomial.constant(K.dimension, 1), *K.generators]


def preorder_products(K: SemialgebraicDescription) -> list[GeneratorProduct]:
    """All 2^s products of generators.

    Selectors run through {0,1}^s in binary-counter order with e_1 as the
    least significant bit: 1, f1, f2, f1*f2, f3, ...
    """
    s = len(K.generators)
    if s > PREORDER_GUARD:
        raise TooManyGeneratorsError(
            f"{s} generators would expand into 2^{s} products (guard: {PREORDER_GUARD})"
        )
    products = []
    for mask in range(1 << s):
        selector = tuple((mask >> i) & 1 for i in range(s))
        poly = Polynomial.constant(K.dimension, 1)
        for i in range(s):
            if selector[i]:
                poly = poly * K.generators[i]
        products.append(GeneratorProduct(selector=selector, polynomial=poly))
    return products


def variety_description(ideal_generators: Sequence[Polynomial]) -> SemialgebraicDescription:
    """The zero set of g_1, ..., g_m as inequalities (g_i, -g_i)."""
    gens = list(ideal_generators)
    if not gens:
        raise ValueError("need at least one ideal generator to fix the dimension")
    d = gens[0].dimension
    pairs = []
    for g in gens:
        pairs.extend([g, -g])
    return SemialgebraicDescription(d, pairs)


class PositivityOracle:
    """Sampled surrogate for the cone of polynomials nonnegative on K.

    Holds a deterministic low-discrepancy point set inside K (Halton
    sequence scaled to a box, filtered by membership) plus user points.
    Used by property tests and bound checks, never by certificates.
    """

    def __init__(self, description: SemialgebraicDescription, points, tol: float = 1e-9):
        for p in points:
            if not contains_point(description, p):
                raise ValueError(f"sample point {p} lies outside the description")
        self.description = description
        self.points = [tuple(p) for p in points]
        self.tol = tol

    @classmethod
    def build(
        cls,
        description: SemialgebraicDescription,
        radius: float = 1.0,
        count: int = 128,
        extra_points: Sequence = (),
        tol: float = 1e-9,
    ) -> "PositivityOracle":
        d = description.dimension
        halton = qmc.Halton(d=d, scramble=False)
        raw = halton.random(4 * count)
        inside = []
        for row in raw:
            point = tuple(radius * (2.0 * float(v) - 1.0) for v in row)
            if contains_point(description, point):
                inside.append(point)
            if len(inside) >= count:
                break
        return cls(description, inside + [tuple(p) for p in extra_points], tol=tol)

    def min_value(self, p: Polynomial) -> float:
        if not self.points:
            raise ValueError("oracle has no sample points")
        return min(float(evaluate(p, pt)) for pt in self.points)

    def sup_abs(self, p: Polynomial) -> float:
        if not self.points:
            raise ValueError("oracle has no sample points")
        return max(abs(float(evaluate(p, pt))) for pt in self.points)

    def nonnegative(self, p: Polynomial) -> bool:
        return self.min_value(p) >= -self.tol
