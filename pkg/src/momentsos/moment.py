"""Truncated moment sequences, the Riesz functional, and moment matrices.

A truncated sequence stores y_alpha for every |alpha| <= 2n.  The Riesz
functional extends it linearly to polynomials of degree <= 2n.  The moment
matrix M_n has entries y_{alpha+beta} over the monomial basis of degree
<= n; localizing matrices twist the entries by a shift polynomial g and
detect support outside {g >= 0}.  Sequences ingested from rational data
stay exact; float data is kept as binary64 with the mode recorded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .numerics import is_psd
from .polycore import (
    MonomialBasis,
    Polynomial,
    grlex_key,
    monomial_basis,
)


class InsufficientDegreeError(ValueError):
    """The sequence does not extend far enough for the requested object."""


class IncompleteSequenceError(ValueError):
    """A moment is missing below the declared degree."""


def _exponents_up_to(d: int, degree: int):
    return monomial_basis(d, degree).exponents


class TruncatedMomentSequence:
    """Map alpha -> y_alpha, complete through total degree ``degree``."""

    __slots__ = ("dimension", "degree", "values", "exact")

    def __init__(self, dimension: int, degree: int, values: Mapping):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        vals = {}
        exact = True
        for alpha in _exponents_up_to(dimension, degree):
            if alpha not in values:
                raise IncompleteSequenceError(f"missing moment for exponent {alpha}")
            v = values[alpha]
            if isinstance(v, (int, Fraction)):
                vals[alpha] = Fraction(v)
            else:
                vals[alpha] = float(v)
                exact = False
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "exact", exact)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("TruncatedMomentSequence is immutable")

    @property
    def mass(self):
        return self.values[(0,) * self.dimension]

    @property
    def zero_mass(self) -> bool:
        return self.mass == 0

    def __getitem__(self, alpha):
        return self.values[tuple(alpha)]

    def __eq__(self, other):
        return (
            isinstance(other, TruncatedMomentSequence)
            and self.dimension == other.dimension
            and self.degree == other.degree
            and self.values == other.values
        )

    def __repr__(self):
        return (
            f"TruncatedMomentSequence(d={self.dimension}, degree={self.degree}, "
            f"mass={self.mass}, exact={self.exact})"
        )

    # -- serialization -------------------------------------------------

    def to_json_dict(self) -> dict:
        moments = []
        for alpha in sorted(self.values, key=grlex_key):
            v = self.values[alpha]
            moments.append(
                {"alpha": list(alpha), "y": str(v) if isinstance(v, Fraction) else v}
            )
        return {"d": self.dimension, "degree": self.degree, "moments": moments}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data) -> "TruncatedMomentSequence":
        d = int(data["d"])
        values = {}
        for item in data["moments"]:
            y = item["y"]
            values[tuple(int(a) for a in item["alpha"])] = (
                Fraction(y) if isinstance(y, str) else float(y)
            )
        return cls(d, int(data["degree"]), values)

    @classmethod
    def from_json(cls, text: str) -> "TruncatedMomentSequence":
        return cls.from_json_dict(json.loads(text))


def sequence_from_list(values: Sequence, degree: Optional[int] = None) -> TruncatedMomentSequence:
    """One-dimensional convenience: values[k] = y_k for k = 0..degree."""
    if degree is None:
        degree = len(values) - 1
    if len(values) < degree + 1:
        raise InsufficientDegreeError(
            f"need {degree + 1} scalars for degree {degree}, got {len(values)}"
        )
    return TruncatedMomentSequence(
        1, degree, {(k,): values[k] for k in range(degree + 1)}
    )


def riesz_apply(y: TruncatedMomentSequence, p: Polynomial):
    """L_y(p) = sum_alpha p_alpha y_alpha; exact when both sides are exact."""
    if p.dimension != y.dimension:
        raise ValueError(f"dimension mismatch: {p.dimension} vs {y.dimension}")
    if not p.is_zero and p.total_degree > y.degree:
        raise InsufficientDegreeError(
            f"polynomial degree {p.total_degree} exceeds sequence degree {y.degree}"
        )
    if y.exact:
        return sum((c * y.values[alpha] for alpha, c in p.terms.items()), Fraction(0))
    return float(sum(float(c) * float(y.values[alpha]) for alpha, c in p.terms.items()))


@dataclass(frozen=True)
class MomentMatrix:
    """M_{alpha,beta} = y_{alpha+beta} over the monomial basis of order n."""

    order: int
    basis: MonomialBasis
    array: np.ndarray
    exact_entries: Optional[tuple] = None  # tuple of tuples of Fraction


@dataclass(frozen=True)
class LocalizingMatrix:
    """Entries L_y(g * x^{alpha+beta}) over the basis of order k."""

    shift: Polynomial
    order: int
    basis: MonomialBasis
    array: np.ndarray
    exact_entries: Optional[tuple] = None


def moment_matrix(y: TruncatedMomentSequence, n: int) -> MomentMatrix:
    if 2 * n > y.degree:
        raise InsufficientDegreeError(
            f"moment matrix of order {n} needs degree {2 * n}, sequence has {y.degree}"
        )
    basis = monomial_basis(y.dimension, n)
    size = len(basis)
    arr = np.empty((size, size))
    exact_rows = [] if y.exact else None
    for i, alpha in enumerate(basis.exponents):
        row = []
        for j, beta in enumerate(basis.exponents):
            v = y.values[tuple(a + b for a, b in zip(alpha, beta))]
            arr[i, j] = float(v)
            if exact_rows is not None:
                row.append(v)
        if exact_rows is not None:
            exact_rows.append(tuple(row))
    return MomentMatrix(
        order=n,
        basis=basis,
        array=arr,
        exact_entries=tuple(exact_rows) if exact_rows is not None else None,
    )


def localizing_matrix(y: TruncatedMomentSequence, g: Polynomial, k: int) -> LocalizingMatrix:
    if g.dimension != y.dimension:
        raise ValueError(f"dimension mismatch: {g.dimension} vs {y.dimension}")
    g_deg = 0 if g.is_zero else g.total_degree
    if 2 * k + g_deg > y.degree:
        raise InsufficientDegreeError(
            f"localizing matrix needs degree {2 * k + g_deg}, sequence has {y.degree}"
        )
    basis = monomial_basis(y.dimension, k)
    size = len(basis)
    arr = np.empty((size, size))
    exact_rows = [] if y.exact else None
    for i, alpha in enumerate(basis.exponents):
        row = []
        for j, beta in enumerate(basis.exponents):
            shift = tuple(a + b for a, b in zip(alpha, beta))
            if y.exact:
                v = sum(
                    (c * y.values[tuple(s + e for s, e in zip(shift, gamma))]
                     for gamma, c in g.terms.items()),
                    Fraction(0),
                )
            else:
                v = sum(
                    float(c) * float(y.values[tuple(s + e for s, e in zip(shift, gamma))])
                    for gamma, c in g.terms.items()
                )
            arr[i, j] = float(v)
            if exact_rows is not None:
                row.append(v)
        if exact_rows is not None:
            exact_rows.append(tuple(row))
    return LocalizingMatrix(
        shift=g,
        order=k,
        basis=basis,
        array=arr,
        exact_entries=tuple(exact_rows) if exact_rows is not None else None,
    )


def hankel(scalars: Sequence, n: int) -> MomentMatrix:
    """H_{ij} = s_{i+j} for a one-dimensional scalar list."""
    if len(scalars) < 2 * n + 1:
        raise InsufficientDegreeError(
            f"hankel of order {n} needs {2 * n + 1} scalars, got {len(scalars)}"
        )
    y = sequence_from_list(list(scalars)[: 2 * n + 1])
    return moment_matrix(y, n)


@dataclass(frozen=True)
class FlatnessReport:
    n: int
    rank_n: int
    rank_n1: int
    psd_n: bool
    psd_n1: bool
    flat: bool


def flatness_check(y: TruncatedMomentSequence, tol: float = 1e-7) -> FlatnessReport:
    """Compare rank M_n against rank M_{n+1} where 2n + 2 = y.degree.

    Both ranks use one absolute threshold, tol * sigma_max(M_{n+1}), so the
    comparison never mixes scales.  Flat means equal ranks and both
    matrices positive semidefinite.
    """
    if y.degree < 2 or y.degree % 2 != 0:
        raise InsufficientDegreeError(
            f"flatness needs an even degree >= 2, sequence has {y.degree}"
        )
    n = (y.degree - 2) // 2
    M_n = moment_matrix(y, n).array
    M_n1 = moment_matrix(y, n + 1).array
    sigma_max = float(np.max(np.abs(np.linalg.eigvalsh(M_n1))))
    if sigma_max == 0.0:
        rank_n = rank_n1 = 0
    else:
        thresh = tol * sigma_max
        rank_n = int(np.sum(np.abs(np.linalg.eigvalsh(M_n)) > thresh))
        rank_n1 = int(np.sum(np.abs(np.linalg.eigvalsh(M_n1)) > thresh))
    psd_n = is_psd(M_n, tol)
    psd_n1 = is_psd(M_n1, tol)
    return FlatnessReport(
        n=n,
        rank_n=rank_n,
        rank_n1=rank_n1,
        psd_n=psd_n,
        psd_n1=psd_n1,
        flat=bool(rank_n == rank_n1 and psd_n and psd_n1),
    )
