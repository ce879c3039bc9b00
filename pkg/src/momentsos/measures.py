"""Atomic measures, their moments, and determinacy diagnostics.

Atomic measures serve two roles: test oracles (their moments are exact
rational sums sum_i w_i x_i^alpha) and the output format of atom
extraction.  The diagnostics are heuristics over a finite moment window
and say so in their labels: divergence of sum_n s_{2n}^(-1/(2n)) cannot be
decided from finitely many terms, so the report classifies the observed
decay and always ships the raw terms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .cones import SemialgebraicDescription, contains_point
from .moment import TruncatedMomentSequence
from .polycore import evaluate, monomial_basis

DIVERGENCE_CONSISTENT = "divergence-consistent"
DETERMINATE_CONSISTENT = "determinate-consistent"
INCONCLUSIVE = "inconclusive"

# observed log-log slope of the terms must stay above this for the
# divergence-consistent label: terms decaying like 1/n are the boundary
SLOPE_THRESHOLD = -1.1


class NonpositiveMomentError(ValueError):
    """Even moments must be positive for the decay diagnostic."""


class AtomOutsideSupportError(ValueError):
    """An atom violates the claimed support description."""


class AtomicMeasure:
    """Finitely many distinct points with positive weights."""

    __slots__ = ("atoms",)

    def __init__(self, atoms: Sequence):
        cleaned = []
        seen = set()
        dimension = None
        for point, weight in atoms:
            point = tuple(point)
            if dimension is None:
                dimension = len(point)
            elif len(point) != dimension:
                raise ValueError("atoms live in different dimensions")
            if point in seen:
                raise ValueError(f"duplicate atom {point}")
            seen.add(point)
            if not weight > 0:
                raise ValueError(f"weight {weight} at {point} is not positive")
            cleaned.append((point, weight))
        object.__setattr__(self, "atoms", tuple(cleaned))

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("AtomicMeasure is immutable")

    def __len__(self):
        return len(self.atoms)

    def __eq__(self, other):
        return isinstance(other, AtomicMeasure) and self.atoms == other.atoms

    @property
    def dimension(self) -> int:
        if not self.atoms:
            raise ValueError("empty measure has no dimension")
        return len(self.atoms[0][0])

    @property
    def mass(self):
        return sum((w for _, w in self.atoms), Fraction(0)) if self._exact() else sum(
            float(w) for _, w in self.atoms
        )

    def _exact(self) -> bool:
        return all(
            isinstance(w, (int, Fraction))
            and all(isinstance(x, (int, Fraction)) for x in point)
            for point, w in self.atoms
        )

    def to_json_dict(self) -> dict:
        return {
            "atoms": [
                {"x": [float(x) for x in point], "w": float(w)}
                for point, w in self.atoms
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data) -> "AtomicMeasure":
        atoms = []
        for item in data.get("atoms", []):
            point = tuple(
                Fraction(x) if isinstance(x, str) else float(x) for x in item["x"]
            )
            w = item["w"]
            atoms.append((point, Fraction(w) if isinstance(w, str) else float(w)))
        return cls(atoms)

    @classmethod
    def from_json(cls, text: str) -> "AtomicMeasure":
        return cls.from_json_dict(json.loads(text))


def moments(mu: AtomicMeasure, degree: int, dimension: Optional[int] = None
            ) -> TruncatedMomentSequence:
    """y_alpha = sum_i w_i x_i^alpha through the requested degree.

    Exact when atoms and weights are rational.  The empty measure yields
    the zero sequence, flagged by its zero mass.
    """
    if len(mu) == 0:
        if dimension is None:
            raise ValueError("empty measure needs an explicit dimension")
        d = dimension
    else:
        d = mu.dimension
    exact = len(mu) == 0 or mu._exact()
    values = {}
    for alpha in monomial_basis(d, degree).exponents:
        if exact:
            total = Fraction(0)
            for point, w in mu.atoms:
                term = Fraction(w)
                for x, a in zip(point, alpha):
                    term *= Fraction(x) ** a
                total += term
        else:
            total = 0.0
            for point, w in mu.atoms:
                term = float(w)
                for x, a in zip(point, alpha):
                    term *= float(x) ** a
                total += term
        values[alpha] = total
    return TruncatedMomentSequence(d, degree, values)


@dataclass(frozen=True)
class CarlemanReport:
    terms: tuple
    partial_sums: tuple
    slope: Optional[float]
    classification: str


def _log(value) -> float:
    if isinstance(value, Fraction):
        return math.log(value.numerator) - math.log(value.denominator)
    if isinstance(value, int):
        return math.log(value)
    v = float(value)
    if not math.isfinite(v):
        raise NonpositiveMomentError(f"even moment {value} is not finite")
    return math.log(v)


def carleman_diagnostic(even_moments: Sequence) -> CarlemanReport:
    """Partial sums of s_{2n}^(-1/(2n)) with a decay classification.

    The label is divergence-consistent when the fitted log-log slope of
    the terms stays above the 1/n boundary over the observed window; this
    is a window heuristic, never a proof, hence the raw terms travel with
    the report.
    """
    if not even_moments:
        raise NonpositiveMomentError("need at least one even moment")
    terms = []
    for n, s in enumerate(even_moments, start=1):
        if isinstance(s, (int, Fraction)):
            positive = s > 0
        else:
            positive = math.isfinite(float(s)) and float(s) > 0
        if not positive:
            raise NonpositiveMomentError(f"even moment s_{2 * n} = {s} must be positive")
        terms.append(math.exp(-_log(s) / (2 * n)))
    sums = []
    running = 0.0
    for t in terms:
        running += t
        sums.append(running)
    if len(terms) >= 2:
        xs = [math.log(n) for n in range(1, len(terms) + 1)]
        ys = [math.log(t) for t in terms]
        xbar = sum(xs) / len(xs)
        ybar = sum(ys) / len(ys)
        denom = sum((x - xbar) ** 2 for x in xs)
        slope = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / denom
        classification = (
            DIVERGENCE_CONSISTENT if slope >= SLOPE_THRESHOLD else INCONCLUSIVE
        )
    else:
        slope = None
        classification = INCONCLUSIVE
    return CarlemanReport(
        terms=tuple(terms),
        partial_sums=tuple(sums),
        slope=slope,
        classification=classification,
    )


@dataclass(frozen=True)
class PetersenReport:
    coordinate_reports: tuple   # CarlemanReport or None per coordinate
    point_mass_fast_path: tuple  # True where the marginal is a mass at zero
    verdict: str


def petersen_marginals(mu: AtomicMeasure, n_terms: int = 10) -> PetersenReport:
    """Run the decay diagnostic on every one-dimensional marginal.

    The overall verdict is determinate-consistent only when every marginal
    either collapses to a point mass at zero (compact fast path) or is
    divergence-consistent.
    """
    if len(mu) == 0:
        raise ValueError("empty measure has no marginals")
    d = mu.dimension
    reports = []
    fast = []
    all_ok = True
    for j in range(d):
        coords = [(point[j], w) for point, w in mu.atoms]
        if all(x == 0 for x, _ in coords):
            reports.append(None)
            fast.append(True)
            continue
        fast.append(False)
        evens = []
        for n in range(1, n_terms + 1):
            s = sum(Fraction(x) ** (2 * n) * Fraction(w) for x, w in coords)
            evens.append(s)
        report = carleman_diagnostic(evens)
        reports.append(report)
        if report.classification != DIVERGENCE_CONSISTENT:
            all_ok = False
    return PetersenReport(
        coordinate_reports=tuple(reports),
        point_mass_fast_path=tuple(fast),
        verdict=DETERMINATE_CONSISTENT if all_ok else INCONCLUSIVE,
    )


@dataclass(frozen=True)
class BoundReport:
    riesz_abs: float
    mass: float
    sup_abs: float
    bound: float
    passed: bool


def supnorm_bound_check(mu: AtomicMeasure, p, K: SemialgebraicDescription,
                        sample_points: Sequence = (), tol: float = 1e-9) -> BoundReport:
    """Check |L_mu(p)| <= L_mu(1) * max |p| over atoms and sample points.

    Every atom must satisfy the description; sample points enlarge the
    sup estimate on the safe side.
    """
    for point, _ in mu.atoms:
        float_point = tuple(float(x) for x in point)
        if not contains_point(K, float_point, tol=1e-9):
            raise AtomOutsideSupportError(f"atom {float_point} violates the description")
    values = []
    riesz = 0.0
    mass = 0.0
    for point, w in mu.atoms:
        v = float(evaluate(p, tuple(float(x) for x in point)))
        values.append(abs(v))
        riesz += float(w) * v
        mass += float(w)
    for point in sample_points:
        values.append(abs(float(evaluate(p, tuple(float(x) for x in point)))))
    sup_abs = max(values) if values else 0.0
    bound = mass * sup_abs
    return BoundReport(
        riesz_abs=abs(riesz),
        mass=mass,
        sup_abs=sup_abs,
        bound=bound,
        passed=abs(riesz) <= bound + tol,
    )
