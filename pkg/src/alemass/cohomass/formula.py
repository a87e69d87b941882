from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import DomainError
from ..geom.potentials import RadialKahlerPotential, reduced_sphere_area

DEFAULT_EQ_TOL = 1e-6
DEFAULT_CROSSCHECK_TOL = 1e-2

# m = 2 coefficients of the mass formula: -(1/3pi) <c1, [omega]> + (1/12pi^2) int s
CHERN_COEFF = 1.0 / (3.0 * math.pi)
SCALAR_COEFF = 1.0 / (12.0 * math.pi**2)


@dataclass(frozen=True)
class BlowupModel:
    k: int
    areas: Tuple[float, ...]
    chern_pairing: float
    scalar_integral: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "areas", tuple(float(a) for a in self.areas))
        if self.k < 0 or self.k != len(self.areas):
            raise DomainError(f"k={self.k} does not match {len(self.areas)} areas")
        bad = [a for a in self.areas if not (a > 0)]
        if bad:
            raise DomainError(f"Exceptional areas must be positive, got {bad}")
        if not math.isfinite(self.chern_pairing) or not math.isfinite(self.scalar_integral):
            raise DomainError("chern_pairing and scalar_integral must be finite")

    @classmethod
    def from_ae_blowup(cls, areas: Sequence[float], scalar_integral: float = 0.0) -> "BlowupModel":
        """AE blow-up of C^2 at k points: -c1 is dual to the sum of the exceptional classes."""
        areas = tuple(float(a) for a in areas)
        return cls(
            k=len(areas),
            areas=areas,
            chern_pairing=-math.fsum(areas),
            scalar_integral=scalar_integral,
        )


@dataclass(frozen=True)
class DivisorData:
    divisors: Tuple[Tuple[int, float], ...]

    def __post_init__(self) -> None:
        clean = tuple((int(n), float(v)) for n, v in self.divisors)
        for n, v in clean:
            if n < 1:
                raise DomainError(f"Divisor multiplicity must be >= 1, got {n}")
            if not (v > 0):
                raise DomainError(f"Divisor volume must be positive, got {v}")
        object.__setattr__(self, "divisors", clean)

    @property
    def weighted_volume(self) -> float:
        return math.fsum(n * v for n, v in self.divisors)


@dataclass(frozen=True)
class PenroseResult:
    lower_bound: float
    satisfied: bool
    gap: float


@dataclass(frozen=True)
class PositiveMassResult:
    applies: bool
    satisfied: bool
    equality: bool


@dataclass(frozen=True)
class CrosscheckResult:
    lhs: float
    rhs: float
    rel_err: float
    passed: bool


def mass_formula(model: BlowupModel) -> float:
    """Mass from the Chern pairing and the total scalar curvature (complex dimension 2).

    In complex dimension m the Chern term carries (m-1)!/((2m-1) pi^(m-1)); only
    m = 2 is implemented.
    """
    return -CHERN_COEFF * model.chern_pairing + SCALAR_COEFF * model.scalar_integral


def penrose_check(
    mass: float, divisors: DivisorData, eq_tol: float = DEFAULT_EQ_TOL
) -> PenroseResult:
    if not math.isfinite(mass):
        raise DomainError(f"Mass must be finite, got {mass}")
    bound = CHERN_COEFF * divisors.weighted_volume
    return PenroseResult(lower_bound=bound, satisfied=mass >= bound - eq_tol, gap=mass - bound)


def positive_mass_check(
    mass: float,
    flat: bool,
    scalar_nonnegative: bool = True,
    group_order: int = 1,
    eq_tol: float = DEFAULT_EQ_TOL,
) -> PositiveMassResult:
    """Positive mass for trivial group and s >= 0: m >= 0, with m = 0 only for flat C^2.

    Outside those hypotheses the check does not apply and is reported as satisfied.
    """
    if not math.isfinite(mass):
        raise DomainError(f"Mass must be finite, got {mass}")
    if group_order < 1:
        raise DomainError(f"Group order must be >= 1, got {group_order}")
    if group_order != 1 or not scalar_nonnegative:
        return PositiveMassResult(applies=False, satisfied=True, equality=False)
    equality = abs(mass) <= eq_tol
    satisfied = equality if flat else mass > eq_tol
    return PositiveMassResult(applies=True, satisfied=satisfied, equality=equality)


def crosscheck_mass(
    field_mass: float,
    formula_mass: float,
    crosscheck_tol: float = DEFAULT_CROSSCHECK_TOL,
    zero_tol: float = 1e-6,
) -> CrosscheckResult:
    """Compare the boundary-integral mass with the formula value.

    When both sides are within ``zero_tol`` of zero the relative error is taken as 0.
    """
    scale = max(abs(field_mass), abs(formula_mass))
    if scale <= zero_tol:
        rel = 0.0
    else:
        rel = abs(field_mass - formula_mass) / scale
    return CrosscheckResult(
        lhs=field_mass, rhs=formula_mass, rel_err=rel, passed=rel <= crosscheck_tol
    )


def exceptional_area(
    pot: RadialKahlerPotential, radii: Sequence[float] | None = None, degree: int = 2
) -> float:
    """Area of the exceptional curve as the small-sphere limit of projected cycle areas.

    The area of the Hopf-projected cycle of S_rho is sampled at small radii and a
    polynomial in t = rho^2 is extrapolated to t = 0.
    """
    if radii is None:
        floor = math.sqrt(pot.domain_floor)
        r0 = max(1e-3, 10.0 * floor)
        radii = np.geomspace(r0, 8.0 * r0, 8)
    r = np.asarray(radii, dtype=float)
    if r.size <= degree:
        raise DomainError(f"Need more than {degree} radii to extrapolate the exceptional area")
    areas = reduced_sphere_area(pot, r)
    coeffs = np.polyfit(r**2, areas, degree)
    return float(coeffs[-1])


def blowup_from_potential(pot: RadialKahlerPotential, scalar_integral: float = 0.0) -> BlowupModel:
    """Single exceptional curve with the numerically computed area; k = 0 when it has none."""
    area = exceptional_area(pot)
    if abs(area) <= 1e-9:
        return BlowupModel.from_ae_blowup([], scalar_integral)
    return BlowupModel.from_ae_blowup([area], scalar_integral)


def divisors_from_model(model: BlowupModel) -> DivisorData:
    parts: List[Tuple[int, float]] = [(1, a) for a in model.areas]
    return DivisorData(tuple(parts))
