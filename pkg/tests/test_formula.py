import math

import numpy as np
import pytest

from alemass.cohomass.formula import (
    BlowupModel,
    DivisorData,
    blowup_from_potential,
    crosscheck_mass,
    divisors_from_model,
    exceptional_area,
    mass_formula,
    penrose_check,
    positive_mass_check,
)
from alemass.errors import DomainError
from alemass.geom.potentials import burns_potential, eguchi_hanson_potential, flat_potential


def test_single_blowup_mass():
    c = 0.5
    model = BlowupModel.from_ae_blowup([math.pi * c])
    assert model.k == 1
    assert mass_formula(model) == pytest.approx(c / 3.0)


def test_scalar_term_contributes():
    model = BlowupModel.from_ae_blowup([], scalar_integral=12.0 * math.pi**2)
    assert mass_formula(model) == pytest.approx(1.0)


def test_model_validation():
    with pytest.raises(DomainError):
        BlowupModel(k=2, areas=(1.0,), chern_pairing=0.0)
    with pytest.raises(DomainError):
        BlowupModel.from_ae_blowup([-1.0])


def test_penrose_equality_case_is_satisfied():
    c = 0.5
    res = penrose_check(c / 3.0, DivisorData(((1, math.pi * c),)))
    assert res.satisfied
    assert res.gap == pytest.approx(0.0, abs=1e-12)


def test_penrose_violation_is_reported():
    res = penrose_check(0.1, DivisorData(((1, math.pi * 0.5),)))
    assert not res.satisfied
    assert res.gap < 0


def test_divisor_validation():
    with pytest.raises(DomainError):
        DivisorData(((0, 1.0),))
    with pytest.raises(DomainError):
        DivisorData(((1, 0.0),))


def test_crosscheck_relative_error():
    assert crosscheck_mass(1.0, 1.005).passed
    assert not crosscheck_mass(1.0, 1.05).passed
    both_zero = crosscheck_mass(1e-9, -1e-9)
    assert both_zero.rel_err == 0.0 and both_zero.passed


def test_exceptional_areas():
    assert exceptional_area(burns_potential(0.5)) == pytest.approx(math.pi * 0.5, abs=1e-8)
    assert exceptional_area(eguchi_hanson_potential(1.0)) == pytest.approx(math.pi, abs=1e-8)
    assert abs(exceptional_area(flat_potential())) < 1e-9


def test_blowup_from_potential():
    model = blowup_from_potential(burns_potential(0.5))
    assert model.k == 1
    assert mass_formula(model) == pytest.approx(0.5 / 3.0, rel=1e-8)
    assert blowup_from_potential(flat_potential()).k == 0
    assert divisors_from_model(model).weighted_volume == pytest.approx(math.pi * 0.5, rel=1e-8)


def test_positive_mass_flat_is_the_equality_case():
    res = positive_mass_check(0.0, flat=True)
    assert res.applies and res.satisfied and res.equality
    assert not positive_mass_check(0.3, flat=True).satisfied


def test_positive_mass_is_strict_for_burns():
    c = 0.5
    mass = mass_formula(blowup_from_potential(burns_potential(c)))
    res = positive_mass_check(mass, flat=False)
    assert res.applies and res.satisfied and not res.equality
    assert not positive_mass_check(0.0, flat=False).satisfied


def test_positive_mass_violation_and_scope():
    assert not positive_mass_check(-0.2, flat=False).satisfied
    assert not positive_mass_check(-0.2, flat=True).satisfied
    # negative mass on a quotient or with negative scalar curvature is outside the statement
    assert not positive_mass_check(-0.2, flat=False, group_order=2).applies
    assert not positive_mass_check(-0.2, flat=False, scalar_nonnegative=False).applies
    with pytest.raises(DomainError):
        positive_mass_check(float("nan"), flat=False)


def test_mass_formula_is_linear():
    rng = np.random.default_rng(7)
    for _ in range(20):
        c1, c2, s1, s2, lam = rng.normal(size=5)
        a = BlowupModel(0, (), c1, s1)
        b = BlowupModel(0, (), c2, s2)
        mix = BlowupModel(0, (), c1 + lam * c2, s1 + lam * s2)
        assert mass_formula(mix) == pytest.approx(
            mass_formula(a) + lam * mass_formula(b), abs=1e-12
        )


def test_penrose_gap_equals_scalar_term_when_divisors_match_areas():
    areas = [0.7, 1.9, 3.2]
    for scalar in (0.0, 5.0, 40.0):
        model = BlowupModel.from_ae_blowup(areas, scalar_integral=scalar)
        res = penrose_check(mass_formula(model), divisors_from_model(model))
        assert res.gap == pytest.approx(scalar / (12.0 * math.pi**2), abs=1e-12)
        assert res.satisfied


def test_positive_scalar_curvature_opens_a_penrose_gap():
    model = BlowupModel.from_ae_blowup([math.pi * 0.5], scalar_integral=1e-3)
    res = penrose_check(mass_formula(model), divisors_from_model(model))
    assert res.gap > 0
