import numpy as np
import pytest

from alemass.cohomass.formula import blowup_from_potential, crosscheck_mass, mass_formula
from alemass.errors import DomainError
from alemass.geom.catalog import build_metric
from alemass.geom.chart import eval_metric, rotate_metric
from alemass.geom.potentials import burns_potential
from alemass.mass.chrusciel import (
    check_schedule,
    chrusciel_mass,
    default_schedule,
    extrapolate,
    mass_integrand_at,
)
from alemass.mass.quadrature import s3_rule


def test_default_schedule():
    assert default_schedule(1.0) == [8.0 * 2**k for k in range(8)]


def test_conformal_mass_is_exact():
    est = chrusciel_mass(build_metric("conformal:c=0.7"), rule=s3_rule(12))
    assert est.extrapolated_mass == pytest.approx(0.7, abs=1e-9)
    assert est.model == "constant"
    assert est.converged and not est.warning
    assert len(est.running) == len(est.samples)


def test_quotient_divides_mass_by_group_order():
    full = chrusciel_mass(build_metric("conformal:c=0.7"), rule=s3_rule(12))
    half = chrusciel_mass(build_metric("conformal:c=0.7 quotient:q=2,p=1"), rule=s3_rule(12))
    assert half.group_order == 2
    assert half.extrapolated_mass == pytest.approx(full.extrapolated_mass / 2.0, rel=1e-12)


def test_burns_mass_is_a_third_of_c():
    est = chrusciel_mass(build_metric("burns:c=0.5"), rule=s3_rule(12))
    assert est.extrapolated_mass == pytest.approx(0.5 / 3.0, abs=1e-8)


def test_eguchi_hanson_mass_vanishes():
    est = chrusciel_mass(build_metric("eguchi_hanson:a=1"), rule=s3_rule(12))
    assert abs(est.extrapolated_mass) < 1e-6
    assert est.converged


def test_slow_family_does_not_converge():
    est = chrusciel_mass(build_metric("slow:c=1"), rule=s3_rule(8))
    assert not est.converged
    assert est.fitted_decay < 0


def test_integrand_needs_stencil_margin():
    fld = build_metric("conformal:c=1")
    with pytest.raises(DomainError):
        mass_integrand_at(fld, 1.2)


def test_schedule_validation():
    with pytest.raises(DomainError):
        check_schedule([8.0, 16.0, 32.0])
    with pytest.raises(DomainError):
        check_schedule([8.0, 16.0, 16.0, 1000.0])
    with pytest.raises(DomainError):
        check_schedule([8.0, 16.0, 32.0, 64.0])


def test_extrapolate_recovers_power_law():
    r = np.array(default_schedule(1.0))
    fit = extrapolate(r, 1.0 + 2.0 * r**-1.5)
    assert fit.limit == pytest.approx(1.0, abs=1e-8)
    assert fit.kappa == pytest.approx(1.5, abs=1e-4)


def test_extrapolate_needs_three_samples():
    with pytest.raises(DomainError):
        extrapolate([8.0, 16.0], [1.0, 1.1])


def _random_rotation(seed: int) -> np.ndarray:
    q, r = np.linalg.qr(np.random.default_rng(seed).normal(size=(4, 4)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def test_integrand_is_invariant_under_generic_rotation():
    fld = build_metric("burns:c=0.5")
    R = _random_rotation(11)
    assert np.linalg.det(R) == pytest.approx(1.0)
    rot = rotate_metric(fld, R)
    x = np.array([[3.0, 1.0, -2.0, 0.5]])
    # R does not commute with the complex structure, so the coordinate expression changes
    assert not np.allclose(eval_metric(rot, x), eval_metric(fld, x), atol=1e-6)
    for rho in (10.0, 40.0):
        assert mass_integrand_at(rot, rho, s3_rule(12)) == pytest.approx(
            mass_integrand_at(fld, rho, s3_rule(12)), rel=1e-9
        )


def test_integrand_is_stable_when_quadrature_doubles():
    for spec in ("burns:c=0.5", "eguchi_hanson:a=1", "conformal:c=0.7"):
        fld = build_metric(spec)
        coarse = mass_integrand_at(fld, 16.0, s3_rule(8))
        fine = mass_integrand_at(fld, 16.0, s3_rule(16))
        assert abs(fine - coarse) <= 1e-6 * max(abs(fine), 1e-6)


@pytest.mark.parametrize("c", [0.3, 1.5])
def test_conformal_mass_for_other_coefficients(c):
    est = chrusciel_mass(build_metric(f"conformal:c={c}"), rule=s3_rule(12))
    assert est.extrapolated_mass == pytest.approx(c, abs=1e-9)


def test_burns_boundary_mass_matches_formula_for_small_c():
    c = 0.25
    est = chrusciel_mass(build_metric(f"burns:c={c}"), rule=s3_rule(12))
    formula = mass_formula(blowup_from_potential(burns_potential(c)))
    assert est.extrapolated_mass == pytest.approx(c / 3.0, abs=1e-8)
    assert formula == pytest.approx(c / 3.0, rel=1e-8)
    assert crosscheck_mass(est.extrapolated_mass, formula).passed
