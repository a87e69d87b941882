import math

import numpy as np
import pytest

from alemass.errors import DomainError
from alemass.geom.potentials import OMEGA0, burns_potential
from alemass.moser.flow import (
    PerturbationSpec,
    check_perturbation,
    cutoff,
    equivariance_defect,
    falloff_fit,
    find_safety_radius,
    integrate_flow,
    moser_field,
    pfaffian,
    potential_spec,
    pullback_residual,
    pullback_residuals,
    tangential_spec,
    zero_spec,
)
from alemass.moser.primitive import TangentialPerturbation


def _axis_seeds(radii):
    return np.array([[r, 0.0, 0.0, 0.0] for r in radii])


def _burns_exact(c, x):
    rho = np.linalg.norm(x, axis=-1, keepdims=True)
    return x * np.sqrt(1.0 - c / rho**2)


def test_pfaffian_and_cutoff():
    assert pfaffian(OMEGA0) == pytest.approx(1.0)
    assert cutoff(1.0, 3.0) == 0.0
    assert cutoff(1.75, 3.0) == pytest.approx(0.5)
    assert cutoff(10.0, 3.0) == 1.0


def test_zero_perturbation_gives_identity():
    spec = zero_spec(2.0)
    seeds = _axis_seeds([5.0, 50.0])
    flow = integrate_flow(spec, seeds, 16)
    assert np.array_equal(flow.images, seeds)
    wide = integrate_flow(spec, _axis_seeds(np.geomspace(5, 500, 4)), 4, with_jacobian=True)
    fit = falloff_fit(wide, 1.0)
    assert fit.passed and fit.inconclusive


def test_safety_radius_must_exceed_working_radius():
    spec = zero_spec(2.0)
    with pytest.raises(DomainError):
        PerturbationSpec(spec.omega, spec.theta, 2.0, 2.5)


def test_burns_flow_matches_closed_form():
    c = 0.5
    spec = potential_spec(burns_potential(c), 2.0, 3.0)
    seeds = np.array([[10.0, 0.0, 0.0, 0.0], [0.0, 0.0, 20.0, 0.0], [3.0, 2.0, -1.0, 4.0]])
    flow = integrate_flow(spec, seeds, 64)
    assert np.allclose(flow.images, _burns_exact(c, seeds), atol=1e-9)


def test_rk4_error_decreases_at_fourth_order():
    c = 3.0
    spec = potential_spec(burns_potential(c), 2.1, 3.1)
    seed = _axis_seeds([3.2])
    exact = _burns_exact(c, seed)
    errs = [
        float(np.max(np.abs(integrate_flow(spec, seed, n).images - exact))) for n in (8, 16, 32)
    ]
    assert math.log2(errs[0] / errs[1]) > 3.5
    assert math.log2(errs[1] / errs[2]) > 3.5


def test_field_below_working_radius_raises():
    spec = potential_spec(burns_potential(0.5), 2.0, 3.0)
    with pytest.raises(DomainError, match="working radius"):
        moser_field(spec, [1.8, 0.0, 0.0, 0.0], 0.5)
    assert np.allclose(moser_field(spec, [1.2, 0.0, 0.0, 0.0], 0.5), 0.0)


def test_burns_perturbation_diagnostics():
    spec = potential_spec(burns_potential(0.5), 2.0, 3.0, group_generator=-np.eye(4))
    assert check_perturbation(spec).passed
    seeds = _axis_seeds(np.geomspace(10.0, 1000.0, 5))
    flow = integrate_flow(spec, seeds, 64, with_jacobian=True)
    fit = falloff_fit(flow, spec.epsilon)
    assert fit.passed
    assert fit.displacement_slope == pytest.approx(-1.0, abs=0.05)
    assert fit.jacobian_slope == pytest.approx(-2.0, abs=0.1)
    assert pullback_residual(flow, spec) < 1e-6
    assert equivariance_defect(spec, seeds[:2], 32) < 1e-12


def test_tangential_family_displacement_slope():
    pert = TangentialPerturbation(0.2, 0.5)
    spec = tangential_spec(pert, 2.0, 3.5)
    assert spec.epsilon == pytest.approx(0.5)
    assert check_perturbation(spec).passed
    flow = integrate_flow(spec, _axis_seeds(np.geomspace(20.0, 2000.0, 5)), 64, with_jacobian=True)
    fit = falloff_fit(flow, spec.epsilon)
    assert fit.displacement_slope == pytest.approx(-0.5, abs=0.1)
    assert fit.passed


def test_find_safety_radius_for_small_perturbation():
    spec = potential_spec(burns_potential(0.5), 2.0, 3.5)
    assert find_safety_radius(spec) == pytest.approx(3.0)


def test_seeds_inside_safety_radius_are_rejected():
    spec = potential_spec(burns_potential(0.5), 2.0, 3.0)
    with pytest.raises(DomainError, match="safety radius"):
        integrate_flow(spec, _axis_seeds([2.5]), 8)


def test_falloff_fit_needs_seed_span():
    spec = potential_spec(burns_potential(0.5), 2.0, 3.0)
    flow = integrate_flow(spec, _axis_seeds([10.0, 20.0, 40.0]), 8, with_jacobian=True)
    with pytest.raises(DomainError, match="decades"):
        falloff_fit(flow, 1.0)


def test_pullback_residuals_are_per_seed():
    spec = potential_spec(burns_potential(0.5), 2.0, 3.0)
    flow = integrate_flow(spec, _axis_seeds([5.0, 50.0, 500.0]), 32, with_jacobian=True)
    res = pullback_residuals(flow, spec)
    assert res.shape == (3,)
    assert np.all(res >= 0.0)
    assert pullback_residual(flow, spec) == float(np.max(res))


def test_flow_composes_over_split_time_interval():
    spec = potential_spec(burns_potential(0.5), 2.0, 3.0)
    seeds = np.array([[4.0, 0.0, 0.0, 0.0], [1.0, -3.0, 2.0, 5.0]])
    first = integrate_flow(spec, seeds, 32, t_range=(0.0, 0.5))
    second = integrate_flow(spec, first.images, 32, t_range=(0.5, 1.0), check_start=False)
    whole = integrate_flow(spec, seeds, 64)
    assert np.allclose(second.images, whole.images, rtol=0.0, atol=1e-12)


def test_pullback_residual_shrinks_as_steps_double():
    spec = potential_spec(burns_potential(3.0), 2.1, 3.1)
    seeds = _axis_seeds([3.2, 6.0])
    res = [
        pullback_residual(integrate_flow(spec, seeds, n, with_jacobian=True), spec)
        for n in (32, 64, 128, 256, 512)
    ]
    assert res[-1] <= res[0] + 1e-8
    assert res[-1] < 1e-6
