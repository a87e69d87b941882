import numpy as np
import pytest

from alemass.errors import DomainError
from alemass.geom.catalog import build_metric
from alemass.geom.chart import (
    AsymptoticChart,
    MetricField,
    check_positive_definite,
    eval_metric,
    metric_derivatives,
    rotate_metric,
    step_size,
    unitary_pushforward_defect,
)
from alemass.geom.potentials import burns_potential, potential_metric_field
from alemass.orbifold.lens import lens_rotation


def _pts(rho, n=6, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 4))
    return rho * v / np.linalg.norm(v, axis=1, keepdims=True)


def test_chart_rejects_bad_parameters():
    with pytest.raises(DomainError):
        AsymptoticChart(inner_radius=0.0)
    with pytest.raises(DomainError):
        AsymptoticChart(group_order=0)
    with pytest.raises(DomainError):
        AsymptoticChart(dimension=6)


def test_analytic_mode_needs_derivative():
    with pytest.raises(DomainError):
        MetricField(chart=AsymptoticChart(), metric=lambda x: np.eye(4))


def test_eval_below_inner_radius_raises():
    fld = potential_metric_field(burns_potential(0.5))
    with pytest.raises(DomainError, match="inner radius"):
        eval_metric(fld, [0.5, 0.0, 0.0, 0.0])


def test_step_size_floor():
    assert step_size(1e-3) == pytest.approx(1e-6)
    assert step_size(10.0) == pytest.approx(1e-3)


def test_central_matches_analytic_derivatives():
    fld = potential_metric_field(burns_potential(0.5))
    x = _pts(5.0)
    d_an = metric_derivatives(fld, x)
    d_fd = metric_derivatives(fld, x, mode="central")
    assert np.allclose(d_an, d_fd, atol=1e-7)


def test_central_stencil_leaving_domain_raises():
    fld = potential_metric_field(burns_potential(0.5)).with_mode("central")
    with pytest.raises(DomainError, match="stencil"):
        metric_derivatives(fld, [1.00001, 0.0, 0.0, 0.0])


def test_metric_is_symmetric_positive_definite():
    fld = build_metric("eguchi_hanson:a=1")
    x = _pts(1.2, n=20)
    g = eval_metric(fld, x)
    assert np.allclose(g, np.swapaxes(g, -1, -2))
    assert check_positive_definite(fld, x)


def test_unitary_rotation_leaves_radial_kahler_metric_unchanged():
    fld = potential_metric_field(burns_potential(0.5))
    R = lens_rotation(3, 1)
    rot = rotate_metric(fld, R)
    x = _pts(4.0)
    assert np.allclose(eval_metric(rot, x), eval_metric(fld, x), atol=1e-13)
    assert np.allclose(metric_derivatives(rot, x), metric_derivatives(fld, x), atol=1e-13)


def test_rotate_metric_requires_orthogonal_matrix():
    fld = potential_metric_field(burns_potential(0.5))
    with pytest.raises(DomainError):
        rotate_metric(fld, 2.0 * np.eye(4))


def test_pushforward_defect_for_lens_action():
    fld = potential_metric_field(burns_potential(0.5))
    assert unitary_pushforward_defect(fld, lens_rotation(5, 2), _pts(3.0)) < 1e-12
