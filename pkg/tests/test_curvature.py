import numpy as np
import pytest

from alemass.errors import DomainError
from alemass.geom.catalog import build_metric
from alemass.geom.curvature import christoffel, curvature_gate, ricci_tensor, scalar_curvature
from alemass.geom.potentials import burns_potential, flat_potential, potential_metric_field


def test_flat_space_is_flat():
    fld = potential_metric_field(flat_potential())
    x = np.array([[2.0, 0.5, -1.0, 0.3]])
    assert np.allclose(christoffel(fld, x), 0.0)
    assert abs(scalar_curvature(fld, x[0])) < 1e-12


def test_burns_is_scalar_flat():
    fld = potential_metric_field(burns_potential(0.5))
    x = np.array([[3.0, 0.0, 0.0, 0.0], [1.0, 2.0, -1.5, 0.5]])
    assert np.all(np.abs(scalar_curvature(fld, x)) < 1e-6)


def test_eguchi_hanson_is_ricci_flat():
    fld = build_metric("eguchi_hanson:a=1", gate=False)
    x = np.array([[2.0, 0.3, -0.4, 1.0]])
    assert np.allclose(ricci_tensor(fld, x), 0.0, atol=1e-6)


def test_conformal_metric_has_curvature():
    fld = build_metric("conformal:c=1")
    ok, worst = curvature_gate(fld, np.geomspace(1.5, 100.0, 5))
    assert not ok
    assert worst > 1e-3


def test_curvature_stencil_near_inner_radius_raises():
    fld = potential_metric_field(burns_potential(0.5))
    with pytest.raises(DomainError, match="stencil"):
        ricci_tensor(fld, [1.0001, 0.0, 0.0, 0.0])


def test_reduced_steps_fit_next_to_the_inner_radius():
    fld = potential_metric_field(burns_potential(0.5))
    x = [1.0002, 0.0, 0.0, 0.0]
    with pytest.raises(DomainError, match="stencil"):
        scalar_curvature(fld, x)
    assert abs(scalar_curvature(fld, x, scale=0.25)) < 1e-6
