import numpy as np
import pytest

from alemass.geom.potentials import J0
from alemass.orbifold.lens import (
    RootOfUnityMatrix,
    central_quotient,
    group_closure,
    is_free,
    lens_generator,
    lens_rotation,
)


def test_closure_of_lens_generator():
    elems = group_closure([lens_generator(5, 2)])
    assert len(elems) == 5
    assert is_free(elems)


def test_central_quotient():
    assert central_quotient([lens_generator(4, 1)]) == (4, 1)
    assert central_quotient([lens_generator(5, 2)]) == (1, 5)
    assert central_quotient([lens_generator(4, 3)]) == (2, 2)


def test_non_free_action_is_rejected():
    with pytest.raises(ValueError, match="unit eigenvalue"):
        lens_generator(6, 2)
    elems = group_closure([RootOfUnityMatrix.from_exponents(1, 0, 3)])
    assert not is_free(elems)


def test_real_rotation_is_unitary():
    R = lens_rotation(7, 3)
    assert np.allclose(R.T @ R, np.eye(4))
    assert np.allclose(R @ J0, J0 @ R)
    assert np.allclose(np.linalg.matrix_power(R, 7), np.eye(4))


def test_closure_cap():
    with pytest.raises(ValueError, match="exceeded"):
        group_closure([RootOfUnityMatrix.from_exponents(1, 1, 50)], cap=10)
