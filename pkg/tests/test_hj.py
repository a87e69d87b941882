import math
from fractions import Fraction

import numpy as np
import pytest

from alemass.cohomass.intersection import IntersectionForm, b_plus
from alemass.orbifold.hj import (
    dual_parameter,
    exact_determinant,
    hj_evaluate,
    hj_resolve,
    plumbing_matrix,
)


@pytest.mark.parametrize(
    "q,p,chain",
    [(7, 3, (3, 2, 2)), (5, 1, (5,)), (5, 4, (2, 2, 2, 2)), (2, 1, (2,)), (7, 5, (2, 2, 3))],
)
def test_known_chains(q, p, chain):
    hj = hj_resolve(q, p)
    assert hj.chain == chain
    assert hj_evaluate(hj.chain) == Fraction(q, p)


def test_render_and_intermediates():
    hj = hj_resolve(7, 3)
    assert hj.render() == "[3,2,2]"
    assert hj.intermediates == (Fraction(7, 3), Fraction(3, 2), Fraction(2))


def test_invalid_types():
    with pytest.raises(ValueError, match="gcd"):
        hj_resolve(6, 2)
    with pytest.raises(ValueError):
        hj_resolve(5, 0)
    with pytest.raises(ValueError):
        hj_resolve(1, 1)
    with pytest.raises(ValueError):
        hj_evaluate([1, 3])


def test_dual_chain_is_reversed():
    assert dual_parameter(7, 3) == 5
    assert hj_resolve(7, dual_parameter(7, 3)).chain == tuple(reversed(hj_resolve(7, 3).chain))


def test_plumbing_matrix_and_determinant():
    m = plumbing_matrix([3, 2, 2])
    assert m == [[-3, 1, 0], [1, -2, 1], [0, 1, -2]]
    assert exact_determinant(m) == -7
    assert abs(exact_determinant(plumbing_matrix(hj_resolve(11, 4).chain))) == 11


def test_every_type_up_to_200_resolves_to_a_negative_definite_chain():
    for q in range(2, 201):
        for p in range(1, q):
            if math.gcd(p, q) != 1:
                continue
            chain = hj_resolve(q, p).chain
            assert hj_evaluate(chain) == Fraction(q, p)
            assert min(chain) >= 2
            assert len(chain) <= q - 1
            mat = plumbing_matrix(chain)
            assert abs(exact_determinant(mat)) == q
            assert np.linalg.eigvalsh(np.array(mat, dtype=float)).max() < 0.0
            if q <= 40:
                assert b_plus(IntersectionForm.from_rows(mat)) == 0


def test_dual_chains_are_reversed_up_to_50():
    for q in range(2, 51):
        for p in range(1, q):
            if math.gcd(p, q) == 1:
                dual = hj_resolve(q, dual_parameter(q, p)).chain
                assert dual == tuple(reversed(hj_resolve(q, p).chain)), (q, p)
