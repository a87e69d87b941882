import numpy as np
import pytest

from alemass.errors import DomainError
from alemass.geom.catalog import (
    CATALOG,
    build_metric,
    catalog_potential,
    list_catalog,
    make_spec,
    parse_metric_spec,
    with_quotient,
)


def test_parse_spec_fills_defaults():
    spec = parse_metric_spec("burns:c=0.25")
    assert spec.name == "burns"
    assert spec.param("c", 0.0) == 0.25
    assert spec.quotient is None
    assert parse_metric_spec("conformal").param("c", 0.0) == CATALOG["conformal"].defaults["c"]


def test_parse_spec_with_quotient():
    spec = parse_metric_spec("eguchi_hanson:a=2 quotient:q=2,p=1")
    assert spec.quotient == (2, 1)
    assert spec.canonical() == "eguchi_hanson:a=2.0 quotient:q=2,p=1"


@pytest.mark.parametrize(
    "text",
    ["", "taub_nut:m=1", "burns:mass=1", "burns:c=abc", "burns conformal", "quotient:q=2"],
)
def test_bad_specs(text):
    with pytest.raises(DomainError):
        parse_metric_spec(text)


def test_canonical_is_order_independent():
    a = make_spec("slow", {"c": 1.0, "power": 0.4})
    b = make_spec("slow", {"power": 0.4, "c": 1.0})
    assert a == b
    assert a.canonical() == b.canonical()


def test_build_gated_metric():
    fld = build_metric("burns:c=0.5")
    x = np.array([[3.0, 1.0, 0.0, 2.0]])
    g = fld.metric(x)
    assert g.shape == (1, 4, 4)
    assert np.allclose(g, np.swapaxes(g, -1, -2))


def test_eguchi_hanson_gets_default_quotient():
    fld = build_metric("eguchi_hanson:a=1")
    assert fld.chart.group_order == 2
    assert np.allclose(fld.group_generator, -np.eye(4))


def test_with_quotient_marks_group():
    fld = with_quotient(build_metric("conformal:c=1"), 3, 1)
    assert fld.chart.group_order == 3
    assert fld.group_generator.shape == (4, 4)


def test_potentials_only_for_kahler_entries():
    assert catalog_potential(make_spec("burns", {})) is not None
    assert catalog_potential(make_spec("conformal", {})) is None


def test_list_is_sorted():
    names = [e.name for e in list_catalog()]
    assert names == sorted(names)
    assert {e.name for e in list_catalog() if e.gated} == {"burns", "eguchi_hanson"}
