from pathlib import Path

import pytest

from alemass.errors import DomainError, ScenarioRunError
from alemass.io.report import emit_report
from alemass.io.scenario import parse_scenario, parse_scenario_text, parse_suite
from alemass.run import compute_bundle, run_scenario, run_suite

FIXTURES = Path(__file__).parent / "fixtures"


def load(name: str):
    return parse_scenario(FIXTURES / f"{name}.yaml")


def rules(bundle) -> dict:
    return {v.rule: v.passed for v in bundle.verdicts}


def test_conformal_mass_and_cache(tmp_path: Path):
    s = load("conformal07")
    first = run_scenario(s, tmp_path / "cache")
    assert not first.cached
    assert first.bundle.passed, rules(first.bundle)
    assert set(rules(first.bundle)) == {"mass_converged", "mass_value", "metric_falloff"}
    rows = first.bundle.table("mass").rows
    assert all(abs(r[1] - 0.7) < 1e-6 for r in rows)

    second = run_scenario(s, tmp_path / "cache")
    assert second.cached
    assert second.key == first.key
    assert second.bundle.digest() == first.bundle.digest()


def test_run_without_cache_dir_never_caches():
    s = parse_scenario_text("name: h\nkind: hj\nhj: {q: 5, p: 2}\n")
    assert not run_scenario(s).cached
    assert not run_scenario(s).cached


def test_hj_report():
    bundle = compute_bundle(load("hj73"))
    assert bundle.passed
    assert "chain=[3,2,2]" in bundle.texts["chain"]
    assert "p'=5" in bundle.texts["chain"]
    plumbing = bundle.table("plumbing")
    assert plumbing.header == ("vertex", "v0", "v1", "v2")
    assert plumbing.rows[0] == (0, -3, 1, 0)


def test_slow_metric_meets_negative_expectations():
    bundle = compute_bundle(load("slow_negative"))
    assert bundle.passed, [v for v in bundle.verdicts]
    assert "observed=False expected=False" in bundle.verdicts[0].detail


def test_burns_crosscheck():
    bundle = compute_bundle(load("burns_crosscheck"))
    assert rules(bundle)["crosscheck"], bundle.verdicts
    (row,) = bundle.table("crosscheck").rows
    field_mass, formula_mass = row[0], row[1]
    assert field_mass == pytest.approx(0.5 / 3.0, rel=1e-2)
    assert formula_mass == pytest.approx(0.5 / 3.0, rel=1e-2)


def test_capsule_report(tmp_path: Path):
    bundle = compute_bundle(load("capsule_c3"))
    assert bundle.passed
    assert rules(bundle)["degree"]
    chains = bundle.table("chains")
    assert [r[3] for r in chains.rows] == ["[3]", "[2,2]"]
    names = {p.name for p in emit_report(bundle, tmp_path)}
    assert "capsule_c3_capsule.svg" in names
    assert "capsule_c3_capsule.txt" in names


def test_moser_report():
    s = load("burns_moser")
    bundle = compute_bundle(s)
    r = rules(bundle)
    assert r["perturbation_admissible"]
    assert r["pullback"]
    assert r["flow_falloff"]
    assert r["equivariance"]
    assert bundle.provenance["safety_radius"] >= 3.0
    flow = bundle.table("flow")
    assert flow.header == ("rho", "displacement", "jacobian_defect", "pullback_residual")
    assert len(flow.rows) == 6
    assert all(0.0 <= row[3] <= s.tolerances.pullback_tol for row in flow.rows)


def test_penrose_from_formula_is_saturated():
    bundle = compute_bundle(load("penrose_blowup"))
    assert bundle.passed
    (row,) = bundle.table("penrose").rows
    assert row[0] == pytest.approx(0.5 / 3.0)
    assert row[1] == pytest.approx(0.5 / 3.0)
    assert row[4] == "formula"


def test_penrose_reports_strict_positive_mass_for_a_blowup():
    bundle = compute_bundle(load("penrose_blowup"))
    (pm,) = [v for v in bundle.verdicts if v.rule == "positive_mass"]
    assert pm.passed
    assert "strict" in pm.detail


def test_flat_metric_is_the_positive_mass_equality_case():
    s = parse_scenario_text("name: pf\nkind: penrose\nmetric: flat\ndivisors: []\n")
    bundle = compute_bundle(s)
    assert bundle.passed, rules(bundle)
    (pm,) = [v for v in bundle.verdicts if v.rule == "positive_mass"]
    assert "equality" in pm.detail


def test_negative_model_mass_fails_positive_mass():
    s = parse_scenario_text(
        "name: nm\nkind: penrose\nmodel: {chern_pairing: 2.0, scalar_integral: 0.0}\n"
        "divisors: []\nexpect: {satisfied: false}\n"
    )
    bundle = compute_bundle(s)
    r = rules(bundle)
    assert r["penrose_inequality"]
    assert not r["positive_mass"]
    assert not bundle.passed


def test_penrose_violation_is_a_failed_verdict():
    s = parse_scenario_text(
        "name: pv\nkind: penrose\nmodel: {mass: 0.01}\ndivisors: [[2, 3.0]]\n"
    )
    bundle = compute_bundle(s)
    assert not bundle.passed
    assert bundle.table("penrose").rows[0][3] is False


def test_module_errors_carry_scenario_name():
    s = parse_scenario_text("name: broken\nkind: hj\nhj: {q: 6, p: 2}\n")
    with pytest.raises(ScenarioRunError, match="scenario 'broken'"):
        compute_bundle(s)


def test_suite_keeps_order_and_isolates_failures():
    good = [parse_scenario(p) for p in parse_suite(FIXTURES / "suite.yaml")]
    bad = parse_scenario_text("name: broken\nkind: hj\nhj: {q: 6, p: 2}\n")
    results = run_suite([good[0], bad, good[1], good[2]], jobs=2)
    assert isinstance(results[1], ScenarioRunError)
    names = [r.scenario.name for i, r in enumerate(results) if i != 1]
    assert names == ["hj73", "capsule_c3", "penrose_blowup"]


def test_suite_rejects_duplicate_names():
    s = load("hj73")
    with pytest.raises(DomainError, match="duplicate"):
        run_suite([s, s])
