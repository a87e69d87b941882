from pathlib import Path

import pytest

from alemass.errors import DomainError
from alemass.io.report import (
    PlotSpec,
    ReportBundle,
    Table,
    Verdict,
    emit_report,
    render_csv,
    render_verdict,
    summary_lines,
)


def small_bundle() -> ReportBundle:
    return ReportBundle(
        scenario="demo",
        kind="mass",
        tables=[
            Table(
                "mass",
                ("rho", "integrand", "note"),
                [(10.0, 0.7, "a,b"), (20.0, 0.7000001, "plain")],
            )
        ],
        plots=[PlotSpec("convergence", "convergence", {
            "radii": [10.0, 20.0, 40.0], "values": [0.69, 0.699, 0.6999],
            "running": [0.69, 0.7, 0.7], "limit": 0.7, "kappa": 2.0, "title": "demo",
        })],
        verdicts=[Verdict("mass_value", True, "ok")],
        texts={"chain": "q=7 p=3\n"},
        provenance={"version": "0.1.0", "quadrature_n": 8},
    )


def test_csv_quotes_commas_and_uses_crlf():
    text = render_csv(Table("t", ("a", "b"), [(1.5, "x,y"), (True, 2)]))
    assert text == 'a,b\r\n1.5,"x,y"\r\ntrue,2\r\n'


def test_csv_keeps_full_float_precision():
    text = render_csv(Table("t", ("v",), [(0.1 + 0.2,)]))
    assert "0.30000000000000004" in text


def test_emit_report_file_names(tmp_path: Path):
    paths = emit_report(small_bundle(), tmp_path / "out")
    names = sorted(p.name for p in paths)
    assert names == ["demo_chain.txt", "demo_convergence.svg", "demo_mass.csv", "demo_verdict.txt"]
    assert (tmp_path / "out" / "demo_verdict.txt").read_text().startswith("scenario: demo\n")


def test_emit_report_is_byte_stable(tmp_path: Path):
    a = emit_report(small_bundle(), tmp_path / "a")
    b = emit_report(small_bundle(), tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.name == pb.name
        assert pa.read_bytes() == pb.read_bytes()


def test_empty_table_writes_nothing(tmp_path: Path):
    bundle = small_bundle()
    bundle.tables.append(Table("empty", ("x",), []))
    with pytest.raises(DomainError, match="empty"):
        emit_report(bundle, tmp_path / "out")
    assert not (tmp_path / "out").exists()


def test_row_width_mismatch_is_rejected(tmp_path: Path):
    bundle = small_bundle()
    bundle.tables[0].rows.append((1.0,))
    with pytest.raises(DomainError, match="wrong width"):
        emit_report(bundle, tmp_path)


def test_bundle_without_results_is_rejected(tmp_path: Path):
    with pytest.raises(DomainError):
        emit_report(ReportBundle("nothing", "mass", verdicts=[Verdict("x", True)]), tmp_path)


def test_verdict_text_lists_rules():
    bundle = small_bundle()
    bundle.verdicts.append(Verdict("metric_falloff", False, "slope off"))
    text = render_verdict(bundle)
    assert "verdict: FAIL" in text
    assert "  mass_value: PASS (ok)" in text
    assert "  metric_falloff: FAIL (slope off)" in text
    assert "  quadrature_n: 8" in text


def test_no_verdicts_is_not_a_pass():
    assert not ReportBundle("x", "hj").passed


def test_dict_form_preserves_digest():
    bundle = small_bundle()
    again = ReportBundle.from_dict(bundle.to_dict())
    assert again.digest() == bundle.digest()
    assert again.table("mass").rows[0] == (10.0, 0.7, "a,b")


def test_summary_lines_align_names():
    a = ReportBundle("short", "hj", verdicts=[Verdict("r", True)])
    b = ReportBundle("much_longer", "hj", verdicts=[Verdict("r", False)])
    lines = summary_lines([a, b])
    assert lines == ["short        PASS", "much_longer  FAIL"]
