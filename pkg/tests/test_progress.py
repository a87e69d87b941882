import pytest

from alemass.utils.progress import note, step


def test_note_is_tagged(capsys):
    note("cache", "hit abc")
    note("cache", "silent", enabled=False)
    assert capsys.readouterr().out == "[cache] hit abc\n"


def test_step_reports_time_even_on_error(capsys):
    with pytest.raises(RuntimeError):
        with step("integrating", tag="run"):
            raise RuntimeError("boom")
    out = capsys.readouterr().out
    assert out.startswith("[run] integrating\n")
    assert "done in" in out


def test_step_disabled_is_silent(capsys):
    with step("quiet", enabled=False):
        pass
    assert capsys.readouterr().out == ""
