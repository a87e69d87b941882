from pathlib import Path

from alemass.io.cache import BundleCache, cache_key
from alemass.io.report import ReportBundle, Table, Verdict


def bundle() -> ReportBundle:
    return ReportBundle(
        "hj73", "hj",
        tables=[Table("plumbing", ("vertex", "v0"), [(0, -3)])],
        verdicts=[Verdict("chain_value", True, "7/3")],
    )


def test_key_is_stable_and_content_sensitive():
    a = cache_key({"name": "x", "hj": {"q": 7, "p": 3}})
    b = cache_key({"hj": {"p": 3, "q": 7}, "name": "x"})
    c = cache_key({"name": "x", "hj": {"q": 7, "p": 2}})
    assert a == b
    assert a != c
    assert len(a) == 64


def test_put_then_get(tmp_path: Path):
    cache = BundleCache(tmp_path / "cache")
    key = cache_key({"name": "hj73"})
    assert cache.get(key) is None
    path = cache.put(key, bundle())
    assert path.exists()
    got = cache.get(key)
    assert got is not None
    assert got.digest() == bundle().digest()
    assert not list((tmp_path / "cache").glob("*.tmp"))


def test_corrupt_entry_is_a_miss(tmp_path: Path):
    cache = BundleCache(tmp_path)
    key = cache_key({"name": "hj73"})
    cache.path_for(key).write_text("{not json", encoding="utf-8")
    assert cache.get(key) is None


def test_tampered_entry_is_a_miss(tmp_path: Path):
    cache = BundleCache(tmp_path)
    key = cache_key({"name": "hj73"})
    path = cache.put(key, bundle())
    path.write_text(path.read_text().replace("7/3", "7/2"), encoding="utf-8")
    assert cache.get(key) is None
