"""Report bundles and the files they are written to.

Each scenario produces one :class:`ReportBundle`; :func:`emit_report` turns it into
``<name>_<table>.csv``, ``<name>_<plot>.svg``, optional text files and a
``<name>_verdict.txt``. CSV and SVG bytes depend only on the bundle contents.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

from ..errors import DomainError


@dataclass
class Table:
    name: str
    header: Tuple[str, ...]
    rows: List[Tuple[Any, ...]]


@dataclass
class Verdict:
    rule: str
    passed: bool
    detail: str = ""


@dataclass
class PlotSpec:
    name: str
    kind: str  # "convergence", "moser" or "capsule"
    data: Dict[str, Any]


@dataclass
class ReportBundle:
    scenario: str
    kind: str
    tables: List[Table] = field(default_factory=list)
    plots: List[PlotSpec] = field(default_factory=list)
    verdicts: List[Verdict] = field(default_factory=list)
    texts: Dict[str, str] = field(default_factory=dict)
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.verdicts) and all(v.passed for v in self.verdicts)

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return json.loads(json.dumps(asdict(self)))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ReportBundle":
        return cls(
            scenario=data["scenario"],
            kind=data["kind"],
            tables=[
                Table(t["name"], tuple(t["header"]), [tuple(r) for r in t["rows"]])
                for t in data["tables"]
            ],
            plots=[PlotSpec(**p) for p in data["plots"]],
            verdicts=[Verdict(**v) for v in data["verdicts"]],
            texts=dict(data["texts"]),
            provenance=dict(data["provenance"]),
        )

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    w.writerow(table.header)
    for row in table.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def render_verdict(bundle: ReportBundle) -> str:
    lines = [
        f"scenario: {bundle.scenario}",
        f"kind: {bundle.kind}",
        f"verdict: {'PASS' if bundle.passed else 'FAIL'}",
    ]
    for v in bundle.verdicts:
        detail = f" ({v.detail})" if v.detail else ""
        lines.append(f"  {v.rule}: {'PASS' if v.passed else 'FAIL'}{detail}")
    if bundle.provenance:
        lines.append("provenance:")
        for k in sorted(bundle.provenance):
            lines.append(f"  {k}: {bundle.provenance[k]}")
    return "\n".join(lines) + "\n"


def _check_bundle(bundle: ReportBundle) -> None:
    if not bundle.tables and not bundle.texts:
        raise DomainError(f"Report for {bundle.scenario!r} has no results to write")
    for t in bundle.tables:
        if not t.rows:
            raise DomainError(f"Report table {t.name!r} for {bundle.scenario!r} is empty")
        bad = [r for r in t.rows if len(r) != len(t.header)]
        if bad:
            raise DomainError(f"Report table {t.name!r} has rows of the wrong width: {bad[0]!r}")


def emit_report(bundle: ReportBundle, out_dir: str | Path) -> List[Path]:
    """Write every file of the bundle into ``out_dir``.

    All content is rendered before the first file is opened, so a bundle that
    fails validation or plotting leaves no partial files behind.
    """
    from ..plot.svg import render_svg

    _check_bundle(bundle)
    files: List[Tuple[str, bytes]] = []
    for t in bundle.tables:
        files.append((f"{bundle.scenario}_{t.name}.csv", render_csv(t).encode("utf-8")))
    for p in bundle.plots:
        files.append((f"{bundle.scenario}_{p.name}.svg", render_svg(p)))
    for suffix in sorted(bundle.texts):
        files.append((f"{bundle.scenario}_{suffix}.txt", bundle.texts[suffix].encode("utf-8")))
    files.append((f"{bundle.scenario}_verdict.txt", render_verdict(bundle).encode("utf-8")))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    for name, data in files:
        path = out / name
        path.write_bytes(data)
        written.append(path)
    return written


def summary_lines(bundles: Sequence[ReportBundle]) -> List[str]:
    """One line per scenario for the suite summary."""
    width = max((len(b.scenario) for b in bundles), default=0)
    return [f"{b.scenario.ljust(width)}  {'PASS' if b.passed else 'FAIL'}" for b in bundles]
