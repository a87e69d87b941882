"""Scenario files: one YAML mapping per scenario, strict keys, line-numbered errors.

Example::

    name: conformal07
    kind: mass
    metric: "conformal:c=0.7"
    numerics:
      quadrature_n: 24
    expect:
      mass: 0.7
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from ..errors import DomainError, ScenarioError
from ..geom.catalog import MetricSpec, make_spec, parse_metric_spec
from ..orbifold.capsule import OrbifoldGroupType, parse_group_type

KINDS = ("mass", "hj", "capsule", "moser", "crosscheck", "penrose")

TOP_KEYS = (
    "name", "kind", "metric", "numerics", "tolerances", "expect",
    "model", "divisors", "hj", "capsule", "moser", "output",
)
REQUIRED = {
    "mass": ("metric",),
    "crosscheck": ("metric",),
    "hj": ("hj",),
    "capsule": ("capsule",),
    "moser": ("moser",),
    "penrose": ("divisors",),
}


@dataclass(frozen=True)
class Numerics:
    quadrature_n: int = 24
    schedule: Optional[Tuple[float, ...]] = None
    volume_schedule: Optional[Tuple[float, ...]] = None
    volume_quadrature_n: int = 8
    inner_data: float = 0.0
    steps: int = 256


@dataclass(frozen=True)
class Tolerances:
    mass_rel: float = 1e-3
    mass_abs: float = 1e-9
    eq_tol: float = 1e-6
    crosscheck_tol: float = 1e-2
    curvature_tol: float = 1e-6
    slope_tol: float = 0.1
    closure_tol: float = 1e-6
    pullback_tol: float = 1e-5


@dataclass(frozen=True)
class Expect:
    mass: Optional[float] = None
    converges: Optional[bool] = None
    falloff: Optional[bool] = None
    satisfied: Optional[bool] = None


@dataclass(frozen=True)
class MoserSection:
    family: str = "burns"  # burns, tangential or zero
    c: float = 0.5
    amplitude: float = 0.2
    power: float = 0.5
    working_radius: float = 2.0
    safety_radius: Optional[float] = None
    seeds: Tuple[float, ...] = (20.0, 40.0, 80.0, 160.0, 320.0, 640.0)
    z2: bool = True


@dataclass(frozen=True)
class ModelSection:
    areas: Optional[Tuple[float, ...]] = None
    chern_pairing: Optional[float] = None
    scalar_integral: float = 0.0
    mass: Optional[float] = None


@dataclass(frozen=True)
class CapsuleSection:
    ell: int
    kind: OrbifoldGroupType
    local: Tuple[Tuple[int, int], ...]
    central_weight: Optional[Fraction] = None


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    metric: Optional[MetricSpec] = None
    numerics: Numerics = field(default_factory=Numerics)
    tolerances: Tolerances = field(default_factory=Tolerances)
    expect: Expect = field(default_factory=Expect)
    model: Optional[ModelSection] = None
    divisors: Optional[Tuple[Tuple[int, float], ...]] = None
    hj: Optional[Tuple[int, int]] = None
    capsule: Optional[CapsuleSection] = None
    moser: Optional[MoserSection] = None
    output_dir: Optional[str] = None
    source: Optional[str] = field(default=None, compare=False)

    def canonical(self) -> Dict[str, Any]:
        """Everything that determines the results, as plain JSON-able data."""
        out: Dict[str, Any] = {"name": self.name, "kind": self.kind}
        if self.metric is not None:
            out["metric"] = self.metric.canonical()
        out["numerics"] = _plain(asdict(self.numerics))
        out["tolerances"] = _plain(asdict(self.tolerances))
        out["expect"] = _plain(asdict(self.expect))
        if self.model is not None:
            out["model"] = _plain(asdict(self.model))
        if self.divisors is not None:
            out["divisors"] = [list(d) for d in self.divisors]
        if self.hj is not None:
            out["hj"] = {"q": self.hj[0], "p": self.hj[1]}
        if self.capsule is not None:
            out["capsule"] = {
                "ell": self.capsule.ell,
                "kind": str(self.capsule.kind),
                "local": [list(t) for t in self.capsule.local],
                "central_weight": (
                    None if self.capsule.central_weight is None
                    else str(self.capsule.central_weight)
                ),
            }
        if self.moser is not None:
            out["moser"] = _plain(asdict(self.moser))
        return out


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


class _Lines:
    """Key path -> 1-based line number, taken from the YAML node tree."""

    def __init__(self, text: str):
        self.map: Dict[Tuple[str, ...], int] = {}
        try:
            node = yaml.compose(text, Loader=yaml.SafeLoader)
        except yaml.YAMLError:
            node = None
        if node is not None:
            self._walk(node, ())

    def _walk(self, node, path: Tuple[str, ...]) -> None:
        if isinstance(node, yaml.MappingNode):
            for knode, vnode in node.value:
                key = str(knode.value)
                self.map[path + (key,)] = knode.start_mark.line + 1
                self._walk(vnode, path + (key,))

    def line(self, *path: str) -> Optional[int]:
        while path:
            if path in self.map:
                return self.map[path]
            path = path[:-1]
        return None


def _fail(lines: _Lines, msg: str, *path: str) -> ScenarioError:
    return ScenarioError(msg, line=lines.line(*path), field=".".join(path) if path else None)


def _section(data: Dict, key: str, cls, lines: _Lines, conv: Dict[str, Any]):
    raw = data.get(key) or {}
    if not isinstance(raw, dict):
        raise _fail(lines, "expected a mapping", key)
    allowed = {f.name for f in fields(cls)}
    for k in raw:
        if k not in allowed:
            raise _fail(lines, f"unknown key {k!r} (allowed: {sorted(allowed)})", key, str(k))
    kwargs = {}
    for k, v in raw.items():
        fn = conv.get(k)
        try:
            kwargs[k] = fn(v) if fn is not None and v is not None else v
        except (TypeError, ValueError) as exc:
            raise _fail(lines, f"invalid value {v!r}: {exc}", key, k) from None
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise _fail(lines, str(exc), key) from None


def _floats(v) -> Tuple[float, ...]:
    if not isinstance(v, (list, tuple)):
        raise ValueError("expected a list of numbers")
    return tuple(float(x) for x in v)


def _positive_int(v) -> int:
    if isinstance(v, bool) or int(v) != v or int(v) < 1:
        raise ValueError("expected a positive integer")
    return int(v)


def _positive(v) -> float:
    f = float(v)
    if not (f > 0):
        raise ValueError("expected a positive number")
    return f


def _bool(v) -> bool:
    if not isinstance(v, bool):
        raise ValueError("expected true or false")
    return v


def _metric(raw, lines: _Lines) -> MetricSpec:
    try:
        if isinstance(raw, str):
            return parse_metric_spec(raw)
        if isinstance(raw, dict):
            body = dict(raw)
            name = body.pop("name", None)
            quot = body.pop("quotient", None)
            if name is None:
                raise DomainError("metric mapping needs a 'name'")
            quotient = None
            if quot is not None:
                if not isinstance(quot, dict) or set(quot) != {"q", "p"}:
                    raise DomainError("quotient needs exactly q and p")
                quotient = (int(quot["q"]), int(quot["p"]))
            return make_spec(str(name), {k: float(v) for k, v in body.items()}, quotient)
    except (DomainError, TypeError, ValueError) as exc:
        raise _fail(lines, str(exc), "metric") from None
    raise _fail(lines, "metric must be a string or a mapping", "metric")


def parse_scenario_text(
    text: str, source: Optional[str] = None, quadrature_n: Optional[int] = None
) -> Scenario:
    """Parse and validate one scenario.

    ``quadrature_n`` is the configured default, used when the scenario leaves it unset.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None) or getattr(exc, "context_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ScenarioError(f"parse error: {problem}", line=line) from None
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping of sections")
    lines = _Lines(text)

    for k in data:
        if k not in TOP_KEYS:
            raise _fail(lines, f"unknown key {k!r}", str(k))
    name = data.get("name")
    if not name or not isinstance(name, str) or any(c in name for c in "/\\"):
        raise _fail(lines, "scenario needs a plain string 'name'", "name")
    kind = data.get("kind")
    if kind not in KINDS:
        raise _fail(lines, f"kind must be one of {KINDS}, got {kind!r}", "kind")
    for req in REQUIRED[kind]:
        if data.get(req) is None:
            raise _fail(lines, f"{kind} scenarios require '{req}'", req)

    numerics = _section(data, "numerics", Numerics, lines, {
        "quadrature_n": _positive_int, "schedule": _floats, "volume_schedule": _floats,
        "volume_quadrature_n": _positive_int, "inner_data": float, "steps": _positive_int,
    })
    if quadrature_n is not None and "quadrature_n" not in (data.get("numerics") or {}):
        numerics = replace(numerics, quadrature_n=int(quadrature_n))
    if numerics.quadrature_n < 2:
        raise _fail(lines, "quadrature_n must be >= 2", "numerics", "quadrature_n")
    tol_fields = {f.name: _positive for f in fields(Tolerances)}
    tolerances = _section(data, "tolerances", Tolerances, lines, tol_fields)
    expect = _section(data, "expect", Expect, lines, {
        "mass": float, "converges": _bool, "falloff": _bool, "satisfied": _bool,
    })

    metric = _metric(data["metric"], lines) if data.get("metric") is not None else None
    model = None
    if data.get("model") is not None:
        model = _section(data, "model", ModelSection, lines, {
            "areas": _floats, "chern_pairing": float, "scalar_integral": float, "mass": float,
        })
    divisors = None
    if data.get("divisors") is not None:
        raw = data["divisors"]
        try:
            divisors = tuple((int(n), float(v)) for n, v in raw)
        except (TypeError, ValueError):
            msg = "divisors must be a list of [multiplicity, volume] pairs"
            raise _fail(lines, msg, "divisors") from None
    hj = None
    if data.get("hj") is not None:
        raw = data["hj"]
        if not isinstance(raw, dict) or set(raw) != {"q", "p"}:
            raise _fail(lines, "hj needs exactly the keys q and p", "hj")
        try:
            hj = (int(str(raw["q"])), int(str(raw["p"])))
        except ValueError:
            msg = f"hj q and p must be integers, got {raw['q']!r} and {raw['p']!r}"
            raise _fail(lines, msg, "hj") from None
    capsule = None
    if data.get("capsule") is not None:
        raw = data["capsule"]
        allowed = {"ell", "kind", "local", "central_weight"}
        if not isinstance(raw, dict):
            raise _fail(lines, "expected a mapping", "capsule")
        for k in raw:
            if k not in allowed:
                raise _fail(lines, f"unknown key {k!r}", "capsule", str(k))
        try:
            capsule = CapsuleSection(
                ell=_positive_int(raw.get("ell")),
                kind=parse_group_type(str(raw.get("kind", ""))),
                local=tuple((int(q), int(p)) for q, p in (raw.get("local") or [])),
                central_weight=(
                    Fraction(str(raw["central_weight"]))
                    if raw.get("central_weight") is not None
                    else None
                ),
            )
        except (TypeError, ValueError) as exc:
            raise _fail(lines, str(exc), "capsule") from None
    moser = None
    if data.get("moser") is not None:
        moser = _section(data, "moser", MoserSection, lines, {
            "c": float, "amplitude": float, "power": float, "working_radius": _positive,
            "safety_radius": _positive, "seeds": _floats, "z2": _bool, "family": str,
        })
        if moser.family not in ("burns", "tangential", "zero"):
            raise _fail(lines, f"unknown moser family {moser.family!r}", "moser", "family")
    output_dir = None
    if data.get("output") is not None:
        raw = data["output"]
        if not isinstance(raw, dict) or set(raw) - {"dir"}:
            raise _fail(lines, "output accepts only 'dir'", "output")
        output_dir = raw.get("dir")

    return Scenario(
        name=name, kind=kind, metric=metric, numerics=numerics, tolerances=tolerances,
        expect=expect, model=model, divisors=divisors, hj=hj, capsule=capsule,
        moser=moser, output_dir=output_dir, source=source,
    )


def parse_scenario(path: str | Path, quadrature_n: Optional[int] = None) -> Scenario:
    p = Path(path)
    if not p.exists():
        raise ScenarioError(f"scenario file not found: {p}")
    text = p.read_text(encoding="utf-8")
    return parse_scenario_text(text, source=str(p), quadrature_n=quadrature_n)


def parse_suite(path: str | Path) -> List[Path]:
    """Scenario paths listed under ``scenarios:``, resolved against the suite file."""
    p = Path(path)
    if not p.exists():
        raise ScenarioError(f"suite file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError(f"parse error: {exc}", line=mark.line + 1 if mark else None) from None
    if not (
        isinstance(data, dict)
        and set(data) == {"scenarios"}
        and isinstance(data["scenarios"], list)
    ):
        raise ScenarioError("suite file must contain only a 'scenarios' list", field="scenarios")
    return [(p.parent / str(item)).resolve() for item in data["scenarios"]]
