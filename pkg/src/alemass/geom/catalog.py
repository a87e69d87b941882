"""Named catalog metrics and the ``name:k=v,... quotient:q=..,p=..`` spec syntax."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..errors import DomainError
from ..orbifold.lens import lens_rotation
from .chart import AsymptoticChart, MetricField
from .curvature import curvature_gate
from .potentials import (
    RadialKahlerPotential,
    burns_potential,
    eguchi_hanson_potential,
    flat_potential,
    potential_metric_field,
)

CATALOG_VERSION = "1"
GATE_RADII = 20
DEFAULT_CURVATURE_TOL = 1e-6


@dataclass(frozen=True)
class MetricSpec:
    name: str
    params: Tuple[Tuple[str, float], ...] = ()
    quotient: Optional[Tuple[int, int]] = None

    def param(self, key: str, default: float) -> float:
        return dict(self.params).get(key, default)

    def canonical(self) -> str:
        body = ",".join(f"{k}={v!r}" for k, v in sorted(self.params))
        out = f"{self.name}:{body}" if body else self.name
        if self.quotient is not None:
            out += f" quotient:q={self.quotient[0]},p={self.quotient[1]}"
        return out


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    defaults: Mapping[str, float]
    build: Callable[[MetricSpec], MetricField]
    chern: str = "none"  # "blowup", "ricci_flat" or "none"
    default_quotient: Optional[Tuple[int, int]] = None
    gated: bool = False
    potential: Optional[Callable[[MetricSpec], RadialKahlerPotential]] = field(
        default=None, compare=False
    )


def _chart(spec: MetricSpec, inner: float, eps: float) -> AsymptoticChart:
    return AsymptoticChart(
        inner_radius=spec.param("inner", inner),
        falloff_epsilon=spec.param("eps", eps),
    )


def _conformal_field(spec: MetricSpec, c: float, power: float, eps: float) -> MetricField:
    chart = _chart(spec, 1.0, eps)
    if 1.0 + c * chart.inner_radius ** (-power) <= 0:
        raise DomainError(
            f"Conformal factor 1 + c rho^-{power:g} is not positive on the chart (c={c})"
        )

    def metric(x: np.ndarray) -> np.ndarray:
        rho2 = np.sum(x * x, axis=-1)
        f = c * rho2 ** (-0.5 * power)
        return (1.0 + f)[..., None, None] * np.eye(4)

    def derivative(x: np.ndarray) -> np.ndarray:
        rho2 = np.sum(x * x, axis=-1)
        # d_l f = -power c rho^(-power-2) x_l
        grad = (-power * c * rho2 ** (-0.5 * power - 1.0))[..., None] * x
        return np.eye(4)[:, :, None] * grad[..., None, None, :]

    return MetricField(chart=chart, metric=metric, derivative=derivative, label=spec.canonical())


def _build_flat(spec: MetricSpec) -> MetricField:
    return potential_metric_field(flat_potential(), _chart(spec, 1.0, 1.0), label="flat")


def _build_conformal(spec: MetricSpec) -> MetricField:
    return _conformal_field(spec, spec.param("c", 1.0), 2.0, 1.0)


def _build_slow(spec: MetricSpec) -> MetricField:
    return _conformal_field(spec, spec.param("c", 1.0), spec.param("power", 0.4), 0.5)


def _burns_pot(spec: MetricSpec) -> RadialKahlerPotential:
    return burns_potential(spec.param("c", 0.5))


def _eh_pot(spec: MetricSpec) -> RadialKahlerPotential:
    return eguchi_hanson_potential(spec.param("a", 1.0))


def _build_burns(spec: MetricSpec) -> MetricField:
    return potential_metric_field(_burns_pot(spec), _chart(spec, 1.0, 1.0), label=spec.canonical())


def _build_eh(spec: MetricSpec) -> MetricField:
    a = spec.param("a", 1.0)
    return potential_metric_field(_eh_pot(spec), _chart(spec, a, 3.0), label=spec.canonical())


CATALOG: Dict[str, CatalogEntry] = {
    e.name: e
    for e in [
        CatalogEntry("flat", "Euclidean metric, u = t", {}, _build_flat, chern="none",
                     potential=lambda s: flat_potential()),
        CatalogEntry("conformal", "(1 + c/rho^2) delta, exact mass c", {"c": 1.0},
                     _build_conformal),
        CatalogEntry("slow", "(1 + c rho^-power) delta, too slow for a mass (negative control)",
                     {"c": 1.0, "power": 0.4}, _build_slow),
        CatalogEntry("burns", "scalar-flat Kähler, u = t + c log t", {"c": 0.5}, _build_burns,
                     chern="blowup", gated=True, potential=_burns_pot),
        CatalogEntry("eguchi_hanson", "Ricci-flat ALE on C^2/Z2", {"a": 1.0}, _build_eh,
                     chern="ricci_flat", default_quotient=(2, 1), gated=True, potential=_eh_pot),
    ]
}

_COMMON_KEYS = ("inner", "eps")


def _parse_kv(body: str, where: str) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        if "=" not in item:
            raise DomainError(f"Expected key=value in {where}, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        try:
            out[k] = float(v)
        except ValueError:
            raise DomainError(f"Value for {k!r} in {where} is not a number: {v!r}") from None
    return out


def parse_metric_spec(text: str) -> MetricSpec:
    """Parse ``burns:c=0.5`` or ``eguchi_hanson:a=1 quotient:q=2,p=1``."""
    parts = text.split()
    if not parts:
        raise DomainError("Empty metric spec")
    quotient = None
    head = None
    for part in parts:
        name, _, body = part.partition(":")
        if name == "quotient":
            kv = _parse_kv(body, "quotient")
            if set(kv) != {"q", "p"}:
                raise DomainError(f"quotient needs exactly q and p, got {sorted(kv)}")
            quotient = (int(kv["q"]), int(kv["p"]))
        elif head is None:
            head = (name, _parse_kv(body, name))
        else:
            raise DomainError(f"Unexpected extra term {part!r} in metric spec {text!r}")
    if head is None:
        raise DomainError(f"Metric spec {text!r} names no metric")
    return make_spec(head[0], head[1], quotient)


def make_spec(
    name: str, params: Mapping[str, float], quotient: Optional[Tuple[int, int]] = None
) -> MetricSpec:
    entry = CATALOG.get(name)
    if entry is None:
        raise DomainError(f"Unknown catalog metric {name!r}; known: {sorted(CATALOG)}")
    unknown = set(params) - set(entry.defaults) - set(_COMMON_KEYS)
    if unknown:
        raise DomainError(f"Unknown parameter(s) {sorted(unknown)} for metric {name!r}")
    merged = dict(entry.defaults)
    merged.update({k: float(v) for k, v in params.items()})
    return MetricSpec(name, tuple(sorted(merged.items())), quotient)


def with_quotient(fld: MetricField, q: int, p: int) -> MetricField:
    """The same invariant field on the cover, marked with the lens group of type (q, p)."""
    gen = lens_rotation(q, p)
    return replace(fld, chart=replace(fld.chart, group_order=q), group_generator=gen)


def admit_to_catalog(
    fld: MetricField, curvature_tol: float = DEFAULT_CURVATURE_TOL, count: int = GATE_RADII
) -> Tuple[bool, float]:
    """Scalar-curvature gate at log-spaced radii in [1.5 a, 1000 a]."""
    a = fld.chart.inner_radius
    return curvature_gate(fld, np.geomspace(1.5 * a, 1e3 * a, count), curvature_tol)


def build_metric(
    spec: MetricSpec | str, gate: bool = True, curvature_tol: float = DEFAULT_CURVATURE_TOL
) -> MetricField:
    if isinstance(spec, str):
        spec = parse_metric_spec(spec)
    entry = CATALOG[spec.name]
    fld = entry.build(spec)
    quotient = spec.quotient if spec.quotient is not None else entry.default_quotient
    if quotient is not None:
        fld = with_quotient(fld, *quotient)
    if gate and entry.gated:
        ok, worst = admit_to_catalog(fld, curvature_tol)
        if not ok:
            raise DomainError(
                f"{spec.canonical()} failed the scalar-curvature gate:"
                f" max |s| = {worst:.3e} > {curvature_tol:.1e}"
            )
    return fld


def catalog_potential(spec: MetricSpec) -> Optional[RadialKahlerPotential]:
    entry = CATALOG[spec.name]
    return entry.potential(spec) if entry.potential is not None else None


def list_catalog() -> List[CatalogEntry]:
    return [CATALOG[k] for k in sorted(CATALOG)]
