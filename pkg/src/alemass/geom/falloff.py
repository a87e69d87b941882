from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import DomainError
from ..mass.quadrature import s3_rule
from .chart import MetricField, eval_metric, metric_derivatives
from .forms import TwoFormField, form_norm
from .potentials import OMEGA0

NOISE_FLOOR = 1e-12
DEFAULT_SLOPE_TOL = 0.1


@dataclass(frozen=True)
class FallOffReport:
    slope_g: float
    slope_dg: float
    epsilon: float
    passed: bool
    at_noise_floor: bool = False


def default_falloff_radii(inner_radius: float, decades: float = 3.0, count: int = 13) -> np.ndarray:
    r0 = 4.0 * inner_radius
    return np.geomspace(r0, r0 * 10.0**decades, count)


def loglog_slope(radii: Sequence[float], values: Sequence[float]) -> float:
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    return float(np.polyfit(np.log(r), np.log(v), 1)[0])


def _check_span(radii: np.ndarray, decades: float = 2.0) -> None:
    if radii.size < 3 or radii.max() / radii.min() < 10.0**decades * (1.0 - 1e-9):
        raise DomainError(
            f"Insufficient radius range: need >= {decades:g} decades, got "
            f"[{radii.min():.4g}, {radii.max():.4g}]"
        )


def _sup_per_sphere(fn, radii: np.ndarray, n: int = 4) -> np.ndarray:
    dirs = s3_rule(n).nodes
    return np.array([float(np.max(fn(r * dirs))) for r in radii])


def verify_falloff(
    field: MetricField,
    radii: Optional[Sequence[float]] = None,
    epsilon: Optional[float] = None,
    slope_tol: float = DEFAULT_SLOPE_TOL,
) -> FallOffReport:
    """Log-log slopes of sup|g - delta| and sup|dg| on nested spheres.

    Passes iff slope_g <= -1 - eps + tol and slope_dg <= -2 - eps + tol. Deviations
    below the noise floor at every radius count as a pass.
    """
    eps = field.chart.falloff_epsilon if epsilon is None else float(epsilon)
    if radii is None:
        radii = default_falloff_radii(field.chart.inner_radius)
    r = np.asarray(radii, dtype=float)
    _check_span(r)
    dev_g = _sup_per_sphere(
        lambda x: np.abs(eval_metric(field, x) - np.eye(4)).max(axis=(-1, -2)), r
    )
    dev_dg = _sup_per_sphere(
        lambda x: np.abs(metric_derivatives(field, x)).max(axis=(-1, -2, -3)), r
    )
    if np.all(dev_g <= NOISE_FLOOR) and np.all(dev_dg <= NOISE_FLOOR):
        return FallOffReport(float("nan"), float("nan"), eps, True, at_noise_floor=True)
    keep = (dev_g > NOISE_FLOOR) & (dev_dg > NOISE_FLOOR)
    if keep.sum() < 3:
        raise DomainError("Too few radii above the noise floor to fit a fall-off slope")
    slope_g = loglog_slope(r[keep], dev_g[keep])
    slope_dg = loglog_slope(r[keep], dev_dg[keep])
    passed = slope_g <= -1.0 - eps + slope_tol and slope_dg <= -2.0 - eps + slope_tol
    return FallOffReport(slope_g, slope_dg, eps, bool(passed))


def verify_form_falloff(omega: TwoFormField, radii: Optional[Sequence[float]] = None) -> float:
    """Log-log slope of sup|omega - omega0|; the Kähler-form fall-off asks for <= -1 - eps."""
    if radii is None:
        radii = default_falloff_radii(omega.chart.inner_radius)
    r = np.asarray(radii, dtype=float)
    _check_span(r)
    dev = _sup_per_sphere(lambda x: form_norm(omega(x) - OMEGA0), r)
    keep = dev > NOISE_FLOOR
    if keep.sum() < 3:
        return float("-inf")
    return loglog_slope(r[keep], dev[keep])
