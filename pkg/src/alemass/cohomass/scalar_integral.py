from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from ..errors import ConvergenceError, DomainError
from ..geom.chart import MetricField, eval_metric
from ..geom.curvature import scalar_curvature
from ..mass.quadrature import s3_rule

SPHERE_N = 8
TAIL_FIT_POINTS = 4
TAIL_NOISE_FLOOR = 1e-9
# relative thickness of the layer above the inner radius where full curvature steps do not fit
BOUNDARY_LAYER = 1e-3
BOUNDARY_STEP_SCALE = 0.25

ScalarFn = Callable[[np.ndarray], np.ndarray]


def sphere_scalar_integral(
    field: MetricField,
    rho: float,
    n: int = SPHERE_N,
    scalar: Optional[ScalarFn] = None,
    scale: float = 1.0,
) -> float:
    """Integral of s dmu over the shell at radius rho per unit radial length, on the quotient."""
    rule = s3_rule(n)
    pts = rho * rule.nodes
    s = scalar(pts) if scalar is not None else scalar_curvature(field, pts, scale)
    vol = np.sqrt(np.linalg.det(eval_metric(field, pts)))
    return rho**3 * rule.integrate(np.asarray(s) * vol) / field.chart.group_order


def default_volume_schedule(inner_radius: float) -> list[float]:
    """a, then 1.5 a * 2^k for k = 0..10."""
    a = float(inner_radius)
    return [a] + [1.5 * a * 2.0**k for k in range(0, 11)]


def _boundary_layer(field: MetricField, lo: float, hi: float, n: int) -> float:
    # two-point Gauss in rho with shrunken curvature steps; nodes sit inside (lo, hi)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    total = 0.0
    for t in (-1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0)):
        total += half * sphere_scalar_integral(field, mid + half * t, n, scale=BOUNDARY_STEP_SCALE)
    return total


def scalar_volume_integral(
    field: MetricField,
    inner_data: float = 0.0,
    schedule: Optional[Sequence[float]] = None,
    n: int = SPHERE_N,
    scalar: Optional[ScalarFn] = None,
) -> float:
    """inner_data plus the integral of s dmu over rho >= schedule[0].

    Each schedule interval is integrated adaptively in log(rho); beyond the last
    radius the sphere integral is closed by a fitted power law, which must decay
    faster than 1/rho. With numerically computed curvature, the thin layer
    [a, a (1 + BOUNDARY_LAYER)] next to the chart boundary is covered by a
    two-point rule on reduced finite-difference steps.
    """
    a = field.chart.inner_radius
    r = np.asarray(schedule if schedule is not None else default_volume_schedule(a), dtype=float)
    if r.size < TAIL_FIT_POINTS or np.any(np.diff(r) <= 0):
        raise DomainError(f"Volume schedule needs >= {TAIL_FIT_POINTS} increasing radii")
    if r[0] < a * (1.0 - 1e-12):
        raise DomainError(f"Volume schedule starts at {r[0]:.6g}, below the chart inner radius")

    total = float(inner_data)
    layer_top = a * (1.0 + BOUNDARY_LAYER)
    if scalar is None and r[0] < layer_top:
        if r[1] <= layer_top:
            raise DomainError(
                f"Volume schedule radius {r[1]:.6g} is inside the boundary layer"
                f" below {layer_top:.6g}"
            )
        total += _boundary_layer(field, float(r[0]), layer_top, n)
        r = r.copy()
        r[0] = layer_top

    def shell(u: float) -> float:
        rho = math.exp(u)
        return sphere_scalar_integral(field, rho, n, scalar) * rho

    for lo, hi in zip(r[:-1], r[1:]):
        val, _err = quad(shell, math.log(lo), math.log(hi), epsabs=1e-10, epsrel=1e-10, limit=100)
        total += val

    tail_r = r[-TAIL_FIT_POINTS:]
    tail_s = np.array([sphere_scalar_integral(field, rho, n, scalar) for rho in tail_r])
    if np.all(np.abs(tail_s) <= TAIL_NOISE_FLOOR):
        return total
    if not (np.all(tail_s > 0) or np.all(tail_s < 0)):
        raise ConvergenceError(
            "Scalar curvature tail changes sign above the noise floor; cannot close it"
        )
    slope, _ = np.polyfit(np.log(tail_r), np.log(np.abs(tail_s)), 1)
    if slope >= -1.0:
        raise ConvergenceError(
            f"Non-integrable scalar curvature tail: sphere integral decays like rho^{slope:.3f}"
        )
    total += -tail_s[-1] * tail_r[-1] / (slope + 1.0)
    return total
