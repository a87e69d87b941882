from __future__ import annotations

import numpy as np

from ..errors import DomainError
from .chart import (
    MetricField,
    as_points,
    central_partials,
    check_in_chart,
    step_size,
)


def _metric_and_derivative(
    field: MetricField, x: np.ndarray, scale: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    g = np.asarray(field.metric(x), dtype=float)
    if field.derivative_mode == "analytic" and field.derivative is not None:
        d = np.asarray(field.derivative(x), dtype=float)
    else:
        d = central_partials(field.metric, x, order=2, scale=scale)
    return g, d


def christoffel(field: MetricField, x, scale: float = 1.0) -> np.ndarray:
    """Gamma[..., i, j, k] = Gamma^i_jk of the Levi-Civita connection."""
    x = as_points(x)
    g, d = _metric_and_derivative(field, x, scale)
    # T[l, j, k] = d_j g_lk + d_k g_lj - d_l g_jk
    t = np.swapaxes(d, -1, -2) + d - np.moveaxis(d, -1, -3)
    ginv = np.linalg.inv(g)
    return 0.5 * np.einsum("...il,...ljk->...ijk", ginv, t)


def ricci_tensor(field: MetricField, x, scale: float = 1.0) -> np.ndarray:
    """Ricci tensor R_jk; ``scale`` shrinks every finite-difference step near the inner boundary."""
    x = as_points(x)
    rho = check_in_chart(field.chart, x)
    h = step_size(rho, scale)
    # outer 5-point stencil plus the inner 3-point one
    if np.any(rho - 3.0 * h < field.chart.inner_radius * (1.0 - 1e-12)):
        raise DomainError("Curvature stencil leaves the chart domain")
    gam = christoffel(field, x, scale)
    dgam = central_partials(lambda p: christoffel(field, p, scale), x, order=4, scale=scale)
    ric = (
        np.einsum("...ijki->...jk", dgam)
        - np.einsum("...iijk->...jk", dgam)
        + np.einsum("...iip,...pjk->...jk", gam, gam)
        - np.einsum("...ikp,...pij->...jk", gam, gam)
    )
    return ric


def scalar_curvature(field: MetricField, x, scale: float = 1.0) -> np.ndarray | float:
    """Scalar curvature g^jk R_jk; returns a float for a single point."""
    x = as_points(x)
    g = np.asarray(field.metric(x), dtype=float)
    s = np.einsum("...jk,...jk->...", np.linalg.inv(g), ricci_tensor(field, x, scale))
    if not np.all(np.isfinite(s)):
        raise DomainError(f"Scalar curvature of {field.label!r} is not finite")
    return float(s) if np.ndim(s) == 0 else s


def curvature_gate(field: MetricField, radii, curvature_tol: float = 1e-6) -> tuple[bool, float]:
    """Check |s| <= curvature_tol on a few directions at each radius.

    Returns (passed, worst |s|).
    """
    radii = np.asarray(radii, dtype=float)
    dirs = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.5, 0.5, 0.5, 0.5],
            [0.6, 0.0, 0.0, 0.8],
        ]
    )
    pts = radii[:, None, None] * dirs[None, :, :]
    s = np.abs(np.asarray(scalar_curvature(field, pts)))
    worst = float(np.max(s)) if s.size else 0.0
    return worst <= curvature_tol, worst

