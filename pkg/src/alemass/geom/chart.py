from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, Optional, TYPE_CHECKING

import numpy as np

from ..errors import DomainError

if TYPE_CHECKING:  # pragma: no cover
    from .potentials import RadialKahlerPotential


# Points are arrays of shape (..., 4); metric callables return (..., 4, 4) and
# derivative callables return (..., 4, 4, 4) with D[..., j, k, l] = d_l g_jk.
PointFn = Callable[[np.ndarray], np.ndarray]

DERIVATIVE_MODES = ("analytic", "central")

RELATIVE_STEP = 1e-4
MIN_STEP = 1e-6


@dataclass(frozen=True)
class AsymptoticChart:
    inner_radius: float = 1.0
    group_order: int = 1
    falloff_epsilon: float = 1.0
    dimension: int = 4

    def __post_init__(self) -> None:
        if self.dimension != 4:
            raise DomainError(
                f"Only 4-dimensional charts are supported, got dimension={self.dimension}"
            )
        if not (self.inner_radius > 0):
            raise DomainError(f"inner_radius must be positive, got {self.inner_radius}")
        if int(self.group_order) != self.group_order or self.group_order < 1:
            raise DomainError(f"group_order must be a positive integer, got {self.group_order}")
        if not (self.falloff_epsilon > 0):
            raise DomainError(f"falloff_epsilon must be positive, got {self.falloff_epsilon}")


@dataclass(frozen=True)
class MetricField:
    """Riemannian metric on rho >= inner_radius in the fixed asymptotic coordinates.

    ``group_generator`` is the real 4x4 matrix of a generator of the cyclic group
    the field is invariant under (``None`` for the trivial group); the quotient is
    represented by the invariant field on the cover together with ``chart.group_order``.
    """

    chart: AsymptoticChart
    metric: PointFn
    derivative: Optional[PointFn] = None
    derivative_mode: str = "analytic"
    label: str = ""
    potential: Optional["RadialKahlerPotential"] = None
    group_generator: Optional[np.ndarray] = dc_field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.derivative_mode not in DERIVATIVE_MODES:
            raise DomainError(
                f"derivative_mode must be one of {DERIVATIVE_MODES}, got {self.derivative_mode!r}"
            )
        if self.derivative_mode == "analytic" and self.derivative is None:
            raise DomainError(
                f"Field {self.label!r} declares analytic derivatives but supplies none"
            )

    def with_mode(self, mode: str) -> "MetricField":
        return replace(self, derivative_mode=mode)


def radius(x: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(x, dtype=float), axis=-1)


def step_size(rho: np.ndarray | float, scale: float = 1.0) -> np.ndarray:
    """Finite-difference step h = max(rho * 1e-4, 1e-6), optionally scaled."""
    h = np.maximum(np.asarray(rho, dtype=float) * RELATIVE_STEP, MIN_STEP) * scale
    if np.any(h <= 0) or np.any(h < np.finfo(float).eps * np.maximum(np.asarray(rho), 1.0)):
        raise DomainError(f"Finite-difference step underflow (scale={scale})")
    return h


def as_points(x) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1:] != (4,):
        raise DomainError(f"Points must have a trailing axis of length 4, got shape {pts.shape}")
    return pts


def check_in_chart(chart: AsymptoticChart, x: np.ndarray, what: str = "point") -> np.ndarray:
    rho = radius(x)
    if np.any(~np.isfinite(rho)):
        raise DomainError(f"Non-finite {what} coordinates")
    bad = rho < chart.inner_radius * (1.0 - 1e-12)
    if np.any(bad):
        worst = float(np.min(rho))
        raise DomainError(
            f"{what} at rho={worst:.6g} lies below the chart inner radius {chart.inner_radius:.6g}"
        )
    return rho


def _broadcast_step(h: np.ndarray, like: np.ndarray) -> np.ndarray:
    return h.reshape(h.shape + (1,) * (like.ndim - h.ndim))


def central_partials(fn: PointFn, x: np.ndarray, order: int = 2, scale: float = 1.0) -> np.ndarray:
    """Partial derivatives of ``fn`` by central differences, derivative index last.

    ``order`` selects the 3-point (2) or 5-point (4) stencil; the step follows
    :func:`step_size` at each point.
    """
    x = as_points(x)
    h = step_size(radius(x), scale)
    cols = []
    for lidx in range(4):
        e = np.zeros(4)
        e[lidx] = 1.0
        dx = h[..., None] * e
        fp, fm = fn(x + dx), fn(x - dx)
        hb = _broadcast_step(h, fp)
        if order == 2:
            d = (fp - fm) / (2.0 * hb)
        elif order == 4:
            fp2, fm2 = fn(x + 2.0 * dx), fn(x - 2.0 * dx)
            d = (8.0 * (fp - fm) - (fp2 - fm2)) / (12.0 * hb)
        else:
            raise ValueError(f"Unsupported stencil order {order}")
        cols.append(d)
    return np.stack(cols, axis=-1)


def eval_metric(field: MetricField, x) -> np.ndarray:
    x = as_points(x)
    check_in_chart(field.chart, x)
    g = np.asarray(field.metric(x), dtype=float)
    if not np.all(np.isfinite(g)):
        raise DomainError(f"Metric {field.label!r} returned non-finite entries")
    return 0.5 * (g + np.swapaxes(g, -1, -2))


def metric_derivatives(
    field: MetricField, x, mode: Optional[str] = None, scale: float = 1.0
) -> np.ndarray:
    """All first partials d_l g_jk, returned as D[..., j, k, l]."""
    x = as_points(x)
    check_in_chart(field.chart, x)
    mode = mode or field.derivative_mode
    if mode == "analytic":
        if field.derivative is None:
            raise DomainError(f"Field {field.label!r} has no analytic derivatives")
        d = np.asarray(field.derivative(x), dtype=float)
    elif mode == "central":
        h = step_size(radius(x), scale)
        if np.any(radius(x) - h < field.chart.inner_radius * (1.0 - 1e-12)):
            raise DomainError("Central-difference stencil leaves the chart domain")
        d = central_partials(field.metric, x, order=2, scale=scale)
    else:
        raise DomainError(f"Unknown derivative mode {mode!r}")
    if not np.all(np.isfinite(d)):
        raise DomainError(f"Derivatives of {field.label!r} are not finite")
    return 0.5 * (d + np.swapaxes(d, -2, -3))


def check_positive_definite(field: MetricField, x) -> bool:
    g = eval_metric(field, x)
    return bool(np.all(np.linalg.eigvalsh(g) > 0.0))


def rotate_metric(field: MetricField, rotation: np.ndarray) -> MetricField:
    """Express ``field`` in coordinates x' with x = R x' (R orthogonal)."""
    R = np.asarray(rotation, dtype=float)
    if R.shape != (4, 4) or not np.allclose(R.T @ R, np.eye(4), atol=1e-12):
        raise DomainError("rotate_metric expects an orthogonal 4x4 matrix")

    def metric(x: np.ndarray) -> np.ndarray:
        g = field.metric(x @ R.T)
        return np.einsum("aj,...ab,bk->...jk", R, g, R)

    derivative = None
    if field.derivative is not None:
        def derivative(x: np.ndarray) -> np.ndarray:
            d = field.derivative(x @ R.T)
            return np.einsum("aj,bk,ml,...abm->...jkl", R, R, R, d)

    return MetricField(
        chart=field.chart,
        metric=metric,
        derivative=derivative,
        derivative_mode=field.derivative_mode,
        label=f"{field.label} (rotated)",
        potential=None,
        group_generator=None if field.group_generator is None else R.T @ field.group_generator @ R,
    )


def unitary_pushforward_defect(field: MetricField, gamma: np.ndarray, x) -> float:
    """Sup-norm of g(gamma x) - gamma g(x) gamma^T over the points ``x``.

    Zero (to round-off) when the field is invariant under the linear map ``gamma``.
    """
    G = np.asarray(gamma, dtype=float)
    x = as_points(x)
    lhs = eval_metric(field, x @ G.T)
    rhs = np.einsum("ja,...ab,kb->...jk", G, eval_metric(field, x), G)
    return float(np.max(np.abs(lhs - rhs)))
