"""Radial Kähler potentials u(t), t = |z|^2, and the structures they induce.

Coordinates are z1 = x1 + i x2, z2 = x3 + i x4. The standard complex structure J0
sends d/dx1 to d/dx2 and d/dx3 to d/dx4; for a real point x we write y = J0 x.
A radial potential gives the real metric

    g = u'(t) I + u''(t) (x x^T + y y^T)

and the Kähler form omega = J0^T g, so omega0 = dx1^dx2 + dx3^dx4 for u = t.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import DomainError
from .chart import AsymptoticChart, MetricField, as_points

ScalarFn = Callable[[np.ndarray], np.ndarray]

J0 = np.array(
    [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
)
OMEGA0 = J0.T.copy()


@dataclass(frozen=True)
class RadialKahlerPotential:
    """u and its first three t-derivatives, all vectorized over t."""

    u: ScalarFn
    du: ScalarFn
    d2u: ScalarFn
    d3u: ScalarFn
    domain_floor: float
    label: str = ""

    def scaled(self, lam: float) -> "RadialKahlerPotential":
        if not (lam > 0):
            raise DomainError(f"Potential scale must be positive, got {lam}")
        return RadialKahlerPotential(
            u=lambda t: lam * self.u(t),
            du=lambda t: lam * self.du(t),
            d2u=lambda t: lam * self.d2u(t),
            d3u=lambda t: lam * self.d3u(t),
            domain_floor=self.domain_floor,
            label=f"{lam:g}*{self.label}",
        )


def flat_potential() -> RadialKahlerPotential:
    return RadialKahlerPotential(
        u=lambda t: np.asarray(t, dtype=float),
        du=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        d2u=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        d3u=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        domain_floor=1e-12,
        label="flat",
    )


def burns_potential(c: float) -> RadialKahlerPotential:
    """u = t + c log t: scalar-flat, exceptional curve of area pi*c when c > 0."""
    c = float(c)
    # Tangential eigenvalue 1 + c/t needs t > -c when c < 0
    floor = max(1e-12, -c * (1.0 + 1e-9))
    return RadialKahlerPotential(
        u=lambda t: t + c * np.log(t),
        du=lambda t: 1.0 + c / t,
        d2u=lambda t: -c / t**2,
        d3u=lambda t: 2.0 * c / t**3,
        domain_floor=floor,
        label=f"burns(c={c:g})",
    )


def eguchi_hanson_potential(a: float) -> RadialKahlerPotential:
    """u = s + a^2 log(t / (a^2 + s)) with s = sqrt(t^2 + a^4); t u' = s, det h = 1."""
    a = float(a)
    if not (a > 0):
        raise DomainError(f"Eguchi-Hanson parameter a must be positive, got {a}")
    a2, a4 = a * a, a**4

    def s(t):
        return np.sqrt(t * t + a4)

    return RadialKahlerPotential(
        u=lambda t: s(t) + a2 * np.log(t / (a2 + s(t))),
        du=lambda t: s(t) / t,
        d2u=lambda t: -a4 / (s(t) * t * t),
        d3u=lambda t: a4 * (1.0 / (s(t) ** 3 * t) + 2.0 / (s(t) * t**3)),
        domain_floor=1e-12,
        label=f"eguchi_hanson(a={a:g})",
    )


def as_real_point(z) -> np.ndarray:
    """Accept complex (..., 2) or real (..., 4) coordinates and return real (..., 4)."""
    arr = np.asarray(z)
    if np.iscomplexobj(arr) or arr.shape[-1:] == (2,):
        if arr.shape[-1:] != (2,):
            raise DomainError(
                f"Complex points must have a trailing axis of length 2, got {arr.shape}"
            )
        arr = arr.astype(complex)
        z1, z2 = arr[..., 0], arr[..., 1]
        return np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1)
    return as_points(arr)


def _check_domain(pot: RadialKahlerPotential, t: np.ndarray) -> None:
    if np.any(t < pot.domain_floor):
        raise DomainError(
            f"|z|^2 = {float(np.min(t)):.6g} is below the domain floor"
            f" {pot.domain_floor:.6g} of {pot.label}"
        )


def hermitian_eigenvalues(pot: RadialKahlerPotential, t) -> tuple[np.ndarray, np.ndarray]:
    """(tangential, complex-radial) eigenvalues u' and u' + t u'' of the Hermitian form."""
    t = np.asarray(t, dtype=float)
    du = pot.du(t)
    return du, du + t * pot.d2u(t)


def _check_hermitian(pot: RadialKahlerPotential, t: np.ndarray) -> None:
    lam_tan, lam_rad = hermitian_eigenvalues(pot, t)
    if np.any(lam_tan <= 0) or np.any(lam_rad <= 0) or not np.all(np.isfinite(lam_tan + lam_rad)):
        raise DomainError(
            f"Hermitian form of {pot.label} is not positive definite at the sampled points"
        )


def _radial_metric(pot: RadialKahlerPotential, x: np.ndarray) -> np.ndarray:
    t = np.sum(x * x, axis=-1)
    y = x @ J0.T
    du = np.asarray(pot.du(t))[..., None, None]
    d2u = np.asarray(pot.d2u(t))[..., None, None]
    outer = x[..., :, None] * x[..., None, :] + y[..., :, None] * y[..., None, :]
    return du * np.eye(4) + d2u * outer


def _radial_metric_derivative(pot: RadialKahlerPotential, x: np.ndarray) -> np.ndarray:
    t = np.sum(x * x, axis=-1)
    y = x @ J0.T
    d2u = np.asarray(pot.d2u(t))
    d3u = np.asarray(pot.d3u(t))
    eye = np.eye(4)
    outer = x[..., :, None] * x[..., None, :] + y[..., :, None] * y[..., None, :]
    # D[j, k, l] = d_l g_jk
    term_u1 = 2.0 * d2u[..., None, None, None] * eye[:, :, None] * x[..., None, None, :]
    term_u2 = 2.0 * d3u[..., None, None, None] * outer[..., :, :, None] * x[..., None, None, :]
    dxx = eye[:, None, :] * x[..., None, :, None] + x[..., :, None, None] * eye[None, :, :]
    dyy = J0[:, None, :] * y[..., None, :, None] + y[..., :, None, None] * J0[None, :, :]
    return term_u1 + term_u2 + d2u[..., None, None, None] * (dxx + dyy)


def kahler_metric_from_potential(pot: RadialKahlerPotential, z) -> np.ndarray:
    x = as_real_point(z)
    t = np.sum(x * x, axis=-1)
    _check_domain(pot, t)
    _check_hermitian(pot, t)
    return _radial_metric(pot, x)


def kahler_form(pot: RadialKahlerPotential, z) -> np.ndarray:
    """omega = u' J0^T + u'' (x y^T - y x^T) at the given points."""
    x = as_real_point(z)
    t = np.sum(x * x, axis=-1)
    _check_domain(pot, t)
    _check_hermitian(pot, t)
    y = x @ J0.T
    du = np.asarray(pot.du(t))[..., None, None]
    d2u = np.asarray(pot.d2u(t))[..., None, None]
    xy = x[..., :, None] * y[..., None, :]
    return du * OMEGA0 + d2u * (xy - np.swapaxes(xy, -1, -2))


def kahler_primitive(pot: RadialKahlerPotential, z) -> np.ndarray:
    """1-form theta = (u' - 1)/2 * y . dx, which satisfies d theta = omega - omega0."""
    x = as_real_point(z)
    t = np.sum(x * x, axis=-1)
    _check_domain(pot, t)
    y = x @ J0.T
    return 0.5 * (np.asarray(pot.du(t)) - 1.0)[..., None] * y


def potential_metric_field(
    pot: RadialKahlerPotential,
    chart: Optional[AsymptoticChart] = None,
    label: Optional[str] = None,
) -> MetricField:
    chart = chart or AsymptoticChart()
    if chart.inner_radius**2 < pot.domain_floor:
        raise DomainError(
            f"Chart inner radius {chart.inner_radius} is inside the domain floor of {pot.label}"
        )
    return MetricField(
        chart=chart,
        metric=lambda x: _radial_metric(pot, x),
        derivative=lambda x: _radial_metric_derivative(pot, x),
        derivative_mode="analytic",
        label=label or pot.label,
        potential=pot,
    )


def reduced_sphere_area(pot: RadialKahlerPotential, rho) -> np.ndarray:
    """Symplectic area of the projected S^2 cycle of the sphere of radius rho.

    The Hopf quotient of S_rho carries total area pi * rho^2 * omega(e, J0 e) for a
    unit vector e orthogonal to x and J0 x, which equals pi * t * u'(t).
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    x = np.zeros(rho.shape + (4,))
    x[..., 0] = rho
    e = np.zeros(4)
    e[2] = 1.0
    om = kahler_form(pot, x)
    return np.pi * rho**2 * np.einsum("j,...jk,k->...", e, om, J0 @ e)

