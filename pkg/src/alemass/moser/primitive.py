from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad_vec

from ..errors import ConvergenceError, DomainError
from ..geom.chart import AsymptoticChart, as_points, radius
from ..geom.forms import DEFAULT_CLOSURE_TOL, OneFormField, TwoFormField, d_one_form


def _angle_function(x: np.ndarray) -> np.ndarray:
    """phi = Re(z1 conj(z2)) / |z|^2, invariant under the diagonal U(1) and under -I."""
    return (x[..., 0] * x[..., 2] + x[..., 1] * x[..., 3]) / np.sum(x * x, axis=-1)


def angle_gradient(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    rho2 = np.sum(x * x, axis=-1)[..., None]
    grad_n = x[..., [2, 3, 0, 1]]
    num = (x[..., 0] * x[..., 2] + x[..., 1] * x[..., 3])[..., None]
    return grad_n / rho2 - 2.0 * num * x / rho2**2


@dataclass(frozen=True)
class TangentialPerturbation:
    """theta = amplitude * rho^power * dphi with phi the U(1)-invariant angle function.

    d theta = amplitude * power * rho^(power-2) * (x ^ dphi), so power = 1 - eps gives
    the omega - omega0 = O(rho^(-1-eps)) fall-off.
    """

    amplitude: float
    power: float

    def profile(self, rho: np.ndarray) -> np.ndarray:
        return self.amplitude * np.asarray(rho, dtype=float) ** self.power

    def theta(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.profile(radius(x))[..., None] * angle_gradient(x)

    def d_theta(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        rho = radius(x)
        coef = (self.amplitude * self.power * rho ** (self.power - 2.0))[..., None, None]
        g = angle_gradient(x)
        outer = x[..., :, None] * g[..., None, :]
        return coef * (outer - np.swapaxes(outer, -1, -2))

    def one_form(self, chart: AsymptoticChart) -> OneFormField:
        label = f"tangential(k={self.amplitude:g},p={self.power:g})"
        return OneFormField(chart=chart, eval=self.theta, label=label)

    def two_form(self, chart: AsymptoticChart) -> TwoFormField:
        return TwoFormField(
            chart=chart,
            eval=self.d_theta,
            label=f"d tangential(k={self.amplitude:g},p={self.power:g})",
        )


def _radial_contraction(delta_omega: TwoFormField, pts: np.ndarray) -> np.ndarray:
    """r * (xhat _| delta_omega)(pts) with r = |pts|."""
    r = radius(pts)[..., None]
    return np.einsum("...j,...jk->...k", pts / r, delta_omega(pts)) * r


def radial_primitive_eval(delta_omega: TwoFormField, rho0: float, x: np.ndarray) -> np.ndarray:
    """psi(x) = (1/rho) int_{rho0}^{rho} r (xhat _| delta_omega)(r xhat) dr, xhat = x/rho.

    ``rho0 = inf`` integrates in from infinity using r = rho / w^2.
    """
    x = as_points(x)
    rho = radius(x)
    xhat = x / rho[..., None]
    shape = x.shape

    if math.isinf(rho0):
        def integrand(w: float) -> np.ndarray:
            r = rho / (w * w)
            val = _radial_contraction(delta_omega, r[..., None] * xhat)
            return (-2.0 * val * (rho / w**3)[..., None]).ravel()
    else:
        span = rho - rho0

        def integrand(s: float) -> np.ndarray:
            r = rho0 + s * span
            val = _radial_contraction(delta_omega, r[..., None] * xhat)
            return (val * span[..., None]).ravel()

    total, _err = quad_vec(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, norm="max")
    return np.asarray(total).reshape(shape) / rho[..., None]


def radial_primitive(
    delta_omega: TwoFormField,
    rho0: float,
    audit_points: Optional[np.ndarray] = None,
    tol: float = DEFAULT_CLOSURE_TOL,
) -> OneFormField:
    """Primitive of a closed 2-form obtained by integrating its radial contraction.

    With audit points the result is checked: d psi must reproduce delta_omega, or the
    residual closed form would need a correction on S^3 that is not built here.
    """
    if not delta_omega.closedness_certified:
        raise DomainError(
            f"radial_primitive needs a form certified closed, got {delta_omega.label!r}"
        )
    if not (rho0 > 0):
        raise DomainError(f"rho0 must be positive, got {rho0}")
    if not math.isinf(rho0) and rho0 < delta_omega.chart.inner_radius:
        raise DomainError(
            f"rho0={rho0} lies below the chart inner radius {delta_omega.chart.inner_radius}"
        )

    psi = OneFormField(
        chart=delta_omega.chart,
        eval=lambda x: radial_primitive_eval(delta_omega, rho0, x),
        label=f"radial primitive of {delta_omega.label} (rho0={rho0:g})",
    )
    if audit_points is not None:
        pts = as_points(audit_points)
        alpha = delta_omega(pts) - d_one_form(psi.eval, pts)
        resid = float(np.max(np.abs(alpha)))
        if resid > tol:
            raise ConvergenceError(
                f"Residual closed form |delta_omega - d psi| = {resid:.3e} exceeds {tol:.1e}; "
                "a correction 1-form on S^3 would be required and is not constructed"
            )
    return psi
