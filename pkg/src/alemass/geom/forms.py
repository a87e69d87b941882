from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..errors import DomainError
from .chart import AsymptoticChart, PointFn, as_points, central_partials, check_in_chart
from .potentials import OMEGA0, RadialKahlerPotential, kahler_form, kahler_primitive

DEFAULT_CLOSURE_TOL = 1e-6


@dataclass(frozen=True)
class TwoFormField:
    chart: AsymptoticChart
    eval: PointFn
    label: str = ""
    closedness_certified: bool = False

    def __call__(self, x) -> np.ndarray:
        x = as_points(x)
        check_in_chart(self.chart, x, what="form point")
        w = np.asarray(self.eval(x), dtype=float)
        if not np.all(np.isfinite(w)):
            raise DomainError(f"Two-form {self.label!r} returned non-finite entries")
        return w


@dataclass(frozen=True)
class OneFormField:
    chart: AsymptoticChart
    eval: PointFn
    label: str = ""

    def __call__(self, x) -> np.ndarray:
        x = as_points(x)
        check_in_chart(self.chart, x, what="form point")
        a = np.asarray(self.eval(x), dtype=float)
        if not np.all(np.isfinite(a)):
            raise DomainError(f"One-form {self.label!r} returned non-finite entries")
        return a


def form_norm(w: np.ndarray) -> np.ndarray:
    """Euclidean norm of a 2-form, sqrt(sum_{j<k} w_jk^2)."""
    w = np.asarray(w, dtype=float)
    return np.sqrt(0.5 * np.sum(w * w, axis=(-1, -2)))


def d_one_form(theta: PointFn, x, order: int = 2) -> np.ndarray:
    """(d theta)_jk = d_j theta_k - d_k theta_j by central differences."""
    p = central_partials(theta, x, order=order)  # p[..., k, j] = d_j theta_k
    return np.swapaxes(p, -1, -2) - p


def d_two_form(omega: PointFn, x, order: int = 2) -> np.ndarray:
    """(d omega)_jkl = d_j w_kl + d_k w_lj + d_l w_jk by central differences."""
    p = central_partials(omega, x, order=order)  # p[..., a, b, m] = d_m w_ab
    t1 = np.einsum("...klj->...jkl", p)
    t2 = np.einsum("...ljk->...jkl", p)
    t3 = p
    return t1 + t2 + t3


def closure_defect(form: TwoFormField, audit_points) -> float:
    pts = as_points(audit_points)
    check_in_chart(form.chart, pts, what="audit point")
    return float(np.max(np.abs(d_two_form(form.eval, pts))))


def certify_closed(
    form: TwoFormField, audit_points, closure_tol: float = DEFAULT_CLOSURE_TOL
) -> TwoFormField:
    """Return ``form`` flagged closed, or raise if the numerical d(form) exceeds ``closure_tol``."""
    defect = closure_defect(form, audit_points)
    if defect > closure_tol:
        raise DomainError(
            f"Two-form {form.label!r} is not closed:"
            f" sup |d omega| = {defect:.3e} > {closure_tol:.1e}"
        )
    return replace(form, closedness_certified=True)


def primitive_defect(theta: OneFormField, delta_omega: TwoFormField, audit_points) -> float:
    """Sup-norm of d theta - delta_omega over the audit points."""
    pts = as_points(audit_points)
    check_in_chart(theta.chart, pts, what="audit point")
    return float(np.max(np.abs(d_one_form(theta.eval, pts) - delta_omega(pts))))


def standard_form(chart: Optional[AsymptoticChart] = None) -> TwoFormField:
    chart = chart or AsymptoticChart()
    return TwoFormField(
        chart=chart,
        eval=lambda x: np.broadcast_to(OMEGA0, np.shape(x)[:-1] + (4, 4)).copy(),
        label="omega0",
        closedness_certified=True,
    )


def potential_form(
    pot: RadialKahlerPotential, chart: Optional[AsymptoticChart] = None
) -> TwoFormField:
    chart = chart or AsymptoticChart()
    return TwoFormField(
        chart=chart, eval=lambda x: kahler_form(pot, x), label=f"omega[{pot.label}]"
    )


def potential_primitive(
    pot: RadialKahlerPotential, chart: Optional[AsymptoticChart] = None
) -> OneFormField:
    chart = chart or AsymptoticChart()
    return OneFormField(
        chart=chart, eval=lambda x: kahler_primitive(pot, x), label=f"theta[{pot.label}]"
    )


def difference_form(omega: TwoFormField) -> TwoFormField:
    """omega - omega0 on the same chart; closed whenever omega is."""
    return TwoFormField(
        chart=omega.chart,
        eval=lambda x: np.asarray(omega.eval(x)) - OMEGA0,
        label=f"{omega.label} - omega0",
        closedness_certified=omega.closedness_certified,
    )
