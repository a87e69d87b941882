"""Moser flow: the time-dependent field X_t with X_t _| omega_t = -theta and its flow.

omega_t = (1 - t) omega0 + t omega. With the convention (X _| w)_k = X_j w_jk the
defining equation becomes the linear system omega_t X = theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..errors import ConvergenceError, DomainError
from ..geom.chart import AsymptoticChart, as_points, radius, step_size
from ..geom.forms import (
    DEFAULT_CLOSURE_TOL,
    OneFormField,
    TwoFormField,
    certify_closed,
    d_one_form,
    form_norm,
    potential_form,
    potential_primitive,
    standard_form,
)
from ..geom.falloff import NOISE_FLOOR, loglog_slope
from ..geom.potentials import OMEGA0, RadialKahlerPotential
from ..mass.quadrature import s3_rule
from .primitive import TangentialPerturbation

DEVIATION_BOUND = 1.0 / math.sqrt(2.0)
SOLVE_TOL = 1e-12
AUDIT_TIMES = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class PerturbationSpec:
    omega: TwoFormField
    theta: OneFormField
    working_radius: float
    safety_radius: float
    epsilon: float = 1.0
    group_generator: Optional[np.ndarray] = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self) -> None:
        if self.safety_radius < self.working_radius + 1.0 - 1e-12:
            raise DomainError(
                f"safety radius {self.safety_radius:g} must be >= working radius + 1"
                f" = {self.working_radius + 1.0:g}"
            )
        if self.working_radius < self.omega.chart.inner_radius:
            raise DomainError(
                f"working radius {self.working_radius:g} lies below the chart inner radius"
                f" {self.omega.chart.inner_radius:g}"
            )


@dataclass(frozen=True)
class PerturbationCheck:
    max_deviation: float
    primitive_defect: float
    min_pfaffian: float
    passed: bool


@dataclass
class FlowMap:
    seeds: np.ndarray
    images: np.ndarray
    steps: int
    t_range: tuple
    max_field_norm: float
    jacobian: Optional[np.ndarray] = None

    @property
    def h_t(self) -> float:
        return (self.t_range[1] - self.t_range[0]) / self.steps

    @property
    def radii(self) -> np.ndarray:
        return radius(self.seeds)

    @property
    def displacement(self) -> np.ndarray:
        return np.linalg.norm(self.images - self.seeds, axis=-1)

    @property
    def jacobian_defect(self) -> np.ndarray:
        if self.jacobian is None:
            raise ValueError("Flow map was integrated without a Jacobian estimate")
        return np.linalg.norm(self.jacobian - np.eye(4), ord=2, axis=(-2, -1))


@dataclass(frozen=True)
class FallOffFit:
    displacement_slope: float
    jacobian_slope: float
    passed: bool
    inconclusive: bool = False


def pfaffian(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return (
        w[..., 0, 1] * w[..., 2, 3]
        - w[..., 0, 2] * w[..., 1, 3]
        + w[..., 0, 3] * w[..., 1, 2]
    )


def cutoff(rho, safety_radius: float) -> np.ndarray:
    """C^2 smoothstep: 0 for rho <= c - 1.5, 1 for rho >= c - 1."""
    s = np.clip((np.asarray(rho, dtype=float) - (safety_radius - 1.5)) / 0.5, 0.0, 1.0)
    return s**3 * (10.0 - 15.0 * s + 6.0 * s * s)


def audit_grid(inner: float, outer: float, count: int = 5, n: int = 3) -> np.ndarray:
    dirs = s3_rule(n).nodes
    radii = np.geomspace(inner, outer, count)
    return (radii[:, None, None] * dirs[None, :, :]).reshape(-1, 4)


def check_perturbation(
    spec: PerturbationSpec,
    audit_points: Optional[np.ndarray] = None,
    closure_tol: float = DEFAULT_CLOSURE_TOL,
) -> PerturbationCheck:
    """Deviation gate, primitive check and non-degeneracy of omega_t on an audit grid."""
    b = spec.working_radius
    pts = as_points(audit_points) if audit_points is not None else audit_grid(b, 100.0 * b)
    if np.any(radius(pts) < b * (1.0 - 1e-12)):
        raise DomainError(f"Audit points must satisfy rho >= working radius {b:g}")
    w = spec.omega(pts)
    dev = float(np.max(form_norm(w - OMEGA0)))
    defect = float(np.max(np.abs(d_one_form(spec.theta.eval, pts) - (w - OMEGA0))))
    pf = min(float(np.min(pfaffian((1.0 - t) * OMEGA0 + t * w))) for t in AUDIT_TIMES)
    passed = dev < DEVIATION_BOUND and defect <= closure_tol and pf > 0.0
    return PerturbationCheck(dev, defect, pf, bool(passed))


def moser_field(spec: PerturbationSpec, x, t: float) -> np.ndarray:
    """X_t at the points x (shape (..., 4))."""
    x = as_points(x)
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"t must lie in [0, 1], got {t}")
    rho = radius(x)
    phi = cutoff(rho, spec.safety_radius)
    active = phi > 0.0
    out = np.zeros_like(x)
    if not np.any(active):
        return out
    xa = x[active]
    if np.any(rho[active] < spec.working_radius * (1.0 - 1e-12)):
        raise DomainError(f"X_t requested below the working radius {spec.working_radius:g}")
    w_t = (1.0 - t) * OMEGA0 + t * spec.omega(xa)
    theta = spec.theta(xa)
    try:
        X = np.linalg.solve(w_t, theta[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"omega_t is singular at t={t}: {exc}") from exc
    resid = np.linalg.norm(np.einsum("...jk,...k->...j", w_t, X) - theta, axis=-1)
    scale = np.maximum(np.linalg.norm(theta, axis=-1), np.finfo(float).tiny)
    if np.any(resid > SOLVE_TOL * scale):
        raise ConvergenceError(f"Moser system solved to {float(np.max(resid / scale)):.2e} only")
    out[active] = X * phi[active][..., None]
    return out


def integrate_flow(
    spec: PerturbationSpec,
    x0,
    steps: int,
    t_range: tuple = (0.0, 1.0),
    with_jacobian: bool = False,
    check_start: bool = True,
) -> FlowMap:
    """Fixed-step classical RK4 for dx/dt = X_t(x), vectorized over seeds."""
    if int(steps) != steps or steps < 1:
        raise DomainError(f"steps must be a positive integer, got {steps}")
    seeds = np.atleast_2d(as_points(x0)).astype(float)
    if check_start and np.any(radius(seeds) < spec.safety_radius * (1.0 - 1e-12)):
        raise DomainError(f"Seeds must satisfy rho >= safety radius {spec.safety_radius:g}")
    t0, t1 = float(t_range[0]), float(t_range[1])
    dt = (t1 - t0) / steps
    x = seeds.copy()
    max_norm = 0.0

    def field_at(p: np.ndarray, t: float) -> np.ndarray:
        nonlocal max_norm
        v = moser_field(spec, p, min(max(t, 0.0), 1.0))
        vmax = float(np.max(np.linalg.norm(v, axis=-1))) if v.size else 0.0
        max_norm = max(max_norm, vmax)
        if vmax >= 1.0:
            raise ConvergenceError(f"|X_t| = {vmax:.3f} >= 1 on the trajectory at t={t:.4f}")
        return v

    for i in range(steps):
        t = t0 + i * dt
        k1 = field_at(x, t)
        k2 = field_at(x + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = field_at(x + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = field_at(x + dt * k3, t + dt)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.any(np.linalg.norm(x - seeds, axis=-1) >= 1.0):
            raise ConvergenceError("Trajectory left the unit ball around its seed")

    flow = FlowMap(
        seeds=seeds, images=x, steps=int(steps), t_range=(t0, t1), max_field_norm=max_norm
    )
    if with_jacobian:
        flow.jacobian = flow_jacobian(spec, seeds, steps, t_range)
    return flow


def flow_jacobian(
    spec: PerturbationSpec, seeds, steps: int, t_range: tuple = (0.0, 1.0)
) -> np.ndarray:
    """D Phi by central differences of re-integrated stencil seeds."""
    seeds = np.atleast_2d(as_points(seeds))
    h = step_size(radius(seeds))
    stencil = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        stencil.append(seeds + h[:, None] * e)
        stencil.append(seeds - h[:, None] * e)
    allpts = np.concatenate(stencil, axis=0)
    if np.any(radius(allpts) < spec.safety_radius * (1.0 - 1e-3)):
        raise DomainError(
            "Jacobian stencil seed lies outside the certified region rho >= safety radius"
        )
    images = integrate_flow(spec, allpts, steps, t_range, check_start=False).images
    m = seeds.shape[0]
    jac = np.empty((m, 4, 4))
    for k in range(4):
        plus = images[(2 * k) * m : (2 * k + 1) * m]
        minus = images[(2 * k + 1) * m : (2 * k + 2) * m]
        jac[:, :, k] = (plus - minus) / (2.0 * h[:, None])
    det = np.linalg.det(jac)
    if np.any(det <= 0):
        raise ConvergenceError(
            f"Flow Jacobian determinant is not positive (min {float(np.min(det)):.3e})"
        )
    return jac


def pullback_residuals(flow: FlowMap, spec: PerturbationSpec, audit_points=None) -> np.ndarray:
    """|D Phi^T omega(Phi(x)) D Phi - omega0| at each audit point (the flow seeds by default)."""
    if audit_points is None:
        pts, images = flow.seeds, flow.images
        jac = flow.jacobian
        if jac is None:
            jac = flow_jacobian(spec, pts, flow.steps, flow.t_range)
    else:
        pts = np.atleast_2d(as_points(audit_points))
        images = integrate_flow(spec, pts, flow.steps, flow.t_range).images
        jac = flow_jacobian(spec, pts, flow.steps, flow.t_range)
    pulled = np.einsum("...aj,...ab,...bk->...jk", jac, spec.omega(images), jac)
    return np.asarray(form_norm(pulled - OMEGA0), dtype=float)


def pullback_residual(flow: FlowMap, spec: PerturbationSpec, audit_points=None) -> float:
    """sup of :func:`pullback_residuals`."""
    return float(np.max(pullback_residuals(flow, spec, audit_points)))


def falloff_fit(flow: FlowMap, epsilon: float, slope_tol: float = 0.1) -> FallOffFit:
    """Slopes of |Phi(x) - x| and |D Phi - I| against rho over the seeds."""
    rho = flow.radii
    if rho.max() / rho.min() < 10.0**1.5 * (1.0 - 1e-9):
        raise DomainError("Seeds must span at least 1.5 decades of rho")
    disp = flow.displacement
    if np.all(disp <= NOISE_FLOOR):
        return FallOffFit(float("nan"), float("nan"), True, inconclusive=True)
    jdef = flow.jacobian_defect
    s_disp = loglog_slope(rho, disp)
    s_jac = loglog_slope(rho, jdef)
    passed = s_disp <= -epsilon + slope_tol and s_jac <= -1.0 - epsilon + slope_tol
    return FallOffFit(s_disp, s_jac, bool(passed))


def find_safety_radius(
    spec: PerturbationSpec, outer: Optional[float] = None, count: int = 48, step: float = 0.25
) -> float:
    """Smallest sampled c >= b + 1 with |X_t| < 1 on rho >= c - 1 for the audit times.

    Sampling only; the result is not a certified bound.
    """
    b = spec.working_radius
    outer = outer or 100.0 * (b + 2.0)
    trial = PerturbationSpec(
        spec.omega, spec.theta, b, b + 1.5, spec.epsilon, spec.group_generator, spec.label
    )
    radii = np.geomspace(b, outer, count)
    dirs = s3_rule(3).nodes
    worst: List[float] = []
    for r in radii:
        pts = r * dirs
        norms = [np.max(np.linalg.norm(_raw_field(trial, pts, t), axis=-1)) for t in AUDIT_TIMES]
        worst.append(float(max(norms)))
    worst_arr = np.array(worst)
    c = b + 1.0
    while c - 1.0 <= outer:
        if np.all(worst_arr[radii >= c - 1.0] < 1.0):
            return float(c)
        c += step
    raise ConvergenceError(f"No safety radius found up to rho={outer:g}: |X_t| >= 1 persists")


def _raw_field(spec: PerturbationSpec, x: np.ndarray, t: float) -> np.ndarray:
    w_t = (1.0 - t) * OMEGA0 + t * spec.omega(x)
    return np.linalg.solve(w_t, spec.theta(x)[..., None])[..., 0]


def zero_spec(
    working_radius: float = 2.0, safety_radius: Optional[float] = None
) -> PerturbationSpec:
    chart = AsymptoticChart(inner_radius=1.0)
    theta = OneFormField(chart=chart, eval=lambda x: np.zeros(np.shape(x)), label="0")
    return PerturbationSpec(
        omega=standard_form(chart),
        theta=theta,
        working_radius=working_radius,
        safety_radius=safety_radius if safety_radius is not None else working_radius + 1.5,
        label="flat",
    )


def potential_spec(
    pot: RadialKahlerPotential,
    working_radius: float,
    safety_radius: Optional[float] = None,
    epsilon: float = 1.0,
    inner_radius: float = 1.0,
    group_generator: Optional[np.ndarray] = None,
    certify: bool = True,
) -> PerturbationSpec:
    """omega from a radial potential with the explicit primitive (u' - 1)/2 y.dx."""
    chart = AsymptoticChart(inner_radius=inner_radius, falloff_epsilon=epsilon)
    omega = potential_form(pot, chart)
    if certify:
        grid = audit_grid(working_radius, 100.0 * working_radius, count=3, n=3)
        omega = certify_closed(omega, grid)
    return PerturbationSpec(
        omega=omega,
        theta=potential_primitive(pot, chart),
        working_radius=working_radius,
        safety_radius=safety_radius if safety_radius is not None else working_radius + 1.5,
        epsilon=epsilon,
        group_generator=group_generator,
        label=pot.label,
    )


def tangential_spec(
    perturbation: TangentialPerturbation,
    working_radius: float,
    safety_radius: Optional[float] = None,
    inner_radius: float = 1.0,
) -> PerturbationSpec:
    eps = 1.0 - perturbation.power
    chart = AsymptoticChart(inner_radius=inner_radius, falloff_epsilon=eps)
    delta = perturbation.two_form(chart)
    omega = TwoFormField(
        chart=chart,
        eval=lambda x: OMEGA0 + delta.eval(x),
        label=f"omega0 + {delta.label}",
        closedness_certified=True,
    )
    return PerturbationSpec(
        omega=omega,
        theta=perturbation.one_form(chart),
        working_radius=working_radius,
        safety_radius=safety_radius if safety_radius is not None else working_radius + 1.5,
        epsilon=eps,
        group_generator=-np.eye(4),
        label=delta.label,
    )


def equivariance_defect(spec: PerturbationSpec, seeds: Sequence, steps: int) -> float:
    """sup |Phi(gamma x) - gamma Phi(x)| for the perturbation's group generator."""
    if spec.group_generator is None:
        raise DomainError("Spec carries no group generator")
    G = np.asarray(spec.group_generator, dtype=float)
    pts = np.atleast_2d(as_points(seeds))
    a = integrate_flow(spec, pts @ G.T, steps).images
    b = integrate_flow(spec, pts, steps).images @ G.T
    return float(np.max(np.abs(a - b)))
