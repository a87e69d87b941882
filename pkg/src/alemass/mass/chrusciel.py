from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from ..errors import ConvergenceError, DomainError
from ..geom.chart import MetricField, metric_derivatives
from .quadrature import DEFAULT_N, QuadratureRule, s3_rule

# Gamma(n/2) / (4 (n-1) pi^(n/2)) for n = 4
MASS_NORMALIZATION = 1.0 / (12.0 * math.pi**2)

STENCIL_MARGIN = 1.5
DIVERGENT_KAPPA = 0.05
TWO_TERM_THRESHOLD = 1e-6
CONSTANT_SPREAD = 1e-10


@dataclass(frozen=True)
class PowerLawFit:
    limit: float
    kappa: float
    residual: float
    model: str  # "constant", "one-term" or "two-term"
    params: Tuple[float, ...] = ()

    def predict(self, radii: np.ndarray, r_ref: float) -> np.ndarray:
        x = np.asarray(radii, dtype=float) / r_ref
        if self.model == "constant":
            return np.full_like(x, self.limit)
        if self.model == "one-term":
            return _one_term(x, *self.params)
        return _two_term(x, *self.params)


@dataclass
class MassEstimate:
    samples: List[Tuple[float, float]]
    extrapolated_mass: float
    fitted_decay: float
    residual: float
    group_order: int
    model: str = "one-term"
    converged: bool = True
    warning: bool = False
    noisy: bool = False
    running: List[float] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)

    @property
    def radii(self) -> np.ndarray:
        return np.array([r for r, _ in self.samples])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples])


def default_schedule(inner_radius: float, k_min: int = 3, k_max: int = 10) -> List[float]:
    """rho_k = a * 2^k for k = k_min..k_max."""
    return [float(inner_radius) * 2.0**k for k in range(k_min, k_max + 1)]


def boundary_flux_density(field: MetricField, points: np.ndarray) -> np.ndarray:
    """(g_kl,k - g_kk,l) n_l at points on a sphere centred at the origin."""
    d = metric_derivatives(field, points)
    div = np.einsum("...klk->...l", d)
    trace_grad = np.einsum("...kkl->...l", d)
    normal = points / np.linalg.norm(points, axis=-1, keepdims=True)
    return np.sum((div - trace_grad) * normal, axis=-1)


def mass_integrand_at(
    field: MetricField, rho: float, rule: Optional[QuadratureRule] = None
) -> float:
    """Normalized boundary integral over S_rho / Gamma (full sphere divided by |Gamma|)."""
    rho = float(rho)
    if rho < STENCIL_MARGIN * field.chart.inner_radius:
        raise DomainError(
            f"rho={rho:.6g} is inside the stencil margin {STENCIL_MARGIN} x inner radius "
            f"{field.chart.inner_radius:.6g}"
        )
    rule = rule or s3_rule(DEFAULT_N)
    flux = boundary_flux_density(field, rho * rule.nodes)
    return MASS_NORMALIZATION * rho**3 * rule.integrate(flux) / field.chart.group_order


def _one_term(x, m_inf, amp, kappa):
    return m_inf + amp * x ** (-kappa)


def _two_term(x, m_inf, amp, kappa, amp2):
    return m_inf + amp * x ** (-kappa) + amp2 * x ** (-kappa - 1.0)


def _ratio_kappa(radii: np.ndarray, values: np.ndarray) -> Optional[float]:
    d = np.diff(values)
    est = []
    for i in range(len(d) - 1):
        if d[i] != 0 and d[i + 1] / d[i] > 0:
            q = radii[i + 2] / radii[i + 1]
            est.append(-math.log(d[i + 1] / d[i]) / math.log(q))
    return float(np.median(est)) if est else None


def _fit(func, x, v, p0) -> Tuple[np.ndarray, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OptimizeWarning)
        popt, _ = curve_fit(func, x, v, p0=p0, maxfev=20000)
    resid = v - func(x, *popt)
    return popt, float(np.sqrt(np.mean(resid**2)))


def _scaled_fit(popt: np.ndarray, res: float, model: str, vscale: float) -> PowerLawFit:
    params = [float(p) for p in popt]
    params[0] *= vscale
    params[1] *= vscale
    if model == "two-term":
        params[3] *= vscale
    return PowerLawFit(params[0], params[2], res * vscale, model, tuple(params))


def extrapolate(
    radii: Sequence[float], values: Sequence[float], kappa0: float = 1.0
) -> PowerLawFit:
    """Fit m(rho) = m_inf + A rho^-kappa, adding a rho^(-kappa-1) term if the residual is large."""
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.size < 3:
        raise DomainError(f"Need at least 3 samples to extrapolate, got {r.size}")
    scale = max(1.0, float(np.max(np.abs(v))))
    if float(np.ptp(v)) <= CONSTANT_SPREAD * scale:
        return PowerLawFit(float(np.mean(v)), float("inf"), float(np.std(v)), "constant")

    # Fit in units of the largest sample so tiny decaying tails stay well conditioned
    vscale = float(np.max(np.abs(v)))
    v = v / vscale
    x = r / r[-1]
    starts = [kappa0]
    guess = _ratio_kappa(r, v)
    if guess is not None and math.isfinite(guess):
        starts.append(guess)
    best: Optional[Tuple[np.ndarray, float]] = None
    for k0 in starts:
        amp0 = (v[0] - v[-1]) / (x[0] ** (-k0) - 1.0) if x[0] ** (-k0) != 1.0 else v[0] - v[-1]
        try:
            popt, res = _fit(_one_term, x, v, [v[-1] - amp0, amp0, k0])
        except (RuntimeError, ValueError):
            continue
        if np.all(np.isfinite(popt)) and (best is None or res < best[1]):
            best = (popt, res)
    if best is None:
        raise ConvergenceError(f"Power-law fit diverged from initial decay guesses {starts}")
    popt, res = best
    fit = _scaled_fit(popt, res, "one-term", vscale)

    if res * vscale > TWO_TERM_THRESHOLD and r.size >= 5:
        try:
            popt2, res2 = _fit(_two_term, x, v, [popt[0], popt[1], popt[2], 0.0])
        except (RuntimeError, ValueError):
            return fit
        if np.all(np.isfinite(popt2)) and res2 < res:
            fit = _scaled_fit(popt2, res2, "two-term", vscale)
    return fit


def check_schedule(
    schedule: Sequence[float], min_count: int = 4, decades: float = 2.0
) -> np.ndarray:
    r = np.asarray(schedule, dtype=float)
    if r.size < min_count:
        raise DomainError(f"Radius schedule needs >= {min_count} radii, got {r.size}")
    if np.any(np.diff(r) <= 0):
        raise DomainError("Radius schedule must be strictly increasing")
    if r[-1] / r[0] < 10.0**decades * (1.0 - 1e-9):
        raise DomainError(
            f"Radius schedule must span >= {decades:g} decades, got ratio {r[-1] / r[0]:.4g}"
        )
    return r


def chrusciel_mass(
    field: MetricField,
    schedule: Optional[Sequence[float]] = None,
    rule: Optional[QuadratureRule] = None,
    kappa0: Optional[float] = None,
) -> MassEstimate:
    """Mass limit from boundary integrals on the schedule's spheres."""
    if schedule is None:
        schedule = default_schedule(field.chart.inner_radius)
    r = check_schedule(schedule)
    rule = rule or s3_rule(DEFAULT_N)
    vals = np.array([mass_integrand_at(field, rho, rule) for rho in r])
    k0 = field.chart.falloff_epsilon if kappa0 is None else kappa0
    fit = extrapolate(r, vals, kappa0=k0)

    running: List[float] = []
    for i in range(r.size):
        if i < 2:
            running.append(float(vals[i]))
            continue
        try:
            running.append(extrapolate(r[: i + 1], vals[: i + 1], kappa0=k0).limit)
        except (ConvergenceError, DomainError):
            running.append(float(vals[i]))

    pred = fit.predict(r, r[-1])
    diffs = np.diff(vals)
    signs = np.sign(diffs[np.abs(diffs) > CONSTANT_SPREAD * max(1.0, float(np.max(np.abs(vals))))])
    noisy = bool(np.count_nonzero(np.diff(signs)) > 0) if signs.size > 1 else False
    converged = fit.model == "constant" or fit.kappa > DIVERGENT_KAPPA
    warning = fit.model != "constant" and abs(fit.limit - vals[-1]) > abs(vals[0] - vals[-1])
    return MassEstimate(
        samples=[(float(a), float(b)) for a, b in zip(r, vals)],
        extrapolated_mass=fit.limit,
        fitted_decay=fit.kappa,
        residual=fit.residual,
        group_order=field.chart.group_order,
        model=fit.model,
        converged=bool(converged),
        warning=bool(warning),
        noisy=noisy,
        running=running,
        residuals=[float(abs(a - b)) for a, b in zip(vals, pred)],
    )
