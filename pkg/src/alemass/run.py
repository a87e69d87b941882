"""Scenario dispatch: one ``_run_<kind>`` per scenario kind, results cached by content hash."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .cohomass.formula import (
    SCALAR_COEFF,
    BlowupModel,
    DivisorData,
    blowup_from_potential,
    crosscheck_mass,
    mass_formula,
    penrose_check,
    positive_mass_check,
)
from .cohomass.intersection import IntersectionForm, signature
from .cohomass.scalar_integral import scalar_volume_integral
from .errors import AlemassError, DomainError, ScenarioRunError
from .geom.catalog import CATALOG, CATALOG_VERSION, build_metric, catalog_potential
from .geom.chart import MetricField, eval_metric
from .geom.curvature import scalar_curvature
from .geom.falloff import verify_falloff
from .geom.potentials import burns_potential
from .io.cache import BundleCache, cache_key
from .io.report import PlotSpec, ReportBundle, Table, Verdict
from .io.scenario import Scenario, Tolerances
from .mass.chrusciel import MassEstimate, chrusciel_mass
from .mass.quadrature import s3_rule
from .moser.flow import (
    check_perturbation,
    equivariance_defect,
    falloff_fit,
    find_safety_radius,
    integrate_flow,
    potential_spec,
    pullback_residuals,
    tangential_spec,
    zero_spec,
)
from .moser.primitive import TangentialPerturbation
from .orbifold.capsule import build_capsule, render_adjacency
from .orbifold.hj import dual_parameter, exact_determinant, hj_evaluate, hj_resolve, plumbing_matrix
from .utils.progress import note, step

EQUIVARIANCE_TOL = 1e-9
# axis, diagonal and mixed directions used to sample a metric for the positive-mass hypotheses
_SIGN_DIRECTIONS = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.5, 0.5, 0.5, 0.5],
    [0.6, 0.0, 0.0, 0.8],
])


@dataclass
class RunOutcome:
    scenario: Scenario
    bundle: ReportBundle
    cached: bool
    key: str


def _expect_verdict(rule: str, observed: bool, expected: Optional[bool], detail: str) -> Verdict:
    want = True if expected is None else expected
    return Verdict(rule, observed == want, f"observed={observed} expected={want}; {detail}")


def _mass_section(s: Scenario, bundle: ReportBundle, progress: bool) -> tuple:
    fld = build_metric(s.metric, curvature_tol=s.tolerances.curvature_tol)
    with step(f"boundary integrals for {s.metric.canonical()}", progress, tag="run"):
        est = chrusciel_mass(fld, s.numerics.schedule, s3_rule(s.numerics.quadrature_n))
    bundle.tables.append(Table(
        "mass",
        ("rho", "integrand", "running_extrapolation", "residual"),
        [(r, v, run, res) for (r, v), run, res in zip(est.samples, est.running, est.residuals)],
    ))
    bundle.plots.append(PlotSpec("convergence", "convergence", {
        "radii": [r for r, _ in est.samples],
        "values": [v for _, v in est.samples],
        "running": list(est.running),
        "limit": est.extrapolated_mass,
        "kappa": est.fitted_decay,
        "title": f"{s.name}: {s.metric.canonical()}",
    }))
    return fld, est


def _mass_detail(est: MassEstimate) -> str:
    flags = [f for f, on in (("warning", est.warning), ("noisy", est.noisy)) if on]
    return (
        f"m={est.extrapolated_mass:.10g} model={est.model} kappa={est.fitted_decay:.4g} "
        f"residual={est.residual:.3e}" + (f" flags={','.join(flags)}" if flags else "")
    )


def _mass_matches(s: Scenario, value: float) -> Verdict:
    want = float(s.expect.mass)
    tol = max(s.tolerances.mass_abs, s.tolerances.mass_rel * abs(want))
    detail = f"|{value:.10g} - {want:.10g}| <= {tol:.3e}"
    return Verdict("mass_value", abs(value - want) <= tol, detail)


def _run_mass(s: Scenario, bundle: ReportBundle, progress: bool) -> None:
    fld, est = _mass_section(s, bundle, progress)
    bundle.verdicts.append(
        _expect_verdict("mass_converged", est.converged, s.expect.converges, _mass_detail(est))
    )
    if s.expect.mass is not None and est.converged:
        bundle.verdicts.append(_mass_matches(s, est.extrapolated_mass))
    fo = verify_falloff(fld, slope_tol=s.tolerances.slope_tol)
    if fo.at_noise_floor:
        detail = "at noise floor"
    else:
        detail = f"slope_g={fo.slope_g:.3f} slope_dg={fo.slope_dg:.3f} eps={fo.epsilon:g}"
    bundle.verdicts.append(_expect_verdict("metric_falloff", fo.passed, s.expect.falloff, detail))


def _chain_table(name: str, chain: Sequence[int]) -> Table:
    mat = plumbing_matrix(chain)
    header = ("vertex",) + tuple(f"v{j}" for j in range(len(chain)))
    return Table(name, header, [(i,) + tuple(row) for i, row in enumerate(mat)])


def _definite_verdict(rule: str, chain: Sequence[int]) -> Verdict:
    pos, neg, zero = signature(IntersectionForm.from_rows(plumbing_matrix(chain)))
    return Verdict(rule, pos == 0 and zero == 0, f"signature=({pos},{neg},{zero})")


def _run_hj(s: Scenario, bundle: ReportBundle, progress: bool) -> None:
    q, p = s.hj
    hj = hj_resolve(q, p)
    dual = hj_resolve(q, dual_parameter(q, p))
    bundle.texts["chain"] = (
        f"q={q} p={p} chain={hj.render()}\n"
        f"dual p'={dual.p} chain={dual.render()}\n"
    )
    bundle.tables.append(_chain_table("plumbing", hj.chain))
    value = hj_evaluate(hj.chain)
    bundle.verdicts.append(Verdict("chain_value", value.numerator == q and value.denominator == p,
                                   f"[{','.join(map(str, hj.chain))}] = {value}"))
    det = exact_determinant(plumbing_matrix(hj.chain))
    bundle.verdicts.append(Verdict("plumbing_determinant", abs(det) == q, f"det={det}"))
    bundle.verdicts.append(_definite_verdict("negative_definite", hj.chain))


def _run_capsule(s: Scenario, bundle: ReportBundle, progress: bool) -> None:
    cs = s.capsule
    model = build_capsule(cs.ell, cs.kind, cs.local, cs.central_weight)
    bundle.texts["capsule"] = render_adjacency(model)
    rows = []
    for i, ch in enumerate(model.chains):
        det = exact_determinant(plumbing_matrix(ch.chain))
        rows.append((i, ch.q, ch.p, ch.render(), len(ch.chain), str(det)))
        bundle.verdicts.append(_definite_verdict(f"chain{i}_negative_definite", ch.chain))
    if rows:
        header = ("chain", "q", "p", "hj_string", "length", "determinant")
        bundle.tables.append(Table("chains", header, rows))
    bundle.verdicts.append(Verdict("degree", model.degree >= 3, f"degree={model.degree}"))
    weights = {n: model.tree.nodes[n]["weight"] for n in model.tree.nodes}
    members: List[List[int]] = []
    nid = 1
    for ch in model.chains:
        members.append(list(range(nid, nid + len(ch.chain))))
        nid += len(ch.chain)
    bundle.plots.append(PlotSpec("capsule", "capsule", {
        "nodes": [[n, "?" if w is None else str(w)] for n, w in sorted(weights.items())],
        "edges": sorted([sorted(e) for e in model.tree.edges]),
        "chains": members,
        "title": f"{s.name}: ell={model.ell} {model.gamma_check}",
    }))


def _moser_spec(s: Scenario):
    m = s.moser
    b = m.working_radius
    gen = -np.eye(4) if m.z2 else None
    if m.family == "zero":
        return zero_spec(b, m.safety_radius)
    if m.family == "tangential":
        pert = TangentialPerturbation(m.amplitude, m.power)
        spec = tangential_spec(pert, b, m.safety_radius or b + 1.5)
    else:
        spec = potential_spec(
            burns_potential(m.c), b, m.safety_radius or b + 1.5, group_generator=gen
        )
    if m.safety_radius is None:
        c = find_safety_radius(spec)
        spec = replace(spec, safety_radius=c)
    return spec


def _run_moser(s: Scenario, bundle: ReportBundle, progress: bool) -> None:
    tol = s.tolerances
    spec = _moser_spec(s)
    chk = check_perturbation(spec, closure_tol=tol.closure_tol)
    bundle.verdicts.append(Verdict(
        "perturbation_admissible", chk.passed,
        f"max|w-w0|={chk.max_deviation:.4g} primitive_defect={chk.primitive_defect:.3e} "
        f"min_pfaffian={chk.min_pfaffian:.4g}",
    ))
    seeds = np.array([[r, 0.0, 0.0, 0.0] for r in s.moser.seeds])
    label = f"integrating Moser flow ({s.numerics.steps} steps, {len(seeds)} seeds)"
    with step(label, progress, tag="run"):
        flow = integrate_flow(spec, seeds, s.numerics.steps, with_jacobian=True)
    residuals = pullback_residuals(flow, spec)
    pull = float(np.max(residuals))
    bundle.verdicts.append(Verdict("pullback", pull <= tol.pullback_tol, f"residual={pull:.3e}"))
    fit = falloff_fit(flow, spec.epsilon, tol.slope_tol)
    detail = "inconclusive (displacement at noise floor)" if fit.inconclusive else (
        f"slope_disp={fit.displacement_slope:.3f} slope_jac={fit.jacobian_slope:.3f}"
        f" eps={spec.epsilon:g}"
    )
    bundle.verdicts.append(_expect_verdict("flow_falloff", fit.passed, s.expect.falloff, detail))
    if spec.group_generator is not None:
        eq = equivariance_defect(spec, seeds, s.numerics.steps)
        bundle.verdicts.append(Verdict("equivariance", eq <= EQUIVARIANCE_TOL, f"defect={eq:.3e}"))

    bundle.tables.append(Table(
        "flow",
        ("rho", "displacement", "jacobian_defect", "pullback_residual"),
        [(float(r), float(d), float(j), float(e))
         for r, d, j, e in zip(flow.radii, flow.displacement, flow.jacobian_defect, residuals)],
    ))
    bundle.plots.append(PlotSpec("falloff", "moser", {
        "radii": [float(r) for r in flow.radii],
        "displacement": [float(d) for d in flow.displacement],
        "jacobian_defect": [float(j) for j in flow.jacobian_defect],
        "title": f"{s.name}: {spec.label} (b={spec.working_radius:g}, c={spec.safety_radius:g})",
    }))
    bundle.provenance["safety_radius"] = spec.safety_radius


def _formula_side(s: Scenario, fld, progress: bool) -> tuple:
    entry = CATALOG[s.metric.name]
    with step("total scalar curvature", progress, tag="run"):
        scalar = scalar_volume_integral(
            fld, s.numerics.inner_data, s.numerics.volume_schedule, s.numerics.volume_quadrature_n
        )
    if entry.chern == "blowup":
        pot = catalog_potential(s.metric)
        model = blowup_from_potential(pot, scalar)
        return mass_formula(model), model.chern_pairing, scalar
    if entry.chern == "ricci_flat":
        return SCALAR_COEFF * scalar, 0.0, scalar
    raise DomainError(f"Metric {s.metric.name!r} has no Chern data for the mass formula")


def _run_crosscheck(s: Scenario, bundle: ReportBundle, progress: bool) -> None:
    fld, est = _mass_section(s, bundle, progress)
    bundle.verdicts.append(
        _expect_verdict("mass_converged", est.converged, s.expect.converges, _mass_detail(est))
    )
    formula, chern, scalar = _formula_side(s, fld, progress)
    res = crosscheck_mass(est.extrapolated_mass, formula, s.tolerances.crosscheck_tol)
    bundle.tables.append(Table(
        "crosscheck",
        ("field_mass", "formula_mass", "rel_err", "chern_pairing", "scalar_integral"),
        [(res.lhs, res.rhs, res.rel_err, chern, scalar)],
    ))
    bundle.verdicts.append(Verdict(
        "crosscheck", res.passed,
        f"field={res.lhs:.10g} formula={res.rhs:.10g} rel_err={res.rel_err:.3e}"
        f" tol={s.tolerances.crosscheck_tol:g}",
    ))
    if s.expect.mass is not None:
        bundle.verdicts.append(_mass_matches(s, formula))


def _model_mass(s: Scenario) -> tuple:
    m = s.model
    if m.mass is not None:
        return m.mass, None
    areas = m.areas or ()
    if m.chern_pairing is not None:
        model = BlowupModel(len(areas), areas, m.chern_pairing, m.scalar_integral)
    else:
        model = BlowupModel.from_ae_blowup(areas, m.scalar_integral)
    return mass_formula(model), model


def _model_positive_mass(mass: float, model: Optional[BlowupModel], eq_tol: float):
    if model is None or model.scalar_integral < 0:
        return None
    flat = model.k == 0 and max(abs(model.chern_pairing), abs(model.scalar_integral)) <= eq_tol
    return positive_mass_check(mass, flat, eq_tol=eq_tol)


def _metric_positive_mass(mass: float, fld: MetricField, tol: Tolerances):
    """Sample s and g - I on the chart; a Euclidean sample counts as flat."""
    a = fld.chart.inner_radius
    radii = np.geomspace(1.5 * a, 100.0 * a, 6)
    pts = radii[:, None, None] * _SIGN_DIRECTIONS[None, :, :]
    s_min = float(np.min(scalar_curvature(fld, pts)))
    flat = float(np.max(np.abs(eval_metric(fld, pts) - np.eye(4)))) <= 1e-12
    return positive_mass_check(
        mass, flat, s_min >= -tol.curvature_tol, fld.chart.group_order, tol.eq_tol
    )


def _run_penrose(s: Scenario, bundle: ReportBundle, progress: bool) -> None:
    if s.model is not None:
        mass, model = _model_mass(s)
        source = "formula" if s.model.mass is None else "given"
    elif s.metric is not None:
        fld, est = _mass_section(s, bundle, progress)
        mass, source = est.extrapolated_mass, "boundary integral"
    else:
        raise DomainError("penrose scenarios need either a 'model' or a 'metric'")
    res = penrose_check(mass, DivisorData(s.divisors), s.tolerances.eq_tol)
    bundle.tables.append(Table(
        "penrose", ("mass", "lower_bound", "gap", "satisfied", "mass_source"),
        [(mass, res.lower_bound, res.gap, res.satisfied, source)],
    ))
    bundle.verdicts.append(_expect_verdict(
        "penrose_inequality", res.satisfied, s.expect.satisfied,
        f"m={mass:.10g} >= {res.lower_bound:.10g} (gap {res.gap:.3e})",
    ))
    if s.model is not None:
        pm = _model_positive_mass(mass, model, s.tolerances.eq_tol)
    else:
        pm = _metric_positive_mass(mass, fld, s.tolerances)
    if pm is not None and pm.applies:
        case = "equality (flat)" if pm.equality else "strict"
        bundle.verdicts.append(Verdict("positive_mass", pm.satisfied, f"m={mass:.10g}; {case}"))


_DISPATCH: Dict[str, Callable[[Scenario, ReportBundle, bool], None]] = {
    "mass": _run_mass,
    "hj": _run_hj,
    "capsule": _run_capsule,
    "moser": _run_moser,
    "crosscheck": _run_crosscheck,
    "penrose": _run_penrose,
}


def compute_bundle(s: Scenario, progress: bool = False) -> ReportBundle:
    bundle = ReportBundle(scenario=s.name, kind=s.kind)
    t0 = time.perf_counter()
    try:
        _DISPATCH[s.kind](s, bundle, progress)
    except (AlemassError, ValueError, RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        if isinstance(exc, ScenarioRunError):
            raise
        raise ScenarioRunError(s.name, exc) from exc
    bundle.provenance.update({
        "version": __version__,
        "catalog_version": CATALOG_VERSION,
        "quadrature_n": s.numerics.quadrature_n,
        "steps": s.numerics.steps,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    })
    if s.metric is not None:
        bundle.provenance["metric"] = s.metric.canonical()
    return bundle


def run_scenario(
    s: Scenario, cache_dir: Optional[str | Path] = None, progress: bool = False
) -> RunOutcome:
    """Run one scenario, reusing a cached bundle when the content hash matches."""
    key = cache_key(s.canonical())
    cache = BundleCache(cache_dir) if cache_dir is not None else None
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            note("cache", f"hit {key[:12]} for {s.name}", progress)
            return RunOutcome(s, hit, True, key)
    bundle = compute_bundle(s, progress)
    if cache is not None:
        cache.put(key, bundle)
        note("cache", f"stored {key[:12]} for {s.name}", progress)
    return RunOutcome(s, bundle, False, key)


def run_suite(
    scenarios: Sequence[Scenario],
    jobs: int = 1,
    cache_dir: Optional[str | Path] = None,
    progress: bool = False,
) -> List[RunOutcome | ScenarioRunError]:
    """Run scenarios on a thread pool; results come back in input order.

    A failing scenario yields its ScenarioRunError in place of an outcome.
    """
    names = [s.name for s in scenarios]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise DomainError(f"Suite has duplicate scenario names: {dupes}")

    def one(s: Scenario) -> RunOutcome | ScenarioRunError:
        try:
            return run_scenario(s, cache_dir, progress)
        except ScenarioRunError as exc:
            return exc

    if jobs <= 1:
        return [one(s) for s in scenarios]
    with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
        return list(pool.map(one, scenarios))

