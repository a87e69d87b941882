from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from .config import load_config
from .errors import AlemassError, DomainError, ScenarioError, ScenarioRunError
from .geom.catalog import build_metric, list_catalog, make_spec
from .io.report import Table, emit_report, render_csv, summary_lines
from .io.scenario import parse_scenario, parse_suite
from .orbifold.capsule import build_capsule, parse_group_type, render_adjacency
from .orbifold.hj import dual_parameter, hj_resolve, plumbing_matrix
from .run import run_scenario, run_suite
from .utils.progress import note


def _conf(args: argparse.Namespace) -> dict:
    cli = {
        "cache_dir": getattr(args, "cache_dir", None),
        "output_dir": getattr(args, "out", None),
        "jobs": getattr(args, "jobs", None),
        "progress": False if getattr(args, "no_progress", False) else None,
    }
    return load_config(cli)


def _parse_local(text: Optional[str]) -> List[Tuple[int, int]]:
    # format: q1:p1,q2:p2
    out: List[Tuple[int, int]] = []
    for item in filter(None, (s.strip() for s in (text or "").split(","))):
        q, sep, p = item.partition(":")
        if not sep:
            raise ScenarioError(f"local type {item!r} is not of the form q:p", field="--local")
        try:
            out.append((int(q), int(p)))
        except ValueError:
            msg = f"local type {item!r} has non-integer entries"
            raise ScenarioError(msg, field="--local") from None
    return out


def cmd_run(args: argparse.Namespace) -> int:
    conf = _conf(args)
    progress = bool(conf["progress"])
    scenario = parse_scenario(args.scenario, int(conf["quadrature_n"]))
    cache_dir = None if args.no_cache else conf["cache_dir"]
    try:
        outcome = run_scenario(scenario, cache_dir, progress)
    except ScenarioRunError as exc:
        print(f"[run] FAILED {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out or scenario.output_dir or conf["output_dir"])
    for p in emit_report(outcome.bundle, out_dir):
        note("run", f"wrote {p}", progress)
    verdict = "PASS" if outcome.bundle.passed else "FAIL"
    print(f"[run] {scenario.name}: {verdict}{' (cached)' if outcome.cached else ''}")
    return 0 if outcome.bundle.passed else 1


def cmd_suite(args: argparse.Namespace) -> int:
    conf = _conf(args)
    progress = bool(conf["progress"])
    scenarios = [parse_scenario(p, int(conf["quadrature_n"])) for p in parse_suite(args.suite)]
    cache_dir = None if args.no_cache else conf["cache_dir"]
    note("suite", f"{len(scenarios)} scenarios, jobs={conf['jobs']}", progress)
    results = run_suite(scenarios, int(conf["jobs"]), cache_dir, progress)

    out_root = Path(args.out or conf["output_dir"])
    bundles = []
    failed = 0
    for s, res in zip(scenarios, results):
        if isinstance(res, ScenarioRunError):
            print(f"[suite] FAILED {res}", file=sys.stderr)
            failed += 1
            continue
        emit_report(res.bundle, out_root / s.name)
        bundles.append(res.bundle)
    for line in summary_lines(bundles):
        print(f"[suite] {line}")
    ok = failed == 0 and all(b.passed for b in bundles)
    passed = sum(b.passed for b in bundles)
    print(f"[suite] {'PASS' if ok else 'FAIL'}: {passed}/{len(scenarios)} passed")
    return 0 if ok else 1


def cmd_hj(args: argparse.Namespace) -> int:
    try:
        hj = hj_resolve(args.q, args.p)
    except ValueError as exc:
        raise ScenarioError(str(exc), field="q,p") from None
    dual = hj_resolve(args.q, dual_parameter(args.q, args.p))
    print(f"[hj] {args.q}/{args.p} = {hj.render()}  dual {args.q}/{dual.p} = {dual.render()}")
    mat = plumbing_matrix(hj.chain)
    table = Table("plumbing", ("vertex",) + tuple(f"v{j}" for j in range(len(mat))),
                  [(i,) + tuple(row) for i, row in enumerate(mat)])
    text = render_csv(table)
    if args.csv:
        Path(args.csv).write_text(text, encoding="utf-8")
        print(f"[hj] wrote {args.csv}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_capsule(args: argparse.Namespace) -> int:
    try:
        kind = parse_group_type(args.kind)
        model = build_capsule(args.ell, kind, _parse_local(args.local))
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc), field="--kind/--local") from None
    sys.stdout.write(render_adjacency(model))
    return 0


def cmd_catalog(args: argparse.Namespace) -> int:
    for entry in list_catalog():
        params = ",".join(f"{k}={v:g}" for k, v in sorted(entry.defaults.items()))
        status = "n/a"
        if entry.gated:
            try:
                build_metric(make_spec(entry.name, {}), gate=True)
                status = "admitted"
            except (DomainError, ArithmeticError) as exc:
                status = f"rejected ({exc})"
        print(f"{entry.name:<14} {params or '-':<18} gate={status:<10} {entry.description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="alemass", description="ALE Kähler mass toolkit")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("run", help="Run one scenario and write its report")
    sp.add_argument("scenario", type=str)
    sp.add_argument("--out", type=str, default=None, help="Output directory")
    sp.add_argument("--cache-dir", type=str, default=None)
    sp.add_argument("--no-cache", action="store_true")
    sp.add_argument("--no-progress", action="store_true", help="Disable progress logging")
    sp.set_defaults(func=cmd_run)

    ss = sub.add_parser("suite", help="Run every scenario listed in a suite file")
    ss.add_argument("suite", type=str)
    ss.add_argument("--out", type=str, default=None, help="Root of per-scenario output directories")
    ss.add_argument("--jobs", type=int, default=None)
    ss.add_argument("--cache-dir", type=str, default=None)
    ss.add_argument("--no-cache", action="store_true")
    ss.add_argument("--no-progress", action="store_true", help="Disable progress logging")
    ss.set_defaults(func=cmd_suite)

    sh = sub.add_parser(
        "hj", help="Hirzebruch-Jung string and plumbing matrix of a (q, p) singularity"
    )
    sh.add_argument("q", type=int)
    sh.add_argument("p", type=int)
    sh.add_argument("--csv", type=str, default=None, help="Write the plumbing matrix here")
    sh.set_defaults(func=cmd_hj)

    sc = sub.add_parser("capsule", help="Plumbing tree of a capsule")
    sc.add_argument("--ell", type=int, required=True)
    sc.add_argument(
        "--kind", type=str, required=True, help="e.g. cyclic(3), dihedral(2), tetrahedral"
    )
    sc.add_argument("--local", type=str, default="", help="Local types q1:p1,q2:p2,...")
    sc.set_defaults(func=cmd_capsule)

    sk = sub.add_parser("catalog", help="List catalog metrics and their admission status")
    sk.set_defaults(func=cmd_catalog)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args))
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AlemassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
