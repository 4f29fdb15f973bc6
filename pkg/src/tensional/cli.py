"""Command-line entry points and the run-report document.

Exit codes: 0 success, 1 an ``expect`` field did not match, 2 configuration
error, 3 numerical or domain error.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
import json
import math
import os
import sys
import time

from . import __version__
from . import casebook as Cb
from . import maps as Mp
from . import riemann as Rm
from . import submanifold as Sb
from .casebook import _clean
from .config import load_config
from .errors import ConfigError, NumericalError, ParseError, TensionalError
from .expr import parse, to_source

SCHEMA_VERSION = 1
EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
NUMERIC_EXPECT_REL = 1e-6


# -- tasks ----------------------------------------------------------------

def _points(chart, task, settings):
    n = task.get("n_points", settings["n_points"])
    return Rm.sample_points(chart, n, seed=settings["seed"])


def _task_classify_map(cfg, task, st):
    psi = cfg.maps[task["map"]]
    pts = _points(psi.source, task, st)
    rep = Mp.classify_map(psi, pts, st["classify"], st["jet_order"], st["seed"])
    data = rep.to_dict()
    verdicts = {k: data.pop(k) for k in ("harmonic", "hs_tensional", "hm_tensional",
                                          "nonharmonic_hs")}
    return verdicts, data


def _task_classify_submanifold(cfg, task, st):
    imm = Sb.Immersion(cfg.maps[task["map"]], name=task["map"])
    pts = _points(imm.map.source, task, st)
    rep = Sb.classify_submanifold(imm, pts, st["classify"], st["jet_order"])
    verdicts = {"verdict": rep.verdict, "minimal": rep.minimal,
                "hs_tensional": rep.hs_tensional, "hm_tensional": rep.hm_tensional}
    data = {"points": pts.tolist(), "tolerance": rep.tolerance,
            "mean_curvature_norm": rep.mean_curvature_norms,
            "hs_normal_residual": rep.hs_normal, "hs_tangential_residual": rep.hs_tangential,
            "hm_tangential_residual": rep.hm_tangential, "weitzenbock_residual": rep.weitzenbock}
    return verdicts, data


def _task_classify_curve(cfg, task, st):
    curve = Sb.Curve(cfg.maps[task["map"]], arclength=task.get("arclength", True),
                     name=task["map"])
    samples = _points(curve.map.source, task, st)[:, 0]
    rep = Sb.classify_curve(curve, samples, st["classify"])
    verdicts = {"verdict": rep.verdict, "geodesic": rep.geodesic,
                "hs_tensional": rep.hs_tensional}
    data = {"samples": samples.tolist(), "tolerance": rep.tolerance,
            "curvatures": rep.curvatures, "system_residual": rep.system_residuals,
            "frenet_residual": rep.frenet_residuals, "bitension_norm": rep.bitension_norms,
            "bitension_from_system": rep.bitension_from_system}
    return verdicts, data


def _task_rough_type(cfg, task, st):
    xi = cfg.fields[task["field"]]
    pts = _points(xi.chart, task, st)
    mode = task.get("mode", "tensorial")
    rep = Rm.rough_type_check(xi, pts, mode, st["identity"])
    verdicts = {"rough_type": rep.verdict, "tensorial": rep.tensorial_verdict,
                "coordinate": rep.coordinate_verdict, "modes_disagree": rep.modes_disagree}
    data = {"mode": mode, "points": pts.tolist(), "tolerance": rep.tolerance,
            "tensorial_residual": rep.tensorial_residuals,
            "coordinate_residual": rep.coordinate_residuals}
    return verdicts, data


def _task_convex(cfg, task, st):
    f = cfg.scalars[task["scalar"]]
    pts = _points(f.chart, task, st)
    ok, mins = Rm.is_strongly_convex_at(f, pts)
    return {"strongly_convex": ok}, {"points": pts.tolist(), "min_eigenvalue": mins,
                                     "threshold": Rm.EIG_THRESHOLD}


def _task_energy(cfg, task, st):
    psi = cfg.maps[task["map"]]
    box = [tuple(b) for b in task["box"]]
    q = Mp.energy(psi, box, task.get("resolution", 8), with_error=True)
    return {"energy": q.value}, {"box": task["box"], "resolution": q.resolution,
                                 "error_estimate": q.error_estimate}


def _task_casebook(cfg, task, st):
    cases = Cb.DEFAULT_SUITE if task.get("all") else (task["case"],)
    summary = Cb.run_all(st["seed"], cases)
    return {"passed": summary.passed}, summary.to_dict()


TASKS = {
    "classify_map": _task_classify_map,
    "classify_submanifold": _task_classify_submanifold,
    "classify_curve": _task_classify_curve,
    "check_rough_type": _task_rough_type,
    "check_convex": _task_convex,
    "energy": _task_energy,
    "casebook": _task_casebook,
}


def _compare(expect, verdicts, rel):
    mismatches = []
    for key in sorted(expect):
        want, got = expect[key], verdicts.get(key, "<missing>")
        if isinstance(want, (int, float)) and not isinstance(want, bool) and \
                isinstance(got, float):
            ok = abs(got - want) <= rel * max(1.0, abs(want))
        else:
            ok = got == want
        if not ok:
            mismatches.append({"key": key, "expected": want, "got": _clean(got)})
    return mismatches


def _run_task(cfg, index, task, settings):
    start = time.perf_counter()
    entry = {"index": index, "type": task["type"],
             "target": task.get("map") or task.get("field") or task.get("scalar")
             or task.get("case") or ("all" if task.get("all") else None)}
    try:
        verdicts, data = TASKS[task["type"]](cfg, task, settings)
    except NumericalError as exc:
        entry.update(status="error", error={"kind": type(exc).__name__, "message": str(exc)})
    else:
        entry.update(verdicts=_clean_tree(verdicts), result=_clean_tree(data))
        if "expect" in task:
            entry["expect"] = task["expect"]
            mism = _compare(task["expect"], verdicts,
                            task.get("expect_tolerance", NUMERIC_EXPECT_REL))
            entry["mismatches"] = mism
            entry["status"] = "mismatch" if mism else "ok"
        else:
            entry["status"] = "ok"
    return entry, time.perf_counter() - start


def _clean_tree(x):
    if isinstance(x, dict):
        return {str(k): _clean_tree(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean_tree(v) for v in x]
    return _clean(x)


def run(cfg, seed=None, tolerance=None, jet_order=None, parallel=1):
    """Execute every task; returns ``(report, exit_code)``."""
    t0 = time.perf_counter()
    settings = {
        "seed": cfg.sampling["seed"] if seed is None else seed,
        "n_points": cfg.sampling["n_points"],
        "jet_order": cfg.sampling["jet_order"] if jet_order is None else jet_order,
        "classify": cfg.tolerances["classify"] if tolerance is None else tolerance,
        "identity": cfg.tolerances["identity"],
    }
    work = lambda it: _run_task(cfg, it[0], it[1], settings)   # noqa: E731
    items = list(enumerate(cfg.tasks))
    if parallel and parallel > 1:
        with ThreadPoolExecutor(parallel) as pool:
            done = list(pool.map(work, items))
    else:
        done = [work(it) for it in items]
    tasks = [d[0] for d in done]
    statuses = {t["status"] for t in tasks}
    code = EXIT_NUMERICAL if "error" in statuses else (
        EXIT_MISMATCH if "mismatch" in statuses else EXIT_OK)
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "tensional", "version": __version__},
        "config_digest": cfg.digest,
        "settings": settings,
        "tasks": tasks,
        "passed": code == EXIT_OK,
        "exit_code": code,
        "timings": {"total_seconds": time.perf_counter() - t0,
                    "task_seconds": [d[1] for d in done]},
    }
    return report, code


def dumps_report(report):
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def format_text(report):
    lines = [f"tensional {report['tool']['version']}  config {report['config_digest'][:12]}  "
             f"seed {report['settings']['seed']}"]
    for t in report["tasks"]:
        head = f"[{t['index']}] {t['type']} {t['target']}: {t['status'].upper()}"
        if t["status"] == "error":
            lines.append(f"{head}  {t['error']['kind']}: {t['error']['message']}")
            continue
        pairs = ", ".join(f"{k}={v}" for k, v in sorted(t["verdicts"].items()))
        lines.append(f"{head}  {pairs}")
        for m in t.get("mismatches", []):
            lines.append(f"    expected {m['key']}={m['expected']}, got {m['got']}")
    lines.append("PASSED" if report["passed"] else f"FAILED (exit {report['exit_code']})")
    return "\n".join(lines) + "\n"


def summary_text(summary):
    lines = []
    for r in summary.reports:
        lines.append(f"{'PASS' if r.passed else 'FAIL'}  {r.case_id}")
        for c in r.failures():
            lines.append(f"    {c.quantity}: residual {c.residual:.3e} > {c.tolerance:.1e} "
                         f"({c.reference})")
    n = sum(r.passed for r in summary.reports)
    lines.append(f"{n}/{len(summary.reports)} cases passed")
    return "\n".join(lines) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- argument handling -----------------------------------------------------------

def _cmd_run(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fmt = args.format or cfg.output["format"]
    out = args.out or cfg.output["path"]
    try:
        report, code = run(cfg, args.seed, args.tolerance, args.jet_order, args.parallel)
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _emit(dumps_report(report) if fmt == "json" else format_text(report), out)
    return code


def _cmd_casebook(args):
    try:
        if args.case:
            cases = tuple(args.case)
            for c in cases:
                Cb.parse_case_id(c)
        else:
            cases = Cb.DEFAULT_SUITE
    except (TensionalError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summary = Cb.run_all(args.seed, cases)
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = (json.dumps(summary.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"
            if args.format == "json" else summary_text(summary))
    _emit(text, args.out)
    return EXIT_OK if summary.passed else EXIT_MISMATCH


def _cmd_check_expr(args):
    names = [v.strip() for v in args.vars.split(",") if v.strip()] if args.vars else []
    try:
        ast = parse(args.source, names)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(to_source(ast))
    return EXIT_OK


def _positive_float(text):
    v = float(text)
    if not v > 0 or math.isinf(v):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="tensional",
                                description="tension-field classification engine")
    p.add_argument("--version", action="version", version=f"tensional {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute the tasks of a configuration file")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--tolerance", type=_positive_float, help="classification tolerance")
    r.add_argument("--jet-order", type=int, choices=range(Mp.DEFAULT_ORDER, 7))
    r.add_argument("--parallel", type=int, nargs="?", const=os.cpu_count() or 2, default=1,
                   metavar="N", help="run tasks concurrently (report order is unchanged)")
    r.add_argument("--out")
    r.add_argument("--format", choices=("json", "text"))
    r.set_defaults(func=_cmd_run)

    c = sub.add_parser("casebook", help="run the built-in reference cases")
    g = c.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true", help="run the default suite (the default)")
    g.add_argument("--case", action="append", metavar="ID", help="e.g. 'kelvin(3,1)'")
    c.add_argument("--seed", type=int, default=Cb.DEFAULT_SEED)
    c.add_argument("--format", choices=("json", "text"), default="text")
    c.add_argument("--out")
    c.set_defaults(func=_cmd_casebook)

    e = sub.add_parser("check-expr", help="parse an expression and print its canonical form")
    e.add_argument("source")
    e.add_argument("--vars", default="")
    e.set_defaults(func=_cmd_check_expr)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
