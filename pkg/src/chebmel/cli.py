"""Command-line front end.

Every subcommand writes one report (json, csv or text) to ``--out`` or stdout
and exits with 0 on success, 1 when a verification fails, 2 on usage or
configuration errors and 3 when a numeric scheme does not converge.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import (ChebError, ConvergenceError, DegenerateSystemError, DomainError,
                     EvaluationError,
                     ResolutionError, SpanMembershipError, UsageError)
from .families import compile_expr, parse_family
from .identities import SUITES, run_suite
from .melnikov import (PROP8_CASES, PiecewiseRadialModel, System9Model, System11Model,
                       bound_system11, coarse_bound_system11, m1_system9, m1_system10,
                       m1_system11, prop8_analyze, sweep, system9_realize, system9_window,
                       system11_window, window)
from .numeric.interval import interval
from .report import (FORMATS, Report, certificate_report, emit, suite_report, sweep_report,
                     zero_report)
from .verify import check_ct, check_ect
from .wronskian import (KernelSpec, kernel_wronskian_closed, kernel_wronskian_jet,
                        wronskian_continuous, wronskian_discrete, wronskian_prefixes)
from .zeros import combination, count_zeros, realize_zeros

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONVERGENCE = 0, 1, 2, 3
DEFAULT_TOL = 1e-11


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _load_json(arg: str | None, what: str):
    """A JSON document given inline or as a path."""
    if arg is None:
        return None
    text = arg
    if not arg.lstrip().startswith(("{", "[")):
        try:
            with open(arg, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {what} {arg!r}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} is not valid JSON: {exc}") from exc


def _config(args) -> dict:
    doc = _load_json(args.config, "config") or {}
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    return doc


def _opt(args, doc: dict, name: str, default=None):
    """Command-line value, else the config value, else the default."""
    v = getattr(args, name, None)
    if v is not None:
        return v
    return doc.get(name, default)


def _jobs(args) -> int:
    env = os.environ.get("CHEB_JOBS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise UsageError(f"CHEB_JOBS must be an integer, got {env!r}") from exc
    else:
        n = args.jobs or 1
    if n < 1:
        raise UsageError("jobs must be positive")
    return n


def _tol(args, doc, default=DEFAULT_TOL) -> float:
    t = float(_opt(args, doc, "tol", default))
    if not t > 0:
        raise UsageError("tolerances must be positive")
    return t


def _seed(args, doc) -> int:
    return int(_opt(args, doc, "seed", 0))


def _family_doc(args, doc: dict) -> dict:
    fam = _load_json(getattr(args, "family", None), "family") or doc.get("family")
    if fam is None:
        raise UsageError("a family spec is required (--family or 'family' in the config)")
    return fam


def _case(doc: dict, fallback: str) -> str:
    return str(doc.get("case", fallback))


# -- handlers ---------------------------------------------------------------------

def cmd_verify(args, kind: str):
    doc = _config(args)
    spec = _family_doc(args, doc)
    fam = parse_family(spec)
    seed = _seed(args, doc)
    grid = _opt(args, doc, "grid")
    if kind == "ect":
        cert = check_ect(fam, grid_n=int(grid or 400))
    else:
        cert = check_ct(fam, tuples_n=int(grid or 2000), seed=seed)
    rep = certificate_report(cert, _case(doc, fam.name or spec.get("kind", "")), seed,
                             {"threshold_rel": cert.threshold_rel})
    rep.payload["family"] = spec
    return rep, cert.passed


def cmd_wronskian(args):
    doc = _config(args)
    tol = _tol(args, doc, 1e-8)
    kernel = doc.get("kernel")
    if args.kernel_g is not None or kernel is not None:
        kernel = dict(kernel or {})
        g_src = args.kernel_g or kernel.get("g", "t")
        alpha = float(_opt(args, kernel, "alpha"))
        y = float(_opt(args, kernel, "y", 0.0))
        nodes = np.asarray(args.nodes or kernel.get("nodes"), float)
        E = interval(*kernel.get("E", (float(nodes.min()), float(nodes.max()))))
        U = interval(*kernel.get("U", (y - 1e-3, y + 1e-3)))
        ks = KernelSpec(compile_expr(g_src), alpha, E, U)
        closed = kernel_wronskian_closed(ks, y, nodes)
        jet = kernel_wronskian_jet(ks, y, nodes)
        rel = abs(closed - jet) / max(abs(closed), 1e-300)
        rep = Report("kernel-wronskian", _case(doc, "kernel"), None, {"rel": tol},
                     {"g": g_src, "alpha": alpha, "y": y, "nodes": nodes.tolist()},
                     ["closed", "jet", "relative_error"], [[closed, jet, rel]], rel <= tol)
        return rep, rel <= tol
    fam = parse_family(_family_doc(args, doc))
    if args.nodes is not None or "nodes" in doc:
        nodes = np.asarray(args.nodes if args.nodes is not None else doc["nodes"], float)
        W = wronskian_discrete(fam, nodes)
        rep = Report("wronskian", _case(doc, "discrete"), None, {},
                     {"nodes": nodes.tolist(), "labels": list(fam.labels)}, ["discrete"], [[W]])
        return rep, True
    pts = args.points if args.points is not None else doc.get("points")
    if pts is None:
        pts = fam.domain.grid(int(_opt(args, doc, "grid", 11)))
    pts = np.asarray(pts, float)
    P = wronskian_prefixes(fam, pts)
    full = wronskian_continuous(fam, pts)
    cols = ["t"] + [f"W{k}" for k in range(len(fam))]
    rows = [[float(t)] + [float(P[k, i]) for k in range(len(fam))] for i, t in enumerate(pts)]
    rep = Report("wronskian", _case(doc, "continuous"), None, {},
                 {"labels": list(fam.labels), "W": np.atleast_1d(full).tolist()}, cols, rows)
    return rep, True


def _model(doc: dict, system: int):
    m = doc.get("model", doc)
    try:
        if system == 9:
            return System9Model(int(m["m"]), tuple(m["lambda_hat"]))
        if system == 10:
            return PiecewiseRadialModel(int(m["m"]), float(m.get("a", 1.0)), tuple(m["radials"]),
                                        np.asarray(m.get("mu"), float) if "mu" in m else None)
        if system == 11:
            return System11Model(tuple(m.get("a", ())), tuple(m.get("b", ())), int(m["m"]),
                                 m.get("P"), m.get("Q"))
    except KeyError as exc:
        raise UsageError(f"model for system ({system}) is missing {exc}") from exc
    raise UsageError(f"unknown system {system}")


def _m1(model, system: int, tol: float):
    if system == 9:
        return lambda r: m1_system9(model, r, tol=tol), system9_window()
    if system == 10:
        return lambda r: m1_system10(model, r, tol=tol), window(model.domain)
    return lambda r: m1_system11(model, r, tol=tol), system11_window(model)


def cmd_melnikov(args):
    doc = _config(args)
    system = int(args.system or doc.get("system", 0))
    if system not in (9, 10, 11):
        raise UsageError("--system must be 9, 10 or 11")
    tol = _tol(args, doc)
    model = _model(doc, system)
    fn, win = _m1(model, system, tol)
    case = _case(doc, f"system{system}")
    tols = {"quadrature": tol}
    if args.sweep is not None:
        rhos = np.linspace(win[0], win[1], int(args.sweep))
        rep = sweep_report(sweep(fn, rhos, args.derivative), case, None, tols)
        return rep, True
    res = int(_opt(args, doc, "grid", 2048))
    zr = count_zeros(fn, interval(*win), res)
    rep = zero_report(zr, case, None, dict(tols, zero=1e-12))
    rep.payload["system"] = system
    if system == 11:
        rep.payload["bound"] = bound_system11(model)
        rep.payload["coarse_bound"] = coarse_bound_system11(model)
    if system == 9:
        rep.payload["bound"] = model.m
    return rep, True


def cmd_prop8(args):
    doc = _config(args)
    case = args.case or doc.get("case")
    if case not in PROP8_CASES:
        raise UsageError(f"--case must be one of {', '.join(PROP8_CASES)}")
    m = int(_opt(args, doc, "m", 1))
    seed = _seed(args, doc)
    radials = args.radials if args.radials is not None else doc.get("radials")
    trials = int(_opt(args, doc, "trials", 500))
    a = float(_opt(args, doc, "a", 1.0))
    res = int(_opt(args, doc, "grid", 2048))
    r = prop8_analyze(case, m, radials, trials, seed, a, res, args.jobs)
    ok = r.passed and r.realized_count == r.bound
    d = r.to_dict()
    counts = d.pop("random_counts")
    hist = np.bincount(np.asarray(counts, int)).tolist() if counts else []
    d["random_count_histogram"] = hist
    rep = Report("prop8", f"prop8({case}) m={m}", seed, {"fit": 1e-6, "zero": 1e-12}, d,
                 ["location"], [[z] for z in r.realized_zeros], ok)
    return rep, ok


def cmd_realize(args):
    doc = _config(args)
    targets = args.targets if args.targets is not None else doc.get("targets")
    res = int(_opt(args, doc, "grid", 4096))
    system = args.system or doc.get("system")
    if system is not None:
        if int(system) != 9:
            raise UsageError("realize supports --system 9 or a family spec")
        m = int(_opt(args, doc, "m", 1))
        lam, zr = system9_realize(m, targets, res)
        want = m
        coef, case = lam, f"system9 m={m}"
    else:
        fam = parse_family(_family_doc(args, doc))
        if targets is None:
            n = len(fam) - 1
            lo, hi = fam.domain.lo, fam.domain.hi
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise UsageError("targets are required on unbounded domains")
            targets = np.linspace(lo, hi, n + 2)[1:-1]
        coef = realize_zeros(fam, targets)
        E = fam.domain
        lo = E.lo if np.isfinite(E.lo) else min(targets) - 1.0
        hi = E.hi if np.isfinite(E.hi) else max(targets) + 1.0
        zr = count_zeros(combination(fam, coef), interval(lo, hi), res)
        want, case = len(targets), fam.name or "family"
    rep = zero_report(zr, _case(doc, case), None, {"zero": 1e-12})
    rep.payload["coefficients"] = [float(c) for c in coef]
    rep.payload["targets"] = [float(t) for t in np.asarray(targets, float)] if targets is not None \
        else None
    ok = zr.count == want and zr.all_simple
    rep.passed = ok
    return rep, ok


def cmd_identities(args):
    doc = _config(args)
    name = args.suite or doc.get("suite", "all")
    seed = _seed(args, doc)
    names = list(SUITES) if name == "all" else [name]
    results = [run_suite(n, seed) for n in names]
    if len(results) == 1:
        rep = suite_report(results[0])
    else:
        rows = [[f"{r.suite}: {c.label}", c.residual, c.threshold, c.passed]
                for r in results for c in r.checks]
        rep = Report("identities", "all", seed, {}, {"suites": names},
                     ["label", "residual", "threshold", "passed"], rows,
                     all(r.passed for r in results))
    return rep, all(r.passed for r in results)


# -- parser ----------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="JSON config (path or inline document)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--grid", type=int, help="grid size / scan resolution")
    p.add_argument("--jobs", type=int, help="worker threads (CHEB_JOBS overrides)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = _Parser(prog="chebmel", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"chebmel {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    for name, helptext in (("verify-ect", "certify an extended complete Chebyshev system"),
                           ("verify-ct", "certify a Chebyshev system from discrete Wronskians")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--family", help="family spec (JSON or path)")

    s = sub.add_parser("wronskian", parents=[common], help="continuous, discrete or kernel Wronskians")
    s.add_argument("--family")
    s.add_argument("--points", type=float, nargs="+")
    s.add_argument("--nodes", type=float, nargs="+")
    s.add_argument("--kernel-g", help="kernel (1 - y g(t))^(-alpha): the expression g")
    s.add_argument("--alpha", type=float)
    s.add_argument("--y", type=float)

    s = sub.add_parser("melnikov", parents=[common], help="zeros or sweeps of M1")
    s.add_argument("--system", type=int, choices=(9, 10, 11))
    s.add_argument("--sweep", type=int, metavar="N", help="tabulate M1 at N points")
    s.add_argument("--derivative", action="store_true", help="add dM1 to the sweep")

    s = sub.add_parser("prop8", parents=[common], help="bounds and realized zeros for piecewise systems")
    s.add_argument("--case", choices=PROP8_CASES)
    s.add_argument("--m", type=int)
    s.add_argument("--radials", type=float, nargs="+")
    s.add_argument("--trials", type=int)
    s.add_argument("--a", type=float)

    s = sub.add_parser("realize", parents=[common], help="combination with prescribed zeros")
    s.add_argument("--family")
    s.add_argument("--system", type=int, choices=(9,))
    s.add_argument("--m", type=int)
    s.add_argument("--targets", type=float, nargs="+")

    s = sub.add_parser("identities", parents=[common], help="run an identity suite")
    s.add_argument("--suite", choices=list(SUITES) + ["all"])
    return p


HANDLERS = {
    "verify-ect": lambda a: cmd_verify(a, "ect"),
    "verify-ct": lambda a: cmd_verify(a, "ct"),
    "wronskian": cmd_wronskian,
    "melnikov": cmd_melnikov,
    "prop8": cmd_prop8,
    "realize": cmd_realize,
    "identities": cmd_identities,
}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        args.jobs = _jobs(args)
        rep, ok = HANDLERS[args.command](args)
        if rep.seed is None:
            rep.seed = args.seed if args.seed is not None else 0
        rep.passed = bool(ok) if rep.passed is None else rep.passed
        text = emit(rep, args.format)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return EXIT_OK if ok else EXIT_FAIL
    except SystemExit as exc:          # --help / --version
        return int(exc.code or 0)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, ResolutionError, EvaluationError) as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DegenerateSystemError, SpanMembershipError) as exc:
        nodes = getattr(exc, "nodes", None)
        print(f"verification failed: {exc}" + (f" nodes={nodes}" if nodes else ""), file=sys.stderr)
        return EXIT_FAIL
    except (ChebError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
