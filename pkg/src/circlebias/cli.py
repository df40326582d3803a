"""Command-line front end: reproducible, file-based experiments.

Every result embeds a manifest (command, inputs, parameters, tool version,
output paths); identical manifests produce byte-identical JSON.  Randomized
commands require an explicit seed.  Sweep commands emit CSV with --csv and
render the same curve to a PNG with --plot.

Exit codes: 0 success, 1 invalid input, 2 numerical non-convergence.

Environment overrides for numerical defaults (documented here, read at
startup): CIRCLEBIAS_ROOT_TOL (root-finder residual tolerance, default
1e-10), CIRCLEBIAS_MAX_ITERS (root-finder iteration cap, default 200),
CIRCLEBIAS_CLUSTER_TOL (real-root clustering tolerance, default 1e-6).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .circle import exact_bias
from .newton import (
    bias_search,
    edge_approx_check,
    lower_chain,
    newton_polytope,
    runner_poly,
)
from .realroots import (
    BracketingError,
    PhaseSearchError,
    phase_curve,
    real_roots_driver,
    reduced_phase_inputs,
    vertex_phases,
)
from .runners import (
    EventBudgetError,
    antipodal_pairs,
    aperture_max_bias_exact,
    chernoff_experiment,
    max_bias_exact,
    max_bias_grid,
)
from .shapiro import (
    hadamard_power,
    parseval_check,
    flatness_check,
    shapiro_family,
    sup_norm,
)
from .unipoly import RootCountMismatch, RootFindingError, roots
from .jsonio import (
    bias_report_jsonable,
    bivariate_jsonable,
    build_manifest,
    csv_text,
    dumps,
    load_bivariate,
    load_dense_poly,
    load_points,
    load_runner_system,
    root_set_jsonable,
    runner_system_jsonable,
)

ROOT_TOL = float(os.environ.get("CIRCLEBIAS_ROOT_TOL", "1e-10"))
MAX_ITERS = int(os.environ.get("CIRCLEBIAS_MAX_ITERS", "200"))
CLUSTER_TOL = float(os.environ.get("CIRCLEBIAS_CLUSTER_TOL", "1e-6"))


def _read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _emit(args, command, inputs, params, result, csv=None, plot_spec=None):
    outputs = [p for p in (getattr(args, "out", None), getattr(args, "csv", None),
                           getattr(args, "plot", None)) if p]
    payload = {"manifest": build_manifest(command, inputs, params, outputs), "result": result}
    text = dumps(payload)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if getattr(args, "csv", None):
        if csv is None:
            raise ValueError("this command has no CSV output")
        header, rows = csv
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(csv_text(header, rows))
    if getattr(args, "plot", None):
        if plot_spec is None:
            raise ValueError("this command has no plot output")
        from .plots import save_curve

        save_curve(args.plot, **plot_spec)
    return 0


def _witness_jsonable(tw):
    out = {"t": float(tw.t), "report": bias_report_jsonable(tw.report)}
    if isinstance(tw.t, Fraction):
        out["t_exact"] = {"num": tw.t.numerator, "den": tw.t.denominator}
        out["bias_exact"] = {
            "num": tw.report.bias.numerator,
            "den": tw.report.bias.denominator,
        }
    return out


# ------------------------------------------------------------------ commands ----


def cmd_bias(args):
    points = load_points(_read_json(args.points))
    rep = exact_bias(points)
    return _emit(args, "bias", [args.points], {}, bias_report_jsonable(rep))


def cmd_runners_optimize(args):
    sys_ = load_runner_system(_read_json(args.system))
    params = {
        "mode": "grid" if args.grid else "exact",
        "aperture": str(args.aperture) if args.aperture is not None else None,
        "steps": args.grid,
        "refine": args.refine,
    }
    if args.grid:
        tw = max_bias_grid(
            sys_,
            steps=args.grid,
            refine_iters=args.refine,
            gamma=float(args.aperture) if args.aperture is not None else None,
        )
    elif args.aperture is not None:
        tw = aperture_max_bias_exact(sys_, args.aperture)
    else:
        tw = max_bias_exact(sys_)
    result = _witness_jsonable(tw)
    result["method"] = params["mode"]
    return _emit(args, "runners optimize", [args.system], params, result)


def cmd_runners_antipodal(args):
    sys_ = antipodal_pairs(args.k)
    return _emit(args, "runners antipodal", [], {"k": args.k}, runner_system_jsonable(sys_))


def cmd_runners_chernoff(args):
    rep = chernoff_experiment(args.n, args.trials, args.seed)
    rows = [(t["trial"], t["all_pass"], t["max_ratio"]) for t in rep["per_trial"]]
    return _emit(
        args,
        "runners chernoff",
        [],
        {"n": args.n, "trials": args.trials, "seed": args.seed},
        rep,
        csv=(["trial", "all_pass", "max_ratio"], rows),
        plot_spec={
            "xs": [r[0] for r in rows],
            "ys": [r[2] for r in rows],
            "xlabel": "trial",
            "ylabel": "max deviation ratio",
            "title": f"concentration check, n={args.n}",
        },
    )


def cmd_shapiro_gen(args):
    fam = shapiro_family(args.p, args.r)
    result = {
        "p": fam.p,
        "r": fam.r,
        "xi": {"re": fam.xi.real, "im": fam.xi.imag},
        "polys": [[[c.real, c.imag] for c in q.coeffs] for q in fam.polys],
    }
    return _emit(args, "shapiro gen", [], {"p": args.p, "r": args.r}, result)


def cmd_shapiro_verify(args):
    fam = shapiro_family(args.p, args.r)
    perr = parseval_check(fam, args.samples)
    flat = flatness_check(fam, args.oversample)
    result = {
        "p": args.p,
        "r": args.r,
        "parseval_error": perr,
        "parseval_ok": bool(perr < 1e-9),
        "flatness": flat,
        "all_ok": bool(perr < 1e-9 and flat["all_ok"]),
    }
    params = {"p": args.p, "r": args.r, "oversample": args.oversample, "samples": args.samples}
    return _emit(args, "shapiro verify", [], params, result)


def cmd_shapiro_et_bound(args):
    fam = shapiro_family(args.p, args.r)
    q0 = fam.polys[0].coeffs
    terms = []
    for k in range(1, args.K + 1):
        terms.append((k, sup_norm(hadamard_power(q0, k), args.oversample)))
    value = args.c * (1.0 + sum(norm / k for k, norm in terms))
    result = {
        "p": args.p,
        "r": args.r,
        "K": args.K,
        "c": args.c,
        "bound": value,
        "terms": [{"k": k, "sup_norm": v} for k, v in terms],
    }
    params = {"p": args.p, "r": args.r, "K": args.K, "c": args.c, "oversample": args.oversample}
    return _emit(
        args,
        "shapiro et-bound",
        [],
        params,
        result,
        csv=(["k", "sup_norm"], terms),
        plot_spec={
            "xs": [k for k, _ in terms],
            "ys": [v for _, v in terms],
            "xlabel": "Hadamard power k",
            "ylabel": "sampled sup-norm",
            "title": f"p={args.p}, r={args.r}",
        },
    )


def _edge_jsonable(e):
    grad = None
    if e.gradient is not None:
        grad = {"num": e.gradient.numerator, "den": e.gradient.denominator}
    return {"start": list(e.start), "end": list(e.end), "kind": e.kind, "gradient": grad}


def cmd_newton_analyze(args):
    f = load_bivariate(_read_json(args.poly))
    P = newton_polytope(f)
    result = {
        "num_terms": len(f.terms),
        "x_degree": f.x_degree,
        "y_degree": f.y_degree,
        "num_vertices": len(P.vertices),
        "vertices": [list(v) for v in P.vertices],
        "edges": [_edge_jsonable(e) for e in P.edges],
        "lower_chain": [list(v) for v in lower_chain(P)],
    }
    return _emit(args, "newton analyze", [args.poly], {}, result)


def cmd_newton_bias_search(args):
    f = load_bivariate(_read_json(args.poly))
    res = bias_search(f, phi_steps=args.phi_steps, radius=args.radius,
                      threads=args.threads, tol=ROOT_TOL)
    result = {
        "a": {"re": res.a.real, "im": res.a.imag},
        "bias": float(res.report.bias),
        "report": bias_report_jsonable(res.report),
        "lower_edges": res.s,
        "flipped": res.flipped,
        "radius": res.radius,
        "phi_steps": args.phi_steps,
    }
    rows = [(phi, bf, bs) for phi, bf, bs in res.rows]
    params = {"phi_steps": args.phi_steps, "radius": args.radius, "threads": args.threads}
    return _emit(
        args,
        "newton bias-search",
        [args.poly],
        params,
        result,
        csv=(["phi", "bias_f", "bias_fstar"], rows),
        plot_spec={
            "xs": [r[0] for r in rows],
            "ys": [r[1] for r in rows],
            "ys2": [r[2] for r in rows],
            "xlabel": "phi",
            "ylabel": "bias",
            "labels": ["f(x, radius*e^(i phi))", "f*(x, e^(i phi))"],
        },
    )


def cmd_newton_edge_check(args):
    f = load_bivariate(_read_json(args.poly))
    rep = edge_approx_check(f, phi=args.phi, r=args.r, eps=args.eps, tol=ROOT_TOL)
    params = {"phi": args.phi, "r": args.r, "eps": args.eps}
    return _emit(args, "newton edge-check", [args.poly], params, rep)


def cmd_newton_from_runners(args):
    sys_ = load_runner_system(_read_json(args.system))
    f = runner_poly(sys_, real=args.real)
    return _emit(args, "newton from-runners", [args.system], {"real": args.real},
                 bivariate_jsonable(f))


def cmd_realroots_drive(args):
    f = load_bivariate(_read_json(args.poly))
    res = real_roots_driver(f, grid_steps=args.grid_steps)
    result = {
        "a": {"re": res.a.real, "im": res.a.imag},
        "phi": res.phi,
        "r": res.r,
        "count": res.count,
        "intervals": [[lo, hi] for lo, hi in res.intervals],
        "s": res.s,
        "bound": res.bound,
        "variations": res.variations,
        "flipped": res.flipped,
        "fallback": res.fallback,
    }
    csv = (["phi", "variations"], [])
    plot_spec = None
    if not res.fallback:
        alphas, ns = reduced_phase_inputs(vertex_phases(res.poly))
        phis, V = phase_curve(alphas, ns, args.grid_steps)
        rows = list(zip((float(x) for x in phis), (int(v) for v in V)))
        csv = (["phi", "variations"], rows)
        plot_spec = {
            "xs": [r[0] for r in rows],
            "ys": [r[1] for r in rows],
            "xlabel": "phi",
            "ylabel": "sign variations",
        }
    return _emit(args, "realroots drive", [args.poly], {"grid_steps": args.grid_steps},
                 result, csv=csv, plot_spec=plot_spec)


def cmd_poly_roots(args):
    p = load_dense_poly(_read_json(args.poly))
    rs = roots(p, tol=ROOT_TOL, max_iters=MAX_ITERS)
    return _emit(args, "poly roots", [args.poly], {"tol": ROOT_TOL}, root_set_jsonable(rs))


# ------------------------------------------------------------------- parser ----


def _add_out(p, csv=False, plot=False):
    p.add_argument("--out", help="write the JSON result to this file instead of stdout")
    if csv:
        p.add_argument("--csv", help="write sweep rows as CSV to this file")
    if plot:
        p.add_argument("--plot", help="render the sweep to a PNG at this path")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="circlebias",
        description="sector bias of circle configurations, runner systems, "
        "flat polynomials, and Newton-polytope root angles",
        epilog="Numerical defaults honor CIRCLEBIAS_ROOT_TOL, "
        "CIRCLEBIAS_MAX_ITERS and CIRCLEBIAS_CLUSTER_TOL.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bias", help="worst-sector bias of a point configuration")
    p.add_argument("points", help="JSON array of circle positions")
    _add_out(p)
    p.set_defaults(func=cmd_bias)

    runners = sub.add_parser("runners", help="runner-system commands").add_subparsers(
        dest="sub", required=True
    )
    p = runners.add_parser("optimize", help="maximize bias over time")
    p.add_argument("system", help="runner system JSON")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true",
                      help="exact event sweep (default; integer speeds only)")
    mode.add_argument("--grid", type=int, metavar="N", help="time-grid scan with N steps")
    p.add_argument("--aperture", type=_fraction, default=None,
                   help="restrict to sectors of this aperture (rational)")
    p.add_argument("--refine", type=int, default=40, help="grid refinement rounds")
    _add_out(p)
    p.set_defaults(func=cmd_runners_optimize)

    p = runners.add_parser("antipodal", help="antipodal-pair counterexample family")
    p.add_argument("k", type=int)
    _add_out(p)
    p.set_defaults(func=cmd_runners_antipodal)

    p = runners.add_parser("chernoff", help="random-starts concentration experiment")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    _add_out(p, csv=True, plot=True)
    p.set_defaults(func=cmd_runners_chernoff)

    shap = sub.add_parser("shapiro", help="flat-polynomial commands").add_subparsers(
        dest="sub", required=True
    )
    p = shap.add_parser("gen", help="generate the DFT-recursion family")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    _add_out(p)
    p.set_defaults(func=cmd_shapiro_gen)

    p = shap.add_parser("verify", help="flatness and power-sum identities")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--oversample", type=int, default=16)
    p.add_argument("--samples", type=int, default=1024)
    _add_out(p)
    p.set_defaults(func=cmd_shapiro_verify)

    p = shap.add_parser("et-bound", help="harmonic sup-norm bias bound")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--oversample", type=int, default=16)
    _add_out(p, csv=True, plot=True)
    p.set_defaults(func=cmd_shapiro_et_bound)

    newt = sub.add_parser("newton", help="bivariate polynomial commands").add_subparsers(
        dest="sub", required=True
    )
    p = newt.add_parser("analyze", help="polytope vertices and edge classification")
    p.add_argument("poly")
    _add_out(p)
    p.set_defaults(func=cmd_newton_analyze)

    p = newt.add_parser("bias-search", help="scan substitutions for large root-angle bias")
    p.add_argument("poly")
    p.add_argument("--phi-steps", type=int, default=64)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--threads", type=int, default=None)
    _add_out(p, csv=True, plot=True)
    p.set_defaults(func=cmd_newton_bias_search)

    p = newt.add_parser("edge-check", help="validate the edge-product root forecast")
    p.add_argument("poly")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--eps", type=float, default=0.5)
    _add_out(p)
    p.set_defaults(func=cmd_newton_edge_check)

    p = newt.add_parser("from-runners", help="bivariate polynomial of a runner system")
    p.add_argument("system")
    p.add_argument("--real", action="store_true", help="conjugate-product real sibling")
    _add_out(p)
    p.set_defaults(func=cmd_newton_from_runners)

    rr = sub.add_parser("realroots", help="real-root driver").add_subparsers(
        dest="sub", required=True
    )
    p = rr.add_parser("drive", help="substitution with many distinct real roots")
    p.add_argument("poly")
    p.add_argument("--grid-steps", type=int, default=None)
    _add_out(p, csv=True, plot=True)
    p.set_defaults(func=cmd_realroots_drive)

    poly = sub.add_parser("poly", help="univariate polynomial commands").add_subparsers(
        dest="sub", required=True
    )
    p = poly.add_parser("roots", help="all roots with residual diagnostics")
    p.add_argument("poly")
    _add_out(p)
    p.set_defaults(func=cmd_poly_roots)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; that slot is reserved for
        # numerical non-convergence, usage problems are input errors
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (RootFindingError, BracketingError, PhaseSearchError, RootCountMismatch) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(dumps(diag))
        return 2
    except (ValueError, KeyError, OSError, EventBudgetError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
