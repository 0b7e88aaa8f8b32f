"""Command-line entry point.

Every subcommand writes ``manifest.json`` (all resolved parameters plus the
toolkit version), ``result.json`` (summary and pass/fail checks) and its
tables (CSV or JSON) into ``--out``.  The main result is also printed on
stdout.  Exit status: 0 success, 2 invalid input, 3 solver non-convergence.
"""

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import report as rpt
from .errors import FatouKitError, NonConvergenceError
from .exponents import (Geometry, capacity_energy, coefficient_roots, coefficients,
                        compute_exponents, martin_exponent_halfplane)
from .profiles import RadialProfile, classify, divergence_st, fd_divergence_oracle
from .tilted import (AHarmonicProfile, TiltedNorm, baseline_sign_sum, delta_for_target,
                     divergence_tilted, fd_tilted_oracle, grid_subsolution_check, lemma616_scan,
                     n0_derivative_bound, subsolution_threshold, w_grid)

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3


class ValidationError(FatouKitError, ValueError):
    def __init__(self, message, field=None, inequality=None):
        super().__init__(message)
        self.field = field
        self.inequality = inequality


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message, field=_field_from_message(message))


def _field_from_message(msg):
    for token in msg.replace(",", " ").replace("/", " ").split():
        if token.startswith("--"):
            return token[2:].replace("-", "_")
    if "argument command" in msg or "required: command" in msg:
        return "command"
    return None


def _real(text):
    """``"7/2"`` gives an exact Fraction, ``"3"`` an int, anything else a float."""
    text = str(text).strip()
    if "/" in text:
        return Fraction(text)
    try:
        return int(text)
    except ValueError:
        return float(text)



# --------------------------------------------------------------------- output

class Run:
    def __init__(self, command, args):
        self.command = command
        self.fmt = args.format
        self.out = Path(args.out or Path("fatoukit-out") / command)
        self.out.mkdir(parents=True, exist_ok=True)
        params = {k: _jsonable(v) for k, v in sorted(vars(args).items())
                  if k not in ("func", "out", "format")}
        self.manifest = {"tool": "fatoukit", "version": __version__, "command": command,
                         "format": self.fmt, "params": params}
        self.checks = []
        self.tables = []

    def check(self, *a, **kw):
        self.checks.append(rpt.check_row(*a, **kw))

    def table(self, name, columns, rows):
        rows = [[_jsonable(v) for v in r] for r in rows]
        if self.fmt == "json":
            path = self.out / f"{name}.json"
            path.write_text(json.dumps([dict(zip(columns, r)) for r in rows], indent=1))
        else:
            path = self.out / f"{name}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(columns)
                w.writerows(rows)
        self.tables.append(path.name)
        return path

    def finish(self, summary, stdout=None):
        (self.out / rpt.MANIFEST_FILE).write_text(json.dumps(self.manifest, indent=1, sort_keys=True))
        result = {"command": self.command, "summary": _jsonable(summary), "checks": self.checks,
                  "tables": self.tables}
        (self.out / rpt.RESULT_FILE).write_text(json.dumps(result, indent=1, sort_keys=True))
        print(stdout if stdout is not None else json.dumps(_jsonable(summary), sort_keys=True))
        return EXIT_OK


def _jsonable(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    return v


# ----------------------------------------------------------------- commands

def cmd_exponents(args):
    p = Fraction(args.p) if args.exact else args.p
    g = Geometry(args.n, args.k, p).check_regime()
    ex = compute_exponents(g)
    run = Run("exponents", args)
    summary = ex.as_dict()
    (a1, a2), (b1, b2) = coefficient_roots(g)
    summary["roots_A"] = [a1, a2]
    summary["roots_B"] = [b1, b2]
    res = [abs(float(coefficients(g, lam, ex.beta).A)) for lam in (a1, a2)]
    res += [abs(float(coefficients(g, lam, ex.beta).B)) for lam in (b1, b2)]
    run.check("root identities residual", max(res), 0.0, 1e-10)
    run.check("exponent ordering chi_breve <= chi <= k",
              float(ex.chi), passed=ex.chi_breve <= ex.chi <= g.k)
    if args.lambda_t is not None:
        bt = ex.beta if args.beta_t is None else args.beta_t
        summary["coefficients"] = list(coefficients(g, args.lambda_t, bt).as_tuple())
    if g.n == 2:
        summary["martin_halfplane"] = martin_exponent_halfplane(float(g.p))
    if args.radius:
        rows = [(r, capacity_energy(g, r)) for r in args.radius]
        run.table("capacity", ["r", "energy"], rows)
        summary["capacity_energy"] = {str(r): e for r, e in rows}
    return run.finish(summary)


def cmd_classify(args):
    g = Geometry(args.n, args.k, args.p)
    beta = compute_exponents(g).beta if args.beta is None else args.beta
    prof = RadialProfile(g, beta, args.lambda_t)
    cl = classify(prof)
    run = Run("classify", args)
    summary = {"kind": cl.kind, "boundary": cl.boundary, "witness": cl.witness,
               "quartic": list(cl.quartic)}
    if args.points:
        th = np.linspace(0.0, math.pi / 2.0, args.points + 2)[1:-1]
        s, t = np.sin(th), np.cos(th)
        vals = divergence_st(prof, s, t)
        run.table("divergence", ["s", "t", "divergence"], zip(s, t, np.broadcast_to(vals, s.shape)))
    if args.oracle_h:
        x = np.zeros(g.n)
        x[0], x[-1] = 0.6, 0.8
        fd = fd_divergence_oracle(prof, x, args.oracle_h)
        exact = float(divergence_st(prof, 0.8, 0.6))
        summary["oracle"] = {"fd": fd, "closed_form": exact}
        run.check("finite-difference oracle agreement", abs(fd - exact),
                  passed=abs(fd - exact) <= 1e-3 * max(1.0, abs(exact)))
    return run.finish(summary, stdout=cl.kind)


def cmd_aharm(args):
    run = Run("aharm-scan", args)
    if args.mode == "sign-table":
        w = w_grid(args.points)
        rows = []
        for b in [round(x, 1) for x in np.arange(-0.9, 0.95, 0.1)]:
            if b == 0:
                continue
            v = baseline_sign_sum(b, w)
            ok = bool(np.all(v > 0)) if b < 0 else bool(np.all(v < 0))
            rows.append((b, float(v.min()), float(v.max()), ok))
        run.table("sign_table", ["b", "min", "max", "sign_ok"], rows)
        run.check("baseline sign table", sum(not r[3] for r in rows), 0, 0)
        return run.finish({"rows": len(rows), "violations": sum(not r[3] for r in rows)})
    if args.mode == "lemma616":
        n_prime = lemma616_scan(args.b, args.p, n_max=args.n_max, n_points=args.points)
        run.check("half-space tilt scan finite n'", n_prime, passed=n_prime <= args.n_max)
        return run.finish({"n_prime": n_prime})
    if args.mode == "n0":
        n0 = n0_derivative_bound(args.b, args.p, n_max=args.n_max, n_points=args.points)
        return run.finish({"n0": n0})
    g = Geometry(args.n, args.k, args.p).check_regime()
    delta = delta_for_target(g) if args.delta is None else args.delta
    lam = float(compute_exponents(g).chi) if args.lambda_t is None else args.lambda_t
    prof = AHarmonicProfile(g, delta, lam)
    direction = np.zeros(g.n)
    if args.direction:
        direction = np.asarray(args.direction, dtype=float)
    else:
        direction[-1] = 1.0
    direction = direction / np.linalg.norm(direction)
    base = subsolution_threshold(TiltedNorm.zero(g.n, g.p), prof)
    m = args.fraction * base.bound
    tn = TiltedNorm(m * direction, g.p)
    rep = subsolution_threshold(tn, prof)
    worst, where = grid_subsolution_check(tn, prof, n_points=args.points)
    summary = {"delta": delta, "lambda": lam, "threshold": rep.bound,
               "threshold_k1": rep.lemma_k1_bound, "threshold_halfplane": rep.halfplane_bound,
               "norm_a": rep.norm_a, "grid_min_total": worst, "argmin": where}
    run.check("tilted subsolution on the sphere grid", worst, passed=worst >= 0.0)
    if args.oracle_h:
        x = np.zeros(g.n)
        x[0], x[-1] = 0.6, 0.8
        fd = fd_tilted_oracle(tn, prof, x, args.oracle_h)
        a = tn.vector
        k = g.k
        w1 = x[:k] / np.linalg.norm(x[:k])
        w2 = x[k:] / np.linalg.norm(x[k:])
        total = divergence_tilted(tn, prof, 0.8, 0.6, float(w1 @ a[:k]), float(w2 @ a[k:])).total
        summary["oracle"] = {"fd": fd, "closed_form": total}
        run.check("tilted oracle agreement", abs(fd - total),
                  passed=abs(fd - total) <= 1e-3 * max(1.0, abs(total)))
    return run.finish(summary)


def _grid(args, g):
    from .solver import SectorGrid, SlabGrid
    if args.grid == "sector":
        return SectorGrid(g, n_angle=args.n_angle, n_radial=args.n_radial, r_min=args.r_min,
                          r_max=args.r_max)
    if args.growth and args.growth != 1.0:
        return SlabGrid.graded(g, args.tau, args.nx, args.H, growth=args.growth)
    return SlabGrid(g, args.tau, args.nx, args.H, args.nz)


def _solver_options(args):
    return {"tol": args.tol, "max_iter": args.max_iter}


def cmd_solve(args):
    from .solver import (SectorGrid, convexity_diagnostic, oscillation_profile, smooth_bump,
                         solve, write_grid_dump, write_profile_csv)
    g = Geometry(args.n, args.k, args.p).check_regime()
    grid = _grid(args, g)
    tn = TiltedNorm(args.tilt, g.p) if args.tilt else None
    sector = isinstance(grid, SectorGrid)
    r = args.radius

    def datum(X):
        x = X[:, 0] if sector else X
        if args.datum == "bump":
            return (np.clip(1.0 - (np.abs(x) / r) ** 2, 0.0, None) ** 2 if sector
                    else np.prod(smooth_bump((x + 0.5 * grid.tau) % grid.tau - 0.5 * grid.tau, r), axis=1))
        if args.datum == "indicator":
            d = np.abs(x) if sector else np.linalg.norm((x + 0.5 * grid.tau) % grid.tau - 0.5 * grid.tau, axis=1)
            return np.clip((r - d) / (0.05 * r) + 0.5, 0.0, 1.0)
        if sector:
            raise ValidationError("the cosine datum needs a slab grid", field="datum")
        return np.prod(np.cos(2.0 * np.pi * X / grid.tau), axis=1)

    fld = solve(grid, datum, tn=tn, top=args.top, **_solver_options(args))
    run = Run("solve", args)
    summary = {"eps": fld.info.eps, "residual": fld.info.residual,
               "newton_steps": fld.info.newton_steps, "nodes": int(np.size(fld.values))}
    run.check("solver residual", fld.info.residual, passed=fld.info.residual <= args.tol)
    if sector:
        if g.n == 2 or args.convexity:
            conv = convexity_diagnostic(fld)
            run.table("convexity", ["threshold", "violations", "depth"],
                      zip(conv.thresholds, conv.violations, conv.depth))
            summary["convex"] = conv.convex
    else:
        if not grid.cylinder:
            write_grid_dump(fld, run.out / "grid.txt")
            run.tables.append("grid.txt")
        prof = oscillation_profile(fld)
        write_profile_csv(prof, run.out / "profile.csv")
        run.tables.append("profile.csv")
        arr = np.asarray(prof)
        summary["max_increase"] = float(max(0.0, np.max(np.diff(arr[:, 1])))) if len(arr) > 1 else 0.0
    return run.finish(summary)


def cmd_measure(args):
    from .solver import SectorGrid, convexity_diagnostic, martin_fit, measure_sweep
    g = Geometry(args.n, args.k, args.p).check_regime()
    grid = _grid(args, g)
    run = Run("measure-sweep", args)
    opts = _solver_options(args)
    ex = compute_exponents(g)
    if args.mode == "martin":
        res = martin_fit(grid, fit_range=(args.fit_lo, args.fit_hi), **opts)
        run.table("martin", ["r", "value"], zip(res.radii, res.values))
        summary = {"sigma": res.sigma, "residual": res.residual}
        if g.n == 2:
            target = martin_exponent_halfplane(float(g.p))
            summary["sigma_closed_form"] = target
            tol = 0.03 if float(g.p) == 2 else 0.05
            run.check("Martin exponent vs closed form", res.sigma, target, tol * target)
        run.check("Martin exponent bracket", res.sigma,
                  [float(ex.chi_breve), float(ex.chi)],
                  passed=float(ex.chi_breve) - 1e-9 <= res.sigma <= float(ex.chi) + 1e-9)
        if isinstance(grid, SectorGrid) and g.n == 2:
            conv = convexity_diagnostic(res.field)
            summary["convex"] = conv.convex
            run.check("superlevel-set convexity", sum(conv.violations), 0, 0)
        return run.finish(summary)
    radii = args.radii or [2.0 ** -e for e in range(6, 2, -1)]
    results, slope, resid = measure_sweep(grid, radii, **opts)
    run.table("measure", ["r", "value", "nearest", "interpolated"],
              [(m.r, m.value, m.nearest, m.interpolated) for m in results])
    summary = {"slope": slope, "residual": resid, "chi": float(ex.chi),
               "chi_breve": float(ex.chi_breve)}
    if ex.coincident:
        run.check("harmonic measure slope at coincident exponents", slope, float(ex.chi), 0.1)
    return run.finish(summary)


def cmd_psi(args):
    from .solver import SlabGrid, build_psi, monotonicity_defect
    g = Geometry(2 if args.n is None else args.n, 1 if args.n in (None, 2) else args.n - 1,
                 args.p).check_regime()
    run = Run("psi", args)
    rows = []
    for t in args.t:
        grid = SlabGrid.graded(g, args.tau, args.nx, args.H, growth=args.growth)
        fld, d = build_psi(grid, t, **_solver_options(args))
        defect = monotonicity_defect(d.profile)
        x = np.zeros((4, g.n))
        x[:, 0] = [0.1, 0.3, 0.5, 0.7]
        x[:, -1] = 0.25
        shifted = x.copy()
        shifted[:, 0] += args.tau
        interp = fld.interpolator()
        period_gap = float(np.max(np.abs(interp(x) - interp(shifted))))
        rows.append((t, d.xi, d.shift, d.b_bar, d.ratio, defect, d.theta, period_gap,
                     fld.info.residual))
    cols = ["t", "xi", "shift", "b_bar", "ratio", "monotonicity_defect", "theta", "period_gap",
            "residual"]
    run.table("psi", cols, rows)
    for r in rows:
        run.check(f"periodic bump t={r[0]:g}: |b_bar| >= 1e-3", abs(r[3]), passed=abs(r[3]) >= 1e-3)
        run.check(f"periodic bump t={r[0]:g}: oscillation monotone", r[5], 0.0, 10 * args.tol)
        run.check(f"periodic bump t={r[0]:g}: periodicity", r[7], 0.0, 0.0)
    if len(rows) > 1:
        ratios = [r[4] for r in sorted(rows, reverse=True)]
        run.check("height ratio decreasing in t", ratios,
                  passed=all(b < a for a, b in zip(ratios, ratios[1:])))
    return run.finish({c: [r[i] for r in rows] for i, c in enumerate(cols)})


def _wave(name, k):
    from .gapseries import cosine_wave, triangle_wave
    return {"cosine": cosine_wave, "triangle": triangle_wave}[name](k)


def cmd_gapseries(args):
    from .gapseries import (build_damping, divergence_statistics, divergent_coefficients,
                            gen_lacunary, maximal_stats, positive_coefficients,
                            quasi_orthogonality)
    plan = gen_lacunary(args.J)
    wave = _wave(args.wave, args.k)
    N = args.resolution
    run = Run("gapseries", args)
    coeffs = (positive_coefficients(args.J) if args.variant == "positive-vanishing"
              else divergent_coefficients(args.J))
    run.check("lacunary ratio bound", len(plan.ratio_violations()), 0, 0)
    qrows = []
    for j in range(2, plan.J + 1):
        if 16 * plan[j] > args.quad_resolution:
            break
        for m in range(1, j):
            q = quasi_orthogonality(wave, plan, m, j, args.quad_resolution)
            qrows.append((m, j, q.integral, q.bound, q.error, q.holds))
    run.table("quasi_orthogonality", ["m", "j", "integral", "bound", "error", "holds"], qrows)
    run.check("quasi-orthogonality bound", sum(not r[5] for r in qrows), 0, 0)
    st = build_damping(wave, plan, coeffs, args.variant, N, subgrid=args.subgrid)
    lo, hi = st.ratio_bounds()
    run.check("damping ratio in [1/2, 1]", [lo, hi], passed=lo >= 0.5 and hi <= 1.0)
    run.check("first damping factor identically 1", float(np.max(np.abs(st.L[0] - 1.0))), 0.0, 0.0)
    rows = []
    for j in range(1, st.J + 1):
        sizes = st.family_sizes[j - 1]
        sig = st.sigma[j - 1]
        q = np.quantile(sig, (0.1, 0.5, 0.9))
        rows.append((j, plan[j], st.resolved[j - 1], sizes.get("K", 0), sizes.get("F", 0),
                     sizes.get("H", 0), float(np.max(np.abs(sig))), float(sig.min()), *q,
                     st.lip_constants[j - 1] if j - 1 < len(st.lip_constants) else None))
    run.table("levels", ["level", "T", "resolved", "K", "F", "H", "sup_norm", "min", "q10", "q50",
                         "q90", "lip_over_T"], rows)
    summary = {"plan": list(plan.T), "sup_norms": st.sup_norms(), "ratio_bounds": [lo, hi]}
    if args.variant == "positive-vanishing":
        viol = int(sum(np.count_nonzero(s <= 0) for s in st.sigma))
        run.check("positivity of the damped series", viol, 0, 0)
        summary["positivity_violations"] = viol
    div = divergence_statistics(st)
    run.table("divergence", ["m"] + (["fraction", "median"] if args.variant == "bounded-divergent"
                                     else ["q10", "q50", "q90"]), div.rows)
    summary["trend"] = div.trend
    ms = maximal_stats(wave, plan, coeffs, N, subgrid=args.subgrid)
    summary["maximal"] = {"weak_constant": ms.weak_constant, "l2_ratio": ms.l2_ratio,
                          "l2_bound": ms.l2_bound}
    return run.finish(summary)


def cmd_counterexample(args):
    from .gapseries import (assemble_counterexample, build_damping, divergence_statistics,
                            divergent_coefficients, gen_lacunary, positive_coefficients)
    from .solver import PLaplaceSolver
    plan = gen_lacunary(max(args.levels, args.trend_J))
    solver = PLaplaceSolver(tol=args.tol, max_iter=args.max_iter)
    rep = assemble_counterexample(plan, p=args.p, levels=args.levels, nx=args.nx, H=args.H,
                                  variant=args.variant, growth=args.growth, solver=solver)
    run = Run("counterexample", args)
    run.table("layers", ["check", "index", "band_lo", "band_hi", "measured", "bound", "margin"],
              [(c.name, c.index, c.band[0], c.band[1], c.measured, c.bound, c.margin)
               for c in rep.checks])
    run.check("layered bounds: minimum margin", rep.min_margin, passed=rep.sandwich_holds)
    run.check("maximum principle", max(a - b for a, b in zip(rep.sup_extension, rep.sup_boundary)),
              passed=rep.max_principle_holds)
    wave = rep.state.wave
    coeffs = (positive_coefficients(args.trend_J) if args.variant == "positive-vanishing"
              else divergent_coefficients(args.trend_J))
    st = build_damping(wave, plan, coeffs, args.variant, args.trend_resolution, subgrid="surrogate")
    div = divergence_statistics(st)
    if args.variant == "bounded-divergent":
        mono = all(b >= a - 1e-15 for a, b in zip(div.trend, div.trend[1:]))
        run.check("median tail oscillation nondecreasing in J", div.trend[-1], passed=mono)
    summary = {"heights": rep.heights, "A": rep.A, "alpha": rep.alpha, "min_margin": rep.min_margin,
               "sup_extension": rep.sup_extension, "sup_boundary": rep.sup_boundary,
               "trend": div.trend}
    return run.finish(summary)


def cmd_report(args):
    rows = rpt.collect(args.artifacts)
    table = rpt.format_table(rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(rpt.to_csv(rows))
        (out / "report.json").write_text(json.dumps(rows, indent=1))
        (out / rpt.MANIFEST_FILE).write_text(json.dumps(
            {"tool": "fatoukit", "version": __version__, "command": "report",
             "params": {"artifacts": [str(a) for a in args.artifacts]}}, indent=1, sort_keys=True))
    print(table)
    return EXIT_OK


def cmd_run(args):
    path = Path(args.config)
    if not path.is_file():
        raise ValidationError(f"config file {path} not found", field="config")
    try:
        cfg = json.loads(path.read_text() or "{}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}", field="config") from exc
    return main(config_to_argv(cfg))


def config_to_argv(cfg):
    """Translate a config mapping into subcommand arguments."""
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object", field="config")
    cmd = cfg.get("command")
    if cmd is None:
        raise ValidationError("config lacks the required field 'command'", field="command")
    if cmd not in COMMANDS or cmd in ("run", "report"):
        raise ValidationError(f"unknown command {cmd!r}", field="command",
                              inequality="command in " + ", ".join(sorted(set(COMMANDS) - {"run", "report"})))
    argv = [cmd]
    for key, val in cfg.items():
        if key == "command":
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                argv.append(flag)
        elif isinstance(val, list):
            argv.append(flag)
            argv.extend(str(v) for v in val)
        elif val is not None:
            argv.extend([flag, str(val)])
    return argv


# ------------------------------------------------------------------- parser

def _common(sp):
    sp.add_argument("--out", default=None, help="output directory (default fatoukit-out/<command>)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")


def _geometry_args(sp, n=None, k=None, p=None):
    sp.add_argument("--n", type=int, required=n is None, default=n)
    sp.add_argument("--k", type=int, required=k is None, default=k)
    sp.add_argument("--p", type=_real, required=p is None, default=p)


def _grid_args(sp, grid="slab"):
    sp.add_argument("--grid", choices=("slab", "sector"), default=grid)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--nx", type=int, default=64)
    sp.add_argument("--H", type=float, default=4.0)
    sp.add_argument("--nz", type=int, default=256)
    sp.add_argument("--growth", type=float, default=1.0)
    sp.add_argument("--n-angle", type=int, default=128)
    sp.add_argument("--n-radial", type=int, default=512)
    sp.add_argument("--r-min", type=float, default=1e-3)
    sp.add_argument("--r-max", type=float, default=1e6)


def _solver_args(sp):
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=200)


def build_parser():
    ap = _Parser(prog="fatoukit", description="p-Laplace boundary-behaviour experiments")
    ap.add_argument("--version", action="version", version=f"fatoukit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("exponents", help="closed-form exponents and coefficient roots")
    _geometry_args(sp)
    sp.add_argument("--exact", action="store_true", help="rational arithmetic")
    sp.add_argument("--lambda-t", type=_real)
    sp.add_argument("--beta-t", type=_real)
    sp.add_argument("--radius", type=float, nargs="*", default=[])
    sp.set_defaults(func=cmd_exponents)

    sp = sub.add_parser("classify", help="sub/supersolution class of a homogeneous profile")
    _geometry_args(sp)
    sp.add_argument("--lambda", dest="lambda_t", type=_real, required=True)
    sp.add_argument("--beta", type=_real)
    sp.add_argument("--points", type=int, default=0)
    sp.add_argument("--oracle-h", type=float)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("aharm-scan", help="tilted-norm thresholds, sign tables and scans")
    sp.add_argument("--mode", choices=("threshold", "sign-table", "lemma616", "n0"),
                    default="threshold")
    _geometry_args(sp, n=3, k=1, p=3)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--lambda", dest="lambda_t", type=float)
    sp.add_argument("--fraction", type=float, default=0.5)
    sp.add_argument("--direction", type=float, nargs="*")
    sp.add_argument("--b", type=float, default=0.1)
    sp.add_argument("--n-max", type=int, default=1000)
    sp.add_argument("--points", type=int, default=10_000)
    sp.add_argument("--oracle-h", type=float)
    sp.set_defaults(func=cmd_aharm)

    sp = sub.add_parser("solve", help="solve on a slab or sector grid")
    _geometry_args(sp)
    _grid_args(sp)
    _solver_args(sp)
    sp.add_argument("--datum", choices=("cosine", "bump", "indicator"), default="cosine")
    sp.add_argument("--radius", type=float, default=0.25)
    sp.add_argument("--tilt", type=float, nargs="*")
    sp.add_argument("--top", default="neumann")
    sp.add_argument("--convexity", action="store_true")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("measure-sweep", help="harmonic measure slope or Martin exponent fit")
    sp.add_argument("--mode", choices=("measure", "martin"), default="measure")
    _geometry_args(sp)
    _grid_args(sp, grid="sector")
    _solver_args(sp)
    sp.add_argument("--radii", type=float, nargs="*")
    sp.add_argument("--fit-lo", type=float, default=30.0)
    sp.add_argument("--fit-hi", type=float, default=3.0e4)
    sp.set_defaults(func=cmd_measure)

    sp = sub.add_parser("psi", help="periodic bump solutions and their far-field constant")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--p", type=_real, default=3)
    sp.add_argument("--t", type=float, nargs="+", default=[1 / 16])
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--nx", type=int, default=256)
    sp.add_argument("--H", type=float, default=4.0)
    sp.add_argument("--growth", type=float, default=1.05)
    _solver_args(sp)
    sp.set_defaults(func=cmd_psi)

    sp = sub.add_parser("gapseries", help="lacunary plan, damping and series statistics")
    sp.add_argument("--J", type=int, default=6)
    sp.add_argument("--variant", choices=("bounded-divergent", "positive-vanishing"),
                    default="positive-vanishing")
    sp.add_argument("--wave", choices=("cosine", "triangle"), default="cosine")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--resolution", type=int, default=1 << 16)
    sp.add_argument("--quad-resolution", type=int, default=1 << 16)
    sp.add_argument("--subgrid", choices=("error", "surrogate"), default="surrogate")
    sp.set_defaults(func=cmd_gapseries)

    sp = sub.add_parser("counterexample", help="extensions of the damped sums and layered checks")
    sp.add_argument("--p", type=float, default=3.0)
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--nx", type=int, default=1728)
    sp.add_argument("--H", type=float, default=4.0)
    sp.add_argument("--growth", type=float, default=1.05)
    sp.add_argument("--variant", choices=("bounded-divergent", "positive-vanishing"),
                    default="bounded-divergent")
    sp.add_argument("--trend-J", type=int, default=8)
    sp.add_argument("--trend-resolution", type=int, default=1 << 16)
    _solver_args(sp)
    sp.set_defaults(func=cmd_counterexample)

    sp = sub.add_parser("run", help="run a JSON experiment config")
    sp.add_argument("config")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("report", help="pass/fail table over run directories")
    sp.add_argument("artifacts", nargs="*")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_report)
    for name, p in sub.choices.items():
        if name not in ("run", "report"):
            _common(p)
    return ap


COMMANDS = ("exponents", "classify", "aharm-scan", "solve", "measure-sweep", "psi", "gapseries",
            "counterexample", "run", "report")


def _diagnose(exc):
    info = {"error": type(exc).__name__, "message": str(exc)}
    for key in ("field", "inequality", "missing"):
        val = getattr(exc, key, None)
        if val:
            info[key] = val
    return json.dumps(info, sort_keys=True)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except NonConvergenceError as exc:
        print(_diagnose(exc), file=sys.stderr)
        return EXIT_NONCONVERGED
    except (FatouKitError, ValueError) as exc:
        print(_diagnose(exc), file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
