"""Command-line front end for reproducible batch runs.

Commands: ``indices``, ``regress``, ``decompose``, ``elasticities``,
``game {solve,verify,region}``, ``synth``, ``describe``. Shared flags:
``--format {csv,json,md}``, ``--out``, ``--seed``, ``--precision``,
``--jobs``.

Conventions: data goes to standard output or ``--out`` (written atomically);
diagnostics go to standard error; exit code 0 means the primary output was
fully produced. CSV and JSON renderings carry full-precision values so the
two are value-equivalent; ``--precision`` shapes the human-readable markdown
views. Panel CSVs emitted by ``synth`` are always full precision so reruns
are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib.resources import files as _pkg_files

import numpy as np

from . import game as game_mod
from .indices import indices_table
from .panel import (DescriptiveStats, PanelError, descriptive_stats,
                    load_employment, load_panel)
from .regression import (RegressionSpec, format_decomposition_table,
                         format_suite_grid, run_model_suite,
                         variance_decomposition)
from .regression import elasticity as _elasticity
from .synth import synthesize_panel

DEFAULT_SEED = 42  # documented reproducibility constant

__all__ = ["main", "build_parser", "load_correlation_csv"]


# ---------------------------------------------------------------------------
# shared plumbing


def _bundled(name: str) -> str:
    return _pkg_files("innoreg").joinpath("data", name).read_text(encoding="utf-8")


def load_correlation_csv(source) -> tuple:
    """(names, matrix) from a named square correlation CSV."""
    if isinstance(source, str):
        with open(source, newline="", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    names = [h.strip() for h in header[1:]]
    rows = {}
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        rows[row[0].strip()] = [float(c) for c in row[1:]]
    if sorted(rows) != sorted(names):
        raise PanelError("correlation CSV row names do not match its header")
    mat = np.array([rows[n] for n in names], dtype=float)
    return names, mat


def _write_text(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        sys.stdout.write(text)
        return
    tmp = f"{out}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, out)  # atomic per file


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt_cell(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _rows_to_json(rows) -> str:
    def clean(v):
        if isinstance(v, float) and math.isnan(v):
            return None
        return v
    return json.dumps([{k: clean(v) for k, v in r.items()} for r in rows],
                      indent=2) + "\n"


def _rows_to_md(rows, columns, precision: int) -> str:
    def disp(v):
        if isinstance(v, float):
            return f"{v:.{precision}f}"
        return str(v)
    lines = ["| " + " | ".join(columns) + " |",
             "|" + "|".join("---" for _ in columns) + "|"]
    for r in rows:
        lines.append("| " + " | ".join(disp(r.get(c, "")) for c in columns) + " |")
    return "\n".join(lines) + "\n"


def _emit_rows(rows, columns, args) -> None:
    if args.format == "json":
        text = _rows_to_json(rows)
    elif args.format == "md":
        text = _rows_to_md(rows, columns, args.precision)
    else:
        text = _rows_to_csv(rows, columns)
    _write_text(text, args.out)


# ---------------------------------------------------------------------------
# commands


def _cmd_indices(args) -> int:
    emp = load_employment(args.employment)
    industries = args.industries.split(",") if args.industries else None
    rows = indices_table(emp, industries=industries, scale=args.scale)
    _emit_rows(rows, ["region", "year", "theil", "related", "unrelated", "hoover"],
               args)
    return 0


def _cmd_describe(args) -> int:
    panel = load_panel(args.panel)
    variables = args.variables.split(",") if args.variables else None
    stats = descriptive_stats(panel, variables=variables)
    rows = [{"name": nm, "count": st.count, "mean": st.mean, "sd": st.sd,
             "min": st.min, "max": st.max}
            for nm, st in stats.variables.items()]
    _emit_rows(rows, ["name", "count", "mean", "sd", "min", "max"], args)
    return 0


def _result_rows(entries):
    rows = []
    for e in entries:
        if not e.ok:
            rows.append({"label": e.label, "error": e.error})
            continue
        r = e.result
        stars = r.stars()
        for i, nm in enumerate(r.names):
            rows.append({
                "label": e.label, "variable": nm,
                "coef": float(r.beta[i]), "se_robust": float(r.se_robust[i]),
                "se_classical": float(r.se_classical[i]), "stars": stars[i],
                "r_squared": r.r_squared, "f_stat": r.f_stat,
                "avg_vif": r.avg_vif if r.avg_vif is not None else math.nan,
                "n": r.n,
            })
    return rows


def _cmd_regress(args) -> int:
    panel = load_panel(args.panel)
    with open(args.specs, encoding="utf-8") as fh:
        raw = json.load(fh)
    specs = [RegressionSpec.from_dict(d) for d in raw]
    entries = run_model_suite(panel, specs, hc=f"HC{args.hc}", jobs=args.jobs)
    for e in entries:
        if not e.ok:
            print(f"spec {e.label!r} failed: {e.error}", file=sys.stderr)

    if args.format == "md":
        text = format_suite_grid(entries, precision=args.precision) + "\n"
    else:
        rows = _result_rows(entries)
        cols = ["label", "variable", "coef", "se_robust", "se_classical",
                "stars", "r_squared", "f_stat", "avg_vif", "n"]
        text = _rows_to_json(rows) if args.format == "json" \
            else _rows_to_csv(rows, cols)
    _write_text(text, args.out)
    if args.out:  # machine-readable companion for the human-format grid
        _write_text(_rows_to_json(_result_rows(entries)), args.out + ".json")
    if specs and all(not e.ok for e in entries):
        return 3
    return 0


def _cmd_decompose(args) -> int:
    panel = load_panel(args.panel)
    names = args.variables.split(",") if args.variables else list(panel.variables)
    decomps = [variance_decomposition(panel, nm) for nm in names]
    if args.format == "md":
        text = format_decomposition_table(decomps, precision=args.precision) + "\n"
        _write_text(text, args.out)
    else:
        rows = [{
            "variable": d.variable, "share_region": d.share_region,
            "share_time": d.share_time, "share_residual": d.share_residual,
            "systematic": d.systematic, "f_region": d.f_region,
            "p_region": d.p_region, "f_time": d.f_time, "p_time": d.p_time,
        } for d in decomps]
        cols = list(rows[0]) if rows else []
        _emit_rows(rows, cols, args)
    return 0


def _cmd_elasticities(args) -> int:
    with open(args.provenance, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        prov = list(reader)
    required = {"variable", "beta", "source_column", "x_mean", "y_mean"}
    stats = DescriptiveStats.from_csv(args.stats) if args.stats else None
    rows = []
    for rec in prov:
        if not required.issubset({k for k, v in rec.items() if v not in (None, "")}):
            raise PanelError(f"provenance row incomplete: {rec}")
        x_mean = float(rec["x_mean"])
        y_mean = float(rec["y_mean"])
        if stats is not None:  # recompute the means from the stats file
            x_mean = stats.get(rec["variable"]).mean
            y_mean = stats.get(args.dependent).mean
        value = _elasticity(float(rec["beta"]), x_mean, y_mean)
        row = {"variable": rec["variable"], "beta": float(rec["beta"]),
               "source_column": rec["source_column"], "x_mean": x_mean,
               "y_mean": y_mean, "elasticity": value}
        if rec.get("expected"):
            expected = float(rec["expected"])
            delta = value - expected
            row.update(expected=expected, delta=delta,
                       within_tol=int(abs(delta) <= args.tol))
        rows.append(row)
    cols = ["variable", "beta", "source_column", "x_mean", "y_mean",
            "elasticity", "expected", "delta", "within_tol"]
    _emit_rows(rows, cols, args)
    return 0


def _eq_rows(eq) -> list:
    return [{
        "q1": eq.q1, "q2": eq.q2, "r": eq.r, "r_squared": eq.r_squared,
        "price": eq.price, "leader_profit": eq.leader_payoff,
        "follower_profit": eq.follower_payoff,
        "r_real": int(eq.flags.r_real), "q1_nonneg": int(eq.flags.q1_nonneg),
        "q2_nonneg": int(eq.flags.q2_nonneg),
        "p_nonneg": int(eq.flags.price_nonneg),
    }]


def _cmd_game(args) -> int:
    p = args.precision
    if args.game_cmd == "solve":
        params = game_mod.MarketParams(a=args.a, c=args.c)
        if args.r is not None:
            eq = game_mod.equilibrium_at_royalty(params, args.r)
        else:
            eq = game_mod.spne(params)
        rows = _eq_rows(eq)
        if args.format == "md":
            lines = [f"a={args.a:g} c={args.c:g}"]
            if not eq.flags.r_real:
                lines.append(f"royalty not real: radicand {eq.r_squared:.{p}f} < 0")
            for key, val in rows[0].items():
                shown = f"{val:.{p}f}" if isinstance(val, float) else str(val)
                lines.append(f"{key:<16} {shown}")
            _write_text("\n".join(lines), args.out)
        else:
            _emit_rows(rows, list(rows[0]), args)
        return 0
    if args.game_cmd == "verify":
        params = game_mod.MarketParams(a=args.a, c=args.c)
        eq = game_mod.equilibrium_at_royalty(params, args.r)
        rep = game_mod.verify_equilibrium(params, eq, grid=args.grid,
                                          fd_step=args.fd_step, tol=args.tol)
        payload = {
            "a": args.a, "c": args.c, "r": args.r,
            "q1": eq.q1, "q2": eq.q2,
            "foc_follower_gap": rep.foc_follower_gap,
            "foc_leader_gap": rep.foc_leader_gap,
            "foc_royalty_gap": rep.foc_royalty_gap,
            "argmax_follower_gap": rep.argmax_follower_gap,
            "argmax_leader_gap": rep.argmax_leader_gap,
            "point_follower_gap": rep.point_follower_gap,
            "point_leader_gap": rep.point_leader_gap,
            "tolerance": rep.tolerance,
            **{f"check_{k}": int(v) for k, v in rep.checks.items()},
            "all_ok": int(rep.all_ok()),
        }
        if args.format == "md":
            lines = [f"verification at a={args.a:g} c={args.c:g} r={args.r:g} "
                     f"(q1={eq.q1:.{p}f}, q2={eq.q2:.{p}f})"]
            for k, gap in (("foc_follower", rep.foc_follower_gap),
                           ("foc_leader", rep.foc_leader_gap),
                           ("foc_royalty", rep.foc_royalty_gap),
                           ("argmax_follower", rep.argmax_follower_gap),
                           ("argmax_leader", rep.argmax_leader_gap),
                           ("point_follower", rep.point_follower_gap),
                           ("point_leader", rep.point_leader_gap)):
                mark = "ok" if rep.checks[k] else "FAIL"
                lines.append(f"  {k:<18} gap {gap:.3e}  [{mark}]")
            lines.append(f"all checks {'passed' if rep.all_ok() else 'FAILED'} "
                         f"at tolerance {rep.tolerance:g}")
            _write_text("\n".join(lines), args.out)
        else:
            _emit_rows([payload], list(payload), args)
        return 0
    # region
    a_vals = np.linspace(args.a_min, args.a_max, args.a_steps)
    c_vals = np.linspace(args.c_min, args.c_max, args.c_steps)
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            chunks = pool.map(
                lambda a: game_mod.feasibility_region([a], c_vals), a_vals)
        rows = [row for chunk in chunks for row in chunk]
    else:
        rows = game_mod.feasibility_region(a_vals, c_vals)
    _emit_rows(rows, ["a", "c", "r_real", "q1_nonneg", "q2_nonneg", "p_nonneg"],
               args)
    return 0


def _cmd_synth(args) -> int:
    stats_src = args.stats if args.stats else io.StringIO(_bundled("table2_stats.csv"))
    corr_src = args.corr if args.corr else io.StringIO(_bundled("table3_corr.csv"))
    stats = DescriptiveStats.from_csv(stats_src)
    names, corr = load_correlation_csv(corr_src)
    panel = synthesize_panel(stats, corr, seed=args.seed, regions=args.regions,
                             years=args.years, corr_names=names)
    print(json.dumps(panel.meta), file=sys.stderr)  # provenance diagnostics
    _write_text(panel.to_csv(), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--format", choices=("csv", "json", "md"), default="csv",
                        help="output rendering (default csv)")
    shared.add_argument("--out", default=None, help="output file (default stdout)")
    shared.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"random seed (default {DEFAULT_SEED})")
    shared.add_argument("--precision", type=int, default=4,
                        help="decimal places in markdown views (default 4)")
    shared.add_argument("--jobs", type=int, default=1,
                        help="concurrent workers for suites and sweeps")

    ap = argparse.ArgumentParser(prog="innoreg",
                                 description="regional innovation toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("indices", parents=[shared],
                       help="diversity/specialization indices per region-year")
    p.add_argument("employment", help="employment CSV "
                   "(region,year,industry,parent,employment)")
    p.add_argument("--industries", default=None,
                   help="comma-separated industry subset (e.g. manufacturing only)")
    p.add_argument("--scale", type=float, default=100.0,
                   help="hoover display multiplier (default 100)")
    p.set_defaults(fn=_cmd_indices)

    p = sub.add_parser("describe", parents=[shared],
                       help="descriptive statistics of a panel CSV")
    p.add_argument("panel")
    p.add_argument("--variables", default=None, help="comma-separated subset")
    p.set_defaults(fn=_cmd_describe)

    p = sub.add_parser("regress", parents=[shared],
                       help="pooled-OLS model suite from a JSON spec file")
    p.add_argument("panel")
    p.add_argument("--specs", required=True, help="JSON list of model specs")
    p.add_argument("--hc", type=int, choices=(0, 1, 2, 3), default=1,
                   help="robust covariance variant (default 1)")
    p.set_defaults(fn=_cmd_regress)

    p = sub.add_parser("decompose", parents=[shared],
                       help="region/time variance decomposition with F tests")
    p.add_argument("panel")
    p.add_argument("--variables", default=None, help="comma-separated subset")
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("elasticities", parents=[shared],
                       help="grand-mean elasticities from a provenance file")
    p.add_argument("provenance",
                   help="CSV: variable,beta,source_column,x_mean,y_mean[,expected]")
    p.add_argument("--stats", default=None,
                   help="stats CSV overriding the provenance means")
    p.add_argument("--dependent", default="PATINT",
                   help="dependent variable for --stats means (default PATINT)")
    p.add_argument("--tol", type=float, default=0.01,
                   help="absolute tolerance for the within_tol flag")
    p.set_defaults(fn=_cmd_elasticities)

    p = sub.add_parser("game", parents=[shared],
                       help="patent-licensing duopoly solver and oracle")
    gsub = p.add_subparsers(dest="game_cmd", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", type=float, required=True, help="demand intercept")
    common.add_argument("--c", type=float, required=True, help="marginal cost")
    g = gsub.add_parser("solve", parents=[shared, common],
                        help="equilibrium (omit --r for the full game)")
    g.add_argument("--r", type=float, default=None,
                   help="evaluate at a fixed royalty instead of solving stage 1")
    g.set_defaults(fn=_cmd_game)
    g = gsub.add_parser("verify", parents=[shared, common],
                        help="finite-difference / grid-search oracle report")
    g.add_argument("--r", type=float, required=True)
    g.add_argument("--grid", type=int, default=4000)
    g.add_argument("--fd-step", type=float, default=1e-5)
    g.add_argument("--tol", type=float, default=1e-6)
    g.set_defaults(fn=_cmd_game)
    g = gsub.add_parser("region", parents=[shared],
                        help="feasibility flags over an (a, c) grid")
    g.add_argument("--a-min", type=float, required=True)
    g.add_argument("--a-max", type=float, required=True)
    g.add_argument("--a-steps", type=int, default=25)
    g.add_argument("--c-min", type=float, required=True)
    g.add_argument("--c-max", type=float, required=True)
    g.add_argument("--c-steps", type=int, default=25)
    g.set_defaults(fn=_cmd_game, game_cmd="region")

    p = sub.add_parser("synth", parents=[shared],
                       help="deterministic synthetic panel from stats + correlations")
    p.add_argument("--stats", default=None,
                   help="stats CSV (default: bundled descriptive table)")
    p.add_argument("--corr", default=None,
                   help="correlation CSV (default: bundled matrix)")
    p.add_argument("--regions", type=int, default=13)
    p.add_argument("--years", type=int, default=9)
    p.set_defaults(fn=_cmd_synth)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (PanelError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
