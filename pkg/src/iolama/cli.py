"""Command-line front end.

Subcommands: ``thresholds``, ``gcurve``, ``se-trace``, ``fixed-points``,
``simulate``, ``regime``, ``decouple``.  Sweeps go to CSV, reports to
JSON; ``--plot PATH`` renders a matplotlib figure next to the delimited
output.  Every output embeds the full run configuration so any row can be
regenerated.  ``LAMA_QUAD_ORDER`` overrides the quadrature order unless
``--order`` is given.

Exit codes: 0 success, 2 invalid input, 3 numerical-resolution failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .constellation import resolve
from .denoiser import DEFAULT_QUAD_ORDER
from .state_evolution import (
    GridSpec,
    NumericalResolutionError,
    default_grid,
    find_fixed_points,
    g_batch,
    run_se,
)
from .thresholds import classify_regime, critical_noise, threshold_report
from .mimo_sim import monte_carlo_ser, verify_decoupling

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    """Scientific notation with 12 significant digits (CSV contract)."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return f"{x:.11e}"
    return str(x)


def _config_echo(command: str, args: argparse.Namespace) -> dict:
    cfg = {"command": command, "version": __version__}
    for key, val in sorted(vars(args).items()):
        if key in ("func", "out", "plot", "fmt"):
            continue
        cfg[key.replace("_", "-")] = val
    return cfg


def _write_text(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv(cfg: dict, header: list, rows: list) -> str:
    lines = [f"# {k}={_fmt(v)}" for k, v in cfg.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json(cfg: dict, payload) -> str:
    return json.dumps({"config": cfg, "results": payload},
                      sort_keys=True, indent=2) + "\n"


def _order_arg(args) -> int | None:
    if args.order is not None:
        return args.order
    env = os.environ.get("LAMA_QUAD_ORDER")
    return int(env) if env else None


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_thresholds(args) -> int:
    order = _order_arg(args)
    cfg = _config_echo("thresholds", args)
    rows = []
    reports = []
    for ident in args.constellations:
        c = resolve(ident)
        rep = threshold_report(c, order=order)
        at_min = critical_noise(c, rep.beta_min, order)
        at_max = critical_noise(c, rep.beta_max, order)
        rows.append([ident, rep.beta_min, at_min.n0_min,
                     rep.beta_max, at_max.n0_max])
        d = rep.to_dict()
        d["n0_min_at_beta_min"] = at_min.n0_min
        d["n0_max_at_beta_max"] = at_max.n0_max
        reports.append(d)
    if args.fmt == "json":
        _write_text(args.out, _json(cfg, reports))
    else:
        header = ["constellation", "beta_min", "n0_min_at_beta_min",
                  "beta_max", "n0_max_at_beta_max"]
        _write_text(args.out, _csv(cfg, header, rows))
    return EXIT_OK


def cmd_gcurve(args) -> int:
    order = _order_arg(args)
    c = resolve(args.constellation)
    n0_list = args.n0
    cfg = _config_echo("gcurve", args)

    user_grid = args.sigma_min is not None or args.sigma_max is not None
    rows = []
    curves = []
    root_rows = []
    roots_by_n0 = {}
    for n0 in n0_list:
        base = default_grid(c, args.beta, n0)
        lo = args.sigma_min if args.sigma_min is not None else base.sigma_lo
        hi = args.sigma_max if args.sigma_max is not None else base.sigma_hi
        xs = GridSpec(lo, hi, args.points).values()
        gs = g_batch(c, xs, args.beta, n0, order)
        curves.append((n0, xs, gs))
        for x, g in zip(xs, gs):
            rows.append([n0, float(x), float(g)])
        root_grid = GridSpec(lo, hi, max(args.points, 2000)) if user_grid else None
        fps = find_fixed_points(c, args.beta, n0, grid=root_grid, order=order)
        roots_by_n0[n0] = fps.roots
        for r in fps.roots:
            root_rows.append([n0, r.sigma_sq, r.stable, r.marginal])

    header = ["n0", "sigma_sq", "g"]
    _write_text(args.out, _csv(cfg, header, rows))
    roots_header = ["n0", "sigma_sq", "stable", "marginal"]
    roots_out = args.out + ".roots.csv" if args.out else None
    _write_text(roots_out, _csv(cfg, roots_header, root_rows))
    if args.plot:
        from . import plots

        plots.save_g_curves(args.plot, curves, roots_by_n0, c.name, args.beta)
    return EXIT_OK


def cmd_se_trace(args) -> int:
    order = _order_arg(args)
    c = resolve(args.constellation)
    cfg = _config_echo("se-trace", args)
    trace = run_se(c, args.beta, args.n0, max_iter=args.max_iter,
                   rel_tol=args.rel_tol, order=order)
    cfg["converged"] = trace.converged
    cfg["iterations"] = trace.iterations
    if args.fmt == "json":
        payload = {
            "beta": trace.beta,
            "n0": trace.n0,
            "sigma_sq_seq": trace.sigma_sq_seq,
            "converged": trace.converged,
            "final_sigma_sq": trace.final_sigma_sq,
            "iterations": trace.iterations,
        }
        _write_text(args.out, _json(cfg, payload))
    else:
        rows = [[t + 1, s] for t, s in enumerate(trace.sigma_sq_seq)]
        _write_text(args.out, _csv(cfg, ["t", "sigma_sq"], rows))
    if args.plot:
        from . import plots

        plots.save_se_trace(args.plot, trace, c.name)
    return EXIT_OK


def cmd_fixed_points(args) -> int:
    order = _order_arg(args)
    c = resolve(args.constellation)
    cfg = _config_echo("fixed-points", args)
    grid = None
    if args.sigma_min is not None or args.sigma_max is not None:
        base = default_grid(c, args.beta, args.n0)
        grid = GridSpec(
            args.sigma_min if args.sigma_min is not None else base.sigma_lo,
            args.sigma_max if args.sigma_max is not None else base.sigma_hi,
            args.points,
        )
    fps = find_fixed_points(c, args.beta, args.n0, grid=grid, order=order)
    cfg["se-reachable"] = fps.se_reachable
    cfg["optimal"] = fps.optimal
    if args.fmt == "json":
        payload = {
            "roots": [
                {"sigma_sq": r.sigma_sq, "stable": r.stable,
                 "marginal": r.marginal}
                for r in fps.roots
            ],
            "se_reachable": fps.se_reachable,
            "optimal": fps.optimal,
        }
        _write_text(args.out, _json(cfg, payload))
    else:
        rows = [[r.sigma_sq, r.stable, r.marginal] for r in fps.roots]
        _write_text(args.out, _csv(cfg, ["sigma_sq", "stable", "marginal"],
                                   rows))
    return EXIT_OK


def cmd_simulate(args) -> int:
    c = resolve(args.constellation)
    cfg = _config_echo("simulate", args)
    beta = args.mt / args.mr
    if args.snr:
        n0_list = [beta * c.energy / snr for snr in args.snr]
    else:
        n0_list = args.n0
    rows = []
    plot_rows = []
    for n0 in n0_list:
        est = monte_carlo_ser(c, args.mt, args.mr, n0, trials=args.trials,
                              max_iter=args.max_iter, seed=args.seed)
        snr = beta * c.energy / n0 if n0 > 0 else float("inf")
        rows.append([n0, snr, est.ser, est.trials, est.errors,
                     est.mean_iterations])
        plot_rows.append({"n0": n0, "ser": est.ser, "symbols": est.symbols})
    header = ["n0", "snr", "ser", "trials", "errors", "mean_iterations"]
    _write_text(args.out, _csv(cfg, header, rows))
    if args.plot:
        from . import plots

        plots.save_ser_sweep(args.plot, plot_rows, c.name, beta)
    return EXIT_OK


def cmd_regime(args) -> int:
    order = _order_arg(args)
    c = resolve(args.constellation)
    cfg = _config_echo("regime", args)
    label = classify_regime(c, args.beta, args.n0, order,
                            grid_points=args.grid_points)
    rep = threshold_report(c, beta=args.beta, order=order,
                           grid_points=args.grid_points)
    fps = find_fixed_points(c, args.beta, args.n0, order=order)
    payload = {
        "label": label,
        "beta": args.beta,
        "n0": args.n0,
        "beta_min": rep.beta_min,
        "beta_max": rep.beta_max,
        "n0_min": rep.n0_min,
        "n0_max": rep.n0_max,
        "fixed_point_count": len(fps.roots),
    }
    if args.fmt == "json":
        _write_text(args.out, _json(cfg, payload))
    else:
        lines = [f"{k}={_fmt(v)}" for k, v in payload.items()]
        _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_decouple(args) -> int:
    c = resolve(args.constellation)
    cfg = _config_echo("decouple", args)
    rep = verify_decoupling(c, args.mt, args.mr, args.n0,
                            trials=args.trials, iter_probe=args.iter_probe,
                            seed=args.seed)
    payload = {
        "empirical_var": rep.empirical_var,
        "se_var": rep.se_var,
        "normality_stat": rep.normality_stat,
        "iter_probe": rep.iter_probe,
        "samples": rep.samples,
    }
    if args.fmt == "json":
        _write_text(args.out, _json(cfg, payload))
    else:
        rows = [[k, v] for k, v in payload.items()]
        _write_text(args.out, _csv(cfg, ["quantity", "value"], rows))
    if args.plot:
        from . import plots

        plots.save_decoupling(args.plot, rep, rep.residuals, c.name)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common(p, constellation=True):
    if constellation:
        p.add_argument("--constellation", required=True,
                       help="builtin name or path to a JSON alphabet file")
    p.add_argument("--order", type=int, default=None,
                   help=f"quadrature nodes per dimension "
                        f"(default {DEFAULT_QUAD_ORDER}; env LAMA_QUAD_ORDER)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                   default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="iolama",
        description="AMP-based large-MIMO detection: thresholds, "
                    "state evolution, and Monte Carlo simulation",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thresholds", help="recovery thresholds per alphabet")
    p.add_argument("constellations", nargs="+")
    _add_common(p, constellation=False)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("gcurve", help="fixed-point diagnostic curves")
    _add_common(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n0", type=float, action="append", required=True,
                   help="repeatable: one curve per noise level")
    p.add_argument("--sigma-min", type=float, default=None)
    p.add_argument("--sigma-max", type=float, default=None)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--plot", default=None, help="figure output path")
    p.set_defaults(func=cmd_gcurve)

    p = sub.add_parser("se-trace", help="effective-noise recursion trace")
    _add_common(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n0", type=float, required=True)
    p.add_argument("--max-iter", type=int, default=256)
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=cmd_se_trace)

    p = sub.add_parser("fixed-points", help="enumerate fixed points")
    _add_common(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n0", type=float, required=True)
    p.add_argument("--sigma-min", type=float, default=None)
    p.add_argument("--sigma-max", type=float, default=None)
    p.add_argument("--points", type=int, default=2000)
    p.set_defaults(func=cmd_fixed_points)

    p = sub.add_parser("simulate", help="Monte Carlo symbol error rate")
    _add_common(p)
    p.add_argument("--mt", type=int, required=True)
    p.add_argument("--mr", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--n0", type=float, action="append")
    group.add_argument("--snr", type=float, action="append",
                       help="linear SNR = beta*Es/N0; alternative to --n0")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--max-iter", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("regime", help="optimality-regime classification")
    _add_common(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n0", type=float, required=True)
    p.add_argument("--grid-points", type=int, default=2000,
                   help="scan resolution for the threshold searches")
    p.set_defaults(func=cmd_regime)

    p = sub.add_parser("decouple", help="empirical decoupling check")
    _add_common(p)
    p.add_argument("--mt", type=int, required=True)
    p.add_argument("--mr", type=int, required=True)
    p.add_argument("--n0", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--iter-probe", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=cmd_decouple)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalResolutionError as exc:
        print(f"error (numerical): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
