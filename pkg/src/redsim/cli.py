"""Command-line front end: analytic curves, single simulations, latency
figure panels, stability scans and tail scans, all emitting plot-ready CSV.

Exit codes: 0 success, 2 invalid config, 3 infeasible experiment."""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import analytics
from .analytics import (
    StabilityProbeError,
    batch_means,
    expected_min,
    hill_tail_index,
    load_summary,
    mean_latency_formula,
    replication_preference,
    stability_probe,
)
from .config import (
    ConfigError,
    build_distribution,
    parse_config_file,
    parse_dependence,
    parse_float,
    parse_grid,
)
from .distributions import (
    Deterministic,
    Exponential,
    Pareto,
    ReplicaDependence,
    Weibull,
    normalize_to_unit_mean,
)
from .sim import SimConfig, run_simulation


class InfeasibleError(RuntimeError):
    pass


def _fmt(x):
    """Shortest round-trip decimal form."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("" if v is None else _fmt(v) for v in row) + "\n")


def _figure_distributions(suffix=False):
    """The three unit-mean families of the latency figure, in column order."""
    nbu = normalize_to_unit_mean(Weibull(shape=1.2))
    nwu = normalize_to_unit_mean(Weibull(shape=0.8))
    if suffix:
        labels = ["WeibullNBU_1.2", "Exp", "WeibullNWU_0.8"]
    else:
        labels = ["WeibullNBU", "Exp", "WeibullNWU"]
    return list(zip(labels, [nbu, Exponential(1.0), nwu]))


def _pooled_latency(cfg, replications, n_batches=20):
    """Pooled batch-means estimate over independent replication seeds."""
    means = []
    slopes = []
    for rep in range(replications):
        out = run_simulation(replace(cfg, seed=cfg.seed + rep))
        if len(out.latencies) < 10 * n_batches:
            return None, None, None
        bm = np.asarray(out.latencies[: (len(out.latencies) // n_batches) * n_batches])
        means.extend(bm.reshape(n_batches, -1).mean(axis=1))
        slopes.append(analytics._backlog_slope(out))
    res = batch_means_from_batches(np.asarray(means))
    return res[0], res[1], float(np.mean(slopes))


def batch_means_from_batches(batch_mean_values):
    from scipy import stats

    n = len(batch_mean_values)
    m = float(batch_mean_values.mean())
    se = float(batch_mean_values.std(ddof=1)) / math.sqrt(n)
    return m, float(stats.t.ppf(0.975, n - 1) * se)


# ---------------------------------------------------------------------------
# argument handling


def _build_parser():
    p = argparse.ArgumentParser(
        prog="redsim",
        description="Cancel-on-completion redundancy-d queueing experiments "
        "(FCFS vs PS).",
    )
    p.add_argument("--config", metavar="PATH", help="experiment config file")
    p.add_argument("--seed", type=int, default=None, metavar="U64")
    p.add_argument("--out", default=".", metavar="DIR", help="output directory")
    p.add_argument("--replications", type=int, default=None, metavar="K")
    p.add_argument("--horizon", type=float, default=None, metavar="T")
    p.add_argument("--warmup", type=float, default=None, metavar="T")
    p.add_argument("--full", action="store_true",
                   help="paper-scale sweeps instead of desk-scale defaults")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n-servers", type=int, default=None)
    common.add_argument("--arrival-rate", type=float, default=None)
    common.add_argument("--d", type=int, default=None)
    common.add_argument("--discipline", choices=["fcfs", "ps"], default=None)
    common.add_argument("--dep", choices=["iid", "identical"], default=None)
    common.add_argument("--lambda-grid", default=None,
                        help="comma-separated increasing arrival rates")
    common.add_argument("--d-grid", default=None,
                        help="comma-separated increasing replica counts")

    sub.add_parser("analytic", parents=[common],
                   help="closed-form latency curves (valid for d=1 or d=N)")
    sub.add_parser("simulate", parents=[common],
                   help="one simulation run; CSV of (arrival_time, latency)")
    sub.add_parser("figure1-left", parents=[common],
                   help="latency vs arrival rate, N=3, d=2, three families")
    sub.add_parser("figure1-right", parents=[common],
                   help="latency vs d, N=100, lambda=75, three families")
    sub.add_parser("stability-scan", parents=[common],
                   help="empirical critical arrival rate per combination")
    sub.add_parser("tail-scan", parents=[common],
                   help="Hill tail-index estimates for FCFS and PS")
    return p


class Settings:
    """Merged scenario settings: defaults < config file < CLI flags."""

    def __init__(self, args):
        scenario = {}
        dist_records = []
        if args.config:
            scenario, dist_records = parse_config_file(args.config)
        self.n_servers = int(args.n_servers or scenario.get("n_servers", 1))
        self.arrival_rate = float(
            args.arrival_rate or scenario.get("arrival_rate", 0.5))
        self.d = int(args.d or scenario.get("d", 1))
        self.discipline = args.discipline or scenario.get("discipline", "fcfs")
        self.dep = parse_dependence(args.dep or scenario.get("dep", "iid"))
        self.horizon = parse_float(
            args.horizon or scenario.get("horizon", 1e5), "horizon")
        warmup = args.warmup if args.warmup is not None else scenario.get("warmup")
        self.warmup = None if warmup is None else parse_float(warmup, "warmup")
        if args.seed is not None:
            self.seed = args.seed
        else:
            self.seed = int(scenario.get("seed", 1))
        reps = args.replications or scenario.get("replications", 5)
        self.replications = int(reps)
        grid = args.lambda_grid or scenario.get("lambda_grid")
        self.lambda_grid = parse_grid(grid) if grid else None
        grid = args.d_grid or scenario.get("d_grid")
        self.d_grid = parse_grid(grid, cast=int) if grid else None
        self.distributions = [build_distribution(r) for r in dist_records]
        self.full = args.full
        self.out = args.out
        if self.replications < 1:
            raise ConfigError("replications must be positive")

    def sim_config(self, **overrides):
        kw = dict(
            n_servers=self.n_servers,
            arrival_rate=self.arrival_rate,
            d=self.d,
            discipline=self.discipline,
            dist=self.distributions[0][1] if self.distributions else Exponential(1.0),
            dep=self.dep,
            horizon=self.horizon,
            warmup=self.warmup,
            seed=self.seed,
        )
        kw.update(overrides)
        try:
            return SimConfig(**kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# commands


def cmd_analytic(s: Settings):
    if s.d not in (1, s.n_servers):
        raise ConfigError(
            "analytic latency formulas hold only for d=1 or d=N "
            f"(got d={s.d}, N={s.n_servers})")
    dists = s.distributions or _figure_distributions()
    grid = s.lambda_grid or [s.arrival_rate]
    header = ["lambda"]
    for label, _ in dists:
        header += [f"{label}_FCFS", f"{label}_PS"]
    rows = []
    for lam in grid:
        row = [lam]
        for _, dist in dists:
            for disc in ("fcfs", "ps"):
                try:
                    row.append(mean_latency_formula(
                        disc, s.n_servers, lam, s.d, dist, s.dep))
                except ValueError:
                    row.append(None)
        rows.append(row)
    path = os.path.join(s.out, "analytic.csv")
    _write_csv(path, header, rows)
    for label, dist in dists:
        verdict = replication_preference(dist, s.n_servers)
        print(f"{label}: {verdict.value}")
    print(f"wrote {path}")


def cmd_simulate(s: Settings):
    cfg = s.sim_config()
    out = run_simulation(cfg)
    path = os.path.join(s.out, "simulate.csv")
    _write_csv(path, ["arrival_time", "latency"],
               zip(out.arrival_times.tolist(), out.latencies.tolist()))
    print(f"jobs_completed={out.jobs_completed} observed={out.jobs_observed} "
          f"max_backlog={_fmt(out.max_backlog)}")
    print(f"wrote {path}")


def _latency_panel(s, dists, axis_name, axis_values, cfg_for, stem):
    """Shared sweep machinery for the two figure panels."""
    eps_slope = 0.01 * s.n_servers
    for disc in ("fcfs", "ps"):
        header = [axis_name] + [label for label, _ in dists]
        rows, ci_rows = [], []
        for v in axis_values:
            row, ci_row = [v], [v]
            for label, dist in dists:
                cfg = cfg_for(disc, dist, v)
                ls = load_summary(cfg.n_servers, cfg.arrival_rate, cfg.d,
                                  dist, cfg.dep)
                if disc == "ps" and not ls.stable_ps:
                    row.append(None)
                    ci_row.append(None)
                    continue
                mean, ci, slope = _pooled_latency(cfg, s.replications)
                if mean is None or (disc == "fcfs" and slope > eps_slope):
                    row.append(None)
                    ci_row.append(None)
                else:
                    row.append(mean)
                    ci_row.append(ci)
            rows.append(row)
            ci_rows.append(ci_row)
        path = os.path.join(s.out, f"{stem}_{disc}.csv")
        _write_csv(path, header, rows)
        _write_csv(os.path.join(s.out, f"{stem}_{disc}_ci.csv"),
                   [axis_name] + [f"{label}_ci" for label, _ in dists], ci_rows)
        print(f"wrote {path}")


def cmd_figure1_left(s: Settings):
    s.n_servers = s.n_servers if s.n_servers != 1 else 3
    s.d = s.d if s.d != 1 else 2
    dists = s.distributions or _figure_distributions()
    if s.full:
        grid = s.lambda_grid or [round(0.25 * i, 2) for i in range(1, 11)]
        horizon = s.horizon
    else:
        grid = s.lambda_grid or [0.5, 1.0, 1.5, 2.0, 2.4]
        horizon = min(s.horizon, 4e4)

    def cfg_for(disc, dist, lam):
        return s.sim_config(discipline=disc, dist=dist, arrival_rate=lam,
                            horizon=horizon, warmup=None)

    _latency_panel(s, dists, "lambda", grid, cfg_for, "figure1_left")


def cmd_figure1_right(s: Settings):
    s.n_servers = s.n_servers if s.n_servers != 1 else 100
    lam = s.arrival_rate if s.arrival_rate != 0.5 else 75.0
    dists = s.distributions or _figure_distributions(suffix=True)
    d_max = 20 if s.full else 10
    grid = s.d_grid or list(range(1, d_max + 1))
    horizon = s.horizon if s.full else min(s.horizon, 300.0)

    def cfg_for(disc, dist, d):
        return s.sim_config(discipline=disc, dist=dist, arrival_rate=lam,
                            d=d, horizon=horizon, warmup=None)

    _latency_panel(s, dists, "d", grid, cfg_for, "figure1_right")


def cmd_stability_scan(s: Settings):
    dists = s.distributions or _figure_distributions()
    d_grid = s.d_grid or [s.d]
    horizon = min(s.horizon, 4000.0) if not s.full else s.horizon
    rows = []
    for disc in ("fcfs", "ps"):
        for label, dist in dists:
            for d in d_grid:
                bound = s.n_servers / (d * expected_min(dist, d, s.dep))
                grid = s.lambda_grid or [bound * f for f in (0.5, 0.8, 1.05, 1.3, 1.6)]
                base = s.sim_config(discipline=disc, dist=dist, d=d,
                                    arrival_rate=grid[0], horizon=horizon,
                                    warmup=0.0)
                try:
                    lam_star = stability_probe(base, grid)
                except StabilityProbeError as exc:
                    raise InfeasibleError(str(exc)) from None
                ps_bound = bound if disc == "ps" else None
                gap = (lam_star - bound) / bound if disc == "ps" else None
                rows.append([disc, label, d, lam_star, ps_bound, gap])
                print(f"{disc} {label} d={d}: lambda* ~ {_fmt(lam_star)}")
    path = os.path.join(s.out, "stability_scan.csv")
    _write_csv(path, ["discipline", "label", "d", "lambda_star",
                      "analytic_ps_bound", "rel_gap"], rows)
    print(f"wrote {path}")


def cmd_tail_scan(s: Settings):
    dists = s.distributions or [("Pareto_2.5", normalize_to_unit_mean(Pareto(index=2.5)))]
    rows = []
    for label, dist in dists:
        if isinstance(dist, Deterministic):
            raise ConfigError(
                f"{label}: light-tailed job sizes; Hill estimation inapplicable")
        estimates = {}
        for disc in ("fcfs", "ps"):
            cfg = s.sim_config(discipline=disc, dist=dist)
            out = run_simulation(cfg)
            try:
                est = hill_tail_index(out.latencies)
            except ValueError as exc:
                raise InfeasibleError(f"{label} ({disc}): {exc}") from None
            estimates[disc] = est
            rows.append([disc, label, est.index, est.ci_halfwidth, est.k_used])
        gap = estimates["ps"].index - estimates["fcfs"].index
        print(f"{label}: PS index - FCFS index = {_fmt(gap)}")
    path = os.path.join(s.out, "tail_scan.csv")
    _write_csv(path, ["discipline", "label", "hill_index", "ci_halfwidth",
                      "k_used"], rows)
    print(f"wrote {path}")


_COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "figure1-left": cmd_figure1_left,
    "figure1-right": cmd_figure1_right,
    "stability-scan": cmd_stability_scan,
    "tail-scan": cmd_tail_scan,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        settings = Settings(args)
        os.makedirs(settings.out, exist_ok=True)
        _COMMANDS[args.command](settings)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InfeasibleError, StabilityProbeError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
