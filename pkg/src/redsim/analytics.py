"""Closed-form latency formulas, stability characterization, steady-state
statistics and tail-index estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import stats

from .distributions import ReplicaDependence, expected_min, moments, second_moment_min
from .sim import SimConfig, run_simulation


class HeavyTailError(ValueError):
    """Second moment of the effective service time is infinite."""


@dataclass(frozen=True)
class LoadSummary:
    rho_tilde: float  # lambda * d * E[X_min] / N
    rho_plain: float  # lambda * E[X] / N
    stable_ps: bool


@dataclass(frozen=True)
class TailIndexEstimate:
    index: float
    k_used: int
    ci_halfwidth: float


@dataclass(frozen=True)
class BatchMeansResult:
    mean: float
    ci_halfwidth: float
    n_batches: int


class ReplicationPreference(Enum):
    NO_REPLICATION = "no-replication"
    FULL_REPLICATION = "full-replication"
    INDIFFERENT = "indifferent"


def pk_fcfs_latency(rho_tilde, e_min, e_min2):
    """Pollaczek-Khinchine mean latency of the equivalent M/G/1 FCFS queue."""
    if rho_tilde >= 1:
        raise ValueError("unstable: rho_tilde >= 1")
    if math.isinf(e_min2):
        raise HeavyTailError("infinite second moment of the effective service time")
    return rho_tilde * e_min2 / (2.0 * (1.0 - rho_tilde) * e_min) + e_min


def ps_latency(rho_tilde, e_min):
    """Mean latency of the equivalent M/G/1 PS queue."""
    if rho_tilde >= 1:
        raise ValueError("unstable: rho_tilde >= 1")
    return e_min / (1.0 - rho_tilde)


def load_summary(n_servers, arrival_rate, d, dist, dep=ReplicaDependence.IID):
    e_min = expected_min(dist, d, dep)
    rho_tilde = arrival_rate * d * e_min / n_servers
    rho_plain = arrival_rate * dist.mean() / n_servers
    return LoadSummary(rho_tilde, rho_plain, rho_tilde < 1)


def replication_preference(dist, n_servers, tol=1e-9):
    """Compare N*E[min of N draws] against E[X] (IID replicas)."""
    gap = n_servers * expected_min(dist, n_servers) - dist.mean()
    if abs(gap) <= tol:
        return ReplicationPreference.INDIFFERENT
    if gap > 0:
        return ReplicationPreference.NO_REPLICATION
    return ReplicationPreference.FULL_REPLICATION


def mean_latency_formula(discipline, n_servers, arrival_rate, d, dist,
                         dep=ReplicaDependence.IID):
    """Analytic mean latency; valid only for d=1 and d=N."""
    if d != 1 and d != n_servers:
        raise ValueError("formulas hold only for d=1 or d=N")
    e_min = expected_min(dist, d, dep)
    rho_tilde = arrival_rate * d * e_min / n_servers
    if discipline == "fcfs":
        e_min2 = second_moment_min(dist, d, dep)
        return pk_fcfs_latency(rho_tilde, e_min, e_min2)
    return ps_latency(rho_tilde, e_min)


def batch_means(latencies, n_batches=20):
    """95% CI for the steady-state mean from contiguous equal batches."""
    x = np.asarray(latencies, dtype=float)
    if n_batches < 10:
        raise ValueError("need at least 10 batches")
    if len(x) < 10 * n_batches:
        raise ValueError(f"need at least {10 * n_batches} samples")
    usable = (len(x) // n_batches) * n_batches
    means = x[:usable].reshape(n_batches, -1).mean(axis=1)
    m = means.mean()
    se = means.std(ddof=1) / math.sqrt(n_batches)
    tq = stats.t.ppf(0.975, n_batches - 1)
    return BatchMeansResult(float(m), float(tq * se), n_batches)


def empirical_ccdf(latencies, n_points=50):
    """Exact tail probabilities P(R > x) on a log grid spanning the 50th to
    99.9th percentile of the sample."""
    x = np.sort(np.asarray(latencies, dtype=float))
    if len(x) == 0:
        raise ValueError("empty sample")
    lo = np.quantile(x, 0.5)
    hi = np.quantile(x, 0.999)
    if lo <= 0:
        lo = x[x > 0].min() if (x > 0).any() else 1e-12
    grid = np.logspace(math.log10(lo), math.log10(max(hi, lo * (1 + 1e-9))), n_points)
    p = 1.0 - np.searchsorted(x, grid, side="right") / len(x)
    return np.column_stack([grid, p])


def hill_tail_index(latencies, k_fraction=0.05):
    """Hill estimator of the tail decay exponent from the top order statistics."""
    x = np.asarray(latencies, dtype=float)
    n = len(x)
    if n < 1000:
        raise ValueError("need at least 1000 samples")
    if not 0 < k_fraction <= 0.2:
        raise ValueError("k_fraction must be in (0, 0.2]")
    if (x <= 0).any():
        raise ValueError("samples must be positive")
    k = math.ceil(k_fraction * n)
    if k < 10:
        raise ValueError("fewer than 10 exceedances")
    x = np.sort(x)
    threshold = x[n - k - 1]
    hill_sum = np.log(x[n - k:] / threshold).sum()
    if hill_sum <= 0:
        raise ValueError("degenerate tail: zero Hill sum")
    index = k / hill_sum
    return TailIndexEstimate(float(index), k, float(1.96 * index / math.sqrt(k)))


class StabilityProbeError(RuntimeError):
    def __init__(self, side):
        super().__init__(f"lambda grid is entirely {side}")
        self.side = side


def _backlog_slope(out):
    t, w = out.backlog_times, out.backlog_values
    if len(t) < 10:
        return 0.0
    half = t >= t[-1] / 2.0
    if half.sum() < 10:
        return 0.0
    return float(np.polyfit(t[half], w[half], 1)[0])


def stability_probe(base: SimConfig, lambda_grid, eps_slope=None, refine=4):
    """Estimate the critical arrival rate by backlog-drift classification over
    the grid, then bisection between the stability boundary neighbors."""
    if eps_slope is None:
        eps_slope = 0.01 * base.n_servers

    def unstable(lam):
        out = run_simulation(replace(base, arrival_rate=lam))
        return _backlog_slope(out) > eps_slope

    flags = [unstable(lam) for lam in lambda_grid]
    if all(flags):
        raise StabilityProbeError("unstable")
    if not any(flags):
        raise StabilityProbeError("stable")
    stable_lams = [lam for lam, f in zip(lambda_grid, flags) if not f]
    unstable_lams = [lam for lam, f in zip(lambda_grid, flags) if f]
    lo = max(stable_lams)
    hi = min(unstable_lams)
    if lo > hi:  # non-monotone classification noise; keep the bracketing pair
        lo, hi = hi, lo
    for _ in range(refine):
        mid = 0.5 * (lo + hi)
        if unstable(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
