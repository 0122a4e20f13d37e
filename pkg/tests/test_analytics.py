import math

import numpy as np
import pytest

from redsim.analytics import (
    HeavyTailError,
    ReplicationPreference,
    StabilityProbeError,
    batch_means,
    empirical_ccdf,
    hill_tail_index,
    load_summary,
    pk_fcfs_latency,
    ps_latency,
    replication_preference,
    stability_probe,
)
from redsim.distributions import (
    Deterministic,
    Exponential,
    Pareto,
    ReplicaDependence,
    Weibull,
    normalize_to_unit_mean,
)
from redsim.sim import SimConfig


def test_pk_fcfs_latency_values():
    assert pk_fcfs_latency(0.5, 1.0, 2.0) == pytest.approx(2.0)
    assert pk_fcfs_latency(0.0, 1.0, 5.0) == pytest.approx(1.0)
    assert pk_fcfs_latency(0.8, 0.5, 0.5) == pytest.approx(2.5)


def test_pk_fcfs_latency_rejections():
    with pytest.raises(ValueError):
        pk_fcfs_latency(1.0, 1.0, 2.0)
    with pytest.raises(HeavyTailError):
        pk_fcfs_latency(0.5, 1.0, math.inf)


def test_ps_latency_values():
    assert ps_latency(0.5, 1.0) == pytest.approx(2.0)
    assert ps_latency(0.0, math.e) == pytest.approx(math.e)
    assert ps_latency(0.9, 0.42) == pytest.approx(4.2)
    with pytest.raises(ValueError):
        ps_latency(1.0, 1.0)


def test_formulas_agree_for_exponential_service():
    # E[S^2] = 2 E[S]^2 makes P-K collapse onto the PS formula
    for rho in (0.1, 0.5, 0.9):
        e = 0.7
        assert pk_fcfs_latency(rho, e, 2 * e * e) == pytest.approx(ps_latency(rho, e))


def test_fcfs_vs_ps_ordering_by_variability():
    # second moment below (above) 2*e^2 puts FCFS below (above) PS
    assert pk_fcfs_latency(0.6, 1.0, 1.5) < ps_latency(0.6, 1.0)
    assert pk_fcfs_latency(0.6, 1.0, 3.0) > ps_latency(0.6, 1.0)


def test_formulas_limits():
    e = 0.5
    assert pk_fcfs_latency(1e-12, e, 2 * e * e) == pytest.approx(e)
    assert ps_latency(1e-12, e) == pytest.approx(e)
    assert ps_latency(1 - 1e-9, e) > 1e6


def test_load_summary_examples():
    w = normalize_to_unit_mean(Weibull(shape=0.8))
    ls = load_summary(2, 2.3, 2, w)
    assert ls.rho_tilde == pytest.approx(2.3 * 2 * 2 ** (-1.25) / 2, rel=1e-9)
    assert ls.stable_ps
    ls = load_summary(3, 3.0, 1, Exponential(1.0))
    assert ls.rho_tilde == pytest.approx(1.0)
    assert ls.rho_plain == pytest.approx(1.0)
    assert not ls.stable_ps
    ls = load_summary(4, 1.0, 3, Exponential(2.0), ReplicaDependence.IDENTICAL)
    assert ls.rho_tilde == pytest.approx(1.0 * 3 * 0.5 / 4)


def test_load_summary_d1_equals_plain():
    ls = load_summary(5, 2.0, 1, Weibull(shape=1.2, scale=1.0))
    assert ls.rho_tilde == pytest.approx(ls.rho_plain)


def test_replication_preference():
    assert replication_preference(Exponential(1.0), 5) is ReplicationPreference.INDIFFERENT
    nbu = normalize_to_unit_mean(Weibull(shape=1.2))
    assert replication_preference(nbu, 3) is ReplicationPreference.NO_REPLICATION
    nwu = normalize_to_unit_mean(Weibull(shape=0.8))
    assert replication_preference(nwu, 3) is ReplicationPreference.FULL_REPLICATION


def test_batch_means_constant():
    res = batch_means([3.0] * 1000, 10)
    assert res.mean == pytest.approx(3.0)
    assert res.ci_halfwidth == pytest.approx(0.0)
    assert res.n_batches == 10


def test_batch_means_uniform():
    rng = np.random.default_rng(7)
    res = batch_means(rng.random(10**5), 20)
    assert abs(res.mean - 0.5) < 0.01
    assert abs(res.mean - 0.5) <= res.ci_halfwidth * 2


def test_batch_means_alternating():
    res = batch_means([0.0, 2.0] * 500, 10)
    assert res.mean == pytest.approx(1.0)


def test_batch_means_rejects_small_samples():
    with pytest.raises(ValueError):
        batch_means([1.0] * 50, 10)
    with pytest.raises(ValueError):
        batch_means([1.0] * 1000, 5)


def test_empirical_ccdf_small_samples():
    pts = empirical_ccdf([5.0], n_points=10)
    assert np.allclose(pts[:, 1][pts[:, 0] < 5.0], 1.0)
    assert np.allclose(pts[:, 1][pts[:, 0] > 5.0], 0.0)
    pts = empirical_ccdf([1.0, 2.0, 3.0, 4.0], n_points=30)
    i = np.argmin(np.abs(pts[:, 0] - 2.5))
    assert pts[i, 1] == pytest.approx(0.5)


def test_empirical_ccdf_pareto_slope():
    rng = np.random.default_rng(11)
    x = rng.random(10**5) ** (-1 / 2.0)  # Pareto(2, 1)
    pts = empirical_ccdf(x, n_points=60)
    top = pts[(pts[:, 0] >= pts[-1, 0] / 10) & (pts[:, 1] > 0)]
    slope = np.polyfit(np.log(top[:, 0]), np.log(top[:, 1]), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.2)


def test_hill_on_exact_pareto():
    rng = np.random.default_rng(5)
    x = rng.random(10**5) ** (-1 / 2.0)
    est = hill_tail_index(x, 0.05)
    assert 1.8 <= est.index <= 2.2
    assert est.k_used == math.ceil(0.05 * 10**5)


def test_hill_power_transform_halves_index():
    rng = np.random.default_rng(6)
    x = rng.random(10**5) ** (-1 / 1.5)  # Pareto(1.5)
    est = hill_tail_index(x**2, 0.05)
    assert 0.675 <= est.index <= 0.825


def test_hill_scale_invariance():
    rng = np.random.default_rng(8)
    x = rng.random(5000) ** (-1 / 3.0)
    a = hill_tail_index(x, 0.05).index
    b = hill_tail_index(1e6 * x, 0.05).index
    assert b == pytest.approx(a, rel=1e-9)


def test_hill_rejections():
    with pytest.raises(ValueError):
        hill_tail_index(np.ones(100), 0.05)  # too few samples
    with pytest.raises(ValueError):
        hill_tail_index(np.ones(5000), 0.05)  # degenerate: zero Hill sum
    with pytest.raises(ValueError):
        hill_tail_index(np.arange(2000.0), 0.05)  # nonpositive sample present
    with pytest.raises(ValueError):
        hill_tail_index(np.ones(2000) + np.arange(2000) / 2000, 0.5)


def test_stability_probe_deterministic_d1():
    base = SimConfig(2, 1.0, 1, "fcfs", Deterministic(1.0),
                     horizon=2000.0, warmup=0.0, seed=17)
    lam_star = stability_probe(base, [1.0, 1.5, 2.0, 2.5, 3.0])
    assert lam_star == pytest.approx(2.0, rel=0.1)  # rho = 1 at lambda = N


def test_stability_probe_bracket_errors():
    base = SimConfig(1, 0.1, 1, "fcfs", Exponential(1.0),
                     horizon=500.0, warmup=0.0, seed=1)
    with pytest.raises(StabilityProbeError) as exc:
        stability_probe(base, [0.1, 0.2, 0.3])
    assert exc.value.side == "stable"
    with pytest.raises(StabilityProbeError) as exc:
        stability_probe(base, [3.0, 4.0])
    assert exc.value.side == "unstable"


def test_stability_probe_result_in_grid_span():
    base = SimConfig(1, 1.0, 1, "ps", Exponential(1.0),
                     horizon=2000.0, warmup=0.0, seed=23)
    grid = [0.5, 0.8, 1.2, 1.5]
    lam_star = stability_probe(base, grid)
    assert grid[0] <= lam_star <= grid[-1]
