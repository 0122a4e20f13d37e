"""Cancel-on-completion redundancy-d queueing: simulation and analysis."""

from .analytics import (
    BatchMeansResult,
    LoadSummary,
    ReplicationPreference,
    TailIndexEstimate,
    batch_means,
    empirical_ccdf,
    hill_tail_index,
    load_summary,
    mean_latency_formula,
    pk_fcfs_latency,
    ps_latency,
    replication_preference,
    stability_probe,
)
from .distributions import (
    AgingClass,
    Deterministic,
    Exponential,
    Pareto,
    ReplicaDependence,
    Weibull,
    classify_aging,
    expected_min,
    min_work_profile,
    moments,
    normalize_to_unit_mean,
    sample,
    second_moment_min,
    survival,
)
from .sim import FCFS, PS, SimConfig, SimOutput, run_simulation

__all__ = [
    "AgingClass",
    "BatchMeansResult",
    "Deterministic",
    "Exponential",
    "FCFS",
    "LoadSummary",
    "PS",
    "Pareto",
    "ReplicaDependence",
    "ReplicationPreference",
    "SimConfig",
    "SimOutput",
    "TailIndexEstimate",
    "Weibull",
    "batch_means",
    "classify_aging",
    "empirical_ccdf",
    "expected_min",
    "hill_tail_index",
    "load_summary",
    "mean_latency_formula",
    "min_work_profile",
    "moments",
    "normalize_to_unit_mean",
    "pk_fcfs_latency",
    "ps_latency",
    "replication_preference",
    "run_simulation",
    "sample",
    "second_moment_min",
    "stability_probe",
    "survival",
]
