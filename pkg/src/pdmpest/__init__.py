"""Simulation and nonparametric estimation for piecewise-deterministic
jump processes.

The package is organized around four layers:

* model: local characteristics (flow, jump rate, relocation kernel) and the
  exact per-state sojourn law they induce;
* simulate: exact sampling of the embedded jump chain;
* estimate: counting-process estimators for the conditional inter-jump time
  distribution between regions of the state space;
* oracle: independent reference computations used to validate the rest.

``bench`` provides the standard test model on the unit disk and ``toy``
provides small closed-form models for unit tests.
"""

from .bench import (
    BenchParams,
    bench_exit_time,
    build_bench_model,
    default_partition,
    kernel_normalizer,
    origin_state,
    source_square,
)
from .errors import (
    ConfigurationError,
    DomainError,
    EstimatorUndefinedError,
    HorizonError,
    InvariantError,
    NumericalError,
    OracleUndefinedError,
    ParseError,
    PdmpError,
    SamplingError,
)
from .estimate import (
    DensityEstimate,
    EstimateMeta,
    EstimatorConfig,
    StepFunction,
    at_risk_Y,
    bandwidth_rule,
    counting_N,
    empirical_survivor_counts,
    empirical_survivor_p,
    epanechnikov,
    estimate_density_f,
    nelson_aalen_L,
    smoothed_l,
    y_plus,
)
from .io import read_estimate, read_trajectory, write_estimate, write_trajectory
from .model import (
    ModelSpec,
    cumulative_hazard,
    density_f,
    hazard_along_flow,
    survival_G,
)
from .oracle import (
    DEFAULT_ORACLE_CONFIG,
    G_tilde,
    H_fn,
    H_tilde_mc,
    InvariantReport,
    McEstimate,
    OracleConfig,
    bench_exact_f,
    cumulative_lambda_tilde,
    h_floor,
    l_tilde_mc,
    l_tilde_mc_grid,
    lambda_tilde,
    run_invariant_report,
    sample_conditioning_triple,
)
from .regions import (
    PartitionSpec,
    RegionSpec,
    box_region,
    build_partition,
    complement_region,
    region_exit_floor,
)
from .simulate import (
    Trajectory,
    TrajectoryRecord,
    sample_postjump,
    sample_sojourn,
    simulate_chain,
)
from .toy import uniform_interval_model, zero_hazard_model

__version__ = "0.1.0"

__all__ = [
    "BenchParams",
    "ConfigurationError",
    "DEFAULT_ORACLE_CONFIG",
    "DensityEstimate",
    "DomainError",
    "EstimateMeta",
    "EstimatorConfig",
    "EstimatorUndefinedError",
    "G_tilde",
    "H_fn",
    "H_tilde_mc",
    "HorizonError",
    "InvariantError",
    "InvariantReport",
    "McEstimate",
    "ModelSpec",
    "NumericalError",
    "OracleConfig",
    "OracleUndefinedError",
    "ParseError",
    "PartitionSpec",
    "PdmpError",
    "RegionSpec",
    "SamplingError",
    "StepFunction",
    "Trajectory",
    "TrajectoryRecord",
    "at_risk_Y",
    "bandwidth_rule",
    "bench_exact_f",
    "bench_exit_time",
    "box_region",
    "build_bench_model",
    "build_partition",
    "complement_region",
    "counting_N",
    "cumulative_hazard",
    "cumulative_lambda_tilde",
    "default_partition",
    "density_f",
    "empirical_survivor_counts",
    "empirical_survivor_p",
    "epanechnikov",
    "estimate_density_f",
    "h_floor",
    "hazard_along_flow",
    "kernel_normalizer",
    "l_tilde_mc",
    "l_tilde_mc_grid",
    "lambda_tilde",
    "nelson_aalen_L",
    "origin_state",
    "read_estimate",
    "read_trajectory",
    "region_exit_floor",
    "run_invariant_report",
    "sample_conditioning_triple",
    "sample_postjump",
    "sample_sojourn",
    "simulate_chain",
    "smoothed_l",
    "source_square",
    "survival_G",
    "uniform_interval_model",
    "write_estimate",
    "write_trajectory",
    "y_plus",
    "zero_hazard_model",
]
