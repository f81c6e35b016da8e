import numpy as np
import pytest

from pdmpest import (
    BenchParams,
    EstimatorConfig,
    build_bench_model,
    default_partition,
    origin_state,
    simulate_chain,
)


@pytest.fixture(scope="session")
def bench_model():
    return build_bench_model(BenchParams())


@pytest.fixture(scope="session")
def bench_partition():
    return default_partition(BenchParams())


@pytest.fixture(scope="session")
def bench_traj(bench_model):
    """A medium benchmark run shared by tests that only need realistic data."""
    return simulate_chain(bench_model, origin_state(), 4000, 12345)


@pytest.fixture(scope="session")
def std_config():
    return EstimatorConfig(horizon_t=0.8, r1=0.05, r2=0.75, grid_points=128)


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)
