"""Local characteristics and the exact per-state sojourn law."""

import math

import numpy as np
import pytest

from pdmpest import (
    DomainError,
    HorizonError,
    cumulative_hazard,
    density_f,
    hazard_along_flow,
    origin_state,
    survival_G,
    uniform_interval_model,
    zero_hazard_model,
)


def test_hazard_along_flow_from_center(bench_model):
    x0 = origin_state()
    assert hazard_along_flow(bench_model, x0, 0.0) == pytest.approx(5.0, abs=1e-14)
    # moving at unit speed the distance from the center equals the elapsed time
    assert hazard_along_flow(bench_model, x0, 0.5) == pytest.approx(5.5, abs=1e-14)


def test_cumulative_hazard_zero_at_origin_of_time(bench_model):
    assert cumulative_hazard(bench_model, origin_state(), 0.0) == 0.0


def test_survival_closed_form_from_center(bench_model):
    # int_0^t (5 + s) ds = 5 t + t^2 / 2
    x0 = origin_state()
    assert survival_G(bench_model, x0, 1.0) == pytest.approx(math.exp(-5.5), rel=1e-12)
    assert survival_G(bench_model, x0, 0.5) == pytest.approx(math.exp(-2.625), rel=1e-12)


def test_density_closed_form_from_center(bench_model):
    x0 = origin_state()
    assert density_f(bench_model, x0, 0.0) == pytest.approx(5.0, rel=1e-12)
    assert density_f(bench_model, x0, 1.0) == pytest.approx(
        6.0 * math.exp(-5.5), rel=1e-12
    )


def test_sojourn_law_conserves_mass(bench_model, rng):
    """Density over (0, t*) plus the boundary atom must carry total mass one."""
    from pdmpest.quadrature import integrate_adaptive

    for _ in range(5):
        radius = 0.8 * math.sqrt(rng.uniform())
        phi = rng.uniform(0.0, 2.0 * math.pi)
        x = np.array([radius * math.cos(phi), radius * math.sin(phi),
                      rng.uniform(0.2, 6.0)])
        t_star = float(bench_model.exit_time(x))
        mass = integrate_adaptive(
            lambda s: density_f(bench_model, x, s), 0.0, t_star, abs_tol=1e-11
        )
        assert mass + survival_G(bench_model, x, t_star) == pytest.approx(1.0, abs=1e-9)


def test_flow_semigroup_property(bench_model, rng):
    for _ in range(20):
        x = np.array([0.2 * rng.standard_normal(), 0.2 * rng.standard_normal(),
                      rng.uniform(0.5, 5.0)])
        if not bench_model.contains(x):
            continue
        total = rng.uniform(0.0, float(bench_model.exit_time(x)))
        first = rng.uniform(0.0, total)
        direct = bench_model.flow(x, total)
        composed = bench_model.flow(bench_model.flow(x, first), total - first)
        np.testing.assert_allclose(composed, direct, atol=1e-12)


def test_hazard_matches_density_ratio(bench_model):
    # f / G recovers the hazard along the flow wherever G stays positive
    x = np.array([0.1, -0.2, 2.0])
    for t in (0.0, 0.3, 0.7):
        ratio = density_f(bench_model, x, t) / survival_G(bench_model, x, t)
        assert ratio == pytest.approx(hazard_along_flow(bench_model, x, t), rel=1e-9)


def test_state_outside_space_rejected(bench_model):
    with pytest.raises(DomainError):
        hazard_along_flow(bench_model, np.array([1.5, 0.0, 1.0]), 0.0)
    with pytest.raises(DomainError):
        survival_G(bench_model, np.array([0.0, 0.0, 7.0]), 0.1)


def test_time_outside_flow_interval_rejected(bench_model):
    x0 = origin_state()
    with pytest.raises(HorizonError):
        hazard_along_flow(bench_model, x0, -0.1)
    with pytest.raises(HorizonError):
        density_f(bench_model, x0, 1.2)  # past the boundary hit at t* = 1


def test_uniform_toy_matches_exponential_law():
    model = uniform_interval_model(2.0)
    x = np.array([0.25])
    assert survival_G(model, x, 0.5) == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert density_f(model, x, 0.5) == pytest.approx(2.0 * math.exp(-1.0), rel=1e-12)


def test_zero_hazard_toy_never_jumps_spontaneously():
    model = zero_hazard_model()
    x = np.array([0.4])
    assert survival_G(model, x, 0.6) == 1.0
    assert density_f(model, x, 0.3) == 0.0
