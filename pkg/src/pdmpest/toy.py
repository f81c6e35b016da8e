"""Small analytic models used for cross-checking and smoke runs."""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, DomainError
from .model import ModelSpec


def uniform_interval_model(rate: float, *, envelope: bool = True) -> ModelSpec:
    """Unit-interval model with constant hazard and uniform relocation.

    The state is a single coordinate in (0, 1), the flow moves right at unit
    speed, the boundary is hit after ``1 - x``, and every jump relocates
    uniformly on the interval. The relocation density is identically one, so
    conditional quantities collapse to closed forms: survival is
    ``exp(-rate * t)`` and the conditional jump rate is the constant ``rate``
    itself. With ``rate=0`` the model never jumps spontaneously, which makes
    every jump a forced one.

    ``envelope=False`` drops the (constant) hazard envelope to force the
    numerical inversion path of the sojourn sampler.
    """
    rate = float(rate)
    if rate < 0.0:
        raise ConfigurationError(f"rate must be nonnegative, got {rate}")

    def flow(state, t):
        return np.array([state[0] + t])

    def kernel_sampler(state, s, rng):
        u = rng.random()
        while u == 0.0:
            u = rng.random()
        return np.array([u])

    def kernel_density(state, s, target):
        return 1.0 if 0.0 < float(target[0]) < 1.0 else 0.0

    def exit_time(state):
        x = float(state[0])
        if not 0.0 < x < 1.0:
            raise DomainError(f"state {x} outside (0, 1)")
        return 1.0 - x

    return ModelSpec(
        state_dim=1,
        flow=flow,
        hazard=lambda state: rate,
        kernel_density=kernel_density,
        kernel_sampler=kernel_sampler,
        exit_time=exit_time,
        contains=lambda state: 0.0 < float(state[0]) < 1.0,
        hazard_envelope=(lambda t: rate) if envelope else None,
        density_lower_bound=1.0,
    )


def zero_hazard_model() -> ModelSpec:
    """Interval model whose jumps are all forced at the boundary."""
    return uniform_interval_model(0.0)
