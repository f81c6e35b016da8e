"""Model abstraction and the analytic one-jump quantities derived from it.

A model bundles plain callables over coordinate-vector states: a deterministic
flow, a jump hazard evaluated along that flow, a relocation kernel (density and
sampler), the boundary exit time, and a membership test for the open state
space. Everything downstream (simulation, estimation, oracles) touches the
dynamics only through this bundle.

The derived quantities follow the usual competing-risks decomposition of the
first jump: starting from ``xi``, the jump happens spontaneously with rate
``hazard`` read along the flow, and is forced at the boundary once the flow
reaches ``exit_time(xi)``. Writing ``rate(t) = hazard(flow(xi, t))``, the
probability that no jump has occurred by time ``t < exit_time(xi)`` is
``exp(-int_0^t rate)``, and the sojourn-time density on the open interval is
``rate(t)`` times that survival.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, HorizonError
from .quadrature import integrate_adaptive

#: default absolute tolerance for the cumulative-hazard quadrature
QUAD_TOL = 1e-10

State = np.ndarray


@dataclass(frozen=True)
class ModelSpec:
    """Local characteristics of a piecewise-deterministic jump process.

    Parameters
    ----------
    state_dim:
        Length of the coordinate vector representing a state.
    flow:
        ``flow(xi, t)`` moves a state forward for time ``t`` along the
        deterministic dynamics. Must satisfy the semigroup property
        ``flow(flow(xi, t), s) == flow(xi, t + s)``.
    hazard:
        Nonnegative spontaneous jump rate, defined on the closure of the
        state space so it can be read at the boundary.
    kernel_density:
        ``kernel_density(xi, s, y)`` evaluates the relocation density at
        target ``y`` for a jump occurring after flowing from ``xi`` for time
        ``s``. The density is taken with respect to the model's fixed
        reference measure on the state space, and is zero outside it.
    kernel_sampler:
        ``kernel_sampler(xi, s, rng)`` draws one post-jump state from the
        same relocation law. Output must satisfy ``contains``.
    exit_time:
        Time at which the flow started at the given state leaves the open
        state space; ``math.inf`` when it never does.
    contains:
        Membership test for the open state space.
    hazard_envelope:
        Optional locally integrable bound ``M(t)`` with
        ``hazard(flow(xi, t)) <= M(t)``. When present, sojourn sampling uses
        thinning against it; otherwise the cumulative hazard is inverted
        numerically.
    density_lower_bound:
        Optional uniform lower bound on ``kernel_density`` over the state
        space, kept as metadata for oracle bounds. ``None`` when the model
        does not admit a positive one.
    """

    state_dim: int
    flow: Callable[[State, float], State]
    hazard: Callable[[State], float]
    kernel_density: Callable[[State, float, State], float]
    kernel_sampler: Callable[[State, float, np.random.Generator], State]
    exit_time: Callable[[State], float]
    contains: Callable[[State], bool]
    hazard_envelope: Callable[[float], float] | None = None
    density_lower_bound: float | None = None


def _check_state(model: ModelSpec, xi: State) -> State:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (model.state_dim,):
        raise DomainError(f"state has shape {xi.shape}, expected ({model.state_dim},)")
    if not model.contains(xi):
        raise DomainError(f"state {xi.tolist()} lies outside the state space")
    return xi


def _check_time(model: ModelSpec, xi: State, t: float) -> float:
    t = float(t)
    if t < 0.0:
        raise HorizonError(f"negative time {t}")
    t_star = float(model.exit_time(xi))
    if t > t_star:
        raise HorizonError(f"time {t} exceeds the exit time {t_star}")
    return t


def hazard_along_flow(model: ModelSpec, xi: State, t: float) -> float:
    """Jump rate experienced at time ``t`` along the flow started at ``xi``."""
    xi = _check_state(model, xi)
    t = _check_time(model, xi, t)
    rate = float(model.hazard(model.flow(xi, t)))
    if not math.isfinite(rate) or rate < 0.0:
        raise DomainError(f"hazard returned {rate} at t={t}")
    return rate


def cumulative_hazard(
    model: ModelSpec, xi: State, t: float, *, quad_tol: float = QUAD_TOL
) -> float:
    """Integral of the hazard along the flow over [0, t]."""
    xi = _check_state(model, xi)
    t = _check_time(model, xi, t)
    if t == 0.0:
        return 0.0
    flow, hazard = model.flow, model.hazard
    return integrate_adaptive(lambda s: hazard(flow(xi, s)), 0.0, t, abs_tol=quad_tol)


def survival_G(model: ModelSpec, xi: State, t: float, *, quad_tol: float = QUAD_TOL) -> float:
    """Probability that the first jump from ``xi`` happens after time ``t``.

    Valid for ``0 <= t <= exit_time(xi)``; the value at the exit time is the
    mass that ends up in the forced boundary jump.
    """
    return math.exp(-cumulative_hazard(model, xi, t, quad_tol=quad_tol))


def density_f(model: ModelSpec, xi: State, t: float, *, quad_tol: float = QUAD_TOL) -> float:
    """Sojourn-time density at ``t`` for the first jump from ``xi``.

    Product of the hazard along the flow and the survival probability. On
    [0, exit_time) it integrates, together with the boundary atom
    ``survival_G(model, xi, exit_time)``, to one.
    """
    return hazard_along_flow(model, xi, t) * survival_G(model, xi, t, quad_tol=quad_tol)
