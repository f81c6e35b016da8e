"""Benchmark model: constant-speed straight-line motion inside the unit disk.

The state is ``(x1, x2, theta)``: a position in the open unit disk and a
heading in the open interval (0, 2 pi). Between jumps the position moves at
unit speed along the heading. Jumps occur spontaneously with rate
``base_rate + |x|`` and are forced when the position reaches the circle. At a
jump the position is redrawn from an isotropic Gaussian centered at the
pre-jump position, rejected until it falls inside the disk, and the heading is
redrawn uniformly. The spontaneous rate from the disk center is
``base_rate + t`` after flowing for time ``t``, which makes the sojourn
density from the center available in closed form (see
:func:`pdmpest.oracle.bench_exact_f`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, DomainError, SamplingError
from .model import ModelSpec
from .quadrature import integrate_adaptive
from .regions import RegionSpec, box_region, complement_region

TWO_PI = 2.0 * math.pi

#: bounding box of the full state space, used for sampling helpers
DISK_BOUNDS = ((-1.0, -1.0, 0.0), (1.0, 1.0, TWO_PI))


@dataclass(frozen=True)
class BenchParams:
    """Parameters of the disk benchmark.

    ``sigma2`` is the variance of the relocation Gaussian (kept small so the
    process relocates near where it jumped), ``base_rate`` the constant part
    of the hazard, ``epsilon`` the half-width of the square source region used
    by the estimation pipeline, and ``max_kernel_attempts`` the rejection
    budget of the relocation sampler.
    """

    sigma2: float = 1e-4
    base_rate: float = 5.0
    epsilon: float = 0.1
    max_kernel_attempts: int = 10**6

    def __post_init__(self):
        if self.sigma2 <= 0.0:
            raise ConfigurationError(f"sigma2 must be positive, got {self.sigma2}")
        if self.base_rate < 0.0:
            raise ConfigurationError(f"base_rate must be nonnegative, got {self.base_rate}")
        if not 0.0 < self.epsilon < 1.0 / math.sqrt(2.0):
            raise ConfigurationError(
                f"epsilon must lie in (0, 1/sqrt(2)) so the square fits the disk, "
                f"got {self.epsilon}"
            )
        if self.max_kernel_attempts < 1:
            raise ConfigurationError("max_kernel_attempts must be positive")


def bench_exit_time(x1: float, x2: float, theta: float) -> float:
    """Time for a unit-speed ray from ``(x1, x2)`` with heading ``theta`` to
    reach the unit circle.

    Solves ``|x + t u| = 1`` for the positive root, with ``u`` the unit
    heading vector. Requires the position to lie inside the closed disk.
    """
    r2 = x1 * x1 + x2 * x2
    if r2 > 1.0 + 1e-12:
        raise DomainError(f"position ({x1}, {x2}) lies outside the unit disk")
    ux, uy = math.cos(theta), math.sin(theta)
    dot = x1 * ux + x2 * uy
    disc = 1.0 - r2 + dot * dot
    return -dot + math.sqrt(max(disc, 0.0))


def _ray_exit(px: float, py: float, angle: float) -> float:
    ux, uy = math.cos(angle), math.sin(angle)
    dot = px * ux + py * uy
    disc = 1.0 - (px * px + py * py) + dot * dot
    return -dot + math.sqrt(max(disc, 0.0))


@lru_cache(maxsize=4096)
def _disk_gauss_mass(px: float, py: float, sigma2: float) -> float:
    """Integral of exp(-|y - p|^2 / (2 sigma2)) over the unit disk.

    In polar coordinates around ``p`` the radial integral is available in
    closed form, leaving a smooth one-dimensional integral over the direction.
    When the boundary is many standard deviations away the truncation is
    below resolvable precision and the full-plane mass ``2 pi sigma2`` is
    returned directly.
    """
    sigma = math.sqrt(sigma2)
    dist = 1.0 - math.hypot(px, py)
    if dist >= 9.0 * sigma:
        return TWO_PI * sigma2
    inv = 0.5 / sigma2

    def slice_mass(angle: float) -> float:
        rho = _ray_exit(px, py, angle)
        return -math.expm1(-rho * rho * inv)

    return sigma2 * integrate_adaptive(
        slice_mass, 0.0, TWO_PI, abs_tol=1e-14, rel_tol=1e-11
    )


def build_bench_model(params: BenchParams = BenchParams()) -> ModelSpec:
    """Assemble the disk benchmark as a plain model bundle."""
    sigma2 = params.sigma2
    sigma = math.sqrt(sigma2)
    base = params.base_rate
    max_attempts = params.max_kernel_attempts

    def flow(state, t):
        x1, x2, theta = state
        return np.array([x1 + t * math.cos(theta), x2 + t * math.sin(theta), theta])

    def hazard(state):
        return base + math.hypot(state[0], state[1])

    def contains(state):
        return math.hypot(state[0], state[1]) < 1.0 and 0.0 < state[2] < TWO_PI

    def exit_time(state):
        return bench_exit_time(state[0], state[1], state[2])

    def kernel_sampler(state, s, rng):
        x1, x2, theta = state
        px = x1 + s * math.cos(theta)
        py = x2 + s * math.sin(theta)
        for _ in range(max_attempts):
            y1 = px + sigma * rng.standard_normal()
            y2 = py + sigma * rng.standard_normal()
            if y1 * y1 + y2 * y2 < 1.0:
                break
        else:
            raise SamplingError(
                f"relocation sampler rejected {max_attempts} proposals from "
                f"position ({px:.6f}, {py:.6f})"
            )
        angle = rng.uniform(0.0, TWO_PI)
        while angle == 0.0:
            angle = rng.uniform(0.0, TWO_PI)
        return np.array([y1, y2, angle])

    def kernel_density(state, s, target):
        y1, y2, angle = float(target[0]), float(target[1]), float(target[2])
        if y1 * y1 + y2 * y2 >= 1.0 or not 0.0 < angle < TWO_PI:
            return 0.0
        x1, x2, theta = state
        px = x1 + s * math.cos(theta)
        py = x2 + s * math.sin(theta)
        d2 = (y1 - px) ** 2 + (y2 - py) ** 2
        normalizer = TWO_PI * _disk_gauss_mass(px, py, sigma2)
        return math.exp(-0.5 * d2 / sigma2) / normalizer

    return ModelSpec(
        state_dim=3,
        flow=flow,
        hazard=hazard,
        kernel_density=kernel_density,
        kernel_sampler=kernel_sampler,
        exit_time=exit_time,
        contains=contains,
        hazard_envelope=lambda t: base + 1.0,
        density_lower_bound=None,  # the Gaussian factor has no positive floor over the disk
    )


def kernel_normalizer(params: BenchParams, px: float, py: float) -> float:
    """Normalizing constant of the relocation density at source position
    ``(px, py)``: Gaussian mass over the disk times the heading measure."""
    return TWO_PI * _disk_gauss_mass(float(px), float(py), params.sigma2)


def origin_state(angle: float = math.pi) -> np.ndarray:
    """Disk center with the given heading (the conventional start state)."""
    return np.array([0.0, 0.0, float(angle)])


def source_square(params: BenchParams = BenchParams()) -> RegionSpec:
    """Open square of half-width ``epsilon`` around the center, any heading.

    The infimum of the exit time over the square is attained toward a corner
    pointing radially outward, giving the analytic floor
    ``1 - epsilon * sqrt(2)`` recorded on the region.
    """
    eps = params.epsilon
    region = box_region(
        lo=(-eps, -eps, 0.0),
        hi=(eps, eps, TWO_PI),
        label="A",
        closed_lo=False,
        closed_hi=False,
    )
    floor = 1.0 - eps * math.sqrt(2.0)
    diameter = math.sqrt(8.0 * eps * eps + TWO_PI * TWO_PI)
    return RegionSpec(
        membership=region.membership,
        diameter=diameter,
        label=region.label,
        bounds=region.bounds,
        batch_membership=region.batch_membership,
        exit_floor=floor,
    )


def default_partition(params: BenchParams = BenchParams()) -> tuple[RegionSpec, RegionSpec]:
    """Two-cell target partition: the source square and the rest of the disk."""
    square = source_square(params)
    rest = complement_region(
        square,
        label="D-A",
        bounds=DISK_BOUNDS,
        diameter=math.sqrt(4.0 + TWO_PI * TWO_PI),
    )
    return square, rest
