"""Nonparametric estimation of the conditional inter-jump time distribution.

All estimators below consume only the observed embedded chain: the post-jump
states ``Z_0, ..., Z_n`` and the sojourn times ``S_1, ..., S_n`` between them.
For a source region ``A`` and a target cell ``B`` the building blocks are

* ``counting_N``: number of transitions from ``A`` into ``B`` completed by
  time ``t`` (in sojourn duration),
* ``at_risk_Y``: number of such transitions still pending at duration ``t``,
* ``nelson_aalen_L``: the cumulative-hazard type integral of ``1/Y`` against
  the counting process,
* ``smoothed_l``: its kernel-smoothed derivative,
* ``empirical_survivor_p``: the empirical probability that a sojourn from
  ``A`` exceeds ``t`` and lands in ``B``,

and ``estimate_density_f`` assembles the density estimate by summing, over the
cells of a partition, the product of the smoothed rate and the empirical
survivor term. Everything is deterministic given the trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, EstimatorUndefinedError
from .quadrature import integrate_adaptive
from .regions import PartitionSpec, RegionSpec
from .simulate import Trajectory


def epanechnikov(u):
    """Parabolic smoothing kernel: 0.75 (1 - u^2) on [-1, 1], zero outside."""
    u = np.asarray(u, dtype=float)
    out = np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
    return out if out.ndim else float(out)


def y_plus(y):
    """Generalized inverse used in the at-risk weighting: 0 at 0, else 1/y."""
    arr = np.asarray(y, dtype=float)
    out = np.where(arr == 0.0, 0.0, np.divide(1.0, np.where(arr == 0.0, 1.0, arr)))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function with jumps at sorted times.

    With ``left_continuous=False`` (the default) evaluation at ``t`` returns
    the value attached to the last jump time ``<= t``, i.e. the function is
    right continuous, which is the convention for counting processes and
    cumulative sums. ``left_continuous=True`` returns the value of the last
    jump time ``< t`` instead, which realizes at-risk counts of the form
    "number of events at or after t".
    """

    jump_times: np.ndarray
    values: np.ndarray
    value_before_first: float
    left_continuous: bool = False

    def __post_init__(self):
        times = np.asarray(self.jump_times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or values.shape != times.shape:
            raise ConfigurationError("jump_times and values must be equal-length vectors")
        if times.size > 1 and not np.all(np.diff(times) > 0.0):
            raise ConfigurationError("jump_times must be strictly increasing")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "jump_times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        side = "left" if self.left_continuous else "right"
        idx = np.searchsorted(self.jump_times, t_arr, side=side) - 1
        taken = self.values[np.clip(idx, 0, None)] if self.values.size else np.zeros_like(t_arr)
        out = np.where(idx < 0, self.value_before_first, taken)
        return out if out.ndim else float(out)

    @property
    def terminal_value(self) -> float:
        return float(self.values[-1]) if self.values.size else float(self.value_before_first)


def _matched_sojourns(traj: Trajectory, source: RegionSpec, target: RegionSpec) -> np.ndarray:
    """Sojourn times of transitions from ``source`` into ``target``, in
    trajectory order."""
    in_source = source.indicator(traj.states[:-1])
    in_target = target.indicator(traj.states[1:])
    return traj.sojourns[1:][in_source & in_target]


def counting_N(traj: Trajectory, source: RegionSpec, target: RegionSpec) -> StepFunction:
    """Counting process of matched transitions by sojourn duration.

    ``counting_N(...)(t)`` is the number of observed transitions that start in
    ``source``, land in ``target``, and have sojourn time at most ``t``.
    """
    matched = np.sort(_matched_sojourns(traj, source, target))
    times, counts = np.unique(matched, return_counts=True)
    return StepFunction(times, np.cumsum(counts).astype(float), 0.0)


def at_risk_Y(traj: Trajectory, source: RegionSpec, target: RegionSpec) -> StepFunction:
    """At-risk count: matched transitions with sojourn time ``>= t``.

    Left continuous, so an event at time ``t`` still counts at ``t`` itself;
    ties are absorbed by the count. Nonincreasing from the total matched
    count down to zero beyond the largest sojourn.
    """
    matched = _matched_sojourns(traj, source, target)
    total = float(matched.size)
    times, counts = np.unique(matched, return_counts=True)
    return StepFunction(
        times, total - np.cumsum(counts).astype(float), total, left_continuous=True
    )


def nelson_aalen_L(
    traj: Trajectory,
    source: RegionSpec,
    target: RegionSpec,
    horizon_t: float,
    *,
    t_star_floor: float | None = None,
) -> StepFunction:
    """Cumulative-hazard type estimator: integral of ``1/Y`` against ``N``.

    Each matched event at sojourn ``s <= horizon_t`` contributes the inverse
    of the at-risk count evaluated at ``s``. Tied events share that count, so
    processing order does not matter. When ``t_star_floor`` (a lower bound on
    the exit time over ``source``) is supplied, a horizon at or beyond it is
    rejected, since the estimand is only identified strictly inside.
    """
    horizon_t = float(horizon_t)
    if horizon_t <= 0.0:
        raise ConfigurationError(f"horizon must be positive, got {horizon_t}")
    if t_star_floor is not None and horizon_t >= t_star_floor:
        raise ConfigurationError(
            f"horizon {horizon_t} reaches the exit-time floor {t_star_floor} of the source region"
        )
    matched = _matched_sojourns(traj, source, target)
    at_risk = at_risk_Y(traj, source, target)
    events = np.sort(matched[matched <= horizon_t])
    if events.size == 0:
        return StepFunction(np.empty(0), np.empty(0), 0.0)
    increments = y_plus(at_risk(events))
    cumulative = np.cumsum(increments)
    times, first_idx = np.unique(events, return_index=True)
    last_idx = np.append(first_idx[1:], events.size) - 1
    return StepFunction(times, cumulative[last_idx], 0.0)


@dataclass(frozen=True)
class EstimatorConfig:
    """Smoothing and window configuration for the density estimator.

    Parameters
    ----------
    horizon_t:
        Upper duration cutoff: only sojourns at most this long enter the
        smoothed rate. Must stay strictly below the exit-time infimum over
        the source region for the estimand to be identified.
    r1, r2:
        Estimation window; the evaluation grid spans [r1, r2]. Requires
        ``0 < r1 < r2 < horizon_t``.
    grid_points:
        Number of evaluation points, evenly spaced over the window.
    alpha:
        Bandwidth exponent: a cell observed ``h`` times uses bandwidth
        ``h ** -alpha``.
    kernel:
        Smoothing kernel supported on [-1, 1] with unit integral; vanishes
        at the endpoints. Validated at construction.
    """

    horizon_t: float
    r1: float
    r2: float
    grid_points: int = 128
    alpha: float = 1.0 / 3.0
    kernel: Callable = field(default=epanechnikov)

    def __post_init__(self):
        if not 0.0 < self.r1 < self.r2 < self.horizon_t:
            raise ConfigurationError(
                f"window must satisfy 0 < r1 < r2 < horizon, got "
                f"r1={self.r1}, r2={self.r2}, horizon={self.horizon_t}"
            )
        if self.grid_points < 1:
            raise ConfigurationError(f"grid_points must be positive, got {self.grid_points}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {self.alpha}")
        for edge in (-1.0, 1.0):
            if abs(float(self.kernel(edge))) > 1e-12:
                raise ConfigurationError(f"kernel must vanish at {edge}")
        mass = integrate_adaptive(lambda u: float(self.kernel(u)), -1.0, 1.0, abs_tol=1e-12)
        if abs(mass - 1.0) > 1e-10:
            raise ConfigurationError(f"kernel mass is {mass}, expected 1")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.r1, self.r2, self.grid_points)


def bandwidth_rule(
    traj: Trajectory, source: RegionSpec, target: RegionSpec, alpha: float = 1.0 / 3.0
) -> float:
    """Data-driven bandwidth ``h ** -alpha`` from the matched-transition count.

    ``h`` counts every observed transition from ``source`` into ``target``
    regardless of the horizon. Raises when there are none.
    """
    h = int(_matched_sojourns(traj, source, target).size)
    if h == 0:
        raise EstimatorUndefinedError(
            f"no transitions from {source.label!r} to {target.label!r}"
        )
    return float(h) ** (-alpha)


def smoothed_l(
    traj: Trajectory,
    source: RegionSpec,
    target: RegionSpec,
    config: EstimatorConfig,
    bandwidth: float,
    *,
    grid: np.ndarray | None = None,
) -> np.ndarray:
    """Kernel-smoothed transition rate on the evaluation grid.

    At each grid point ``s`` this is the kernel average

    ``(1 / b) * sum_j K((s - S_j) / b) / Y(S_j)``

    over matched events ``S_j`` up to the horizon, with ``Y`` the at-risk
    count (the reciprocal is taken as zero when the count is zero, which
    cannot occur at an actual event). Returns the value vector aligned with
    the grid.
    """
    bandwidth = float(bandwidth)
    if bandwidth <= 0.0:
        raise ConfigurationError(f"bandwidth must be positive, got {bandwidth}")
    if grid is None:
        grid = config.grid
    else:
        grid = np.asarray(grid, dtype=float)
        if grid.size and (grid.min() < config.r1 - 1e-12 or grid.max() > config.r2 + 1e-12):
            raise ConfigurationError("evaluation grid leaves the configured window")
    matched = _matched_sojourns(traj, source, target)
    at_risk = at_risk_Y(traj, source, target)
    events = matched[matched <= config.horizon_t]
    if events.size == 0:
        return np.zeros(grid.shape)
    weights = y_plus(at_risk(events))
    scaled = (grid[:, None] - events[None, :]) / bandwidth
    return (config.kernel(scaled) * weights[None, :]).sum(axis=1) / bandwidth


def empirical_survivor_counts(
    traj: Trajectory, source: RegionSpec, target: RegionSpec, t: float
) -> tuple[int, int]:
    """Numerator and denominator of :func:`empirical_survivor_p`."""
    in_source = source.indicator(traj.states[:-1])
    den = int(np.count_nonzero(in_source))
    if den == 0:
        raise EstimatorUndefinedError(f"no visits to {source.label!r}")
    in_target = target.indicator(traj.states[1:])
    num = int(np.count_nonzero(in_source & in_target & (traj.sojourns[1:] > t)))
    return num, den


def empirical_survivor_p(
    traj: Trajectory, source: RegionSpec, target: RegionSpec, t: float
) -> float:
    """Fraction of visits to ``source`` whose sojourn exceeds ``t`` and lands
    in ``target``.

    The denominator counts every visit to ``source`` among the first ``n``
    states, so summing over the cells of a partition at ``t = 0`` gives one
    exactly.
    """
    num, den = empirical_survivor_counts(traj, source, target, float(t))
    return num / den


@dataclass(frozen=True)
class EstimateMeta:
    """Provenance attached to a density estimate."""

    n_transitions: int
    source_label: str
    horizon_t: float
    bandwidths: tuple[tuple[str, float | None], ...]
    seed: int | None

    def bandwidth_of(self, label: str) -> float | None:
        for cell, b in self.bandwidths:
            if cell == label:
                return b
        raise KeyError(label)


@dataclass(frozen=True)
class DensityEstimate:
    """Evaluation grid, nonnegative density values, and provenance."""

    grid: np.ndarray
    values: np.ndarray
    meta: EstimateMeta

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise ConfigurationError("grid and values must be equal-length vectors")
        if grid.size > 1 and not np.all(np.diff(grid) > 0.0):
            raise ConfigurationError("grid must be strictly increasing")
        if np.any(values < 0.0):
            raise ConfigurationError("density values must be nonnegative")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)


def estimate_density_f(
    traj: Trajectory,
    source: RegionSpec,
    partition: PartitionSpec | Sequence[RegionSpec],
    config: EstimatorConfig,
    *,
    t_star_floor: float | None = None,
) -> DensityEstimate:
    """Estimate the conditional sojourn-time density for starts in ``source``.

    For each cell ``B`` of the partition the smoothed rate toward ``B`` (with
    the cell's own data-driven bandwidth) is multiplied pointwise by the
    empirical survivor term toward ``B``, and the cell contributions are
    summed. Cells never reached from ``source`` contribute zero. Summation
    over cells is performed with exact accumulation, so reordering the
    partition reproduces the result bit for bit.

    ``t_star_floor``, when given, is a lower bound on the exit time over
    ``source`` and guards the horizon; obtain one from the region metadata or
    from :func:`pdmpest.regions.region_exit_floor`.
    """
    if not isinstance(partition, PartitionSpec):
        partition = PartitionSpec(tuple(partition))
    if t_star_floor is not None and config.horizon_t >= t_star_floor:
        raise ConfigurationError(
            f"horizon {config.horizon_t} reaches the exit-time floor {t_star_floor} "
            f"of region {source.label!r}"
        )
    in_source = source.indicator(traj.states[:-1])
    den = int(np.count_nonzero(in_source))
    if den == 0:
        raise EstimatorUndefinedError(f"no visits to {source.label!r}")
    landing = traj.states[1:]
    partition.check_disjoint_cover(landing)

    grid = config.grid
    sojourns = traj.sojourns[1:]
    contributions = []
    bandwidths: list[tuple[str, float | None]] = []
    for cell in partition.cells:
        matched_mask = in_source & cell.indicator(landing)
        matched = sojourns[matched_mask]
        h = int(matched.size)
        if h == 0:
            bandwidths.append((cell.label, None))
            contributions.append(np.zeros(grid.shape))
            continue
        b = float(h) ** (-config.alpha)
        bandwidths.append((cell.label, b))
        rate = smoothed_l(traj, source, cell, config, b)
        matched_sorted = np.sort(matched)
        survivors = h - np.searchsorted(matched_sorted, grid, side="right")
        contributions.append(rate * (survivors / den))
    stacked = np.stack(contributions)
    values = np.array([math.fsum(stacked[:, j]) for j in range(grid.size)])
    values[values < 0.0] = 0.0  # exact-zero guard; terms are nonnegative
    meta = EstimateMeta(
        n_transitions=traj.n_transitions,
        source_label=source.label,
        horizon_t=config.horizon_t,
        bandwidths=tuple(bandwidths),
        seed=traj.seed,
    )
    return DensityEstimate(grid, values, meta)
