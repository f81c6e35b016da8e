"""Measurable regions of the state space and grid partitions over them."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import ConfigurationError
from .model import ModelSpec


@dataclass(frozen=True)
class RegionSpec:
    """A region of the state space given by a membership predicate.

    ``diameter`` is the Euclidean diameter of the region in state coordinates
    (metadata used by partition builders and shrinking-cell checks). ``bounds``
    is an optional axis-aligned bounding box ``(lo, hi)`` used for sampling
    and for grid partitioning; it need not be tight. ``batch_membership``
    optionally vectorizes the predicate over an ``(n, d)`` array of states.
    ``exit_floor`` optionally records an analytic infimum of the model exit
    time over the region.
    """

    membership: Callable[[np.ndarray], bool]
    diameter: float
    label: str
    bounds: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    batch_membership: Callable[[np.ndarray], np.ndarray] | None = field(
        default=None, compare=False
    )
    exit_floor: float | None = None

    def indicator(self, states: np.ndarray) -> np.ndarray:
        """Boolean membership over an (n, d) array of states."""
        states = np.asarray(states, dtype=float)
        if self.batch_membership is not None:
            out = np.asarray(self.batch_membership(states), dtype=bool)
            if out.shape != (states.shape[0],):
                raise ConfigurationError(
                    f"batch membership for {self.label!r} returned shape {out.shape}"
                )
            return out
        return np.fromiter(
            (bool(self.membership(s)) for s in states), dtype=bool, count=states.shape[0]
        )


def box_region(
    lo: Sequence[float],
    hi: Sequence[float],
    label: str,
    *,
    closed_lo: bool = True,
    closed_hi: bool = False,
    extra: Callable[[np.ndarray], bool] | None = None,
) -> RegionSpec:
    """Axis-aligned box region; infinite bounds leave an axis unconstrained.

    By default the box is half open (``lo <= x < hi``), which is the tiling
    convention used by :func:`build_partition`. ``closed_lo=False`` makes the
    lower faces strict as well. ``extra`` conjoins a further predicate, e.g.
    membership of a curved ambient region.
    """
    lo_arr = np.asarray(lo, dtype=float)
    hi_arr = np.asarray(hi, dtype=float)
    if lo_arr.shape != hi_arr.shape or lo_arr.ndim != 1:
        raise ConfigurationError("box bounds must be two equal-length vectors")
    if np.any(lo_arr >= hi_arr):
        raise ConfigurationError(f"degenerate box for {label!r}: lo={lo} hi={hi}")

    def member(s: np.ndarray) -> bool:
        s = np.asarray(s, dtype=float)
        ok_lo = np.all(lo_arr <= s) if closed_lo else np.all(lo_arr < s)
        ok_hi = np.all(s <= hi_arr) if closed_hi else np.all(s < hi_arr)
        if not (ok_lo and ok_hi):
            return False
        return True if extra is None else bool(extra(s))

    def batch(states: np.ndarray) -> np.ndarray:
        ok_lo = (lo_arr <= states) if closed_lo else (lo_arr < states)
        ok_hi = (states <= hi_arr) if closed_hi else (states < hi_arr)
        out = ok_lo.all(axis=1) & ok_hi.all(axis=1)
        if extra is not None:
            idx = np.nonzero(out)[0]
            keep = np.fromiter((bool(extra(states[i])) for i in idx), dtype=bool, count=len(idx))
            out[idx] = keep
        return out

    finite_lo = np.where(np.isfinite(lo_arr), lo_arr, np.nan)
    finite_hi = np.where(np.isfinite(hi_arr), hi_arr, np.nan)
    if np.any(np.isnan(finite_lo)) or np.any(np.isnan(finite_hi)):
        diameter = math.inf
    else:
        diameter = float(np.linalg.norm(hi_arr - lo_arr))
    return RegionSpec(
        membership=member,
        diameter=diameter,
        label=label,
        bounds=(tuple(lo_arr), tuple(hi_arr)),
        batch_membership=batch,
    )


def complement_region(
    region: RegionSpec,
    label: str,
    *,
    bounds: tuple[Sequence[float], Sequence[float]] | None = None,
    diameter: float | None = None,
    exit_floor: float | None = None,
) -> RegionSpec:
    """States not in ``region``. Membership is relative to the state space:
    callers apply it to states that are already known to be valid."""
    inner_batch = region.indicator

    return RegionSpec(
        membership=lambda s: not bool(region.membership(s)),
        diameter=math.inf if diameter is None else float(diameter),
        label=label,
        bounds=None if bounds is None else (tuple(bounds[0]), tuple(bounds[1])),
        batch_membership=lambda states: ~inner_batch(states),
        exit_floor=exit_floor,
    )


@dataclass(frozen=True)
class PartitionSpec:
    """An ordered tuple of pairwise-disjoint target cells."""

    cells: tuple[RegionSpec, ...]

    def __post_init__(self):
        if len(self.cells) < 1:
            raise ConfigurationError("a partition needs at least one cell")
        labels = [c.label for c in self.cells]
        if len(set(labels)) != len(labels):
            raise ConfigurationError(f"duplicate cell labels: {labels}")

    def __len__(self) -> int:
        return len(self.cells)

    def membership_matrix(self, states: np.ndarray) -> np.ndarray:
        """(n_states, n_cells) boolean membership matrix."""
        states = np.asarray(states, dtype=float)
        return np.column_stack([c.indicator(states) for c in self.cells])

    def check_disjoint_cover(self, states: np.ndarray) -> None:
        """Require that every state lies in exactly one cell."""
        hits = self.membership_matrix(states).sum(axis=1)
        uncovered = int(np.count_nonzero(hits == 0))
        overlapped = int(np.count_nonzero(hits > 1))
        if uncovered or overlapped:
            raise ConfigurationError(
                f"partition is not a disjoint cover of the data: "
                f"{uncovered} states uncovered, {overlapped} in multiple cells"
            )


def build_partition(region: RegionSpec, resolution: float) -> PartitionSpec:
    """Tile a bounded region with axis-aligned grid cells intersected with it.

    The bounding box of ``region`` is split into half-open cells of per-axis
    width at most ``resolution`` (the top cell along each axis closes its
    upper face so the box is covered). Each cell keeps the ambient region's
    membership as a conjunction, so the cells are pairwise disjoint and their
    union restricted to the region is the region itself. Cells that happen to
    miss the region entirely are kept; estimators simply see zero counts for
    them.
    """
    if resolution <= 0:
        raise ConfigurationError(f"resolution must be positive, got {resolution}")
    if region.bounds is None:
        raise ConfigurationError(f"region {region.label!r} has no bounding box")
    lo = np.asarray(region.bounds[0], dtype=float)
    hi = np.asarray(region.bounds[1], dtype=float)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ConfigurationError(f"region {region.label!r} is unbounded")
    extents = hi - lo
    counts = [max(1, int(math.ceil(e / resolution - 1e-12))) for e in extents]
    widths = extents / np.asarray(counts, dtype=float)
    cells = []
    for index in itertools.product(*(range(c) for c in counts)):
        c_lo = lo + widths * np.asarray(index, dtype=float)
        c_hi = c_lo + widths
        top = [i == c - 1 for i, c in zip(index, counts)]
        cells.append(
            _grid_cell(region, c_lo, c_hi, np.asarray(top), index)
        )
    return PartitionSpec(cells=tuple(cells))


def _grid_cell(region, c_lo, c_hi, closed_hi_mask, index):
    ambient = region.membership

    def member(s: np.ndarray) -> bool:
        s = np.asarray(s, dtype=float)
        hi_ok = np.where(closed_hi_mask, s <= c_hi, s < c_hi)
        if not (np.all(c_lo <= s) and np.all(hi_ok)):
            return False
        return bool(ambient(s))

    ambient_batch = region.indicator

    def batch(states: np.ndarray) -> np.ndarray:
        hi_ok = np.where(closed_hi_mask, states <= c_hi, states < c_hi)
        out = (c_lo <= states).all(axis=1) & hi_ok.all(axis=1)
        if out.any():
            out &= ambient_batch(states)
        return out

    tag = ",".join(str(i) for i in index)
    return RegionSpec(
        membership=member,
        diameter=float(np.linalg.norm(c_hi - c_lo)),
        label=f"{region.label}[{tag}]",
        bounds=(tuple(c_lo), tuple(c_hi)),
        batch_membership=batch,
    )


def region_exit_floor(
    model: ModelSpec,
    region: RegionSpec,
    *,
    n_samples: int = 10_000,
    margin: float = 0.01,
    seed: int = 0,
) -> float:
    """Infimum of the model exit time over a region, up to a safety margin.

    When the region records an analytic ``exit_floor`` that value is returned
    directly. Otherwise the bounding box is filled with a low-discrepancy
    sample, membership filters it to the region, and the minimum sampled exit
    time is shrunk by ``margin`` to compensate for the infimum not being
    attained on a finite sample.
    """
    if region.exit_floor is not None:
        return float(region.exit_floor)
    if region.bounds is None:
        raise ConfigurationError(
            f"region {region.label!r} has neither an analytic exit floor nor bounds"
        )
    lo = np.asarray(region.bounds[0], dtype=float)
    hi = np.asarray(region.bounds[1], dtype=float)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ConfigurationError(f"region {region.label!r} is unbounded")
    sampler = qmc.Halton(d=len(lo), scramble=True, seed=seed)
    points = qmc.scale(sampler.random(n_samples), lo, hi)
    inside = region.indicator(points)
    if not inside.any():
        raise ConfigurationError(
            f"no sampled point of the bounding box fell inside {region.label!r}"
        )
    floor = min(float(model.exit_time(p)) for p in points[inside])
    return floor * (1.0 - margin)
