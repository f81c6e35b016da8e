"""Exact simulation of the embedded jump chain.

Sojourn times are drawn by thinning against the model's hazard envelope when
one is declared, and by numerical inversion of the cumulative hazard
otherwise. Both samplers truncate at the boundary exit time and flag the
resulting forced jumps. Post-jump states come from the model's own kernel
sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    HorizonError,
    InvariantError,
)
from .model import ModelSpec, State
from .quadrature import CumulativeTable

#: sojourns closer than this to the exit time are reported as forced
FORCED_TOL = 1e-12

_ENV_PROBES = 33  # envelope evaluations per lookahead window
_WINDOW = 1.0  # lookahead length when the exit time is unbounded
_INVERSION_TOL = 1e-10  # time tolerance of the cumulative-hazard inversion


class TrajectoryRecord(NamedTuple):
    state: np.ndarray
    sojourn: float
    forced: bool


@dataclass(frozen=True)
class Trajectory:
    """Embedded chain of post-jump states with the sojourn leading into each.

    Record ``i`` holds the state after jump ``i``, the sojourn time between
    jumps ``i - 1`` and ``i`` (zero for the initial record), and whether that
    jump was forced at the boundary. ``seed`` records the generator seed the
    trajectory was produced from, or ``None`` for externally supplied data.
    """

    states: np.ndarray
    sojourns: np.ndarray
    forced: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        sojourns = np.asarray(self.sojourns, dtype=float)
        forced = np.asarray(self.forced, dtype=bool)
        n = states.shape[0]
        if states.ndim != 2 or n < 1:
            raise InvariantError(f"states must be a nonempty (n, d) array, got {states.shape}")
        if sojourns.shape != (n,) or forced.shape != (n,):
            raise InvariantError("states, sojourns and forced must have matching lengths")
        if sojourns[0] != 0.0 or forced[0]:
            raise InvariantError("record 0 must have sojourn 0 and no forced flag")
        if n > 1 and not np.all(sojourns[1:] > 0.0):
            raise InvariantError("sojourns must be strictly positive after record 0")
        if not np.all(np.isfinite(states)) or not np.all(np.isfinite(sojourns)):
            raise InvariantError("non-finite trajectory data")
        for arr, name in ((states, "states"), (sojourns, "sojourns"), (forced, "forced")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_transitions(self) -> int:
        return self.states.shape[0] - 1

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.states.shape[0]

    def __getitem__(self, i: int) -> TrajectoryRecord:
        return TrajectoryRecord(self.states[i], float(self.sojourns[i]), bool(self.forced[i]))

    def __iter__(self) -> Iterator[TrajectoryRecord]:
        return (self[i] for i in range(len(self)))

    def head(self, n_transitions: int) -> "Trajectory":
        """First ``n_transitions`` jumps as a trajectory in their own right."""
        if not 1 <= n_transitions <= self.n_transitions:
            raise ValueError(f"cannot take {n_transitions} of {self.n_transitions} transitions")
        k = n_transitions + 1
        return Trajectory(
            self.states[:k].copy(), self.sojourns[:k].copy(), self.forced[:k].copy(), self.seed
        )

    def tail(self, start: int) -> "Trajectory":
        """Drop the first ``start`` transitions; record ``start`` becomes the origin."""
        if not 0 <= start < self.n_transitions:
            raise ValueError(f"cannot drop {start} of {self.n_transitions} transitions")
        sojourns = self.sojourns[start:].copy()
        forced = self.forced[start:].copy()
        sojourns[0] = 0.0
        forced[0] = False
        return Trajectory(self.states[start:].copy(), sojourns, forced, self.seed)

    def validate(self, model: ModelSpec, *, atol: float = FORCED_TOL) -> None:
        """Check the dynamical invariants of every record against a model."""
        for i in range(len(self)):
            z = self.states[i]
            if not model.contains(z):
                raise InvariantError(f"record {i}: state outside the state space")
            if i == 0:
                continue
            prev = self.states[i - 1]
            s = float(self.sojourns[i])
            t_star = float(model.exit_time(prev))
            if s > t_star + atol:
                raise InvariantError(
                    f"record {i}: sojourn {s} exceeds the exit time {t_star}"
                )
            is_boundary = abs(s - t_star) <= atol
            if bool(self.forced[i]) != is_boundary:
                raise InvariantError(
                    f"record {i}: forced flag {bool(self.forced[i])} disagrees with "
                    f"sojourn {s} vs exit time {t_star}"
                )


def sample_sojourn(
    model: ModelSpec, xi: State, rng: np.random.Generator
) -> tuple[float, bool]:
    """Draw one sojourn time from ``xi``; returns ``(time, forced)``.

    The law is the truncated survival law of the first jump: spontaneous with
    the hazard read along the flow, forced at the exit time with the leftover
    survival mass. Thinning against the declared envelope is used when
    available and is exact; without an envelope the cumulative hazard is
    inverted numerically to time tolerance ``1e-10``.
    """
    xi = np.asarray(xi, dtype=float)
    if not model.contains(xi):
        raise DomainError(f"state {xi.tolist()} lies outside the state space")
    t_star = float(model.exit_time(xi))
    if not t_star > 0.0:
        raise InvariantError(f"exit time {t_star} is not positive")
    if model.hazard_envelope is not None:
        return _sojourn_thinning(model, xi, t_star, rng)
    return _sojourn_inversion(model, xi, t_star, rng)


def _uniform_open(rng: np.random.Generator) -> float:
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u


def _sojourn_thinning(model, xi, t_star, rng) -> tuple[float, bool]:
    env = model.hazard_envelope
    flow, hazard = model.flow, model.hazard
    t = 0.0
    while t < t_star:
        win_hi = t_star if math.isfinite(t_star) else t + _WINDOW
        bound = max(float(env(u)) for u in np.linspace(t, win_hi, _ENV_PROBES))
        if not math.isfinite(bound) or bound < 0.0:
            raise ConfigurationError(f"hazard envelope returned {bound} on [{t}, {win_hi}]")
        if bound == 0.0:
            t = win_hi
            continue
        inv = 1.0 / bound
        while True:
            t -= math.log(_uniform_open(rng)) * inv
            if t >= win_hi:
                # crossed the window: discard the pending proposal and restart
                # the exponential clock at the boundary (memorylessness keeps
                # this exact)
                t = win_hi
                break
            rate = float(hazard(flow(xi, t)))
            if rate > bound * (1.0 + 1e-9):
                raise ConfigurationError(
                    f"hazard {rate} exceeds its declared envelope {bound} at t={t}"
                )
            if rng.random() * bound <= rate:
                if t_star - t <= FORCED_TOL:
                    return t_star, True
                return t, False
    return t_star, True


class _HazardInverter:
    """Cumulative-hazard table for one start state, with a monotone solver."""

    def __init__(self, model: ModelSpec, xi: np.ndarray, t_star: float):
        flow, hazard = model.flow, model.hazard
        self.rate = lambda s: float(hazard(flow(xi, s)))
        self.t_star = t_star
        self._grow(t_star if math.isfinite(t_star) else min(t_star, _WINDOW))

    def _grow(self, hi: float) -> None:
        self.hi = hi
        self.table = CumulativeTable(self.rate, 0.0, hi, n=256, order=8)

    def solve(self, target: float) -> float | None:
        """Smallest time with cumulative hazard ``target``; None means never
        reached before the exit time (a forced jump)."""
        while self.table.total < target and self.hi < self.t_star:
            if self.hi > 1e12:
                raise ConfigurationError(
                    "cumulative hazard is not invertible out to t=1e12; "
                    "declare a hazard_envelope instead"
                )
            old_total = self.table.total
            self._grow(min(self.t_star, self.hi * 2.0))
            if self.table.total - old_total <= 1e-15 * max(1.0, target):
                raise ConfigurationError(
                    "cumulative hazard stopped growing before reaching the "
                    "inversion target; declare a hazard_envelope instead"
                )
        if self.table.total < target:
            return None
        edges, cum = self.table.edges, self.table.cum
        j = int(np.searchsorted(cum, target, side="left")) - 1
        j = max(0, min(j, len(edges) - 2))
        lo, hi = float(edges[j]), float(edges[j + 1])
        g_lo = float(cum[j]) - target
        g_hi = float(cum[j + 1]) - target
        if g_lo > 0.0:  # target sits exactly on a table node
            return lo
        # safeguarded Newton iteration on the monotone residual
        span = g_hi - g_lo
        t = lo + (hi - lo) * (-g_lo / span) if span > 0.0 else 0.5 * (lo + hi)
        for _ in range(80):
            if hi - lo <= _INVERSION_TOL:
                break
            g = self.table.value(t) - target
            if g > 0.0:
                hi = t
            else:
                lo = t
            slope = self.rate(t)
            t_new = t - g / slope if slope > 0.0 else 0.5 * (lo + hi)
            if not lo < t_new < hi:
                t_new = 0.5 * (lo + hi)
            t = t_new
        return 0.5 * (lo + hi)


@lru_cache(maxsize=64)
def _inverter(model: ModelSpec, xi_bytes: bytes, dim: int) -> _HazardInverter:
    xi = np.frombuffer(xi_bytes, dtype=float).reshape(dim)
    return _HazardInverter(model, xi, float(model.exit_time(xi)))


def _sojourn_inversion(model, xi, t_star, rng) -> tuple[float, bool]:
    inverter = _inverter(model, xi.tobytes(), len(xi))
    target = -math.log(_uniform_open(rng))
    t = inverter.solve(target)
    if t is None or t_star - t <= FORCED_TOL:
        return t_star, True
    return t, False


def sample_postjump(
    model: ModelSpec, xi: State, s: float, rng: np.random.Generator
) -> np.ndarray:
    """Draw the post-jump state for a jump occurring ``s`` after reaching ``xi``."""
    xi = np.asarray(xi, dtype=float)
    if not model.contains(xi):
        raise DomainError(f"state {xi.tolist()} lies outside the state space")
    s = float(s)
    if not 0.0 < s <= float(model.exit_time(xi)) + FORCED_TOL:
        raise HorizonError(f"jump time {s} outside (0, exit_time]")
    z = np.asarray(model.kernel_sampler(xi, s, rng), dtype=float)
    if not model.contains(z):
        raise InvariantError(f"kernel sampler produced {z.tolist()} outside the state space")
    return z


def simulate_chain(
    model: ModelSpec,
    x0: State,
    n_jumps: int,
    seed: int,
    *,
    validate: bool = True,
) -> Trajectory:
    """Simulate ``n_jumps`` transitions of the embedded chain from ``x0``.

    The generator is constructed from ``seed`` alone, so two calls with the
    same arguments produce identical trajectories. Pass ``validate=False`` to
    skip the final invariant sweep on very long runs.
    """
    if n_jumps < 1:
        raise ConfigurationError(f"n_jumps must be at least 1, got {n_jumps}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.state_dim,):
        raise DomainError(f"start state has shape {x0.shape}, expected ({model.state_dim},)")
    if not model.contains(x0):
        raise DomainError(f"start state {x0.tolist()} lies outside the state space")
    rng = np.random.default_rng(seed)
    states = np.empty((n_jumps + 1, model.state_dim), dtype=float)
    sojourns = np.zeros(n_jumps + 1, dtype=float)
    forced = np.zeros(n_jumps + 1, dtype=bool)
    states[0] = x0
    z = x0
    for i in range(1, n_jumps + 1):
        s, was_forced = sample_sojourn(model, z, rng)
        z = sample_postjump(model, z, s, rng)
        states[i] = z
        sojourns[i] = s
        forced[i] = was_forced
    traj = Trajectory(states, sojourns, forced, seed=int(seed))
    if validate:
        traj.validate(model)
    return traj
