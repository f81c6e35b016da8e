"""Reference quantities for validating the estimators against the model.

Given the local characteristics, the law of one transition ``(S, Z')`` from a
start ``x`` has joint density ``fq(x, s, y) = density_f(x, s) *
kernel_density(x, s, y)`` over sojourn times ``s`` and landing states ``y``,
plus the boundary contribution ``survival_G(x, t*) * kernel_density(x, t*, y)``
at the exit time. Everything here is derived from that decomposition:

* ``H_fn(x, y, t)``: mass of ``{S >= t}`` at landing density point ``y``,
  i.e. the tail integral of ``fq`` plus the boundary term;
* ``lambda_tilde(x, y, t) = fq(x, t, y) / H(x, y, t)``: the conditional jump
  rate given the landing point;
* ``G_tilde(x, y, t) = H(x, y, t) / H(x, y, 0)``: the matching conditional
  survivor, which also equals ``exp(-int_0^t lambda_tilde)``;
* ``l_tilde_mc`` and ``H_tilde_mc``: long-run Monte Carlo references for the
  region-averaged rate and survivor that the estimators target.

The identity ``lambda_tilde * H = fq`` and the two routes to ``G_tilde`` give
consistency checks that do not touch the estimator code at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    EstimatorUndefinedError,
    HorizonError,
    NumericalError,
    OracleUndefinedError,
    PdmpError,
)
from .estimate import empirical_survivor_counts
from .model import ModelSpec, State, _check_state, _check_time, density_f, survival_G
from .quadrature import CumulativeTable, PanelTable, integrate_adaptive
from .regions import RegionSpec
from .simulate import Trajectory, sample_postjump, sample_sojourn, simulate_chain


@dataclass(frozen=True)
class OracleConfig:
    """Tolerances and Monte Carlo budget for the reference computations."""

    quad_tol: float = 1e-10
    mc_samples: int = 1_000_000
    seed: int = 0
    burn_in: int = 1_000
    max_pairs: int = 1_200
    start_state: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.quad_tol <= 0.0:
            raise ConfigurationError(f"quad_tol must be positive, got {self.quad_tol}")
        if self.mc_samples < 1_000:
            raise ConfigurationError(
                f"mc_samples must be at least 1000, got {self.mc_samples}"
            )
        if not 0 <= self.burn_in < self.mc_samples:
            raise ConfigurationError(
                f"burn_in must lie in [0, mc_samples), got {self.burn_in}"
            )
        if self.max_pairs < 2:
            raise ConfigurationError(f"max_pairs must be at least 2, got {self.max_pairs}")


DEFAULT_ORACLE_CONFIG = OracleConfig()


class _TildeTable:
    """Cached integrals of the one-transition joint density for fixed (x, y).

    The sojourn integrand inherits the width of the relocation kernel, so it
    can be sharply peaked; the panel table bisects toward such features and
    then serves tail integrals at arbitrary points cheaply. ``fast=True``
    trades tolerance for speed (linear interpolation of the cumulative hazard,
    coarser panels), which is the right trade inside Monte Carlo averages.
    """

    def __init__(self, model: ModelSpec, x: np.ndarray, y: np.ndarray, *,
                 quad_tol: float, fast: bool = False):
        t_star = float(model.exit_time(x))
        if not math.isfinite(t_star):
            raise ConfigurationError(
                "conditional-law references need a finite exit time"
            )
        self.t_star = t_star
        flow, hazard, kden = model.flow, model.hazard, model.kernel_density
        if fast:
            lam = CumulativeTable(
                lambda s: float(hazard(flow(x, s))), 0.0, t_star, n=256, order=2, interp=True
            )
        else:
            lam = CumulativeTable(
                lambda s: float(hazard(flow(x, s))), 0.0, t_star, n=256, order=8
            )

        def fq(s: float) -> float:
            rate = float(hazard(flow(x, s)))
            return rate * math.exp(-lam.value(s)) * float(kden(x, s, y))

        self.fq = fq
        self.boundary_mass = math.exp(-lam.total) * float(kden(x, t_star, y))
        self.panels = PanelTable(
            fq,
            0.0,
            t_star,
            abs_tol=quad_tol if not fast else max(quad_tol, 1e-6),
            seed_panels=32 if fast else 64,
            max_panels=128 if fast else 512,
        )

    def H(self, t: float) -> float:
        return self.panels.tail(t) + self.boundary_mass

    def hint_points(self) -> list[float]:
        return self.panels.refined_edges()


@lru_cache(maxsize=48)
def _cached_table(model: ModelSpec, x_bytes: bytes, y_bytes: bytes, dim: int,
                  quad_tol: float) -> _TildeTable:
    x = np.frombuffer(x_bytes, dtype=float).reshape(dim)
    y = np.frombuffer(y_bytes, dtype=float).reshape(dim)
    return _TildeTable(model, x, y, quad_tol=quad_tol)


def _table_for(model: ModelSpec, x: State, y: State,
               config: OracleConfig) -> tuple[np.ndarray, np.ndarray, _TildeTable]:
    x = _check_state(model, x)
    y = np.asarray(y, dtype=float)
    if not model.contains(y):
        raise DomainError(f"landing state {y.tolist()} lies outside the state space")
    table = _cached_table(model, x.tobytes(), y.tobytes(), model.state_dim, config.quad_tol)
    return x, y, table


def H_fn(model: ModelSpec, x: State, y: State, t: float,
         config: OracleConfig = DEFAULT_ORACLE_CONFIG) -> float:
    """Tail mass of the transition law at landing density point ``y``.

    Strictly positive whenever the relocation density is positive along the
    remaining flow; nonincreasing in ``t``.
    """
    x, y, table = _table_for(model, x, y, config)
    t = _check_time(model, x, t)
    return table.H(t)


def lambda_tilde(model: ModelSpec, x: State, y: State, t: float,
                 config: OracleConfig = DEFAULT_ORACLE_CONFIG) -> float:
    """Conditional jump rate at duration ``t`` given the landing point ``y``."""
    x, y, table = _table_for(model, x, y, config)
    t = _check_time(model, x, t)
    denominator = table.H(t)
    if denominator <= 0.0:
        raise NumericalError(
            f"conditional-rate denominator underflowed at t={t}", achieved=denominator
        )
    return table.fq(t) / denominator


def G_tilde(model: ModelSpec, x: State, y: State, t: float,
            config: OracleConfig = DEFAULT_ORACLE_CONFIG) -> float:
    """Conditional survivor at duration ``t`` given the landing point ``y``.

    Equals one at ``t = 0`` and stays in (0, 1]; an independent route to the
    same value is ``exp(-cumulative_lambda_tilde(...))``.
    """
    x, y, table = _table_for(model, x, y, config)
    t = _check_time(model, x, t)
    if t == 0.0:
        return 1.0
    h0 = table.H(0.0)
    if h0 <= 0.0:
        raise NumericalError("conditional-survivor denominator underflowed", achieved=h0)
    return table.H(t) / h0


def cumulative_lambda_tilde(model: ModelSpec, x: State, y: State, t: float,
                            config: OracleConfig = DEFAULT_ORACLE_CONFIG,
                            *, tol: float = 1e-8) -> float:
    """Quadrature of the conditional jump rate over [0, t].

    Evaluates ``lambda_tilde`` pointwise and integrates numerically, which
    keeps this route independent of the ratio identity behind ``G_tilde``.
    """
    x, y, table = _table_for(model, x, y, config)
    t = _check_time(model, x, t)
    if t == 0.0:
        return 0.0

    def rate(s: float) -> float:
        h = table.H(s)
        if h <= 0.0:
            raise NumericalError(
                f"conditional-rate denominator underflowed at t={s}", achieved=h
            )
        return table.fq(s) / h

    return integrate_adaptive(rate, 0.0, t, abs_tol=tol, points=table.hint_points())


def h_floor(model: ModelSpec, sup_exit: float, *, quad_tol: float = 1e-10) -> float | None:
    """Uniform lower bound on ``H_fn`` implied by the model metadata.

    Needs both a relocation-density lower bound and a hazard envelope;
    returns ``None`` when either is missing. ``sup_exit`` bounds the exit
    time over the states of interest.
    """
    if model.density_lower_bound is None or model.hazard_envelope is None:
        return None
    envelope_mass = integrate_adaptive(
        lambda s: float(model.hazard_envelope(s)), 0.0, sup_exit, abs_tol=quad_tol
    )
    return model.density_lower_bound * math.exp(-envelope_mass)


def bench_exact_f(t: float, base_rate: float = 5.0) -> float:
    """Closed-form sojourn density from the disk center of the benchmark.

    From the center the hazard along the flow is ``base_rate + t``, so the
    density is ``(base_rate + t) * exp(-t * (base_rate + t / 2))`` on the
    interval before the boundary is reached.
    """
    t = float(t)
    if t < 0.0:
        raise HorizonError(f"negative time {t}")
    return (base_rate + t) * math.exp(-t * (base_rate + 0.5 * t))


def sample_conditioning_triple(
    model: ModelSpec,
    state_sampler: Callable[[np.random.Generator], np.ndarray],
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Draw a start, a landing state, and a duration from the chain's own law.

    The landing state is the one actually reached after a sampled sojourn, so
    the conditional quantities at the returned triple are supported by real
    transition mass rather than by astronomically unlikely pairings; the
    duration is uniform on (0, sojourn], which keeps the conditioning event
    comfortably away from numerical underflow.
    """
    x = state_sampler(rng)
    s, _ = sample_sojourn(model, x, rng)
    y = sample_postjump(model, x, s, rng)
    t = float(rng.uniform(0.0, s))
    return x, y, t


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo value with a batch-means standard error."""

    value: float
    stderr: float
    n_samples: int


def _mc_chain(model: ModelSpec, config: OracleConfig) -> Trajectory:
    if config.start_state is None:
        raise ConfigurationError("Monte Carlo references need start_state in OracleConfig")
    x0 = np.asarray(config.start_state, dtype=float)
    traj = simulate_chain(model, x0, config.mc_samples, config.seed, validate=False)
    return traj.tail(config.burn_in) if config.burn_in else traj


def _batch_ratio_stderr(num: np.ndarray, den: np.ndarray, n_batches: int) -> float:
    """Standard error of sum(num)/sum(den) from contiguous batch ratios."""
    n = num.size
    n_batches = max(2, min(n_batches, n))
    edges = np.linspace(0, n, n_batches + 1).astype(int)
    ratios = []
    for lo, hi in zip(edges, edges[1:]):
        d = den[lo:hi].sum()
        if d > 0.0:
            ratios.append(num[lo:hi].sum() / d)
    if len(ratios) < 2:
        raise OracleUndefinedError("too few nonempty batches for a standard error")
    return float(np.std(ratios, ddof=1) / math.sqrt(len(ratios)))


def l_tilde_mc_grid(
    model: ModelSpec,
    source: RegionSpec,
    target: RegionSpec,
    ts: Sequence[float],
    config: OracleConfig = DEFAULT_ORACLE_CONFIG,
) -> list[McEstimate]:
    """Monte Carlo reference for the region-averaged conditional rate.

    One long chain is simulated once; transitions from ``source`` into
    ``target`` provide the stationary-regime pairs. For each pair the
    conditional rate and survivor at every requested duration reduce to the
    cached tail integrals of the pair's transition density, and the reference
    value is the ratio of their across-pair averages. All requested durations
    share the chain and the per-pair tables, so a grid costs little more than
    a single point.
    """
    chain = _mc_chain(model, config)
    in_source = source.indicator(chain.states[:-1])
    in_target = target.indicator(chain.states[1:])
    pair_idx = np.nonzero(in_source & in_target)[0]
    if pair_idx.size == 0:
        raise OracleUndefinedError(
            f"no transitions from {source.label!r} to {target.label!r} in the oracle chain"
        )
    if pair_idx.size > config.max_pairs:
        take = np.unique(
            np.linspace(0, pair_idx.size - 1, config.max_pairs).astype(int)
        )
        pair_idx = pair_idx[take]
    ts = [float(t) for t in ts]
    n_pairs = pair_idx.size
    # rate * survivor = fq(t) / H(0) and survivor = H(t) / H(0), so each pair
    # contributes one table lookup per duration
    rate_terms = np.empty((len(ts), n_pairs))
    survivor_terms = np.empty((len(ts), n_pairs))
    for j, i in enumerate(pair_idx):
        u = chain.states[i]
        v = chain.states[i + 1]
        table = _TildeTable(model, u, v, quad_tol=config.quad_tol, fast=True)
        h0 = table.H(0.0)
        if h0 <= 0.0:
            raise NumericalError("pair tail mass underflowed", achieved=h0)
        for k, t in enumerate(ts):
            if t > table.t_star:
                raise HorizonError(
                    f"duration {t} exceeds the exit time {table.t_star} of a sampled start"
                )
            rate_terms[k, j] = table.fq(t) / h0
            survivor_terms[k, j] = table.H(t) / h0
    out = []
    for k in range(len(ts)):
        value = rate_terms[k].sum() / survivor_terms[k].sum()
        stderr = _batch_ratio_stderr(rate_terms[k], survivor_terms[k], 16)
        out.append(McEstimate(value=float(value), stderr=stderr, n_samples=n_pairs))
    return out


def l_tilde_mc(
    model: ModelSpec,
    source: RegionSpec,
    target: RegionSpec,
    t: float,
    config: OracleConfig = DEFAULT_ORACLE_CONFIG,
) -> McEstimate:
    """Single-duration form of :func:`l_tilde_mc_grid`."""
    return l_tilde_mc_grid(model, source, target, [t], config)[0]


def H_tilde_mc(
    model: ModelSpec,
    source: RegionSpec,
    target: RegionSpec,
    t: float,
    config: OracleConfig = DEFAULT_ORACLE_CONFIG,
) -> McEstimate:
    """Long-run empirical conditional probability that a sojourn from
    ``source`` exceeds ``t`` and lands in ``target``.

    Computed with the same counting formula as the trajectory estimator, but
    on an independent chain simulated from the oracle configuration.
    """
    chain = _mc_chain(model, config)
    try:
        num, den = empirical_survivor_counts(chain, source, target, float(t))
    except EstimatorUndefinedError as exc:
        raise OracleUndefinedError(str(exc)) from exc
    in_source = source.indicator(chain.states[:-1]).astype(float)
    hit = (
        in_source
        * target.indicator(chain.states[1:]).astype(float)
        * (chain.sojourns[1:] > t).astype(float)
    )
    stderr = _batch_ratio_stderr(hit, in_source, 20)
    return McEstimate(value=num / den, stderr=stderr, n_samples=den)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class InvariantReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        width = max(len(c.name) for c in self.checks)
        return [
            f"{'PASS' if c.passed else 'FAIL'}  {c.name.ljust(width)}  {c.detail}"
            for c in self.checks
        ]


def run_invariant_report(
    model: ModelSpec,
    state_sampler: Callable[[np.random.Generator], np.ndarray],
    *,
    seed: int = 0,
    n_states: int = 20,
    n_triples: int = 8,
    quad_tol: float = 1e-10,
) -> InvariantReport:
    """Model self-consistency checks driven by sampled states.

    Covers the one-jump conservation identity, the declared hazard envelope,
    the flow semigroup property, containment of kernel-sampler output, and
    the conditional-law identities on well-conditioned triples. Each check
    reports its worst residual.
    """
    rng = np.random.default_rng(seed)
    states = [state_sampler(rng) for _ in range(n_states)]
    config = OracleConfig(quad_tol=quad_tol)
    checks = []

    worst = 0.0
    for x in states:
        t_star = float(model.exit_time(x))
        mass = integrate_adaptive(
            lambda s: density_f(model, x, s), 0.0, t_star, abs_tol=quad_tol, limit=500
        )
        worst = max(worst, abs(mass + survival_G(model, x, t_star) - 1.0))
    checks.append(
        CheckResult("one-jump conservation", worst <= 1e-8, f"max |mass - 1| = {worst:.3e}")
    )

    if model.hazard_envelope is not None:
        worst = -math.inf
        for x in states:
            t_star = float(model.exit_time(x))
            horizon = t_star if math.isfinite(t_star) else 10.0
            for u in np.linspace(0.0, horizon, 64):
                gap = float(model.hazard(model.flow(x, u))) - float(model.hazard_envelope(u))
                worst = max(worst, gap)
        checks.append(
            CheckResult("hazard envelope", worst <= 1e-12, f"max rate - bound = {worst:.3e}")
        )

    worst = 0.0
    for x in states:
        t_star = float(model.exit_time(x))
        horizon = t_star if math.isfinite(t_star) else 10.0
        total = float(rng.uniform(0.0, horizon))
        first = float(rng.uniform(0.0, total)) if total > 0.0 else 0.0
        direct = model.flow(x, total)
        composed = model.flow(model.flow(x, first), total - first)
        worst = max(worst, float(np.max(np.abs(direct - composed))))
    checks.append(
        CheckResult("flow semigroup", worst <= 1e-9, f"max composition gap = {worst:.3e}")
    )

    # the sampling and conditional-law checks can trip runtime guards on a
    # defective model (envelope violations, kernel escapes); record those as
    # failures instead of aborting the remaining diagnostics
    try:
        contained = True
        for x in states:
            s, _ = sample_sojourn(model, x, rng)
            z = sample_postjump(model, x, s, rng)  # raises if outside
            contained = contained and model.contains(z)
        checks.append(
            CheckResult(
                "kernel containment", contained, f"{n_states} draws inside the state space"
            )
        )
    except PdmpError as exc:
        checks.append(CheckResult("kernel containment", False, f"aborted: {exc}"))

    try:
        worst_identity = 0.0
        worst_dual = 0.0
        for _ in range(n_triples):
            x, y, t = sample_conditioning_triple(model, state_sampler, rng)
            h = H_fn(model, x, y, t, config)
            rate = lambda_tilde(model, x, y, t, config)
            # independent route to the joint density: adaptive quadrature inside
            # density_f versus the fixed-grid tables behind the conditional rate
            direct = density_f(model, x, t) * float(model.kernel_density(x, t, y))
            worst_identity = max(worst_identity, abs(rate * h - direct))
            survivor = G_tilde(model, x, y, t, config)
            dual = math.exp(-cumulative_lambda_tilde(model, x, y, t, config))
            worst_dual = max(worst_dual, abs(survivor - dual) / survivor)
        checks.append(
            CheckResult(
                "conditional-rate identity",
                worst_identity <= 1e-10,
                f"max |rate * H - fq| = {worst_identity:.3e}",
            )
        )
        checks.append(
            CheckResult(
                "conditional-survivor duality",
                worst_dual <= 1e-6,
                f"max relative gap = {worst_dual:.3e}",
            )
        )
    except PdmpError as exc:
        checks.append(CheckResult("conditional-rate identity", False, f"aborted: {exc}"))
        checks.append(CheckResult("conditional-survivor duality", False, f"aborted: {exc}"))

    return InvariantReport(tuple(checks))
