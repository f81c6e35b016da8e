"""Numerical integration helpers.

Public entry point is :func:`integrate_adaptive`, a thin QUADPACK wrapper that
raises instead of silently under-delivering. The two table classes cache panel
integrals of a fixed scalar function so that callers who need the same integral
at many interleaved endpoints (the conditional-law oracle, the hazard inverter)
do not pay for a full adaptive run per evaluation.
"""

from __future__ import annotations

import heapq
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import NumericalError

_GL_NODES: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    try:
        return _GL_NODES[n]
    except KeyError:
        _GL_NODES[n] = np.polynomial.legendre.leggauss(n)
        return _GL_NODES[n]


def gauss_panel(f: Callable[[float], float], a: float, b: float, n: int = 16) -> float:
    """Fixed-order Gauss-Legendre integral of a scalar function on [a, b]."""
    if b <= a:
        return 0.0
    nodes, weights = _leggauss(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * sum(w * f(mid + half * x) for x, w in zip(nodes, weights))


def integrate_adaptive(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    abs_tol: float = 1e-10,
    rel_tol: float | None = None,
    points=None,
    limit: int = 300,
) -> float:
    """Adaptive quadrature of ``f`` on [a, b].

    ``points`` may list interior locations of known sharp features; they are
    forwarded to QUADPACK as subdivision hints. If the routine reports trouble
    and its error estimate misses the requested budget, ``NumericalError`` is
    raised with the achieved tolerance attached.
    """
    if b < a:
        raise ValueError(f"inverted integration range [{a}, {b}]")
    if b == a:
        return 0.0
    if rel_tol is None:
        rel_tol = max(1e-13, abs_tol / 10.0)
    hints = None
    if points is not None:
        hints = sorted(p for p in points if a < p < b)
        if not hints:
            hints = None
    out = integrate.quad(
        f, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=limit, points=hints, full_output=1
    )
    value, abserr = out[0], out[1]
    if len(out) > 3:
        # QUADPACK appended a warning message; accept the result only if the
        # reported error still fits the requested budget.
        if abserr > abs_tol + rel_tol * abs(value):
            raise NumericalError(
                f"quadrature on [{a:g}, {b:g}] did not converge", achieved=abserr
            )
    return value


class CumulativeTable:
    """Uniform-grid cumulative integral of a smooth scalar function.

    Stores per-interval Gauss panels on a uniform grid over [a, b]. Evaluation
    at an arbitrary point adds a local panel over the partial interval, so the
    result carries quadrature accuracy rather than interpolation accuracy.
    ``interp=True`` switches evaluation to linear interpolation of the grid
    cumulative, which is much faster and adequate for Monte Carlo use.
    """

    def __init__(
        self,
        f: Callable[[float], float],
        a: float,
        b: float,
        n: int = 256,
        order: int = 8,
        interp: bool = False,
    ):
        if b <= a:
            raise ValueError(f"empty table range [{a}, {b}]")
        self.f = f
        self.order = order
        self.interp = interp
        self.edges = np.linspace(a, b, n + 1)
        panels = [gauss_panel(f, lo, hi, order) for lo, hi in zip(self.edges, self.edges[1:])]
        self.cum = np.concatenate([[0.0], np.cumsum(panels)])

    @property
    def total(self) -> float:
        return float(self.cum[-1])

    def value(self, s: float) -> float:
        edges = self.edges
        if s <= edges[0]:
            return 0.0
        if s >= edges[-1]:
            return self.total
        if self.interp:
            return float(np.interp(s, edges, self.cum))
        j = int(np.searchsorted(edges, s, side="right")) - 1
        return float(self.cum[j]) + gauss_panel(self.f, float(edges[j]), s, self.order)


class PanelTable:
    """Adaptively refined partition of [a, b] with cached panel integrals.

    Panels are bisected where a 16-point and an 8-point Gauss rule disagree,
    so narrow features (kernel-width bumps in the oracle integrand) end up
    bracketed by short panels. Suffix sums over panels make tail integrals
    ``int_s^b f`` cheap at arbitrary ``s``: one partial panel plus a lookup.
    """

    def __init__(
        self,
        f: Callable[[float], float],
        a: float,
        b: float,
        *,
        abs_tol: float = 1e-10,
        seed_panels: int = 64,
        max_panels: int = 512,
    ):
        if b <= a:
            raise ValueError(f"empty panel range [{a}, {b}]")
        self.f = f
        self.a = float(a)
        self.b = float(b)
        heap: list[tuple[float, float, float, float]] = []
        edges = np.linspace(a, b, seed_panels + 1)
        err_sum = 0.0
        total = 0.0
        for lo, hi in zip(edges, edges[1:]):
            hi_est = gauss_panel(f, lo, hi, 16)
            err = abs(hi_est - gauss_panel(f, lo, hi, 8))
            heapq.heappush(heap, (-err, lo, hi, hi_est))
            err_sum += err
            total += hi_est
        count = seed_panels
        while err_sum > abs_tol * (1.0 + abs(total)) and count < max_panels:
            neg_err, lo, hi, est = heapq.heappop(heap)
            err_sum += neg_err  # neg_err is -err
            total -= est
            mid = 0.5 * (lo + hi)
            for c_lo, c_hi in ((lo, mid), (mid, hi)):
                c_est = gauss_panel(f, c_lo, c_hi, 16)
                c_err = abs(c_est - gauss_panel(f, c_lo, c_hi, 8))
                heapq.heappush(heap, (-c_err, c_lo, c_hi, c_est))
                err_sum += c_err
                total += c_est
            count += 1
        if err_sum > abs_tol * (1.0 + abs(total)) * 10.0:
            raise NumericalError(
                f"panel refinement on [{a:g}, {b:g}] stalled at {count} panels",
                achieved=err_sum,
            )
        panels = sorted((lo, hi, est) for _, lo, hi, est in heap)
        self.edges = np.array([lo for lo, _, _ in panels] + [self.b])
        self.integrals = np.array([est for _, _, est in panels])
        # tail[i] = sum of panel integrals from panel i to the end
        self.tails = np.concatenate([np.cumsum(self.integrals[::-1])[::-1], [0.0]])
        self.seed_width = (self.b - self.a) / seed_panels

    @property
    def total(self) -> float:
        return float(self.tails[0])

    def tail(self, s: float) -> float:
        """Integral of f over [s, b]."""
        if s <= self.a:
            return self.total
        if s >= self.b:
            return 0.0
        j = int(np.searchsorted(self.edges, s, side="right")) - 1
        partial = gauss_panel(self.f, s, float(self.edges[j + 1]), 16)
        return partial + float(self.tails[j + 1])

    def prefix(self, s: float) -> float:
        """Integral of f over [a, s]."""
        return self.total - self.tail(s)

    def refined_edges(self) -> list[float]:
        """Interior edges of panels that were bisected below the seed width.

        Useful as subdivision hints when integrating a function that inherits
        this table's sharp features.
        """
        widths = np.diff(self.edges)
        keep = widths < 0.75 * self.seed_width
        out = []
        for j, flag in enumerate(keep):
            if flag:
                out.append(float(self.edges[j]))
                out.append(float(self.edges[j + 1]))
        return sorted(set(p for p in out if self.a < p < self.b))
