"""Quadrature helpers: adaptive integrals and reusable integral tables."""

import math

import numpy as np
import pytest

from pdmpest.errors import NumericalError
from pdmpest.quadrature import (
    CumulativeTable,
    PanelTable,
    gauss_panel,
    integrate_adaptive,
)


def test_integrate_adaptive_polynomial():
    value = integrate_adaptive(lambda s: 3.0 * s * s, 0.0, 2.0)
    assert value == pytest.approx(8.0, abs=1e-12)


def test_integrate_adaptive_honors_breakpoints():
    # kink at 1: pass it as an interior point so the integrator subdivides there
    value = integrate_adaptive(lambda s: abs(s - 1.0), 0.0, 2.0, points=[1.0])
    assert value == pytest.approx(1.0, abs=1e-12)


def test_integrate_adaptive_raises_when_budget_exhausted():
    # integrable singularity with far too few subdivisions allowed
    with pytest.raises(NumericalError):
        integrate_adaptive(lambda s: s**-0.9, 1e-12, 1.0, abs_tol=1e-13, limit=2)


def test_gauss_panel_exactness():
    # order n is exact for polynomials up to degree 2n - 1
    value = gauss_panel(lambda s: s**7 - 2.0 * s**3 + 1.0, -1.0, 3.0, n=8)
    exact = (3.0**8 - (-1.0) ** 8) / 8.0 - 2.0 * (3.0**4 - 1.0) / 4.0 + 4.0
    assert value == pytest.approx(exact, rel=1e-13)


def test_cumulative_table_matches_antiderivative():
    table = CumulativeTable(math.cos, 0.0, 2.0, n=64)
    for s in (0.0, 0.37, 1.0, 1.999, 2.0):
        assert table.value(s) == pytest.approx(math.sin(s), abs=1e-12)
    assert table.total == pytest.approx(math.sin(2.0), abs=1e-12)


def test_cumulative_table_interp_mode_is_close_enough():
    table = CumulativeTable(math.exp, 0.0, 1.0, n=256, order=2, interp=True)
    worst = max(
        abs(table.value(s) - (math.exp(s) - 1.0)) for s in np.linspace(0.0, 1.0, 501)
    )
    assert worst < 1e-5


def test_panel_table_tail_and_prefix():
    table = PanelTable(lambda s: 2.0 * s, 0.0, 1.0)
    assert table.prefix(0.3) == pytest.approx(0.09, abs=1e-12)
    assert table.tail(0.3) == pytest.approx(0.91, abs=1e-12)
    assert table.tail(0.0) == pytest.approx(1.0, abs=1e-12)
    assert table.tail(1.0) == 0.0


def test_panel_table_refines_sharp_features():
    # narrow bump: refinement should cluster panel edges near it
    center, width = 0.7, 1e-3

    def bump(s):
        return math.exp(-((s - center) ** 2) / (2.0 * width * width))

    table = PanelTable(bump, 0.0, 1.0, abs_tol=1e-12, seed_panels=16, max_panels=512)
    exact = width * math.sqrt(2.0 * math.pi)
    assert table.tail(0.0) == pytest.approx(exact, rel=1e-9)
    edges = np.asarray(table.refined_edges())
    assert edges.size > 0
    assert np.min(np.abs(edges - center)) < 0.05
