import math

import numpy as np
import pytest

from clwn import chordal, driving

XI0 = driving.realize(driving.Constant(0.0), 2.0)


def test_analytic_solution():
    g = chordal.chordal_seed(XI0, 3j, 1.0)
    assert abs(g.final - 1j * math.sqrt(5)) < 1e-6
    for t, v in zip(g.times, g.values):
        assert abs(v - np.sqrt(-9 + 4 * t + 0j)) < 1e-6


def test_tip_swallow_time():
    s = chordal.chordal_seed(XI0, 2j, 1.5)
    assert s.swallowed and 0.999 <= s.swallow_time <= 1.001


def test_zero_horizon():
    g = chordal.chordal_seed(XI0, 1 + 1j, 0.0)
    assert g.final == 1 + 1j


def test_hydrodynamic_normalization():
    g = chordal.chordal_seed(XI0, 100j, 1.0)
    assert abs(g.final - 100j - 2 / 100j) < 1e-3


def test_imaginary_part_decreases():
    for y in (0.5, 1.5, 3.0):
        g = chordal.chordal_seed(XI0, 1j * y, 1.0)
        assert np.all(np.diff(g.values.imag) < 0)


def test_moving_driver():
    # xi(t) = a t: the flow g - xi satisfies a closed ODE; compare with a dense reference
    xi = driving.realize(driving.Linear(0.0, 1.0), 1.0)
    coarse = chordal.chordal_seed(xi, 1 + 2j, 1.0, 1e-8)
    fine = chordal.chordal_seed(xi, 1 + 2j, 1.0, 1e-12)
    assert abs(coarse.final - fine.final) < 1e-6


def test_run_validates_seeds():
    with pytest.raises(ValueError):
        chordal.ChordalRun(0.0, (1 - 1j,), 1.0)


def test_chordal_flow_threads():
    run = chordal.ChordalRun(0.0, (3j, 2j, 1 + 1j), 1.5)
    a = chordal.chordal_flow(run, 1)
    b = chordal.chordal_flow(run, 3)
    assert [r.swallow_time for r in a] == [r.swallow_time for r in b]
    assert a[1].swallowed and not a[0].swallowed
