import math

import numpy as np
import pytest

from clwn import annulus as an
from clwn import checks, driving
from clwn import field as fd
from clwn.errors import PoleEncountered


@pytest.fixture(scope="module")
def sched():
    return checks.annulus_test_schedule()


def test_k_functional_telescopes():
    assert abs(an.annulus_k_functional(math.log(2), 1.0, 0.5, 40) - 2.0) < 1e-8
    # off the xi orbit the same limit 1/xi holds
    assert abs(an.annulus_k_functional(1.0, 3.0, 0.7, 60) - 1 / 0.7) < 1e-8


@pytest.mark.parametrize("t", [0.0, 0.25, 0.5])
def test_field_symmetry(sched, t):
    tau, taud = float(sched.tau(t)), float(sched.tau.derivative(t))
    for z in checks.ANNULUS_SEEDS:
        a = an.eval_P_annulus(sched, t, math.exp(tau) * z)
        b = an.eval_P_annulus(sched, t, z)
        want = math.exp(tau) * b.value - taud * math.exp(tau) * z
        assert abs(a.value - want) < 1e-10 + a.tail_estimate + math.exp(tau) * b.tail_estimate


@pytest.mark.parametrize("t", [0.0, 0.3])
def test_residue(sched, t):
    xi, taud = float(sched.xi(t)), float(sched.tau.derivative(t))
    r = fd.contour_residue(lambda z: an.eval_P_annulus(sched, t, z).value, xi, 1e-3)
    want = -taud * xi ** 2
    assert abs(r - want) < 1e-4 * abs(want)


def test_pole(sched):
    with pytest.raises(PoleEncountered):
        an.eval_P_annulus(sched, 0.0, complex(math.exp(sched.tau0)))


def test_schedule_validation():
    with pytest.raises(ValueError):
        an.AnnulusSchedule.build(1.0, -1.0, 0.5, tau_rate=-0.1)
    with pytest.raises(ValueError):
        an.AnnulusSchedule.build(1.0, 0.0, 0.5, tau_rate=0.1)
    with pytest.raises(ValueError):
        an.AnnulusSchedule.build(1.0, -1.0, 0.5, xi=-1.0, tau_rate=0.1)
    s = an.AnnulusSchedule.build(1.0, -1.0, 0.5, tau_samples={"times": [0, 0.5], "values": [1.0, 1.1]})
    assert float(s.tau(0.5)) == pytest.approx(1.1)


def test_trivial_driving():
    s = an.AnnulusSchedule(driving.ConstantSchedule(1.0), driving.ConstantSchedule(1.0),
                           driving.ConstantSchedule(0.0), -1.0)
    for z in (0.3 + 0.7j, 2 + 1j):
        assert an.eval_P_annulus(s, 0.3, z).value == 0
        r = an.forward_flow(s, z, 1.0)
        assert r.final == z and not r.swallowed


def test_equivariance(sched):
    res = checks.check_annulus_equivariance()
    assert res.passed, res.line()


def test_roundtrip(sched):
    res = checks.check_annulus_roundtrip()
    assert res.passed, res.line()


def test_inverse_zero_horizon(sched):
    h = an.inverse_flow(sched, 1 + 1j, 0.0)
    assert len(h.values) == 1 and h.final == 1 + 1j


@pytest.mark.parametrize("w", [1.2 + 0.01j, 1 + 0.001j, 0.9 + 0.05j])
def test_inverse_repulsion(sched, w):
    h = an.inverse_flow(sched, w, 0.5, 1e-10)
    assert np.min(h.values.imag) >= w.imag * (1 - 1e-9)


@pytest.mark.parametrize("t0", [0.05, 0.2, 0.4])
def test_trace_points_swallowed(sched, t0):
    # the hull point reached at time t0 is g_{t0}^{-1}(xi + i eps)
    z = an.inverse_flow(sched, float(sched.xi(t0)) + 1e-9j, t0, 1e-12).final
    r = an.forward_flow(sched, z, 0.5, 1e-12)
    assert r.swallowed and abs(r.swallow_time - t0) < 1e-6
    assert not an.forward_flow(sched, z + 0.05j, 0.5, 1e-12).swallowed


def test_psi_regularized_product():
    tau, c = 1.0, -1.0
    for z in (0.5 + 1j, 2 + 0.3j):
        assert an.annulus_psi(tau, c, z, 60) == pytest.approx(-c / z, rel=1e-10)


def test_parallel_matches_serial(sched):
    a = an.simulate(sched, checks.ANNULUS_SEEDS, 0.5, 1e-9, 1)
    b = an.simulate(sched, checks.ANNULUS_SEEDS, 0.5, 1e-9, 4)
    for x, y in zip(a, b):
        assert np.array_equal(x.values, y.values)
