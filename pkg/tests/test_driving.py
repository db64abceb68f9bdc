import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clwn import checks, driving
from clwn.errors import ConfigError


def test_sle_zero_noise():
    p = driving.realize(driving.Sle(0.0, seed=123, start=0.7), 1.0)
    t = np.linspace(0, 1, 11)
    assert np.all(p(t) == 0.7)


def test_sle_pure_drift():
    p = driving.realize(driving.Sle(0.0, h=1.0, seed=5), 1.0)
    t = np.linspace(0, 1, 37)
    assert np.max(np.abs(p(t) - t)) < 1e-12


def test_sle_drift_schedule():
    p = driving.realize(driving.Sle(0.0, h=driving.Linear(0.0, 2.0), dt=1e-3), 1.0)
    # Euler sum of 2 t dt on the mesh, close to t^2
    assert abs(p(1.0) - 1.0) < 3e-3


def test_variance():
    v = checks.sle_increment_variance()
    assert 3.7 <= v <= 4.3


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**63), st.floats(0.0, 8.0))
def test_reproducible(seed, kappa):
    a = driving.realize(driving.Sle(kappa, seed=seed, dt=1e-2), 1.0)
    b = driving.realize(driving.Sle(kappa, seed=seed, dt=1e-2), 1.0)
    assert np.array_equal(a.values, b.values)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**63), st.sampled_from([0.5, 2.0, 4.0, 6.0]))
def test_sqrt_kappa_scaling(seed, kappa):
    a = driving.realize(driving.Sle(kappa, seed=seed, dt=1e-2), 1.0)
    b = driving.realize(driving.Sle(1.0, seed=seed, dt=1e-2), 1.0)
    assert np.array_equal(a.values, np.sqrt(kappa) * b.values)


def test_mesh_extendable():
    short = driving.realize(driving.Sle(4.0, seed=9, dt=1e-3), 1.0)
    long = driving.realize(driving.Sle(4.0, seed=9, dt=1e-3), 2.0)
    assert np.array_equal(short.values, long.values[:len(short.values)])


def test_increment_autocorrelation():
    x = driving.sle_normals(1, 100_000)
    r = np.corrcoef(x[:-1], x[1:])[0, 1]
    assert -0.02 <= r <= 0.02


def test_normals_moments():
    x = driving.sle_normals(3, 200_000)
    assert abs(x.mean()) < 0.01 and abs(x.var() - 1) < 0.02


def test_seeds_differ():
    assert not np.array_equal(driving.sle_normals(1, 10), driving.sle_normals(2, 10))


def test_constant_and_linear():
    assert driving.realize(3.0, 1.0)(0.4) == 3.0
    lin = driving.realize(driving.Linear(1.0, -2.0), 1.0)
    assert lin(0.25) == pytest.approx(0.5) and lin.derivative(0.1) == -2.0


def test_samples_monotone_cubic():
    s = driving.realize(driving.Samples((0, 0.3, 1.0), (1.0, 1.5, 1.6)), 1.0)
    t = np.linspace(0, 1, 201)
    v = s(t)
    assert np.all(np.diff(v) >= -1e-15)
    assert s(0.3) == pytest.approx(1.5)
    assert np.all(s.derivative(t) >= -1e-12)


def test_samples_validation():
    with pytest.raises(ValueError):
        driving.Samples((0, 0), (1, 2))
    with pytest.raises(ValueError):
        driving.Samples((0,), (1,))
    with pytest.raises(ValueError):
        driving.realize(driving.Samples((0, 0.5), (1, 2)), 1.0)


def test_sle_validation():
    with pytest.raises(ValueError):
        driving.Sle(-1.0)
    with pytest.raises(ValueError):
        driving.Sle(1.0, dt=0.0)


def test_parse_spec():
    assert driving.parse_spec(2) == driving.Constant(2.0)
    assert driving.parse_spec({"type": "linear", "start": 1, "slope": 2}) == driving.Linear(1, 2)
    sle = driving.parse_spec({"type": "sle", "kappa": 2, "seed": 4, "h": {"type": "constant", "value": 1}})
    assert sle.h == driving.Constant(1.0)
    with pytest.raises(ConfigError) as e:
        driving.parse_spec({"type": "samples", "values": [1, 2]})
    assert e.value.key == "times"
    with pytest.raises(ConfigError):
        driving.parse_spec({"type": "brownian"})


def test_sample_path():
    sched = driving.realize(driving.Linear(0.0, 1.0), 1.0)
    t, v = driving.sample_path(sched, 1.0, 0.25)
    assert np.allclose(t, [0, 0.25, 0.5, 0.75, 1.0]) and np.allclose(v, t)
