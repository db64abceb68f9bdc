import math

import numpy as np
import pytest
from scipy.linalg import expm

from clwn import automorphic as au
from clwn import checks
from clwn import field as fd
from clwn import fuchsian as fu
from clwn import moebius as mb
from clwn.automorphic import GroupVelocity
from clwn.errors import FreenessWarning, PoleEncountered

C = 4.0
XI = 0.0
Z = 0.3 + 1.2j
SAMPLES = (0.5j, 1j, 2j, 3j, 5j)


def moved(G, t):
    """The test group pushed along the prescribed perturbation for time t."""
    X = [np.array(x) for x in checks.TEST_PERTURBATION]
    return fu.FuchsianGroup(tuple(mb.unimodular(expm(t * x) @ g.matrix)
                                  for x, g in zip(X, G.generators)))


def test_velocity_preserves_det(group):
    with pytest.raises(ValueError):
        GroupVelocity(group, ((1.0, 0.0, 0.0, 0.0), (0.0,) * 4))
    V = GroupVelocity.from_sl2(group, [np.array(x) for x in checks.TEST_PERTURBATION])
    for X, g in zip(V.sl2(), group.generators):
        assert abs(np.trace(X)) < 1e-12


def test_word_velocity_identity(group, ctx):
    assert au.word_velocity(group, ctx.velocity, fu.Word(()), Z) == 0


def test_word_velocity_scaling():
    tau = 0.7
    G = fu.FuchsianGroup((mb.scaling(math.exp(tau)),))
    # z -> e^tau z with tau_dot = 1 is generated by X = diag(1/2, -1/2)
    V = GroupVelocity.from_sl2(G, [np.diag([0.5, -0.5])])
    assert au.word_velocity(G, V, fu.Word((1,)), 1j) == pytest.approx(1j * math.exp(tau), abs=1e-14)


@pytest.mark.parametrize("letters", [(1, -2, 1), (2, 2, -1), (-1, -2, -1)])
def test_word_velocity_finite_difference(group, ctx, letters):
    w = fu.Word(letters)
    h = 1e-5
    fdv = (mb.apply(moved(group, h).evaluate(w), Z) - mb.apply(moved(group, -h).evaluate(w), Z)) / (2 * h)
    got = au.word_velocity(group, ctx.velocity, w, Z)
    assert abs(got - fdv) < 1e-6 * abs(fdv)


def test_word_velocity_pole(group, ctx):
    g = group.generators[0]
    with pytest.raises(PoleEncountered):
        au.word_velocity(group, ctx.velocity, fu.Word((1,)), -g.d / g.c)


def test_psi_trivial_group():
    E = fu.FuchsianGroup(())
    assert au.psi_k(E, C, fu.Word(()), Z).value == pytest.approx(1.0)


@pytest.mark.parametrize("k", [0, 1])
@pytest.mark.parametrize("rho", [(1,), (2,), (-1, 2)])
def test_character_law(group, k, rho):
    rho = fu.Word(rho)
    p1 = au.psi_k(group, C, k, mb.apply(group.evaluate(rho), Z))
    p0 = au.psi_k(group, C, k, Z)
    ch = au.char_chi(group, C, k, rho)
    rel = abs(p1.value / p0.value / ch.value - 1)
    tails = p1.tail_estimate / abs(p1.value) + p0.tail_estimate / abs(p0.value) + ch.tail_estimate / ch.value
    assert rel < 10 * tails


def test_character_identity(group):
    assert au.char_chi(group, C, 0, fu.Word(())).value == 1.0


def test_character_multiplicative(group):
    r1, r2 = fu.Word((1,)), fu.Word((-2,))
    a = au.char_chi(group, C, 0, r1 * r2)
    b = au.char_chi(group, C, 0, r1)
    d = au.char_chi(group, C, 0, r2)
    assert abs(a.value - b.value * d.value) < a.tail_estimate + b.tail_estimate + d.tail_estimate


def test_character_parabolic():
    # z -> z / (1 - 5 z) is parabolic at 0; its two isometric circles touch there
    p = mb.MoebiusMap(1.0, 0.0, -5.0, 1.0)
    with pytest.warns(FreenessWarning):
        G = fu.FuchsianGroup((mb.hyperbolic(1.0, 2.0, 9.0), p), allow_parabolic=True)
    ch = au.char_chi(G, C, 0, fu.Word((2,)), fu.EnumerationPolicy(8))
    assert abs(ch.value - 1) < max(ch.tail_estimate, 1e-7) * 10


def test_upsilon_trivial_group():
    E = fu.FuchsianGroup(())
    assert au.upsilon(E, XI, C, Z).value == pytest.approx(1 / (Z - XI) - 1 / (C - XI), abs=1e-15)


@pytest.mark.parametrize("g", [1, -1, 2, -2])
def test_upsilon_cocycle(group, g):
    w = fu.Word((g,))
    K = au.k_functional(group, XI, C, w)
    for z in SAMPLES:
        gz = mb.apply(group.evaluate(w), z)
        u1, u0 = au.upsilon(group, XI, C, gz), au.upsilon(group, XI, C, z)
        assert abs(u1.value - u0.value - K.value) < u1.tail_estimate + u0.tail_estimate + K.tail_estimate


def test_upsilon_base_point_shift(group):
    pts = (0.5j, 1j, 2j, 0.3 + 1j, -1 + 2j)
    a = [au.upsilon(group, XI, C, z) for z in pts]
    b = [au.upsilon(group, XI, -C, z) for z in pts]
    shifts = np.array([x.value - y.value for x, y in zip(a, b)])
    tails = sum(x.tail_estimate + y.tail_estimate for x, y in zip(a, b))
    assert np.max(np.abs(shifts - shifts[0])) < 1e-8 + tails


def test_upsilon_residue(group):
    r = fd.contour_residue(lambda q: au.upsilon(group, XI, C, q).value, XI, 1e-3)
    assert abs(r - 1) < 1e-4


def test_upsilon_pole(group):
    with pytest.raises(PoleEncountered):
        au.upsilon(group, XI, C, complex(XI))


def test_k_identity(group):
    assert au.k_functional(group, XI, C, fu.Word(())).value == 0.0


def test_k_additive(group):
    r1, r2 = fu.Word((1,)), fu.Word((-2,))
    a, b, d = (au.k_functional(group, XI, C, w) for w in (r1 * r2, r1, r2))
    assert abs(a.value - b.value - d.value) < a.tail_estimate + b.tail_estimate + d.tail_estimate


def test_k_cyclic_telescopes():
    S = fu.FuchsianGroup((mb.scaling(math.e),))
    prev = None
    for L in (6, 10, 20):
        k = au.k_functional(S, 1.0, 3.0, fu.Word((1,)), fu.EnumerationPolicy(L))
        assert abs(k.value - 1.0) < k.tail_estimate
        if prev is not None:
            assert abs(k.value - 1.0) < abs(prev - 1.0)
        prev = k.value


def test_j_trivial_cases(group, ctx):
    w = fu.Word((1,))
    assert au.j_functional(group, GroupVelocity.zero(group), C, ctx.deltas, w).value == 0.0
    assert au.j_functional(group, ctx.velocity, C, (0.0, 0.0), w).value == 0.0


@pytest.mark.parametrize("k", [1, 2])
def test_j_plus_k_vanishes(group, ctx, k):
    w = fu.Word((k,))
    J = au.j_functional(group, ctx.velocity, C, ctx.deltas, w)
    K = au.k_functional(group, XI, C, w)
    assert abs(J.value + K.value) < J.tail_estimate + K.tail_estimate


def test_log_deriv_psi(group, ctx):
    assert au.log_deriv_psi(group, C, (0.0, 0.0), Z).value == 0
    d = np.array(ctx.deltas)
    h = 1e-6

    def logpsi(q):
        return sum(d[k] * np.log(au.psi_k(group, C, k, q).value) for k in range(2))

    fdv = (logpsi(Z + h) - logpsi(Z - h)) / (2 * h)
    got = au.log_deriv_psi(group, C, d, Z).value
    assert abs(got - fdv) < 1e-6 * abs(fdv)


def test_log_deriv_trivial_group():
    E = fu.FuchsianGroup(())
    assert au.log_deriv_psi(E, C, (), Z).value == 0


@pytest.mark.parametrize("k", [0, 1])
def test_time_deriv_psi(group, ctx, k):
    assert au.time_deriv_psi(group, GroupVelocity.zero(group), C, k, Z).value == 0
    h = 1e-5
    fdv = np.log(au.psi_k(moved(group, h), C, k, Z).value / au.psi_k(moved(group, -h), C, k, Z).value) / (2 * h)
    got = au.time_deriv_psi(group, ctx.velocity, C, k, Z).value
    assert abs(got - fdv) < 1e-6 * abs(fdv)


def test_tails_shrink(group):
    prev = None
    for L in (4, 6, 8):
        p = fu.EnumerationPolicy(L)
        cur = np.array([au.upsilon(group, XI, C, Z, p).tail_estimate,
                        au.psi_k(group, C, 0, Z, p).tail_estimate,
                        au.k_functional(group, XI, C, fu.Word((1,)), p).tail_estimate])
        if prev is not None:
            assert np.all(cur < prev)
        prev = cur
