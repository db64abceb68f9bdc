import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from clwn import moebius as mb
from clwn.errors import DegenerateTriple, OrientationMismatch

coef = st.floats(-10, 10, allow_nan=False)


@st.composite
def maps(draw):
    a, b, c, d = (draw(coef) for _ in range(4))
    det = a * d - b * c
    assume(abs(det) > 0.1)
    if det < 0:
        # flipping the first row keeps coefficients in range and fixes the sign
        a, b = -a, -b
    return mb.MoebiusMap(a, b, c, d)


upper = st.builds(complex, st.floats(-5, 5), st.floats(0.1, 5))


def coeff_err(f, g):
    return max(abs(x - y) for x, y in zip(f.coefficients, g.coefficients))


def close_map(f, g, tol):
    # both normalizations represent the same map only up to a global sign
    return coeff_err(f, g) < tol or coeff_err(f, mb.MoebiusMap(*(-x for x in g.coefficients))) < tol


def test_compose_examples():
    assert mb.classify(mb.compose(mb.translation(1), mb.translation(-1))) is mb.MapClass.Identity
    assert close_map(mb.compose(mb.scaling(2), mb.scaling(2)), mb.scaling(4), 1e-14)
    assert close_map(mb.compose(mb.scaling(2), mb.translation(1)), mb.MoebiusMap(2, 2, 0, 1), 1e-14)


def test_apply_examples():
    assert mb.apply(mb.scaling(2), 1j) == pytest.approx(2j)
    assert mb.apply(mb.MoebiusMap(0, -1, 1, 0), 1j) == pytest.approx(1j)
    assert mb.apply(mb.MoebiusMap(1, 1, 1, 2), 0) == pytest.approx(0.5)
    assert mb.apply(mb.MoebiusMap(0, -1, 1, 0), 0.0) is mb.INF
    assert mb.apply(mb.scaling(3), mb.INF) is mb.INF


def test_derivative_examples():
    assert mb.derivative(mb.scaling(2), 0.3 + 2j) == pytest.approx(2)
    assert mb.derivative(mb.identity(), 5j) == pytest.approx(1)
    f = mb.MoebiusMap(0, -1, 1, 0)
    h = 1e-5
    fd = (mb.apply(f, 1j + h) - mb.apply(f, 1j - h)) / (2 * h)
    assert abs(mb.derivative(f, 1j) - fd) < 1e-8


def test_classify_examples():
    assert mb.classify(mb.translation(1)) is mb.MapClass.Parabolic
    assert mb.classify(mb.scaling(2)) is mb.MapClass.Hyperbolic
    assert mb.classify(mb.MoebiusMap(0, -1, 1, 0)) is mb.MapClass.Elliptic
    assert mb.classify(mb.identity()) is mb.MapClass.Identity


def test_fixed_points_examples():
    fp = mb.fixed_points(mb.scaling(2))
    assert fp[0] is mb.INF and fp[1] == 0.0
    assert mb.fixed_points(mb.translation(1)) == (mb.INF,)
    got = sorted(mb.fixed_points(mb.MoebiusMap(2, 1, 1, 1)))
    want = sorted([(1 - math.sqrt(5)) / 2, (1 + math.sqrt(5)) / 2])
    assert np.allclose(got, want, atol=1e-14)


def test_from_triples_examples():
    p = (0.0, 1.0, mb.INF)
    assert mb.is_identity(mb.from_triples(p, p))
    assert close_map(mb.from_triples(p, (1.0, 2.0, mb.INF)), mb.translation(1), 1e-14)
    assert close_map(mb.from_triples(p, (0.0, 2.0, mb.INF)), mb.scaling(2), 1e-14)


def test_from_triples_errors():
    with pytest.raises(OrientationMismatch):
        mb.from_triples((0.0, 1.0, 2.0), (0.0, 2.0, 1.0))
    with pytest.raises(DegenerateTriple):
        mb.from_triples((0.0, 0.0, 2.0), (0.0, 1.0, 2.0))


def test_hyperbolic_constructor():
    g = mb.hyperbolic(-2.0, -1.0, 9.0)
    a, r = mb.fixed_points(g)
    assert a == pytest.approx(-2.0) and r == pytest.approx(-1.0)
    assert mb.multiplier(g) == pytest.approx(9.0)
    assert abs(mb.derivative(g, -2.0)) == pytest.approx(1 / 9)


@given(maps())
def test_normalization(f):
    a, b, c, d = f.coefficients
    assert abs(a * d - b * c - 1) < 1e-12
    assert a + d >= 0


@given(maps(), st.floats(-20, 20))
def test_real_line_preserved(f, x):
    y = mb.apply(f, x)
    assert y is mb.INF or isinstance(y, float)


@given(maps(), upper)
def test_upper_half_plane_preserved(f, z):
    w = mb.apply(f, z)
    assert w is mb.INF or w.imag > 0


@settings(max_examples=200)
@given(maps(), maps(), maps())
def test_associativity(f, g, h):
    lhs = mb.compose(mb.compose(f, g), h)
    rhs = mb.compose(f, mb.compose(g, h))
    scale = max(1.0, max(map(abs, lhs.coefficients)))
    assert coeff_err(lhs, rhs) < 1e-12 * scale ** 3 * 1e2


@given(maps())
def test_inverse(f):
    e = mb.compose(f, mb.inverse(f))
    scale = max(map(abs, f.coefficients)) ** 2
    assert mb.is_identity(e, 1e-12 * max(1.0, scale) * 10)


@given(maps(), maps(), upper)
def test_compose_matches_apply(f, g, z):
    w = mb.apply(g, z)
    assume(w is not mb.INF and abs(f.c * w + f.d) > 1e-6)
    assert cmath.isclose(mb.apply(mb.compose(f, g), z), mb.apply(f, w), rel_tol=1e-9, abs_tol=1e-9)


@given(maps(), maps(), upper)
def test_chain_rule(f, g, z):
    w = mb.apply(g, z)
    assume(abs(f.c * w + f.d) > 1e-3 and abs(g.c * z + g.d) > 1e-3)
    lhs = mb.derivative(mb.compose(f, g), z)
    rhs = mb.derivative(f, w) * mb.derivative(g, z)
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


@given(maps(), maps())
def test_classify_conjugation_invariant(f, h):
    assume(abs(abs(f.trace) - 2) > 1e-6)
    conj = mb.compose(mb.compose(h, f), mb.inverse(h))
    assume(abs(abs(conj.trace) - 2) > 1e-6)
    assume(not mb.is_identity(f, 1e-6))
    assert mb.classify(conj) is mb.classify(f)


distinct3 = st.lists(st.floats(-50, 50), min_size=3, max_size=3).filter(
    lambda v: min(abs(v[0] - v[1]), abs(v[1] - v[2]), abs(v[0] - v[2])) > 1e-2)


@given(distinct3, distinct3)
def test_from_triples_reproduces(p, q):
    p, q = sorted(p), sorted(q)
    f = mb.from_triples(p, q)
    for x, y in zip(p, q):
        assert abs(mb.apply(f, x) - y) < 1e-10 * max(1.0, abs(y)) * 1e2


@given(distinct3)
def test_from_triples_through_infinity(p):
    p = sorted(p)
    f = mb.from_triples((p[0], p[1], mb.INF), (p[0], p[1], mb.INF))
    assert mb.is_identity(f, 1e-10)


def test_vector_kernels_match_scalar():
    f = mb.hyperbolic(1.0, 2.0, 9.0)
    z = np.array([1j, 0.5 + 2j, -3 + 0.1j])
    assert np.allclose(mb.mapply(f.matrix, z), [mb.apply(f, x) for x in z])
    assert np.allclose(mb.mderiv(f.matrix, z), [mb.derivative(f, x) for x in z])
    assert np.allclose(mb.madj(f.matrix), mb.inverse(f).matrix)
