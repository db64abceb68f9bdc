"""Truncated automorphic series and products over a ball of the group.

Everything here is a sum over the words phi of a ball.  The base point c
enters through two orbit families: v_phi = phi(c) and, for the k-th generator
psi_k, u_phi = phi(psi_k(c)).  The paired terms (u_phi against v_phi of the
same word) are always combined before summing, which is what makes the sums
converge.  Every result comes back as a SeriesValue whose tail estimate is the
absolute contribution of the outermost shell.

Generator indices ``k`` are 0-based; words use signed 1-based letters.
"""

import functools
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import moebius as mb
from .errors import PoleEncountered, ShellWarning, ZeroDenominator
from .fuchsian import (DEFAULT_POLICY, Ball, Word, build_ball, check_off_limit_set,
                       letter_rate_stack)

POLE_TOL = 1e-12


class SeriesValue(NamedTuple):
    value: complex
    tail_estimate: float


@dataclass(frozen=True)
class GroupVelocity:
    """Time derivatives of the (normalized) generator coefficients."""

    group: object
    rates: tuple

    def __post_init__(self):
        rates = tuple(tuple(float(x) for x in np.ravel(r)) for r in self.rates)
        if len(rates) != self.group.rank or any(len(r) != 4 for r in rates):
            raise ValueError("need one (a', b', c', d') quadruple per generator")
        for g, (ad, bd, cd, dd) in zip(self.group.generators, rates):
            drift = ad * g.d + g.a * dd - bd * g.c - g.b * cd
            scale = 1.0 + max(abs(ad), abs(bd), abs(cd), abs(dd))
            if abs(drift) > 1e-10 * scale:
                raise ValueError(f"rate does not preserve det = 1 (d/dt det = {drift:.3g})")
        object.__setattr__(self, "rates", rates)

    @classmethod
    def zero(cls, G):
        return cls(G, tuple((0.0,) * 4 for _ in G.generators))

    @classmethod
    def from_sl2(cls, G, elements):
        """Rates X_k M_k from trace-free generators X_k of the motion.

        Each element is a 2x2 trace-free matrix or a triple (x11, x12, x21).
        The induced vector field on H is x12 + 2 x11 z - x21 z^2.
        """
        rates = []
        for g, x in zip(G.generators, elements):
            x = np.asarray(x, float)
            if x.shape == (3,):
                x = np.array([[x[0], x[1]], [x[2], -x[0]]])
            rates.append(tuple((x @ g.matrix).ravel()))
        return cls(G, tuple(rates))

    @property
    def matrices(self):
        return np.array(self.rates, float).reshape(-1, 2, 2)

    def sl2(self):
        """Trace-free X_k with rate = X_k M_k."""
        return [r @ mb.inverse(g).matrix for g, r in zip(self.group.generators, self.matrices)]

    def scaled(self, s):
        return GroupVelocity(self.group, tuple(tuple(s * x for x in r) for r in self.rates))


@functools.lru_cache(maxsize=64)
def _velocity_ball(V, L, cap):
    G = V.group
    return Ball(G, L, letter_rate_stack(G, V.matrices), cap=cap)


def velocity_ball(V, L, cap=DEFAULT_POLICY.cap):
    return _velocity_ball(V, int(L), cap)


def word_matrix_rate(G, V, w):
    """Raw matrix of a word and its time derivative (product rule)."""
    m = np.eye(2)
    r = np.zeros((2, 2))
    lr = letter_rate_stack(G, V.matrices) if V is not None else None
    for x in w:
        g = G.letter_map(x).matrix
        i = 2 * (abs(x) - 1) + (0 if x > 0 else 1)
        gd = lr[i] if lr is not None else np.zeros((2, 2))
        r = r @ g + m @ gd
        m = m @ g
    return m, r


def word_velocity(G, V, w, z):
    """d/dt phi_{w,t}(z) with z frozen."""
    w = w if isinstance(w, Word) else Word(tuple(w))
    if len(w) == 0:
        return 0j * np.asarray(z)
    m, r = word_matrix_rate(G, V, w)
    den = m[1, 0] * z + m[1, 1]
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleEncountered(f"{z!r} is the pole of word {w}", word=w)
    return mb.mvelocity(m, r, z)


def _shell_sum(terms, shell):
    return np.abs(terms[shell]).sum(axis=0)


class BaseOrbits:
    """Orbit data of the base point c for one group snapshot.

    v[i] = phi_i(c), u[k, i] = phi_i(psi_k(c)) and, when a velocity is given,
    their time derivatives vdot, udot.  Shared by all series below and by the
    field assembly.
    """

    def __init__(self, G, c, policy=DEFAULT_POLICY, V=None, check=True):
        self.group = G
        self.c = float(c)
        self.policy = policy
        L = policy.max_word_length
        if check and G.rank:
            check_off_limit_set(G, self.c, policy, "base point c")
        self.ball = velocity_ball(V, L, policy.cap) if V is not None else build_ball(G, L, policy.cap)
        M = self.ball.matrices
        self.shell = self.ball.shell
        self.v = mb.mapply(M, self.c)
        n = G.rank
        self.x = np.array([mb.apply(g, self.c) for g in G.generators], float)
        self.u = np.array([mb.mapply(M, x) for x in self.x]).reshape(n, len(M))
        self.has_velocity = V is not None
        if V is not None:
            R = self.ball.rates
            gm = np.array([g.matrix for g in G.generators]).reshape(-1, 2, 2)
            self.xdot = mb.mvelocity(gm, V.matrices, self.c) if n else np.zeros(0)
            self.vdot = mb.mvelocity(M, R, self.c)
            self.udot = np.array([mb.mvelocity(M, R, x) + mb.mderiv(M, x) * xd
                                  for x, xd in zip(self.x, self.xdot)]).reshape(n, len(M))

    def words(self, idx):
        return [self.ball.words[i] for i in np.atleast_1d(idx)]

    def _guard_point(self, z):
        """Raise when z sits on an orbit point of c."""
        z = np.asarray(z)
        pts = np.concatenate([self.v[None], self.u]) if self.u.size else self.v[None]
        d = np.abs(z[..., None, None] - pts)
        if np.any(d < POLE_TOL):
            i = np.unravel_index(np.argmin(d), d.shape)[-1]
            raise ZeroDenominator(f"{z!r} hits the orbit of c", word=self.words(i)[0])

    def log_deriv_terms(self, z):
        """Per generator, 2[1/(z-u) - 1/(z-v)] for every word: shape (n, N, ...)."""
        z = np.asarray(z, complex)
        zz = z[None, None]
        u = self.u.reshape(self.u.shape + (1,) * z.ndim)
        v = self.v.reshape((1,) + self.v.shape + (1,) * z.ndim)
        return 2.0 * (1.0 / (zz - u) - 1.0 / (zz - v))

    def time_deriv_terms(self, z):
        """Per generator, 2[-u'/(z-u) + v'/(z-v)]: shape (n, N, ...)."""
        z = np.asarray(z, complex)
        zz = z[None, None]
        ex = (1,) * z.ndim
        u = self.u.reshape(self.u.shape + ex)
        ud = self.udot.reshape(self.udot.shape + ex)
        v = self.v.reshape((1,) + self.v.shape + ex)
        vd = self.vdot.reshape((1,) + self.vdot.shape + ex)
        return 2.0 * (-ud / (zz - u) + vd / (zz - v))


class XiOrbit:
    """Orbit of xi under a ball, with the c-dependent constant of upsilon."""

    def __init__(self, orbits, xi):
        self.xi = float(xi)
        M = orbits.ball.matrices
        self.matrices = M
        self.points = mb.mapply(mb.madj(M), self.xi)  # phi^{-1}(xi): poles of upsilon
        den = orbits.v - self.xi
        if np.any(np.abs(den) < POLE_TOL):
            i = int(np.argmin(np.abs(den)))
            raise PoleEncountered("c lies on the orbit of xi", word=orbits.words(i)[0])
        self.cterm = 1.0 / den
        self.orbits = orbits

    def terms(self, z):
        z = np.asarray(z, complex)
        M = self.matrices.reshape(self.matrices.shape[:1] + (1,) * z.ndim + (2, 2))
        w = mb.mapply(M, z[None])
        d = w - self.xi
        bad = np.abs(d) < POLE_TOL
        if np.any(bad):
            i = int(np.nonzero(bad.reshape(len(d), -1).any(axis=1))[0][0])
            raise PoleEncountered(f"{z!r} is on the orbit of xi", word=self.orbits.words(i)[0])
        return 1.0 / d - self.cterm.reshape((-1,) + (1,) * z.ndim)


def _as_psi(G, k):
    """Generator index or word -> (map, word)."""
    if isinstance(k, Word):
        return G.evaluate(k), k
    k = int(k)
    return G.generators[k], Word((k + 1,))


def _orbits(G, c, policy, V=None):
    return BaseOrbits(G, c, policy, V)


def psi_k(G, c, k, z, policy=DEFAULT_POLICY):
    """Truncated product of ((z - phi(psi c)) / (z - phi(c)))^2 over the ball.

    ``k`` is a generator index or any Word (the product then uses that
    element as psi).
    """
    orb = _orbits(G, c, policy)
    psi, _ = _as_psi(G, k)
    x = mb.apply(psi, orb.c)
    u = mb.mapply(orb.ball.matrices, x)
    z = np.asarray(z, complex)
    ex = (1,) * z.ndim
    uu = u.reshape(u.shape + ex)
    vv = orb.v.reshape(orb.v.shape + ex)
    zz = z[None]
    if np.any(np.abs(zz - vv) < POLE_TOL) or np.any(np.abs(zz - uu) < POLE_TOL):
        raise ZeroDenominator(f"{z!r} hits the orbit of c")
    logs = np.log((zz - uu) / (zz - vv))
    outer = logs[orb.shell]
    if outer.size and np.any(np.abs(outer.imag) >= np.pi / 2):
        warnings.warn("outer-shell factor of psi far from 1; increase the word length",
                      ShellWarning, stacklevel=2)
    total = 2.0 * logs.sum(axis=0)
    val = np.exp(total)
    tail = np.abs(val) * 2.0 * _shell_sum(logs, orb.shell)
    return SeriesValue(val, tail)


def _log_rho_prime(m, x):
    den = m[1, 0] * x + m[1, 1]
    if np.any(np.abs(den) < POLE_TOL):
        raise ZeroDenominator("orbit point of c at the pole of rho")
    return -2.0 * np.log(np.abs(den))


def char_chi(G, c, k, rho, policy=DEFAULT_POLICY):
    """Character chi_k(rho) = prod rho'(phi psi_k c) / rho'(phi c)."""
    rho = rho if isinstance(rho, Word) else Word(tuple(rho))
    if len(rho) == 0:
        return SeriesValue(1.0, 0.0)
    orb = _orbits(G, c, policy)
    psi, _ = _as_psi(G, k)
    u = mb.mapply(orb.ball.matrices, mb.apply(psi, orb.c))
    m = G.evaluate(rho).matrix
    terms = _log_rho_prime(m, u) - _log_rho_prime(m, orb.v)
    val = float(np.exp(terms.sum()))
    return SeriesValue(val, abs(val) * float(_shell_sum(terms, orb.shell)))


def upsilon(G, xi, c, z, policy=DEFAULT_POLICY):
    """Sum of 1/(phi(z) - xi) - 1/(phi(c) - xi) over the ball."""
    orb = _orbits(G, c, policy)
    terms = XiOrbit(orb, xi).terms(z)
    return SeriesValue(terms.sum(axis=0), _shell_sum(terms, orb.shell))


def k_functional(G, xi, c, rho, policy=DEFAULT_POLICY):
    """K(rho) = sum of 1/(phi(rho c) - xi) - 1/(phi(c) - xi)."""
    rho = rho if isinstance(rho, Word) else Word(tuple(rho))
    if len(rho) == 0:
        return SeriesValue(0.0, 0.0)
    orb = _orbits(G, c, policy)
    xo = XiOrbit(orb, xi)
    x = mb.apply(G.evaluate(rho), orb.c)
    if x is mb.INF:
        raise ZeroDenominator("c is the pole of rho")
    w = mb.mapply(orb.ball.matrices, x)
    d = w - xo.xi
    if np.any(np.abs(d) < POLE_TOL):
        raise PoleEncountered("rho(c) lies on the orbit of xi")
    terms = 1.0 / d - xo.cterm
    return SeriesValue(float(terms.sum()), float(_shell_sum(terms, orb.shell)))


def dlog_chi_terms(orb, k, m, mdot):
    """Terms of d/dt log chi_k(rho) for rho with raw matrix m and rate mdot."""
    def dlog(x, xd):
        den = m[1, 0] * x + m[1, 1]
        if np.any(np.abs(den) < POLE_TOL):
            raise ZeroDenominator("orbit point of c at the pole of rho")
        return -2.0 * (mdot[1, 0] * x + mdot[1, 1] + m[1, 0] * xd) / den
    return dlog(orb.u[k], orb.udot[k]) - dlog(orb.v, orb.vdot)


def dlog_chi(G, V, c, k, rho, policy=DEFAULT_POLICY, orbits=None):
    """(d/dt chi_k(rho_t)) / chi_k(rho_t), summed term by term."""
    rho = rho if isinstance(rho, Word) else Word(tuple(rho))
    if len(rho) == 0:
        return SeriesValue(0.0, 0.0)
    orb = orbits if orbits is not None else _orbits(G, c, policy, V)
    m, mdot = word_matrix_rate(G, V, rho)
    terms = dlog_chi_terms(orb, k, m, mdot)
    return SeriesValue(float(terms.sum()), float(_shell_sum(terms, orb.shell)))


def j_functional(G, V, c, deltas, rho, policy=DEFAULT_POLICY):
    """J(rho) = sum_k delta_k (d/dt chi_k(rho)) / chi_k(rho)."""
    deltas = np.asarray(deltas, float)
    if len(deltas) != G.rank:
        raise ValueError("need one delta per generator")
    orb = _orbits(G, c, policy, V)
    val, tail = 0.0, 0.0
    for k, dk in enumerate(deltas):
        s = dlog_chi(G, V, c, k, rho, policy, orbits=orb)
        val += dk * s.value
        tail += abs(dk) * s.tail_estimate
    return SeriesValue(val, tail)


def log_deriv_psi(G, c, deltas, z, policy=DEFAULT_POLICY):
    """Psi'/Psi for Psi = prod_k Psi_k^{delta_k}."""
    deltas = np.asarray(deltas, float)
    orb = _orbits(G, c, policy)
    orb._guard_point(z)
    terms = orb.log_deriv_terms(z)
    ex = (1,) * (terms.ndim - 1)
    weighted = (deltas.reshape((-1,) + ex) * terms).sum(axis=0)
    shell = np.abs(terms[:, orb.shell]).sum(axis=1)
    tail = (np.abs(deltas).reshape((-1,) + ex[1:]) * shell).sum(axis=0)
    return SeriesValue(weighted.sum(axis=0), tail)


def time_deriv_psi(G, V, c, k, z, policy=DEFAULT_POLICY):
    """(d/dt Psi_k)/Psi_k at frozen z."""
    orb = _orbits(G, c, policy, V)
    orb._guard_point(z)
    terms = orb.time_deriv_terms(z)[k]
    return SeriesValue(terms.sum(axis=0), _shell_sum(terms, orb.shell))
