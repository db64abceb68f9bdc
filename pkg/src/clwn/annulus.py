"""The doubly connected case: the cyclic group generated by z -> e^tau z.

The field has the closed form

    P(z) = lambda z - tau_dot xi z sum_k [1/(e^{k tau} z - xi) - 1/(e^{k tau} c - xi)],

which is equivariant, P(e^tau z) = e^tau P(z) - tau_dot e^tau z, and has
residue -tau_dot xi^2 at z = xi.  Flows integrate g_dot = -P(g, t) forward
and h_dot = P(h, t0 - s) backward.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import driving
from .automorphic import SeriesValue
from .errors import PoleEncountered
from .integrate import integrate, run_seeds, swallow_test

DEFAULT_EPS = 1e-13


@dataclass(frozen=True)
class AnnulusSchedule:
    """tau, xi, lambda as schedules (callables with a derivative), plus c."""

    tau: object
    xi: object
    lam: object
    c: float
    t_end: float = None

    def __post_init__(self):
        if self.c == 0:
            raise ValueError("c must be non-zero")
        if self.t_end is not None:
            grid = np.linspace(0.0, self.t_end, 65)
            if np.any(np.asarray(self.tau.derivative(grid)) <= 0):
                raise ValueError("tau must be strictly increasing")
            if np.any(np.asarray(self.xi(grid)) <= 0):
                raise ValueError("xi must stay positive")

    @property
    def tau0(self):
        return float(self.tau(0.0))

    @classmethod
    def build(cls, tau0, c, t_end, xi=1.0, lam=0.0, tau_rate=None, tau_samples=None):
        """From config-like inputs: tau as tau0 + rate t or as samples."""
        if (tau_rate is None) == (tau_samples is None):
            raise ValueError("give exactly one of tau_rate and tau_samples")
        if tau_rate is not None:
            tau = driving.LinearSchedule(tau0, tau_rate)
        else:
            spec = driving.parse_spec({"type": "samples", **tau_samples}) \
                if isinstance(tau_samples, dict) else tau_samples
            if abs(spec.values[0] - tau0) > 1e-12 or spec.times[0] != 0:
                raise ValueError("tau samples must start at (0, tau0)")
            tau = driving.realize(spec, t_end)
        return cls(tau, driving.realize(xi, t_end), driving.realize(lam, t_end), float(c), t_end)


def _k_range(tau, xi, z, c, weight, eps):
    """Index range [-kn, kp] whose omitted tails are below eps / 10."""
    r = math.exp(-tau)
    az, ac = abs(z), abs(c)
    lo, hi = min(az, ac), max(az, ac)
    safety = 10.0
    # k > 0: e^{k tau} lo > 2 xi, then terms ~ 2 e^{-k tau} (1/|z| + 1/|c|)
    k1 = math.log(2 * xi / lo) / tau if lo > 0 else 0.0
    amp = 2 * (1 / az + 1 / ac) * weight * safety / (eps * (1 - r))
    k2 = math.log(max(amp, 1.0)) / tau
    kp = int(math.ceil(max(k1, k2, 0.0))) + 1
    # k < 0: e^{k tau} hi < xi / 2, then terms ~ 2 e^{k tau} |z - c| / xi^2
    k3 = math.log(2 * hi / xi) / tau
    amp = 2 * abs(z - c) / xi ** 2 * weight * safety / (eps * (1 - r))
    k4 = math.log(max(amp, 1.0)) / tau
    kn = int(math.ceil(max(k3, k4, 0.0))) + 1
    return kn, kp


def upsilon_annulus(tau, xi, c, z, eps=DEFAULT_EPS, weight=1.0):
    """Sum over k of 1/(e^{k tau} z - xi) - 1/(e^{k tau} c - xi), with tail."""
    z = complex(z)
    kn, kp = _k_range(tau, xi, z, c, weight, eps)
    q = np.exp(tau * np.arange(-kn, kp + 1))
    dz = q * z - xi
    if np.any(np.abs(dz) < 1e-12):
        raise PoleEncountered(f"{z!r} lies on the orbit of xi")
    terms = 1.0 / dz - 1.0 / (q * c - xi)
    r = math.exp(-tau)
    tail = (abs(terms[0]) + abs(terms[-1])) * r / (1 - r)
    return SeriesValue(complex(terms.sum()), float(tail))


def eval_P_annulus(s, t, z, eps=DEFAULT_EPS):
    tau, taud = float(s.tau(t)), float(s.tau.derivative(t))
    xi, lam = float(s.xi(t)), float(s.lam(t))
    z = complex(z)
    a = taud * xi * z
    u = upsilon_annulus(tau, xi, s.c, z, eps, abs(a))
    return SeriesValue(lam * z - a * u.value, abs(a) * u.tail_estimate)


def annulus_k_functional(tau, c, xi, K):
    """Truncated sum_{|k|<=K} 1/(e^{(k+1) tau} c - xi) - 1/(e^{k tau} c - xi).

    Orbit points e^{j tau} c are paired before evaluation: each index j gets
    its net weight (+1 from the first term, -1 from the second) and only
    non-zero weights are summed.  This keeps the sum finite when c lies on
    the orbit of xi, where single terms are infinite but cancel.
    """
    j = np.arange(-K, K + 2)
    weight = (j >= -K + 1).astype(float) - (j <= K).astype(float)
    keep = weight != 0
    terms = weight[keep] / (np.exp(j[keep] * tau) * c - xi)
    return float(terms.sum())


def annulus_delta(s, t):
    """The exponent 1/(xi tau_dot) of the unsquared product (c/z)^delta."""
    return 1.0 / (float(s.xi(t)) * float(s.tau.derivative(t)))


def annulus_psi(tau, c, z, N):
    """Regularized product prod_{|k|<=N} a_k (z - e^{(k+1)tau} c)/(z - e^{k tau} c).

    a_k = e^{-tau} for k >= 0 and 1 otherwise.  The limit is -c/z, i.e. the
    power base (c/z) up to the constant -1, which drops out of Psi'/Psi.
    """
    k = np.arange(-N, N + 1)
    a = np.where(k >= 0, math.exp(-tau), 1.0)
    logs = np.log(a * (z - np.exp((k + 1) * tau) * c) / (z - np.exp(k * tau) * c))
    return complex(np.exp(logs.sum()))


def orbit_distance(tau, xi, z):
    """Distance from z to {e^{k tau} xi} (0 counts, being a limit point)."""
    az = abs(z)
    if az == 0:
        return 0.0
    k0 = math.floor(math.log(az / xi) / tau)
    ks = np.arange(k0 - 1, k0 + 3)
    d = np.min(np.abs(z - xi * np.exp(ks * tau)))
    return float(min(d, az))


def _flow_pieces(s, sign, t0=None):
    if t0 is None:
        def f(t, z):
            return -eval_P_annulus(s, t, z).value

        def dist(t, z):
            return orbit_distance(float(s.tau(t)), float(s.xi(t)), z)
    else:
        def f(u, z):
            return eval_P_annulus(s, t0 - u, z).value

        def dist(u, z):
            return orbit_distance(float(s.tau(t0 - u)), float(s.xi(t0 - u)), z)
    return f, dist


def forward_flow(s, z0, t_end, tol=1e-10):
    """g_t(z0) for t in [0, t_end] or until swallowed."""
    f, dist = _flow_pieces(s, -1)
    return integrate(f, z0, 0.0, t_end, tol, pole_distance=dist, swallowed=swallow_test(dist))


def inverse_flow(s, w, t0, tol=1e-10):
    """h_u(w) for u in [0, t0], solving h_dot = P(h, t0 - u); h_{t0} inverts g_{t0}."""
    f, dist = _flow_pieces(s, 1, t0)
    return integrate(f, w, 0.0, t0, tol, pole_distance=dist, absorbing=False)


def simulate(s, seeds, t_end, tol=1e-10, threads=1):
    return run_seeds(lambda z: forward_flow(s, z, t_end, tol), seeds, threads)


def conjugate_annulus_field(s, t, m, z):
    """Pushforward of the annulus field by the Moebius map m (w -> z = m(w)).

    Used to compare the closed form with the general assembly on a conjugated
    cyclic group: returns m'(w) P(w) at w = m^{-1}(z).
    """
    from . import moebius as mb
    w = mb.apply(mb.inverse(m), z)
    p = eval_P_annulus(s, t, w)
    d = mb.derivative(m, w)
    return SeriesValue(d * p.value, abs(d) * p.tail_estimate)
