"""Assembly of the Loewner vector field P(z) on the upper half-plane.

With the base orbits u = phi(psi_k c), v = phi(c) and Psi_k the paired
product of ((z - u)/(z - v))^2, the field at one instant is

    P = (lambda + Upsilon + sum_k delta_k Psi_k_dot / Psi_k) / (Psi'/Psi),
    Psi'/Psi = sum_k delta_k Psi_k'/Psi_k,

where the delta_k solve J(psi_j) + K(psi_j) = 0.  This P satisfies

    P(phi(z)) = phi'(z) P(z) - phi_dot(z)

for every phi in the group.  Its residue at xi is 1/P2(xi) = -1/(2 sigma).
The normalized mode multiplies by 4 sigma, which is a change of time scale
(the group velocity is scaled by the same factor) and fixes the residue at -2.
"""

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import moebius as mb
from .automorphic import (BaseOrbits, SeriesValue, XiOrbit, dlog_chi_terms,
                          word_matrix_rate)
from .errors import DenominatorVanishes, PoleEncountered, SingularSystem
from .fuchsian import DEFAULT_POLICY, build_ball, check_off_limit_set

SHELL_POLE_TOL = 1e-6
MAX_CONDITION = 1e12


class DeltaSystem(NamedTuple):
    matrix: np.ndarray
    rhs: np.ndarray
    deltas: np.ndarray
    condition: float
    residual: float


def assemble_delta_system(orbits, V, xi):
    """Rows j: sum_k delta_k dlog chi_k(psi_j) = -K(psi_j)."""
    G = orbits.group
    n = G.rank
    xo = XiOrbit(orbits, xi)
    A = np.zeros((n, n))
    b = np.zeros(n)
    rates = V.matrices
    for j, g in enumerate(G.generators):
        m = g.matrix
        for k in range(n):
            A[j, k] = dlog_chi_terms(orbits, k, m, rates[j]).sum()
        d = orbits.u[j] - xo.xi
        if np.any(np.abs(d) < 1e-12):
            raise PoleEncountered("psi_j(c) lies on the orbit of xi")
        b[j] = -(1.0 / d - xo.cterm).sum()
    return A, b


def solve_deltas(G, V, xi, c, policy=DEFAULT_POLICY, orbits=None):
    if G.rank < 1:
        raise ValueError("the delta system needs at least one generator")
    orb = orbits if orbits is not None else BaseOrbits(G, c, policy, V)
    A, b = assemble_delta_system(orb, V, xi)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularSystem(f"delta system condition number {cond:.3g}", condition=cond)
    lu_delta = np.linalg.solve(A, b)
    nb = np.linalg.norm(b)
    res = float(np.linalg.norm(A @ lu_delta - b) / (nb if nb > 0 else 1.0))
    return DeltaSystem(A, b, lu_delta, cond, res)


@dataclass(frozen=True, eq=False)
class FieldContext:
    group: object
    velocity: object
    xi: float
    lam: float
    c: float
    deltas: tuple
    sigma: float
    policy: object = DEFAULT_POLICY
    mode: str = "raw"
    system: DeltaSystem = field(default=None, repr=False)
    orbits: BaseOrbits = field(default=None, repr=False)
    xi_orbit: XiOrbit = field(default=None, repr=False)

    @property
    def scale(self):
        """Factor applied to the raw field (and to group velocities)."""
        return 4.0 * self.sigma if self.mode == "normalized" else 1.0

    @property
    def residue(self):
        return -1.0 / (2.0 * self.sigma) * self.scale

    def with_mode(self, mode):
        return _replace(self, mode=mode)

    def with_lambda(self, lam):
        return _replace(self, lam=float(lam))

    def pole_distance(self, z):
        """Distance to the nearest pole of P (orbit of xi)."""
        return float(np.min(np.abs(z - self.xi_orbit.points)))


def _replace(ctx, **kw):
    d = {k: getattr(ctx, k) for k in ctx.__dataclass_fields__}
    d.update(kw)
    return FieldContext(**d)


def build_context(G, V, xi, c, lam=0.0, policy=DEFAULT_POLICY, mode="raw", check=True):
    if mode not in ("raw", "normalized"):
        raise ValueError(f"unknown mode {mode!r}")
    if check:
        check_off_limit_set(G, float(xi), policy, "driving point xi")
    orb = BaseOrbits(G, c, policy, V, check=check)
    xo = XiOrbit(orb, xi)
    system = solve_deltas(G, V, xi, c, policy, orbits=orb)
    ctx = FieldContext(G, V, float(xi), float(lam), float(c), tuple(system.deltas), 0.0,
                       policy, mode, system, orb, xo)
    s = sigma(ctx)
    return _replace(ctx, sigma=s)


def sigma(ctx):
    """-(1/2) Psi'/Psi at xi, i.e. minus the denominator sum at xi."""
    d = np.asarray(ctx.deltas)
    if not np.any(d):
        return 0.0
    terms = ctx.orbits.log_deriv_terms(np.asarray(ctx.xi, complex))
    p2 = float((d[:, None] * terms.real).sum())
    return -0.5 * p2


class FieldParts(NamedTuple):
    upsilon: np.ndarray
    log_deriv: np.ndarray   # per generator, Psi_k'/Psi_k
    time_deriv: np.ndarray  # per generator, Psi_k_dot/Psi_k
    tails: dict


def field_parts(ctx, z):
    orb = ctx.orbits
    z = np.asarray(z, complex)
    orb._guard_point(z)
    ups = ctx.xi_orbit.terms(z)
    lt = orb.log_deriv_terms(z)
    dt = orb.time_deriv_terms(z)
    sh = orb.shell
    tails = {"upsilon": np.abs(ups[sh]).sum(axis=0),
             "log_deriv": np.abs(lt[:, sh]).sum(axis=1),
             "time_deriv": np.abs(dt[:, sh]).sum(axis=1)}
    return FieldParts(ups.sum(axis=0), lt.sum(axis=1), dt.sum(axis=1), tails)


def _check_shell_poles(ctx, z):
    orb = ctx.orbits
    sh = orb.shell
    pts = np.concatenate([orb.v[sh], orb.u[:, sh].ravel()])
    if len(pts) == 0:
        return
    d = np.abs(np.asarray(z)[..., None] - pts)
    if np.any(d < SHELL_POLE_TOL):
        i = np.unravel_index(np.argmin(d), d.shape)
        raise DenominatorVanishes(
            f"{z!r} is within {d[i]:.2g} of a truncation pole of the denominator",
            nearest=complex(pts[i[-1]]))


def eval_P(ctx, z, mode=None):
    """P(z) with a combined tail estimate; vectorized over z."""
    mode = ctx.mode if mode is None else mode
    z = np.asarray(z, complex)
    _check_shell_poles(ctx, z)
    parts = field_parts(ctx, z)
    d = np.asarray(ctx.deltas)
    ex = (1,) * z.ndim
    dd = d.reshape((-1,) + ex)
    p2 = (dd * parts.log_deriv).sum(axis=0)
    num = ctx.lam + parts.upsilon + (dd * parts.time_deriv).sum(axis=0)
    size = (np.abs(dd) * np.abs(parts.log_deriv)).sum(axis=0)
    if np.any(np.abs(p2) <= 1e-13 * np.maximum(size, 1e-300)):
        raise DenominatorVanishes(f"Psi'/Psi vanishes numerically at {z!r}")
    p = num / p2
    tail_p2 = (np.abs(dd) * parts.tails["log_deriv"]).sum(axis=0)
    tail_num = parts.tails["upsilon"] + (np.abs(dd) * parts.tails["time_deriv"]).sum(axis=0)
    tail = (tail_num + np.abs(p) * tail_p2) / np.abs(p2)
    s = 4.0 * ctx.sigma if mode == "normalized" else 1.0
    return SeriesValue(s * p, abs(s) * tail)


class Equivariance(NamedTuple):
    residual: float
    tails: float


def equivariance_residual(ctx, w, z, mode=None):
    """|P(phi z) - phi'(z) P(z) + s phi_dot(z)| for the word w."""
    mode = ctx.mode if mode is None else mode
    s = 4.0 * ctx.sigma if mode == "normalized" else 1.0
    m, mdot = word_matrix_rate(ctx.group, ctx.velocity, w)
    w_z = mb.mapply(m, z)
    dphi = mb.mderiv(m, z)
    vel = mb.mvelocity(m, mdot, z)
    pz = eval_P(ctx, z, mode)
    pw = eval_P(ctx, w_z, mode)
    res = np.abs(pw.value - dphi * pz.value + s * vel)
    return Equivariance(float(res), float(pw.tail_estimate + abs(dphi) * pz.tail_estimate))


def xi_function(ctx, z):
    """Xi = (Psi'/Psi) P - sum_k delta_k Psi_k_dot/Psi_k (raw field)."""
    parts = field_parts(ctx, z)
    d = np.asarray(ctx.deltas)
    p = eval_P(ctx, z, "raw").value
    return (d * parts.log_deriv).sum() * p - (d * parts.time_deriv).sum()


def automorphy_gap(ctx, k, z):
    """Gap in the automorphy of Xi - Upsilon under generator k.

    At g(z) the field is transported by the equivariance law rather than
    re-evaluated, so the gap measures J(g) + K(g) together with the
    character laws of the truncated products.  Returns (gap, tails).
    """
    g = ctx.group.generators[k]
    rate = ctx.velocity.matrices[k]
    m = g.matrix
    gz = mb.mapply(m, z)
    dg = mb.mderiv(m, z)
    vel = mb.mvelocity(m, rate, z)
    d = np.asarray(ctx.deltas)
    pz = eval_P(ctx, z, "raw")
    parts_gz = field_parts(ctx, gz)
    p2_gz = (d * parts_gz.log_deriv).sum()
    p_gz = dg * pz.value - vel
    xi_gz = p2_gz * p_gz - (d * parts_gz.time_deriv).sum()
    gap = abs(xi_gz - parts_gz.upsilon - ctx.lam)
    tails = (abs(p2_gz * dg) * pz.tail_estimate
             + abs(p_gz) * (np.abs(d) * parts_gz.tails["log_deriv"]).sum()
             + (np.abs(d) * parts_gz.tails["time_deriv"]).sum()
             + parts_gz.tails["upsilon"])
    return float(gap), float(tails)


def hydrodynamic_field(G, xi, z, policy=DEFAULT_POLICY):
    """Sum over the ball of -2 phi'(xi)^2 / (z - phi(xi)).

    This is the equivariant field with residue -2 at every point of the xi
    orbit and decay at infinity; its induced group motion is what the surface
    flow uses as generator velocities.
    """
    b = build_ball(G, policy.max_word_length, policy.cap)
    M = b.matrices
    pts = mb.mapply(M, float(xi))
    w = mb.mderiv(M, float(xi)) ** 2
    z = np.asarray(z, complex)
    ex = (1,) * z.ndim
    dz = z[None] - pts.reshape((-1,) + ex)
    if np.any(np.abs(dz) < 1e-12):
        raise PoleEncountered(f"{z!r} is on the orbit of xi")
    terms = -2.0 * w.reshape((-1,) + ex) / dz
    return SeriesValue(terms.sum(axis=0), np.abs(terms[b.shell]).sum(axis=0))


def contour_residue(f, centre, radius=1e-3, n=64):
    """(1/2 pi i) times the trapezoid integral of f on a circle."""
    th = 2 * np.pi * np.arange(n) / n
    e = np.exp(1j * th)
    z = centre + radius * e
    vals = np.array([complex(np.asarray(f(zz))) for zz in z])
    return complex(np.mean(vals * radius * e))


def diagnostics(ctx):
    """JSON-ready summary of the delta system and normalization."""
    s = ctx.system
    return {
        "xi": ctx.xi,
        "c": ctx.c,
        "lambda": ctx.lam,
        "mode": ctx.mode,
        "max_word_length": ctx.policy.max_word_length,
        "generators": [list(g.coefficients) for g in ctx.group.generators],
        "velocities": [list(r) for r in ctx.velocity.rates],
        "matrix": s.matrix.tolist(),
        "rhs": s.rhs.tolist(),
        "deltas": list(ctx.deltas),
        "condition": s.condition,
        "residual": s.residual,
        "sigma": ctx.sigma,
        "raw_residue_at_xi": -1.0 / (2.0 * ctx.sigma) if ctx.sigma else None,
    }


def dump_diagnostics(ctx, path):
    with open(path, "w") as fh:
        json.dump(diagnostics(ctx), fh, indent=2, sort_keys=True)
        fh.write("\n")
