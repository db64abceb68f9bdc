"""Forward Loewner flow on a surface H/Gamma.

A base triple p_0 on the real line and its images p_l = psi_l(p_0) move by
p_dot = -P(p, t).  At every stage of every step the generators psi_{l,t} are
rebuilt from the current triples (psi_{l,t} sends p_0 to p_l), the group
velocity is read off from the motion of the triples, the field context is
rebuilt, and the triples are stepped.  Seeds are integrated afterwards by
replaying the stored stage contexts.

Group motion: the generator velocities are those induced by the hydrodynamic
field P0 = sum_phi -2 phi'(xi)^2 / (z - phi(xi)), which is equivariant for
its own motion and has residue -2 at xi.  For that velocity the assembled
field equals P0 + (lambda - lambda0) / P2 for a constant lambda0, so the
context uses lambda0 + lambda and the triples follow the assembled field.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45

from . import driving
from . import moebius as mb
from .automorphic import GroupVelocity
from .errors import (GuardTripped, NumericalError, OrientationMismatch, SeedSwallowed,
                     TripleCollision)
from .field import build_context, eval_P, field_parts, hydrodynamic_field
from .fuchsian import DEFAULT_POLICY, FuchsianGroup, build_ball, limit_margin
from .integrate import (A, C, E, SWALLOW_DIST, SWALLOW_IM, FlowResult, dopri_step,
                        integrate, run_seeds)

GUARD_TOL = 1e-6
COLLISION_TOL = 1e-10
LAMBDA_PROBES = np.array([1j, 2j, 0.5 + 1.5j])
MAX_HALVINGS = 12


@dataclass(frozen=True)
class TripleState:
    """Row 0 is the base triple, row l its image under psi_{l,t}."""

    t: float
    p: np.ndarray

    @property
    def base(self):
        return tuple(self.p[0])

    def image(self, l):
        return tuple(self.p[l])


@dataclass(eq=False)
class Snapshot:
    """Everything known about the flow at one (t, triples) evaluation."""

    t: float
    p: np.ndarray
    group: FuchsianGroup
    velocity: GroupVelocity
    context: object
    lambda0: float
    lambda0_spread: float
    margins: dict
    pdot: np.ndarray
    override: object = None
    poles: np.ndarray = None
    xi: float = 0.0
    policy: object = DEFAULT_POLICY

    def swallowed(self, z):
        """Swallow test in the fundamental domain, so z and phi(z) agree."""
        zr = reduce_to_domain(self.group, z)
        xr = reduce_to_domain(self.group, complex(self.xi))
        return zr.imag < SWALLOW_IM or abs(zr - xr) < SWALLOW_DIST

    def field(self, z):
        if self.override is not None:
            return np.asarray(self.override(self.t, z), complex)
        if self.context is None:
            return hydrodynamic_field(self.group, self.xi, z, self.policy).value
        return eval_P(self.context, z).value

    @property
    def pole_points(self):
        return self.context.xi_orbit.points if self.context is not None else self.poles

    @property
    def pole_matrices(self):
        if self.context is not None:
            return self.context.xi_orbit.matrices
        return build_ball(self.group, self.policy.max_word_length, self.policy.cap).matrices

    @property
    def xi_residue(self):
        return self.context.residue if self.context is not None else -2.0

    def pole(self, i):
        """Pole i of the field (the point phi_i^{-1}(xi)), its residue and |phi_i'|."""
        q = self.pole_points[i]
        d = mb.mderiv(self.pole_matrices[i], q)
        return q, self.xi_residue / d ** 2, abs(d)

    def pole_distance(self, z):
        if self.context is not None:
            return self.context.pole_distance(z)
        if self.poles is None:
            return math.inf
        return float(np.min(np.abs(z - self.poles)))


@dataclass(eq=False)
class Step:
    t: float
    h: float
    stages: list  # seven Snapshots, stage 0 shared with the previous step
    error: float
    nodes: list = None  # dense-output snapshots, built on demand

    def dense_state(self, theta):
        """Triples at t + theta h from the continuous extension of the step."""
        k = np.array([s.pdot.ravel() for s in self.stages])
        coef = RK45.P @ theta ** np.arange(1, RK45.P.shape[1] + 1)
        return self.stages[0].p.ravel() + self.h * (k.T @ coef)


@dataclass(eq=False)
class GroupTimeline:
    times: np.ndarray
    generators: list        # per mesh time, tuple of MoebiusMap
    velocities: list        # per mesh time, GroupVelocity (used by the flow)
    fd_velocities: list     # per mesh time, finite-difference rates (diagnostic)
    deltas: np.ndarray
    sigma: np.ndarray
    lambda0: np.ndarray
    margins: list
    steps: list
    snapshots: list
    xi: object
    lam: object
    c: float
    policy: object
    reconstruction_error: float
    # summed local errors of the triple steps; the field seen by a seed is
    # off by about this much, so a seed's error budget is its own estimate plus this
    triple_error: float
    _seeds: dict = field(default_factory=dict, repr=False)
    _stepper: object = field(default=None, repr=False)

    def error_budget(self, result):
        return result.error_estimate + self.triple_error

    @property
    def t_end(self):
        return float(self.times[-1])

    @property
    def group(self):
        return FuchsianGroup(self.generators[0])

    @property
    def fd_velocity_gap(self):
        """Per mesh time, max |FD rate - used rate| over generators and entries."""
        return np.array([float(np.max(np.abs(f - v.matrices))) if f is not None else np.nan
                         for f, v in zip(self.fd_velocities, self.velocities)])

    def index(self, t):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-12 * max(1.0, abs(t)):
            raise KeyError(f"time {t} is not a mesh time")
        return i

    def generator(self, t, l):
        return self.generators[self.index(t)][l - 1]

    def summary(self):
        """JSON-ready per-time record."""
        out = []
        for i, t in enumerate(self.times):
            out.append({
                "t": float(t),
                "generators": [list(g.coefficients) for g in self.generators[i]],
                "velocities": [list(r) for r in self.velocities[i].rates],
                "deltas": [float(d) for d in self.deltas[i]],
                "sigma": float(self.sigma[i]),
                "lambda0": float(self.lambda0[i]),
                "margins": self.margins[i],
                "fd_velocity_gap": float(self.fd_velocity_gap[i]),
            })
        return out


def reduce_to_domain(G, z, max_iter=200):
    """Move z outside every isometric circle by applying the letters whose
    circle contains it; each such letter expands near z."""
    z = complex(z)
    letters = [g.matrix for g in G.generators] + [mb.inverse(g).matrix for g in G.generators]
    for _ in range(max_iter):
        for m in letters:
            if abs(m[1, 0] * z + m[1, 1]) < 1.0:
                z = complex(mb.mapply(m, z))
                break
        else:
            return z
    return z


def _schedule(x, t_end):
    if isinstance(x, driving.Schedule):
        return x
    return driving.realize(x, max(float(t_end), 1e-9))


def velocity_from_triples(G, p, pdot):
    """Group velocity making psi_{l,t}(p_0) = p_l consistent with p_dot.

    psi_dot_l(p_0j) = pdot_lj - psi_l'(p_0j) pdot_0j is a quadratic vector
    field alpha + beta w + gamma w^2 in w = p_lj; it is the field of the
    trace-free X = [[beta/2, alpha], [-gamma, -beta/2]] and the rate is X M_l.
    """
    p = np.asarray(p, float)
    pdot = np.asarray(pdot, float)
    rates = []
    for l, g in enumerate(G.generators, start=1):
        w = p[l]
        y = pdot[l] - mb.mderiv(g.matrix, p[0]) * pdot[0]
        alpha, beta, gamma = np.linalg.solve(np.vander(w, 3, increasing=True), y)
        x = np.array([[beta / 2, alpha], [-gamma, -beta / 2]])
        rates.append(tuple((x @ g.matrix).ravel()))
    return GroupVelocity(G, tuple(rates))


def hydrodynamic_velocity(G, xi, p, policy=DEFAULT_POLICY):
    """Velocity induced on the triples by the hydrodynamic field."""
    pdot = -hydrodynamic_field(G, xi, np.asarray(p, float), policy).value.real
    return velocity_from_triples(G, p, pdot), pdot


def guard_margins(G, xi, c, policy=DEFAULT_POLICY):
    """Distance of traces from 2 and of c, xi from the sampled limit set."""
    b = build_ball(G, policy.max_word_length, policy.cap)
    tr = np.abs(b.matrices[1:, 0, 0] + b.matrices[1:, 1, 1])
    L = max(1, min(policy.max_word_length, 6))
    return {"trace": float(np.min(tr) - 2.0) if len(tr) else math.inf,
            "c": limit_margin(G, float(c), L),
            "xi": limit_margin(G, float(xi), L)}


def _check_guard(t, margins, tol):
    if not min(margins.values()) > tol:
        raise GuardTripped(f"second-kind guard tripped at t = {t}: {margins}",
                           t=t, margins=margins)


def _check_rows(t, p):
    for row in p:
        d = np.abs(row[:, None] - row[None, :])[np.triu_indices(3, 1)]
        if not np.all(np.isfinite(row)) or np.min(d) <= COLLISION_TOL:
            raise TripleCollision(f"triple entries merge at t = {t}: {row}")


class _Stepper:
    """Builds snapshots from (t, triples); one instance per run."""

    def __init__(self, G0, xi, lam, c, policy, guard_tol, field_override, orientation, kind):
        self.G0 = G0
        self.xi, self.lam, self.c = xi, lam, float(c)
        self.policy = policy
        self.guard_tol = guard_tol
        self.override = field_override
        self.orientation = orientation
        self.kind = kind
        self.m = G0.rank

    def group_at(self, t, p, exact=False):
        if exact:
            return self.G0
        _check_rows(t, p)
        for row, o in zip(p, self.orientation):
            if _orientation(row) != o:
                raise TripleCollision(f"triple orientation flipped at t = {t}")
        gens = tuple(mb.from_triples(tuple(p[0]), tuple(p[l])) for l in range(1, self.m + 1))
        return FuchsianGroup(gens)

    def snapshot(self, t, y, exact=False):
        p = np.asarray(y, float).reshape(self.m + 1, 3)
        G = self.group_at(t, p, exact)
        xi = float(self.xi(t))
        margins = guard_margins(G, xi, self.c, self.policy)
        _check_guard(t, margins, self.guard_tol)
        if self.override is not None or self.kind == "hydrodynamic":
            if self.override is not None:
                pdot = -np.asarray(self.override(t, p), complex).real
            else:
                pdot = -hydrodynamic_field(G, xi, p, self.policy).value.real
            V = velocity_from_triples(G, p, pdot)
            M = build_ball(G, self.policy.max_word_length, self.policy.cap).matrices
            poles = mb.mapply(mb.madj(M), xi)
            return Snapshot(t, p, G, V, None, 0.0, 0.0, margins, pdot, self.override, poles,
                            xi, self.policy)
        V, _ = hydrodynamic_velocity(G, xi, p, self.policy)
        ctx0 = build_context(G, V, xi, self.c, 0.0, self.policy, check=False)
        lam0, spread = _lambda0(ctx0, G, xi, self.policy)
        ctx = ctx0.with_lambda(lam0 + float(self.lam(t)))
        pdot = -eval_P(ctx, p).value.real
        return Snapshot(t, p, G, V, ctx, lam0, spread, margins, pdot, xi=xi, policy=self.policy)


def _orientation(row):
    a, b, c = row
    return int(np.sign((b - a) * (c - b) * (c - a)))


def _lambda0(ctx, G, xi, policy):
    """lambda0 with P0 = (lambda0 + Upsilon + sum delta D) / P2, from probe points."""
    z = LAMBDA_PROBES + xi
    p0 = hydrodynamic_field(G, xi, z, policy).value
    with_zero = eval_P(ctx, z).value
    parts = field_parts(ctx, z)
    d = np.asarray(ctx.deltas)[:, None]
    p2 = (d * parts.log_deriv).sum(axis=0)
    est = (p0 - with_zero) * p2
    return float(np.mean(est.real)), float(np.max(np.abs(est - np.mean(est.real))))


def _fd_rates(times, gens):
    """Centered (one-sided at the ends) differences of generator coefficients."""
    n = len(times)
    if n < 3:
        return [None] * n
    M = np.array([[g.matrix for g in row] for row in gens])
    h = np.diff(times)
    out = []
    for i in range(n):
        if i == 0:
            r = (-3 * M[0] + 4 * M[1] - M[2]) / (times[2] - times[0])
        elif i == n - 1:
            r = (3 * M[-1] - 4 * M[-2] + M[-3]) / (times[-1] - times[-3])
        else:
            r = (M[i + 1] - M[i - 1]) / (h[i - 1] + h[i])
        out.append(r)
    return out


def _step_error(err, y, tol):
    scale = tol * (1.0 + np.max(np.abs(y)))
    floor = 64 * np.finfo(float).eps * np.max(np.abs(y))
    return float(np.max(np.abs(err))), float(np.max(np.abs(err)) / (scale + floor))


def evolve_triples(G, base_triple, xi, lam, c, t_end, mesh_dt=1e-3, tol=1e-10,
                   policy=DEFAULT_POLICY, field_override=None, guard_tol=GUARD_TOL,
                   field="assembled"):
    """Co-evolve the triples and the group; returns (triple states, timeline).

    xi and lam are schedules or driving specs.  field is "assembled" (the
    delta-system field with lambda) or "hydrodynamic" (the ball sum P0, which
    ignores lambda and c).  field_override(t, z), when given, replaces both
    (used to push a known flow through the triple machinery).
    """
    if field not in ("assembled", "hydrodynamic"):
        raise ValueError(f"unknown field {field!r}")
    if G.rank < 1:
        raise ValueError("the surface flow needs at least one generator")
    if not t_end >= 0:
        raise ValueError("t_end must be non-negative")
    if not mesh_dt > 0:
        raise ValueError("mesh_dt must be positive")
    xi = _schedule(xi, t_end)
    lam = _schedule(lam, t_end)
    base = np.array([float(x) for x in base_triple])
    if base.shape != (3,) or not np.all(np.isfinite(base)):
        raise ValueError("base triple must be three finite reals")
    L = max(1, min(policy.max_word_length, 6))
    for x in base:
        if not limit_margin(G, x, L) > guard_tol:
            raise GuardTripped(f"base point {x} is on the limit set", t=0.0,
                               margins={"base": limit_margin(G, x, L)})
    b = build_ball(G, policy.max_word_length, policy.cap)
    orbit = mb.mapply(b.matrices, float(xi(0.0)))
    if np.min(np.abs(base[:, None] - orbit[None])) <= 1e-9:
        raise GuardTripped("base triple meets the orbit of xi(0)", t=0.0,
                           margins={"xi_orbit": float(np.min(np.abs(base[:, None] - orbit)))})
    p0 = np.vstack([base] + [mb.mapply(g.matrix, base) for g in G.generators])
    _check_rows(0.0, p0)
    orientation = [_orientation(r) for r in p0]
    recon = max(max(abs(x - y) for x, y in zip(mb.from_triples(tuple(p0[0]), tuple(p0[l])).coefficients,
                                                  G.generators[l - 1].coefficients))
                for l in range(1, G.rank + 1))

    st = _Stepper(G, xi, lam, c, policy, guard_tol, field_override, orientation, field)
    n = 0 if t_end == 0 else max(1, int(math.ceil(t_end / mesh_dt - 1e-9)))
    mesh = np.linspace(0.0, t_end, n + 1) if n else np.array([0.0])
    first = st.snapshot(0.0, p0.ravel(), exact=True)
    snaps, steps = [first], []
    cur = first
    total_err = 0.0
    for i in range(n):
        t0, t1 = mesh[i], mesh[i + 1]
        t = t0
        h = t1 - t0
        halvings = 0
        while t < t1:
            h = min(h, t1 - t)
            pending = []

            def f(ts, ys):
                s = st.snapshot(float(ts), ys)
                pending.append(s)
                return s.pdot.ravel()

            try:
                y5, err, _, _ = dopri_step(f, t, cur.p.ravel(), h, cur.pdot.ravel())
                e_abs, en = _step_error(err, cur.p, tol)
            except (TripleCollision, OrientationMismatch):
                en, e_abs = math.inf, math.inf
            if en > 1.0 and halvings < MAX_HALVINGS:
                h *= 0.5
                halvings += 1
                continue
            if not math.isfinite(en):
                raise TripleCollision(f"triples cannot be advanced past t = {t}")
            last = pending[-1]
            steps.append(Step(t, h, [cur] + pending, e_abs))
            total_err += e_abs
            t = t + h if t + h < t1 else float(t1)
            last.t = t
            cur = last
            h = t1 - t
        snaps.append(cur)

    fd = _fd_rates(mesh, [s.group.generators for s in snaps])
    timeline = GroupTimeline(
        times=mesh,
        generators=[s.group.generators for s in snaps],
        velocities=[s.velocity for s in snaps],
        fd_velocities=fd,
        deltas=np.array([s.context.deltas if s.context is not None else (np.nan,) * G.rank
                         for s in snaps]),
        sigma=np.array([s.context.sigma if s.context is not None else np.nan for s in snaps]),
        lambda0=np.array([s.lambda0 for s in snaps]),
        margins=[s.margins for s in snaps],
        steps=steps,
        snapshots=snaps,
        xi=xi, lam=lam, c=float(c), policy=policy,
        reconstruction_error=float(recon),
        triple_error=float(total_err),
        _stepper=st,
    )
    triples = [TripleState(float(t), s.p.copy()) for t, s in zip(mesh, snaps)]
    return triples, timeline


def _swallowed(snap, z):
    return snap.swallowed(z)


def _lagrange(ts, t):
    w = np.ones(len(ts))
    for j in range(len(ts)):
        for k in range(len(ts)):
            if k != j:
                w[j] *= (t - ts[k]) / (ts[j] - ts[k])
    return w


DENSE_NODES = (0.25, 0.5, 0.75)


def _step_nodes(timeline, step):
    """Snapshots at the step ends and at interior dense-output times."""
    if step.nodes is None:
        inner = [timeline._stepper.snapshot(step.t + th * step.h, step.dense_state(th))
                 for th in DENSE_NODES]
        step.nodes = [step.stages[0]] + inner + [step.stages[6]]
    return step.nodes


def _interp_field(timeline, step, z):
    """Field on [t, t + h] interpolated in time over exact snapshots.

    The pole nearest to z is split off: its position and residue are
    interpolated separately from the regular remainder, so the moving pole
    stays a simple pole of the interpolant.
    """
    ts = step.t + step.h * np.array((0.0,) + DENSE_NODES + (1.0,))
    snaps = _step_nodes(timeline, step)
    poles = snaps[0].pole_points
    if poles is None or len(poles) == 0:
        def f(t, z):
            w = _lagrange(ts, t)
            return -sum(wi * complex(s.field(z)) for wi, s in zip(w, snaps))
        return f, lambda t, z: math.inf, lambda t, z: _nearest(snaps, ts, t).swallowed(z)
    i = int(np.argmin(np.abs(z - poles)))
    pdata = [s.pole(i) for s in snaps]
    q = np.array([p[0] for p in pdata])
    r = np.array([p[1] for p in pdata])
    scale = pdata[0][2]

    def f(t, z):
        w = _lagrange(ts, t)
        rem = sum(wi * (complex(s.field(z)) - ri / (z - qi))
                  for wi, s, qi, ri in zip(w, snaps, q, r))
        return -(rem + (w @ r) / (z - w @ q))

    def dist(t, z):
        return min(abs(z - _lagrange(ts, t) @ q), _nearest(snaps, ts, t).pole_distance(z))

    def swallowed(t, z):
        if abs(z - _lagrange(ts, t) @ q) * scale < SWALLOW_DIST:
            return True
        return _nearest(snaps, ts, t).swallowed(z)

    return f, dist, swallowed


def _nearest(snaps, ts, t):
    return snaps[int(np.argmin(np.abs(ts - t)))]


def _replay_step(step, z, tol):
    """Fixed DOPRI step with the stored stage fields; None when not accurate."""
    h = step.h
    try:
        ks = [-complex(step.stages[0].field(z))]
        if abs(ks[0]) * h > 0.25 * step.stages[0].pole_distance(z):
            return None
        for s in range(1, 7):
            ys = z + h * sum(a * k for a, k in zip(A[s], ks) if a != 0.0)
            ks.append(-complex(step.stages[s].field(ys)))
    except NumericalError:
        return None
    y5 = z + h * sum(a * k for a, k in zip(A[6], ks) if a != 0.0)
    err = abs(h * sum(e * k for e, k in zip(E, ks) if e != 0.0))
    if not np.isfinite(err) or err > tol * min(z.imag, y5.imag):
        return None
    if abs(y5 - z) > 0.5 * step.stages[0].pole_distance(z):
        return None
    return y5, err


def integrate_seed(timeline, z0, tol=1e-10):
    """g_t(z0) over the timeline by replaying its stage contexts."""
    z0 = complex(z0)
    key = (z0, float(tol))
    if key in timeline._seeds:
        return timeline._seeds[key]
    if not z0.imag > 0:
        raise ValueError(f"seed {z0} is not in the upper half-plane")
    times, vals, errs = [0.0], [z0], [0.0]
    z = z0
    swallow = 0.0 if _swallowed(timeline.snapshots[0], z) else None
    for step in timeline.steps:
        if swallow is not None:
            break
        out = _replay_step(step, z, tol)
        if out is not None:
            z, e = out
            times.append(step.t + step.h)
            vals.append(z)
            errs.append(e)
            if _swallowed(step.stages[6], z):
                swallow = step.t + step.h
            continue
        f, dist, sw = _interp_field(timeline, step, z)
        r = integrate(f, z, step.t, step.t + step.h, tol, pole_distance=dist, swallowed=sw,
                      hyperbolic=True)
        times.extend(r.times[1:])
        vals.extend(r.values[1:])
        errs.extend(r.errors[1:])
        z = r.final
        if r.swallowed:
            swallow = float(r.swallow_time)
    res = FlowResult(z0, np.array(times), np.array(vals), swallow, np.array(errs))
    timeline._seeds[key] = res
    return res


def inverse_seed(timeline, w, t0, tol=1e-10):
    """h with h_dot = P(h, t0 - s) for s in [0, t0]; returns g_{t0}^{-1}(w)."""
    w = complex(w)
    i0 = timeline.index(t0)
    t0 = float(timeline.times[i0])
    z = w
    for step in reversed([s for s in timeline.steps if s.t < t0 - 1e-15]):
        f, dist, _ = _interp_field(timeline, step, z)
        end = step.t + step.h

        def g(s, z, f=f, end=end):
            return -f(end - s, z)

        r = integrate(g, z, 0.0, step.h, tol, pole_distance=lambda s, z, d=dist, e=end: d(e - s, z),
                      hyperbolic=True, absorbing=False)
        z = r.final
    return z


def trace_point(timeline, t, eps=1e-8, tol=1e-12):
    """A point of the hull near its tip at time t: g_t^{-1}(xi(t) + i eps).

    Its forward trajectory comes within about eps of xi(t) at time t, so it
    is swallowed there.
    """
    i = timeline.index(t)
    return inverse_seed(timeline, complex(timeline.snapshots[i].xi, eps), t, tol)


def simulate_seeds(timeline, seeds, tol=1e-10, threads=1):
    return run_seeds(lambda z: integrate_seed(timeline, z, tol), seeds, threads)


def _value_at(res, t):
    if res.swallowed and res.swallow_time <= t:
        raise SeedSwallowed(f"seed {res.seed} is swallowed at {res.swallow_time} <= {t}",
                            seed=res.seed, swallow_time=res.swallow_time)
    return res.at(t)


def conjugacy_residual(timeline, t, l, z, tol=1e-10):
    """|g_t(psi_l(z)) - psi_{l,t}(g_t(z))| at a mesh time t; l is 1-based."""
    i = timeline.index(t)
    t = float(timeline.times[i])
    psi = timeline.generators[0][l - 1]
    w = complex(mb.apply(psi, complex(z)))
    # plain complex: numpy complex division rounds differently
    gz = complex(_value_at(integrate_seed(timeline, z, tol), t))
    gw = complex(_value_at(integrate_seed(timeline, w, tol), t))
    return float(abs(gw - mb.apply(timeline.generators[i][l - 1], gz)))


def conjugacy_profile(timeline, l, z, tol=1e-10):
    """Conjugacy residual at every mesh time."""
    return np.array([conjugacy_residual(timeline, t, l, z, tol) for t in timeline.times])


def invariant_domain_check(timeline, seeds, t=None, tol=1e-10, threads=1, time_tol=1e-3):
    """z swallowed by time t iff psi_l(z) is, with swallow times within time_tol."""
    t = timeline.t_end if t is None else float(t)
    gens = timeline.generators[0]
    pairs = [(complex(z), l) for z in seeds for l in range(1, len(gens) + 1)]
    points = sorted({p for z, l in pairs for p in (z, complex(mb.apply(gens[l - 1], z)))},
                    key=lambda x: (x.real, x.imag))
    results = dict(zip(points, simulate_seeds(timeline, points, tol, threads)))
    violations, records = [], []
    for z, l in pairs:
        w = complex(mb.apply(gens[l - 1], z))
        tz, tw = results[z].swallow_time, results[w].swallow_time
        sz = tz is not None and tz <= t
        sw = tw is not None and tw <= t
        rec = {"seed": [z.real, z.imag], "generator": l, "image": [w.real, w.imag],
               "swallow_seed": tz if sz else None, "swallow_image": tw if sw else None}
        records.append(rec)
        if sz and sw:
            bad = abs(tz - tw) > time_tol
        elif sz or sw:
            first, other = (tz, tw) if sz else (tw, tz)
            # an unswallowed partner may still go just after t
            bad = first < t - time_tol or (other is not None and other - first > time_tol)
        else:
            bad = False
        if bad:
            violations.append(rec)
    return {"t": t, "checked": len(pairs), "violations": violations, "pairs": records}


def cross_triple_check(a, b, seeds=(), tol=1e-10):
    """Two timelines from different base triples must agree on Gamma_t and g_t.

    Compares generator coefficients and seed values at the mesh times the two
    timelines share; returns the worst differences.
    """
    gen_diff, seed_diff = 0.0, 0.0
    for i, t in enumerate(a.times):
        j = int(np.argmin(np.abs(b.times - t)))
        if abs(b.times[j] - t) > 1e-12:
            continue
        for g, h in zip(a.generators[i], b.generators[j]):
            gen_diff = max(gen_diff, float(np.max(np.abs(g.matrix - h.matrix))))
    t_common = min(a.t_end, b.t_end)
    for z in seeds:
        ra, rb = integrate_seed(a, z, tol), integrate_seed(b, z, tol)
        if ra.swallowed or rb.swallowed:
            continue
        seed_diff = max(seed_diff, abs(_value_at(ra, t_common) - _value_at(rb, t_common)))
    return {"generators": gen_diff, "seeds": float(seed_diff)}
