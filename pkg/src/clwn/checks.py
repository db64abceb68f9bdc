"""Acceptance checks shared by the ``check`` subcommand and the test suite.

Each check runs one numerical experiment, compares it with its oracle and
reports the measured values, the thresholds and the wall time.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import annulus as an
from . import chordal, driving
from . import field as fd
from . import fuchsian as fu
from . import moebius as mb
from . import surface_flow as sf
from .automorphic import GroupVelocity


@dataclass
class CheckResult:
    name: str
    passed: bool
    runtime: float
    limit: float
    values: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        vals = ", ".join(f"{k}={_fmt(v)}" for k, v in self.values.items())
        return f"{status} {self.name}: {vals}; runtime {self.runtime:.3g}s (limit {self.limit:g}s)"

    def as_dict(self):
        return {"name": self.name, "passed": self.passed, "runtime": self.runtime,
                "limit": self.limit, "values": {k: _plain(v) for k, v in self.values.items()}}


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


# shared fixtures

def test_group():
    """Two hyperbolic generators, fixed points (-2, -1) and (1, 2), multiplier 9."""
    return fu.FuchsianGroup((mb.hyperbolic(-2.0, -1.0, 9.0), mb.hyperbolic(1.0, 2.0, 9.0)))


TEST_XI = 0.0
TEST_C = 4.0
TEST_POINTS = (1j, 2j, 0.5 + 1j, -0.5 + 1j, 3j)
# trace-free generators of the prescribed group motion
TEST_PERTURBATION = (((0.3, 0.1), (-0.2, -0.3)), ((-0.1, 0.4), (0.25, 0.1)))


def test_context(policy=fu.DEFAULT_POLICY, mode="raw"):
    G = test_group()
    V = GroupVelocity.from_sl2(G, [np.array(x) for x in TEST_PERTURBATION])
    return fd.build_context(G, V, TEST_XI, TEST_C, 0.0, policy, mode)


def annulus_test_schedule():
    """tau = 1 + 0.2 t, xi = 1, lambda = 0, c = -1 on [0, 0.5]."""
    return an.AnnulusSchedule.build(1.0, -1.0, 0.5, xi=1.0, lam=0.0, tau_rate=0.2)


ANNULUS_SEEDS = (1 + 1j, -0.5 + 0.5j, 2 + 2j, 0.3 + 0.8j, -2 + 0.4j,
                 0.5 + 1.5j, 3 + 1j, -1 + 2j, 1.5 + 0.6j, 0.1 + 0.5j)
SURFACE_SEEDS = (2j, 1 + 1j, -1 + 0.5j, 0.05 + 0.05j, 0.02 + 0.03j,
                 3 + 1j, -3 + 2j, 0.5j, 1.5 + 0.2j, -0.1 + 0.1j)
SURFACE_TRIPLE = (3.0, 5.0, -4.0)


# criteria

def check_chordal():
    with _Timer() as tm:
        xi = driving.realize(driving.Constant(0.0), 1.5)
        g = chordal.chordal_seed(xi, 3j, 1.0)
        # the tip swallow happens at t = 1, so run a little past it
        s = chordal.chordal_seed(xi, 2j, 1.5)
    err = abs(g.final - 1j * math.sqrt(5))
    T = s.swallow_time
    ok = err < 1e-6 and T is not None and 0.999 <= T <= 1.001 and tm.elapsed < 1.0
    return CheckResult("1 chordal oracle", ok, tm.elapsed, 1.0,
                       {"|g1(3i)-i sqrt5|": err, "T(2i)": T})


def check_annulus_telescoping():
    with _Timer() as tm:
        v = an.annulus_k_functional(math.log(2), 1.0, 0.5, 40)
    err = abs(v - 2.0)
    return CheckResult("2 annulus telescoping", err < 1e-8 and tm.elapsed < 0.01, tm.elapsed, 0.01,
                       {"value": v, "|value-2|": err})


def check_annulus_equivariance(threads=1):
    s = annulus_test_schedule()
    t_end = 0.5
    with _Timer() as tm:
        a = an.simulate(s, ANNULUS_SEEDS, t_end, 1e-9, threads)
        b = an.simulate(s, [math.exp(s.tau0) * z for z in ANNULUS_SEEDS], t_end, 1e-9, threads)
    k = math.exp(float(s.tau(t_end)))
    swallowed = sum(r.swallowed or q.swallowed for r, q in zip(a, b))
    worst = max((abs(q.final - k * r.final) for r, q in zip(a, b)
                 if not (r.swallowed or q.swallowed)), default=math.inf)
    ok = worst < 1e-6 and swallowed == 0 and tm.elapsed < 5.0
    return CheckResult("3 annulus equivariance", ok, tm.elapsed, 5.0,
                       {"max residual": worst, "swallowed": swallowed})


def check_annulus_roundtrip(threads=1):
    s = annulus_test_schedule()
    t0 = 0.5
    with _Timer() as tm:
        hs = [an.inverse_flow(s, w, t0, 1e-10) for w in ANNULUS_SEEDS]
        gs = an.simulate(s, [h.final for h in hs], t0, 1e-10, threads)
    worst = max(abs(g.final - w) for g, w in zip(gs, ANNULUS_SEEDS))
    ok = worst < 1e-6 and not any(g.swallowed for g in gs) and tm.elapsed < 5.0
    return CheckResult("4 annulus inverse roundtrip", ok, tm.elapsed, 5.0, {"max |g(h(w))-w|": worst})


def check_field_equivariance():
    with _Timer() as tm:
        ctx = test_context()
        words = fu.build_ball(ctx.group, 2).words
        worst_ratio, worst = 0.0, 0.0
        for z in TEST_POINTS:
            for w in words:
                e = fd.equivariance_residual(ctx, w, z)
                worst = max(worst, e.residual)
                if e.residual > 0:
                    worst_ratio = max(worst_ratio, e.residual / (10 * e.tails))
    ok = worst_ratio < 1.0 and tm.elapsed < 30.0
    return CheckResult("5 field equivariance", ok, tm.elapsed, 30.0,
                       {"max residual": worst, "max residual/(10 tails)": worst_ratio,
                        "words": len(words)})


def check_delta_system():
    with _Timer() as tm:
        ctx = test_context()
        res = ctx.system.residual
        gaps = []
        for k in range(ctx.group.rank):
            for z in TEST_POINTS[:3]:
                gaps.append(fd.automorphy_gap(ctx, k, z))
    worst = max(g / t for g, t in gaps)
    ok = res < 1e-10 and worst < 1.0 and tm.elapsed < 10.0
    return CheckResult("6 delta system", ok, tm.elapsed, 10.0,
                       {"relative residual": res, "max gap/tails": worst,
                        "condition": ctx.system.condition})


def check_residue():
    with _Timer() as tm:
        ctx = test_context(mode="normalized")
        r = fd.contour_residue(lambda z: fd.eval_P(ctx, z).value, ctx.xi, 1e-3)
    err = abs(r + 2.0)
    return CheckResult("7 residue normalization", err < 1e-3 and tm.elapsed < 1.0, tm.elapsed, 1.0,
                       {"residue": r, "|residue+2|": err})


def surface_acceptance_run(mesh_dt=1e-3, t_end=0.05, policy=fu.DEFAULT_POLICY):
    return sf.evolve_triples(test_group(), SURFACE_TRIPLE, driving.Constant(TEST_XI),
                             driving.Constant(0.0), TEST_C, t_end, mesh_dt, 1e-10, policy)


def check_surface(threads=1):
    with _Timer() as tm:
        _, tl = surface_acceptance_run()
        res = [sf.conjugacy_residual(tl, tl.t_end, l, 2j) for l in (1, 2)]
        rep = sf.invariant_domain_check(tl, SURFACE_SEEDS, threads=threads)
    nv = len(rep["violations"])
    ok = max(res) < 1e-4 and nv == 0 and tm.elapsed < 300.0
    return CheckResult("8 surface-flow conjugacy", ok, tm.elapsed, 300.0,
                       {"residual l=1": res[0], "residual l=2": res[1], "violations": nv,
                        "pairs": rep["checked"]})


def cross_validation(points=(0.3 + 0.5j, -0.2 + 0.3j, 1.5 + 1j, 2j, -1 + 0.7j), t=0.2, L=30):
    """Assembled field of a conjugated cyclic group against the annulus closed form.

    The annulus generator z -> e^tau z is conjugated by M(w) = (w - 1)/(w + 2),
    which puts its fixed points at -1/2 and 1 and sends xi = 1 to 0.
    Returns (max difference, max |P|).
    """
    s = annulus_test_schedule()
    tau, taud = float(s.tau(t)), float(s.tau.derivative(t))
    a = np.diag([math.exp(tau / 2), math.exp(-tau / 2)])
    adot = 0.5 * taud * np.diag([math.exp(tau / 2), -math.exp(-tau / 2)])
    m = np.array([[1.0, -1.0], [1.0, 2.0]]) / math.sqrt(3)
    mi = np.linalg.inv(m)
    conj = mb.from_matrix(m)
    G = fu.FuchsianGroup((mb.from_matrix(m @ a @ mi),))
    V = GroupVelocity(G, ((m @ adot @ mi).ravel(),))
    ctx = fd.build_context(G, V, mb.apply(conj, float(s.xi(t))), mb.apply(conj, s.c),
                           0.0, fu.EnumerationPolicy(max_word_length=L))
    pts = np.asarray(points, complex)
    got = fd.eval_P(ctx, pts).value
    want = np.array([an.conjugate_annulus_field(s, t, conj, z).value for z in pts])
    return float(np.max(np.abs(got - want))), float(np.max(np.abs(want)))


def check_cross_validation():
    with _Timer() as tm:
        diff, size = cross_validation()
    return CheckResult("9 cyclic cross-validation", diff < 1e-5 and tm.elapsed < 30.0, tm.elapsed, 30.0,
                       {"max difference": diff, "max |P|": size})


def sle_increment_variance(kappa=4.0, n_seeds=2000, dt=1e-3, t=1.0, first_seed=1):
    x = np.empty(n_seeds)
    for i in range(n_seeds):
        path = driving.realize(driving.Sle(kappa, seed=first_seed + i, dt=dt), t)
        x[i] = path(t) - path(0.0)
    return float(np.var(x, ddof=1))


def check_sle():
    with _Timer() as tm:
        v = sle_increment_variance()
    return CheckResult("10 SLE driver variance", 3.7 <= v <= 4.3 and tm.elapsed < 30.0, tm.elapsed, 30.0,
                       {"variance": v})


SUITES = {
    "chordal": (check_chordal,),
    "annulus": (check_annulus_telescoping, check_annulus_equivariance, check_annulus_roundtrip),
    "field": (check_field_equivariance, check_delta_system, check_residue),
    "surface": (check_surface,),
    "cross": (check_cross_validation,),
    "driving": (check_sle,),
}
SUITES["all"] = tuple(f for k in ("chordal", "annulus", "field", "surface", "cross", "driving")
                      for f in SUITES[k])

_THREADED = {check_annulus_equivariance, check_annulus_roundtrip, check_surface}


def run_suite(name, threads=1):
    out = []
    for f in SUITES[name]:
        out.append(f(threads) if f in _THREADED else f())
    return out
