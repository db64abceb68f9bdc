"""Dormand-Prince 5(4) integration for complex Loewner flows.

One adaptive driver serves every flow in the package.  Steps are clipped so a
single step never moves the point by more than a quarter of its distance to
the nearest pole of the field, and a seed is declared swallowed when it comes
within ``SWALLOW_DIST`` of the driving orbit or within ``SWALLOW_IM`` of the
real line.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import StepUnderflow

SWALLOW_DIST = 1e-7
SWALLOW_IM = 1e-9
MIN_STEP = 1e-14
EPS = np.finfo(float).eps

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array(A[6] + [0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4


@dataclass
class FlowResult:
    seed: complex
    times: np.ndarray
    values: np.ndarray
    swallow_time: float = None
    errors: np.ndarray = field(default=None, repr=False)

    @property
    def swallowed(self):
        return self.swallow_time is not None

    @property
    def final(self):
        return self.values[-1]

    @property
    def error_estimate(self):
        return float(np.sum(self.errors)) if self.errors is not None else 0.0

    def at(self, t):
        """Value at a stored time (exact match within 1e-12)."""
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-12 * max(1.0, abs(t)):
            raise KeyError(f"time {t} not on the trajectory")
        return self.values[i]


def dopri_step(f, t, y, h, k1=None):
    """One Dormand-Prince step.

    Returns (y5, err, ks, stage_points) where err = y5 - y4 and stage_points
    lists the (t, y) pairs at which f was evaluated.
    """
    ks = [f(t, y) if k1 is None else k1]
    pts = [(t, y)]
    for s in range(1, 7):
        ys = y + h * sum(a * k for a, k in zip(A[s], ks) if a != 0.0)
        ts = t + C[s] * h
        pts.append((ts, ys))
        ks.append(f(ts, ys))
    y5 = pts[6][1]
    err = h * sum(e * k for e, k in zip(E, ks) if e != 0.0)
    return y5, err, ks, pts


def integrate(f, z0, t0, t1, tol=1e-10, atol=None, pole_distance=None, swallowed=None,
              h0=None, max_steps=1_000_000, hyperbolic=False, absorbing=True):
    """Adaptive integration of dz/dt = f(t, z) for a complex scalar z.

    pole_distance(t, z) bounds the step and a pole closer than one minimal step counts
    as a swallow; swallowed(t, z) stops the run and
    records the swallow time.  With hyperbolic=True the error is measured
    relative to Im z, which is invariant under real Moebius maps.  Poles
    repel in backward flows: with absorbing=False tiny steps clipped by a
    nearby pole are allowed instead of ending the run.
    """
    rtol = tol
    atol = tol if atol is None else atol
    t, y = float(t0), complex(z0)
    times, vals, errs = [t], [y], [0.0]
    if swallowed is not None and swallowed(t, y):
        return FlowResult(complex(z0), np.array(times), np.array(vals), t, np.array(errs))
    if t1 <= t0:
        return FlowResult(complex(z0), np.array(times), np.array(vals), None, np.array(errs))
    k1 = f(t, y)
    if h0 is None:
        h = 0.01 * max(abs(y), 1e-3) / max(abs(k1), 1e-12)
        h = min(h, 0.1 * (t1 - t0))
    else:
        h = h0
    steps = 0
    while t < t1:
        steps += 1
        if steps > max_steps:
            raise StepUnderflow(f"step budget exhausted at t = {t}", t=t, z=y)
        h = min(h, t1 - t)
        if pole_distance is not None:
            d = pole_distance(t, y)
            speed = abs(k1)
            if speed * h > 0.25 * d:
                h = 0.25 * d / speed
        floor = MIN_STEP
        if not absorbing and pole_distance is not None:
            floor = min(MIN_STEP, 1e-6 * d / max(speed, 1e-300))
        if h < floor and t + h < t1:
            if absorbing and pole_distance is not None and d < 1e3 * MIN_STEP * speed:
                # the pole is reached in less time than any usable step: swallowed
                return FlowResult(complex(z0), np.array(times), np.array(vals), t, np.array(errs))
            raise StepUnderflow(f"step {h:.3g} below floor at t = {t}", t=t, z=y)
        y5, err, ks, _ = dopri_step(f, t, y, h, k1)
        if hyperbolic:
            sc = rtol * max(min(y.imag, y5.imag), 0.0) + 16 * EPS * max(abs(y), abs(y5))
        else:
            sc = atol + rtol * max(abs(y), abs(y5))
        en = abs(err) / sc
        if not np.isfinite(en):
            h *= 0.2
            continue
        if en <= 1.0:
            moved = abs(y5 - y)
            if pole_distance is not None and moved > 0.5 * pole_distance(t, y):
                h *= 0.5
                continue
            t = t + h if t + h < t1 else float(t1)
            y = y5
            k1 = ks[6]
            times.append(t)
            vals.append(y)
            errs.append(abs(err))
            if swallowed is not None and swallowed(t, y):
                return FlowResult(complex(z0), np.array(times), np.array(vals), t, np.array(errs))
            fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
            h *= fac
        else:
            h *= max(0.2, 0.9 * en ** -0.25)
    return FlowResult(complex(z0), np.array(times), np.array(vals), None, np.array(errs))


def swallow_test(orbit_distance):
    """Standard swallow predicate from a distance-to-driving-orbit function."""
    def swallowed(t, z):
        return z.imag < SWALLOW_IM or orbit_distance(t, z) < SWALLOW_DIST
    return swallowed


def run_seeds(fn, seeds, threads=1):
    """fn over seeds, optionally on a thread pool; order is preserved."""
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, seeds))
    return [fn(z) for z in seeds]
