"""Driving functions: deterministic schedules and Brownian (SLE) drivers.

A spec is a small frozen record; ``realize`` turns it into a Schedule, a
callable t -> value with a ``derivative`` method.  Brownian paths use the
Philox counter-based generator keyed by the seed, so normal number k depends
only on (seed, k) and a path computed to a later horizon extends the earlier
one bit for bit.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError


@dataclass(frozen=True)
class Constant:
    value: float = 0.0


@dataclass(frozen=True)
class Linear:
    start: float = 0.0
    slope: float = 0.0


@dataclass(frozen=True)
class Samples:
    times: tuple
    values: tuple
    interpolation: str = "monotone-cubic"

    def __post_init__(self):
        t = tuple(float(x) for x in self.times)
        v = tuple(float(x) for x in self.values)
        if len(t) != len(v) or len(t) < 2:
            raise ValueError("samples need at least two (time, value) pairs")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("sample times must be strictly increasing")
        if self.interpolation not in ("monotone-cubic", "linear"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class Sle:
    kappa: float
    h: object = 0.0  # drift: number or a deterministic spec
    seed: int = 0
    dt: float = 1e-3
    start: float = 0.0

    def __post_init__(self):
        if not self.kappa >= 0:
            raise ValueError("kappa must be non-negative")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if int(self.seed) != self.seed:
            raise ValueError("seed must be an integer")


DrivingSpec = Union[Constant, Linear, Samples, Sle]


class Schedule:
    def __call__(self, t):
        raise NotImplementedError

    def derivative(self, t):
        raise NotImplementedError


class ConstantSchedule(Schedule):
    def __init__(self, value):
        self.value = float(value)

    def __call__(self, t):
        return self.value + 0.0 * np.asarray(t, float) if np.ndim(t) else self.value

    def derivative(self, t):
        return 0.0 * np.asarray(t, float) if np.ndim(t) else 0.0


class LinearSchedule(Schedule):
    def __init__(self, start, slope):
        self.start, self.slope = float(start), float(slope)

    def __call__(self, t):
        return self.start + self.slope * np.asarray(t, float) if np.ndim(t) else self.start + self.slope * t

    def derivative(self, t):
        return self.slope + 0.0 * np.asarray(t, float) if np.ndim(t) else self.slope


class InterpolatedSchedule(Schedule):
    """Monotone-cubic (PCHIP) or piecewise-linear interpolation; held constant outside."""

    def __init__(self, times, values, kind="monotone-cubic"):
        self.times = np.asarray(times, float)
        self.values = np.asarray(values, float)
        self.kind = kind
        if kind == "monotone-cubic":
            self._p = PchipInterpolator(self.times, self.values, extrapolate=False)
            self._dp = self._p.derivative()

    def _clip(self, t):
        return np.clip(t, self.times[0], self.times[-1])

    def __call__(self, t):
        tc = self._clip(t)
        if self.kind == "linear":
            out = np.interp(tc, self.times, self.values)
        else:
            out = self._p(tc)
        return float(out) if np.ndim(t) == 0 else out

    def derivative(self, t):
        t = np.asarray(t, float)
        inside = (t >= self.times[0]) & (t <= self.times[-1])
        if self.kind == "linear":
            i = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2)
            slope = np.diff(self.values)[i] / np.diff(self.times)[i]
        else:
            slope = self._dp(self._clip(t))
        out = np.where(inside, slope, 0.0)
        return float(out) if out.ndim == 0 else out


class PathSchedule(InterpolatedSchedule):
    """A sampled path on a uniform mesh, linearly interpolated."""

    def __init__(self, dt, values):
        values = np.asarray(values, float)
        super().__init__(dt * np.arange(len(values)), values, "linear")
        self.dt = dt


def sle_normals(seed, n):
    """Standard normals N_0..N_{n-1}; N_k uses raw draws 2k and 2k+1 of Philox(seed)."""
    bg = np.random.Philox(key=int(seed) & (2**64 - 1))
    raw = bg.random_raw(2 * n)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    u1, u2 = u[0::2], u[1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def brownian_increments(seed, dt, n):
    return math.sqrt(dt) * sle_normals(seed, n)


def _mesh_steps(t_end, dt):
    return max(1, int(math.ceil(t_end / dt - 1e-9)))


def realize(spec, t_end):
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    spec = parse_spec(spec)
    if isinstance(spec, Constant):
        return ConstantSchedule(spec.value)
    if isinstance(spec, Linear):
        return LinearSchedule(spec.start, spec.slope)
    if isinstance(spec, Samples):
        if spec.times[0] > 0 or spec.times[-1] < t_end - 1e-12:
            raise ValueError(f"samples cover [{spec.times[0]}, {spec.times[-1]}], need [0, {t_end}]")
        return InterpolatedSchedule(spec.times, spec.values, spec.interpolation)
    n = _mesh_steps(t_end, spec.dt)
    w = np.concatenate([[0.0], np.cumsum(brownian_increments(spec.seed, spec.dt, n))])
    mesh = spec.dt * np.arange(n)
    if isinstance(spec.h, (int, float)):
        drift = np.full(n, float(spec.h))
    else:
        drift = np.asarray(realize(spec.h, max(t_end, spec.dt))(mesh), float)
    hh = np.concatenate([[0.0], np.cumsum(drift * spec.dt)])
    return PathSchedule(spec.dt, spec.start + math.sqrt(spec.kappa) * w + hh)


def parse_spec(obj):
    """Driving spec from a JSON-like object (a bare number means Constant)."""
    if isinstance(obj, (Constant, Linear, Samples, Sle)):
        return obj
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return Constant(float(obj))
    if not isinstance(obj, dict) or "type" not in obj:
        raise ConfigError("driving spec must be a number or an object with a 'type'", key="type")
    kind = obj["type"]
    body = {k: v for k, v in obj.items() if k != "type"}
    table = {"constant": Constant, "linear": Linear, "samples": Samples, "sle": Sle}
    if kind not in table:
        raise ConfigError(f"unknown driving type {kind!r}", key="type")
    try:
        if kind == "samples":
            return Samples(tuple(body.pop("times")), tuple(body.pop("values")), **body)
        if kind == "sle" and isinstance(body.get("h"), dict):
            body["h"] = parse_spec(body["h"])
        return table[kind](**body)
    except KeyError as e:
        raise ConfigError(f"driving spec of type {kind!r} is missing {e.args[0]!r}",
                          key=e.args[0]) from None
    except TypeError as e:
        raise ConfigError(f"bad driving spec: {e}", key="driving") from None


def sample_path(schedule, t_end, dt):
    """Times and values on a uniform output mesh, for export."""
    n = _mesh_steps(t_end, dt)
    t = np.minimum(dt * np.arange(n + 1), t_end)
    return t, np.asarray(schedule(t), float)
