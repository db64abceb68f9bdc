"""Chordal Loewner flow in the half-plane: g_dot = 2 / (g - xi(t))."""

from dataclasses import dataclass

from . import driving
from .integrate import integrate, run_seeds, swallow_test


@dataclass(frozen=True)
class ChordalRun:
    driving: object
    seeds: tuple
    t_end: float
    tol: float = 1e-10

    def __post_init__(self):
        seeds = tuple(complex(z) for z in self.seeds)
        for z in seeds:
            if not z.imag > 0:
                raise ValueError(f"seed {z} is not in the upper half-plane")
        object.__setattr__(self, "seeds", seeds)


def chordal_field(xi):
    def f(t, g):
        return 2.0 / (g - xi(t))
    return f


def chordal_seed(xi, z0, t_end, tol=1e-10):
    def dist(t, z):
        return abs(z - xi(t))
    return integrate(chordal_field(xi), z0, 0.0, t_end, tol,
                     pole_distance=dist, swallowed=swallow_test(dist))


def chordal_flow(run, threads=1):
    xi = driving.realize(run.driving, run.t_end)
    return run_seeds(lambda z: chordal_seed(xi, z, run.t_end, run.tol), run.seeds, threads)
