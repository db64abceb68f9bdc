"""Real Moebius transformations acting on the upper half-plane.

Maps are stored with determinant 1 and a canonical sign, so two maps are
equal exactly when their coefficients agree.  The point at infinity is the
module-level constant ``INF``.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTriple, OrientationMismatch

PARABOLIC_TOL = 1e-9


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(z):
    return z is INF


class MapClass(enum.Enum):
    Identity = "identity"
    Elliptic = "elliptic"
    Parabolic = "parabolic"
    Hyperbolic = "hyperbolic"


@dataclass(frozen=True)
class MoebiusMap:
    """z -> (az+b)/(cz+d), normalized to ad - bc = 1 with a+d >= 0."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = (float(x) for x in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if not det > 0:
            raise ValueError(f"determinant must be positive, got {det!r}")
        s = math.sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
        if _negate(a, b, c, d):
            a, b, c, d = -a, -b, -c, -d
        # avoid storing -0.0 so hashing and printing are canonical
        a, b, c, d = (x + 0.0 for x in (a, b, c, d))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @property
    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self):
        return self.a + self.d

    @property
    def coefficients(self):
        return (self.a, self.b, self.c, self.d)

    def __call__(self, z):
        return apply(self, z)

    def __matmul__(self, other):
        return compose(self, other)


def _negate(a, b, c, d):
    tr = a + d
    if tr != 0:
        return tr < 0
    if a != 0:
        return a < 0
    return c < 0


def from_matrix(m):
    m = np.asarray(m, dtype=float)
    return MoebiusMap(m[0, 0], m[0, 1], m[1, 0], m[1, 1])


def unimodular(m):
    """Map from a matrix that has det 1 by construction, without rescaling.

    Products of normalized maps have det 1 only up to cancellation noise in
    a d - b c; dividing by the square root of that noise would spread it to
    every entry, so only the sign convention is applied.
    """
    a, b, c, d = (float(x) for x in np.ravel(m))
    if _negate(a, b, c, d):
        a, b, c, d = -a, -b, -c, -d
    f = object.__new__(MoebiusMap)
    for k, v in zip("abcd", (a, b, c, d)):
        object.__setattr__(f, k, v + 0.0)
    return f


def identity():
    return MoebiusMap(1.0, 0.0, 0.0, 1.0)


def translation(s):
    return MoebiusMap(1.0, s, 0.0, 1.0)


def scaling(k):
    """z -> k z for k > 0."""
    r = math.sqrt(k)
    return MoebiusMap(r, 0.0, 0.0, 1.0 / r)


def hyperbolic(attracting, repelling, multiplier):
    """Hyperbolic map with the given fixed points and multiplier k > 1.

    The derivative at the attracting fixed point is 1/k.  Either fixed point
    may be ``INF``.
    """
    k = float(multiplier)
    if not k > 1:
        raise ValueError("multiplier must exceed 1")
    if attracting is INF and repelling is INF:
        raise ValueError("fixed points must differ")
    if attracting is INF:
        # z -> r + k (z - r)
        r = float(repelling)
        return from_matrix(np.array([[k, r - k * r], [0.0, 1.0]]))
    if repelling is INF:
        a = float(attracting)
        return from_matrix(np.array([[1.0, a * k - a], [0.0, k]]))
    a, r = float(attracting), float(repelling)
    if a == r:
        raise ValueError("fixed points must differ")
    mu, nu = 1 / math.sqrt(k), math.sqrt(k)
    m = np.array([[-r * mu + a * nu, r * mu * a - a * nu * r],
                  [nu - mu, mu * a - nu * r]]) / (a - r)
    return from_matrix(m)


def compose(f, g):
    """f o g."""
    return unimodular((f.a * g.a + f.b * g.c, f.a * g.b + f.b * g.d,
                       f.c * g.a + f.d * g.c, f.c * g.b + f.d * g.d))


def inverse(f):
    return unimodular((f.d, -f.b, -f.c, f.a))


def apply(f, z):
    if z is INF:
        return INF if f.c == 0 else f.a / f.c
    den = f.c * z + f.d
    if den == 0:
        return INF
    return (f.a * z + f.b) / den


def derivative(f, z):
    if z is INF:
        raise ValueError("derivative at infinity is not defined in this chart")
    den = f.c * z + f.d
    if den == 0:
        return INF
    return 1.0 / (den * den)


def is_identity(f, tol=1e-12):
    return (abs(f.a - 1) < tol and abs(f.d - 1) < tol
            and abs(f.b) < tol and abs(f.c) < tol)


def classify(f, tol=PARABOLIC_TOL):
    if is_identity(f):
        return MapClass.Identity
    t = abs(f.trace)
    if abs(t - 2) <= tol:
        return MapClass.Parabolic
    return MapClass.Elliptic if t < 2 else MapClass.Hyperbolic


def fixed_points(f):
    """Fixed points as a tuple.

    For hyperbolic maps the attracting point comes first.  Elliptic maps give
    a conjugate pair with the one in the upper half-plane first.
    """
    if is_identity(f, 0.0):
        raise ValueError("every point is fixed by the identity")
    a, b, c, d = f.coefficients
    if c == 0:
        if a == d:
            return (INF,)
        x = b / (d - a)
        # z -> (a/d) z + b/d; infinity attracts when |a/d| > 1
        return (INF, x) if abs(a) > abs(d) else (x, INF)
    disc = (a + d) ** 2 - 4.0
    p = d - a
    if abs(abs(a + d) - 2) <= PARABOLIC_TOL and disc <= 0:
        return ((a - d) / (2 * c),)
    if disc < 0:
        root = complex((a - d) / (2 * c), math.sqrt(-disc) / (2 * abs(c)))
        return (root, root.conjugate())
    s = math.sqrt(disc)
    q = -0.5 * (p + math.copysign(s, p))
    x1, x2 = q / c, -b / q
    if abs(c * x1 + d) > abs(c * x2 + d):
        return (x1, x2)
    return (x2, x1)


def multiplier(f):
    """Multiplier k > 1 of a hyperbolic map, from the trace."""
    t = abs(f.trace)
    if t <= 2:
        raise ValueError("map is not hyperbolic")
    r = (t + math.sqrt(t * t - 4)) / 2
    return r * r


def _to_standard(p, tol):
    """Normalized map sending the triple p to (0, 1, INF), unnormalized det."""
    z1, z2, z3 = p
    if sum(z is INF for z in p) > 1:
        raise DegenerateTriple(f"triple {p!r} repeats infinity")
    fin = [float(z) for z in p if z is not INF]
    scale = max([1.0] + [abs(x) for x in fin])
    for i in range(len(fin)):
        for j in range(i + 1, len(fin)):
            if abs(fin[i] - fin[j]) <= tol * scale:
                raise DegenerateTriple(f"triple {p!r} has coincident entries")
    if z1 is INF:
        return np.array([[0.0, z2 - z3], [1.0, -z3]])
    if z2 is INF:
        return np.array([[1.0, -z1], [1.0, -z3]])
    if z3 is INF:
        return np.array([[1.0, -z1], [0.0, z2 - z1]])
    return np.array([[z2 - z3, -z1 * (z2 - z3)], [z2 - z1, -z3 * (z2 - z1)]])


def from_triples(p, q, tol=1e-12):
    """The map sending p[j] to q[j] for j = 0, 1, 2.

    Both triples go to (0, 1, INF) and the results are composed; the
    product determinant is negative when the triples have opposite
    orientation on the real line.
    """
    tp = _to_standard(tuple(p), tol)
    tq = _to_standard(tuple(q), tol)
    adj = np.array([[tq[1, 1], -tq[0, 1]], [-tq[1, 0], tq[0, 0]]])
    m = adj @ tp
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if not det > 0:
        raise OrientationMismatch(
            f"triples {tuple(p)!r} and {tuple(q)!r} have opposite orientation")
    return from_matrix(m)


def cross_ratio(z1, z2, z3, z4):
    """(z1, z2; z3, z4) = (z1 - z3)(z2 - z4) / ((z1 - z4)(z2 - z3))."""
    return (z1 - z3) * (z2 - z4) / ((z1 - z4) * (z2 - z3))


# vectorized kernels over stacks of 2x2 matrices, shape (..., 2, 2)

def mapply(m, z):
    return (m[..., 0, 0] * z + m[..., 0, 1]) / (m[..., 1, 0] * z + m[..., 1, 1])


def mderiv(m, z):
    den = m[..., 1, 0] * z + m[..., 1, 1]
    return 1.0 / (den * den)


def mvelocity(m, mdot, z):
    """d/dt of M_t(z) at frozen z, given M and its rate."""
    num = m[..., 0, 0] * z + m[..., 0, 1]
    den = m[..., 1, 0] * z + m[..., 1, 1]
    numd = mdot[..., 0, 0] * z + mdot[..., 0, 1]
    dend = mdot[..., 1, 0] * z + mdot[..., 1, 1]
    return (numd * den - num * dend) / (den * den)


def madj(m):
    """Adjugate, which is the inverse for determinant-one matrices."""
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 1, 1] = m[..., 0, 0]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    return out
