"""Free Fuchsian groups given by hyperbolic generators.

Words are tuples of signed, 1-based generator indices: ``2`` is the second
generator and ``-2`` its inverse.  Balls of the Cayley graph are built level by
level as stacks of 2x2 matrices; the raw matrix products are kept (no sign
normalization) so that time derivatives propagate consistently.
"""

import functools
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import moebius as mb
from .errors import CapacityExceeded, FreenessWarning, NearLimitSet

DEFAULT_CAP = 200_000


@dataclass(frozen=True)
class EnumerationPolicy:
    max_word_length: int = 6
    tail_tolerance: float = 1e-7
    cap: int = DEFAULT_CAP
    limit_tolerance: float = 1e-6

    def __post_init__(self):
        if int(self.max_word_length) != self.max_word_length or self.max_word_length < 0:
            raise ValueError("max_word_length must be a non-negative integer")
        if not self.tail_tolerance > 0:
            raise ValueError("tail_tolerance must be positive")

    def with_length(self, L):
        return EnumerationPolicy(L, self.tail_tolerance, self.cap, self.limit_tolerance)


DEFAULT_POLICY = EnumerationPolicy()


def _letter_key(x):
    return (abs(x), 0 if x > 0 else 1)


@dataclass(frozen=True, order=False)
class Word:
    letters: tuple = ()

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        for x in letters:
            if x == 0:
                raise ValueError("letter 0 is not a generator")
        for x, y in zip(letters, letters[1:]):
            if x == -y:
                raise ValueError(f"word {letters} is not reduced")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other):
        return reduce_letters(self.letters + tuple(other.letters))

    def inverse(self):
        return Word(tuple(-x for x in reversed(self.letters)))

    def sort_key(self):
        return (len(self.letters), tuple(_letter_key(x) for x in self.letters))

    def __str__(self):
        if not self.letters:
            return "e"
        return "".join(_letter_name(x) for x in self.letters)

    @classmethod
    def parse(cls, s):
        s = s.strip()
        if s in ("", "e"):
            return cls(())
        out = []
        for ch in s:
            if ch.islower():
                out.append(ord(ch) - ord("a") + 1)
            elif ch.isupper():
                out.append(-(ord(ch) - ord("A") + 1))
            else:
                raise ValueError(f"bad letter {ch!r} in word {s!r}")
        return cls(tuple(out))


def _letter_name(x):
    if abs(x) > 26:
        return f"[{x}]"
    ch = chr(ord("a") + abs(x) - 1)
    return ch if x > 0 else ch.upper()


def reduce_letters(letters):
    out = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(int(x))
    return Word(tuple(out))


@dataclass(frozen=True)
class FuchsianGroup:
    generators: tuple
    assumed_free: bool = True
    allow_parabolic: bool = field(default=False, compare=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        for g in gens:
            cls = mb.classify(g)
            ok = cls is mb.MapClass.Hyperbolic or (
                self.allow_parabolic and cls is mb.MapClass.Parabolic)
            if not ok:
                raise ValueError(f"generator {g} is {cls.value}, not hyperbolic")
        for i, g in enumerate(gens):
            for h in gens[i + 1:]:
                if _close(g, h) or _close(g, mb.inverse(h)):
                    raise ValueError("generators must be distinct and not mutually inverse")
        if gens and not ping_pong(self):
            warnings.warn("isometric circles of the generators overlap; "
                          "freeness is assumed but not confirmed", FreenessWarning,
                          stacklevel=3)

    @property
    def rank(self):
        return len(self.generators)

    @property
    def kind_certificate(self):
        return kind_certificate(self)

    def letter_map(self, x):
        g = self.generators[abs(x) - 1]
        return g if x > 0 else mb.inverse(g)

    def evaluate(self, w):
        m = np.eye(2)
        for x in w:
            m = m @ self.letter_map(x).matrix
        return mb.unimodular(m)


def _close(f, g, tol=1e-12):
    return all(abs(x - y) < tol for x, y in zip(f.coefficients, g.coefficients))


def from_fixed_points(triples, assumed_free=True):
    """Group from (attracting, repelling, multiplier) triples."""
    return FuchsianGroup(tuple(mb.hyperbolic(*t) for t in triples), assumed_free)


def isometric_intervals(G):
    """Real traces of the isometric circles |cz+d| = 1 of each letter."""
    out = []
    for x in _letters(G.rank):
        f = G.letter_map(x)
        if f.c == 0:
            return None
        centre, radius = -f.d / f.c, 1 / abs(f.c)
        out.append((centre - radius, centre + radius))
    return out


def ping_pong(G):
    """Cheap sufficient test for freeness: disjoint isometric circles."""
    if G.rank == 1:
        return True  # a single hyperbolic map generates a free cyclic group
    iv = isometric_intervals(G)
    if iv is None:
        return False
    iv = sorted(iv)
    return all(a[1] < b[0] for a, b in zip(iv, iv[1:]))


def _letters(m):
    out = []
    for i in range(1, m + 1):
        out += [i, -i]
    return out


def ball_size(m, L):
    if m == 0:
        return 1
    return 1 + sum(2 * m * (2 * m - 1) ** (k - 1) for k in range(1, L + 1))


class Ball:
    """All reduced words of length <= L, as matrix stacks.

    ``matrices[i]`` is the raw product of the letter matrices of word i and
    ``rates[i]`` (when generator rates were supplied) its time derivative.
    Rows are ordered by length, then lexicographically with g1 < g1^-1 < g2 ...
    """

    def __init__(self, G, L, letter_rates=None, cap=DEFAULT_CAP):
        m = G.rank
        n = ball_size(m, L)
        if n > cap:
            raise CapacityExceeded(f"ball of radius {L} has {n} words, cap is {cap}")
        self.L = L
        self.rank = m
        letters = _letters(m)
        gm = np.array([G.letter_map(x).matrix for x in letters]).reshape(-1, 2, 2)
        inv_of = np.array([i ^ 1 for i in range(2 * m)], dtype=int)
        mats = [np.eye(2)[None]]
        rates = [np.zeros((1, 2, 2))] if letter_rates is not None else None
        last = [np.array([-1])]
        parent = [np.array([-1])]
        lengths = [np.array([0])]
        fm, fr, fl = mats[0], (rates[0] if rates is not None else None), last[0]
        start = 0
        for ell in range(1, L + 1):
            if m == 0:
                break
            nf = len(fl)
            allowed = np.ones((nf, 2 * m), bool)
            has = fl >= 0
            allowed[np.nonzero(has)[0], inv_of[fl[has]]] = False
            pi, li = np.nonzero(allowed)
            newm = np.einsum("nij,njk->nik", fm[pi], gm[li])
            if rates is not None:
                newr = (np.einsum("nij,njk->nik", fr[pi], gm[li])
                        + np.einsum("nij,njk->nik", fm[pi], letter_rates[li]))
                rates.append(newr)
                fr = newr
            mats.append(newm)
            last.append(li)
            parent.append(start + pi)
            lengths.append(np.full(len(li), ell))
            start += nf
            fm, fl = newm, li
        self.matrices = np.concatenate(mats)
        self.rates = np.concatenate(rates) if rates is not None else None
        self.last = np.concatenate(last)
        self.parent = np.concatenate(parent)
        self.lengths = np.concatenate(lengths)
        self.shell = self.lengths == L
        self._letters = letters

    def __len__(self):
        return len(self.lengths)

    @functools.cached_property
    def words(self):
        out = [Word(())]
        for i in range(1, len(self)):
            out.append(Word(out[self.parent[i]].letters + (self._letters[self.last[i]],)))
        return out

    def index(self, w):
        return self.words.index(w)


def letter_rate_stack(G, generator_rates):
    """Rates for the letters g1, g1^-1, g2, ... from generator rates."""
    out = []
    for g, r in zip(G.generators, generator_rates):
        gi = mb.inverse(g).matrix
        r = np.asarray(r, float).reshape(2, 2)
        out += [r, -gi @ r @ gi]
    return np.array(out).reshape(-1, 2, 2)


@functools.lru_cache(maxsize=32)
def _cached_ball(G, L, cap):
    return Ball(G, L, cap=cap)


def build_ball(G, L, cap=DEFAULT_CAP):
    return _cached_ball(G, int(L), cap)


def enumerate_ball(G, L, cap=DEFAULT_CAP):
    if L < 0:
        raise ValueError("L must be non-negative")
    b = build_ball(G, L, cap)
    return [(w, mb.unimodular(m)) for w, m in zip(b.words, b.matrices)]


def limit_set_sample(G, L, cap=DEFAULT_CAP):
    if L < 0:
        raise ValueError("L must be non-negative")
    if L == 0:
        return []  # the identity alone has no fixed points to sample
    return list(_limit_sample(G, int(L), cap))


@functools.lru_cache(maxsize=64)
def _limit_sample(G, L, cap):
    b = build_ball(G, L, cap)
    m = b.matrices[1:]
    a, bb, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    scale = np.abs(m).max(axis=(1, 2))
    small = np.abs(c) <= 1e-14 * scale
    pts = []
    # c == 0: one finite fixed point b/(d-a), unless a translation
    lin = small & (np.abs(d - a) > 1e-14 * scale)
    pts.append(bb[lin] / (d[lin] - a[lin]))
    q = ~small
    a, bb, c, d = a[q], bb[q], c[q], d[q]
    disc = np.maximum((a + d) ** 2 - 4.0, 0.0)
    s = np.sqrt(disc)
    p = d - a
    qq = -0.5 * (p + np.where(p >= 0, s, -s))
    r1 = qq / c
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(qq != 0, -bb / qq, r1)
    pts += [r1, r2]
    x = np.sort(np.concatenate(pts))
    if len(x) == 0:
        return tuple()
    keep = np.ones(len(x), bool)
    keep[1:] = np.diff(x) > 1e-12
    return tuple(float(v) for v in x[keep])


class KindCheck(NamedTuple):
    ok: bool
    margin: float


def limit_margin(G, x, L=4, cap=DEFAULT_CAP):
    """Distance from a real or complex point to the sampled limit set."""
    if L < 1:
        return np.inf
    s = np.asarray(_limit_sample(G, int(L), cap))
    if len(s) == 0:
        return np.inf
    return float(np.min(np.abs(x - s)))


def is_second_kind_at(G, x, L=4, tol=1e-6):
    margin = limit_margin(G, x, L)
    return KindCheck(bool(margin > tol), margin)


def check_off_limit_set(G, x, policy=DEFAULT_POLICY, what="point"):
    L = max(1, min(policy.max_word_length, 6))
    margin = limit_margin(G, x, L)
    if not margin > policy.limit_tolerance:
        raise NearLimitSet(f"{what} {x!r} is within {margin:.3g} of the limit set",
                           point=x, margin=margin)
    return margin


@functools.lru_cache(maxsize=32)
def kind_certificate(G, L=4):
    """Sampled limit set with its largest gaps, as evidence of second kind."""
    if G.rank == 0:
        return {"L": L, "sample_size": 0, "gaps": []}
    s = np.asarray(_limit_sample(G, L, DEFAULT_CAP))
    d = np.diff(s)
    order = np.argsort(-d)[:4] if len(d) else []
    gaps = sorted((float(s[i]), float(s[i + 1])) for i in order)
    return {"L": L, "sample_size": len(s), "gaps": gaps,
            "outer_gap": (float(s[-1]), float(s[0])) if len(s) else None}


def poincare_partial(G, z, L, policy=DEFAULT_POLICY):
    """Sum of |phi'(z)| over the ball of radius L and its outermost shell."""
    if L >= 1 and G.rank:
        check_off_limit_set(G, z, policy)
    b = build_ball(G, L, policy.cap)
    den = b.matrices[:, 1, 0] * z + b.matrices[:, 1, 1]
    if np.any(den == 0):
        raise NearLimitSet(f"{z!r} is a pole of a word in the ball", point=z)
    t = 1.0 / np.abs(den) ** 2
    return float(t.sum()), float(t[b.shell].sum())
