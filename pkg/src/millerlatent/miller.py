"""Integer algebra of Miller indices for a cubic cell (a = b = c = 1).

A plane orientation is an integer triple ``(h, k, l)``. Triples are kept
in canonical form: components share no common factor and the first
nonzero component is positive, so ``(h, k, l)`` and ``(-h, -k, -l)``
name the same plane stack. The sign convention is a fixed choice of this
package, not a crystallographic standard.

Families ``{hkl}`` collect every orientation reachable through the 48
signed permutations of the cube, modulo that antipodal identification.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import NamedTuple

import numpy as np

from .errors import AllParallel, NonRationalIntercepts, NotationError, ZeroIndex

__all__ = [
    "MillerIndex",
    "PlaneFamily",
    "Intercepts",
    "canonicalize",
    "from_intercepts",
    "intercepts_of",
    "family_of",
    "signed_permutations",
    "enumerate_families",
    "parse_index",
    "parse_components",
    "parse_family",
    "format_index",
    "format_family",
]

DEFAULT_MAX_DENOMINATOR = 64


class MillerIndex(NamedTuple):
    h: int
    k: int
    l: int  # noqa: E741

    def __str__(self):
        return format_index(self)

    @property
    def max_component(self):
        return max(abs(self.h), abs(self.k), abs(self.l))

    def as_array(self):
        return np.array(self, dtype=float)

    def is_canonical(self):
        try:
            return canonicalize(self) == self
        except ZeroIndex:
            return False


class Intercepts(NamedTuple):
    """Axis intercepts in lattice units; ``math.inf`` marks a parallel axis."""

    x0: float
    y0: float
    z0: float


@dataclass(frozen=True)
class PlaneFamily:
    representative: MillerIndex
    members: frozenset

    def __str__(self):
        return format_family(self)

    def __contains__(self, m):
        return tuple(m) in self.members

    def __len__(self):
        return len(self.members)

    @property
    def max_component(self):
        return self.representative.max_component


def canonicalize(triple) -> MillerIndex:
    """Reduce an integer triple by its gcd and make the first nonzero entry positive."""
    h, k, l = (int(c) for c in triple)
    g = math.gcd(math.gcd(abs(h), abs(k)), abs(l))
    if g == 0:
        raise ZeroIndex("(0,0,0) is not a plane orientation")
    h, k, l = h // g, k // g, l // g
    first = next(c for c in (h, k, l) if c != 0)
    if first < 0:
        h, k, l = -h, -k, -l
    return MillerIndex(h, k, l)


def _as_fraction(x, max_denominator):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    f = Fraction(x).limit_denominator(max_denominator)
    if abs(float(f) - x) > 1e-9 * max(1.0, abs(x)):
        raise NonRationalIntercepts(
            f"reciprocal {x!r} has no rational form with denominator <= {max_denominator}"
        )
    return f


def from_intercepts(i, max_denominator=DEFAULT_MAX_DENOMINATOR) -> MillerIndex:
    """Miller index of the plane cutting the axes at ``i = (x0, y0, z0)``.

    Parameters
    ----------
    i : Intercepts or sequence of 3 numbers
        Positive intercepts; ``math.inf`` for an axis the plane never meets.
    max_denominator : int
        Bound used when rationalizing floating-point reciprocals.

    Returns
    -------
    MillerIndex
        Canonical index proportional to ``(1/x0, 1/y0, 1/z0)``.
    """
    i = Intercepts(*i)
    if all(math.isinf(x) for x in i):
        raise AllParallel("all three intercepts are infinite")
    recips = []
    for x in i:
        if isinstance(x, float) and math.isinf(x):
            recips.append(Fraction(0))
            continue
        if x <= 0 or (isinstance(x, float) and math.isnan(x)):
            raise ValueError(f"intercepts must be strictly positive or infinite, got {x!r}")
        if isinstance(x, (int, Fraction)):
            recips.append(1 / Fraction(x))
        else:
            recips.append(_as_fraction(1.0 / x, max_denominator))
    lcm = reduce(lambda a, b: a * b // math.gcd(a, b), (r.denominator for r in recips), 1)
    return canonicalize([int(r * lcm) for r in recips])


def intercepts_of(m) -> Intercepts:
    """Axis intercepts of the plane ``h x + k y + l z = 1``, exact where finite."""
    return Intercepts(*(Fraction(1, c) if c else math.inf for c in m))


@lru_cache(maxsize=None)
def signed_permutations():
    """The 48 signed permutation matrices of the cube, as a ``(48, 3, 3)`` int array."""
    mats = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            m = np.zeros((3, 3), dtype=int)
            for row, (col, s) in enumerate(zip(perm, signs)):
                m[row, col] = s
            mats.append(m)
    out = np.array(mats)
    out.setflags(write=False)
    return out


def family_of(m) -> PlaneFamily:
    """The cubic-symmetry class of ``m`` (closed under the 48 signed permutations)."""
    return _family_of(canonicalize(m))


@lru_cache(maxsize=4096)
def _family_of(m):
    images = signed_permutations() @ np.array(m)
    members = frozenset(canonicalize(v) for v in images)
    rep = MillerIndex(*sorted((abs(c) for c in m), reverse=True))
    return PlaneFamily(rep, members)


def enumerate_families(max_index):
    """Every family whose components are bounded by ``max_index``, low index first."""
    reps = []
    for h in range(1, max_index + 1):
        for k in range(0, h + 1):
            for l in range(0, k + 1):
                if math.gcd(math.gcd(h, k), l) == 1:
                    reps.append(MillerIndex(h, k, l))
    reps.sort(key=lambda r: (r.max_component, r))
    return [family_of(r) for r in reps]


def format_index(m, brackets="()"):
    parts = [str(c) for c in m]
    sep = "" if all(abs(c) < 10 for c in m) else ","
    return f"{brackets[0]}{sep.join(parts)}{brackets[1]}"


def format_family(f):
    return format_index(f.representative, "{}")


_BRACKETED = re.compile(r"^\s*([\(\{\[<])(.*?)([\)\}\]>])\s*$")
_COMPONENT = re.compile(r"-?\d̄?")


def _parse_components(body):
    body = body.strip()
    if re.search(r"[,\s]", body):
        tokens = [t for t in re.split(r"[,\s]+", body) if t]
        try:
            return [-int(t[:-1]) if t.endswith("\u0304") else int(t) for t in tokens]
        except ValueError:
            raise NotationError(f"bad index components {body!r}") from None
    if not re.fullmatch(r"(?:-?\d̄?)+", body):
        raise NotationError(f"bad index components {body!r}")
    out = []
    for tok in _COMPONENT.findall(body):
        if tok.endswith("̄"):  # combining overbar
            out.append(-int(tok[:-1]))
        else:
            out.append(int(tok))
    return out


def _parse(text):
    m = _BRACKETED.match(text)
    if m is None:
        raise NotationError(f"expected '(hkl)' or '{{hkl}}', got {text!r}")
    comps = _parse_components(m.group(2))
    if len(comps) != 3:
        raise NotationError(f"expected three components in {text!r}")
    return m.group(1), comps


def parse_index(text) -> MillerIndex:
    """Parse ``"(1-10)"``, ``"(1,-1,0)"`` or ``"{111}"`` into a canonical index."""
    _, comps = _parse(text)
    try:
        return canonicalize(comps)
    except ZeroIndex as exc:
        raise NotationError(str(exc)) from None


def parse_components(text) -> tuple:
    """Like :func:`parse_index` but keeps sign and common factors as written."""
    _, comps = _parse(text)
    if not any(comps):
        raise NotationError("(000) is not a plane")
    return tuple(comps)


def parse_family(text) -> PlaneFamily:
    return family_of(parse_index(text))
