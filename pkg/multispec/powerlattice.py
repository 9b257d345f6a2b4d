"""Exact periodic points of the power map ``F_0(z) = (z_1^d, ..., z_n^d)``.

Every periodic point of ``F_0`` is a tuple of roots of unity and zeros. A
nonzero coordinate ``exp(2 pi i a/m)`` is stored as the integer pair
``(a, m)``, so that equality, periods and orbits are decided with integer
arithmetic only.

Examples
--------
    >>> [str(w) for w in per_set(2, 2)]
    ['1/3', '2/3']
    >>> pt = make_point([(1, 3), (0, 1)], d=2)
    >>> pt.period, pt.type_vector
    (2, (2, 1))
"""
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Tuple, Union

import numpy as np
import pandas as pd

from multispec.util.config import DEFAULT_CAPS
from multispec.util.errors import PeriodCapError
from multispec.util.util import parse_fraction

LOGGER = logging.getLogger(__name__)


class Zero:
    """The coordinate ``0``, fixed by ``z -> z^d``."""
    __slots__ = ()

    def __eq__(self, other):
        return isinstance(other, Zero)

    def __hash__(self):
        return hash('Zero')

    def __repr__(self):
        return 'Zero()'

    def __str__(self):
        return '0'

    def sort_key(self):
        return (0, Fraction(0))

    def step(self, d):
        return self

    def period(self, d):
        return 1

    def to_complex(self):
        return 0j


ZERO = Zero()


class Angle:
    """The root of unity ``exp(2 pi i a/m)``.

    The pair ``(a, m)`` is kept as given (typically ``m = d^p - 1``);
    equality and hashing use the reduced fraction, so ``Angle(0, 3)`` and
    ``Angle(0, 1)`` are the same coordinate.
    """
    __slots__ = ('a', 'm')

    def __init__(self, a, m):
        a, m = int(a), int(m)
        if m < 1:
            raise ValueError(f'modulus must be >= 1, got {m}')
        if not 0 <= a < m:
            raise ValueError(f'numerator must satisfy 0 <= a < m, got {a}/{m}')
        self.a = a
        self.m = m

    @property
    def fraction(self):
        return Fraction(self.a, self.m)

    def canonical(self):
        """Return the reduced pair ``(a, m)``."""
        g = gcd(self.a, self.m)
        return self.a // g, self.m // g

    def __eq__(self, other):
        return isinstance(other, Angle) and self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def __repr__(self):
        return f'Angle({self.a}, {self.m})'

    def __str__(self):
        a, m = self.canonical()
        return f'{a}/{m}'

    def sort_key(self):
        return (1, self.fraction)

    def step(self, d):
        """Image under ``z -> z^d``, kept at the same modulus."""
        return Angle(d * self.a % self.m, self.m)

    def period(self, d):
        """Least ``p`` with ``d^p a = a (mod m)``.

        Raises
        ------
        ValueError
            If the reduced modulus is not coprime to ``d`` (the point is only
            preperiodic).

        """
        _, m = self.canonical()
        if m == 1:
            return 1
        if gcd(d, m) != 1:
            raise ValueError(f'{self} is not periodic under z -> z^{d}')
        p, power = 1, d % m
        while power != 1:
            power = power * d % m
            p += 1
        return p

    def to_complex(self):
        a, m = self.canonical()
        if (4 * a) % m == 0:
            return (1 + 0j, 1j, -1 + 0j, -1j)[4 * a // m]
        # angle in (-pi, pi] for accuracy
        r = a if 2 * a <= m else a - m
        return complex(np.exp(2j * np.pi * r / m))


RootCoord = Union[Zero, Angle]


def as_coord(obj) -> RootCoord:
    """Build a :data:`RootCoord` from ``None``, ``0``, ``(a, m)``, ``"a/m"``
    or an existing coordinate."""
    if isinstance(obj, (Zero, Angle)):
        return obj
    if obj is None or (isinstance(obj, int) and obj == 0):
        return ZERO
    if isinstance(obj, str):
        obj = parse_fraction(obj)
        return ZERO if obj is None else Angle(*obj)
    a, m = obj
    return Angle(a, m)


def _lcm(values):
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out


@dataclass(frozen=True)
class RootPoint:
    """Periodic point of the power map of degree ``d``.

    Attributes
    ----------
    d : int
        Degree of the power map.
    coords : tuple of RootCoord
        One coordinate per dimension.
    period : int
        Least common multiple of the coordinate periods.
    type_vector : tuple of int
        Per-coordinate periods (the periodic type).
    """
    d: int
    coords: Tuple[RootCoord, ...]
    period: int = field(init=False, compare=False)
    type_vector: Tuple[int, ...] = field(init=False, compare=False)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f'degree d must be >= 2, got {self.d}')
        coords = tuple(as_coord(c) for c in self.coords)
        if not coords:
            raise ValueError('a point needs at least one coordinate')
        types = tuple(c.period(self.d) for c in coords)
        object.__setattr__(self, 'coords', coords)
        object.__setattr__(self, 'type_vector', types)
        object.__setattr__(self, 'period', _lcm(types))

    @property
    def n(self):
        return len(self.coords)

    def __str__(self):
        return '(' + ', '.join(str(c) for c in self.coords) + ')'

    def sort_key(self):
        return tuple(c.sort_key() for c in self.coords)

    def has_zero(self):
        return any(isinstance(c, Zero) for c in self.coords)

    def step(self):
        """Image under ``F_0``."""
        return RootPoint(self.d, tuple(c.step(self.d) for c in self.coords))

    def fractions(self):
        """Coordinates as exact ``"a/m"`` strings (``"0"`` for zero)."""
        return [str(c) for c in self.coords]

    def as_dict(self):
        return {'coords': self.fractions(), 'period': self.period,
                'type': list(self.type_vector)}


def make_point(coords, d):
    """Build a :class:`RootPoint` after validating every coordinate.

    Parameters
    ----------
    coords : sequence
        Items accepted by :func:`as_coord`, e.g. ``(1, 3)`` or ``"1/3"``.
    d : int
        Degree of the power map.

    Returns
    -------
    : RootPoint

    Raises
    ------
    ValueError
        If a modulus is not coprime to ``d``.

    """
    return RootPoint(d, tuple(as_coord(c) for c in coords))


def check_period_cap(d, p, caps=DEFAULT_CAPS):
    """Return ``d^p`` after checking it against the configured caps."""
    if p < 1:
        raise ValueError(f'period p must be >= 1, got {p}')
    if d < 2:
        raise ValueError(f'degree d must be >= 2, got {d}')
    if p > caps.max_period:
        raise PeriodCapError(f'period {p} exceeds max_period={caps.max_period}')
    dp = d ** p
    if dp > caps.max_dp:
        raise PeriodCapError(f'd^p = {d}^{p} exceeds max_dp={caps.max_dp}')
    return dp


def fix_set(d, p, caps=DEFAULT_CAPS):
    """Nonzero solutions of ``w^(d^p) = w``.

    Returns
    -------
    : list of Angle
        ``Angle(a, d^p - 1)`` for ``a = 0, ..., d^p - 2``.

    """
    modulus = check_period_cap(d, p, caps) - 1
    return [Angle(a, modulus) for a in range(modulus)]


def _exact_period_mask(d, p, modulus):
    a = np.arange(modulus, dtype=np.int64)
    mask = np.ones(modulus, dtype=bool)
    for k in range(1, p):
        if p % k == 0:
            # period divides k iff (d^k - 1) a = 0 mod (d^p - 1)
            mask &= (a % (modulus // (d ** k - 1))) != 0
    return mask


def per_set(d, p, caps=DEFAULT_CAPS):
    """Coordinates of exact period ``p`` under ``z -> z^d``.

    For ``p = 1`` the list starts with :data:`ZERO`.

    Returns
    -------
    : list of RootCoord

    """
    modulus = check_period_cap(d, p, caps) - 1
    mask = _exact_period_mask(d, p, modulus)
    out = [Angle(int(a), modulus) for a in np.flatnonzero(mask)]
    if p == 1:
        out.insert(0, ZERO)
    return out


def per_set_bound(d, p):
    """Lower bound ``d^p - d^[p/2]`` on the size of :func:`per_set`."""
    return d ** p - d ** (p // 2)


def partition_count(d, p, caps=DEFAULT_CAPS):
    """Return the sum of ``|per_set(d, k)|`` over the divisors ``k`` of ``p``.

    Equals ``d^p``, the number of solutions of ``w^(d^p) = w``.
    """
    return sum(len(per_set(d, k, caps)) for k in range(1, p + 1) if p % k == 0)


def point_period(pt: RootPoint):
    """Period of ``pt``: the lcm of its coordinate periods."""
    return _lcm(c.period(pt.d) for c in pt.coords)


def orbit_of(pt: RootPoint):
    """The ``F_0``-orbit of ``pt``.

    The orbit starts at its lexicographically least member (zeros first,
    then angles in increasing ``a/m``) and follows the dynamics.

    Returns
    -------
    : list of RootPoint
        ``pt.period`` pairwise distinct points.

    """
    orbit = [pt]
    for _ in range(pt.period - 1):
        orbit.append(orbit[-1].step())
    start = min(range(len(orbit)), key=lambda i: orbit[i].sort_key())
    return orbit[start:] + orbit[:start]


def orbit_key(pt: RootPoint):
    """Canonical representative of the orbit of ``pt``."""
    return orbit_of(pt)[0]


def same_orbit(a: RootPoint, b: RootPoint):
    """Exact test whether ``a`` and ``b`` lie in the same ``F_0``-orbit."""
    if a.d != b.d or a.n != b.n or a.period != b.period:
        return False
    return b in orbit_of(a)


def to_complex(pt: RootPoint):
    """Coordinates of ``pt`` as a complex vector (exact at quarter turns)."""
    return np.array([c.to_complex() for c in pt.coords], dtype=complex)


def residues(pt: RootPoint, modulus):
    """Integer residues of the coordinates at a common modulus.

    Parameters
    ----------
    pt : RootPoint
    modulus : int
        A multiple of every reduced coordinate modulus, e.g. ``d^p - 1``.

    Returns
    -------
    : list of int
        ``a * modulus / m`` per coordinate; ``-1`` marks a zero coordinate.

    """
    out = []
    for c in pt.coords:
        if isinstance(c, Zero):
            out.append(-1)
            continue
        a, m = c.canonical()
        if modulus % m:
            raise ValueError(f'modulus {modulus} is not a multiple of {m}')
        out.append(a * (modulus // m))
    return out


def s_set(d, p, n, caps=DEFAULT_CAPS):
    """Iterate over ``Per_p x Fix_p^(n-1)``, the candidate set of witness
    selection.

    Yields
    ------
    : RootPoint

    """
    first = [w for w in per_set(d, p, caps) if not isinstance(w, Zero)]
    rest = fix_set(d, p, caps)
    for w in first:
        for tail in itertools.product(rest, repeat=n - 1):
            yield RootPoint(d, (w,) + tail)


def _exact_point_counts(d, p, n):
    # points of C^n of exact period k under F_0, zeros included
    counts = {}
    for k in range(1, p + 1):
        total = d ** (k * n)
        counts[k] = total - sum(counts[j] for j in range(1, k) if k % j == 0)
    return counts


def lattice_summary(d, p, n=1, caps=DEFAULT_CAPS):
    """Counts of periodic coordinates and points for every period up to ``p``.

    Parameters
    ----------
    d : int
        Degree.
    p : int
        Largest period to tabulate.
    n : int, optional
        Dimension used for the point and orbit counts (default 1).

    Returns
    -------
    : DataFrame
        Columns ``period``, ``per``, ``fix``, ``per_bound``, ``points`` and
        ``orbits``.

    """
    check_period_cap(d, p, caps)
    points = _exact_point_counts(d, p, n)
    rows = []
    for k in range(1, p + 1):
        rows.append({'period': k,
                     'per': len(per_set(d, k, caps)),
                     'fix': d ** k - 1,
                     'per_bound': per_set_bound(d, k),
                     'points': points[k],
                     'orbits': points[k] // k})
    return pd.DataFrame(rows)
