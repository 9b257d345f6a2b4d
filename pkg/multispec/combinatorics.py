"""Dimension formulas and multi-indices of monomial perturbation directions.

A perturbation direction ``P_{m,I}`` adds the monomial ``z^I`` to the
``m``-th coordinate of a map. In the affine setting ``I`` has ``n`` entries
with ``|I| <= d``; in the projective setting ``I`` has ``n + 1`` entries
``(i_0, i_1, ..., i_n)`` with ``|I| = d``.

Examples
--------
    >>> space_dims(2, 2).N_dn
    3
    >>> [I.entries for I in enumerate_admissible(2, 2)]
    [(1, 0), (0, 1), (1, 1)]

Coordinates ``k`` and ``m`` are 1-based, as in ``z_1, ..., z_n``; the
projective direction ``m = 0`` acts on the homogenizing coordinate.
"""
import itertools
from dataclasses import dataclass
from math import comb
from typing import Tuple

import numpy as np

AFFINE = 'affine'
PROJECTIVE = 'projective'
SETTINGS = (AFFINE, PROJECTIVE)


def _check_dn(d, n):
    if int(d) != d or d < 2:
        raise ValueError(f'degree d must be an integer >= 2, got {d}')
    if int(n) != n or n < 1:
        raise ValueError(f'dimension n must be an integer >= 1, got {n}')


def _check_setting(setting):
    if setting not in SETTINGS:
        raise ValueError(f'setting must be one of {SETTINGS}, got {setting!r}')


@dataclass(frozen=True)
class SpaceDims:
    """Dimensions attached to degree ``d`` endomorphisms of ``C^n``.

    Attributes
    ----------
    d : int
        Degree.
    n : int
        Ambient dimension.
    N_dn : int
        ``binom(d+n, n) - n - 1``, the number of admissible directions per
        coordinate.
    affine_moduli_dim : int
        ``n * N_dn``.
    proj_moduli_dim : int
        ``(n + 1) * N_dn``.
    coeff_count : int
        ``n * binom(d+n, n)``, coefficients of a dense map.
    """
    d: int
    n: int
    N_dn: int
    affine_moduli_dim: int
    proj_moduli_dim: int
    coeff_count: int

    def as_dict(self):
        return {'d': self.d, 'n': self.n, 'N_dn': self.N_dn,
                'affine_moduli_dim': self.affine_moduli_dim,
                'proj_moduli_dim': self.proj_moduli_dim,
                'coeff_count': self.coeff_count}


@dataclass(frozen=True)
class MultiIndex:
    """Exponent vector of a monomial perturbation direction.

    Attributes
    ----------
    entries : tuple of int
        ``(i_1, ..., i_n)`` (affine) or ``(i_0, i_1, ..., i_n)`` (projective).
    setting : str
        ``'affine'`` or ``'projective'``.
    """
    entries: Tuple[int, ...]
    setting: str = AFFINE

    def __post_init__(self):
        _check_setting(self.setting)
        entries = tuple(int(i) for i in self.entries)
        if any(i < 0 for i in entries):
            raise ValueError(f'multi-index entries must be >= 0, got {entries}')
        if self.setting == PROJECTIVE and len(entries) < 2:
            raise ValueError('a projective multi-index needs n + 1 >= 2 entries')
        if not entries:
            raise ValueError('a multi-index needs at least one entry')
        object.__setattr__(self, 'entries', entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, item):
        return self.entries[item]

    def __str__(self):
        return '(' + ','.join(str(i) for i in self.entries) + ')'

    @property
    def degree(self):
        return sum(self.entries)

    @property
    def n(self):
        """Ambient dimension of the index."""
        if self.setting == PROJECTIVE:
            return len(self.entries) - 1
        return len(self.entries)

    def affine(self):
        """Exponents of ``z_1, ..., z_n`` (the chart ``z_0 = 1``)."""
        if self.setting == PROJECTIVE:
            return self.entries[1:]
        return self.entries

    def monomial(self, z):
        """Evaluate ``z^I`` at a point of ``C^n``.

        Parameters
        ----------
        z : array_like of complex
            Point with ``n`` coordinates; a projective index is evaluated in
            the chart ``z_0 = 1``.

        Returns
        -------
        : complex

        """
        z = np.asarray(z, dtype=complex)
        exps = np.asarray(self.affine())
        if z.shape != exps.shape:
            raise ValueError(f'point has {z.size} coordinates, '
                             f'index {self} needs {exps.size}')
        return complex(np.prod(z ** exps))

    def as_dict(self):
        return {'entries': list(self.entries), 'setting': self.setting}


def space_dims(d, n):
    """Dimension formulas for degree ``d`` maps of ``C^n``.

    Parameters
    ----------
    d : int
        Degree, at least 2.
    n : int
        Dimension, at least 1.

    Returns
    -------
    : SpaceDims

    """
    _check_dn(d, n)
    monomials = comb(d + n, n)
    N_dn = monomials - n - 1
    return SpaceDims(d=d, n=n, N_dn=N_dn, affine_moduli_dim=n * N_dn,
                     proj_moduli_dim=(n + 1) * N_dn,
                     coeff_count=n * monomials)


def is_admissible(I: MultiIndex, d):
    """Decide whether ``I`` indexes a direction of the normalized family.

    Affine: ``|I| <= d``, ``I`` nonzero and no entry equal to ``d``.
    Projective: ``|I| = d`` and no entry equal to ``d``.
    """
    if any(i == d for i in I.entries):
        return False
    if I.setting == PROJECTIVE:
        return I.degree == d
    return 0 < I.degree <= d


def _graded_key(affine_entries):
    # ascending total degree, then lexicographically descending entries
    return (sum(affine_entries), tuple(-i for i in affine_entries))


def all_multi_indices(d, n, setting=AFFINE):
    """Every multi-index of the setting, admissible or not, in graded
    lexicographic order.

    The order is ascending total degree of the affine part followed by
    lexicographically descending entries; projective indices are ordered by
    their affine part.

    Returns
    -------
    : list of MultiIndex

    """
    _check_dn(d, n)
    _check_setting(setting)
    parts = [e for e in itertools.product(range(d + 1), repeat=n)
             if sum(e) <= d]
    parts.sort(key=_graded_key)
    if setting == AFFINE:
        return [MultiIndex(e, AFFINE) for e in parts]
    return [MultiIndex((d - sum(e),) + e, PROJECTIVE) for e in parts]


def enumerate_admissible(d, n, setting=AFFINE):
    """Admissible multi-indices in graded lexicographic order.

    Parameters
    ----------
    d : int
        Degree, at least 2.
    n : int
        Dimension, at least 1.
    setting : str, optional
        ``'affine'`` (default) or ``'projective'``.

    Returns
    -------
    : list of MultiIndex
        Exactly ``N_dn`` indices.

    """
    return [I for I in all_multi_indices(d, n, setting) if is_admissible(I, d)]


def drop_k(I: MultiIndex, k):
    """Return ``I_k``, the affine index ``I`` with its ``k``-th entry zeroed.

    Parameters
    ----------
    I : MultiIndex
        Affine multi-index.
    k : int
        Coordinate, ``1 <= k <= n``.

    Returns
    -------
    : MultiIndex

    """
    if I.setting != AFFINE:
        raise ValueError('drop_k needs an affine multi-index')
    if not 1 <= k <= len(I):
        raise ValueError(f'coordinate k={k} out of range 1..{len(I)}')
    entries = list(I.entries)
    entries[k - 1] = 0
    return MultiIndex(tuple(entries), AFFINE)


def projective_lift(I: MultiIndex, d):
    """Return ``(d - |I|, I)``, the projective index with affine part ``I``."""
    if I.setting != AFFINE:
        raise ValueError('projective_lift needs an affine multi-index')
    if I.degree > d:
        raise ValueError(f'|I| = {I.degree} exceeds the degree {d}')
    return MultiIndex((d - I.degree,) + I.entries, PROJECTIVE)


def affine_part(I: MultiIndex):
    """Return the affine part ``(i_1, ..., i_n)`` of a projective index."""
    if I.setting != PROJECTIVE:
        raise ValueError('affine_part needs a projective multi-index')
    return MultiIndex(I.entries[1:], AFFINE)
