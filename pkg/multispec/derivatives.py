"""Closed-form derivatives of diagonal cycle-Jacobian entries at the power map.

For a periodic point ``w0`` of ``F_0`` of period ``p`` and a perturbation
``F_0 + t P_{m,I}`` (``z^I`` added to coordinate ``m``), ``rho_k(t)`` is the
``(k, k)`` entry of the Jacobian of the ``p``-th iterate at the continuation
of ``w0``. Its derivative at ``t = 0`` has a closed form:

 - affine: zero for ``m != k``; for ``m = k``
   ``(i_k d^(p-1) - d^p) * sum_i (w0^(I_k))^(d^i) * w_k^(d^i (i_k - d))``
 - projective, direction ``m = 0``:
   ``-i_k d^(p-1) * sum_i (w0^I)^(d^i)`` with ``I`` the affine part

All powers of roots of unity are evaluated as integer residues modulo
``d^p - 1`` before a single exponential. The finite difference oracles
re-solve the cycle with :func:`multispec.continuation.solve_cycle`.
"""
import logging
from dataclasses import dataclass
from math import gcd
from typing import Dict, Tuple

import numpy as np

from multispec import continuation
from multispec.combinatorics import AFFINE, PROJECTIVE, MultiIndex, is_admissible
from multispec.powerlattice import Angle, RootPoint, residues, to_complex
from multispec.util.config import DEFAULT_CAPS, DEFAULT_TOLERANCES

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class DerivativeQuery:
    """One derivative ``d/dt rho_{k,w0}(F_0 + t P_{m,I})`` at ``t = 0``.

    Attributes
    ----------
    d, n, p : int
        Degree, dimension and period of ``w0``.
    k : int
        Row coordinate, ``1 <= k <= n``.
    m : int
        Direction coordinate, ``1..n`` (affine) or ``0..n`` (projective).
    I : MultiIndex
        Exponent of the perturbing monomial; need not be admissible.
    w0 : RootPoint
        Periodic point without zero coordinates.
    """
    d: int
    n: int
    p: int
    k: int
    m: int
    I: MultiIndex
    w0: RootPoint

    def __post_init__(self):
        if self.w0.d != self.d or self.w0.n != self.n:
            raise ValueError(f'point {self.w0} is not a degree {self.d} point '
                             f'of C^{self.n}')
        if self.w0.has_zero():
            raise ValueError(f'point {self.w0} has a zero coordinate')
        if self.p != self.w0.period:
            raise ValueError(f'p={self.p} differs from the period '
                             f'{self.w0.period} of {self.w0}')
        if not 1 <= self.k <= self.n:
            raise ValueError(f'row k={self.k} out of range 1..{self.n}')
        lo = 0 if self.setting == PROJECTIVE else 1
        if not lo <= self.m <= self.n:
            raise ValueError(f'direction m={self.m} out of range {lo}..{self.n}')
        if self.I.n != self.n:
            raise ValueError(f'index {self.I} does not fit dimension {self.n}')

    @property
    def setting(self):
        return self.I.setting

    @classmethod
    def make(cls, d, k, m, I, w0, p=None):
        """Build a query, taking ``n`` from ``w0`` and ``p`` from its period."""
        return cls(d=d, n=w0.n, p=w0.period if p is None else p, k=k, m=m,
                   I=I, w0=w0)


class SparsePoly:
    """Polynomial in ``n`` variables stored as exponent vector -> coefficient.

    The stored coefficients are exact (integers for the polynomials of
    :func:`q_poly`); ``scale`` is a common prefactor kept apart from them.

    Parameters
    ----------
    terms : dict
        Maps exponent tuples to coefficients; zero coefficients are dropped.
    n : int
        Number of variables.
    scale : int or complex, optional
        Prefactor multiplying every coefficient (default 1).
    """

    def __init__(self, terms: Dict[Tuple[int, ...], complex], n, scale=1):
        self.n = int(n)
        self.scale = scale
        self.terms = {}
        for exps, coeff in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.n or any(e < 0 for e in exps):
                raise ValueError(f'bad exponent vector {exps} for {n} variables')
            if coeff != 0:
                self.terms[exps] = coeff

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f'SparsePoly({len(self.terms)} terms, scale={self.scale})'

    def is_zero(self):
        return self.scale == 0 or not self.terms

    def support(self):
        """Exponent vectors with nonzero coefficient."""
        if self.scale == 0:
            return frozenset()
        return frozenset(self.terms)

    def degree(self, j):
        """Degree in the variable ``z_j`` (1-based); ``-1`` for the zero
        polynomial."""
        if self.is_zero():
            return -1
        return max(e[j - 1] for e in self.terms)

    def degrees(self):
        return tuple(self.degree(j) for j in range(1, self.n + 1))

    def evaluate(self, z):
        """Evaluate at a complex point."""
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.n,):
            raise ValueError(f'expected {self.n} coordinates, got {z.shape}')
        if self.is_zero():
            return 0j
        exps = np.array(list(self.terms), dtype=np.int64)
        coeffs = np.array(list(self.terms.values()), dtype=complex)
        return complex(self.scale * np.sum(coeffs * np.prod(z ** exps, axis=1)))

    def evaluate_angles(self, pt: RootPoint):
        """Evaluate at an exact periodic point using residue arithmetic."""
        if pt.n != self.n:
            raise ValueError(f'expected {self.n} coordinates, got {pt.n}')
        if self.is_zero():
            return 0j
        modulus = _common_modulus(pt)
        res = residues(pt, modulus)
        total = 0j
        for exps, coeff in self.terms.items():
            if any(r < 0 and e > 0 for r, e in zip(res, exps)):
                continue
            angle = sum(e * r for r, e in zip(res, exps) if r >= 0)
            total += coeff * _unit(angle, modulus)
        return complex(self.scale * total)

    def as_dict(self):
        terms = [[list(e), c] for e, c in sorted(self.terms.items())]
        return {'n': self.n, 'scale': self.scale, 'terms': terms}


def _common_modulus(pt):
    out = 1
    for c in pt.coords:
        if isinstance(c, Angle):
            m = c.canonical()[1]
            out = out * m // gcd(out, m)
    return out


def _unit(exponent, modulus):
    return Angle(exponent % modulus, modulus).to_complex()


def _exact_sum(modulus, res, terms):
    # terms: iterable of (coefficient, exponent vector over the residues)
    total = 0j
    for coeff, exps in terms:
        angle = sum(e * r for e, r in zip(exps, res))
        total += coeff * _unit(angle, modulus)
    return total


def affine_terms(d, p, k, I_aff):
    """Exponent vectors (before reduction) of the ``m = k`` sum."""
    ik = I_aff[k - 1]
    for i in range(p):
        exps = [ij * d ** i for ij in I_aff]
        exps[k - 1] = d ** i * (ik - d)
        yield exps


def projective_terms(d, p, I_aff):
    """Exponent vectors (before reduction) of the projective sum, shared by
    every row ``k``."""
    for i in range(p):
        yield [ij * d ** i for ij in I_aff]


def _point_residues(q):
    modulus = q.d ** q.p - 1
    return modulus, residues(q.w0, modulus)


def partial_rho_affine(q: DerivativeQuery):
    """Closed-form derivative of ``rho_k`` in the affine direction
    ``P_{m,I}``.

    Parameters
    ----------
    q : DerivativeQuery
        Query with an affine multi-index.

    Returns
    -------
    : complex
        Zero when ``m != k``.

    """
    if q.setting != AFFINE:
        raise ValueError('partial_rho_affine needs an affine multi-index')
    return _partial_rho_mk(q, q.I.entries)


def _partial_rho_mk(q, I_aff):
    if q.m != q.k:
        return 0j
    d, p, k = q.d, q.p, q.k
    prefactor = I_aff[k - 1] * d ** (p - 1) - d ** p
    modulus, res = _point_residues(q)
    terms = ((1, exps) for exps in affine_terms(d, p, k, I_aff))
    return complex(prefactor * _exact_sum(modulus, res, terms))


def partial_rho_projective(q: DerivativeQuery):
    """Closed-form derivative of ``rho_k`` in the projective direction
    ``P_{m,I}`` with ``|I| = d``.

    ``m = 0`` perturbs the homogenizing coordinate; in the chart ``z_0 = 1``
    this is the rational map ``F / (1 + t z^I)``.

    Returns
    -------
    : complex
        Zero when ``0 < m != k`` or when ``m = 0`` and ``i_k = 0``.

    """
    if q.setting != PROJECTIVE:
        raise ValueError('partial_rho_projective needs a projective multi-index')
    if q.I.degree != q.d:
        raise ValueError(f'projective index {q.I} must have degree {q.d}')
    I_aff = q.I.affine()
    if q.m != 0:
        return _partial_rho_mk(q, I_aff)
    d, p, k = q.d, q.p, q.k
    ik = I_aff[k - 1]
    if ik == 0:
        return 0j
    modulus, res = _point_residues(q)
    terms = ((1, exps) for exps in projective_terms(d, p, I_aff))
    return complex(-ik * d ** (p - 1) * _exact_sum(modulus, res, terms))


def partial_rho(q: DerivativeQuery):
    """Dispatch to :func:`partial_rho_affine` or
    :func:`partial_rho_projective`."""
    if q.setting == PROJECTIVE:
        return partial_rho_projective(q)
    return partial_rho_affine(q)


def q_poly(d, p, k, I: MultiIndex, setting=None, m=None):
    """The polynomial ``Q`` with ``partial_rho = w_k^(-d^(p-1)) Q(w0)``.

    The ``z_k`` exponents are reduced modulo ``d^p - 1`` into
    ``[0, d^p - 2]`` (valid since ``w_k^(d^p - 1) = 1``); the other
    exponents are ``i_j d^i`` and stay unreduced.

    Parameters
    ----------
    d, p, k : int
        Degree, period and row coordinate (1-based).
    I : MultiIndex
        Admissible multi-index.
    setting : str, optional
        Defaults to the setting of ``I``.
    m : int, optional
        Direction coordinate; defaults to ``k``.

    Returns
    -------
    : SparsePoly
        Integer coefficients; ``scale`` holds the prefactor.

    """
    setting = I.setting if setting is None else setting
    if setting != I.setting:
        raise ValueError(f'index {I} is not a {setting} index')
    if not is_admissible(I, d):
        raise ValueError(f'multi-index {I} is not admissible for d={d}')
    m = k if m is None else m
    I_aff = I.affine()
    n = len(I_aff)
    if not 1 <= k <= n:
        raise ValueError(f'row k={k} out of range 1..{n}')
    modulus = d ** p - 1
    shift = d ** (p - 1)
    terms = {}
    if m == k:
        scale = I_aff[k - 1] * shift - d ** p
        exp_lists = affine_terms(d, p, k, I_aff)
    elif m == 0 and setting == PROJECTIVE:
        scale = -I_aff[k - 1] * shift
        exp_lists = projective_terms(d, p, I_aff)
    else:
        return SparsePoly({}, n, scale=0)
    for exps in exp_lists:
        exps = list(exps)
        exps[k - 1] = (exps[k - 1] + shift) % modulus
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + 1
    return SparsePoly(terms, n, scale=scale)


def expected_q_degrees(d, p, k, I: MultiIndex, setting=None, m=None):
    """Per-variable degrees of :func:`q_poly` predicted in closed form.

    The prediction needs ``p >= 2``, and ``p >= 3`` for the homogenizing
    direction ``m = 0``, where the top exponent would otherwise wrap around
    ``d^p - 1``.

    Returns
    -------
    : tuple of int or None
        ``None`` when ``Q`` vanishes identically.

    """
    setting = I.setting if setting is None else setting
    m = k if m is None else m
    if p < _min_degree_period(setting, m):
        raise ValueError(f'no closed form degrees for p={p} in direction m={m}')
    I_aff = I.affine()
    ik = I_aff[k - 1]
    degs = [ij * d ** (p - 1) for ij in I_aff]
    if m == k:
        if ik <= d - 2:
            degs[k - 1] = (ik + 1) * d ** (p - 1) - 1
        else:
            degs[k - 1] = d ** (p - 1) - 1
    elif m == 0 and setting == PROJECTIVE and ik != 0:
        if ik != d - 1:
            degs[k - 1] = (ik + 1) * d ** (p - 1)
        else:
            degs[k - 1] = (d - 1) * d ** (p - 2) + d ** (p - 1)
    else:
        return None
    return tuple(degs)


def _min_degree_period(setting, m):
    return 3 if setting == PROJECTIVE and m == 0 else 2


def q_monomials_disjoint(A: SparsePoly, B: SparsePoly):
    """True iff no monomial of ``A`` is proportional to a monomial of ``B``."""
    return A.support().isdisjoint(B.support())


def is_s_polynomial(P: SparsePoly, s):
    """True iff the degree of ``P`` in every variable is at most ``s``."""
    return all(deg <= s for deg in P.degrees())


def richardson(f, h):
    """Richardson extrapolation of central differences with steps ``h``
    and ``h/2``.

    Parameters
    ----------
    f : callable
        Function of a real step ``t``; may return arrays.
    h : float

    Returns
    -------
    : complex or ndarray

    """
    def central(step):
        return (np.asarray(f(step)) - np.asarray(f(-step))) / (2 * step)
    coarse = central(h)
    fine = central(h / 2)
    out = (4 * fine - coarse) / 3
    return complex(out) if np.ndim(out) == 0 else out


def perturbed_family(F, q: DerivativeQuery):
    """The map ``t -> F + t P_{m,I}`` of a query as a callable."""
    if q.setting == PROJECTIVE:
        if q.m == 0:
            return lambda t: continuation.ChartPerturbation(F, q.I, t)
        I_aff = MultiIndex(q.I.affine(), AFFINE)
        return lambda t: continuation.perturb(F, q.m, I_aff, t)
    return lambda t: continuation.perturb(F, q.m, q.I, t)


def fd_partial_rho(q: DerivativeQuery, F=None, h=None, extrapolate=False,
                   tolerances=DEFAULT_TOLERANCES, caps=DEFAULT_CAPS):
    """Finite difference oracle for :func:`partial_rho`.

    Each evaluation re-solves the periodic point of ``F + t P_{m,I}`` by
    Newton's method from ``w0`` and reads the ``(k, k)`` entry of the cycle
    Jacobian.

    Parameters
    ----------
    q : DerivativeQuery
    F : PolyMapDense, optional
        Base map; defaults to the power map.
    h : float, optional
        Step; defaults to ``tolerances.fd_step``.
    extrapolate : bool, optional
        Use Richardson extrapolation with steps ``h`` and ``h/2``.

    Returns
    -------
    : complex

    Raises
    ------
    ConvergenceError
        If Newton's method fails for a perturbed map.

    """
    F = continuation.power_map(q.d, q.n) if F is None else F
    h = tolerances.fd_step if h is None else h
    family = perturbed_family(F, q)
    seed = to_complex(q.w0)

    def rho(t):
        track = continuation.solve_cycle(family(t), q.p, seed,
                                         tolerances=tolerances, caps=caps)
        return track.cycle_jacobian[q.k - 1, q.k - 1]

    if extrapolate:
        return richardson(rho, h)
    return complex((rho(h) - rho(-h)) / (2 * h))


def cycle_velocity(d, p, k, I: MultiIndex, w0: RootPoint, i=0):
    """Closed-form ``t``-derivative of the ``k``-th coordinate of the orbit
    point ``F^i(w0)`` under ``F_0 + t P_{k,I}``.

    Other coordinates do not move to first order.

    Returns
    -------
    : complex

    """
    if I.setting != AFFINE:
        raise ValueError('cycle_velocity needs an affine multi-index')
    if w0.has_zero():
        raise ValueError(f'point {w0} has a zero coordinate')
    if p != w0.period:
        raise ValueError(f'p={p} differs from the period {w0.period}')
    modulus = d ** p - 1
    res = residues(w0, modulus)
    terms = []
    for s in range(p):
        exps = [ij * d ** (s + i) for ij in I.entries]
        exps[k - 1] += d ** i - d ** (s + i + 1)
        terms.append((d ** (p - s - 1), exps))
    return complex(_exact_sum(modulus, res, terms) / (1 - d ** p))


def fd_cycle_velocity(d, p, k, I: MultiIndex, w0: RootPoint, i=0, F=None,
                      h=None, tolerances=DEFAULT_TOLERANCES, caps=DEFAULT_CAPS):
    """Finite difference oracle for :func:`cycle_velocity`.

    Returns
    -------
    : ndarray of complex
        Velocity of all coordinates of the ``i``-th orbit point.

    """
    F = continuation.power_map(d, w0.n) if F is None else F
    h = tolerances.fd_step if h is None else h
    seed = to_complex(w0)

    def position(t):
        track = continuation.solve_cycle(continuation.perturb(F, k, I, t), p,
                                         seed, tolerances=tolerances, caps=caps)
        return track.points[i % p]

    return (position(h) - position(-h)) / (2 * h)


def derivative_report(q: DerivativeQuery, fd_check=False,
                      tolerances=DEFAULT_TOLERANCES, caps=DEFAULT_CAPS):
    """Value, ``Q`` degrees and optional finite difference delta of a query.

    Returns
    -------
    : dict

    """
    value = partial_rho(q)
    report = {'value': value, 'setting': q.setting, 'k': q.k, 'm': q.m,
              'index': list(q.I.entries), 'point': q.w0.fractions(),
              'p': q.p}
    if q.p >= _min_degree_period(q.setting, q.m) and is_admissible(q.I, q.d):
        Q = q_poly(q.d, q.p, q.k, q.I, m=q.m)
        report['q_degrees'] = None if Q.is_zero() else list(Q.degrees())
        report['q_expected_degrees'] = expected_q_degrees(q.d, q.p, q.k, q.I,
                                                          m=q.m)
        report['q_terms'] = len(Q)
    if fd_check:
        fd = fd_partial_rho(q, tolerances=tolerances, caps=caps,
                            extrapolate=True)
        report['fd_value'] = fd
        report['fd_delta'] = abs(fd - value)
    LOGGER.debug('derivative %s', report)
    return report
