"""Numerical engine: dense polynomial maps, cycles and their continuation.

The module provides

 - :class:`PolyMapDense`, a polynomial self-map of ``C^n`` with analytic
   Jacobian, and constructors for the families used elsewhere
 - :func:`solve_cycle`, Newton's method for ``F^p(z) = z``
 - :func:`track_path`, predictor-corrector continuation of a cycle along a
   discretized path of parameters with eigenvalue branch matching
 - :func:`rank_certificate`, the singular value spectrum of the finite
   difference Jacobian of multipliers in all admissible directions
 - :func:`multiplier_spectrum` and :func:`regularity_probe`

Examples
--------
Fixed point of ``z^2 + 0.1``:

    >>> track = solve_cycle(unicritical(0.1), 1, [0.1])
    >>> track.points[0]
    array([0.11270167+0.j])

"""
import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import pandas as pd
from scipy import linalg, optimize

from multispec.combinatorics import (AFFINE, MultiIndex, enumerate_admissible,
                                     space_dims)
from multispec.powerlattice import (ZERO, RootPoint, fix_set, orbit_key,
                                    to_complex)
from multispec.util.config import DEFAULT_CAPS, DEFAULT_TOLERANCES
from multispec.util.errors import (ConvergenceError, EigenvalueCollisionError,
                                   ParabolicCycleError)
from multispec.util.util import parse_complex

LOGGER = logging.getLogger(__name__)

# trust radius of a corrector, relative to 1 + |z|
TRUST = 0.05
CORRECTOR_ITERATIONS = 8


class PolyMapDense:
    """Polynomial self-map of ``C^n`` stored densely over its monomials.

    Parameters
    ----------
    exponents : array_like of int, shape (T, n)
        Exponent vector of each monomial.
    coeffs : array_like of complex, shape (n, T)
        ``coeffs[i, t]`` multiplies monomial ``t`` in coordinate ``i``.
    d : int, optional
        Degree; defaults to the largest total degree present.

    Attributes
    ----------
    n : int
    d : int
    """

    def __init__(self, exponents, coeffs, d=None):
        exponents = np.array(exponents, dtype=np.int64, ndmin=2)
        coeffs = np.array(coeffs, dtype=complex, ndmin=2)
        if exponents.shape[1] != coeffs.shape[0]:
            raise ValueError(f'{coeffs.shape[0]} coordinates but exponent '
                             f'vectors of length {exponents.shape[1]}')
        if exponents.shape[0] != coeffs.shape[1]:
            raise ValueError(f'{exponents.shape[0]} monomials but '
                             f'{coeffs.shape[1]} coefficient columns')
        if np.any(exponents < 0):
            raise ValueError('exponents must be non-negative')
        self.exponents = exponents
        self.coeffs = coeffs
        self.exponents.setflags(write=False)
        self.coeffs.setflags(write=False)
        self.n = exponents.shape[1]
        top = int(exponents.sum(axis=1).max()) if exponents.size else 0
        self.d = top if d is None else int(d)

    def __repr__(self):
        return f'PolyMapDense(n={self.n}, d={self.d}, terms={len(self.exponents)})'

    def __call__(self, z):
        return self.evaluate(z)

    def _point(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.n,):
            raise ValueError(f'expected a point of C^{self.n}, got shape {z.shape}')
        return z

    def monomials(self, z):
        return np.prod(self._point(z) ** self.exponents, axis=1)

    def evaluate(self, z):
        """Value of the map at ``z``."""
        return self.coeffs @ self.monomials(z)

    def jacobian(self, z):
        """Analytic Jacobian matrix at ``z``."""
        z = self._point(z)
        jac = np.empty((self.n, self.n), dtype=complex)
        for j in range(self.n):
            lowered = self.exponents.copy()
            lowered[:, j] = np.maximum(lowered[:, j] - 1, 0)
            dmono = self.exponents[:, j] * np.prod(z ** lowered, axis=1)
            jac[:, j] = self.coeffs @ dmono
        return jac

    def terms(self):
        """Nonzero terms as ``{coordinate: {exponents: coefficient}}``."""
        out = {i: {} for i in range(1, self.n + 1)}
        for t, exps in enumerate(self.exponents):
            for i in range(self.n):
                if self.coeffs[i, t] != 0:
                    out[i + 1][tuple(int(e) for e in exps)] = self.coeffs[i, t]
        return out

    def as_dict(self):
        return {'n': self.n, 'd': self.d,
                'terms': {str(i): [[list(e), c] for e, c in sorted(t.items())]
                          for i, t in self.terms().items()}}


def eval_map(F, z):
    """Evaluate ``F`` at ``z``.

    Raises
    ------
    ValueError
        On a dimension mismatch.

    """
    return F.evaluate(z)


def from_terms(n, terms, d=None):
    """Build a map from per-coordinate term dictionaries.

    Parameters
    ----------
    n : int
        Dimension.
    terms : sequence of dict
        ``terms[i]`` maps exponent tuples to the coefficients of coordinate
        ``i + 1``.

    Returns
    -------
    : PolyMapDense

    """
    if len(terms) != n:
        raise ValueError(f'expected {n} coordinate term lists, got {len(terms)}')
    keys = sorted({tuple(int(e) for e in exps) for t in terms for exps in t})
    if not keys:
        keys = [(0,) * n]
    index = {k: i for i, k in enumerate(keys)}
    coeffs = np.zeros((n, len(keys)), dtype=complex)
    for i, t in enumerate(terms):
        for exps, c in t.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise ValueError(f'exponent {exps} does not fit dimension {n}')
            coeffs[i, index[exps]] += complex(c)
    return PolyMapDense(keys, coeffs, d=d)


def _unit(n, j):
    e = [0] * n
    e[j] = 1
    return tuple(e)


def power_map(d, n):
    """The power map ``F_0(z) = (z_1^d, ..., z_n^d)``."""
    space_dims(d, n)
    return from_terms(n, [{tuple(d * e for e in _unit(n, i)): 1}
                          for i in range(n)], d=d)


def product_map(cs, d=2):
    """The product map ``F_c(z) = (z_1^d + c_1, ..., z_n^d + c_n)``."""
    cs = [complex(c) for c in np.ravel(cs)]
    n = len(cs)
    terms = []
    for i, c in enumerate(cs):
        t = {tuple(d * e for e in _unit(n, i)): 1}
        if c != 0:
            t[(0,) * n] = c
        terms.append(t)
    return from_terms(n, terms, d=d)


def unicritical(c, d=2):
    """The one-dimensional map ``z^d + c``."""
    return product_map([c], d=d)


def perturb(F: PolyMapDense, m, I: MultiIndex, t):
    """Return ``F + t P_{m,I}``: ``t z^I`` added to coordinate ``m``.

    Parameters
    ----------
    F : PolyMapDense
    m : int
        Coordinate, ``1 <= m <= n``.
    I : MultiIndex
        Affine multi-index.
    t : complex

    """
    if I.setting != AFFINE:
        raise ValueError('perturb needs an affine multi-index')
    if not 1 <= m <= F.n or len(I) != F.n:
        raise ValueError(f'direction ({m}, {I}) does not fit C^{F.n}')
    exps = [tuple(int(e) for e in row) for row in F.exponents]
    coeffs = np.array(F.coeffs, dtype=complex)
    if I.entries in exps:
        col = exps.index(I.entries)
    else:
        exps.append(I.entries)
        coeffs = np.hstack([coeffs, np.zeros((F.n, 1), dtype=complex)])
        col = len(exps) - 1
    coeffs[m - 1, col] += t
    return PolyMapDense(exps, coeffs, d=max(F.d, I.degree))


class ChartPerturbation:
    """Perturbation of the homogenizing coordinate, seen in the chart
    ``z_0 = 1``.

    Adding ``t Z^I`` to the ``0``-th coordinate of the homogenization of
    ``F`` gives the rational map ``F(z) / (1 + t z^I)`` on ``C^n``.

    Parameters
    ----------
    F : PolyMapDense
    I : MultiIndex
        Projective (or affine) index; only its affine part enters.
    t : complex
    """

    def __init__(self, F, I: MultiIndex, t):
        self.F = F
        self.n = F.n
        self.d = F.d
        self.exps = np.asarray(I.affine(), dtype=np.int64)
        if self.exps.shape != (F.n,):
            raise ValueError(f'index {I} does not fit C^{F.n}')
        self.t = complex(t)

    def __call__(self, z):
        return self.evaluate(z)

    def _denominator(self, z):
        return 1 + self.t * np.prod(z ** self.exps)

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        return self.F.evaluate(z) / self._denominator(z)

    def jacobian(self, z):
        z = np.asarray(z, dtype=complex)
        den = self._denominator(z)
        grad = np.empty(self.n, dtype=complex)
        for j in range(self.n):
            lowered = self.exps.copy()
            lowered[j] = max(lowered[j] - 1, 0)
            grad[j] = self.t * self.exps[j] * np.prod(z ** lowered)
        value = self.F.evaluate(z)
        return (self.F.jacobian(z) * den - np.outer(value, grad)) / den ** 2


def homogeneous_part(F: PolyMapDense, degree=None):
    """Terms of ``F`` of total degree ``degree`` (default ``F.d``)."""
    degree = F.d if degree is None else degree
    keep = F.exponents.sum(axis=1) == degree
    if not keep.any():
        return PolyMapDense(np.zeros((1, F.n), dtype=np.int64),
                            np.zeros((F.n, 1)), d=degree)
    return PolyMapDense(F.exponents[keep], F.coeffs[:, keep], d=degree)


def jacobian_self_test(F, samples=4, seed=0, h=1e-6):
    """Largest relative deviation between the analytic Jacobian and a
    central difference Jacobian at random points of the unit polydisc."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        z = rng.uniform(-1, 1, F.n) + 1j * rng.uniform(-1, 1, F.n)
        exact = F.jacobian(z)
        approx = np.empty_like(exact)
        for j in range(F.n):
            e = np.zeros(F.n, dtype=complex)
            e[j] = h
            approx[:, j] = (F.evaluate(z + e) - F.evaluate(z - e)) / (2 * h)
        scale = max(1.0, np.abs(exact).max())
        worst = max(worst, float(np.abs(exact - approx).max() / scale))
    return worst


# Families of maps used by loops -------------------------------------------

def skew_family(d=2, n=2, b=1.0, h=None):
    """Maps ``(u_1^d, ..., u_{n-1}^d, u_n^d + c + b h(u_1, ..., u_{n-1}))``
    parameterized by ``c``; ``h`` is a linear form given by its
    coefficients (default all ones)."""
    h = np.ones(n - 1) if h is None else np.asarray(h, dtype=complex)
    if h.shape != (n - 1,):
        raise ValueError(f'linear form needs {n - 1} coefficients')
    b = complex(b)

    def family(c):
        terms = [{tuple(d * e for e in _unit(n, i)): 1} for i in range(n)]
        last = terms[-1]
        last[(0,) * n] = complex(c)
        for j, hj in enumerate(h):
            if hj != 0:
                last[_unit(n, j)] = b * hj
        return from_terms(n, terms, d=d)
    return family


def perturbed_product_family(d=2, alpha=1.0, eps=0.0):
    """Maps ``G_c(x, y) = (x^d + alpha y + c, y^d + eps)`` parameterized by
    ``c``."""
    alpha, eps = complex(alpha), complex(eps)

    def family(c):
        return from_terms(2, [{(d, 0): 1, (0, 1): alpha, (0, 0): complex(c)},
                              {(0, d): 1, (0, 0): eps}], d=d)
    return family


def eigendir_family(theta=0.5, c=0.1875, alpha=10.0):
    """Maps ``H_eps(x, y) = (x^2 + theta x + eps y, y^2 + c + alpha x)``
    parameterized by ``eps``."""
    theta, c, alpha = complex(theta), complex(c), complex(alpha)

    def family(eps):
        return from_terms(2, [{(2, 0): 1, (1, 0): theta, (0, 1): complex(eps)},
                              {(0, 2): 1, (0, 0): c, (1, 0): alpha}], d=2)
    return family


def unicritical_family(d=2):
    """Maps ``z^d + c`` parameterized by ``c``."""
    return lambda c: unicritical(c, d=d)


def custom_family(base, direction):
    """Maps ``base + s direction`` for two term lists of equal dimension."""
    n = len(base)
    F0 = from_terms(n, base)
    F1 = from_terms(n, direction)

    def family(s):
        return _combine(F0, F1, complex(s))
    return family


def _combine(F0, F1, s):
    terms = []
    t0, t1 = F0.terms(), F1.terms()
    for i in range(1, F0.n + 1):
        t = dict(t0[i])
        for e, c in t1[i].items():
            t[e] = t.get(e, 0) + s * c
        terms.append(t)
    return from_terms(F0.n, terms)


def _parse_terms(spec, n):
    # [{"1,0": [re, im], ...}, ...] -> list of dicts
    out = []
    for t in spec:
        out.append({tuple(int(e) for e in str(k).split(',')): parse_complex(v)
                    for k, v in t.items()})
    if len(out) != n:
        raise ValueError(f'expected {n} coordinate term lists, got {len(out)}')
    return out


def make_family(family_id, params):
    """Return ``(family, n)`` for a named loop family.

    Parameters
    ----------
    family_id : str
        One of ``unicritical_1d``, ``skew_product``, ``G_c_alpha_eps``,
        ``eigendir_Gt`` or ``custom``.
    params : dict
        Family parameters; complex values may be ``[re, im]`` pairs.

    Returns
    -------
    : tuple
        The callable ``parameter -> map`` and the dimension.

    """
    params = dict(params or {})
    if family_id == 'unicritical_1d':
        return unicritical_family(int(params.get('d', 2))), 1
    if family_id == 'skew_product':
        n = int(params.get('n', 2))
        h = params.get('h')
        h = None if h is None else [parse_complex(v) for v in h]
        return skew_family(int(params.get('d', 2)), n,
                           parse_complex(params.get('b', 1.0)), h), n
    if family_id == 'G_c_alpha_eps':
        return perturbed_product_family(int(params.get('d', 2)),
                          parse_complex(params.get('alpha', 1.0)),
                          parse_complex(params.get('eps', 0.0))), 2
    if family_id == 'eigendir_Gt':
        return eigendir_family(parse_complex(params.get('theta', 0.5)),
                               parse_complex(params.get('c', 0.1875)),
                               parse_complex(params.get('alpha', 10.0))), 2
    if family_id == 'custom':
        n = int(params['n'])
        return custom_family(_parse_terms(params['base'], n),
                             _parse_terms(params['direction'], n)), n
    raise ValueError(f'unknown family {family_id!r}')


FAMILY_IDS = ('unicritical_1d', 'skew_product', 'G_c_alpha_eps', 'eigendir_Gt',
              'custom')


# Cycles --------------------------------------------------------------------

@dataclass
class CycleTrack:
    """A numerically solved cycle.

    Attributes
    ----------
    period : int
    points : ndarray, shape (p, n)
        ``points[i + 1] = F(points[i])``.
    cycle_jacobian : ndarray, shape (n, n)
        Jacobian of ``F^p`` at ``points[0]``.
    eigenvalues : ndarray
        Canonical order (increasing real part, then imaginary part) for a
        fresh solve; branch order after tracking.
    eigendirection_basis : ndarray or None
        Unit eigenvectors as columns, in the order of ``eigenvalues``.
    residual : float
        ``|F^p(points[0]) - points[0]|``.
    parabolic : bool
        An eigenvalue lies within ``tolerances.parab`` of 1.
    param : complex or None
        Family parameter the cycle was solved at.
    """
    period: int
    points: np.ndarray
    cycle_jacobian: np.ndarray
    eigenvalues: np.ndarray
    eigendirection_basis: Optional[np.ndarray] = None
    residual: float = 0.0
    parabolic: bool = False
    param: Optional[complex] = None
    exact_period: int = field(default=0)

    @property
    def base(self):
        return self.points[0]

    @property
    def n(self):
        return self.points.shape[1]

    def parabolic_distance(self):
        return float(np.min(np.abs(self.eigenvalues - 1)))

    def canonical_eigenvalues(self):
        return canonical_eigenvalues(self.eigenvalues)

    def as_dict(self):
        return {'period': self.period, 'exact_period': self.exact_period,
                'points': self.points, 'eigenvalues': self.eigenvalues,
                'residual': self.residual, 'parabolic': self.parabolic,
                'param': self.param}


def canonical_eigenvalues(values):
    """Sort complex values by real part, then imaginary part."""
    values = np.asarray(values, dtype=complex)
    return values[np.lexsort((values.imag, values.real))]


def _canonical_order(values):
    values = np.asarray(values, dtype=complex)
    return np.lexsort((values.imag, values.real))


def match_branches(previous, new):
    """Assign new eigenvalues to previous branches.

    Returns
    -------
    order : ndarray of int
        ``new[order]`` continues ``previous`` entrywise.
    drift : float
        Largest distance between matched values.

    """
    previous = np.asarray(previous, dtype=complex)
    new = np.asarray(new, dtype=complex)
    cost = np.abs(previous[:, None] - new[None, :])
    rows, cols = optimize.linear_sum_assignment(cost)
    order = np.empty(len(previous), dtype=int)
    order[rows] = cols
    return order, float(cost[rows, cols].max()) if len(rows) else 0.0


def min_gap(values):
    """Smallest pairwise distance between complex values (inf for one)."""
    values = np.asarray(values, dtype=complex)
    if len(values) < 2:
        return np.inf
    diff = np.abs(values[:, None] - values[None, :])
    return float(diff[np.triu_indices(len(values), 1)].min())


def _iterate(F, z, p):
    points = [z]
    jac = np.eye(len(z), dtype=complex)
    for _ in range(p):
        jac = F.jacobian(points[-1]) @ jac
        points.append(F.evaluate(points[-1]))
    return points, jac


def _newton_step(F, z, p):
    points, jac = _iterate(F, z, p)
    residual = points[-1] - z
    system = jac - np.eye(len(z))
    try:
        step = np.linalg.solve(system, -residual)
    except np.linalg.LinAlgError:
        step = np.linalg.lstsq(system, -residual, rcond=None)[0]
    return step, float(np.abs(residual).max())


def _exact_period(points, p, tol):
    z = points[0]
    for q in range(1, p):
        if p % q == 0 and np.abs(points[q] - z).max() <= tol * (1 + np.abs(z).max()):
            return q
    return p


def make_track(F, z, p, tolerances=DEFAULT_TOLERANCES, param=None):
    """Build the :class:`CycleTrack` of the cycle through ``z``."""
    points, jac = _iterate(F, np.asarray(z, dtype=complex), p)
    values, vectors = np.linalg.eig(jac)
    order = _canonical_order(values)
    values, vectors = values[order], vectors[:, order]
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    residual = float(np.abs(points[-1] - points[0]).max())
    track = CycleTrack(period=p, points=np.array(points[:-1]),
                       cycle_jacobian=jac, eigenvalues=values,
                       eigendirection_basis=vectors, residual=residual,
                       param=param,
                       exact_period=_exact_period(points, p,
                                                  1e3 * tolerances.newton))
    track.parabolic = track.parabolic_distance() < tolerances.parab
    return track


def solve_cycle(F, p, seed, tolerances=DEFAULT_TOLERANCES, caps=DEFAULT_CAPS,
                param=None):
    """Solve ``F^p(z) = z`` by Newton's method from ``seed``.

    Parameters
    ----------
    F : PolyMapDense or ChartPerturbation
        Any object with ``evaluate`` and ``jacobian``.
    p : int
        Period.
    seed : array_like of complex
        Starting point.

    Returns
    -------
    : CycleTrack
        ``points[0]`` is the solution near ``seed``; ``parabolic`` is set
        (and a warning logged) when an eigenvalue is within
        ``tolerances.parab`` of 1.

    Raises
    ------
    ConvergenceError
        If the residual does not drop below ``tolerances.newton`` within
        ``caps.newton_max_iter`` iterations.

    """
    if p < 1:
        raise ValueError(f'period must be >= 1, got {p}')
    z = np.array(seed, dtype=complex, ndmin=1)
    if z.shape != (F.n,):
        raise ValueError(f'seed has shape {z.shape}, expected ({F.n},)')
    residual = np.inf
    with np.errstate(all='ignore'):
        for iteration in range(caps.newton_max_iter):
            step, residual = _newton_step(F, z, p)
            if not np.isfinite(residual) or not np.all(np.isfinite(step)):
                raise ConvergenceError(f'Newton diverged from seed {seed} '
                                       f'(period {p})')
            if residual <= tolerances.newton * (1 + np.abs(z).max()):
                break
            z = z + step
        else:
            raise ConvergenceError(f'Newton did not converge from seed {seed} '
                                   f'(period {p}, residual {residual:.3e})')
        # polish
        step, _ = _newton_step(F, z, p)
        if np.all(np.isfinite(step)) and np.abs(step).max() < 1e-6 * (1 + np.abs(z).max()):
            z = z + step
    LOGGER.debug('solved period %d cycle at %s after %d iterations',
                 p, z, iteration)
    track = make_track(F, z, p, tolerances, param=param)
    if track.parabolic:
        LOGGER.warning('period %d cycle at %s has an eigenvalue within %.1e of 1',
                       p, z, tolerances.parab)
    return track


def rebase(F, track: CycleTrack, i, tolerances=DEFAULT_TOLERANCES):
    """The same cycle with ``points[i]`` as base point."""
    return make_track(F, track.points[i % track.period], track.period,
                      tolerances, param=track.param)


# Path tracking -------------------------------------------------------------

class _StepRejected(Exception):
    def __init__(self, error):
        super().__init__(str(error))
        self.error = error


def _correct(F, z_pred, p, tolerances):
    """Newton corrector with contraction and trust radius checks."""
    z = z_pred.copy()
    trust = TRUST * (1 + np.abs(z_pred).max())
    last = np.inf
    with np.errstate(all='ignore'):
        for _ in range(CORRECTOR_ITERATIONS):
            step, residual = _newton_step(F, z, p)
            if residual <= tolerances.newton * (1 + np.abs(z).max()):
                return z
            size = float(np.abs(step).max())
            if not np.isfinite(size) or size > 0.5 * last:
                raise _StepRejected(ConvergenceError(
                    'corrector is not contracting'))
            z = z + step
            if np.abs(z - z_pred).max() > trust:
                raise _StepRejected(ConvergenceError(
                    'corrector left the trust region'))
            last = size
    raise _StepRejected(ConvergenceError('corrector did not converge'))


def _align_vectors(previous, vectors):
    if previous is None:
        return vectors
    out = vectors.copy()
    for j in range(vectors.shape[1]):
        phase = np.vdot(vectors[:, j], previous[:, j])
        if abs(phase) > 0:
            out[:, j] = vectors[:, j] * phase / abs(phase)
    return out


def _advance(family, current, previous, s_new, at_floor, tolerances):
    F = family(s_new)
    z = current.base
    if previous is not None and previous.param != current.param:
        ratio = (s_new - current.param) / (current.param - previous.param)
        z_pred = z + (z - previous.base) * ratio
    else:
        z_pred = z
    z_new = _correct(F, z_pred, current.period, tolerances)
    new = make_track(F, z_new, current.period, tolerances, param=s_new)
    distance = new.parabolic_distance()
    if distance < tolerances.parab_abort:
        raise ParabolicCycleError(f'eigenvalue within {distance:.2e} of 1 at '
                                  f'parameter {s_new}')
    if distance < tolerances.parab:
        if not at_floor:
            raise _StepRejected(ParabolicCycleError(
                f'near parabolic cycle at parameter {s_new}'))
        LOGGER.warning('tracking through near parabolic cycle at %s', s_new)
    order, drift = match_branches(current.eigenvalues, new.eigenvalues)
    gap = min_gap(new.eigenvalues)
    if gap <= 2 * drift:
        error = EigenvalueCollisionError(
            f'eigenvalue gap {gap:.2e} below twice the drift {drift:.2e} at '
            f'parameter {s_new}')
        if at_floor:
            raise error
        raise _StepRejected(error)
    new.eigenvalues = new.eigenvalues[order]
    new.eigendirection_basis = _align_vectors(
        current.eigendirection_basis, new.eigendirection_basis[:, order])
    return new


def track_path(family, path, start: CycleTrack, tolerances=DEFAULT_TOLERANCES,
               caps=DEFAULT_CAPS):
    """Continue a cycle along a discretized path of parameters.

    Each segment is traversed with a secant predictor and a Newton corrector;
    a rejected step (no contraction, trust region left, near parabolic
    cycle, or eigenvalue branches too close) is halved, at most
    ``caps.max_halvings`` times.

    Parameters
    ----------
    family : callable
        ``parameter -> map``.
    path : sequence of complex
        Parameter values; ``path[0]`` must match ``start.param`` when set.
    start : CycleTrack
        Cycle at ``path[0]``.

    Returns
    -------
    : CycleTrack
        The cycle at ``path[-1]``, with eigenvalues in branch order.

    Raises
    ------
    ParabolicCycleError
        If an eigenvalue comes within ``tolerances.parab_abort`` of 1.
    ConvergenceError, EigenvalueCollisionError
        If a step still fails after the last halving.

    """
    path = [complex(s) for s in path]
    if not path:
        raise ValueError('path is empty')
    if start.param is not None and abs(start.param - path[0]) > 1e-12 * (1 + abs(path[0])):
        raise ValueError(f'path starts at {path[0]} but the cycle was solved '
                         f'at {start.param}')
    if all(s == path[0] for s in path):
        return start
    current = replace(start, param=path[0])
    previous = None
    for a, b in zip(path[:-1], path[1:]):
        if a == b:
            continue
        tau, depth = 0.0, 0
        while tau < 1.0:
            step = min(2.0 ** -depth, 1.0 - tau)
            s_new = b if tau + step >= 1.0 else a + (tau + step) * (b - a)
            try:
                new = _advance(family, current, previous, s_new,
                               depth >= caps.max_halvings, tolerances)
            except _StepRejected as rejected:
                depth += 1
                LOGGER.debug('halving step at %s: %s', s_new, rejected)
                if depth > caps.max_halvings:
                    raise rejected.error
                continue
            previous, current = current, new
            tau += step
            depth = max(depth - 1, 0)
    return _polish(family(path[-1]), current, tolerances)


def _polish(F, track, tolerances):
    step, _ = _newton_step(F, track.base, track.period)
    if not np.all(np.isfinite(step)) or np.abs(step).max() > 1e-6 * (1 + np.abs(track.base).max()):
        return track
    polished = make_track(F, track.base + step, track.period, tolerances,
                          param=track.param)
    order, _ = match_branches(track.eigenvalues, polished.eigenvalues)
    polished.eigenvalues = polished.eigenvalues[order]
    polished.eigendirection_basis = _align_vectors(
        track.eigendirection_basis, polished.eigendirection_basis[:, order])
    return polished


def loop_circle(center, radius, steps=360, phase=0.0):
    """Closed path ``center + radius exp(i (phase + 2 pi j / steps))``."""
    if steps < 3:
        raise ValueError('a circle needs at least 3 steps')
    angles = phase + 2 * np.pi * np.arange(steps) / steps
    path = list(complex(center) + radius * np.exp(1j * angles))
    return path + [path[0]]


def loop_lasso(base, center, radius, steps=360, approach=40):
    """Closed path from ``base`` to a circle around ``center`` and back."""
    base, center = complex(base), complex(center)
    offset = base - center
    if abs(offset) <= radius:
        return loop_circle(center, radius, steps, np.angle(offset))
    phase = np.angle(offset)
    entry = center + radius * np.exp(1j * phase)
    segment = list(base + (entry - base) * np.arange(approach) / approach)
    circle = loop_circle(center, radius, steps, phase)
    return segment + circle + segment[::-1]


# Rank certification and spectra -------------------------------------------

@dataclass
class RankReport:
    """Finite difference Jacobian of multiplier functions and its spectrum.

    Attributes
    ----------
    jacobian : ndarray
        Rows follow the witnesses, columns the directions ``(m, I)``.
    singular_values : ndarray
        Descending.
    rank_at_tol : int
    certified_full_rank : bool
        Smallest singular value above ``tolerances.rank`` times the largest.
    """
    jacobian: np.ndarray
    singular_values: np.ndarray
    rank_at_tol: int
    certified_full_rank: bool
    rows: list = field(default_factory=list)
    columns: list = field(default_factory=list)
    eigenvalues: list = field(default_factory=list)
    tolerance: float = DEFAULT_TOLERANCES.rank
    step: float = DEFAULT_TOLERANCES.fd_step

    def as_dict(self):
        return {'jacobian': self.jacobian,
                'singular_values': self.singular_values,
                'rank_at_tol': self.rank_at_tol,
                'certified_full_rank': self.certified_full_rank,
                'size': self.jacobian.shape[0],
                'rows': self.rows, 'columns': self.columns,
                'eigenvalues': self.eigenvalues,
                'tolerance': self.tolerance, 'fd_step': self.step}


def _select_branch(values, target):
    distance = np.abs(np.asarray(values) - target)
    order = np.argsort(distance)
    if len(values) > 1 and distance[order[1]] <= 2 * distance[order[0]]:
        raise EigenvalueCollisionError(f'eigenvalue branch near {target} is '
                                       f'ambiguous')
    return values[order[0]]


def _witness_eigenvalue(F, base_track, target, p, tolerances, caps):
    track = solve_cycle(F, p, base_track.base, tolerances, caps)
    if np.abs(track.base - base_track.base).max() > 1e-2:
        raise ConvergenceError(f'witness cycle at {base_track.base} lost under '
                               f'perturbation')
    return _select_branch(track.eigenvalues, target)


def rank_certificate(base, witnesses, h=None, tolerances=DEFAULT_TOLERANCES,
                     caps=DEFAULT_CAPS):
    """Certify that the multipliers of the witness cycles are locally
    independent at ``base``.

    For each witness point ``w_{k,j}`` the cycle of ``base`` near ``w`` is
    solved and the eigenvalue closest to the ``(k, k)`` entry of its cycle
    Jacobian is followed. Each is differentiated (central differences with
    Richardson extrapolation) in every affine direction ``P_{m,I}``.

    Parameters
    ----------
    base : PolyMapDense
        Map near the power map whose witness cycles have pairwise distinct
        eigenvalues different from 1.
    witnesses : WitnessSet
        Affine witness set.
    h : float, optional
        Step; defaults to ``tolerances.fd_step``.

    Returns
    -------
    : RankReport

    Raises
    ------
    ValueError
        If some witness cycle has repeated eigenvalues or an eigenvalue 1
        (e.g. at the power map itself).

    """
    if witnesses.setting != AFFINE:
        raise ValueError('rank_certificate needs an affine witness set')
    h = tolerances.fd_step if h is None else h
    d, n = witnesses.d, witnesses.n
    columns = [(m, I) for m in range(1, n + 1)
               for I in enumerate_admissible(d, n)]
    rows, targets, tracks = [], [], []
    for k, row in enumerate(witnesses.points, start=1):
        for j, w in enumerate(row, start=1):
            track = solve_cycle(base, w.period, to_complex(w), tolerances, caps)
            if track.parabolic_distance() <= tolerances.parab:
                raise ValueError(f'witness ({k}, {j}) has an eigenvalue 1')
            if min_gap(track.eigenvalues) <= tolerances.det * max(1.0, np.abs(track.eigenvalues).max()):
                raise ValueError(f'witness ({k}, {j}) at {w} has repeated '
                                 f'eigenvalues; the base map is too degenerate')
            target = _select_branch(track.eigenvalues,
                                    track.cycle_jacobian[k - 1, k - 1])
            rows.append((k, j, w))
            targets.append(target)
            tracks.append(track)
    jac = np.empty((len(rows), len(columns)), dtype=complex)
    for c, (m, I) in enumerate(columns):
        for r, ((k, j, w), target, track) in enumerate(zip(rows, targets, tracks)):
            def value(t):
                return _witness_eigenvalue(perturb(base, m, I, t), track,
                                           target, w.period, tolerances, caps)
            coarse = (value(h) - value(-h)) / (2 * h)
            fine = (value(h / 2) - value(-h / 2)) / h
            jac[r, c] = (4 * fine - coarse) / 3
    svals = linalg.svdvals(jac)
    rank = int(np.sum(svals > tolerances.rank * svals[0])) if svals[0] > 0 else 0
    report = RankReport(jacobian=jac, singular_values=svals, rank_at_tol=rank,
                        certified_full_rank=bool(rank == min(jac.shape) and
                                                 jac.shape[0] == jac.shape[1]),
                        rows=[{'k': k, 'j': j, 'point': w.fractions(),
                               'period': w.period} for k, j, w in rows],
                        columns=[{'m': m, 'index': list(I.entries)}
                                 for m, I in columns],
                        eigenvalues=targets, tolerance=tolerances.rank, step=h)
    LOGGER.info('rank certificate: %d x %d, smin/smax = %.3e', jac.shape[0],
                jac.shape[1], svals[-1] / svals[0] if svals[0] else 0.0)
    return report


def elementary_symmetric(values):
    """``(e_1, ..., e_n)`` of the given values."""
    coeffs = np.poly(np.asarray(values, dtype=complex))
    signs = (-1.0) ** np.arange(1, len(coeffs))
    return coeffs[1:] * signs


def multiplier_spectrum(F, p, cycles, tolerances=DEFAULT_TOLERANCES):
    """Elementary symmetric functions of the cycle eigenvalues.

    Parameters
    ----------
    F : PolyMapDense
    p : int
    cycles : list of CycleTrack
        Period ``p`` cycles of ``F`` in pairwise distinct orbits.

    Returns
    -------
    : list of tuple of complex
        One ``(e_1, ..., e_n)`` per cycle, sorted lexicographically by real
        and imaginary parts.

    Raises
    ------
    ValueError
        If two cycles share an orbit or a cycle has another period.

    """
    seen = []
    values = []
    for track in cycles:
        if track.period != p:
            raise ValueError(f'cycle of period {track.period} in a period {p} '
                             f'spectrum')
        scale = 1 + np.abs(track.points).max()
        for other in seen:
            if np.min(np.abs(other - track.base).max(axis=1)) <= 1e3 * tolerances.newton * scale:
                raise ValueError(f'duplicate orbit through {track.base}')
        seen.append(track.points)
        values.append(tuple(complex(e) for e in elementary_symmetric(track.eigenvalues)))

    def key(sym):
        return tuple(x for e in sym for x in (round(e.real, 9), round(e.imag, 9)))
    return sorted(values, key=key)


def power_map_orbits(d, n, p, caps=DEFAULT_CAPS):
    """Representatives of the period ``p`` orbits of the power map."""
    coords = [ZERO] + fix_set(d, p, caps)
    seen = set()
    out = []
    for combo in itertools.product(coords, repeat=n):
        pt = RootPoint(d, combo)
        if pt.period != p:
            continue
        key = orbit_key(pt)
        if key not in seen:
            seen.add(key)
            out.append(key)
    return out


def spectrum_near_power_map(F, p, tolerances=DEFAULT_TOLERANCES,
                            caps=DEFAULT_CAPS):
    """Multiplier spectrum of a map near the power map of the same degree.

    Every period ``p`` orbit of the power map seeds Newton's method for
    ``F``; the result has one entry per orbit.

    Returns
    -------
    : list of tuple of complex

    """
    cycles = [solve_cycle(F, p, to_complex(w), tolerances, caps)
              for w in power_map_orbits(F.d, F.n, p, caps)]
    return multiplier_spectrum(F, p, cycles, tolerances)


def regularity_probe(F, samples=256, seed=0, threshold=1e-8):
    """Search the unit sphere for a common zero of the top degree part.

    Returns
    -------
    : bool
        False when a point with ``|F_d(z)| < threshold`` is found; True is
        advisory only.

    """
    top = homogeneous_part(F)
    n = F.n
    rng = np.random.default_rng(seed)
    grid = [np.eye(n, dtype=complex)[j] for j in range(n)]
    raw = rng.normal(size=(samples, n)) + 1j * rng.normal(size=(samples, n))
    grid.extend(raw / np.linalg.norm(raw, axis=1)[:, None])

    def norm(z):
        return float(np.linalg.norm(top.evaluate(z / np.linalg.norm(z))))

    values = np.array([norm(z) for z in grid])
    if values.min() < threshold:
        return False

    def objective(x):
        z = x[:n] + 1j * x[n:]
        if np.linalg.norm(z) == 0:
            return np.inf
        return norm(z)

    for i in np.argsort(values)[:4]:
        z = grid[i]
        res = optimize.minimize(objective, np.concatenate([z.real, z.imag]),
                                method='Nelder-Mead',
                                options={'xatol': 1e-12, 'fatol': 1e-14,
                                         'maxiter': 4000})
        if res.fun < threshold:
            LOGGER.info('regularity probe found a near common zero, |F_d| = %.2e',
                        res.fun)
            return False
    return True


def spectrum_table(spectrum):
    """Multiplier spectrum as a DataFrame with one row per cycle."""
    rows = []
    for sym in spectrum:
        rows.append({f'e{i + 1}': v for i, v in enumerate(sym)})
    return pd.DataFrame(rows)
