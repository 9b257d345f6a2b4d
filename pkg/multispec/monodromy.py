"""Monodromy of marked periodic points and eigendirections along loops.

A loop is a closed path in the parameter space of a family of maps. Every
marked periodic point at the basepoint is continued around the loop and the
endpoints are matched back to the start points, which gives a permutation of
the marked points. The permutation must commute with the dynamics.

The module also holds the hyperbolicity estimate for compositions of
polynomials ``z -> P_i(z) - b alpha_i`` and a sampled certificate of the
corresponding chain of disc inclusions.
"""
import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from multispec import continuation
from multispec.util.config import DEFAULT_CAPS, DEFAULT_TOLERANCES
from multispec.util.errors import (BranchSeparationError, ConvergenceError,
                                   EigenvalueCollisionError,
                                   InconclusiveCertificateError,
                                   MatchingAmbiguityError)
from multispec.util.util import parse_complex

LOGGER = logging.getLogger(__name__)

ANCHOR_CENTERS = (0.25, -0.75, 0.0)


@dataclass
class LoopSpec:
    """A closed loop in the parameter space of a family with marked cycles.

    Attributes
    ----------
    family_id : str
        See :func:`multispec.continuation.make_family`.
    params : dict
        Family parameters.
    path : list of complex
        Closed path, ``path[0] == path[-1]``.
    marked : list of dict
        ``{'seed': point, 'period': p}``; each seed is solved at the
        basepoint and its whole orbit is marked.
    eigendirections : bool
        Also report whether eigenvalue branches are exchanged.
    """
    family_id: str
    params: dict
    path: List[complex]
    marked: List[dict]
    eigendirections: bool = False

    def __post_init__(self):
        self.path = [complex(s) for s in self.path]
        if len(self.path) < 1:
            raise ValueError('loop path is empty')
        if self.path[0] != self.path[-1]:
            raise ValueError(f'loop is not closed: starts at {self.path[0]} '
                             f'and ends at {self.path[-1]}')
        if self.family_id not in continuation.FAMILY_IDS:
            raise ValueError(f'unknown family {self.family_id!r}')
        if not self.marked:
            raise ValueError('a loop needs at least one marked point')

    @property
    def basepoint(self):
        return self.path[0]

    def reversed(self):
        return LoopSpec(self.family_id, dict(self.params), self.path[::-1],
                        list(self.marked), self.eigendirections)

    def then(self, other):
        """Concatenation: this loop followed by ``other`` (same basepoint)."""
        if other.basepoint != self.basepoint or other.family_id != self.family_id:
            raise ValueError('loops must share family and basepoint')
        return LoopSpec(self.family_id, dict(self.params),
                        self.path + other.path[1:], list(self.marked),
                        self.eigendirections or other.eigendirections)

    def as_dict(self):
        return {'family': self.family_id, 'params': self.params,
                'path': self.path, 'marked': self.marked,
                'eigendirections': self.eigendirections}


def _parse_marked(items):
    out = []
    for item in items:
        seed = item['seed'] if isinstance(item, dict) else item
        period = int(item.get('period', 1)) if isinstance(item, dict) else 1
        out.append({'seed': [parse_complex(z) for z in seed], 'period': period})
    return out


def load_loop(source):
    """Read a loop description.

    Parameters
    ----------
    source : str or dict
        Path to a JSON file or the decoded object, with keys ``family``,
        ``params``, ``marked`` and either ``path`` (list of ``[re, im]``)
        or ``circle`` (``{center, radius, steps}``).

    Returns
    -------
    : LoopSpec

    """
    if isinstance(source, dict):
        data = source
    else:
        with open(source) as f:
            data = json.load(f)
    if 'path' in data:
        path = [parse_complex(s) for s in data['path']]
    elif 'circle' in data:
        circle = data['circle']
        path = continuation.loop_circle(parse_complex(circle['center']),
                                        float(circle['radius']),
                                        int(circle.get('steps', 360)),
                                        float(circle.get('phase', 0.0)))
    else:
        raise ValueError('loop needs a "path" or a "circle"')
    return LoopSpec(family_id=data['family'], params=data.get('params', {}),
                    path=path, marked=_parse_marked(data.get('marked', [])),
                    eigendirections=bool(data.get('eigendirections', False)))


@dataclass
class PermutationResult:
    """Permutation of marked points induced by a loop.

    Attributes
    ----------
    mapping : dict
        Label of a start point -> label of the endpoint of its continuation.
    commutes_with_dynamics : bool
    cycle_structure : list of int
        Sorted cycle lengths, fixed points included.
    eigendirection_swaps : list of tuple
        ``(label, swapped)``.
    successor : dict
        Label -> label of its image under the map at the basepoint.
    labels : list
        Basepoint coordinates of each label.
    """
    mapping: Dict[int, int]
    commutes_with_dynamics: bool
    cycle_structure: List[int]
    eigendirection_swaps: List[Tuple[int, bool]] = field(default_factory=list)
    successor: Dict[int, int] = field(default_factory=dict)
    labels: list = field(default_factory=list)

    @classmethod
    def build(cls, mapping, successor, swaps=(), labels=()):
        if sorted(mapping.values()) != sorted(mapping):
            raise MatchingAmbiguityError(f'endpoint matching {mapping} is not '
                                         f'a bijection')
        commutes = all(mapping[successor[x]] == successor[mapping[x]]
                       for x in mapping) if successor else True
        return cls(mapping=dict(mapping), commutes_with_dynamics=commutes,
                   cycle_structure=cycle_structure(mapping),
                   eigendirection_swaps=list(swaps), successor=dict(successor),
                   labels=list(labels))

    def is_identity(self):
        return all(k == v for k, v in self.mapping.items())

    def cycles(self):
        return permutation_cycles(self.mapping)

    def compose(self, other):
        """This permutation followed by ``other``."""
        if set(other.mapping) != set(self.mapping):
            raise ValueError('permutations act on different labels')
        mapping = {x: other.mapping[self.mapping[x]] for x in self.mapping}
        first = dict(self.eigendirection_swaps)
        second = dict(other.eigendirection_swaps)
        swaps = [(x, bool(first.get(x, False)) != bool(second.get(self.mapping[x], False)))
                 for x in sorted(mapping)] if first or second else []
        return PermutationResult.build(mapping, self.successor, swaps, self.labels)

    def inverse(self):
        mapping = {v: k for k, v in self.mapping.items()}
        swaps = dict(self.eigendirection_swaps)
        return PermutationResult.build(
            mapping, self.successor,
            [(mapping[x], s) for x, s in sorted(swaps.items())], self.labels)

    def as_dict(self):
        return {'mapping': self.mapping,
                'commutes_with_dynamics': self.commutes_with_dynamics,
                'cycle_structure': self.cycle_structure,
                'cycles': self.cycles(),
                'eigendirection_swaps': [[x, s] for x, s in self.eigendirection_swaps],
                'successor': self.successor, 'labels': self.labels}


def permutation_cycles(mapping):
    """Cycles of length at least 2, each starting at its least label."""
    seen, out = set(), []
    for start in sorted(mapping):
        if start in seen or mapping[start] == start:
            seen.add(start)
            continue
        cycle, x = [], start
        while x not in seen:
            seen.add(x)
            cycle.append(x)
            x = mapping[x]
        out.append(cycle)
    return out


def cycle_structure(mapping):
    """Sorted lengths of all cycles, fixed points included."""
    lengths = [len(c) for c in permutation_cycles(mapping)]
    moved = sum(lengths)
    return sorted(lengths + [1] * (len(mapping) - moved))


def _lex_key(z):
    return tuple(v for c in np.round(z, 9) for v in (c.real, c.imag))


def _find(points, z, tol):
    scale = 1 + np.abs(z).max()
    dist = np.array([np.abs(w - z).max() for w in points])
    hits = np.flatnonzero(dist <= tol * scale)
    if len(hits) != 1:
        nearest = float(dist.min()) if len(dist) else np.inf
        raise MatchingAmbiguityError(
            f'{len(hits)} start points within {tol:.1e} of endpoint {z} '
            f'(nearest at {nearest:.2e})')
    return int(hits[0])


def marked_cycles(spec: LoopSpec, tolerances=DEFAULT_TOLERANCES,
                  caps=DEFAULT_CAPS):
    """Solve the marked cycles at the basepoint and label their points.

    Points are labelled ``0, 1, ...`` in lexicographic order of
    ``(Re z_1, Im z_1, Re z_2, ...)``.

    Returns
    -------
    : list of CycleTrack
        One track per label, based at the labelled point.

    """
    family, n = continuation.make_family(spec.family_id, spec.params)
    F = family(spec.basepoint)
    tracks = []
    for item in spec.marked:
        if len(item['seed']) != n:
            raise ValueError(f'seed {item["seed"]} does not fit C^{n}')
        track = continuation.solve_cycle(F, item['period'], item['seed'],
                                         tolerances, caps,
                                         param=spec.basepoint)
        if track.exact_period != track.period:
            raise ValueError(f'seed {item["seed"]} converged to a cycle of '
                             f'period {track.exact_period}, not '
                             f'{track.period}')
        if track.parabolic:
            raise ValueError(f'marked cycle through {track.base} is parabolic '
                             f'at the basepoint')
        for i in range(track.period):
            tracks.append(continuation.rebase(F, track, i, tolerances))
    tracks.sort(key=lambda t: _lex_key(t.base))
    bases = [t.base for t in tracks]
    for i in range(1, len(bases)):
        if np.abs(bases[i] - bases[i - 1]).max() <= tolerances.match * (1 + np.abs(bases[i]).max()):
            raise ValueError(f'point {bases[i]} is marked twice')
    return tracks


def run_loop(spec: LoopSpec, tolerances=DEFAULT_TOLERANCES, caps=DEFAULT_CAPS,
             threads=1):
    """Continue every marked point around ``spec`` and read off the
    permutation.

    Parameters
    ----------
    spec : LoopSpec
    threads : int, optional
        Marked points are tracked concurrently on this many threads.

    Returns
    -------
    : PermutationResult

    Raises
    ------
    MatchingAmbiguityError
        If an endpoint is not within ``tolerances.match`` of exactly one
        start point.

    """
    family, _ = continuation.make_family(spec.family_id, spec.params)
    F = family(spec.basepoint)
    starts = marked_cycles(spec, tolerances, caps)
    bases = [t.base for t in starts]

    def follow(track):
        return continuation.track_path(family, spec.path, track, tolerances, caps)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        ends = list(ex.map(follow, starts))

    successor = {x: _find(bases, F.evaluate(z), tolerances.match)
                 for x, z in enumerate(bases)}
    mapping = {x: _find(bases, end.base, tolerances.match)
               for x, end in enumerate(ends)}
    swaps = []
    if spec.eigendirections:
        for x, end in enumerate(ends):
            target = starts[mapping[x]].eigenvalues
            order, _ = continuation.match_branches(end.eigenvalues, target)
            swaps.append((x, bool(np.any(order != np.arange(len(order))))))
    result = PermutationResult.build(mapping, successor, swaps,
                                     [list(b) for b in bases])
    LOGGER.info('loop of %d steps on %s: cycles %s', len(spec.path) - 1,
                spec.family_id, result.cycles())
    if not result.commutes_with_dynamics:
        LOGGER.warning('monodromy %s does not commute with the dynamics',
                       result.mapping)
    return result


def unicritical_seeds(c):
    """Marked points of ``z^2 + c``: both fixed points and the 2-cycle."""
    fixed = np.roots([1, -1, c])
    two = np.roots([1, 1, c + 1])
    return ([{'seed': [z], 'period': 1} for z in fixed] +
            [{'seed': [two[0]], 'period': 2}])


def anchor_loop(center, radius=0.1, steps=360):
    """Circle around ``center`` in the quadratic family with the fixed points
    and the 2-cycle marked.

    Around ``1/4`` the fixed points are exchanged; around ``-3/4`` the
    2-cycle is rotated; around ``0`` nothing moves.
    """
    path = continuation.loop_circle(center, radius, steps)
    return LoopSpec('unicritical_1d', {'d': 2}, path,
                    unicritical_seeds(path[0]))


def eigendirection_loop(theta=0.5, alpha=10.0, eps_radius=1e-3, steps=720,
                        c=0.1875, center=0.0):
    """Loop in ``eps`` for ``(x^2 + theta x + eps y, y^2 + c + alpha x)``
    marking the fixed point near ``(0, y0)``, ``y0`` the fixed point of
    ``y^2 + c`` with multiplier ``theta``."""
    y0 = (1 - np.sqrt(complex(1 - 4 * c))) / 2
    path = continuation.loop_circle(center, eps_radius, steps)
    return LoopSpec('eigendir_Gt', {'theta': theta, 'c': c, 'alpha': alpha},
                    path, [{'seed': [0, y0], 'period': 1}],
                    eigendirections=True)


def eigendirection_swap_loop(theta=0.5, alpha=10.0, eps_radius=1e-3, steps=720,
                             c=0.1875, center=0.0,
                             tolerances=DEFAULT_TOLERANCES, caps=DEFAULT_CAPS):
    """Decide whether the two eigendirections of a fixed point are
    exchanged along a circle in ``eps``.

    With ``theta`` equal to the multiplier of ``y^2 + c`` at its fixed point
    the Jacobian at ``eps = 0`` is a Jordan block; for ``alpha != 0`` the
    eigenvalues are ``theta +- sqrt(alpha eps) + ...`` and a circle around
    ``eps = 0`` exchanges them.

    Returns
    -------
    : PermutationResult
        ``eigendirection_swaps[0][1]`` tells whether the branches swap.

    Raises
    ------
    BranchSeparationError
        If the eigenvalues stay within ``tolerances.det`` of each other at
        every sampled parameter of the loop.

    """
    spec = eigendirection_loop(theta, alpha, eps_radius, steps, c, center)
    if alpha == 0:
        message = 'alpha = 0 decouples the coordinates; no eigendirection swap'
        warnings.warn(message, UserWarning)
        LOGGER.warning(message)
        return PermutationResult.build({0: 0}, {0: 0}, [(0, False)])
    family, _ = continuation.make_family(spec.family_id, spec.params)
    gaps = []
    for s in spec.path[::max(1, len(spec.path) // 8)]:
        start = marked_cycles(LoopSpec(spec.family_id, spec.params, [s],
                                       spec.marked), tolerances, caps)[0]
        gaps.append(continuation.min_gap(start.eigenvalues))
    if max(gaps) <= tolerances.det:
        raise BranchSeparationError(f'eigenvalue gap stays below '
                                    f'{tolerances.det:.1e} along the loop')
    return run_loop(spec, tolerances, caps)


def escalate_loop(theta=0.5, alpha=10.0, eps_radius=1e-3, steps=720, c=0.1875,
                  attempts=8, tolerances=DEFAULT_TOLERANCES, caps=DEFAULT_CAPS):
    """Run :func:`eigendirection_swap_loop`, doubling ``alpha`` and halving
    ``eps_radius`` after each failure.

    Returns
    -------
    : tuple
        ``(result, alpha, eps_radius)`` of the first successful run.

    """
    for attempt in range(attempts + 1):
        try:
            result = eigendirection_swap_loop(theta, alpha, eps_radius, steps, c,
                                              tolerances=tolerances, caps=caps)
            return result, alpha, eps_radius
        except (BranchSeparationError, ConvergenceError,
                EigenvalueCollisionError, MatchingAmbiguityError) as err:
            if attempt == attempts:
                raise
            LOGGER.info('escalating loop after %s: alpha=%g, eps=%g', err,
                        2 * alpha, eps_radius / 2)
            alpha, eps_radius = 2 * alpha, eps_radius / 2


# Hyperbolicity of compositions -------------------------------------------

def root_disc_radius(d, eps, samples=1024):
    """Smallest ``eps'`` such that ``|z^d - 1| <= 2 eps`` lies in the discs
    of radius ``eps'`` around the ``d``-th roots of unity."""
    u = 2 * eps * np.exp(2j * np.pi * np.arange(samples) / samples)
    return float(np.abs((1 + u) ** (1 / d) - 1).max())


def hyperbolicity_bound(d, eps, m, M, sharp=False):
    """Threshold ``A`` on ``|b|`` above which every composition of maps
    ``z -> P_i(z) - b alpha_i`` is expanding.

    Parameters
    ----------
    d : int
        Degree, at least 2.
    eps : float
        Relative disc radius; the discs of radius ``eps'`` (see
        :func:`root_disc_radius`) around the roots of unity must be disjoint.
    m, M : float
        Bounds ``0 < m <= |alpha_i| <= M``.
    sharp : bool, optional
        Return the intermediate constant ``2^(d/(d-1)) / eps`` in place of
        ``4 / eps``.

    Returns
    -------
    : float

    """
    if d < 2:
        raise ValueError(f'degree d must be >= 2, got {d}')
    if not 0 < m <= M:
        raise ValueError(f'need 0 < m <= M, got m={m}, M={M}')
    if not 0 < eps < 0.5:
        raise ValueError(f'eps must lie in (0, 1/2), got {eps}')
    eps_prime = root_disc_radius(d, eps)
    if eps_prime >= min(1.0, np.sin(np.pi / d)):
        raise ValueError(f'eps={eps} too large for d={d}: discs of radius '
                         f'{eps_prime:.3f} around the roots of unity overlap')
    factor = 2 ** (d / (d - 1)) if sharp else 4
    return factor / eps * (M / m ** d) ** (1 / (d - 1))


@dataclass
class ChainCertificate:
    """Outcome of :func:`disc_chain_certificate`; truthy iff it holds."""
    holds: bool
    kappa: float
    radii: List[float]
    preimage_margins: List[float]
    critical_margins: List[float]
    min_derivative: float
    expansion: float
    samples: int

    def __bool__(self):
        return self.holds

    def as_dict(self):
        return {'holds': self.holds, 'kappa': self.kappa, 'radii': self.radii,
                'preimage_margins': self.preimage_margins,
                'critical_margins': self.critical_margins,
                'min_derivative': self.min_derivative,
                'expansion': self.expansion, 'samples': self.samples}


def _monic(poly):
    coeffs = np.atleast_1d(np.asarray(poly, dtype=complex))
    if len(coeffs) < 3 or coeffs[0] != 1:
        raise ValueError(f'{poly} is not a monic polynomial of degree >= 2')
    return coeffs


def _chain_at(polys, shifts, radii, samples):
    N = len(polys)
    theta = np.exp(2j * np.pi * np.arange(samples) / samples)
    pre_margins, crit_margins, min_deriv = [], [], np.inf
    for i in range(N):
        P, c, R = polys[i], shifts[i], radii[i]
        R_prev = radii[i - 1]
        crit = np.roots(np.polyder(P))
        crit_margins.append(float(np.abs(np.polyval(P, crit) - c).min() - R))
        worst = 0.0
        for zeta in R * theta:
            target = P.copy()
            target[-1] -= c + zeta
            roots = np.roots(target)
            if len(roots) != len(P) - 1 or not np.all(np.isfinite(roots)):
                raise ConvergenceError(f'root solving failed for map {i + 1}')
            worst = max(worst, float(np.abs(roots).max()))
            min_deriv = min(min_deriv, float(np.abs(np.polyval(np.polyder(P), roots)).min()))
        pre_margins.append(R_prev - worst)
    return pre_margins, crit_margins, min_deriv


def disc_chain_certificate(polys, alphas, b, eps, expansion=2.0, samples=512):
    """Check the chain of disc inclusions that makes
    ``f_N o ... o f_1``, ``f_i(z) = P_i(z) - b alpha_i``, hyperbolic.

    Radii are ``R_i = kappa |b alpha_i|`` (indices mod ``N``) with ``kappa``
    scanned over ``eps 2^j < 1/2``. The chain holds at the first ``kappa``
    for which, for every ``i``, the preimage of the circle of radius
    ``R_i`` lies in the disc of radius ``R_{i-1}``, the critical values of
    ``f_i`` lie outside the disc of radius ``R_i``, and ``|f_i'|`` on the
    preimage is at least ``expansion``.

    Parameters
    ----------
    polys : list of array_like
        Monic coefficient vectors, highest degree first.
    alphas : list of complex
        Nonzero, one per polynomial.
    b : complex
    eps : float
    expansion : float, optional
    samples : int, optional
        Boundary samples per circle, at least 512.

    Returns
    -------
    : ChainCertificate

    Raises
    ------
    InconclusiveCertificateError
        If no ``kappa`` passes and some margin was within ``1e-6 R``.

    """
    if not polys or len(polys) != len(alphas):
        raise ValueError('need as many nonzero alphas as polynomials (>= 1)')
    alphas = [complex(a) for a in alphas]
    if any(a == 0 for a in alphas):
        raise ValueError('alphas must be nonzero')
    polys = [_monic(P) for P in polys]
    samples = max(512, int(samples))
    b = complex(b)
    shifts = [b * a for a in alphas]
    inconclusive = False
    last = None
    kappa = eps
    while kappa < 0.5 and kappa <= eps * 2 ** 8:
        radii = [kappa * abs(s) for s in shifts]
        pre, crit, deriv = _chain_at(polys, shifts, radii, samples)
        margins = pre + crit
        scale = min(radii)
        if any(abs(x) < 1e-6 * scale for x in margins):
            inconclusive = True
        last = ChainCertificate(holds=min(margins) > 1e-6 * scale and deriv >= expansion,
                                kappa=kappa, radii=radii, preimage_margins=pre,
                                critical_margins=crit, min_derivative=deriv,
                                expansion=expansion, samples=samples)
        LOGGER.debug('disc chain at kappa=%g: margins %s, |f\'| >= %.3g',
                     kappa, margins, deriv)
        if last.holds:
            return last
        kappa *= 2
    if last is None:
        raise ValueError(f'eps={eps} leaves no radius scale below 1/2')
    if inconclusive:
        raise InconclusiveCertificateError(
            f'disc chain for |b|={abs(b):g} is within the sampling margin')
    return last
