"""Selection of witness orbits certifying local independence of multipliers.

For each row coordinate ``k`` the affine selection picks ``N_dn`` periodic
points ``w_{k,1}, ..., w_{k,N}`` of the power map, in pairwise distinct
orbits, such that the matrix

    J_k[j, c] = d/dt rho_{k, w_{k,j}}(F_0 + t P_{k, I(c)})

is nonsingular. The points are chosen one at a time: the ``j``-th point
maximizes the ``j x j`` leading minor, expanded along its new row. The
projective selection does the same on the full ``(n + 1) N_dn`` square
matrix whose first ``N_dn`` rows come from the homogenizing direction.

Entries are evaluated on the candidate set ``Per_p x Fix_p^(n-1)`` with
integer residue arithmetic modulo ``d^p - 1``; each row is multiplied by
``w_k^(d^(p-1))``, which leaves nonsingularity unchanged.
"""
import logging
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy import linalg

from multispec.combinatorics import (AFFINE, PROJECTIVE, enumerate_admissible,
                                     space_dims)
from multispec.derivatives import (DerivativeQuery, SparsePoly,
                                   affine_terms, projective_terms,
                                   is_s_polynomial, partial_rho)
from multispec.powerlattice import (RootPoint, check_period_cap, orbit_key,
                                    residues, s_set)
from multispec.util.config import DEFAULT_CAPS, DEFAULT_TOLERANCES
from multispec.util.errors import (MultispecError, PeriodCapError,
                                   WitnessExhaustedError)

LOGGER = logging.getLogger(__name__)

# residue products must stay inside int64
MAX_MODULUS = 2 ** 31

GATE_VARIANTS = ('affine', 'affine-weak', 'projective-weak', 'projective-strong')


@dataclass
class JacobianBlock:
    """A square block of derivative values with its determinant.

    Attributes
    ----------
    entries : ndarray
        Row-scaled derivative values.
    det : complex
    rel_det : float
        ``|det|`` divided by the product of the row norms.
    smin_over_smax : float
        Ratio of extreme singular values.
    row_scaling : ndarray
        Factor ``w_k^(d^(p-1))`` applied to each row.
    """
    entries: np.ndarray
    det: complex
    rel_det: float
    smin_over_smax: float
    row_scaling: np.ndarray

    @classmethod
    def from_rows(cls, entries, row_scaling):
        entries = np.asarray(entries, dtype=complex)
        det = complex(linalg.det(entries))
        norms = np.prod(np.linalg.norm(entries, axis=1))
        svals = linalg.svdvals(entries)
        return cls(entries=entries, det=det,
                   rel_det=float(abs(det) / norms) if norms else 0.0,
                   smin_over_smax=float(svals[-1] / svals[0]) if svals[0] else 0.0,
                   row_scaling=np.asarray(row_scaling, dtype=complex))

    def as_dict(self):
        return {'det': self.det, 'rel_det': self.rel_det,
                'smin_over_smax': self.smin_over_smax,
                'size': self.entries.shape[0]}


@dataclass
class WitnessSet:
    """Selected witness points and their Jacobian blocks.

    Attributes
    ----------
    d, n : int
    setting : str
    periods : ndarray of int
        ``periods[k, j]``; ``n`` rows (affine) or ``n + 1`` rows
        (projective, row 0 for the homogenizing direction).
    points : list of list of RootPoint
        Same shape as ``periods``.
    blocks : list of JacobianBlock
        One per ``k`` (affine) or a single full matrix (projective).
    k_choices : list of int or None
        Projective only: the row coordinate ``k_j`` used by row ``j`` of
        block 0.
    valid : bool
    """
    d: int
    n: int
    setting: str
    periods: np.ndarray
    points: List[List[RootPoint]]
    blocks: List[JacobianBlock]
    k_choices: Optional[List[int]] = None
    valid: bool = False
    warnings: List[str] = field(default_factory=list)
    columns: list = field(default_factory=list)

    def rows(self):
        """Yield ``(block row k, j, row coordinate, point)`` in matrix order."""
        for b, row in enumerate(self.points):
            for j, w in enumerate(row, start=1):
                if self.setting == PROJECTIVE:
                    k = self.k_choices[j - 1] if b == 0 else b
                else:
                    k = b + 1
                yield b, j, k, w

    def full_matrix(self):
        """The whole square derivative matrix (block diagonal when affine)."""
        if self.setting == PROJECTIVE:
            return self.blocks[0].entries
        return linalg.block_diag(*[b.entries for b in self.blocks])

    def summary(self):
        """One row per witness point."""
        rows = []
        for b, j, k, w in self.rows():
            rows.append({'block': b if self.setting == PROJECTIVE else b + 1,
                         'j': j, 'k': k, 'period': w.period,
                         'point': ' '.join(w.fractions())})
        return pd.DataFrame(rows)

    def as_dict(self):
        return {'d': self.d, 'n': self.n, 'setting': self.setting,
                'valid': self.valid, 'periods': self.periods,
                'points': [[w.fractions() for w in row] for row in self.points],
                'blocks': self.blocks, 'k_choices': self.k_choices,
                'warnings': self.warnings,
                'columns': [{'m': m, 'index': list(I.entries)}
                            for m, I in self.columns]}


def _period_matrix(periods, rows, cols):
    arr = np.asarray(periods, dtype=np.int64)
    if arr.ndim == 0:
        arr = np.full((rows, cols), int(arr))
    elif arr.ndim == 1 and arr.size == rows * cols:
        arr = arr.reshape(rows, cols)
    if arr.shape != (rows, cols):
        raise ValueError(f'periods must form a {rows}x{cols} matrix, got '
                         f'shape {arr.shape}')
    if np.any(arr < 2):
        raise ValueError('witness periods must all be >= 2')
    return arr


def _warn(ws_warnings, message):
    warnings.warn(message, UserWarning)
    LOGGER.warning(message)
    ws_warnings.append(message)


class _Candidates:
    """Candidate points of one period with their residue matrix."""

    def __init__(self, d, p, n, caps):
        modulus = check_period_cap(d, p, caps) - 1
        if modulus >= MAX_MODULUS:
            raise PeriodCapError(f'd^p - 1 = {modulus} is too large for '
                                 f'residue arithmetic')
        self.d, self.p, self.modulus = d, p, modulus
        self.points = list(s_set(d, p, n, caps))
        self.residues = np.array([residues(w, modulus) for w in self.points],
                                 dtype=np.int64)
        self._rows = {}

    def rows(self, k, columns, setting):
        """Row-scaled derivative values of every candidate for row ``k``."""
        key = (k, setting)
        if key not in self._rows:
            self._rows[key] = _row_values(self.d, self.p, k, columns,
                                          self.residues, self.modulus, setting)
        return self._rows[key]

    def scaling(self, k):
        exps = self.residues[:, k - 1] * (self.d ** (self.p - 1) % self.modulus)
        return np.exp(2j * np.pi * (exps % self.modulus) / self.modulus)


def _row_values(d, p, k, columns, res, modulus, setting):
    shift = d ** (p - 1)
    out = np.zeros((len(res), len(columns)), dtype=complex)
    for c, (m, I) in enumerate(columns):
        I_aff = I.affine()
        ik = I_aff[k - 1]
        if m == k:
            prefactor = ik * shift - d ** p
            terms = affine_terms(d, p, k, I_aff)
        elif m == 0 and setting == PROJECTIVE and ik != 0:
            prefactor = -ik * shift
            terms = projective_terms(d, p, I_aff)
        else:
            continue
        total = np.zeros(len(res), dtype=complex)
        for exps in terms:
            exps = list(exps)
            exps[k - 1] += shift
            reduced = np.array([e % modulus for e in exps], dtype=np.int64)
            angle = np.sum((res * reduced) % modulus, axis=1) % modulus
            total += np.exp(2j * np.pi * angle / modulus)
        out[:, c] = prefactor * total
    return out


def _cofactors(chosen, size):
    # cofactor vector for expanding a size x size minor along a new last row
    if size == 1:
        return np.ones(1, dtype=complex)
    prev = np.asarray(chosen, dtype=complex)[:, :size]
    sign = (-1) ** (size - 1 + np.arange(size))
    return np.array([sign[c] * linalg.det(np.delete(prev, c, axis=1))
                     for c in range(size)])


def _pick(cands, values, chosen, size, used, tau, slot):
    """Choose the candidate maximizing the leading minor of order ``size``."""
    cof = _cofactors(chosen, size)
    scores = np.abs(values[:, :size] @ cof)
    prev_norms = np.prod([np.linalg.norm(r[:size]) for r in chosen]) if chosen else 1.0
    for idx in np.argsort(-scores, kind='stable'):
        w = cands.points[idx]
        key = orbit_key(w)
        if key in used:
            continue
        norm = prev_norms * np.linalg.norm(values[idx, :size])
        rel = scores[idx] / norm if norm else 0.0
        if rel <= tau:
            break
        return idx, key, rel
    raise WitnessExhaustedError(f'no candidate for witness slot (k, j) = '
                                f'{slot} keeps the leading minor above '
                                f'{tau:.1e}')


def _greedy(slots, columns, setting, cands_for, tol, used):
    """Run the induction over ``slots``, a list of ``(label, k, p)``."""
    chosen, scaling, picked = [], [], []
    for size, (label, k, p) in enumerate(slots, start=1):
        cands = cands_for(p)
        values = cands.rows(k, columns, setting)
        idx, key, rel = _pick(cands, values, chosen, size, used, tol.det, label)
        used.add(key)
        chosen.append(values[idx])
        scaling.append(cands.scaling(k)[idx])
        picked.append(cands.points[idx])
        LOGGER.debug('slot %s: %s (leading minor %.3e)', label, cands.points[idx], rel)
    return np.array(chosen), np.array(scaling), picked


def _candidate_cache(d, n, caps):
    cache = {}

    def get(p):
        if p not in cache:
            cache[p] = _Candidates(d, int(p), n, caps)
        return cache[p]
    return get


def select_witnesses(d, n, periods, tolerances=DEFAULT_TOLERANCES,
                     caps=DEFAULT_CAPS):
    """Select affine witness points by finite induction on ``j``.

    Parameters
    ----------
    d, n : int
        Degree and dimension.
    periods : int or array_like
        ``n x N_dn`` matrix of periods ``p_{k,j}`` (a scalar or a flat list
        of ``n N_dn`` values is accepted).

    Returns
    -------
    : WitnessSet

    Raises
    ------
    ValueError
        If a period is below 2.
    WitnessExhaustedError
        If no candidate keeps a leading minor above ``tolerances.det``.
    PeriodCapError
        If ``d^p`` exceeds the configured caps.

    """
    N = space_dims(d, n).N_dn
    periods = _period_matrix(periods, n, N)
    notes = []
    if np.any(periods < 4):
        _warn(notes, f'periods below 4 are outside the existence guarantee '
                     f'(min period {periods.min()})')
    indices = enumerate_admissible(d, n, AFFINE)
    cands_for = _candidate_cache(d, n, caps)
    used = set()
    points, blocks = [], []
    for k in range(1, n + 1):
        columns = [(k, I) for I in indices]
        slots = [((k, j + 1), k, periods[k - 1, j]) for j in range(N)]
        entries, scaling, picked = _greedy(slots, columns, AFFINE, cands_for,
                                           tolerances, used)
        points.append(picked)
        blocks.append(JacobianBlock.from_rows(entries, scaling))
    ws = WitnessSet(d=d, n=n, setting=AFFINE, periods=periods, points=points,
                    blocks=blocks, warnings=notes,
                    columns=[(m, I) for m in range(1, n + 1) for I in indices])
    ws.valid = all(b.rel_det > tolerances.det for b in blocks)
    LOGGER.info('affine witnesses d=%d n=%d: valid=%s', d, n, ws.valid)
    return ws


def projective_k_choices(d, n):
    """For each projective index ``I(j)``, the first ``k >= 1`` with
    ``i_k != 0``."""
    out = []
    for I in enumerate_admissible(d, n, PROJECTIVE):
        out.append(next(k for k in range(1, n + 1) if I[k] != 0))
    return out


def select_witnesses_projective(d, n, periods, tolerances=DEFAULT_TOLERANCES,
                                caps=DEFAULT_CAPS):
    """Select witness points for the projective family.

    Rows are ordered block 0 (homogenizing direction, row coordinate
    ``k_j``) then blocks ``1..n``; columns are the directions ``(m, I)``
    for ``m = 0..n``. One induction runs over the leading minors of the
    full matrix.

    Parameters
    ----------
    d, n : int
    periods : int or array_like
        ``(n + 1) x N_dn`` matrix of periods.

    Returns
    -------
    : WitnessSet
        ``blocks`` holds the single full matrix.

    """
    N = space_dims(d, n).N_dn
    periods = _period_matrix(periods, n + 1, N)
    notes = []
    bound = 5 if (d, n) == (2, 2) else 4
    if np.any(periods < bound):
        _warn(notes, f'periods below {bound} are outside the existence '
                     f'guarantee for d={d}, n={n} (min period {periods.min()})')
    indices = enumerate_admissible(d, n, PROJECTIVE)
    k_choices = projective_k_choices(d, n)
    columns = [(m, I) for m in range(0, n + 1) for I in indices]
    slots = [((0, j + 1), k_choices[j], periods[0, j]) for j in range(N)]
    for k in range(1, n + 1):
        slots += [((k, j + 1), k, periods[k, j]) for j in range(N)]
    entries, scaling, picked = _greedy(slots, columns, PROJECTIVE,
                                       _candidate_cache(d, n, caps),
                                       tolerances, set())
    points = [picked[b * N:(b + 1) * N] for b in range(n + 1)]
    block = JacobianBlock.from_rows(entries, scaling)
    ws = WitnessSet(d=d, n=n, setting=PROJECTIVE, periods=periods,
                    points=points, blocks=[block], k_choices=k_choices,
                    warnings=notes, columns=columns)
    ws.valid = block.rel_det > tolerances.det
    LOGGER.info('projective witnesses d=%d n=%d: valid=%s', d, n, ws.valid)
    return ws


def verify_witness_set(ws: WitnessSet, tolerances=DEFAULT_TOLERANCES):
    """Recompute every entry of a witness set from the closed-form
    derivatives and re-check its invariants.

    Returns
    -------
    : list of dict
        ``{'name', 'pass', 'detail'}`` records.

    """
    checks = []
    keys = []
    periods_ok = True
    for b, j, k, w in ws.rows():
        keys.append(orbit_key(w))
        periods_ok &= w.period == ws.periods[b, j - 1]
    checks.append({'name': 'exact_periods', 'pass': bool(periods_ok),
                   'detail': 'every point has its requested period'})
    checks.append({'name': 'distinct_orbits', 'pass': len(set(keys)) == len(keys),
                   'detail': f'{len(set(keys))} orbits for {len(keys)} points'})

    worst = 0.0
    if ws.setting == PROJECTIVE:
        matrices = [(ws.blocks[0], list(ws.rows()), ws.columns)]
    else:
        rows = list(ws.rows())
        N = len(ws.points[0])
        matrices = [(block, rows[i * N:(i + 1) * N],
                     [(m, I) for m, I in ws.columns if m == i + 1])
                    for i, block in enumerate(ws.blocks)]
    for block, rows, columns in matrices:
        for r, (b, j, k, w) in enumerate(rows):
            for c, (m, I) in enumerate(columns):
                value = partial_rho(DerivativeQuery.make(ws.d, k, m, I, w))
                value *= block.row_scaling[r]
                scale = max(1.0, abs(block.entries[r, c]))
                worst = max(worst, abs(value - block.entries[r, c]) / scale)
    checks.append({'name': 'entries_recomputed', 'pass': worst <= 1e-9,
                   'detail': f'largest relative deviation {worst:.2e}'})
    dets = [abs(linalg.det(block.entries)) /
            np.prod(np.linalg.norm(block.entries, axis=1)) for block in ws.blocks]
    checks.append({'name': 'determinants', 'pass': bool(min(dets) > tolerances.det),
                   'detail': f'smallest relative determinant {min(dets):.3e}'})
    return checks


@dataclass(frozen=True)
class GateRecord:
    """Both sides of a counting inequality, evaluated exactly."""
    d: int
    n: int
    p: int
    variant: str
    lhs: int
    rhs: int
    holds: bool
    in_hypothesis: bool
    strict: bool

    def as_dict(self):
        return {'d': self.d, 'n': self.n, 'p': self.p, 'variant': self.variant,
                'lhs': self.lhs, 'rhs': self.rhs, 'holds': self.holds,
                'in_hypothesis': self.in_hypothesis, 'strict': self.strict}


def counting_gate(d, n, p, variant='affine'):
    """Evaluate a counting inequality behind the witness guarantees.

    Variants
    --------
    ``affine``
        ``p n N < (d^(p-1) - d^[p/2]) (d^(p-1) - 1)^(n-1)``, for ``n >= 2``.
    ``affine-weak``
        Same with ``(p - 1) n N`` on the left.
    ``projective-weak``
        ``p (n+1) N <= (d^p - d^[p/2]) (d^p - 1)^(n-1)``.
    ``projective-strong``
        ``p n N < (d^(p-1) - d^[p/2]) (d^(p-1) - 1)^(n-2) (d^(p-2) - 1)``,
        for ``d = 2`` with ``p >= 5`` (``n = 2``) or ``p >= 4`` (``n >= 3``).

    Returns
    -------
    : GateRecord

    """
    if variant not in GATE_VARIANTS:
        raise ValueError(f'variant must be one of {GATE_VARIANTS}, got {variant!r}')
    N = space_dims(d, n).N_dn
    half = d ** (p // 2)
    strict = True
    if variant in ('affine', 'affine-weak'):
        lhs = (p if variant == 'affine' else p - 1) * n * N
        rhs = (d ** (p - 1) - half) * (d ** (p - 1) - 1) ** (n - 1)
        in_hyp = n >= 2 and p >= 4
    elif variant == 'projective-weak':
        lhs = p * (n + 1) * N
        rhs = (d ** p - half) * (d ** p - 1) ** (n - 1)
        strict = False
        in_hyp = p >= 4
    else:
        lhs = p * n * N
        rhs = ((d ** (p - 1) - half) * (d ** (p - 1) - 1) ** max(n - 2, 0) *
               (d ** (p - 2) - 1))
        in_hyp = d == 2 and ((n == 2 and p >= 5) or (n >= 3 and p >= 4))
    holds = lhs < rhs if strict else lhs <= rhs
    return GateRecord(d=d, n=n, p=p, variant=variant, lhs=lhs, rhs=rhs,
                      holds=bool(holds), in_hypothesis=bool(in_hyp),
                      strict=strict)


def gate_grid(d_range, n_range, p_range, variants=('affine', 'projective-weak')):
    """Evaluate :func:`counting_gate` over a grid.

    Returns
    -------
    : DataFrame
        One row per ``(d, n, p, variant)``.

    """
    rows = [counting_gate(d, n, p, v).as_dict()
            for v in variants for d in d_range for n in n_range for p in p_range]
    return pd.DataFrame(rows)


@dataclass(frozen=True)
class NonvanishingCount:
    count: int
    bound: int
    total: int

    def as_dict(self):
        return {'count': self.count, 'bound': self.bound, 'total': self.total}


def s_poly_nonvanishing_count(P: SparsePoly, d, p, n, tau=1e-9,
                              caps=DEFAULT_CAPS):
    """Count points of ``Per_p x Fix_p^(n-1)`` where ``P`` does not vanish.

    Parameters
    ----------
    P : SparsePoly
        Polynomial of degree at most ``d^p - d^(p-1)`` in every variable.
    d, p, n : int
    tau : float, optional
        ``|P| > tau`` counts as nonvanishing.

    Returns
    -------
    : NonvanishingCount
        The count, the lower bound
        ``(d^(p-1) - d^[p/2]) (d^(p-1) - 1)^(n-1)`` and the candidate count.

    Raises
    ------
    ValueError
        If ``P`` exceeds the degree cap.
    MultispecError
        If a nonzero ``P`` vanishes on more points than the bound allows.

    """
    if P.n != n:
        raise ValueError(f'polynomial in {P.n} variables, expected {n}')
    cap = d ** p - d ** (p - 1)
    if not is_s_polynomial(P, cap):
        raise ValueError(f'degrees {P.degrees()} exceed the cap {cap}')
    bound = (d ** (p - 1) - d ** (p // 2)) * (d ** (p - 1) - 1) ** (n - 1)
    count = total = 0
    for w in s_set(d, p, n, caps):
        total += 1
        if abs(P.evaluate_angles(w)) > tau:
            count += 1
    if not P.is_zero() and count < bound:
        raise MultispecError(f'nonzero polynomial vanishes on {total - count} '
                             f'of {total} points; only {count} < {bound} left')
    return NonvanishingCount(count=count, bound=bound, total=total)
