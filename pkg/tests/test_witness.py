"""Tests for multispec/witness.py"""
import contextlib
import numpy as np
import pytest
from multispec import witness
from multispec.derivatives import SparsePoly
from multispec.powerlattice import orbit_key
from multispec.util.errors import WitnessExhaustedError


def check_names(checks):
    return {c['name']: c['pass'] for c in checks}


def test_select_witnesses_224(witnesses_224):
    """Verify the affine witness set for d=2, n=2, p=4"""
    ws = witnesses_224
    assert ws.valid
    assert ws.warnings == []
    assert [len(row) for row in ws.points] == [3, 3]
    assert all(w.period == 4 for row in ws.points for w in row)
    keys = [orbit_key(w) for row in ws.points for w in row]
    assert len(set(keys)) == 6
    assert all(b.rel_det > 1e-8 for b in ws.blocks)
    assert ws.full_matrix().shape == (6, 6)
    assert np.all(ws.full_matrix()[:3, 3:] == 0)


def test_verify_witnesses_224(witnesses_224):
    """Verify that every check of verify_witness_set() passes"""
    checks = check_names(witness.verify_witness_set(witnesses_224))
    assert checks == {'exact_periods': True, 'distinct_orbits': True,
                      'entries_recomputed': True, 'determinants': True}


def test_witness_summary(witnesses_224):
    """Verify the tabular summary of a witness set"""
    table = witnesses_224.summary()
    assert len(table) == 6
    assert list(table['k']) == [1, 1, 1, 2, 2, 2]
    assert set(table['period']) == {4}
    record = witnesses_224.as_dict()
    assert record['valid']
    assert len(record['columns']) == 6


def test_witness_periods():
    """Verify the validation of the period matrix"""
    with pytest.raises(ValueError):
        witness.select_witnesses(2, 2, 1)
    with pytest.raises(ValueError):
        witness.select_witnesses(2, 2, [4, 4, 4])
    with pytest.warns(UserWarning, match='below 4'):
        with contextlib.suppress(WitnessExhaustedError):
            witness.select_witnesses(2, 2, 3)


def test_heterogeneous_periods():
    """Verify selection with a different period in every slot"""
    periods = [[4, 5, 4], [5, 4, 5]]
    ws = witness.select_witnesses(2, 2, periods)
    assert ws.valid
    got = [[w.period for w in row] for row in ws.points]
    assert got == periods
    assert check_names(witness.verify_witness_set(ws))['exact_periods']


def test_select_witnesses_projective():
    """Verify the projective witness set for d=2, n=2, p=5"""
    ws = witness.select_witnesses_projective(2, 2, 5)
    assert ws.valid
    assert ws.k_choices == [1, 2, 1]
    assert sum(len(row) for row in ws.points) == 9
    assert ws.full_matrix().shape == (9, 9)
    assert all(check_names(witness.verify_witness_set(ws)).values())
    with pytest.warns(UserWarning, match='below 5'):
        with contextlib.suppress(WitnessExhaustedError):
            witness.select_witnesses_projective(2, 2, 4)


def test_select_witnesses_degree_3(slow):
    """Verify the affine and projective witness sets for d=3, n=2, p=4"""
    if not slow:
        pytest.skip('use --slow to run the d=3 witness selection')
    ws = witness.select_witnesses(3, 2, 4)
    assert ws.valid
    assert all(check_names(witness.verify_witness_set(ws)).values())
    ws = witness.select_witnesses_projective(3, 2, 4)
    assert ws.valid
    assert ws.full_matrix().shape == (21, 21)


def test_counting_gate():
    """Verify both sides of the counting inequalities at d=2, n=2, p=4"""
    gate = witness.counting_gate(2, 2, 4)
    assert (gate.lhs, gate.rhs, gate.holds) == (24, 28, True)
    assert gate.in_hypothesis
    gate = witness.counting_gate(2, 2, 4, 'projective-weak')
    assert (gate.lhs, gate.rhs, gate.holds, gate.strict) == (36, 180, True, False)
    gate = witness.counting_gate(2, 2, 4, 'projective-strong')
    assert not gate.in_hypothesis
    assert witness.counting_gate(2, 2, 5, 'projective-strong').holds
    assert not witness.counting_gate(2, 1, 4).in_hypothesis
    with pytest.raises(ValueError):
        witness.counting_gate(2, 2, 4, 'weighted')


def test_gate_grid():
    """Verify that every inequality holds inside its hypothesis"""
    grid = witness.gate_grid(range(2, 5), range(2, 5), range(4, 9),
                             variants=witness.GATE_VARIANTS)
    assert len(grid) == 4 * 3 * 3 * 5
    inside = grid[grid['in_hypothesis']]
    assert len(inside) > 0
    assert inside['holds'].all()


def test_s_poly_nonvanishing_count():
    """Verify nonvanishing counts of s-polynomials on the candidate set"""
    one = SparsePoly({(0, 0): 1}, 2)
    result = witness.s_poly_nonvanishing_count(one, 2, 4, 2)
    assert (result.count, result.bound, result.total) == (180, 28, 180)
    diff = SparsePoly({(1, 0): 1, (0, 1): -1}, 2)
    result = witness.s_poly_nonvanishing_count(diff, 2, 4, 2)
    assert result.count == 180 - 12
    zero = SparsePoly({}, 2)
    assert witness.s_poly_nonvanishing_count(zero, 2, 4, 2).count == 0
    with pytest.raises(ValueError):
        witness.s_poly_nonvanishing_count(SparsePoly({(9, 0): 1}, 2), 2, 4, 2)
    with pytest.raises(ValueError):
        witness.s_poly_nonvanishing_count(one, 2, 4, 3)
