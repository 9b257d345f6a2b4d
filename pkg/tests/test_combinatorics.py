"""Tests for multispec/combinatorics.py"""
from math import comb
import pytest
from multispec import combinatorics
from multispec.combinatorics import AFFINE, PROJECTIVE, MultiIndex


def test_space_dims():
    """Verify the dimension formulas at small degrees"""
    dims = combinatorics.space_dims(2, 2)
    assert dims.N_dn == 3
    assert dims.affine_moduli_dim == 6
    assert dims.proj_moduli_dim == 9
    assert dims.coeff_count == 12
    assert combinatorics.space_dims(3, 2).N_dn == 7
    assert combinatorics.space_dims(2, 1).N_dn == 1
    with pytest.raises(ValueError):
        combinatorics.space_dims(1, 2)
    with pytest.raises(ValueError):
        combinatorics.space_dims(2, 0)


@pytest.mark.parametrize("setting", [AFFINE, PROJECTIVE])
def test_admissible_count(setting):
    """Verify that there are exactly N_dn admissible indices for
    d in [2, 4] and n in [1, 4]"""
    for d in range(2, 5):
        for n in range(1, 5):
            indices = combinatorics.enumerate_admissible(d, n, setting)
            assert len(indices) == comb(d + n, n) - n - 1
            assert len(set(indices)) == len(indices)
            assert all(combinatorics.is_admissible(I, d) for I in indices)


def test_graded_order():
    """Verify the graded order: ascending degree, then lexicographically
    descending entries"""
    affine = combinatorics.enumerate_admissible(2, 2)
    assert [I.entries for I in affine] == [(1, 0), (0, 1), (1, 1)]
    proj = combinatorics.enumerate_admissible(2, 2, PROJECTIVE)
    assert [I.entries for I in proj] == [(1, 1, 0), (1, 0, 1), (0, 1, 1)]
    full = combinatorics.all_multi_indices(2, 2)
    assert full[0].entries == (0, 0)
    assert len(full) == comb(4, 2)


def test_is_admissible():
    """Verify the admissibility rules of both settings"""
    assert not combinatorics.is_admissible(MultiIndex((0, 0)), 2)
    assert not combinatorics.is_admissible(MultiIndex((2, 0)), 2)
    assert not combinatorics.is_admissible(MultiIndex((3, 0)), 3)
    assert combinatorics.is_admissible(MultiIndex((2, 1)), 3)
    assert combinatorics.is_admissible(MultiIndex((1, 1)), 3)
    assert not combinatorics.is_admissible(MultiIndex((1, 0, 0), PROJECTIVE), 2)
    assert not combinatorics.is_admissible(MultiIndex((2, 0, 0), PROJECTIVE), 2)
    assert combinatorics.is_admissible(MultiIndex((1, 1, 0), PROJECTIVE), 2)


def test_multi_index():
    """Verify MultiIndex validation, degree and monomial evaluation"""
    I = MultiIndex((1, 2))
    assert I.degree == 3
    assert I.n == 2
    assert str(I) == '(1,2)'
    assert I.monomial([2, 3]) == 18
    J = MultiIndex((1, 1, 0), PROJECTIVE)
    assert J.n == 2
    assert J.affine() == (1, 0)
    assert J.monomial([5, 7]) == 5
    with pytest.raises(ValueError):
        MultiIndex((-1, 0))
    with pytest.raises(ValueError):
        MultiIndex((1,), 'weighted')
    with pytest.raises(ValueError):
        I.monomial([1, 2, 3])


def test_index_maps():
    """Verify drop_k, projective_lift and affine_part"""
    I = MultiIndex((1, 1))
    assert combinatorics.drop_k(I, 1).entries == (0, 1)
    assert combinatorics.drop_k(I, 2).entries == (1, 0)
    lifted = combinatorics.projective_lift(MultiIndex((1, 0)), 2)
    assert lifted == MultiIndex((1, 1, 0), PROJECTIVE)
    assert combinatorics.affine_part(lifted) == MultiIndex((1, 0))
    with pytest.raises(ValueError):
        combinatorics.drop_k(I, 3)
    with pytest.raises(ValueError):
        combinatorics.projective_lift(MultiIndex((2, 2)), 3)
