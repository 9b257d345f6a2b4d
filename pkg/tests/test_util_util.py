"""Tests for multispec/util/util.py"""
import json
from fractions import Fraction
import numpy as np
import pandas as pd
import pytest
from multispec.util import util


def test_parse_complex():
    """Verify that complex numbers parse from pairs, numbers and strings"""
    assert util.parse_complex([0.5, -1]) == 0.5 - 1j
    assert util.parse_complex('0.1+0.2j') == 0.1 + 0.2j
    assert util.parse_complex('0.1,0.2') == 0.1 + 0.2j
    assert util.parse_complex(3) == 3 + 0j
    with pytest.raises(ValueError):
        util.parse_complex('one')
    with pytest.raises(ValueError):
        util.parse_complex([1, 2, 3])


def test_parse_lists():
    """Verify integer lists, inclusive ranges and a/m fractions"""
    assert util.parse_int_list('4,4,5') == [4, 4, 5]
    assert util.parse_range('2..5') == [2, 3, 4, 5]
    assert util.parse_range('2,4') == [2, 4]
    assert util.parse_fraction('1/3') == (1, 3)
    assert util.parse_fraction('0') is None
    with pytest.raises(ValueError):
        util.parse_fraction('1:3')
    with pytest.raises(ValueError):
        util.parse_int_list('1,x')


def test_to_jsonable():
    """Verify conversion of numpy, complex, fraction and DataFrame values"""
    df = pd.DataFrame([{'a': np.int64(1), 'b': 2.5}])
    out = util.to_jsonable({'z': 1 + 2j, 'f': Fraction(2, 6),
                            'arr': np.array([1.0, np.inf]), 'df': df,
                            'flag': np.bool_(True), 's': {3, 1}})
    assert out == {'z': [1.0, 2.0], 'f': '1/3', 'arr': [1.0, 'inf'],
                   'df': [{'a': 1, 'b': 2.5}], 'flag': True, 's': [1, 3]}


def test_dump_json(tmp_path):
    """Verify that dump_json() sorts keys, ends with a newline and writes
    the same text it returns"""
    path = tmp_path / 'out.json'
    text = util.dump_json({'b': 1, 'a': [1j]}, str(path))
    assert text.endswith('\n')
    assert text.index('"a"') < text.index('"b"')
    assert path.read_text() == text
    assert json.loads(text) == {'a': [[0.0, 1.0]], 'b': 1}
