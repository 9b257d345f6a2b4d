"""Utility methods for the multispec package: parsing of command line values
and JSON serialization of results.

Complex numbers are written as ``[re, im]`` pairs and exact angles as
``"a/m"`` strings.
"""
import dataclasses
import json
import math
from fractions import Fraction

import numpy as np
import pandas as pd


def complex_pair(z):
    """Return ``[re, im]`` for a complex number."""
    z = complex(z)
    return [z.real, z.imag]


def complex_list(values):
    """Return a list of ``[re, im]`` pairs."""
    return [complex_pair(z) for z in np.ravel(values)]


def parse_complex(obj) -> complex:
    """Parse a complex number from ``[re, im]``, a number or a string.

    Parameters
    ----------
    obj : list, tuple, int, float, complex or str
        ``"0.1+0.2j"``, ``"0.1,0.2"`` and ``[0.1, 0.2]`` are all accepted.

    Returns
    -------
    : complex

    """
    if isinstance(obj, (list, tuple)):
        if len(obj) != 2:
            raise ValueError(f'complex pair must have 2 entries, got {obj!r}')
        return complex(float(obj[0]), float(obj[1]))
    if isinstance(obj, str):
        text = obj.strip().replace(' ', '')
        if ',' in text:
            return parse_complex(text.split(','))
        try:
            return complex(text.replace('i', 'j'))
        except ValueError:
            raise ValueError(f'cannot parse complex number {obj!r}') from None
    return complex(obj)


def parse_int_list(text):
    """Parse ``"1,2,3"`` into ``[1, 2, 3]``."""
    try:
        return [int(s) for s in str(text).split(',') if s.strip() != '']
    except ValueError:
        raise ValueError(
            f'expected comma separated integers, got {text!r}') from None


def parse_fraction(text):
    """Parse ``"a/m"`` into the integer pair ``(a, m)``; ``"0"`` means zero.

    Returns
    -------
    : tuple of int or None
        ``None`` for the zero coordinate.

    """
    text = str(text).strip()
    if text in ('0', 'zero', 'Z'):
        return None
    if '/' not in text:
        raise ValueError(f'expected a/m, got {text!r}')
    a, m = text.split('/', 1)
    try:
        return int(a), int(m)
    except ValueError:
        raise ValueError(f'expected a/m, got {text!r}') from None


def parse_range(text):
    """Parse ``"2..5"`` (inclusive) or ``"2,4"`` into a list of integers."""
    text = str(text).strip()
    if '..' in text:
        lo, hi = text.split('..', 1)
        return list(range(int(lo), int(hi) + 1))
    return parse_int_list(text)


def to_jsonable(obj):
    """Recursively convert results into JSON compatible values.

    Handles numpy scalars and arrays, complex numbers, fractions, dataclasses,
    pandas DataFrames (as records) and objects with an ``as_dict`` method.
    Non-finite floats become strings.

    """
    if obj is None or isinstance(obj, (bool, np.bool_, str)):
        return bool(obj) if isinstance(obj, np.bool_) else obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return value
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_pair(obj)
    if isinstance(obj, Fraction):
        return f'{obj.numerator}/{obj.denominator}'
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, pd.DataFrame):
        return to_jsonable(obj.to_dict(orient='records'))
    if hasattr(obj, 'as_dict'):
        return to_jsonable(obj.as_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return sorted((to_jsonable(v) for v in obj), key=json.dumps)
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return str(obj)


def dump_json(obj, path=None):
    """Serialize ``obj`` deterministically; write it to ``path`` if given.

    Returns
    -------
    : str
        The JSON text (sorted keys, newline terminated).

    """
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + '\n'
    if path is not None:
        with open(path, 'w') as f:
            f.write(text)
    return text
