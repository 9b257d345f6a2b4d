from multispec import continuation
from multispec import witness
import json
import pytest


C_SMALL = (0.013 + 0.021j, -0.017 + 0.009j)


@pytest.fixture
def power_map_22():
    yield continuation.power_map(2, 2)


@pytest.fixture
def product_map_small():
    """The product map (z_1^2 + c_1, z_2^2 + c_2) with |c| about 0.02"""
    yield continuation.product_map(C_SMALL, d=2)


@pytest.fixture(scope='module')
def witnesses_224():
    """Affine witness set for d=2, n=2 with every period equal to 4

    Returns
    -------
    ws : WitnessSet
    """
    yield witness.select_witnesses(2, 2, 4)


@pytest.fixture
def run_config(tmp_path, dbug):
    """Writes a small configuration file and yields its path"""
    path = tmp_path / 'config.json'
    values = {'seed': 7, 'tolerances': {'det': 1e-9}, 'caps': {'max_period': 10}}
    path.write_text(json.dumps(values))
    if dbug:
        print(f'configuration written to {path}')
    yield str(path)
