import pytest
from fixtures.maps import power_map_22
from fixtures.maps import product_map_small
from fixtures.maps import witnesses_224
from fixtures.maps import run_config
