"""Tests for multispec/util/config.py"""
import json
import os
import pytest
from multispec.util import config


def test_user_home():
    """Verify whether user_home() returns a string
    that represents the correct path to the user's home directory"""
    assert config.user_home() == os.environ.get('HOME')


def test_multispec_threads(monkeypatch):
    """Verify that multispec_threads() reads MULTISPEC_THREADS and falls
    back to 1 on missing or invalid values"""
    monkeypatch.delenv('MULTISPEC_THREADS', raising=False)
    assert config.multispec_threads() == 1
    monkeypatch.setenv('MULTISPEC_THREADS', '4')
    assert config.multispec_threads() == 4
    monkeypatch.setenv('MULTISPEC_THREADS', 'many')
    assert config.multispec_threads() == 1
    monkeypatch.setenv('MULTISPEC_THREADS', '-3')
    assert config.multispec_threads() == 1


def test_defaults(monkeypatch):
    """Verify the default tolerances and caps"""
    monkeypatch.delenv('MULTISPEC_CONFIG', raising=False)
    cfg = config.load_config()
    assert cfg.tolerances.newton == 1e-12
    assert cfg.tolerances.parab == 1e-6
    assert cfg.tolerances.parab_abort == 1e-10
    assert cfg.tolerances.det == 1e-8
    assert cfg.tolerances.rank == 1e-7
    assert cfg.tolerances.fd_step == 1e-5
    assert cfg.tolerances.match == pytest.approx(1e-11)
    assert cfg.caps.max_period == 12
    assert cfg.caps.max_dp == 2**62
    assert cfg.caps.max_halvings == 20


@pytest.mark.usefixtures("run_config")
def test_load_config(run_config):
    """Verify that a JSON file overrides only the keys it names"""
    cfg = config.load_config(run_config)
    assert cfg.seed == 7
    assert cfg.tolerances.det == 1e-9
    assert cfg.tolerances.newton == 1e-12
    assert cfg.caps.max_period == 10
    assert cfg.caps.max_dp == 2**62


@pytest.mark.usefixtures("run_config")
def test_config_env(run_config, monkeypatch):
    """Verify that MULTISPEC_CONFIG names the default configuration file"""
    monkeypatch.setenv('MULTISPEC_CONFIG', run_config)
    assert config.multispec_config() == run_config
    assert config.load_config().seed == 7


def test_config_rejects(tmp_path):
    """Verify that unknown keys and non-positive tolerances are rejected"""
    with pytest.raises(ValueError, match='unknown config keys'):
        config.config_from_dict({'colour': 'red'})
    with pytest.raises(ValueError, match='unknown tolerances keys'):
        config.config_from_dict({'tolerances': {'newtn': 1e-3}})
    with pytest.raises(ValueError, match='must be positive'):
        config.config_from_dict({'tolerances': {'det': 0}})
    path = tmp_path / 'bad.json'
    path.write_text(json.dumps({'caps': {'max_period': -1}}))
    with pytest.raises(ValueError):
        config.load_config(str(path))


def test_with_overrides():
    """Verify that with_overrides() ignores None and keeps the echo
    deterministic"""
    cfg = config.RunConfig().with_overrides(seed=3, output=None, threads=2)
    assert cfg.seed == 3
    assert cfg.output is None
    assert cfg.threads == 2
    echo = cfg.as_dict()
    assert list(echo) == ['seed', 'tolerances', 'caps', 'output', 'threads']
    assert echo['tolerances']['rank'] == 1e-7
