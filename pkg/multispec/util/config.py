"""Configuration for multispec runs.

Environment variables read by multispec:

 - ``MULTISPEC_THREADS``: cap on worker threads for concurrent probes
 - ``MULTISPEC_CONFIG``: JSON file with overrides of the defaults below

"""
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional


def user_home():
    """Returns the user's home directory.

    """
    return os.environ.get('HOME')


def multispec_threads():
    """Returns the maximum number of worker threads (at least 1).

    """
    value = os.environ.get('MULTISPEC_THREADS', '1')
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def multispec_config():
    """Returns the path to the default configuration file, if any.

    """
    return os.environ.get('MULTISPEC_CONFIG')


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by all modules.

    Attributes
    ----------
    newton : float
        Residual tolerance of Newton solves of cycles.
    parab : float
        Distance of an eigenvalue to 1 below which tracking substeps.
    parab_abort : float
        Distance of an eigenvalue to 1 below which tracking aborts.
    det : float
        Relative determinant threshold of witness certificates.
    rank : float
        Relative singular value threshold of rank certificates.
    fd_step : float
        Finite difference step in the perturbation parameter.
    match_factor : float
        Endpoint matching tolerance of loops, in units of ``newton``.
    """
    newton: float = 1e-12
    parab: float = 1e-6
    parab_abort: float = 1e-10
    det: float = 1e-8
    rank: float = 1e-7
    fd_step: float = 1e-5
    match_factor: float = 10.0

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f'tolerance {f.name} must be positive')

    @property
    def match(self):
        return self.match_factor * self.newton


@dataclass(frozen=True)
class Caps:
    """Size caps respected by downstream modules."""
    max_period: int = 12
    max_dp: int = 2**62
    max_halvings: int = 20
    newton_max_iter: int = 100

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f'cap {f.name} must be positive')


DEFAULT_TOLERANCES = Tolerances()
DEFAULT_CAPS = Caps()


@dataclass(frozen=True)
class RunConfig:
    """Configuration of a single multispec run.

    Attributes
    ----------
    seed : int
        Seed for sampled probes.
    tolerances : Tolerances
    caps : Caps
    output : str or None
        Path of the JSON report; ``None`` writes to stdout.
    threads : int
        Worker threads for concurrent probes.
    """
    seed: int = 0
    tolerances: Tolerances = field(default_factory=Tolerances)
    caps: Caps = field(default_factory=Caps)
    output: Optional[str] = None
    threads: int = 1

    def as_dict(self):
        return asdict(self)

    def with_overrides(self, **kwargs):
        """Return a copy with the non-``None`` keyword arguments replaced."""
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs)


def _build(cls, values, what):
    if not isinstance(values, dict):
        raise ValueError(f'{what} must be a JSON object')
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ValueError(f'unknown {what} keys: {", ".join(unknown)}')
    return cls(**values)


def config_from_dict(values):
    """Build a :class:`RunConfig` from a (possibly partial) dictionary.

    Parameters
    ----------
    values : dict
        Keys of :class:`RunConfig`; ``tolerances`` and ``caps`` may be partial.

    Returns
    -------
    : RunConfig

    """
    values = dict(values)
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ValueError(f'unknown config keys: {", ".join(unknown)}')
    if 'tolerances' in values:
        values['tolerances'] = _build(Tolerances, values['tolerances'],
                                      'tolerances')
    if 'caps' in values:
        values['caps'] = _build(Caps, values['caps'], 'caps')
    values.setdefault('threads', multispec_threads())
    return RunConfig(**values)


def load_config(path=None):
    """Load a :class:`RunConfig`, applying overrides from a JSON file.

    Parameters
    ----------
    path : str, optional
        JSON file; defaults to ``$MULTISPEC_CONFIG`` when set.

    Returns
    -------
    : RunConfig

    """
    if path is None:
        path = multispec_config()
    if path is None:
        return config_from_dict({})
    with open(path) as f:
        return config_from_dict(json.load(f))
