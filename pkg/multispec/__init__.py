from .combinatorics import space_dims
from .combinatorics import enumerate_admissible
from .combinatorics import MultiIndex
from .powerlattice import fix_set
from .powerlattice import per_set
from .powerlattice import make_point
from .powerlattice import orbit_of
from .derivatives import DerivativeQuery
from .derivatives import partial_rho
from .derivatives import q_poly
from .continuation import PolyMapDense
from .continuation import power_map
from .continuation import product_map
from .continuation import solve_cycle
from .continuation import track_path
from .continuation import rank_certificate
from .continuation import multiplier_spectrum
from .continuation import regularity_probe
from .witness import select_witnesses
from .witness import select_witnesses_projective
from .witness import counting_gate
from .witness import s_poly_nonvanishing_count
from .monodromy import load_loop
from .monodromy import run_loop
from .monodromy import eigendirection_swap_loop
from .monodromy import hyperbolicity_bound
from .monodromy import disc_chain_certificate
from .__version__ import __version__


# if somebody does "from somepackage import *", this is what they will
# be able to access:
__all__ = [
        'space_dims',
        'enumerate_admissible',
        'MultiIndex',
        'fix_set',
        'per_set',
        'make_point',
        'orbit_of',
        'DerivativeQuery',
        'partial_rho',
        'q_poly',
        'PolyMapDense',
        'power_map',
        'product_map',
        'solve_cycle',
        'track_path',
        'rank_certificate',
        'multiplier_spectrum',
        'regularity_probe',
        'select_witnesses',
        'select_witnesses_projective',
        'counting_gate',
        's_poly_nonvanishing_count',
        'load_loop',
        'run_loop',
        'eigendirection_swap_loop',
        'hyperbolicity_bound',
        'disc_chain_certificate'
        ]
