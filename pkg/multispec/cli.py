"""Command line front end: ``multispec <command> [options]``.

Every command writes a JSON report

    {"schema": "multispec-report/1", "command": ..., "config": ...,
     "results": ..., "checks": [{"name", "pass", "detail"}, ...]}

to ``--output`` (or stdout). The exit code is 0 when every check passes, 1
when a check fails or a numerical method gives up, and 2 on usage errors.
"""
import argparse
import json
import logging
import re
import sys

from multispec import (combinatorics, continuation, derivatives, monodromy,
                       powerlattice, witness)
from multispec.__version__ import __version__
from multispec.combinatorics import AFFINE, PROJECTIVE, MultiIndex
from multispec.util import config
from multispec.util.errors import MultispecError
from multispec.util.util import (dump_json, parse_complex, parse_int_list,
                                 parse_range)

LOGGER = logging.getLogger(__name__)

SCHEMA = 'multispec-report/1'


class UsageError(ValueError):
    """Raised for invalid command line input."""


def check(name, passed, detail=''):
    return {'name': name, 'pass': bool(passed), 'detail': detail}


def _setting(args):
    return PROJECTIVE if getattr(args, 'projective', False) else AFFINE


def cmd_dims(args, cfg):
    dims = combinatorics.space_dims(args.d, args.n)
    affine = combinatorics.enumerate_admissible(args.d, args.n, AFFINE)
    proj = combinatorics.enumerate_admissible(args.d, args.n, PROJECTIVE)
    results = {'dims': dims,
               'affine_indices': [list(I.entries) for I in affine],
               'projective_indices': [list(I.entries) for I in proj]}
    checks = [check('affine_count', len(affine) == dims.N_dn,
                    f'{len(affine)} admissible affine indices'),
              check('projective_count', len(proj) == dims.N_dn,
                    f'{len(proj)} admissible projective indices')]
    return results, checks


def cmd_lattice(args, cfg):
    table = powerlattice.lattice_summary(args.d, args.p, args.n, cfg.caps)
    partition = powerlattice.partition_count(args.d, args.p, cfg.caps)
    checks = [check('partition_identity', partition == args.d ** args.p,
                    f'sum over divisors = {partition}'),
              check('per_bound', bool((table['per'] >= table['per_bound']).all()),
                    '|Per_k| >= d^k - d^[k/2] for every k'),
              check('fix_count', bool((table['fix'] == args.d ** table['period'] - 1).all()),
                    '|Fix_k| = d^k - 1')]
    return {'table': table}, checks


def cmd_deriv(args, cfg):
    setting = _setting(args)
    I = MultiIndex(tuple(parse_int_list(args.index)), setting)
    w0 = powerlattice.make_point(parse_point(args.point), args.d)
    if w0.n != args.n:
        raise UsageError(f'--point has {w0.n} coordinates, --n is {args.n}')
    q = derivatives.DerivativeQuery.make(args.d, args.k, args.m, I, w0,
                                         p=args.p)
    report = derivatives.derivative_report(q, fd_check=args.fd_check,
                                           tolerances=cfg.tolerances,
                                           caps=cfg.caps)
    checks = []
    if args.fd_check:
        scale = max(1.0, abs(report['value']))
        checks.append(check('fd_agreement', report['fd_delta'] <= 1e-6 * scale,
                            f'|closed form - finite difference| = '
                            f'{report["fd_delta"]:.2e}'))
    if report.get('q_expected_degrees') is not None:
        checks.append(check('q_degrees',
                            tuple(report['q_degrees']) == tuple(report['q_expected_degrees']),
                            'degrees of Q match the closed form'))
    return {'query': {'d': q.d, 'n': q.n, 'p': q.p, 'k': q.k, 'm': q.m,
                      'index': list(I.entries), 'setting': setting,
                      'point': w0.fractions()},
            'derivative': report}, checks


def _periods(args, rows, d, n):
    values = parse_int_list(args.periods)
    N = combinatorics.space_dims(d, n).N_dn
    if len(values) == 1:
        return values[0]
    if len(values) != rows * N:
        raise UsageError(f'--periods needs 1 or {rows * N} values, got {len(values)}')
    return values


def cmd_witness(args, cfg):
    if args.projective:
        ws = witness.select_witnesses_projective(
            args.d, args.n, _periods(args, args.n + 1, args.d, args.n),
            cfg.tolerances, cfg.caps)
    else:
        ws = witness.select_witnesses(
            args.d, args.n, _periods(args, args.n, args.d, args.n),
            cfg.tolerances, cfg.caps)
    checks = [check('valid', ws.valid, f'{len(ws.blocks)} block(s) certified')]
    if args.verify:
        checks += witness.verify_witness_set(ws, cfg.tolerances)
    return {'witnesses': ws, 'summary': ws.summary()}, checks


def _cs(args, n):
    cs = [parse_complex(c) for c in args.c]
    if len(cs) == 1:
        cs = cs * n
    if len(cs) != n:
        raise UsageError(f'--c needs 1 or {n} values, got {len(cs)}')
    return cs


def cmd_verify_rank(args, cfg):
    ws = witness.select_witnesses(args.d, args.n,
                                  _periods(args, args.n, args.d, args.n),
                                  cfg.tolerances, cfg.caps)
    base = continuation.product_map(_cs(args, args.n), d=args.d)
    report = continuation.rank_certificate(base, ws, h=args.h,
                                           tolerances=cfg.tolerances,
                                           caps=cfg.caps)
    svals = report.singular_values
    checks = [check('witnesses_valid', ws.valid, 'witness blocks nonsingular'),
              check('full_rank', report.certified_full_rank,
                    f'rank {report.rank_at_tol} of {report.jacobian.shape[0]}, '
                    f'smin/smax = {svals[-1] / svals[0]:.3e}')]
    return {'rank': report, 'witnesses': ws}, checks


def _loop_checks(result):
    return [check('commutes_with_dynamics', result.commutes_with_dynamics,
                  f'cycles {result.cycles()}')]


def cmd_track(args, cfg):
    spec = monodromy.load_loop(args.loop)
    if args.family is not None and args.family != spec.family_id:
        raise UsageError(f'--family {args.family} differs from the loop file '
                         f'family {spec.family_id}')
    result = monodromy.run_loop(spec, cfg.tolerances, cfg.caps, cfg.threads)
    return {'loop': {'family': spec.family_id, 'steps': len(spec.path) - 1},
            'permutation': result}, _loop_checks(result)


def cmd_monodromy(args, cfg):
    if args.eigendirection:
        result = monodromy.eigendirection_swap_loop(
            args.theta, args.alpha, args.eps, args.steps, args.c0,
            center=parse_complex(args.center), tolerances=cfg.tolerances,
            caps=cfg.caps)
        swapped = result.eigendirection_swaps[0][1]
        return ({'permutation': result, 'swapped': swapped},
                _loop_checks(result))
    if args.loop is not None:
        spec = monodromy.load_loop(args.loop)
    elif args.anchor is not None:
        spec = monodromy.anchor_loop(parse_complex(args.anchor), args.radius,
                                     args.steps)
    else:
        raise UsageError('monodromy needs --loop, --anchor or --eigendirection')
    result = monodromy.run_loop(spec, cfg.tolerances, cfg.caps, cfg.threads)
    return {'loop': {'family': spec.family_id, 'steps': len(spec.path) - 1},
            'permutation': result}, _loop_checks(result)


def cmd_certify_hyperbolic(args, cfg):
    with open(args.spec) as f:
        spec = json.load(f)
    polys = [[parse_complex(c) for c in P] for P in spec['polys']]
    alphas = [parse_complex(a) for a in spec['alphas']]
    eps = float(spec['eps'])
    cert = monodromy.disc_chain_certificate(
        polys, alphas, parse_complex(spec['b']), eps,
        float(spec.get('expansion', 2.0)), int(spec.get('samples', 512)))
    moduli = [abs(a) for a in alphas]
    bound = monodromy.hyperbolicity_bound(len(polys[0]) - 1, eps, min(moduli),
                                          max(moduli))
    return ({'certificate': cert, 'bound': bound},
            [check('chain_holds', cert.holds,
                   f'kappa = {cert.kappa:g}, |b| = {abs(parse_complex(spec["b"])):g}, '
                   f'A = {bound:g}')])


GRID = re.compile(r'([dnp])=([^=]+?)(?=,[dnp]=|$)')


def parse_point(text):
    """Split ``"1/3,2/7"`` (commas or whitespace) into coordinate strings."""
    coords = [c for c in re.split(r'[,\s]+', text.strip()) if c]
    if not coords:
        raise UsageError('--point needs at least one coordinate')
    return coords


def parse_grid(text):
    """Parse ``"d=2..5,n=1..4,p=4..8"`` into a dict of integer lists."""
    found = {key: parse_range(value) for key, value in GRID.findall(text)}
    if set(found) != {'d', 'n', 'p'}:
        raise UsageError(f'grid must give d, n and p ranges, got {text!r}')
    return found


def cmd_gates(args, cfg):
    variants = args.variants.split(',')
    for v in variants:
        if v not in witness.GATE_VARIANTS:
            raise UsageError(f'unknown variant {v!r}')
    grid = parse_grid(args.grid)
    table = witness.gate_grid(grid['d'], grid['n'], grid['p'], variants)
    inside = table[table['in_hypothesis']]
    checks = [check(f'{v}_in_hypothesis',
                    bool(inside[inside['variant'] == v]['holds'].all()),
                    f'{int((inside["variant"] == v).sum())} records in hypothesis')
              for v in variants]
    return {'gates': table}, checks


def cmd_spectrum(args, cfg):
    F = continuation.product_map(_cs(args, args.n), d=args.d)
    spectrum = continuation.spectrum_near_power_map(F, args.p, cfg.tolerances,
                                                    cfg.caps)
    regular = continuation.regularity_probe(F, seed=cfg.seed)
    expected = powerlattice.lattice_summary(args.d, args.p, args.n,
                                            cfg.caps)['orbits'].iloc[-1]
    return ({'spectrum': [list(s) for s in spectrum], 'regular': regular},
            [check('orbit_count', len(spectrum) == expected,
                   f'{len(spectrum)} cycles of period {args.p}'),
             check('regular', regular, 'no common zero of the top degree part found')])


PARSER = argparse.ArgumentParser(
    prog='multispec',
    description='Multiplier independence near the power map: witnesses, '
                'rank certificates and monodromy.')
PARSER.add_argument('--version', action='version', version=__version__)
PARSER.add_argument('--config', help='JSON file overriding the default configuration')
PARSER.add_argument('--output', help='write the JSON report to this file')
PARSER.add_argument('--seed', type=int, help='seed for sampled probes')
PARSER.add_argument('--threads', type=int, help='worker threads')
PARSER.add_argument('--debug', action='store_true',
                    help='print additional debug info')
SUBPARSERS = PARSER.add_subparsers(dest='command', required=True)


def _subparser(name, func, help_text):
    sub = SUBPARSERS.add_parser(name, help=help_text)
    sub.set_defaults(func=func)
    return sub


def _dn(sub):
    sub.add_argument('--d', type=int, required=True, help='degree')
    sub.add_argument('--n', type=int, required=True, help='dimension')


_sub = _subparser('dims', cmd_dims, 'dimension formulas and admissible indices')
_dn(_sub)

_sub = _subparser('lattice', cmd_lattice, 'periodic points of the power map')
_sub.add_argument('--d', type=int, required=True)
_sub.add_argument('--p', type=int, required=True)
_sub.add_argument('--n', type=int, default=1)

_sub = _subparser('deriv', cmd_deriv, 'closed-form multiplier derivative')
_dn(_sub)
_sub.add_argument('--p', type=int,
                  help='period of the point; taken from --point when omitted')
_sub.add_argument('--k', type=int, required=True, help='row coordinate')
_sub.add_argument('--m', type=int, required=True, help='direction coordinate')
_sub.add_argument('--index', required=True, help='multi-index, e.g. 1,0')
_sub.add_argument('--point', required=True,
                  help='periodic point as comma separated a/m, e.g. 1/3,1/3')
_sub.add_argument('--projective', action='store_true')
_sub.add_argument('--fd-check', action='store_true',
                  help='compare with a finite difference oracle')

_sub = _subparser('witness', cmd_witness, 'select witness orbits')
_dn(_sub)
_sub.add_argument('--periods', required=True,
                  help='one period or the full comma separated matrix')
_sub.add_argument('--projective', action='store_true')
_sub.add_argument('--verify', action='store_true',
                  help='recompute every entry independently')

_sub = _subparser('verify-rank', cmd_verify_rank,
                  'rank of the multiplier Jacobian at a product map')
_dn(_sub)
_sub.add_argument('--c', action='append', required=True,
                  help='constant of one coordinate as re,im (repeat per coordinate)')
_sub.add_argument('--periods', default='4')
_sub.add_argument('--h', type=float, default=None, help='finite difference step')

_sub = _subparser('track', cmd_track, 'continue marked cycles around a loop')
_sub.add_argument('--loop', required=True, help='loop JSON file')
_sub.add_argument('--family', choices=continuation.FAMILY_IDS)

_sub = _subparser('monodromy', cmd_monodromy, 'monodromy of a loop')
_sub.add_argument('--loop', help='loop JSON file')
_sub.add_argument('--anchor', help='quadratic family circle center, e.g. 0.25')
_sub.add_argument('--radius', type=float, default=0.1)
_sub.add_argument('--steps', type=int, default=360)
_sub.add_argument('--eigendirection', action='store_true',
                  help='eigendirection exchange loop in eps')
_sub.add_argument('--theta', type=float, default=0.5)
_sub.add_argument('--alpha', type=float, default=10.0)
_sub.add_argument('--eps', type=float, default=1e-3)
_sub.add_argument('--c0', type=float, default=0.1875)
_sub.add_argument('--center', default='0')

_sub = _subparser('certify-hyperbolic', cmd_certify_hyperbolic,
                  'disc chain certificate for compositions')
_sub.add_argument('--spec', required=True, help='chain JSON file')

_sub = _subparser('gates', cmd_gates, 'counting inequalities over a grid')
_sub.add_argument('--grid', default='d=2..5,n=1..4,p=4..8')
_sub.add_argument('--variants', default='affine,projective-weak')

_sub = _subparser('spectrum', cmd_spectrum, 'multiplier spectrum of a product map')
_dn(_sub)
_sub.add_argument('--p', type=int, required=True)
_sub.add_argument('--c', action='append', required=True)


def command_echo(args):
    return {k: v for k, v in sorted(vars(args).items())
            if k not in ('func', 'config', 'output', 'seed', 'threads', 'debug')}


def run(argv=None):
    """Parse ``argv`` and run the command.

    Returns
    -------
    : tuple
        ``(report, exit_code)``.

    """
    args = PARSER.parse_args(argv)
    if args.debug:
        logging.basicConfig(level=logging.DEBUG)
        logging.getLogger('multispec').setLevel(logging.DEBUG)
    cfg = config.load_config(args.config).with_overrides(
        seed=args.seed, output=args.output, threads=args.threads)
    report = {'schema': SCHEMA, 'command': command_echo(args),
              'config': cfg.as_dict()}
    try:
        results, checks = args.func(args, cfg)
    except MultispecError as err:
        LOGGER.error('%s failed: %s', args.command, err)
        results = None
        checks = [check(type(err).__name__, False, str(err))]
    report['results'] = results
    report['checks'] = checks
    code = 0 if all(c['pass'] for c in checks) else 1
    return report, code


def main(argv=None):
    """Entry point of the ``multispec`` console script."""
    try:
        report, code = run(argv)
    except SystemExit as err:
        return err.code
    except (ValueError, OSError, KeyError) as err:
        print(f'multispec: error: {err}', file=sys.stderr)
        return 2
    text = dump_json(report, report['config']['output'])
    if report['config']['output'] is None:
        sys.stdout.write(text)
    return code


if __name__ == '__main__':
    sys.exit(main())
