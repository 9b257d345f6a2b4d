"""Tests for multispec/cli.py"""
import json
import pytest
from multispec import cli


def run_json(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out else None


def checks_of(report):
    return {c['name']: c['pass'] for c in report['checks']}


def test_dims(capsys):
    """Verify the dims command"""
    code, report = run_json(capsys, ['dims', '--d', '2', '--n', '2'])
    assert code == 0
    assert report['schema'] == cli.SCHEMA
    assert report['results']['dims']['N_dn'] == 3
    assert report['results']['affine_indices'] == [[1, 0], [0, 1], [1, 1]]
    assert report['command']['command'] == 'dims'


def test_config_file(capsys, run_config):
    """Verify that --config and --seed reach the report"""
    code, report = run_json(capsys, ['--config', run_config, '--seed', '3',
                                     'dims', '--d', '3', '--n', '2'])
    assert code == 0
    assert report['config']['seed'] == 3
    assert report['config']['tolerances']['det'] == 1e-9
    assert report['config']['caps']['max_period'] == 10
    assert report['results']['dims']['N_dn'] == 7


def test_lattice(capsys):
    """Verify the lattice command"""
    code, report = run_json(capsys, ['lattice', '--d', '2', '--p', '4',
                                     '--n', '2'])
    assert code == 0
    assert [r['orbits'] for r in report['results']['table']] == [4, 6, 20, 60]
    assert all(checks_of(report).values())


def test_deriv(capsys):
    """Verify the deriv command on the fixed point oracle"""
    code, report = run_json(capsys, ['deriv', '--d', '2', '--n', '2',
                                     '--p', '1', '--k', '1', '--m', '1',
                                     '--index', '1,0', '--point', '0/1,0/1',
                                     '--fd-check'])
    assert code == 0
    assert report['results']['derivative']['value'] == [-1, 0]
    assert checks_of(report) == {'fd_agreement': True}
    assert 'q_degrees' not in report['results']['derivative']


def test_deriv_projective(capsys):
    """Verify the homogenizing direction from the command line"""
    code, report = run_json(capsys, ['deriv', '--d', '2', '--n', '2',
                                     '--p', '1', '--k', '1', '--m', '0',
                                     '--index', '0,1,1', '--point', '0/1,0/1',
                                     '--projective'])
    assert code == 0
    assert report['results']['query']['setting'] == 'projective'
    assert report['results']['derivative']['value'] == [-1, 0]


def test_witness(capsys):
    """Verify the witness command with independent verification"""
    code, report = run_json(capsys, ['witness', '--d', '2', '--n', '2',
                                     '--periods', '4', '--verify'])
    assert code == 0
    checks = checks_of(report)
    assert checks['valid'] and checks['entries_recomputed']
    assert len(report['results']['summary']) == 6
    assert report['results']['witnesses']['points'][0][0][0].count('/') == 1


def test_verify_rank(capsys):
    """Verify the rank certificate at a product map"""
    code, report = run_json(capsys, ['verify-rank', '--d', '2', '--n', '2',
                                     '--c=0.013,0.021', '--c=-0.017,0.009'])
    assert code == 0
    assert report['results']['rank']['rank_at_tol'] == 6
    assert len(report['results']['rank']['singular_values']) == 6


def test_spectrum(capsys):
    """Verify the spectrum command"""
    code, report = run_json(capsys, ['spectrum', '--d', '2', '--n', '2',
                                     '--p', '2', '--c=0.013,0.021',
                                     '--c=-0.017,0.009'])
    assert code == 0
    assert len(report['results']['spectrum']) == 6
    assert report['results']['regular']


def test_gates(capsys):
    """Verify the default counting grid"""
    code, report = run_json(capsys, ['gates'])
    assert code == 0
    assert checks_of(report) == {'affine_in_hypothesis': True,
                                 'projective-weak_in_hypothesis': True}
    assert len(report['results']['gates']) == 2 * 4 * 4 * 5


def test_monodromy_anchor(capsys):
    """Verify the monodromy of the circle around c=1/4"""
    code, report = run_json(capsys, ['monodromy', '--anchor', '0.25'])
    assert code == 0
    permutation = report['results']['permutation']
    assert permutation['mapping'] == {'0': 0, '1': 1, '2': 3, '3': 2}
    assert permutation['cycles'] == [[2, 3]]
    assert report['results']['loop']['steps'] == 360


def test_track(capsys, tmp_path):
    """Verify the track command on a loop file"""
    loop = {'family': 'unicritical_1d', 'params': {'d': 2},
            'circle': {'center': 0, 'radius': 0.1, 'steps': 120},
            'marked': [{'seed': [[0.1127, 0]], 'period': 1}]}
    path = tmp_path / 'loop.json'
    path.write_text(json.dumps(loop))
    code, report = run_json(capsys, ['track', '--loop', str(path)])
    assert code == 0
    assert report['results']['permutation']['mapping'] == {'0': 0}
    code, _ = run_json(capsys, ['track', '--loop', str(path),
                                '--family', 'eigendir_Gt'])
    assert code == 2


@pytest.mark.parametrize("b, expected", [(100, 0), (1, 1)])
def test_certify_hyperbolic(capsys, tmp_path, b, expected):
    """Verify the disc chain certificate above and below the threshold"""
    chain = {'polys': [[1, 0, 0]], 'alphas': [1], 'b': b, 'eps': 0.1}
    path = tmp_path / 'chain.json'
    path.write_text(json.dumps(chain))
    code, report = run_json(capsys, ['certify-hyperbolic', '--spec', str(path)])
    assert code == expected
    assert report['results']['bound'] == pytest.approx(40)
    assert report['results']['certificate']['holds'] == (expected == 0)


@pytest.mark.parametrize("argv", [
    ['dims', '--d', '2', '--n', '2', '--bogus'],
    ['dims', '--d', '1', '--n', '2'],
    ['witness', '--d', '2', '--n', '2', '--periods', '4,4'],
    ['deriv', '--d', '2', '--n', '2', '--k', '1', '--m', '1', '--index', '1,0',
     '--point', '1/3,0'],
    ['deriv', '--d', '2', '--n', '2', '--p', '2', '--k', '1', '--m', '1',
     '--index', '1,0', '--point', '0/1,0/1'],
    ['deriv', '--d', '2', '--n', '3', '--k', '1', '--m', '1', '--index', '1,0',
     '--point', '1/3,1/3'],
    ['gates', '--variants', 'weighted'],
    ['gates', '--grid', 'd=2..3'],
    ['monodromy'],
    [],
])
def test_usage_errors(capsys, argv):
    """Verify exit code 2 on usage errors"""
    assert cli.main(argv) == 2
    assert capsys.readouterr().out == ''


def test_output_deterministic(tmp_path, capsys):
    """Verify byte identical reports for identical inputs"""
    path = tmp_path / 'report.json'
    argv = ['--output', str(path), 'witness', '--d', '2', '--n', '2',
            '--periods', '4']
    assert cli.main(argv) == 0
    first = path.read_bytes()
    assert cli.main(argv) == 0
    assert path.read_bytes() == first
    assert capsys.readouterr().out == ''
    assert json.loads(first)['config']['output'] == str(path)


def test_parse_grid():
    """Verify parsing of grid specifications"""
    assert cli.parse_grid('d=2..3,n=1,p=4,6') == {'d': [2, 3], 'n': [1],
                                                  'p': [4, 6]}
    with pytest.raises(ValueError):
        cli.parse_grid('d=2,n=2')


def test_deriv_q_degrees(capsys):
    """Verify the degree check of Q at period 3"""
    code, report = run_json(capsys, ['deriv', '--d', '2', '--n', '2',
                                     '--p', '3', '--k', '2', '--m', '2',
                                     '--index', '1,1', '--point', '1/7,3/7'])
    assert code == 0
    assert checks_of(report) == {'q_degrees': True}
    assert report['results']['derivative']['q_degrees'] == [4, 3]


def test_deriv_point_forms(capsys):
    """Verify that --p may be omitted and --point may use whitespace"""
    base = ['deriv', '--d', '2', '--n', '2', '--k', '2', '--m', '2',
            '--index', '1,1']
    code, comma = run_json(capsys, base + ['--p', '3', '--point', '1/7,3/7'])
    assert code == 0
    code, spaced = run_json(capsys, base + ['--point', '1/7 3/7'])
    assert code == 0
    assert spaced['results'] == comma['results']
    assert comma['results']['query']['p'] == 3


def test_parse_point():
    """Verify splitting of point coordinates"""
    assert cli.parse_point('1/3,2/7') == ['1/3', '2/7']
    assert cli.parse_point(' 1/3, 2/7 ') == ['1/3', '2/7']
    assert cli.parse_point('1/3 2/7') == ['1/3', '2/7']
    with pytest.raises(ValueError):
        cli.parse_point(' , ')
