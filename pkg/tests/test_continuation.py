"""Tests for multispec/continuation.py"""
import numpy as np
import pytest
from multispec import continuation
from multispec import derivatives
from multispec.combinatorics import PROJECTIVE, MultiIndex, enumerate_admissible
from multispec.powerlattice import make_point, to_complex
from multispec.util.errors import ConvergenceError
from fixtures.maps import C_SMALL


def test_eval_map(power_map_22):
    """Verify evaluation of the power map, product maps and perturbations"""
    out = continuation.eval_map(power_map_22, [-1, 1j])
    assert np.allclose(out, [1, -1], atol=1e-15)
    F = continuation.product_map([1, 0])
    assert np.allclose(continuation.eval_map(F, [0, 0]), [1, 0])
    G = continuation.perturb(power_map_22, 1, MultiIndex((1, 1)), 0.5)
    assert np.allclose(G([2, 3]), [7, 9])
    H = continuation.ChartPerturbation(power_map_22,
                                       MultiIndex((1, 1, 0), PROJECTIVE), 0.5)
    assert np.allclose(H([2, 3]), [2, 4.5])
    with pytest.raises(ValueError):
        continuation.eval_map(power_map_22, [1, 2, 3])


def test_perturbed_product_family():
    """Verify G_c(x, y) = (x^2 + alpha y + c, y^2 + eps) against a hand
    expansion"""
    family, n = continuation.make_family('G_c_alpha_eps',
                                         {'alpha': [2, 0], 'eps': 0.1})
    assert n == 2
    x, y, c = 0.3 + 0.1j, -0.2j, 0.05
    expected = [x ** 2 + 2 * y + c, y ** 2 + 0.1]
    assert np.allclose(family(c)([x, y]), expected, atol=1e-15)
    with pytest.raises(ValueError):
        continuation.make_family('henon', {})


def test_poly_map_dense():
    """Verify construction, immutability and term dictionaries"""
    F = continuation.from_terms(2, [{(2, 0): 1, (0, 0): 0.5}, {(0, 2): 1}])
    assert F.n == 2 and F.d == 2
    assert F.terms()[1] == {(0, 0): 0.5, (2, 0): 1}
    with pytest.raises(ValueError):
        F.coeffs[0, 0] = 3
    with pytest.raises(ValueError):
        continuation.from_terms(2, [{(2,): 1}, {(0, 2): 1}])
    with pytest.raises(ValueError):
        continuation.PolyMapDense([[1, 0]], [[1], [1], [1]])
    top = continuation.homogeneous_part(F)
    assert top.terms() == continuation.power_map(2, 2).terms()


def test_jacobian_self_test(product_map_small, power_map_22):
    """Verify the analytic Jacobians against central differences"""
    assert continuation.jacobian_self_test(product_map_small) < 1e-8
    family, _ = continuation.make_family('eigendir_Gt', {})
    assert continuation.jacobian_self_test(family(0.01 + 0.02j)) < 1e-8
    G = continuation.ChartPerturbation(power_map_22,
                                       MultiIndex((0, 1, 1), PROJECTIVE), 0.3)
    assert continuation.jacobian_self_test(G) < 1e-8


def test_solve_cycle_fixed_point():
    """Verify the attracting fixed point of z^2 + 0.1"""
    track = continuation.solve_cycle(continuation.unicritical(0.1), 1, 0.1)
    assert abs(track.base[0] - (1 - np.sqrt(0.6)) / 2) < 1e-12
    assert abs(track.eigenvalues[0] - 2 * track.base[0]) < 1e-12
    assert not track.parabolic
    assert track.residual <= 1e-12


def test_solve_cycle_power_map(power_map_22):
    """Verify that Newton recovers an exact root of unity 2-cycle"""
    w0 = make_point(['1/3', '0/1'], d=2)
    seed = to_complex(w0) + 1e-3
    track = continuation.solve_cycle(power_map_22, 2, seed)
    assert np.abs(track.base - to_complex(w0)).max() < 1e-12
    assert np.abs(track.points[1] - to_complex(w0.step())).max() < 1e-12
    assert np.allclose(track.eigenvalues, [4, 4])
    assert track.exact_period == 2


def test_solve_cycle_parabolic():
    """Verify the eigenvalue-1 flag of the merged 2-cycle at c = -3/4"""
    track = continuation.solve_cycle(continuation.unicritical(-0.75), 2, -0.45)
    assert track.parabolic
    assert track.parabolic_distance() < 1e-6


def test_solve_cycle_errors(power_map_22):
    """Verify input validation and divergence reporting"""
    with pytest.raises(ValueError):
        continuation.solve_cycle(power_map_22, 0, [1, 1])
    with pytest.raises(ValueError):
        continuation.solve_cycle(power_map_22, 1, [1, 1, 1])
    with pytest.raises(ConvergenceError):
        shift = continuation.from_terms(1, [{(1,): 1, (0,): 1}])
        continuation.solve_cycle(shift, 1, [0.3])


def test_rebase_invariance(product_map_small):
    """Verify that the cycle eigenvalues do not depend on the base point"""
    w0 = make_point(['1/7', '3/7'], d=2)
    track = continuation.solve_cycle(product_map_small, 3, to_complex(w0))
    for i in range(1, 3):
        other = continuation.rebase(product_map_small, track, i)
        assert np.abs(other.canonical_eigenvalues()
                      - track.canonical_eigenvalues()).max() <= 1e-9
        assert np.abs(other.base - track.points[i]).max() == 0


def test_constant_path():
    """Verify that a constant path returns the start unchanged"""
    family = continuation.unicritical_family()
    start = continuation.solve_cycle(family(0.1), 1, 0.1, param=0.1)
    assert continuation.track_path(family, [0.1, 0.1, 0.1], start) is start
    with pytest.raises(ValueError):
        continuation.track_path(family, [0.2, 0.3], start)
    with pytest.raises(ValueError):
        continuation.track_path(family, [], start)


def test_tracking_reversible():
    """Verify that tracking a path and its reverse returns the start"""
    family = continuation.unicritical_family()
    path = list(0.1 + np.linspace(0, 0.05j + 0.02, 50))
    start = continuation.solve_cycle(family(path[0]), 1, 0.1, param=path[0])
    forward = continuation.track_path(family, path, start)
    assert forward.param == path[-1]
    assert forward.residual <= 1e-12
    back = continuation.track_path(family, path[::-1], forward)
    assert np.abs(back.base - start.base).max() <= 1e-9


def test_tracking_skew_family():
    """Verify a period 2 cycle followed across a parameter segment"""
    family, _ = continuation.make_family('skew_product', {'b': 0.1})
    path = list(np.linspace(0, 0.05, 20))
    w0 = make_point(['1/3', 0], d=2)
    start = continuation.solve_cycle(family(0), 2, to_complex(w0), param=0)
    end = continuation.track_path(family, path, start)
    check = continuation.solve_cycle(family(0.05), 2, end.base)
    assert np.abs(check.base - end.base).max() < 1e-10
    assert end.period == 2


def test_match_branches():
    """Verify nearest neighbor matching of eigenvalue branches"""
    order, drift = continuation.match_branches([1, 2j], [2j + 0.01, 1.01])
    assert list(order) == [1, 0]
    assert abs(drift - 0.01) < 1e-12
    assert continuation.min_gap([1]) == np.inf
    assert abs(continuation.min_gap([0, 3, 1j]) - 1) < 1e-15
    values = continuation.canonical_eigenvalues([1j, -1, 1, -1j])
    assert list(values) == [-1, -1j, 1j, 1]


def test_loops():
    """Verify closed circle and lasso paths"""
    path = continuation.loop_circle(0, 1, steps=4)
    assert len(path) == 5
    assert path[0] == path[-1]
    assert abs(path[1] - 1j) < 1e-15
    lasso = continuation.loop_lasso(1, 0, 0.5, steps=8, approach=4)
    assert lasso[0] == lasso[-1] == 1
    assert len(lasso) == 4 + 9 + 4
    with pytest.raises(ValueError):
        continuation.loop_circle(0, 1, steps=2)


def test_regularity_probe(power_map_22):
    """Verify the regularity probe on regular and degenerate maps"""
    assert continuation.regularity_probe(power_map_22)
    degenerate = continuation.from_terms(2, [{(2, 0): 1}, {(2, 0): 1}])
    assert not continuation.regularity_probe(degenerate)
    family, _ = continuation.make_family('G_c_alpha_eps',
                                         {'alpha': 0.01, 'eps': 0.01})
    assert continuation.regularity_probe(family(0.1), samples=64)


def test_multiplier_spectrum(power_map_22):
    """Verify multiplier spectra of the power map"""
    F = continuation.power_map(2, 1)
    spectrum = continuation.spectrum_near_power_map(F, 2)
    assert len(spectrum) == 1
    assert abs(spectrum[0][0] - 4) < 1e-12
    spectrum = continuation.spectrum_near_power_map(power_map_22, 1)
    assert len(spectrum) == 4
    assert np.allclose(spectrum[-1], (4, 4))
    assert np.allclose(spectrum[0], (0, 0))
    table = continuation.spectrum_table(spectrum)
    assert list(table.columns) == ['e1', 'e2']


def test_multiplier_spectrum_errors(product_map_small):
    """Verify that duplicate orbits and wrong periods are rejected"""
    w0 = make_point(['1/3', '0/1'], d=2)
    track = continuation.solve_cycle(product_map_small, 2, to_complex(w0))
    twin = continuation.rebase(product_map_small, track, 1)
    with pytest.raises(ValueError):
        continuation.multiplier_spectrum(product_map_small, 2, [track, twin])
    with pytest.raises(ValueError):
        continuation.multiplier_spectrum(product_map_small, 3, [track])


def test_spectrum_continuity():
    """Verify that spectra at F_c approach those of the power map"""
    F0 = continuation.power_map(2, 2)
    base = continuation.spectrum_near_power_map(F0, 2)
    deltas = []
    for scale in (1e-2, 1e-3):
        F = continuation.product_map(scale * np.asarray(C_SMALL))
        spectrum = continuation.spectrum_near_power_map(F, 2)
        assert len(spectrum) == len(base) == 6
        deltas.append(max(np.abs(np.subtract(a, b)).max()
                          for a, b in zip(sorted(spectrum, key=_norm_key),
                                          sorted(base, key=_norm_key))))
    assert deltas[1] < deltas[0]


def _norm_key(sym):
    return tuple(round(abs(e), 3) for e in sym)


def test_rank_certificate(product_map_small, witnesses_224, dbug):
    """Verify full rank and block structure of the eigenvalue Jacobian"""
    report = continuation.rank_certificate(product_map_small, witnesses_224)
    assert report.certified_full_rank
    assert report.rank_at_tol == 6
    assert report.jacobian.shape == (6, 6)
    scale = np.abs(report.jacobian).max()
    assert np.abs(report.jacobian[:3, 3:]).max() <= 1e-8 * scale
    assert np.abs(report.jacobian[3:, :3]).max() <= 1e-8 * scale
    assert [r['k'] for r in report.rows] == [1, 1, 1, 2, 2, 2]
    if dbug:
        print(report.singular_values)


def test_rank_certificate_power_map(power_map_22, witnesses_224):
    """Verify that the power map itself is rejected"""
    with pytest.raises(ValueError):
        continuation.rank_certificate(power_map_22, witnesses_224)


def _closed_form(witnesses):
    d, n = witnesses.d, witnesses.n
    columns = [(m, I) for m in range(1, n + 1)
               for I in enumerate_admissible(d, n)]
    out = np.zeros((len(columns), len(columns)), dtype=complex)
    r = 0
    for k, row in enumerate(witnesses.points, start=1):
        for w in row:
            for c, (m, I) in enumerate(columns):
                q = derivatives.DerivativeQuery.make(d, k=k, m=m, I=I, w0=w)
                out[r, c] = derivatives.partial_rho(q)
            r += 1
    return out


def test_rank_certificate_converges(witnesses_224):
    """Verify that the Jacobian at F_c approaches the closed form derivatives
    at the power map as c shrinks"""
    exact = _closed_form(witnesses_224)
    errors = []
    for scale, h in ((0.8, 1e-5), (0.04, 1e-7)):
        F = continuation.product_map(scale * np.asarray(C_SMALL))
        report = continuation.rank_certificate(F, witnesses_224, h=h)
        errors.append(np.abs(report.jacobian - exact).max()
                      / np.abs(exact).max())
    assert errors[1] < 0.1
    assert errors[1] < 0.5 * errors[0]
