import pytest
import numpy as np

from heentangle.basis import HylleraasWavefunction, evaluate
from heentangle.eigensolver import normalize, solve, state
from heentangle.integrals import assemble
from heentangle.schmidt import (SchmidtSpectrum, decompose, entropies,
                                partial_wave_kernels, radial_grid,
                                reconstruct, schmidt_entropies)
from heentangle.stabilization import alpha_star, resolve_resonance, scan
from heentangle.util import SumRuleError, read_csv


def ground_state(omega=2, alpha=1.8, interaction=True):
    mp = assemble(omega, alpha, interaction=interaction)
    return state(mp, solve(mp), 0)


def bare_state(alpha=2.):
    mp = assemble(0, alpha)
    return normalize(HylleraasWavefunction(mp.terms, [1.], alpha, alpha), mp)


def spectrum_of(occupations):
    """Spectrum with given occupations, one row per l."""
    occupations = np.atleast_2d(np.asarray(occupations, dtype='float64'))
    degeneracy = 2 * np.arange(occupations.shape[0]) + 1
    eigenvalues = np.sqrt(occupations) * degeneracy[:, None] / (4 * np.pi)
    return SchmidtSpectrum(eigenvalues, occupations, radial_grid(10., 2))


def test_radial_grid():
    grid = radial_grid(40., 240)
    assert grid.count == 240
    assert np.all(np.diff(grid.nodes) > 0)
    assert np.all(grid.weights > 0)
    assert 0 < grid.nodes[0] and grid.nodes[-1] < 40.
    assert np.sum(grid.weights * grid.nodes ** 2 * np.exp(-2 * grid.nodes)) \
        == pytest.approx(0.25, rel=1e-12)


def test_radial_grid_split():
    grid = radial_grid(40., 200, r_mid=5., inner_count=80)
    assert grid.count == 200
    assert np.sum(grid.nodes < 5.) == 80
    assert np.sum(grid.weights * grid.nodes ** 4 * np.exp(-grid.nodes)) \
        == pytest.approx(24., rel=1e-12)
    with pytest.raises(ValueError):
        radial_grid(40., 200, r_mid=50., inner_count=80)
    with pytest.raises(ValueError):
        radial_grid(-1., 10)


def test_kernels_reject_unnormalized():
    psi = HylleraasWavefunction([(0, 0, 0)], [1.], 2., 2.)
    with pytest.raises(ValueError):
        partial_wave_kernels(psi, radial_grid(10., 20), 4)


def test_kernels_invalid_orders():
    grid = radial_grid(10., 20)
    with pytest.raises(ValueError):
        partial_wave_kernels(bare_state(), grid, -1)
    with pytest.raises(ValueError):
        partial_wave_kernels(bare_state(), grid, 10, angular_nodes=5)


def test_product_state_kernels():
    """Without r12 dependence only the s wave survives."""
    grid = radial_grid(15., 60)
    kernels = partial_wave_kernels(bare_state(), grid, 6)
    assert np.max(np.abs(kernels[1:])) <= 1e-14 * np.max(np.abs(kernels[0]))


def test_kernels_symmetric():
    grid = radial_grid(15., 60)
    kernels = partial_wave_kernels(ground_state(), grid, 8)
    np.testing.assert_array_equal(kernels, np.transpose(kernels, (0, 2, 1)))


def test_reconstruct():
    """Separated electrons: the partial-wave sum converges geometrically."""
    psi = ground_state()
    grid = radial_grid(10., 60)
    kernels = partial_wave_kernels(psi, grid, 40)

    x = np.linspace(-1., 1., 9)
    for i, j in [(10, 40), (15, 50), (5, 30)]:
        r1, r2 = grid.nodes[i], grid.nodes[j]
        assert r1 / r2 <= 0.5
        r12 = np.sqrt(np.maximum(r1 ** 2 + r2 ** 2 - 2 * r1 * r2 * x, 0.))
        exact = evaluate(psi, r1, r2, r12)
        np.testing.assert_allclose(reconstruct(kernels, grid, i, j, x), exact,
                                   rtol=1e-6, atol=1e-12)


def test_reconstruct_coalescence():
    """At r1 = r2, x = 1 the r12 cusp limits convergence to about 1/l_max."""
    psi = ground_state()
    grid = radial_grid(10., 60)
    kernels = partial_wave_kernels(psi, grid, 40)

    i = int(np.argmin(np.abs(grid.nodes - 1.)))
    r = grid.nodes[i]
    exact = evaluate(psi, r, r, 0.)
    errors = [abs(reconstruct(kernels[:l_max + 1], grid, i, i, 1.) - exact)
              for l_max in (20, 40)]

    # Tail of the r12 expansion, sum over l > L of 4/((2l+3)(2l-1))
    ratio = (1 / 41 + 1 / 43) / (1 / 81 + 1 / 83)
    assert errors[0] / errors[1] == pytest.approx(ratio, rel=0.15)
    assert errors[1] / abs(exact) < 0.02 * r


def test_decompose_rank_one():
    grid = radial_grid(10., 50)
    g = grid.nodes * np.exp(-grid.nodes)
    decomp = decompose(np.outer(g, g)[None], grid)
    assert decomp.eigenvalues[0, 0] == pytest.approx(
        np.sum(grid.weights * g ** 2), rel=1e-12)
    assert np.all(np.abs(decomp.eigenvalues[0, 1:]) <= 1e-12 *
                  decomp.eigenvalues[0, 0])


def test_decompose_orbitals_orthonormal():
    grid = radial_grid(15., 60)
    decomp = decompose(partial_wave_kernels(ground_state(), grid, 4), grid)
    for l in range(decomp.l_max + 1):
        u = decomp.orbitals[l]
        gram = u.T @ (grid.weights[:, None] * u)
        np.testing.assert_allclose(gram, np.eye(grid.count), atol=1e-8)


def test_decompose_without_kernels():
    grid = radial_grid(15., 40)
    decomp = decompose(partial_wave_kernels(bare_state(), grid, 2), grid,
                     retain_kernels=False)
    assert decomp.orbitals is None and decomp.weighted_kernels is None


def test_product_state_unentangled():
    decomp, result = schmidt_entropies(bare_state(), l_max=6, r_max=15.,
                                     radial_nodes=60)
    assert np.max(decomp.occupations) == pytest.approx(1., abs=1e-10)
    assert result.s_linear <= 1e-10
    assert result.s_vonneumann <= 1e-10


def test_non_interacting_ground_state():
    psi = ground_state(omega=2, alpha=2., interaction=False)
    _, result = schmidt_entropies(psi, l_max=10, r_max=15., radial_nodes=80)
    assert result.s_linear <= 1e-6
    assert result.s_vonneumann <= 1e-4


def test_ground_state_entropies():
    _, result = schmidt_entropies(ground_state(), l_max=20, r_max=20.,
                                  radial_nodes=120, tolerance=1e-4)
    assert abs(result.sum_rule_deficit) <= 1e-4
    assert 0.005 < result.s_linear < 0.03
    assert result.s_vonneumann >= -np.log2(1 - result.s_linear)
    assert result.l_max_used == 20
    assert result.per_l_vonneumann.shape == (21,)
    assert result.s_vonneumann == pytest.approx(
        np.sum(result.per_l_vonneumann))


def test_dilation_invariance():
    psi = ground_state()
    wide = normalize(psi.dilated(2.), assemble(2, 3.6))

    grid = radial_grid(20., 80)
    narrow_grid = radial_grid(10., 80)
    decomp = decompose(partial_wave_kernels(psi, grid, 6), grid)
    dilated = decompose(partial_wave_kernels(wide, narrow_grid, 6),
                        narrow_grid)
    np.testing.assert_allclose(dilated.occupations, decomp.occupations,
                               atol=1e-8)


def test_entropies_single_occupation():
    result = entropies(spectrum_of([[1., 0.]]))
    assert result.s_linear == pytest.approx(0., abs=1e-15)
    assert result.s_vonneumann == pytest.approx(0., abs=1e-15)


def test_entropies_maximally_mixed_pair():
    result = entropies(spectrum_of([[0.5, 0.5]]))
    assert result.s_linear == pytest.approx(0.5)
    assert result.s_vonneumann == pytest.approx(1.)


def test_entropies_degeneracy():
    """A p-wave occupation counts three times."""
    result = entropies(spectrum_of([[0.25, 0.], [0.25, 0.]]))
    assert result.s_linear == pytest.approx(0.75)
    assert result.s_vonneumann == pytest.approx(2.)
    assert result.tail == pytest.approx(2.)


def test_entropies_sum_rule():
    with pytest.raises(SumRuleError) as info:
        entropies(spectrum_of([[0.5, 0.4]]))
    assert info.value.deficit == pytest.approx(0.1)


def test_spectrum_csv(tmp_path):
    grid = radial_grid(15., 40)
    decomp = decompose(partial_wave_kernels(ground_state(), grid, 3), grid)
    path = decomp.to_csv(str(tmp_path / 'spectrum.csv'), floor=1e-12)
    header, table, _ = read_csv(path)
    assert header == ['l', 'n', 'lambda', 'occupation']
    assert np.all(table[:, 3] > 1e-12)
    assert set(table[:, 0]) <= {0., 1., 2., 3.}


@pytest.mark.slow
def test_resonance_entropies():
    """2s2 and 2p2 1Se at omega = 9."""
    result = scan(9, 0.2, 1.0, 0.002)
    for energy, s_linear, s_vonneumann, tol in [(-0.7779, 0.4601, 1.368,
                                                 (0.005, 0.02)),
                                                (-0.6219, 0.7776, 2.450,
                                                 (0.003, 0.01))]:
        best, _ = resolve_resonance(result, energy, tolerance=0.005)
        alpha = alpha_star(result, best)
        mp = assemble(9, alpha)
        psi = state(mp, solve(mp), best.curve_index)
        _, entropy = schmidt_entropies(psi)
        assert entropy.s_linear == pytest.approx(s_linear, abs=tol[0])
        assert entropy.s_vonneumann == pytest.approx(s_vonneumann,
                                                     abs=tol[1])
        assert entropy.tail < 1e-6


@pytest.mark.slow
def test_radial_grid_doubling():
    """Ground state at omega = 6 on the default grid and on twice the nodes."""
    psi = ground_state(omega=6)
    _, coarse = schmidt_entropies(psi, radial_nodes=240)
    _, fine = schmidt_entropies(psi, radial_nodes=480)
    assert abs(fine.sum_rule_deficit) <= 1e-6
    assert abs(fine.s_linear - coarse.s_linear) < 1e-6
    assert abs(fine.s_vonneumann - coarse.s_vonneumann) < 1e-4
