import pytest
import numpy as np

from heentangle.basis import HylleraasWavefunction
from heentangle.eigensolver import normalize, solve, state
from heentangle.integrals import assemble
from heentangle.oracle import (TraceEstimate, compare, trace_rho_squared_mc,
                               trace_rho_squared_pw)
from heentangle.schmidt import decompose, radial_grid, schmidt_entropies
from heentangle.stabilization import alpha_star, resolve_resonance, scan


def bare_state(alpha=2.):
    mp = assemble(0, alpha)
    return normalize(HylleraasWavefunction(mp.terms, [1.], alpha, alpha), mp)


def ground_state(omega=2, alpha=1.8):
    mp = assemble(omega, alpha)
    return state(mp, solve(mp), 0)


def test_trace_estimate_invariants():
    with pytest.raises(ValueError):
        TraceEstimate(0., 0.1, 10 ** 4, 'monte_carlo')
    with pytest.raises(ValueError):
        TraceEstimate(0.5, 0.1, 10 ** 4, 'quadrature')
    with pytest.raises(ValueError):
        TraceEstimate(0.5, -0.1, 10 ** 4, 'monte_carlo')

    estimate = TraceEstimate(0.6, 0.01, 10 ** 4, 'monte_carlo', seed=3)
    assert estimate.s_linear == pytest.approx(0.4)
    assert estimate.to_dict()['seed'] == 3


def test_mc_product_state():
    estimate = trace_rho_squared_mc(bare_state(), samples=200000, seed=1,
                                    streams=4)
    assert estimate.method == 'monte_carlo'
    assert estimate.samples_or_nodes == 200000
    assert 0 < estimate.standard_error < 0.05
    assert abs(estimate.value - 1.) <= 4 * estimate.standard_error


def test_mc_deterministic():
    psi = bare_state()
    first = trace_rho_squared_mc(psi, samples=20000, seed=7, streams=3,
                                 n_jobs=1)
    second = trace_rho_squared_mc(psi, samples=20000, seed=7, streams=3,
                                  n_jobs=2)
    other = trace_rho_squared_mc(psi, samples=20000, seed=8, streams=3)
    assert first.value == second.value
    assert first.standard_error == second.standard_error
    assert first.value != other.value


def test_mc_error_scaling():
    """Four times the samples roughly halves the standard error."""
    psi = bare_state()
    small = trace_rho_squared_mc(psi, samples=40000, seed=11, streams=2)
    large = trace_rho_squared_mc(psi, samples=160000, seed=11, streams=2)
    ratio = small.standard_error / large.standard_error
    assert 2 / 1.5 <= ratio <= 2 * 1.5


def test_mc_invalid():
    psi = bare_state()
    with pytest.raises(ValueError):
        trace_rho_squared_mc(HylleraasWavefunction([(0, 0, 0)], [1.], 2., 2.),
                             samples=10 ** 4)
    with pytest.raises(ValueError):
        trace_rho_squared_mc(psi, samples=100)
    with pytest.raises(ValueError):
        trace_rho_squared_mc(psi, samples=10 ** 4, proposal_rate=0.)


def test_mc_matches_schmidt_ground_state():
    psi = ground_state()
    _, result = schmidt_entropies(psi, l_max=20, r_max=20., radial_nodes=120,
                                  tolerance=1e-4)
    estimate = trace_rho_squared_mc(psi, samples=200000, seed=5)
    difference, sigmas = compare(result.s_linear, estimate)
    assert abs(difference) <= 4 * estimate.standard_error + 1e-4


def test_pw_rank_one():
    grid = radial_grid(10., 50)
    g = grid.nodes * np.exp(-grid.nodes)
    g *= np.sqrt(1 / (4 * np.pi) / np.sum(grid.weights * g ** 2))
    decomp = decompose(np.outer(g, g)[None], grid)
    estimate = trace_rho_squared_pw(decomp)
    assert estimate.value == pytest.approx(1., rel=1e-12)
    assert estimate.standard_error == 0.
    assert estimate.method == 'partial_wave_quadrature'


def test_pw_matches_entropies():
    decomp, result = schmidt_entropies(ground_state(), l_max=20, r_max=20.,
                                     radial_nodes=120, tolerance=1e-4)
    assert trace_rho_squared_pw(decomp).s_linear == \
        pytest.approx(result.s_linear, abs=1e-10)


def test_pw_needs_kernels():
    grid = radial_grid(10., 20)
    g = grid.nodes * np.exp(-grid.nodes)
    decomp = decompose(np.outer(g, g)[None], grid, retain_kernels=False)
    with pytest.raises(ValueError):
        trace_rho_squared_pw(decomp)


def test_compare():
    estimate = TraceEstimate(0.5, 0.01, 10 ** 4, 'monte_carlo')
    assert compare(0.5, estimate) == (0., 0.)
    difference, sigmas = compare(0.4, estimate)
    assert difference == pytest.approx(0.1)
    assert sigmas == pytest.approx(10.)

    exact = TraceEstimate(0.5, 0., 80, 'partial_wave_quadrature')
    assert compare(0.4, exact)[1] == float('inf')


@pytest.mark.slow
@pytest.mark.parametrize('omega,energy', [(7, -0.7779), (7, -0.6219)])
def test_mc_matches_schmidt_resonances(omega, energy):
    result = scan(omega, 0.2, 1.0, 0.002)
    best, _ = resolve_resonance(result, energy, tolerance=0.005)
    mp = assemble(omega, alpha_star(result, best))
    psi = state(mp, solve(mp), best.curve_index)

    _, entropy = schmidt_entropies(psi)
    estimate = trace_rho_squared_mc(psi)
    assert estimate.standard_error <= 2e-3
    assert compare(entropy.s_linear, estimate)[1] <= 3
