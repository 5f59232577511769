import pytest
import numpy as np

from heentangle.stabilization import (DensityCurve, ResonanceFit,
                                      StabilizationScan, alpha_grid,
                                      alpha_star, density_of_states,
                                      find_plateaus, fit_lorentzian,
                                      lorentzian, plateau_candidates,
                                      resolve_resonance, scan,
                                      select_best_plateau)
from heentangle.util import FitError, NumericalFailure, read_csv


def plateau_scan():
    """Three curves; the middle one is flat for 0.4 <= alpha <= 0.6."""
    alphas = alpha_grid(0.01, 1.0, 0.01)
    middle = np.where(alphas < 0.4, -2 + 2 * alphas,
                      np.where(alphas <= 0.6, -1.2 + 0.01 * (alphas - 0.4),
                               -1.198 + 2 * (alphas - 0.6)))
    curves = np.array([-3 + 2 * alphas, middle, -1 + 2 * alphas])
    return StabilizationScan(alphas, curves, omega=0)


def stepped_curve(alphas, offset, flats, slope=2., flat_slope=0.01):
    """Piecewise linear curve, nearly flat inside each (lo, hi) of flats."""
    middles = (alphas[1:] + alphas[:-1]) / 2
    steps = np.full(middles.shape, slope)
    for lo, hi in flats:
        steps[(middles > lo) & (middles < hi)] = flat_slope
    return offset + np.concatenate(([0.], np.cumsum(steps * np.diff(alphas))))


def lorentzian_scan(E_r=-0.778, Gamma=0.0045, a=0.01, b=0.5, count=401):
    """Curve whose inverse slope is a Lorentzian plus baseline."""
    energies = np.linspace(E_r - 0.03, E_r + 0.03, count)
    alphas = a * np.arctan((energies - E_r) / (Gamma / 2)) + b * energies
    alphas = alphas - alphas[0] + 0.2
    return StabilizationScan(alphas, energies[None, :], omega=0)


def test_alpha_grid():
    grid = alpha_grid(0.2, 1.0, 0.002)
    assert grid.shape[0] == 401
    assert grid[-1] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        alpha_grid(1.0, 0.5, 0.1)
    with pytest.raises(ValueError):
        alpha_grid(0.2, 1.0, 0.)


def test_alpha_grid_ends_on_alpha_max():
    grid = alpha_grid(0.3, 0.9, 0.003)
    assert grid.shape[0] == 201
    assert grid[0] == 0.3 and grid[-1] == 0.9
    assert np.all(np.diff(grid) > 0)
    assert alpha_grid(0.2, 1.0, 0.3)[-1] == pytest.approx(0.8)

    result = StabilizationScan(grid, (-1 + 0.5 * grid)[None, :], omega=0)
    dc = density_of_states(result, 0, (0.6, 0.9))
    np.testing.assert_allclose(dc.rho, 2., rtol=1e-8)
    assert dc.alphas[-1] < 0.9


def test_scan_single_term():
    """One-term curve follows the screened-charge energy."""
    result = scan(0, 1.0, 2.4, 0.01, n_jobs=1)
    assert result.num_curves == 1
    expected = result.alphas ** 2 - 4 * result.alphas + 5 * result.alphas / 8
    np.testing.assert_allclose(result.curves[0], expected, rtol=1e-12)

    lowest = np.argmin(result.curves[0])
    assert result.alphas[lowest] == pytest.approx(27 / 16, abs=0.01)
    assert result.curves[0, lowest] == pytest.approx(-2.8477, abs=1e-3)


def test_scan_deterministic():
    first = scan(2, 0.6, 0.8, 0.05, max_jump=None, n_jobs=2)
    second = scan(2, 0.6, 0.8, 0.05, max_jump=None, n_jobs=1)
    np.testing.assert_array_equal(first.curves, second.curves)
    assert np.all(first.curves < -0.5)


def test_scan_nothing_below_ceiling():
    with pytest.raises(NumericalFailure):
        scan(0, 1.0, 2.0, 0.1, energy_ceiling=-3.)


def test_scan_jump_reports_partial():
    with pytest.raises(NumericalFailure) as info:
        scan(0, 0.2, 3.0, 0.5, max_jump=0.1)
    assert info.value.alpha is not None
    assert isinstance(info.value.partial, StabilizationScan)


def test_scan_csv(tmp_path):
    result = plateau_scan()
    path = result.to_csv(str(tmp_path / 'scan.csv'), config_hash='abc123')
    header, table, comments = read_csv(path)
    assert header == ['alpha', 'E_0', 'E_1', 'E_2']
    assert comments[0].startswith('heentangle')
    assert comments[0].endswith('config=abc123')

    loaded = StabilizationScan.from_csv(path)
    np.testing.assert_array_equal(loaded.curves, result.curves)


def test_density_linear_curve():
    alphas = alpha_grid(0.2, 1.0, 0.01)
    result = StabilizationScan(alphas, (-1 + 0.5 * alphas)[None, :], omega=0)
    dc = density_of_states(result, 0)
    np.testing.assert_allclose(dc.rho, 2., rtol=1e-10)
    assert dc.energies.shape[0] == alphas.shape[0] - 2


def test_density_decreasing_curve_positive():
    alphas = alpha_grid(0.2, 1.0, 0.01)
    result = StabilizationScan(alphas, (-1 - 0.25 * alphas)[None, :], omega=0)
    dc = density_of_states(result, 0, (0.3, 0.9))
    np.testing.assert_allclose(dc.rho, 4., rtol=1e-10)
    assert np.all(dc.alphas >= 0.3) and np.all(dc.alphas <= 0.9)


def test_density_invalid():
    result = plateau_scan()
    with pytest.raises(ValueError):
        density_of_states(result, 3)
    with pytest.raises(ValueError):
        density_of_states(result, 0, (0., 2.))

    # Not monotone
    alphas = alpha_grid(0.1, 1.0, 0.01)
    bowl = StabilizationScan(alphas, ((alphas - 0.5) ** 2)[None, :], omega=0)
    with pytest.raises(ValueError):
        density_of_states(bowl, 0)


def test_density_recovers_generator():
    result = lorentzian_scan()
    dc = density_of_states(result, 0)
    energy = dc.energies
    expected = 0.01 * (0.0045 / 2) / ((energy + 0.778) ** 2 +
                                      0.0045 ** 2 / 4) + 0.5
    np.testing.assert_allclose(dc.rho, expected, rtol=5e-3)


def test_fit_exact_lorentzian():
    energies = np.linspace(-0.79, -0.766, 200)
    rho = lorentzian(energies, -0.778, 0.0045, 1., 0.1)
    dc = DensityCurve(energies, rho, np.linspace(0.3, 0.5, 200))
    fit = fit_lorentzian(dc)

    assert fit.E_r == pytest.approx(-0.778, abs=1e-9)
    assert fit.Gamma == pytest.approx(0.0045, rel=1e-7)
    assert fit.a == pytest.approx(1., rel=1e-6)
    assert fit.b == pytest.approx(0.1, abs=1e-6)
    assert fit.r_squared == pytest.approx(1., abs=1e-12)


def test_fit_synthetic_scan():
    result = lorentzian_scan()
    fit = fit_lorentzian(density_of_states(result, 0))
    assert fit.E_r == pytest.approx(-0.778, abs=1e-5)
    assert fit.Gamma == pytest.approx(0.0045, rel=0.02)
    assert fit.r_squared > 0.9999
    assert fit.window[0] <= fit.alpha_star <= fit.window[1]


def test_fit_noise_perturbs_position_slightly():
    energies = np.linspace(-0.79, -0.766, 300)
    clean = lorentzian(energies, -0.778, 0.0045, 1., 0.1)
    noise = np.random.default_rng(0).standard_normal(300)
    dc = DensityCurve(energies, clean * (1 + 1e-3 * noise), energies)
    fit = fit_lorentzian(dc)
    assert fit.E_r == pytest.approx(-0.778, abs=0.01 * 0.0045)


def test_fit_invalid():
    energies = np.linspace(-1., -0.9, 5)
    with pytest.raises(ValueError):
        fit_lorentzian(DensityCurve(energies, np.ones(5), energies))

    # Maximum on the window edge
    energies = np.linspace(-1., -0.9, 20)
    with pytest.raises(ValueError):
        fit_lorentzian(DensityCurve(energies, energies + 2, energies))


def test_resonance_fit_invariants():
    with pytest.raises(ValueError):
        ResonanceFit(-0.7, -0.001, 1., 0., 0.99)
    with pytest.raises(ValueError):
        ResonanceFit(-0.7, 0.001, 1., 0., 1.5)

    fit = ResonanceFit(-0.7, 0.001, 1., 0., 0.99, 0.1, 2, (0.3, 0.4), 0.35)
    assert ResonanceFit.from_dict(fit.to_dict()) == fit


def test_select_best_plateau():
    fits = [ResonanceFit(-0.622, 0.00024, 1., 0., r2, curve_index=n)
            for n, r2 in enumerate([0.970444, 0.999197, 0.999987])]
    assert select_best_plateau(fits) is fits[2]
    assert select_best_plateau(fits[:1]) is fits[0]
    with pytest.raises(ValueError):
        select_best_plateau([])


def test_select_best_plateau_ties():
    a = ResonanceFit(-0.6, 0.001, 1., 0., 0.999, residual_norm=0.2,
                     curve_index=1)
    b = ResonanceFit(-0.6, 0.001, 1., 0., 0.999, residual_norm=0.1,
                     curve_index=4)
    c = ResonanceFit(-0.6, 0.001, 1., 0., 0.999, residual_norm=0.1,
                     curve_index=3)
    assert select_best_plateau([a, b]) is b
    assert select_best_plateau([a, b, c]) is c


def test_find_plateaus():
    result = plateau_scan()
    plateaus = find_plateaus(result, 1)
    assert len(plateaus) == 1
    assert plateaus[0].curve_index == 1
    assert plateaus[0].window == pytest.approx((0.41, 0.59), abs=1e-9)
    assert find_plateaus(result, 0) == []
    assert plateau_candidates(result) == plateaus


def test_find_plateaus_adjacent_curves_flat():
    """Plateaus shared by neighbouring curves are each detected."""
    alphas = alpha_grid(0.01, 1.0, 0.01)
    curves = np.array([
        stepped_curve(alphas, -3., [(0.4, 0.6)]),
        stepped_curve(alphas, -2., [(0.4, 0.6), (0.75, 0.9)]),
        stepped_curve(alphas, -1., [(0.4, 0.6)])])
    result = StabilizationScan(alphas, curves, omega=0)

    for curve_index in range(3):
        plateaus = find_plateaus(result, curve_index)
        assert plateaus[0].window == pytest.approx((0.41, 0.59), abs=1e-9)
        assert plateaus[0].num_points == 19
    plateaus = find_plateaus(result, 1)
    assert len(plateaus) == 2
    assert plateaus[1].window == pytest.approx((0.76, 0.89), abs=1e-9)
    assert len(plateau_candidates(result)) == 4


def test_find_plateaus_settings():
    result = plateau_scan()
    assert find_plateaus(result, 1, min_points=30) == []
    # slope ratio 0.005 is too shallow for threshold 1e-4
    assert find_plateaus(result, 1, threshold=1e-4) == []
    with pytest.raises(ValueError):
        find_plateaus(result, 1, threshold=1.5)
    with pytest.raises(ValueError):
        find_plateaus(result, 3)


def test_alpha_star():
    result = plateau_scan()
    fit = ResonanceFit(-1.199, 0.01, 1., 0., 0.99, curve_index=1,
                       window=(0.41, 0.59))
    assert alpha_star(result, fit) == pytest.approx(0.5, abs=1e-12)


def test_resolve_resonance_no_plateau():
    with pytest.raises(ValueError):
        resolve_resonance(plateau_scan(), 5.)


@pytest.mark.slow
@pytest.mark.parametrize('omega,energy,E_r,E_tol,Gamma,Gamma_tol', [
    (9, -0.7779, -0.7778, 5e-4, 0.00456, 0.15),
    (9, -0.6219, -0.62193, 2e-4, 0.000215, 0.25),
    (10, -0.5899, -0.58990, 2e-4, 0.00134, 0.20)])
def test_resonances(omega, energy, E_r, E_tol, Gamma, Gamma_tol):
    result = scan(omega, 0.2, 1.0, 0.002)
    best, fits = resolve_resonance(result, energy, tolerance=0.005)
    assert best.E_r == pytest.approx(E_r, abs=E_tol)
    assert best.Gamma == pytest.approx(Gamma, rel=Gamma_tol)
    assert best.r_squared >= 0.999


@pytest.mark.slow
def test_resonance_stable_under_finer_alpha_step():
    """2s2 at omega = 9 refitted on the same window with half the step."""
    coarse, _ = resolve_resonance(scan(9, 0.2, 1.0, 0.002), -0.7779,
                                  tolerance=0.005)
    fine_scan = scan(9, 0.2, 1.0, 0.001)
    fine = fit_lorentzian(density_of_states(fine_scan, coarse.curve_index,
                                            coarse.window))
    assert abs(fine.E_r - coarse.E_r) < 1e-5
    assert fine.Gamma == pytest.approx(coarse.Gamma, rel=0.02)
