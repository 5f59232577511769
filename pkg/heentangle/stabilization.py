"""
Stabilization method for autoionizing resonances.

Eigenvalues below the He+ N=2 threshold are followed as functions of the
nonlinear parameter alpha. Where a curve flattens into a plateau, the inverse
slope dalpha/dE is a density of resonance states whose Lorentzian peak gives
the position E_r and width Gamma of the resonance.
"""
import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import scipy.optimize as so
from scipy.signal import find_peaks
from joblib import Parallel, delayed
from sklearn.metrics import r2_score

from heentangle import eigensolver, integrals
from heentangle.util import (NumericalFailure, FitError, num_threads,
                             read_csv, write_csv)

logger = logging.getLogger(__name__)

# He+ (N=2) threshold for Z=2, -Z^2/(2 n^2)
DEFAULT_CEILING = -0.5

# Doubly excited 1Se states below the N=2 threshold; positions are search
# hints for plateau selection, not reference values
KNOWN_STATES = {'2s2': -0.77787, '2p2': -0.62193, '2s3s': -0.58990}

# Levenberg-Marquardt settings
MAX_ITERATIONS = 200
GRADIENT_TOLERANCE = 1e-12
MIN_FIT_POINTS = 8


@dataclass(frozen=True)
class StabilizationScan:
    """
    Eigenvalue curves E_n(alpha) over an alpha grid.

    Parameters
    ----------
    alphas : array
        Ascending grid of the nonlinear parameter.
    curves : array
        Energies, number of curves by number of grid points; row n holds
        the n-th lowest eigenvalue at every alpha.
    omega : int
        Basis truncation.
    Z : float
        Nuclear charge.
    energy_ceiling : float
        Eigenvalues above this were not retained.

    """

    alphas: np.ndarray
    curves: np.ndarray
    omega: int
    Z: float = 2.0
    energy_ceiling: float = DEFAULT_CEILING

    def __post_init__(self):
        alphas = np.array(self.alphas, dtype='float64')
        curves = np.atleast_2d(np.array(self.curves, dtype='float64'))

        # Checks on the grid
        if alphas.ndim != 1 or alphas.shape[0] < 1:
            raise ValueError('Alpha grid should be a non-empty vector.')
        if np.any(np.diff(alphas) <= 0):
            raise ValueError('Alpha grid should be strictly ascending.')
        if curves.shape[1] != alphas.shape[0]:
            raise ValueError('Curves should be defined on every grid point.')
        if not np.all(np.isfinite(curves)):
            raise ValueError('Curves contain non-finite energies.')

        object.__setattr__(self, 'alphas', alphas)
        object.__setattr__(self, 'curves', curves)

    @property
    def num_curves(self):
        """Number of eigenvalue curves."""
        return self.curves.shape[0]

    def header(self):
        """CSV column names."""
        return ['alpha'] + ['E_{}'.format(n) for n in range(self.num_curves)]

    def to_csv(self, path, config_hash='', status=None):
        """Write the scan as alpha,E_0,...,E_{K-1}."""
        rows = np.column_stack((self.alphas, self.curves.T))
        return write_csv(path, self.header(), rows, config_hash=config_hash,
                         status=status)

    @classmethod
    def from_csv(cls, path, omega=-1, Z=2.0, energy_ceiling=DEFAULT_CEILING):
        """Read a scan written by to_csv."""
        header, table, _ = read_csv(path)
        if not header or header[0] != 'alpha':
            raise ValueError('{} is not a scan file.'.format(path))
        return cls(table[:, 0], table[:, 1:].T, omega, Z, energy_ceiling)


@dataclass(frozen=True)
class DensityCurve:
    """
    Density of resonance states along one curve and alpha window.

    Parameters
    ----------
    energies : array
        Abscissae E_n (a.u.).
    rho : array
        Densities (alpha_{n+1} - alpha_{n-1}) / (E_{n+1} - E_{n-1}).
    alphas : array
        Grid values alpha_n belonging to each point.
    curve_index : int
        Eigenvalue index of the curve.
    window : tuple(float, float)
        Alpha window the points were taken from.

    """

    energies: np.ndarray
    rho: np.ndarray
    alphas: np.ndarray
    curve_index: int = 0
    window: Tuple[float, float] = (0., 0.)

    def to_csv(self, path, config_hash=''):
        """Write the density as E,rho."""
        rows = np.column_stack((self.energies, self.rho))
        return write_csv(path, ['E', 'rho'], rows, config_hash=config_hash)


@dataclass(frozen=True)
class ResonanceFit:
    """
    Fitted Lorentzian a (Gamma/2) / ((E - E_r)^2 + Gamma^2/4) + b.

    Parameters
    ----------
    E_r : float
        Resonance position (a.u.).
    Gamma : float
        Resonance width (a.u.), positive.
    a : float
        Amplitude.
    b : float
        Baseline.
    r_squared : float
        Coefficient of determination of the fit.
    residual_norm : float
        Euclidean norm of the fit residuals.
    curve_index : int
        Eigenvalue index of the fitted curve.
    window : tuple(float, float)
        Alpha window of the fitted plateau.
    alpha_star : float
        Grid alpha whose energy lies nearest E_r within the window.

    """

    E_r: float
    Gamma: float
    a: float
    b: float
    r_squared: float
    residual_norm: float = 0.
    curve_index: int = 0
    window: Tuple[float, float] = (0., 0.)
    alpha_star: float = float('nan')

    def __post_init__(self):
        if not self.Gamma > 0:
            raise ValueError('Resonance width should be positive.')
        if self.r_squared > 1 + 1e-12:
            raise ValueError('Coefficient of determination exceeds one.')

    def to_dict(self):
        """Structured record of the fit."""
        return {'e_r': self.E_r, 'gamma': self.Gamma, 'a': self.a,
                'b': self.b, 'r_squared': self.r_squared,
                'residual_norm': self.residual_norm,
                'window': list(self.window), 'curve_index': self.curve_index,
                'alpha_star': self.alpha_star}

    @classmethod
    def from_dict(cls, record):
        """Inverse of to_dict."""
        return cls(record['e_r'], record['gamma'], record['a'], record['b'],
                   record['r_squared'], record.get('residual_norm', 0.),
                   int(record['curve_index']), tuple(record['window']),
                   record.get('alpha_star', float('nan')))


@dataclass(frozen=True)
class Plateau:
    """Alpha window where one curve is locally flat."""

    curve_index: int
    window: Tuple[float, float]
    energy: float
    num_points: int = field(default=0, compare=False)


def alpha_grid(alpha_min, alpha_max, alpha_step):
    """
    Uniform ascending alpha grid including both ends.

    Parameters
    ----------
    alpha_min, alpha_max : float
        Range of the nonlinear parameter, 0 < alpha_min < alpha_max.
    alpha_step : float
        Grid spacing, positive.

    Returns
    -------
    array
        Grid values; the last point is alpha_max when the step divides the
        range.

    """
    # Checks on the range
    if not 0 < alpha_min < alpha_max:
        raise ValueError('Alpha range should satisfy 0 < alpha_min < '
                         'alpha_max.')
    if not alpha_step > 0:
        raise ValueError('Alpha step should be positive.')

    count = int(np.floor((alpha_max - alpha_min) / alpha_step + 1e-9)) + 1
    alphas = alpha_min + alpha_step * np.arange(count)

    # Land exactly on alpha_max when the step divides the range
    if abs(alphas[-1] - alpha_max) <= 1e-9 * alpha_step:
        alphas[-1] = alpha_max
    return alphas


def _solve_point(alpha, omega, Z, interaction, precision, dps,
                 rank_tolerance):
    """Eigenvalues at one grid point, or the exception it raised."""
    try:
        mp = integrals.assemble(omega, alpha, alpha, Z, interaction,
                                precision=precision, dps=dps)
        return eigensolver.solve(mp, rank_tolerance).energies
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        return exc


def scan(omega, alpha_min=0.2, alpha_max=1.0, alpha_step=0.002, Z=2.0,
         energy_ceiling=DEFAULT_CEILING, max_jump=0.25, interaction=True,
         precision='double', dps=integrals.DEFAULT_DPS,
         rank_tolerance=eigensolver.DEFAULT_RANK_TOLERANCE, n_jobs=None):
    """
    Stabilization scan of the eigenvalues over alpha (alpha = beta).

    Parameters
    ----------
    omega : int
        Basis truncation.
    alpha_min, alpha_max, alpha_step : float
        Grid of the nonlinear parameter, (def=0.2, 1.0, 0.002).
    Z : float
        Nuclear charge, (def=2).
    energy_ceiling : float
        Keep eigenvalues below this energy, (def=-0.5).
    max_jump : float
        Largest energy change allowed between neighbouring grid points on one
        curve; None disables the check, (def=0.25).
    interaction : bool
        Whether to include 1/r12, (def=True).
    precision : str
        'double' or 'extended', (def='double').
    dps : int
        Decimal digits of the integral arithmetic.
    rank_tolerance : float
        Relative overlap cutoff of the eigensolver.
    n_jobs : int
        Number of parallel workers, (def=HE_ENTANGLE_THREADS or all cores).

    Returns
    -------
    StabilizationScan
        Curves indexed by sorted eigenvalue order.

    """
    alphas = alpha_grid(alpha_min, alpha_max, alpha_step)
    if n_jobs is None:
        n_jobs = num_threads()

    # Warm the integral cache once before fanning out
    integrals.assemble(omega, alphas[0], alphas[0], Z, interaction,
                       precision=precision, dps=dps)

    logger.info('Scanning %d alpha points in [%g, %g] (omega=%d)',
                alphas.shape[0], alphas[0], alphas[-1], omega)

    results = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(_solve_point)(alpha, omega, Z, interaction, precision, dps,
                              rank_tolerance) for alpha in alphas)

    # Aggregate in grid order up to the first failure
    spectra = []
    failure = None
    for alpha, result in zip(alphas, results):
        if isinstance(result, Exception):
            failure = (alpha, result)
            break
        spectra.append(result[result < energy_ceiling])

    partial = None
    if spectra:
        partial = _stack(alphas[:len(spectra)], spectra, omega, Z,
                         energy_ceiling)

    if failure is not None:
        alpha, exc = failure
        raise NumericalFailure('Solver failed at alpha={:.6g}: {}'.format(
            alpha, exc), alpha=float(alpha), partial=partial)

    if partial is None:
        raise NumericalFailure('No eigenvalues below the ceiling.')

    if max_jump is not None:
        _check_jumps(partial, max_jump)

    return partial


def _stack(alphas, spectra, omega, Z, energy_ceiling):
    """Collect per-alpha eigenvalues into curves defined everywhere."""
    counts = [spectrum.shape[0] for spectrum in spectra]
    num_curves = min(counts)
    if num_curves == 0:
        bad = alphas[counts.index(0)]
        raise NumericalFailure('No eigenvalue below {} at alpha={:.6g}.'
                               .format(energy_ceiling, bad), alpha=float(bad))
    if max(counts) > num_curves:
        logger.warning('Keeping %d curves; up to %d eigenvalues lie below '
                       'the ceiling at some alpha', num_curves, max(counts))

    curves = np.array([spectrum[:num_curves] for spectrum in spectra]).T
    return StabilizationScan(alphas, curves, omega, Z, energy_ceiling)


def _check_jumps(scan_result, max_jump):
    """Reject curves with discontinuities between neighbouring alphas."""
    if scan_result.alphas.shape[0] < 2:
        return
    jumps = np.abs(np.diff(scan_result.curves, axis=1))
    if np.max(jumps) > max_jump:
        curve, point = np.unravel_index(np.argmax(jumps), jumps.shape)
        alpha = scan_result.alphas[point + 1]
        raise NumericalFailure('Curve {} jumps by {:.3g} a.u. at alpha={:.6g}'
                               .format(curve, jumps[curve, point], alpha),
                               alpha=float(alpha), partial=scan_result)


def _window_indices(alphas, window):
    """Interior grid indices whose alpha lies inside the window."""
    lo, hi = window
    if not lo < hi:
        raise ValueError('Window should satisfy lo < hi.')
    if lo < alphas[0] or hi > alphas[-1]:
        raise ValueError('Window [{}, {}] lies outside the alpha grid.'
                         .format(lo, hi))

    index = np.flatnonzero((alphas >= lo) & (alphas <= hi))
    return index[(index > 0) & (index < alphas.shape[0] - 1)]


def density_of_states(scan_result, curve_index, window=None):
    """
    Density of resonance states by centered differences.

    rho_n = (alpha_{n+1} - alpha_{n-1}) / (E_{n+1} - E_{n-1}), attached to
    the abscissa E_n. A curve falling with alpha gives uniformly negative
    differences; their sign is flipped so the density is positive.

    Parameters
    ----------
    scan_result : StabilizationScan
        Eigenvalue curves.
    curve_index : int
        Which curve to difference.
    window : tuple(float, float)
        Alpha window, (def=whole grid).

    Returns
    -------
    DensityCurve
        Density points with grid endpoints excluded.

    """
    if not 0 <= curve_index < scan_result.num_curves:
        raise ValueError('Curve index {} out of range.'.format(curve_index))

    alphas = scan_result.alphas
    if window is None:
        window = (float(alphas[0]), float(alphas[-1]))
    index = _window_indices(alphas, window)
    if index.shape[0] == 0:
        raise ValueError('Window contains no interior grid points.')

    energy = scan_result.curves[curve_index]
    d_energy = energy[index + 1] - energy[index - 1]
    if np.any(d_energy == 0):
        raise ValueError('Flat energy difference in window; density is '
                         'undefined.')

    rho = (alphas[index + 1] - alphas[index - 1]) / d_energy

    # Orientation of the curve within the window
    if np.all(rho < 0):
        rho = -rho
    elif np.any(rho < 0):
        raise ValueError('Curve {} is not monotone in window {}.'.format(
            curve_index, tuple(window)))

    return DensityCurve(energy[index], rho, alphas[index], int(curve_index),
                        (float(window[0]), float(window[1])))


def lorentzian(energy, E_r, Gamma, a, b):
    """Lorentzian profile plus constant baseline."""
    half = Gamma / 2
    return a * half / ((energy - E_r) ** 2 + half ** 2) + b


def _lorentzian_jacobian(params, energy, rho):
    """Derivatives of the profile with respect to (E_r, Gamma, a, b)."""
    E_r, Gamma, a, _ = params
    half = Gamma / 2
    shift = energy - E_r
    denom = shift ** 2 + half ** 2

    jac = np.empty((energy.shape[0], 4))
    jac[:, 0] = 2 * a * half * shift / denom ** 2
    jac[:, 1] = a / 2 * (shift ** 2 - half ** 2) / denom ** 2
    jac[:, 2] = half / denom
    jac[:, 3] = 1.
    return jac


def initial_guess(dc):
    """
    Starting parameters for the Lorentzian fit.

    E_r at the density maximum, b from the window edges, Gamma from the full
    width at half maximum above the baseline and a from the peak height.
    """
    energy = np.asarray(dc.energies)
    rho = np.asarray(dc.rho)
    order = np.argsort(energy)
    energy, rho = energy[order], rho[order]

    peak = int(np.argmax(rho))
    if peak == 0 or peak == rho.shape[0] - 1:
        raise ValueError('Density maximum lies on the window edge.')

    baseline = min(rho[0], rho[-1])
    height = rho[peak] - baseline
    half_level = baseline + height / 2

    # Half-maximum crossings on both sides, linearly interpolated
    widths = []
    below = np.flatnonzero(rho[:peak] < half_level)
    if below.shape[0]:
        i = below[-1]
        t = (half_level - rho[i]) / (rho[i + 1] - rho[i])
        widths.append(energy[peak] - (energy[i] + t * (energy[i + 1] -
                                                       energy[i])))
    above = np.flatnonzero(rho[peak + 1:] < half_level)
    if above.shape[0]:
        i = peak + above[0]
        t = (rho[i] - half_level) / (rho[i] - rho[i + 1])
        widths.append((energy[i] + t * (energy[i + 1] - energy[i])) -
                      energy[peak])

    if widths:
        Gamma = 2 * float(np.mean(widths))
    else:
        Gamma = (energy[-1] - energy[0]) / 4

    return np.array([energy[peak], Gamma, height * Gamma / 2, baseline])


def fit_lorentzian(dc, max_iterations=MAX_ITERATIONS,
                   gradient_tolerance=GRADIENT_TOLERANCE):
    """
    Least-squares fit of a Lorentzian to a density curve.

    Levenberg-Marquardt with the analytic Jacobian.

    Parameters
    ----------
    dc : DensityCurve
        Density points of one plateau.
    max_iterations : int
        Cap on the number of iterations, (def=200).
    gradient_tolerance : float
        Gradient tolerance of the optimizer, (def=1e-12).

    Returns
    -------
    ResonanceFit
        Fitted parameters with coefficient of determination.

    """
    energy = np.asarray(dc.energies, dtype='float64')
    rho = np.asarray(dc.rho, dtype='float64')

    # Checks on the data
    if energy.shape[0] < MIN_FIT_POINTS:
        raise ValueError('Need at least {} density points, got {}.'.format(
            MIN_FIT_POINTS, energy.shape[0]))

    guess = initial_guess(dc)

    def residual(params):
        return lorentzian(energy, *params) - rho

    def jacobian(params):
        return _lorentzian_jacobian(params, energy, rho)

    result = so.least_squares(residual, guess, jac=jacobian,
                              method='lm', x_scale='jac',
                              max_nfev=max_iterations, ftol=1e-15,
                              xtol=1e-15, gtol=gradient_tolerance)

    if result.status <= 0:
        raise FitError('Lorentzian fit did not converge: {}'.format(
            result.message))

    E_r, Gamma, a, b = result.x

    # The profile is invariant under (Gamma, a) -> (-Gamma, -a)
    if Gamma < 0:
        Gamma, a = -Gamma, -a
    if not (np.isfinite(E_r) and Gamma > 0):
        raise FitError('Lorentzian fit produced a degenerate width.')

    model = lorentzian(energy, E_r, Gamma, a, b)
    r_squared = float(r2_score(rho, model))

    # Grid alpha nearest the fitted position
    alpha_star = float(dc.alphas[np.argmin(np.abs(energy - E_r))])

    logger.info('Fit curve %d window %s: E_r=%.7f Gamma=%.6f r2=%.7f',
                dc.curve_index, dc.window, E_r, Gamma, r_squared)

    return ResonanceFit(float(E_r), float(Gamma), float(a), float(b),
                        r_squared, float(np.linalg.norm(result.fun)),
                        dc.curve_index, dc.window, alpha_star)


def select_best_plateau(fits):
    """
    Pick the best of several fits of one resonance.

    Largest r^2 wins; ties go to the smaller residual norm, then the lower
    curve index.
    """
    fits = list(fits)
    if not fits:
        raise ValueError('No fits to select from.')

    return min(fits, key=lambda fit: (-fit.r_squared, fit.residual_norm,
                                      fit.curve_index))


def find_plateaus(scan_result, curve_index, threshold=0.5, min_points=8):
    """
    Detect plateaus of one curve.

    A plateau is a local minimum of |dE/dalpha| along the curve that lies at
    least a factor 1 / threshold below the slope on both sides of it. The
    comparison uses the curve's own slope only, so plateaus are found even
    where the neighbouring curves are flat at the same alpha. The window
    spans the grid points where log|dE/dalpha| stays below half the depth of
    the minimum; windows shorter than min_points are dropped.

    Parameters
    ----------
    scan_result : StabilizationScan
        Eigenvalue curves.
    curve_index : int
        Curve to examine.
    threshold : float
        Slope ratio between plateau and surroundings, in (0, 1), (def=0.5).
    min_points : int
        Shortest accepted window, (def=8).

    Returns
    -------
    list[Plateau]
        Windows in ascending alpha.

    """
    if not 0 <= curve_index < scan_result.num_curves:
        raise ValueError('Curve index {} out of range.'.format(curve_index))
    if not 0 < threshold < 1:
        raise ValueError('Threshold should lie in (0, 1).')
    if scan_result.alphas.shape[0] < 3:
        return []

    curve = scan_result.curves[curve_index]
    slopes = np.abs(np.gradient(curve, scan_result.alphas))

    # Flatness as minus log slope; zero slopes are clipped
    floor = max(1e-12 * float(slopes.max()), np.finfo('float64').tiny)
    flatness = -np.log(np.maximum(slopes, floor))

    peaks, properties = find_peaks(flatness, prominence=-np.log(threshold),
                                   width=0, rel_height=0.5)

    plateaus = []
    last_hi = -1
    for peak, left, right in zip(peaks, properties['left_ips'],
                                 properties['right_ips']):
        lo, hi = int(np.ceil(left)), int(np.floor(right))

        # Equal maxima inside one plateau share its window
        if hi - lo + 1 < min_points or lo <= last_hi:
            continue
        last_hi = hi
        window = (float(scan_result.alphas[lo]),
                  float(scan_result.alphas[hi]))
        plateaus.append(Plateau(int(curve_index), window, float(curve[peak]),
                                hi - lo + 1))

    return plateaus


def plateau_candidates(scan_result, threshold=0.5, min_points=8):
    """Plateaus of every curve, ordered by curve then alpha."""
    candidates = []
    for curve_index in range(scan_result.num_curves):
        candidates.extend(find_plateaus(scan_result, curve_index, threshold,
                                        min_points))
    return candidates


def _padded_window(scan_result, plateau, pad):
    """Widen a plateau window by pad grid points on each side."""
    alphas = scan_result.alphas
    lo = max(int(np.searchsorted(alphas, plateau.window[0])) - pad, 0)
    hi = min(int(np.searchsorted(alphas, plateau.window[1])) + pad,
             alphas.shape[0] - 1)
    return float(alphas[lo]), float(alphas[hi])


def resolve_resonance(scan_result, energy, tolerance=0.01, threshold=0.5,
                      min_points=8, pad=4):
    """
    Fit every plateau near an energy and keep the best one.

    Parameters
    ----------
    scan_result : StabilizationScan
        Eigenvalue curves.
    energy : float
        Approximate resonance position (a.u.).
    tolerance : float
        Accept plateaus whose centre lies within this distance, (def=0.01).
    threshold, min_points : float, int
        Plateau detection settings.
    pad : int
        Grid points added on each side of a detected plateau before fitting,
        (def=4).

    Returns
    -------
    best : ResonanceFit
        Fit with the best r^2.
    fits : list[ResonanceFit]
        All successful fits.

    """
    candidates = [plateau for plateau in plateau_candidates(
        scan_result, threshold, min_points)
        if abs(plateau.energy - energy) <= tolerance]
    if not candidates:
        raise ValueError('No plateau within {} a.u. of {}.'.format(
            tolerance, energy))

    fits = []
    for plateau in candidates:
        window = _padded_window(scan_result, plateau, pad)
        try:
            dc = density_of_states(scan_result, plateau.curve_index, window)
            fits.append(fit_lorentzian(dc))
        except (ValueError, FitError) as exc:
            logger.warning('Skipping plateau on curve %d window %s: %s',
                           plateau.curve_index, window, exc)

    if not fits:
        raise FitError('No plateau near {} could be fitted.'.format(energy))

    return select_best_plateau(fits), fits


def alpha_star(scan_result, fit):
    """
    Grid alpha at the centre of a fitted resonance.

    Takes the grid point inside the fit window whose energy on the fitted
    curve lies nearest E_r, i.e. where the density of states peaks.

    Parameters
    ----------
    scan_result : StabilizationScan
        Scan the fit was made on.
    fit : ResonanceFit
        Fitted resonance with curve index and window.

    Returns
    -------
    float
        Selected alpha.

    """
    if not 0 <= fit.curve_index < scan_result.num_curves:
        raise ValueError('Curve index {} out of range.'.format(
            fit.curve_index))

    alphas = scan_result.alphas
    lo, hi = fit.window
    index = np.flatnonzero((alphas >= lo) & (alphas <= hi))
    if index.shape[0] == 0:
        raise ValueError('Fit window contains no grid points.')

    energy = scan_result.curves[fit.curve_index, index]
    return float(alphas[index[np.argmin(np.abs(energy - fit.E_r))]])
