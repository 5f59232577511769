"""
Command-line front end.

    heentangle bound   [--optimize-alpha]        ground state at fixed alpha
    heentangle scan                               stabilization scan to CSV
    heentangle fit     [SCAN] [--window LO HI] [--curve N | --energy E]
    heentangle entropy [--alpha-star A --curve N | --fit FIT.json] [--oracle]
    heentangle check   [--alpha-star A --curve N | --fit FIT.json]

Every command accepts the RunConfig flags and ``--config FILE`` (JSON);
explicit flags override file values. Exit codes: 0 success, 2 invalid
input, 3 numerical failure.
"""
import os
import sys
import json
import numbers
import logging
import argparse
import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.optimize as so

from heentangle import eigensolver, integrals, oracle, schmidt, stabilization
from heentangle._version import __version__
from heentangle.oracle import TraceEstimate
from heentangle.util import (ConfigError, NumericalFailure, FitError,
                             hash_dict, provenance, read_json, write_csv,
                             write_json)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

_KIND_NAMES = {bool: 'a boolean', int: 'an integer', float: 'a number',
               str: 'a string'}


def _coerce(name, kind, value):
    """Value of a config field converted to its declared type."""
    if kind is bool:
        if not isinstance(value, (bool, np.bool_)):
            raise ConfigError(name, 'should be a boolean')
        return bool(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(name, 'should be a string')
        return value
    if isinstance(value, (bool, np.bool_)) or \
            not isinstance(value, numbers.Real):
        raise ConfigError(name, 'should be {}'.format(_KIND_NAMES[kind]))
    if kind is int:
        if not np.isfinite(value) or int(value) != value:
            raise ConfigError(name, 'should be an integer')
        return int(value)
    return float(value)


@dataclass(frozen=True)
class RunConfig:
    """
    Parameters of one run, every default materialized.

    Parameters
    ----------
    omega : int
        Basis truncation k + m + n <= omega, (def=9).
    Z : float
        Nuclear charge, (def=2).
    interaction : bool
        Include 1/r12, (def=True).
    alpha : float
        Nonlinear parameter of fixed-alpha runs, (def=1.8).
    alpha_min, alpha_max, alpha_step : float
        Stabilization grid, (def=0.2, 1.0, 0.002).
    energy_ceiling : float
        Eigenvalues kept below this energy, (def=-0.5).
    max_jump : float
        Largest energy step between adjacent grid points on one curve.
    rank_tolerance : float
        Relative overlap eigenvalue cutoff, (def=1e-12).
    precision : str
        'double' or 'extended' linear algebra, (def='double').
    integral_dps : int
        Decimal digits of the integral arithmetic, (def=40).
    l_max, r_max, radial_nodes, angular_nodes : int, float, int, int
        Partial-wave settings, (def=40, 40, 240, 2 l_max + 16).
    sum_rule_tolerance : float
        Accepted sum rule deficit, (def=1e-6).
    fit_windows : tuple
        Alpha windows (lo, hi) to fit when none is given on the command line.
    plateau_threshold, plateau_min_points : float, int
        Automatic plateau detection settings, (def=0.5, 8).
    mc_samples, mc_seed, mc_streams : int
        Monte Carlo oracle settings, (def=10^7, 20150306, 16).
    output_dir : str
        Directory receiving all outputs, (def='results').

    """

    omega: int = 9
    Z: float = 2.0
    interaction: bool = True
    alpha: float = 1.8
    alpha_min: float = 0.2
    alpha_max: float = 1.0
    alpha_step: float = 0.002
    energy_ceiling: float = -0.5
    max_jump: float = 0.25
    rank_tolerance: float = 1e-12
    precision: str = 'double'
    integral_dps: int = integrals.DEFAULT_DPS
    l_max: int = 40
    r_max: float = 40.0
    radial_nodes: int = 240
    angular_nodes: Optional[int] = None
    sum_rule_tolerance: float = 1e-6
    fit_windows: Tuple[Tuple[float, float], ...] = ()
    plateau_threshold: float = 0.5
    plateau_min_points: int = 8
    mc_samples: int = 10 ** 7
    mc_seed: int = 20150306
    mc_streams: int = 16
    output_dir: str = 'results'

    def __post_init__(self):
        for item in dataclasses.fields(self):
            if item.type in _KIND_NAMES:
                value = _coerce(item.name, item.type,
                                getattr(self, item.name))
                object.__setattr__(self, item.name, value)

        if self.angular_nodes is None:
            object.__setattr__(self, 'angular_nodes', 2 * self.l_max + 16)
        else:
            object.__setattr__(self, 'angular_nodes', _coerce(
                'angular_nodes', int, self.angular_nodes))

        try:
            windows = tuple((_coerce('fit_windows', float, lo),
                             _coerce('fit_windows', float, hi))
                            for lo, hi in self.fit_windows)
        except ConfigError:
            raise
        except (TypeError, ValueError):
            raise ConfigError('fit_windows',
                              'should be a list of (lo, hi) pairs')
        object.__setattr__(self, 'fit_windows', windows)
        self.validate()

    def validate(self):
        """Raise ConfigError naming the first invalid field."""
        def check(condition, name, message):
            if not condition:
                raise ConfigError(name, message)

        check(int(self.omega) == self.omega and self.omega >= 0, 'omega',
              'should be a non-negative integer')
        check(self.Z > 0, 'Z', 'should be positive')
        check(self.alpha > 0, 'alpha', 'should be positive')
        check(0 < self.alpha_min < self.alpha_max, 'alpha_min',
              'should satisfy 0 < alpha_min < alpha_max')
        check(self.alpha_step > 0, 'alpha_step', 'should be positive')
        check(self.alpha_step <= self.alpha_max - self.alpha_min,
              'alpha_step', 'exceeds the alpha range')
        check(self.max_jump > 0, 'max_jump', 'should be positive')
        check(0 < self.rank_tolerance < 1, 'rank_tolerance',
              'should lie in (0, 1)')
        check(self.precision in integrals.PRECISIONS, 'precision',
              'should be one of {}'.format(integrals.PRECISIONS))
        check(self.integral_dps >= 16, 'integral_dps', 'should be >= 16')
        check(self.l_max >= 0, 'l_max', 'should be non-negative')
        check(self.r_max > 0, 'r_max', 'should be positive')
        check(self.radial_nodes >= 1, 'radial_nodes', 'should be positive')
        check(self.angular_nodes >= self.l_max + 1, 'angular_nodes',
              'should be at least l_max + 1')
        check(self.sum_rule_tolerance > 0, 'sum_rule_tolerance',
              'should be positive')
        for lo, hi in self.fit_windows:
            check(self.alpha_min <= lo < hi <= self.alpha_max, 'fit_windows',
                  'window ({}, {}) outside the alpha range'.format(lo, hi))
        check(0 < self.plateau_threshold < 1, 'plateau_threshold',
              'should lie in (0, 1)')
        check(self.plateau_min_points >= 3, 'plateau_min_points',
              'should be at least 3')
        check(self.mc_samples >= oracle.MIN_SAMPLES, 'mc_samples',
              'should be at least {}'.format(oracle.MIN_SAMPLES))
        check(self.mc_streams >= 1, 'mc_streams', 'should be positive')

    def to_dict(self):
        """Plain dictionary with every field."""
        record = dataclasses.asdict(self)
        record['fit_windows'] = [list(window) for window in self.fit_windows]
        return record

    @classmethod
    def from_dict(cls, record):
        """Build from a dictionary; unknown keys are rejected."""
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(record) - names)
        if unknown:
            raise ConfigError(unknown[0], 'unknown configuration key')
        return cls(**record)

    def to_json(self):
        """Canonical JSON text."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text):
        """Inverse of to_json."""
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError('config', 'invalid JSON: {}'.format(exc))
        if not isinstance(record, dict):
            raise ConfigError('config', 'expected a key-value object')
        return cls.from_dict(record)

    def config_hash(self):
        """First 16 hex digits of the SHA-256 of the canonical JSON."""
        return hash_dict(self.to_dict())

    def path(self, filename):
        """Location of an output file."""
        return os.path.join(self.output_dir, filename)


@dataclass(frozen=True)
class StateReport:
    """
    Energy, resonance fit and entropies of one state.

    Parameters
    ----------
    label : str
        Name of the state, e.g. '2s2-1Se'.
    energy : float
        Eigenvalue at alpha.
    alpha : float
        Nonlinear parameter the state was computed at.
    curve_index : int
        Eigenvalue index of the state.
    entropy : EntropyResult
        Linear and von Neumann entropies.
    resonance : ResonanceFit, optional
        Fit that selected alpha; None for bound states.
    oracle : TraceEstimate, optional
        Independent purity estimate.
    provenance : dict
        Config hash and code version.

    """

    label: str
    energy: float
    alpha: float
    curve_index: int
    entropy: schmidt.EntropyResult
    resonance: Optional[stabilization.ResonanceFit] = None
    oracle: Optional[TraceEstimate] = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.provenance:
            raise ValueError('Report needs a provenance record.')

    def to_dict(self):
        """Structured record of the report."""
        return {'label': self.label, 'energy': self.energy,
                'alpha': self.alpha, 'curve_index': self.curve_index,
                'entropy': self.entropy.to_dict(),
                'resonance': None if self.resonance is None
                else self.resonance.to_dict(),
                'oracle': None if self.oracle is None
                else self.oracle.to_dict(),
                'provenance': self.provenance}


def _solve_state(config, alpha, index, interaction=None, label=''):
    """Assemble, solve and normalize the state on one eigenvalue index."""
    if interaction is None:
        interaction = config.interaction

    mp = integrals.assemble(config.omega, alpha, alpha, config.Z,
                            interaction, precision=config.precision,
                            dps=config.integral_dps)
    spectrum = eigensolver.solve(mp, config.rank_tolerance)
    if not 0 <= index < spectrum.energies.shape[0]:
        raise ValueError('Curve index {} exceeds the {} retained '
                         'eigenvalues.'.format(index,
                                               spectrum.energies.shape[0]))

    worst = float(np.max(eigensolver.residuals(mp, spectrum)))
    if worst > 1e-8:
        logger.warning('Largest eigenpair residual %.2e at alpha=%g', worst,
                       alpha)

    psi = eigensolver.state(mp, spectrum, index, label=label)
    return spectrum, psi


def _entropies(config, psi):
    """Schmidt-Slater spectrum and entropies with the configured grid."""
    return schmidt.schmidt_entropies(psi, config.l_max, config.r_max,
                                     config.radial_nodes,
                                     config.angular_nodes,
                                     config.sum_rule_tolerance)


def _lowest_energy(config, alpha):
    """Lowest eigenvalue at alpha = beta."""
    mp = integrals.assemble(config.omega, alpha, alpha, config.Z,
                            config.interaction, precision=config.precision,
                            dps=config.integral_dps)
    return float(eigensolver.solve(mp, config.rank_tolerance).energies[0])


def optimize_alpha(config):
    """Minimize the lowest eigenvalue over alpha in [0.1 Z, 2 Z]."""
    result = so.minimize_scalar(lambda alpha: _lowest_energy(config, alpha),
                                bounds=(0.1 * config.Z, 2 * config.Z),
                                method='bounded', options={'xatol': 1e-8})
    if not result.success:
        raise NumericalFailure('Alpha optimization failed: {}'.format(
            result.message))
    return float(result.x), float(result.fun)


def cmd_bound(config, optimize=False, with_entropy=True):
    """
    Ground state at fixed (or optimized) alpha.

    Parameters
    ----------
    config : RunConfig
        Run parameters; config.alpha is used unless optimize is set.
    optimize : bool
        Minimize the ground-state energy over alpha first, (def=False).
    with_entropy : bool
        Also compute the Schmidt-Slater entropies, (def=True).

    Returns
    -------
    dict
        Energy, alpha, rank diagnostics and (optionally) entropies.

    """
    alpha = config.alpha
    if optimize:
        alpha, _ = optimize_alpha(config)

    spectrum, psi = _solve_state(config, alpha, 0, label='ground')
    report = {'label': 'ground', 'energy': float(spectrum.energies[0]),
              'alpha': alpha, 'omega': config.omega,
              'interaction': config.interaction,
              'retained_rank': spectrum.retained_rank,
              'condition_estimate': spectrum.condition_estimate,
              'provenance': provenance(config.config_hash())}

    print('Ground-state energy = {:.10f} a.u. (omega={}, alpha={:.6f}, '
          'rank {}/{})'.format(report['energy'], config.omega, alpha,
                               spectrum.retained_rank,
                               spectrum.coefficients.shape[0]))

    if with_entropy:
        _, result = _entropies(config, psi)
        report['entropy'] = result.to_dict()
        print('S_L = {:.6f}, S_vN = {:.6f}'.format(result.s_linear,
                                                   result.s_vonneumann))

    write_json(config.path('bound.json'), report)
    return report


def cmd_scan(config):
    """
    Stabilization scan with plateau candidates.

    Writes scan.csv (alpha, E_0, ...) and plateaus.csv to the output
    directory. A scan interrupted by a numerical failure is still written,
    flagged partial, before the failure propagates.

    Returns
    -------
    dict
        Paths of the written files and the number of curves.

    """
    config_hash = config.config_hash()
    scan_path = config.path('scan.csv')

    try:
        result = stabilization.scan(
            config.omega, config.alpha_min, config.alpha_max,
            config.alpha_step, config.Z, config.energy_ceiling,
            config.max_jump, config.interaction, config.precision,
            config.integral_dps, config.rank_tolerance)
    except NumericalFailure as exc:
        if exc.partial is not None:
            status = 'partial failed_alpha={!r}'.format(exc.alpha)
            exc.partial.to_csv(scan_path, config_hash, status=status)
            logger.error('Partial scan written to %s', scan_path)
        raise

    result.to_csv(scan_path, config_hash)

    # Plateau candidates of every curve
    plateaus = stabilization.plateau_candidates(
        result, config.plateau_threshold, config.plateau_min_points)
    rows = [(p.curve_index, p.window[0], p.window[1], p.energy, p.num_points)
            for p in plateaus]
    plateau_path = write_csv(config.path('plateaus.csv'),
                             ['curve_index', 'alpha_lo', 'alpha_hi', 'energy',
                              'num_points'], rows, config_hash=config_hash)

    print('Scanned {} alpha points, {} curves, {} plateau candidates'.format(
        result.alphas.shape[0], result.num_curves, len(plateaus)))

    return {'scan': scan_path, 'plateaus': plateau_path,
            'num_curves': result.num_curves}


def _fit_window(scan_result, window, curve_index=None):
    """Fit one curve, or every fittable curve, in an alpha window."""
    curves = range(scan_result.num_curves) if curve_index is None \
        else [curve_index]

    fits, densities = [], {}
    for n in curves:
        try:
            dc = stabilization.density_of_states(scan_result, n, window)
            fit = stabilization.fit_lorentzian(dc)
        except (ValueError, FitError) as exc:
            if curve_index is not None:
                raise
            logger.debug('Curve %d not fittable in %s: %s', n, window, exc)
            continue
        fits.append(fit)
        densities[(fit.curve_index, fit.window)] = dc

    return fits, densities


def cmd_fit(config, scan_file=None, window=None, curve_index=None,
            energy=None, tolerance=0.01, label=''):
    """
    Density of states and Lorentzian fit of one resonance.

    The window comes from the arguments, from config.fit_windows, or, when
    an energy is given, from automatic plateau detection. Of all fits the
    best one is kept and written as fit.json together with density.csv.

    Returns
    -------
    dict
        The fit record as written.

    """
    if scan_file is None:
        scan_file = config.path('scan.csv')
    if not os.path.exists(scan_file):
        raise ValueError('Scan file {} does not exist.'.format(scan_file))

    scan_result = stabilization.StabilizationScan.from_csv(
        scan_file, config.omega, config.Z, config.energy_ceiling)

    if energy is not None and window is None:
        best, fits = stabilization.resolve_resonance(
            scan_result, energy, tolerance, config.plateau_threshold,
            config.plateau_min_points)
        dc = stabilization.density_of_states(scan_result, best.curve_index,
                                             best.window)
    else:
        windows = [window] if window is not None else config.fit_windows
        if not windows:
            raise ValueError('No fit window given.')

        fits, densities = [], {}
        for w in windows:
            found, dens = _fit_window(scan_result, tuple(w), curve_index)
            fits.extend(found)
            densities.update(dens)
        if energy is not None:
            fits = [fit for fit in fits if abs(fit.E_r - energy) <= tolerance]
        if not fits:
            raise FitError('No curve could be fitted in the given windows.')

        best = stabilization.select_best_plateau(fits)
        dc = densities[(best.curve_index, best.window)]

    config_hash = config.config_hash()
    dc.to_csv(config.path('density.csv'), config_hash)

    record = best.to_dict()
    record['label'] = label
    record['alpha_star'] = stabilization.alpha_star(scan_result, best)
    record['candidates'] = len(fits)
    record['provenance'] = provenance(config_hash)
    write_json(config.path('fit.json'), record)

    print('E_r = {:.7f} a.u., Gamma = {:.6f} a.u., r^2 = {:.7f} (curve {}, '
          'alpha* = {:.4f})'.format(best.E_r, best.Gamma, best.r_squared,
                                    best.curve_index, record['alpha_star']))
    return record


def _resolve_target(config, alpha_star, curve_index, fit_file):
    """Alpha, curve index and fit of the state to analyze."""
    fit = None
    if fit_file is not None:
        record = read_json(fit_file)
        fit = stabilization.ResonanceFit.from_dict(record)
        if alpha_star is None:
            alpha_star = record['alpha_star']
        if curve_index is None:
            curve_index = fit.curve_index

    # Explicit and fitted alpha* come from a scan; only the fallback
    # config.alpha may lie outside the scanned range
    scanned = alpha_star is not None
    if alpha_star is None:
        alpha_star = config.alpha
    if curve_index is None:
        curve_index = 0
    if not alpha_star > 0:
        raise ValueError('alpha* should be positive.')
    if scanned and not config.alpha_min <= alpha_star <= config.alpha_max:
        raise ValueError('alpha*={} lies outside the scanned range.'.format(
            alpha_star))

    return float(alpha_star), int(curve_index), fit


def cmd_entropy(config, alpha_star=None, curve_index=None, fit_file=None,
                label='', with_oracle=False):
    """
    Entanglement of the state on one curve at alpha*.

    Re-solves at alpha*, normalizes the eigenvector of the given curve,
    decomposes it and writes entropy.json and spectrum.csv.

    Returns
    -------
    StateReport
        Energy, resonance fit (if given), entropies and optional oracle.

    """
    alpha_star, curve_index, fit = _resolve_target(config, alpha_star,
                                                   curve_index, fit_file)

    spectrum, psi = _solve_state(config, alpha_star, curve_index, label=label)
    decomp, result = _entropies(config, psi)

    estimate = None
    if with_oracle:
        estimate = oracle.trace_rho_squared_mc(psi, config.mc_samples,
                                               config.mc_seed,
                                               config.mc_streams)

    config_hash = config.config_hash()
    report = StateReport(label, float(spectrum.energies[curve_index]),
                         alpha_star, curve_index, result, fit, estimate,
                         provenance(config_hash))

    decomp.to_csv(config.path('spectrum.csv'), config_hash,
                floor=schmidt.OCCUPATION_FLOOR)
    write_json(config.path('entropy.json'), report.to_dict())

    print('{} E = {:.7f} a.u. at alpha = {:.4f}: S_L = {:.6f}, S_vN = {:.6f}'
          .format(label or 'State', report.energy, alpha_star,
                  result.s_linear, result.s_vonneumann))
    if estimate is not None:
        print('Monte Carlo S_L = {:.6f} +- {:.6f}'.format(
            estimate.s_linear, estimate.standard_error))

    return report


def cmd_check(config, alpha_star=None, curve_index=None, fit_file=None,
              max_sigmas=3.):
    """
    Compare the Schmidt-Slater linear entropy with the Monte Carlo oracle.

    Writes check.json; raises NumericalFailure when the two disagree by more
    than max_sigmas standard errors.

    Returns
    -------
    dict
        Both linear entropies, the partial-wave purity and the discrepancy.

    """
    alpha_star, curve_index, _ = _resolve_target(config, alpha_star,
                                                 curve_index, fit_file)

    _, psi = _solve_state(config, alpha_star, curve_index)
    decomp, result = _entropies(config, psi)

    quadrature = oracle.trace_rho_squared_pw(decomp)
    estimate = oracle.trace_rho_squared_mc(psi, config.mc_samples,
                                           config.mc_seed, config.mc_streams)
    difference, sigmas = oracle.compare(result.s_linear, estimate)

    record = {'alpha': alpha_star, 'curve_index': curve_index,
              's_linear_schmidt': result.s_linear,
              's_linear_quadrature': quadrature.s_linear,
              'monte_carlo': estimate.to_dict(),
              'difference': difference, 'sigmas': sigmas,
              'provenance': provenance(config.config_hash())}
    write_json(config.path('check.json'), record)

    print('S_L Schmidt = {:.6f}, Monte Carlo = {:.6f} +- {:.6f} ({:.2f} '
          'sigma)'.format(result.s_linear, estimate.s_linear,
                          estimate.standard_error, sigmas))

    if sigmas > max_sigmas:
        raise NumericalFailure('Schmidt and Monte Carlo linear entropies '
                               'differ by {:.2f} standard errors.'.format(
                                   sigmas))
    return record


# Command-line flags mirroring RunConfig fields
_FLAGS = [('--omega', int), ('--Z', float), ('--alpha', float),
          ('--alpha-min', float), ('--alpha-max', float),
          ('--alpha-step', float), ('--energy-ceiling', float),
          ('--max-jump', float), ('--rank-tolerance', float),
          ('--integral-dps', int), ('--l-max', int), ('--r-max', float),
          ('--radial-nodes', int), ('--angular-nodes', int),
          ('--sum-rule-tolerance', float), ('--plateau-threshold', float),
          ('--plateau-min-points', int), ('--mc-samples', int),
          ('--mc-seed', int), ('--mc-streams', int), ('--output-dir', str)]


def build_parser():
    """Argument parser with one subparser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON file with RunConfig fields')
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='more logging (repeatable)')
    for flag, kind in _FLAGS:
        common.add_argument(flag, type=kind, default=None)
    common.add_argument('--precision', choices=integrals.PRECISIONS,
                        default=None)
    common.add_argument('--no-interaction', dest='interaction',
                        action='store_false', default=None,
                        help='switch off the electron-electron repulsion')
    common.add_argument('--window', nargs=2, type=float, action='append',
                        metavar=('LO', 'HI'), default=None,
                        help='alpha window to fit (repeatable)')

    parser = argparse.ArgumentParser(
        prog='heentangle', description='Resonances and spatial entanglement '
        'of two-electron atoms.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    commands = parser.add_subparsers(dest='command', required=True)

    bound = commands.add_parser('bound', parents=[common],
                                help='ground state at fixed alpha')
    bound.add_argument('--optimize-alpha', action='store_true')
    bound.add_argument('--no-entropy', action='store_true')

    commands.add_parser('scan', parents=[common],
                        help='stabilization scan over alpha')

    fit = commands.add_parser('fit', parents=[common],
                              help='Lorentzian fit of a plateau')
    fit.add_argument('scan_file', nargs='?', default=None)
    fit.add_argument('--curve', type=int, default=None)
    fit.add_argument('--energy', type=float, default=None)
    fit.add_argument('--tolerance', type=float, default=0.01)
    fit.add_argument('--label', default='')

    for name, text in (('entropy', 'entanglement entropies of one state'),
                       ('check', 'Monte Carlo check of the linear entropy')):
        sub = commands.add_parser(name, parents=[common], help=text)
        sub.add_argument('--alpha-star', type=float, default=None)
        sub.add_argument('--curve', type=int, default=None)
        sub.add_argument('--fit', dest='fit_file', default=None)
        if name == 'entropy':
            sub.add_argument('--label', default='')
            sub.add_argument('--oracle', action='store_true')

    return parser


def config_from_args(args):
    """RunConfig from an optional JSON file overridden by explicit flags."""
    record = {}
    if args.config:
        try:
            with open(args.config, 'r') as handle:
                record = json.load(handle)
        except OSError as exc:
            raise ConfigError('config', str(exc))
        except json.JSONDecodeError as exc:
            raise ConfigError('config', 'invalid JSON: {}'.format(exc))
        if not isinstance(record, dict):
            raise ConfigError('config', 'expected a key-value object')

    overrides = {name: getattr(args, name)
                 for name in [flag[2:].replace('-', '_') for flag, _ in _FLAGS]
                 + ['precision', 'interaction']}
    if args.window is not None:
        overrides['fit_windows'] = [tuple(w) for w in args.window]
    record.update({key: value for key, value in overrides.items()
                   if value is not None})

    return RunConfig.from_dict(record)


def main(argv=None):
    """Entry point of the heentangle command; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(level=max(logging.WARNING - 10 * args.verbose,
                                  logging.DEBUG),
                        format='%(asctime)s %(name)s %(levelname)s '
                        '%(message)s')

    try:
        config = config_from_args(args)

        if args.command == 'bound':
            cmd_bound(config, optimize=args.optimize_alpha,
                      with_entropy=not args.no_entropy)
        elif args.command == 'scan':
            cmd_scan(config)
        elif args.command == 'fit':
            # Windows arrive through config.fit_windows
            cmd_fit(config, args.scan_file, None, args.curve, args.energy,
                    args.tolerance, args.label)
        elif args.command == 'entropy':
            cmd_entropy(config, args.alpha_star, args.curve, args.fit_file,
                        args.label, args.oracle)
        elif args.command == 'check':
            cmd_check(config, args.alpha_star, args.curve, args.fit_file)

    except ValueError as exc:
        print('heentangle: error: {}'.format(exc), file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        print('heentangle: numerical failure: {}'.format(exc),
              file=sys.stderr)
        return EXIT_NUMERICAL

    return EXIT_OK
