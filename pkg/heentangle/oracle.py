"""
Independent estimates of the purity Tr rho_red^2 of the reduced density.

For a real normalized two-electron state

    Tr rho_red^2 = int Psi(1,3) Psi(2,3) Psi(2,4) Psi(1,4) d1 d2 d3 d4,

which is estimated here by importance-sampled Monte Carlo and, separately,
from the partial-wave kernels without diagonalizing them.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.stats as st
from joblib import Parallel, delayed

from heentangle.basis import evaluate
from heentangle.util import num_threads

logger = logging.getLogger(__name__)

METHODS = ('monte_carlo', 'partial_wave_quadrature')

MIN_SAMPLES = 10 ** 4
BATCH_SIZE = 2 ** 16


@dataclass(frozen=True)
class TraceEstimate:
    """
    Estimate of Tr rho_red^2.

    Parameters
    ----------
    value : float
        Estimated purity, in (0, 1].
    standard_error : float
        Statistical standard error; zero for quadrature.
    samples_or_nodes : int
        Monte Carlo samples or radial quadrature nodes used.
    method : str
        'monte_carlo' or 'partial_wave_quadrature'.
    seed : int, optional
        Seed of the Monte Carlo run.

    """

    value: float
    standard_error: float
    samples_or_nodes: int
    method: str
    seed: Optional[int] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError('Unknown method {!r}.'.format(self.method))
        if not self.value > 0:
            raise ValueError('Purity estimate should be positive, got '
                             '{}.'.format(self.value))
        if self.standard_error < 0:
            raise ValueError('Standard error should be non-negative.')
        if self.value - 3 * self.standard_error > 1:
            logger.warning('Purity %.6g exceeds one by more than 3 standard '
                           'errors', self.value)

    @property
    def s_linear(self):
        """Linear entropy 1 - Tr rho_red^2."""
        return 1. - self.value

    def to_dict(self):
        """Structured record of the estimate."""
        return {'value': self.value, 'standard_error': self.standard_error,
                'samples': self.samples_or_nodes, 'seed': self.seed,
                'method': self.method}


def _sample_points(rng, count, rate):
    """Points with |r| ~ Gamma(3, rate) and uniform direction."""
    radius = st.gamma.rvs(3., scale=1. / rate, size=count, random_state=rng)
    direction = rng.standard_normal((count, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return radius[:, None] * direction, radius


def _log_proposal(radius, rate):
    """Log proposal density per unit volume, rate^3 e^{-rate r} / 8pi."""
    return st.gamma.logpdf(radius, 3., scale=1. / rate) - \
        np.log(4 * np.pi * radius ** 2)


def _pair(psi, a, b, ra, rb):
    """Psi at the configuration (electron at a, electron at b)."""
    rab = np.linalg.norm(a - b, axis=1)
    return evaluate(psi, ra, rb, rab, check=False)


def _merge(first, second):
    """Combine (count, mean, m2) accumulators of disjoint sample sets."""
    n1, mean1, m21 = first
    n2, mean2, m22 = second
    if n1 == 0:
        return second
    count = n1 + n2
    delta = mean2 - mean1
    mean = mean1 + delta * n2 / count
    return count, mean, m21 + m22 + delta ** 2 * n1 * n2 / count


def _stream(psi, count, seed_seq, rate):
    """Accumulate the weighted integrand over one independent sub-stream."""
    rng = np.random.default_rng(seed_seq)
    accumulator = (0, 0., 0.)

    remaining = count
    while remaining > 0:
        batch = min(remaining, BATCH_SIZE)
        remaining -= batch

        # Four independent electron positions
        points = [_sample_points(rng, batch, rate) for _ in range(4)]
        (x1, r1), (x2, r2), (x3, r3), (x4, r4) = points

        integrand = (_pair(psi, x1, x3, r1, r3) * _pair(psi, x2, x3, r2, r3) *
                     _pair(psi, x2, x4, r2, r4) * _pair(psi, x1, x4, r1, r4))
        log_q = sum(_log_proposal(r, rate) for r in (r1, r2, r3, r4))
        values = integrand * np.exp(-log_q)

        mean = float(np.mean(values))
        m2 = float(np.sum((values - mean) ** 2))
        accumulator = _merge(accumulator, (batch, mean, m2))

    return accumulator


def trace_rho_squared_mc(psi, samples=10 ** 7, seed=20150306, streams=16,
                         proposal_rate=None, n_jobs=None):
    """
    Importance-sampled Monte Carlo estimate of Tr rho_red^2.

    Electron positions are drawn independently with radial density
    Gamma(3, rate) and uniform direction, i.e. rate^3 exp(-rate r) / (8 pi)
    per unit volume. The sample budget is split over sub-streams seeded by
    spawning numpy.random.SeedSequence(seed), and the sub-stream results are
    merged in stream order, so the estimate depends on seed, samples and
    streams only.

    Parameters
    ----------
    psi : HylleraasWavefunction
        Normalized state.
    samples : int
        Total number of samples, at least 10^4, (def=10^7).
    seed : int
        Seed of the root sequence, (def=20150306).
    streams : int
        Number of independent sub-streams, (def=16).
    proposal_rate : float
        Exponential rate of the proposal, (def=psi.alpha).
    n_jobs : int
        Number of parallel workers, (def=HE_ENTANGLE_THREADS or all cores).

    Returns
    -------
    TraceEstimate
        Mean and standard error of the estimator.

    """
    # Checks on inputs
    if not psi.normalized:
        raise ValueError('Wavefunction should be normalized.')
    if samples < MIN_SAMPLES:
        raise ValueError('Need at least {} samples.'.format(MIN_SAMPLES))
    if int(streams) != streams or streams < 1:
        raise ValueError('Number of streams should be a positive integer.')
    if proposal_rate is None:
        proposal_rate = psi.alpha
    if not proposal_rate > 0:
        raise ValueError('Proposal rate should be positive.')
    if n_jobs is None:
        n_jobs = num_threads()

    samples, streams = int(samples), int(streams)
    counts = [samples // streams + (i < samples % streams)
              for i in range(streams)]
    children = np.random.SeedSequence(seed).spawn(streams)

    logger.info('Monte Carlo purity: %d samples over %d streams', samples,
                streams)

    partials = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(_stream)(psi, count, child, proposal_rate)
        for count, child in zip(counts, children))

    # Reduce in stream order
    accumulator = (0, 0., 0.)
    for partial in partials:
        accumulator = _merge(accumulator, partial)
    count, mean, m2 = accumulator

    standard_error = float(np.sqrt(m2 / (count - 1) / count))
    return TraceEstimate(float(mean), standard_error, count, 'monte_carlo',
                         seed)


def trace_rho_squared_pw(decomp):
    """
    Purity from the partial-wave kernels without diagonalization.

    With A_l = sqrt(w) f_l sqrt(w), sum_n lambda_nl^4 = ||A_l A_l||_F^2, so

        Tr rho_red^2 = sum_l (4 pi)^4 / (2l+1)^3 ||A_l A_l||_F^2.

    Parameters
    ----------
    decomp : SchmidtSpectrum
        Spectrum computed with retain_kernels=True.

    Returns
    -------
    TraceEstimate
        Quadrature value with zero standard error.

    """
    if decomp.weighted_kernels is None:
        raise ValueError('Spectrum was computed without retaining kernels.')

    kernels = decomp.weighted_kernels
    degeneracy = 2 * np.arange(kernels.shape[0]) + 1

    squared = np.matmul(kernels, kernels)
    norms = np.sum(squared ** 2, axis=(1, 2))
    value = float(np.sum((4 * np.pi) ** 4 / degeneracy ** 3 * norms))

    return TraceEstimate(value, 0., decomp.grid.count,
                         'partial_wave_quadrature')


def compare(s_linear, estimate):
    """
    Discrepancy between a linear entropy and a purity estimate.

    Parameters
    ----------
    s_linear : float
        Linear entropy from the Schmidt-Slater spectrum.
    estimate : TraceEstimate
        Independent purity estimate.

    Returns
    -------
    difference : float
        (1 - estimate.value) - s_linear.
    sigmas : float
        |difference| in units of the standard error (inf if the error is
        zero and the difference is not).

    """
    difference = estimate.s_linear - s_linear
    if estimate.standard_error > 0:
        sigmas = abs(difference) / estimate.standard_error
    else:
        sigmas = 0. if difference == 0 else float('inf')
    return difference, sigmas
