"""
Partial-wave Schmidt-Slater decomposition and entanglement entropies.

A normalized S-state is expanded as

    Psi(r1, r2, r12) = sum_l f_l(r1, r2) / (r1 r2) P_l(cos theta12),

and every kernel f_l is diagonalized on a radial quadrature grid. With
f_l(r1, r2) = sum_n lambda_nl u_nl(r1) u_nl(r2) the one-particle occupation
numbers are Lambda_nl = (4 pi lambda_nl / (2l + 1))^2, each (2l+1)-fold
degenerate, so that sum_nl (2l+1) Lambda_nl = 1 for a unit-norm state.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sl
from joblib import Parallel, delayed
from numpy.polynomial.legendre import leggauss, legvander, legval

from heentangle.basis import evaluate
from heentangle.util import SumRuleError, num_threads, write_csv

logger = logging.getLogger(__name__)

# Defaults of the partial-wave machinery
L_MAX = 40
R_MAX = 40.0
RADIAL_NODES = 240
OCCUPATION_FLOOR = 1e-16
SUM_RULE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class RadialGrid:
    """
    Gauss-Legendre quadrature on [0, r_max].

    Parameters
    ----------
    nodes : array
        Quadrature nodes (a.u.).
    weights : array
        Quadrature weights.
    r_max : float
        Outer radius (a.u.).
    r_mid : float
        Radius separating the inner and outer segments, 0 if unsplit.

    """

    nodes: np.ndarray
    weights: np.ndarray
    r_max: float
    r_mid: float = 0.

    @property
    def count(self):
        """Number of nodes."""
        return self.nodes.shape[0]


def _mapped_leggauss(count, lo, hi):
    """Gauss-Legendre nodes and weights mapped from [-1, 1] to [lo, hi]."""
    y, w = leggauss(count)
    return 0.5 * (y + 1) * (hi - lo) + lo, (hi - lo) / 2 * w


def radial_grid(r_max=R_MAX, count=RADIAL_NODES, r_mid=0., inner_count=0):
    """
    Gauss-Legendre radial mesh, optionally split into two segments.

    Parameters
    ----------
    r_max : float
        Outer radius (a.u.), (def=40).
    count : int
        Total number of nodes, (def=240).
    r_mid : float
        Split point; nodes are distributed over [0, r_mid] and
        [r_mid, r_max] separately, (def=0, no split).
    inner_count : int
        Number of nodes in [0, r_mid] when split.

    Returns
    -------
    RadialGrid
        Nodes ascending, all weights positive.

    """
    # Checks on parameters
    if not r_max > 0:
        raise ValueError('r_max should be positive.')
    if int(count) != count or count < 1:
        raise ValueError('Node count should be a positive integer.')

    if r_mid == 0 and inner_count == 0:
        nodes, weights = _mapped_leggauss(int(count), 0., r_max)
    else:
        if not 0 < r_mid < r_max:
            raise ValueError('Split point should satisfy 0 < r_mid < r_max.')
        if not 0 < inner_count < count:
            raise ValueError('Inner node count should lie in (0, count).')

        # Connect inner and outer meshes
        x1, w1 = _mapped_leggauss(int(inner_count), 0., r_mid)
        x2, w2 = _mapped_leggauss(int(count - inner_count), r_mid, r_max)
        nodes = np.concatenate((x1, x2))
        weights = np.concatenate((w1, w2))

    return RadialGrid(nodes, weights, float(r_max), float(r_mid))


def partial_wave_kernels(psi, grid, l_max=L_MAX, angular_nodes=None):
    """
    Legendre components of a wavefunction on a radial grid.

    f_l(r_i, r_j) = (2l+1)/2 r_i r_j int_{-1}^{1} Psi(r_i, r_j, r12(x))
    P_l(x) dx, with r12(x)^2 = r_i^2 + r_j^2 - 2 r_i r_j x and the x integral
    done by Gauss-Legendre quadrature.

    Parameters
    ----------
    psi : HylleraasWavefunction
        Normalized state.
    grid : RadialGrid
        Radial nodes.
    l_max : int
        Largest partial wave, (def=40).
    angular_nodes : int
        Number of quadrature nodes in x, (def=2 l_max + 16).

    Returns
    -------
    array
        Kernels, (l_max + 1) by grid.count by grid.count, each symmetric.

    """
    # Check whether the state can be decomposed
    if not psi.normalized:
        raise ValueError('Wavefunction should be normalized.')
    if int(l_max) != l_max or l_max < 0:
        raise ValueError('l_max should be a non-negative integer.')
    if angular_nodes is None:
        angular_nodes = 2 * int(l_max) + 16
    if angular_nodes < l_max + 1:
        raise ValueError('Need at least l_max + 1 angular nodes.')

    x, wx = leggauss(int(angular_nodes))
    legendre = legvander(x, int(l_max))

    r1 = grid.nodes[:, None]
    r2 = grid.nodes[None, :]

    # Wavefunction on every (r_i, r_j, x) triple
    values = np.empty((x.shape[0], grid.count, grid.count))
    for a in range(x.shape[0]):
        r12 = np.sqrt(np.maximum(r1 ** 2 + r2 ** 2 - 2 * r1 * r2 * x[a], 0.))
        values[a] = evaluate(psi, r1, r2, r12, check=False)

    # Project on P_l
    projection = np.tensordot(wx[:, None] * legendre, values, axes=(0, 0))
    scale = (2 * np.arange(l_max + 1) + 1) / 2
    kernels = scale[:, None, None] * (r1 * r2)[None] * projection

    # Exchange symmetry of the kernels
    kernels = (kernels + np.transpose(kernels, (0, 2, 1))) / 2

    logger.debug('Kernels for l <= %d on %d radial and %d angular nodes',
                 l_max, grid.count, angular_nodes)
    return kernels


def reconstruct(kernels, grid, i, j, x):
    """
    Partial-wave sum sum_l f_l(r_i, r_j) P_l(x) / (r_i r_j).

    Parameters
    ----------
    kernels : array
        Output of partial_wave_kernels.
    grid : RadialGrid
        Grid the kernels live on.
    i, j : int
        Radial node indices.
    x : float or array
        Cosine of the interelectronic angle.

    Returns
    -------
    float or array
        Approximation of Psi at (r_i, r_j, x).

    """
    r1, r2 = grid.nodes[i], grid.nodes[j]
    return legval(x, kernels[:, i, j]) / (r1 * r2)


@dataclass(frozen=True)
class SchmidtSpectrum:
    """
    Schmidt-Slater spectrum of one state.

    Parameters
    ----------
    eigenvalues : array
        Signed lambda_nl, (l_max + 1) by grid.count, each row ordered by
        decreasing magnitude.
    occupations : array
        Lambda_nl = (4 pi lambda_nl / (2l+1))^2 aligned with eigenvalues.
    grid : RadialGrid
        Radial grid of the discretization.
    orbitals : array, optional
        Radial orbitals u_nl at the grid nodes, (l_max + 1) by nodes by n.
    weighted_kernels : array, optional
        Symmetrized kernels sqrt(w_i) f_l(r_i, r_j) sqrt(w_j).

    """

    eigenvalues: np.ndarray
    occupations: np.ndarray
    grid: RadialGrid
    orbitals: Optional[np.ndarray] = None
    weighted_kernels: Optional[np.ndarray] = None

    @property
    def l_max(self):
        """Largest partial wave."""
        return self.eigenvalues.shape[0] - 1

    @property
    def degeneracy(self):
        """Multiplicity 2l + 1 of every partial wave."""
        return 2 * np.arange(self.l_max + 1) + 1

    def sum_rule(self):
        """sum_nl (2l+1) Lambda_nl."""
        return float(np.sum(self.degeneracy[:, None] * self.occupations))

    def to_csv(self, path, config_hash='', floor=0.):
        """Write l,n,lambda,occupation for occupations above floor."""
        rows = []
        for l in range(self.l_max + 1):
            for n in range(self.eigenvalues.shape[1]):
                if self.occupations[l, n] > floor:
                    rows.append((l, n, self.eigenvalues[l, n],
                                 self.occupations[l, n]))
        return write_csv(path, ['l', 'n', 'lambda', 'occupation'], rows,
                         config_hash=config_hash)


def _diagonalize(weighted):
    """Eigenpairs of one symmetric matrix, largest magnitude first."""
    values, vectors = sl.eigh(weighted)
    order = np.argsort(-np.abs(values), kind='stable')
    return values[order], vectors[:, order]


def decompose(kernels, grid, retain_kernels=True, n_jobs=None):
    """
    Schmidt-Slater decomposition of partial-wave kernels.

    The integral equation int f_l(r1, r2) u(r2) dr2 = lambda u(r1) is
    discretized with the grid weights and symmetrized by the sqrt(w)
    similarity transform, so each l is a symmetric eigenproblem.

    Parameters
    ----------
    kernels : array
        Symmetric kernels, (l_max + 1) by grid.count by grid.count.
    grid : RadialGrid
        Radial quadrature.
    retain_kernels : bool
        Keep the symmetrized kernels and orbitals in the result, (def=True).
    n_jobs : int
        Number of parallel workers over l, (def=HE_ENTANGLE_THREADS or all).

    Returns
    -------
    SchmidtSpectrum
        Eigenvalues and occupations for every l.

    """
    kernels = np.asarray(kernels, dtype='float64')

    # Checks on shapes
    if kernels.ndim != 3 or kernels.shape[1:] != (grid.count, grid.count):
        raise ValueError('Kernels should be (l_max + 1) x nodes x nodes.')
    if n_jobs is None:
        n_jobs = num_threads()

    root = np.sqrt(grid.weights)
    weighted = root[None, :, None] * kernels * root[None, None, :]

    results = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(_diagonalize)(weighted[l]) for l in range(kernels.shape[0]))

    eigenvalues = np.array([values for values, _ in results])
    degeneracy = 2 * np.arange(kernels.shape[0]) + 1
    occupations = (4 * np.pi * eigenvalues / degeneracy[:, None]) ** 2

    orbitals = None
    if retain_kernels:
        # u(r_i) = v_i / sqrt(w_i), orthonormal under the grid weights
        orbitals = np.array([vectors for _, vectors in results]) / \
            root[None, :, None]
    else:
        weighted = None

    return SchmidtSpectrum(eigenvalues, occupations, grid, orbitals, weighted)


@dataclass(frozen=True)
class EntropyResult:
    """
    Linear and von Neumann entropies of one Schmidt-Slater spectrum.

    Parameters
    ----------
    s_linear : float
        1 - sum (2l+1) Lambda^2.
    s_vonneumann : float
        -sum (2l+1) Lambda log2 Lambda (bits).
    l_max_used : int
        Largest partial wave included.
    sum_rule_deficit : float
        1 - sum (2l+1) Lambda.
    per_l_vonneumann : array
        Contribution of each l to s_vonneumann.
    per_l_linear : array
        Contribution of each l to the purity sum (2l+1) Lambda^2.
    tail : float
        von Neumann contribution of the two largest l.

    """

    s_linear: float
    s_vonneumann: float
    l_max_used: int
    sum_rule_deficit: float
    per_l_vonneumann: np.ndarray
    per_l_linear: np.ndarray
    tail: float

    def to_dict(self):
        """Structured record of the entropies."""
        return {'s_linear': self.s_linear,
                's_vonneumann': self.s_vonneumann,
                'l_max': self.l_max_used,
                'sum_rule_deficit': self.sum_rule_deficit,
                'tail': self.tail,
                'per_l_vonneumann': self.per_l_vonneumann}


def entropies(decomp, floor=OCCUPATION_FLOOR, tolerance=SUM_RULE_TOLERANCE):
    """
    Linear and von Neumann entropy of a Schmidt-Slater spectrum.

    Parameters
    ----------
    decomp : SchmidtSpectrum
        Occupations per partial wave.
    floor : float
        Occupations below this contribute nothing to the logarithm,
        (def=1e-16).
    tolerance : float
        Largest accepted |1 - sum (2l+1) Lambda|, (def=1e-6).

    Returns
    -------
    EntropyResult
        Entropies with truncation diagnostics.

    """
    occupations = np.asarray(decomp.occupations)
    degeneracy = 2 * np.arange(occupations.shape[0]) + 1

    # Sum rule
    deficit = 1. - float(np.sum(degeneracy[:, None] * occupations))
    if abs(deficit) > tolerance:
        raise SumRuleError(deficit, tolerance)

    # Linear entropy
    per_l_linear = degeneracy * np.sum(occupations ** 2, axis=1)
    s_linear = 1. - float(np.sum(per_l_linear))

    # von Neumann entropy in bits
    kept = np.where(occupations > floor, occupations, 1.)
    terms = np.where(occupations > floor, -occupations * np.log2(kept), 0.)
    per_l_vonneumann = degeneracy * np.sum(terms, axis=1)
    s_vonneumann = float(np.sum(per_l_vonneumann))

    # Renyi-2 lower bound on the von Neumann entropy
    if s_linear < 1 and s_vonneumann < -np.log2(1 - s_linear) - 1e-10:
        logger.warning('von Neumann entropy %.6g below the Renyi-2 bound '
                       '%.6g', s_vonneumann, -np.log2(1 - s_linear))

    tail = float(np.sum(per_l_vonneumann[-2:]))
    if tail > 1e-6:
        logger.warning('Largest partial waves carry %.3g bits; raise l_max',
                       tail)

    return EntropyResult(s_linear, s_vonneumann, occupations.shape[0] - 1,
                         deficit, per_l_vonneumann, per_l_linear, tail)


def schmidt_entropies(psi, l_max=L_MAX, r_max=R_MAX, radial_nodes=RADIAL_NODES,
                      angular_nodes=None, tolerance=SUM_RULE_TOLERANCE):
    """
    Kernels, decomposition and entropies of a normalized state in one call.

    Returns
    -------
    decomp : SchmidtSpectrum
        Retained spectrum, kernels included.
    result : EntropyResult
        Entropies of the spectrum.

    """
    grid = radial_grid(r_max, radial_nodes)
    kernels = partial_wave_kernels(psi, grid, l_max, angular_nodes)
    decomp = decompose(kernels, grid)
    result = entropies(decomp, tolerance=tolerance)

    logger.info('S_L=%.6f S_vN=%.6f (deficit %.2e, l_max=%d)',
                result.s_linear, result.s_vonneumann, result.sum_rule_deficit,
                result.l_max_used)
    return decomp, result
