"""Generalized symmetric eigenproblem H c = E S c for Hylleraas bases."""
import logging
from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.linalg as sl

from heentangle.basis import HylleraasWavefunction
from heentangle.util import NumericalFailure

logger = logging.getLogger(__name__)

# Relative cutoff on the eigenvalues of the equilibrated overlap matrix
DEFAULT_RANK_TOLERANCE = 1e-12

# Relative asymmetry accepted in S and H
SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SpectrumResult:
    """
    Eigenpairs of one (H, S) pair.

    Parameters
    ----------
    energies : array
        Ascending eigenvalues (hartree).
    coefficients : array
        Eigenvectors as columns, S-orthonormal.
    retained_rank : int
        Dimension of the subspace kept after overlap filtering.
    condition_estimate : float
        Ratio of largest to smallest retained overlap eigenvalue of the
        equilibrated S.
    rank_tolerance : float
        Relative cutoff used for the filtering.
    smallest_overlap_eigenvalue : float
        Smallest eigenvalue of the equilibrated S, discarded or not.

    """

    energies: np.ndarray
    coefficients: np.ndarray
    retained_rank: int
    condition_estimate: float
    rank_tolerance: float
    smallest_overlap_eigenvalue: float

    @property
    def discarded(self):
        """Number of filtered overlap directions."""
        return self.coefficients.shape[0] - self.retained_rank


def _check_symmetric(matrix, name):
    """Reject non-square or non-symmetric matrices."""
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError('{} should be a square matrix.'.format(name))

    scale = np.max(np.abs(matrix))
    if scale > 0 and np.max(np.abs(matrix - matrix.T)) > \
            SYMMETRY_TOLERANCE * scale:
        raise ValueError('{} is not symmetric.'.format(name))


def solve(mp, rank_tolerance=DEFAULT_RANK_TOLERANCE):
    """
    Solve H c = E S c by canonical orthogonalization.

    S is first equilibrated to unit diagonal; eigenvectors of the
    equilibrated S with eigenvalues below rank_tolerance times the largest
    are discarded, H is projected on the remaining subspace and diagonalized,
    and the eigenvectors are transformed back.

    Parameters
    ----------
    mp : MatrixPair
        Overlap and Hamiltonian matrices.
    rank_tolerance : float
        Relative cutoff on overlap eigenvalues, (def=1e-12).

    Returns
    -------
    SpectrumResult
        Ascending energies with S-orthonormal eigenvectors.

    """
    overlap = np.asarray(mp.overlap, dtype='float64')
    hamiltonian = np.asarray(mp.hamiltonian, dtype='float64')

    # Checks on input matrices
    _check_symmetric(overlap, 'Overlap matrix')
    _check_symmetric(hamiltonian, 'Hamiltonian matrix')
    if overlap.shape != hamiltonian.shape:
        raise ValueError('Overlap and Hamiltonian differ in shape.')
    if not rank_tolerance > 0:
        raise ValueError('Rank tolerance should be positive.')

    if getattr(mp, 'precision', 'double') == 'extended' and \
            mp.overlap_mp is not None:
        return _solve_extended(mp, rank_tolerance)

    diagonal = np.diag(overlap)
    if np.any(diagonal <= 0):
        raise NumericalFailure('Overlap matrix has non-positive diagonal.')

    # Equilibrate to unit diagonal
    scale = 1. / np.sqrt(diagonal)
    overlap = scale[:, None] * overlap * scale[None, :]
    hamiltonian = scale[:, None] * hamiltonian * scale[None, :]

    # Eigendecomposition of the overlap
    svals, svecs = sl.eigh(overlap)
    keep = svals > rank_tolerance * svals[-1]
    rank = int(np.sum(keep))
    if rank == 0:
        raise NumericalFailure('Overlap matrix has no retained directions.')
    if rank < overlap.shape[0]:
        logger.debug('Discarded %d of %d overlap directions',
                     overlap.shape[0] - rank, overlap.shape[0])

    # Orthonormal transformation of the retained subspace
    transform = svecs[:, keep] / np.sqrt(svals[keep])

    # Projected standard eigenproblem
    projected = transform.T @ hamiltonian @ transform
    projected = (projected + projected.T) / 2
    energies, vectors = sl.eigh(projected)

    # Back-transform to the original basis
    coefficients = scale[:, None] * (transform @ vectors)

    return SpectrumResult(energies, coefficients, rank,
                          float(svals[-1] / svals[keep][0]),
                          float(rank_tolerance), float(svals[0]))


def _solve_extended(mp, rank_tolerance):
    """Canonical orthogonalization carried out in mpmath."""
    size = mp.overlap_mp.rows
    logger.info('Extended-precision solve of a %d x %d problem', size, size)

    with mpmath.workdps(mp.dps):
        overlap = mp.overlap_mp.copy()
        hamiltonian = mp.hamiltonian_mp.copy()

        # Equilibrate to unit diagonal
        scale = [1 / mpmath.sqrt(overlap[i, i]) for i in range(size)]
        for i in range(size):
            for j in range(size):
                overlap[i, j] *= scale[i] * scale[j]
                hamiltonian[i, j] *= scale[i] * scale[j]

        svals, svecs = mpmath.eigsy(overlap)
        svals = [svals[i] for i in range(size)]
        largest = max(svals)
        keep = [i for i in sorted(range(size), key=lambda i: svals[i])
                if svals[i] > rank_tolerance * largest]
        if not keep:
            raise NumericalFailure('Overlap matrix has no retained '
                                   'directions.')

        transform = mpmath.matrix(size, len(keep))
        for col, i in enumerate(keep):
            norm = 1 / mpmath.sqrt(svals[i])
            for row in range(size):
                transform[row, col] = svecs[row, i] * norm

        projected = transform.T * hamiltonian * transform
        energies, vectors = mpmath.eigsy(projected)
        coefficients = transform * vectors
        for row in range(size):
            for col in range(len(keep)):
                coefficients[row, col] *= scale[row]

        energies = np.array([float(energies[i]) for i in range(len(keep))])
        coefficients = np.array(coefficients.tolist(), dtype='float64')
        condition = float(largest / svals[keep[0]])
        smallest = float(min(svals))

    # Sort ascending
    order = np.argsort(energies)
    return SpectrumResult(energies[order], coefficients[:, order], len(keep),
                          condition, float(rank_tolerance), smallest)


def residuals(mp, spectrum):
    """
    Relative residual norms ||H c - E S c|| / ||H c|| of all eigenpairs.

    Parameters
    ----------
    mp : MatrixPair
        Matrices that were diagonalized.
    spectrum : SpectrumResult
        Their eigenpairs.

    Returns
    -------
    array
        One relative residual per eigenpair.

    """
    hc = mp.hamiltonian @ spectrum.coefficients
    sc = mp.overlap @ spectrum.coefficients
    residual = hc - sc * spectrum.energies[None, :]
    return np.linalg.norm(residual, axis=0) / np.linalg.norm(hc, axis=0)


def normalize(psi, mp):
    """
    Scale a wavefunction to unit norm under the analytic overlap.

    Parameters
    ----------
    psi : HylleraasWavefunction
        State built on the basis of mp.
    mp : MatrixPair
        Matrices of the same basis and exponents.

    Returns
    -------
    HylleraasWavefunction
        Copy with c^T S c = 1 and the normalized flag set.

    """
    # Check whether psi lives on the basis of the matrices
    if list(psi.terms) != mp.terms:
        raise ValueError('Wavefunction terms do not match the matrix basis.')
    if not (np.isclose(psi.alpha, mp.alpha, rtol=1e-14) and
            np.isclose(psi.beta, mp.beta, rtol=1e-14)):
        raise ValueError('Wavefunction exponents do not match the matrices.')

    norm2 = float(psi.coefficients @ mp.overlap @ psi.coefficients)
    if not norm2 > 0:
        raise ValueError('Cannot normalize a zero-norm wavefunction.')

    return HylleraasWavefunction(psi.terms,
                                 psi.coefficients / np.sqrt(norm2),
                                 psi.alpha, psi.beta, psi.nuclear_charge,
                                 normalized=True, label=psi.label)


def state(mp, spectrum, index=0, label=''):
    """
    Normalized wavefunction of one eigenpair.

    Parameters
    ----------
    mp : MatrixPair
        Matrices that were diagonalized.
    spectrum : SpectrumResult
        Their eigenpairs.
    index : int
        Position in the ascending spectrum, (def=0).
    label : str
        Name attached to the state.

    Returns
    -------
    HylleraasWavefunction
        The eigenvector as a normalized state.

    """
    if not 0 <= index < spectrum.energies.shape[0]:
        raise ValueError('Eigenvalue index {} out of range.'.format(index))

    psi = HylleraasWavefunction(mp.terms, spectrum.coefficients[:, index],
                                mp.alpha, mp.beta, mp.nuclear_charge,
                                label=label)
    return normalize(psi, mp)
