"""
Correlated two-electron integrals and matrix assembly over the Hylleraas basis.

All integrals reduce to

    I(a, b, c; alpha, beta) = int int r1^a r2^b r12^c
                              exp(-alpha r1 - beta r2) d^3r1 d^3r2,

evaluated in closed form with mpmath at `dps` decimal digits and rounded to
double precision only at the end. Matrix elements are homogeneous in the
exponents, so the overlap, kinetic and potential tables are built once at
alpha = 1 for a given beta/alpha ratio and rescaled for every alpha.
"""
import math
import logging
import functools
from dataclasses import dataclass
from typing import Any, Optional

import mpmath
import numpy as np

from heentangle.basis import BasisTerm, enumerate_terms

logger = logging.getLogger(__name__)

# Default working precision of the integral arithmetic (decimal digits)
DEFAULT_DPS = 40

PRECISIONS = ('double', 'extended')


@functools.lru_cache(maxsize=None)
def _factorial(n):
    """Exact factorial as a Python integer."""
    return math.factorial(n)


@functools.lru_cache(maxsize=None)
def _binomial(n, k):
    """Exact binomial coefficient as a Python integer."""
    return math.comb(n, k)


def _one_center(p, alpha):
    """int_0^inf r^p exp(-alpha r) dr = p! / alpha^(p+1)."""
    return mpmath.mpf(_factorial(p)) / alpha ** (p + 1)


def _ordered(p, q, alpha, beta):
    """
    Ordered radial integral over the half quadrant r2 < r1.

    W(p, q) = int_0^inf r1^p e^(-alpha r1) int_0^r1 r2^q e^(-beta r2) dr2 dr1
            = q!/beta^(q+1) [p!/alpha^(p+1)
              - sum_{k<=q} beta^k (p+k)! / (k! (alpha+beta)^(p+k+1))]
    """
    total = alpha + beta
    partial = mpmath.mpf(0)
    for k in range(q + 1):
        partial += (beta ** k * _factorial(p + k)) / \
            (_factorial(k) * total ** (p + k + 1))

    return mpmath.mpf(_factorial(q)) / beta ** (q + 1) * \
        (_one_center(p, alpha) - partial)


@functools.lru_cache(maxsize=None)
def _base_integral_mp(a, b, c, alpha, beta, dps):
    """Cached extended-precision kernel of base_integral."""
    with mpmath.workdps(dps):
        alpha = mpmath.mpf(alpha)
        beta = mpmath.mpf(beta)
        prefactor = 8 * mpmath.pi ** 2

        # Angular integral of r12^c gives int_{|r1-r2|}^{r1+r2} u^(c+1) du
        if c == -1:
            # 2 min(r1, r2): r2 below the diagonal, r1 above it
            value = 2 * (_ordered(a + 1, b + 2, alpha, beta) +
                         _ordered(b + 1, a + 2, beta, alpha))
            return +(prefactor * value)

        order = c + 2

        # (r1 + r2)^order is separable over the whole quadrant
        upper = mpmath.mpf(0)
        for j in range(order + 1):
            upper += _binomial(order, j) * \
                _one_center(a + 1 + order - j, alpha) * \
                _one_center(b + 1 + j, beta)

        # |r1 - r2|^order needs the quadrant split at r1 = r2 for odd order
        lower = mpmath.mpf(0)
        for j in range(order + 1):
            weight = _binomial(order, j) * (-1) ** j
            if order % 2 == 0:
                lower += weight * _one_center(a + 1 + order - j, alpha) * \
                    _one_center(b + 1 + j, beta)
            else:
                lower += weight * (
                    _ordered(a + 1 + order - j, b + 1 + j, alpha, beta) +
                    _ordered(b + 1 + order - j, a + 1 + j, beta, alpha))

        return +(prefactor * (upper - lower) / order)


def base_integral(a, b, c, alpha, beta, dps=DEFAULT_DPS):
    """
    Basic correlated integral over all space.

    Parameters
    ----------
    a, b : int
        Powers of r1 and r2; -1 is allowed since the nuclear attraction
        produces it.
    c : int
        Power of r12, at least -1.
    alpha, beta : float
        Positive exponents of r1 and r2.
    dps : int
        Decimal digits of the intermediate arithmetic, (def=40).

    Returns
    -------
    float
        I(a, b, c; alpha, beta) rounded to double precision.

    """
    # Checks on exponents
    for name, value in (('a', a), ('b', b), ('c', c)):
        if int(value) != value:
            raise ValueError('Exponent {} should be an integer.'.format(name))
    if a < -1 or b < -1:
        raise ValueError('Powers of r1 and r2 should be at least -1.')
    if c < -1:
        raise ValueError('Power of r12 should be at least -1.')
    if not (alpha > 0 and beta > 0):
        raise ValueError('Exponents alpha and beta should be positive.')

    return float(_base_integral_mp(int(a), int(b), int(c), float(alpha),
                                   float(beta), int(dps)))


def _primitives(term, alpha, beta):
    """The two exchange orderings of a symmetrized term."""
    return ((term.k, term.m, term.n, alpha, beta),
            (term.m, term.k, term.n, beta, alpha))


def _primitive_pair(left, right, dps):
    """
    Overlap, kinetic, nuclear and repulsion integrals of two primitives.

    The kinetic energy uses the symmetric gradient form
    1/2 int (grad1 psi . grad1 phi + grad2 psi . grad2 phi) written in
    (r1, r2, r12), with r1^.r12^ = (r1^2 - r2^2 + r12^2) / (2 r1 r12).
    Terms with vanishing prefactors are skipped since their shifted powers
    may fall outside the convergent range.
    """
    k, m, n, a1, b1 = left
    kk, mm, nn, a2, b2 = right

    with mpmath.workdps(dps):
        a1, b1, a2, b2 = (mpmath.mpf(x) for x in (a1, b1, a2, b2))
        exp1 = float(a1 + a2)
        exp2 = float(b1 + b2)

        def g(da, db, dc):
            return _base_integral_mp(k + kk + da, m + mm + db, n + nn + dc,
                                     exp1, exp2, dps)

        overlap = g(0, 0, 0)

        # Radial derivative products
        kinetic = (a1 * a2 + b1 * b2) * overlap
        if k * kk:
            kinetic += k * kk * g(-2, 0, 0)
        if k * a2 + kk * a1:
            kinetic -= (k * a2 + kk * a1) * g(-1, 0, 0)
        if m * mm:
            kinetic += m * mm * g(0, -2, 0)
        if m * b2 + mm * b1:
            kinetic -= (m * b2 + mm * b1) * g(0, -1, 0)

        # r12 derivative products, once from each gradient
        if n * nn:
            kinetic += 2 * n * nn * g(0, 0, -2)

        # Cross terms with r1^.r12^
        cross = mpmath.mpf(k * nn + kk * n) / 2
        if cross:
            kinetic += cross * (g(0, 0, -2) - g(-2, 2, -2) + g(-2, 0, 0))
        cross = (a1 * nn + a2 * n) / 2
        if cross:
            kinetic -= cross * (g(1, 0, -2) - g(-1, 2, -2) + g(-1, 0, 0))

        # Cross terms with r2^.r21^
        cross = mpmath.mpf(m * nn + mm * n) / 2
        if cross:
            kinetic += cross * (g(0, 0, -2) - g(2, -2, -2) + g(0, -2, 0))
        cross = (b1 * nn + b2 * n) / 2
        if cross:
            kinetic -= cross * (g(0, 1, -2) - g(2, -1, -2) + g(0, -1, 0))

        kinetic = kinetic / 2
        nuclear = -(g(-1, 0, 0) + g(0, -1, 0))
        repulsion = g(0, 0, -1)

    return overlap, kinetic, nuclear, repulsion


def _element_components(t1, t2, alpha, beta, dps):
    """
    Overlap, kinetic, nuclear (per unit Z) and repulsion elements.

    Relabelling the electrons maps the second exchange ordering onto the
    first, so two primitive pairs suffice instead of four.
    """
    left = _primitives(BasisTerm(*t1), alpha, beta)
    right = _primitives(BasisTerm(*t2), alpha, beta)

    direct = _primitive_pair(left[0], right[0], dps)
    exchange = _primitive_pair(left[0], right[1], dps)

    with mpmath.workdps(dps):
        return tuple(2 * (x + y) for x, y in zip(direct, exchange))


def _check_terms(t1, t2):
    """Reject non-canonical terms."""
    for term in (t1, t2):
        term = BasisTerm(*term)
        if term.k > term.m or min(term) < 0:
            raise ValueError('Term {} is not canonical.'.format(tuple(term)))


def overlap_element(t1, t2, alpha, beta, dps=DEFAULT_DPS):
    """
    Overlap of two symmetrized basis functions.

    Parameters
    ----------
    t1, t2 : BasisTerm
        Canonical terms.
    alpha, beta : float
        Positive exponents.
    dps : int
        Decimal digits of the intermediate arithmetic, (def=40).

    Returns
    -------
    float
        <phi_t1 | phi_t2>.

    """
    _check_terms(t1, t2)
    if not (alpha > 0 and beta > 0):
        raise ValueError('Exponents alpha and beta should be positive.')

    overlap = _element_components(t1, t2, float(alpha), float(beta),
                                  int(dps))[0]
    return float(overlap)


def hamiltonian_element(t1, t2, alpha, beta, Z=2.0, interaction=True,
                        dps=DEFAULT_DPS):
    """
    Hamiltonian matrix element between two symmetrized basis functions.

    Parameters
    ----------
    t1, t2 : BasisTerm
        Canonical terms.
    alpha, beta : float
        Positive exponents.
    Z : float
        Nuclear charge, (def=2).
    interaction : bool
        Whether to include the electron repulsion 1/r12, (def=True).
    dps : int
        Decimal digits of the intermediate arithmetic, (def=40).

    Returns
    -------
    float
        <phi_t1 | H | phi_t2> in hartree.

    """
    _check_terms(t1, t2)
    if not (alpha > 0 and beta > 0):
        raise ValueError('Exponents alpha and beta should be positive.')
    if not Z > 0:
        raise ValueError('Nuclear charge should be positive.')

    _, kinetic, nuclear, repulsion = _element_components(
        t1, t2, float(alpha), float(beta), int(dps))

    with mpmath.workdps(dps):
        value = kinetic + mpmath.mpf(Z) * nuclear
        if interaction:
            value += repulsion

    return float(value)


@dataclass(frozen=True)
class _UnitTables:
    """Matrices at alpha = 1 for one (omega, beta/alpha, dps)."""

    degrees: np.ndarray
    overlap: np.ndarray
    kinetic: np.ndarray
    nuclear: np.ndarray
    repulsion: np.ndarray
    exact: tuple


@functools.lru_cache(maxsize=8)
def _unit_tables(omega, ratio, dps):
    """Compute and cache the alpha = 1 matrices for a basis."""
    terms = enumerate_terms(omega)
    size = len(terms)

    logger.info('Computing %d x %d integral tables (omega=%d, beta/alpha=%g,'
                ' dps=%d)', size, size, omega, ratio, dps)

    exact = [mpmath.matrix(size, size) for _ in range(4)]
    for i in range(size):
        for j in range(i, size):

            # Element computed once and mirrored
            values = _element_components(terms[i], terms[j], 1.0, ratio, dps)
            for table, value in zip(exact, values):
                table[i, j] = value
                table[j, i] = value

    logger.debug('Cached %d base integrals',
                 _base_integral_mp.cache_info().currsize)

    floats = []
    for table in exact:
        array = np.array(table.tolist(), dtype='float64')
        array.setflags(write=False)
        floats.append(array)

    degrees = np.array([term.degree for term in terms])
    degrees.setflags(write=False)

    return _UnitTables(degrees, *floats, exact=tuple(exact))


@dataclass(frozen=True)
class MatrixPair:
    """
    Overlap and Hamiltonian matrices over a Hylleraas basis.

    Parameters
    ----------
    overlap : array
        Symmetric overlap matrix S.
    hamiltonian : array
        Symmetric Hamiltonian matrix H (hartree).
    basis_omega : int
        Truncation of the basis.
    alpha, beta : float
        Exponents the matrices were built for.
    nuclear_charge : float
        Nuclear charge Z.
    interaction : bool
        Whether 1/r12 is included.
    precision : str
        'double' or 'extended'.
    overlap_mp, hamiltonian_mp : mpmath.matrix, optional
        Unrounded matrices, present for extended precision.
    dps : int
        Decimal digits the integrals were evaluated with.

    """

    overlap: np.ndarray
    hamiltonian: np.ndarray
    basis_omega: int
    alpha: float
    beta: float
    nuclear_charge: float = 2.0
    interaction: bool = True
    precision: str = 'double'
    overlap_mp: Optional[Any] = None
    hamiltonian_mp: Optional[Any] = None
    dps: int = DEFAULT_DPS

    @property
    def size(self):
        """Dimension of the basis."""
        return self.overlap.shape[0]

    @property
    def terms(self):
        """Basis terms in matrix order."""
        return enumerate_terms(self.basis_omega)


def assemble(omega, alpha, beta=None, Z=2.0, interaction=True,
             precision='double', dps=DEFAULT_DPS):
    """
    Assemble overlap and Hamiltonian matrices.

    Parameters
    ----------
    omega : int
        Basis truncation k + m + n <= omega.
    alpha : float
        Exponent of r1 in the unsymmetrized term.
    beta : float
        Exponent of r2, (def=alpha).
    Z : float
        Nuclear charge, (def=2).
    interaction : bool
        Whether to include the electron repulsion, (def=True).
    precision : str
        'double' or 'extended'; extended keeps mpmath matrices for the
        eigensolver, (def='double').
    dps : int
        Decimal digits of the integral arithmetic, (def=40).

    Returns
    -------
    MatrixPair
        Dense symmetric S and H.

    """
    if beta is None:
        beta = alpha

    # Checks on parameters
    if int(omega) != omega or omega < 0:
        raise ValueError('omega should be a non-negative integer.')
    if not (alpha > 0 and beta > 0):
        raise ValueError('Exponents alpha and beta should be positive.')
    if not Z > 0:
        raise ValueError('Nuclear charge should be positive.')
    if precision not in PRECISIONS:
        raise ValueError('Precision should be one of {}.'.format(PRECISIONS))

    alpha = float(alpha)
    tables = _unit_tables(int(omega), float(beta) / alpha, int(dps))

    # Homogeneity: S ~ alpha^-(d_i+d_j+6), T one power of alpha^2 and V one
    # power of alpha above it
    powers = tables.degrees[:, None] + tables.degrees[None, :] + 6
    scale = alpha ** (-powers.astype('float64'))

    potential = Z * tables.nuclear
    if interaction:
        potential = potential + tables.repulsion

    overlap = scale * tables.overlap
    hamiltonian = scale * (alpha ** 2 * tables.kinetic + alpha * potential)

    overlap_mp = hamiltonian_mp = None
    if precision == 'extended':
        overlap_mp, hamiltonian_mp = _scale_exact(tables, alpha, Z,
                                                  interaction, dps)

    return MatrixPair(overlap, hamiltonian, int(omega), alpha, float(beta),
                      float(Z), bool(interaction), precision,
                      overlap_mp, hamiltonian_mp, int(dps))


def _scale_exact(tables, alpha, Z, interaction, dps):
    """Rescale the unrounded unit tables to the requested alpha."""
    overlap1, kinetic1, nuclear1, repulsion1 = tables.exact
    size = overlap1.rows

    with mpmath.workdps(dps):
        alpha = mpmath.mpf(alpha)
        Z = mpmath.mpf(Z)
        overlap = mpmath.matrix(size, size)
        hamiltonian = mpmath.matrix(size, size)

        for i in range(size):
            for j in range(size):
                power = int(tables.degrees[i] + tables.degrees[j] + 6)
                scale = alpha ** (-power)
                potential = Z * nuclear1[i, j]
                if interaction:
                    potential += repulsion1[i, j]
                overlap[i, j] = scale * overlap1[i, j]
                hamiltonian[i, j] = scale * (alpha ** 2 * kinetic1[i, j] +
                                             alpha * potential)

    return overlap, hamiltonian
