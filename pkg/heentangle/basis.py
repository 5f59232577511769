"""
Symmetrized Hylleraas basis for singlet S-states of two-electron atoms.

A basis function with powers (k, m, n) reads

    exp(-alpha r1 - beta r2) r1^k r2^m r12^n + (1 <-> 2)

and the expansion is truncated by k + m + n <= omega.
"""
from dataclasses import dataclass, field
from typing import NamedTuple, Tuple

import numpy as np


class BasisTerm(NamedTuple):
    """Powers of r1, r2 and r12 of one symmetrized basis function."""

    k: int
    m: int
    n: int

    @property
    def degree(self):
        """Total polynomial degree k + m + n."""
        return self.k + self.m + self.n


def enumerate_terms(omega):
    """
    Enumerate the canonical symmetrized Hylleraas terms.

    Parameters
    ----------
    omega : int
        Maximum total degree k + m + n.

    Returns
    -------
    list[BasisTerm]
        All triples with k <= m and k + m + n <= omega, sorted by total
        degree, then k, then m, then n.

    """
    # Check for valid truncation
    if int(omega) != omega or omega < 0:
        raise ValueError('omega should be a non-negative integer.')
    omega = int(omega)

    terms = []
    for shell in range(omega + 1):
        for k in range(shell + 1):
            for m in range(k, shell - k + 1):
                terms.append(BasisTerm(k, m, shell - k - m))

    return terms


def term_count(omega):
    """
    Number of canonical terms for a given omega.

    Uses the closed count sum_s sum_{t<=s} (floor(t/2) + 1), which equals
    len(enumerate_terms(omega)).
    """
    if int(omega) != omega or omega < 0:
        raise ValueError('omega should be a non-negative integer.')

    return sum(t // 2 + 1 for s in range(int(omega) + 1) for t in range(s + 1))


def omega_of(terms):
    """Smallest omega whose enumeration reproduces the given terms."""
    omega = max(term.degree for term in terms)
    if list(terms) != enumerate_terms(omega):
        raise ValueError('Terms do not form a complete omega-truncated basis.')
    return omega


@dataclass(frozen=True)
class HylleraasWavefunction:
    """
    Variational two-electron S-state on the symmetrized Hylleraas basis.

    Parameters
    ----------
    terms : tuple[BasisTerm]
        Canonical basis terms.
    coefficients : array
        Expansion coefficients aligned with terms.
    alpha : float
        Exponent of r1 in the unsymmetrized term (a.u.^-1).
    beta : float
        Exponent of r2 in the unsymmetrized term (a.u.^-1).
    nuclear_charge : float
        Nuclear charge Z, (def=2).
    normalized : bool
        Whether c^T S c = 1 was enforced against the analytic overlap.

    """

    terms: Tuple[BasisTerm, ...]
    coefficients: np.ndarray
    alpha: float
    beta: float
    nuclear_charge: float = 2.0
    normalized: bool = False
    label: str = field(default='', compare=False)

    def __post_init__(self):
        terms = tuple(BasisTerm(*term) for term in self.terms)
        coefficients = np.array(self.coefficients, dtype='float64').ravel()

        # Checks on shapes and parameters
        if len(terms) == 0:
            raise ValueError('Wavefunction needs at least one term.')
        if coefficients.shape[0] != len(terms):
            raise ValueError('Number of coefficients does not match terms.')
        if any(term.k > term.m for term in terms):
            raise ValueError('Terms should be canonical (k <= m).')
        if any(min(term) < 0 for term in terms):
            raise ValueError('Negative powers are not allowed.')
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError('Exponents alpha and beta should be positive.')
        if not self.nuclear_charge > 0:
            raise ValueError('Nuclear charge should be positive.')

        # Freeze the coefficient array
        coefficients.setflags(write=False)
        object.__setattr__(self, 'terms', terms)
        object.__setattr__(self, 'coefficients', coefficients)

    @property
    def omega(self):
        """Largest total degree present."""
        return max(term.degree for term in self.terms)

    def scaled(self, factor):
        """Copy with coefficients multiplied by factor (flag cleared)."""
        return HylleraasWavefunction(self.terms, factor * self.coefficients,
                                     self.alpha, self.beta,
                                     self.nuclear_charge, normalized=False,
                                     label=self.label)

    def dilated(self, s):
        """
        Wavefunction Psi(s r1, s r2), up to normalization.

        Multiplies both exponents by s and each coefficient by s^(k+m+n).
        """
        degrees = np.array([term.degree for term in self.terms])
        return HylleraasWavefunction(self.terms,
                                     self.coefficients * s ** degrees,
                                     s * self.alpha, s * self.beta,
                                     self.nuclear_charge, normalized=False,
                                     label=self.label)


def _radial_groups(psi):
    """Group coefficients by the power of r12."""
    groups = {}
    for term, coef in zip(psi.terms, psi.coefficients):
        if coef != 0:
            groups.setdefault(term.n, []).append((term.k, term.m, coef))
    return groups


def evaluate(psi, r1, r2, r12, check=True):
    """
    Evaluate a Hylleraas wavefunction at interparticle coordinates.

    Works elementwise on broadcastable arrays. The r12 dependence is
    accumulated by Horner's rule over powers of r12, so a kernel grid costs
    one pass per distinct n instead of one pass per term.

    Parameters
    ----------
    psi : HylleraasWavefunction
        State to evaluate.
    r1, r2 : array
        Electron-nucleus distances (a.u.), positive.
    r12 : array
        Electron-electron distance (a.u.).
    check : bool
        Whether to verify the triangle condition, (def=True).

    Returns
    -------
    array or float
        Psi(r1, r2, r12), exactly symmetric under r1 <-> r2.

    """
    r1 = np.asarray(r1, dtype='float64')
    r2 = np.asarray(r2, dtype='float64')
    r12 = np.asarray(r12, dtype='float64')

    if check:
        # Checks on coordinates
        if np.any(r1 <= 0) or np.any(r2 <= 0):
            raise ValueError('Radial coordinates should be positive.')

        slack = 1e-12 * (r1 + r2)
        if np.any(r12 < np.abs(r1 - r2) - slack) or \
                np.any(r12 > r1 + r2 + slack):
            raise ValueError('Coordinates violate the triangle condition.')

    # Exponential factors of both exchange orderings
    e12 = np.exp(-psi.alpha * r1 - psi.beta * r2)
    e21 = np.exp(-psi.alpha * r2 - psi.beta * r1)

    # Power tables of r1 and r2
    omega = psi.omega
    p1 = [np.ones_like(r1)]
    p2 = [np.ones_like(r2)]
    for _ in range(omega):
        p1.append(p1[-1] * r1)
        p2.append(p2[-1] * r2)

    groups = _radial_groups(psi)

    value = 0.
    for n in range(omega, -1, -1):

        # Horner step in r12
        value = value * r12

        if n not in groups:
            continue

        # Radial coefficient of r12^n; sum e12 and e21 parts in the same
        # order so that swapping r1 and r2 reproduces the value bit for bit
        first = 0.
        second = 0.
        for k, m, coef in groups[n]:
            first = first + coef * p1[k] * p2[m]
            second = second + coef * p2[k] * p1[m]
        value = value + (e12 * first + e21 * second)

    return value
