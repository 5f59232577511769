import pytest
import numpy as np
import numpy.random as rn

from heentangle.basis import (BasisTerm, HylleraasWavefunction,
                              enumerate_terms, evaluate, omega_of, term_count)


def random_triples(count, seed=0):
    """Random (r1, r2, r12) satisfying the triangle condition."""
    rng = rn.default_rng(seed)
    r1 = rng.uniform(0.05, 6, count)
    r2 = rng.uniform(0.05, 6, count)
    r12 = rng.uniform(np.abs(r1 - r2), r1 + r2)
    return r1, r2, r12


def test_enumerate_terms_omega0():
    assert enumerate_terms(0) == [BasisTerm(0, 0, 0)]


def test_enumerate_terms_invalid():
    with pytest.raises(ValueError):
        enumerate_terms(-1)
    with pytest.raises(ValueError):
        term_count(2.5)


def test_term_counts():
    """Basis sizes used for the resonance tables."""
    assert [term_count(omega) for omega in range(7, 12)] == \
        [70, 95, 125, 161, 203]
    assert term_count(0) == 1
    assert term_count(3) == 13


def test_term_count_matches_enumeration():
    for omega in range(12):
        assert term_count(omega) == len(enumerate_terms(omega))


def test_enumerate_terms_order():
    terms = enumerate_terms(6)
    assert terms == sorted(terms, key=lambda t: (t.degree, t.k, t.m, t.n))
    assert len(set(terms)) == len(terms)
    assert all(t.k <= t.m for t in terms)
    assert enumerate_terms(6) == terms


def test_omega_of():
    assert omega_of(enumerate_terms(4)) == 4
    with pytest.raises(ValueError):
        omega_of(enumerate_terms(4)[:-1])


def test_wavefunction_checks():
    terms = enumerate_terms(1)
    with pytest.raises(ValueError):
        HylleraasWavefunction(terms, np.ones(2), 1., 1.)
    with pytest.raises(ValueError):
        HylleraasWavefunction([(1, 0, 0)], [1.], 1., 1.)
    with pytest.raises(ValueError):
        HylleraasWavefunction(terms, np.ones(len(terms)), -1., 1.)


def test_coefficients_read_only():
    psi = HylleraasWavefunction(enumerate_terms(1), np.ones(3), 1., 1.)
    with pytest.raises(ValueError):
        psi.coefficients[0] = 2.


def test_evaluate_bare_exponential():
    psi = HylleraasWavefunction([(0, 0, 0)], [1.], 1., 1.)
    for r12 in (0.1, 1., 1.9):
        assert evaluate(psi, 1., 1., r12) == pytest.approx(2 * np.exp(-2),
                                                           rel=1e-15)


def test_evaluate_symmetrized_pair():
    psi = HylleraasWavefunction([(0, 1, 1)], [1.], 1., 1.)
    assert evaluate(psi, 1., 2., 1.5) == pytest.approx(4.5 * np.exp(-3),
                                                       rel=1e-14)


def test_evaluate_exchange_symmetry():
    """Swapping the electrons reproduces the value bit for bit."""
    terms = enumerate_terms(4)
    coefficients = rn.default_rng(1).standard_normal(len(terms))
    psi = HylleraasWavefunction(terms, coefficients, 1.3, 0.7)

    r1, r2, r12 = random_triples(500)
    assert np.all(evaluate(psi, r1, r2, r12) == evaluate(psi, r2, r1, r12))


def test_evaluate_matches_term_sum():
    terms = enumerate_terms(3)
    coefficients = rn.default_rng(2).standard_normal(len(terms))
    psi = HylleraasWavefunction(terms, coefficients, 1.1, 0.9)
    r1, r2, r12 = random_triples(50, seed=3)

    expected = np.zeros_like(r1)
    for (k, m, n), c in zip(terms, coefficients):
        expected += c * (np.exp(-1.1 * r1 - 0.9 * r2) * r1 ** k * r2 ** m +
                         np.exp(-1.1 * r2 - 0.9 * r1) * r2 ** k * r1 ** m) * \
            r12 ** n

    np.testing.assert_allclose(evaluate(psi, r1, r2, r12), expected,
                               rtol=1e-12, atol=1e-14)


def test_evaluate_triangle_condition():
    psi = HylleraasWavefunction([(0, 0, 0)], [1.], 1., 1.)
    with pytest.raises(ValueError):
        evaluate(psi, 1., 2., 3.5)
    with pytest.raises(ValueError):
        evaluate(psi, 1., 2., 0.5)
    with pytest.raises(ValueError):
        evaluate(psi, 0., 2., 2.)


def test_dilated():
    terms = enumerate_terms(3)
    coefficients = rn.default_rng(4).standard_normal(len(terms))
    psi = HylleraasWavefunction(terms, coefficients, 1.2, 1.2)
    wide = psi.dilated(0.5)

    r1, r2, r12 = random_triples(20, seed=5)
    np.testing.assert_allclose(evaluate(wide, r1, r2, r12),
                               evaluate(psi, 0.5 * r1, 0.5 * r2, 0.5 * r12),
                               rtol=1e-12)
    assert not wide.normalized
