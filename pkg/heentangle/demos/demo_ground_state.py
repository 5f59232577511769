import numpy as np

from heentangle.integrals import assemble
from heentangle.eigensolver import solve, state, residuals
from heentangle.schmidt import schmidt_entropies

'''Set up the variational basis'''

# Basis truncation and nonlinear parameter
omega = 6
alpha = 1.8

# Overlap and Hamiltonian matrices of the helium atom
mp = assemble(omega, alpha)
print('Number of basis terms = ' + str(len(mp.terms)))

'''Solve the generalized eigenproblem'''

spectrum = solve(mp)
print('Ground-state energy = {:.8f} a.u.'.format(spectrum.energies[0]))
print('Largest relative residual = {:.2e}'.format(
    np.max(residuals(mp, spectrum))))

# Normalized ground-state wavefunction
psi = state(mp, spectrum, 0, label='ground')

'''Entanglement of the ground state'''

decomp, result = schmidt_entropies(psi)

print('Linear entropy = {:.6f}'.format(result.s_linear))
print('von Neumann entropy = {:.6f} bits'.format(result.s_vonneumann))
print('Sum rule deficit = {:.2e}'.format(result.sum_rule_deficit))

# Leading occupation numbers per partial wave
for l in range(3):
    leading = decomp.occupations[l, :3]
    print('l = {}: '.format(l) + ', '.join('{:.3e}'.format(value)
                                          for value in leading))
