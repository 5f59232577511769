
from heentangle.integrals import assemble
from heentangle.eigensolver import solve, state
from heentangle.stabilization import (KNOWN_STATES, alpha_star, scan,
                                      density_of_states, resolve_resonance)
from heentangle.schmidt import schmidt_entropies
from heentangle.viz import viz_stabilization, viz_density

'''Stabilization scan'''

# Eigenvalues of a 125-term basis over a grid of nonlinear parameters
omega = 9
result = scan(omega, alpha_min=0.2, alpha_max=1.0, alpha_step=0.002)
print('Number of curves below threshold = ' + str(result.num_curves))

'''Locate the doubly-excited 2s2 resonance'''

# Fit every plateau near the known position and keep the best fit
best, fits = resolve_resonance(result, KNOWN_STATES['2s2'], tolerance=0.005)
print('E_r = {:.7f} a.u., Gamma = {:.6f} a.u., r2 = {:.7f} ({} candidates)'
      .format(best.E_r, best.Gamma, best.r_squared, len(fits)))

'''Visualize results'''

# Eigenvalue curves with the fitted plateau marked
viz_stabilization(result, highlight=[best], savefn='stabilization.png')

# Density of states and its Lorentzian
dc = density_of_states(result, best.curve_index, best.window)
viz_density(dc, fit=best, savefn='density.png')

'''Entanglement of the resonance state'''

# Re-solve at the centre of the plateau
alpha = alpha_star(result, best)
mp = assemble(omega, alpha)
psi = state(mp, solve(mp), best.curve_index, label='2s2')

_, entropy = schmidt_entropies(psi)
print('alpha* = {:.3f}: S_L = {:.6f}, S_vN = {:.6f}'.format(
    alpha, entropy.s_linear, entropy.s_vonneumann))
