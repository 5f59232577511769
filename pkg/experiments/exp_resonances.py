# Experimental script for the doubly-excited 1Se resonances of helium
import os
import sys
import logging

from heentangle.integrals import assemble
from heentangle.eigensolver import solve, state
from heentangle.stabilization import (KNOWN_STATES, alpha_star, scan,
                                      resolve_resonance)
from heentangle.schmidt import schmidt_entropies
from heentangle.oracle import trace_rho_squared_mc, compare
from heentangle.util import write_json

logging.basicConfig(level=logging.INFO)

''' Parse experiment parameters '''

# Basis truncation (7 to 11)
omega = int(sys.argv[1])

# Which state ('2s2', '2p2' or '2s3s')
label = sys.argv[2]

# Run the Monte Carlo check as well (only feasible up to omega = 8)
oracle = len(sys.argv) > 3 and sys.argv[3] == 'mc'

# Grid of nonlinear parameters
alpha_min = 0.2
alpha_max = 1.0
alpha_step = 0.002

# Search window around the known position
tolerance = 0.005

# Linear algebra precision, extended for the largest basis
precision = 'extended' if omega >= 11 else 'double'

# Output folder
results_dir = 'results'
os.makedirs(results_dir, exist_ok=True)

''' Stabilization scan '''

result = scan(omega, alpha_min, alpha_max, alpha_step, precision=precision)
result.to_csv(os.path.join(results_dir, 'scan_w{}.csv'.format(omega)))

''' Fit the resonance '''

best, fits = resolve_resonance(result, KNOWN_STATES[label], tolerance)
alpha = alpha_star(result, best)

print('{} omega={}: E_r = {:.7f}, Gamma = {:.6f}, r2 = {:.7f}'.format(
    label, omega, best.E_r, best.Gamma, best.r_squared))

''' Entanglement at the plateau centre '''

mp = assemble(omega, alpha, precision=precision)
psi = state(mp, solve(mp), best.curve_index, label=label)
_, entropy = schmidt_entropies(psi)

print('S_L = {:.6f}, S_vN = {:.6f}'.format(entropy.s_linear,
                                           entropy.s_vonneumann))

# Collect results
res = {'omega': omega, 'label': label, 'num_terms': len(mp.terms),
       'alpha_star': alpha, 'fit': best.to_dict(), 'candidates': len(fits),
       'entropy': entropy.to_dict()}

if oracle:
    estimate = trace_rho_squared_mc(psi)
    difference, sigmas = compare(entropy.s_linear, estimate)
    res['monte_carlo'] = estimate.to_dict()
    res['sigmas'] = sigmas
    print('Monte Carlo S_L = {:.6f} +- {:.6f} ({:.2f} sigma)'.format(
        estimate.s_linear, estimate.standard_error, sigmas))

''' Write results '''

fn = 'res_{}_w{}.json'.format(label, omega)
write_json(os.path.join(results_dir, fn), res)
