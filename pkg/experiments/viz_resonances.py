''' Gather and visualise results from experiment '''
import os
import numpy as np
import matplotlib.pyplot as plt

from heentangle.util import read_json

''' Experimental parameters '''

# Basis truncations
omegas = np.arange(7, 12)

# States
labels = ['2s2', '2p2', '2s3s']

results_dir = 'results'

''' Retrieve results '''

# Pre-allocate
num_terms = np.full(len(omegas), np.nan)
E_r = np.full((len(labels), len(omegas)), np.nan)
Gamma = np.full((len(labels), len(omegas)), np.nan)
S_L = np.full((len(labels), len(omegas)), np.nan)
S_vN = np.full((len(labels), len(omegas)), np.nan)

for s, label in enumerate(labels):
    for w, omega in enumerate(omegas):

        fn = os.path.join(results_dir, 'res_{}_w{}.json'.format(label, omega))
        if not os.path.exists(fn):
            continue

        res = read_json(fn)
        num_terms[w] = res['num_terms']
        E_r[s, w] = res['fit']['e_r']
        Gamma[s, w] = res['fit']['gamma']
        S_L[s, w] = res['entropy']['s_linear']
        S_vN[s, w] = res['entropy']['s_vonneumann']

''' Print tables '''

for s, label in enumerate(labels):
    print(label)
    print('  N      E_r          Gamma      S_L        S_vN')
    for w in range(len(omegas)):
        if np.isnan(E_r[s, w]):
            continue
        print('{:4d}  {:.7f}  {:.7f}  {:.6f}  {:.6f}'.format(
            int(num_terms[w]), E_r[s, w], Gamma[s, w], S_L[s, w], S_vN[s, w]))

''' Visualize convergence '''

# Visualisation parameters
fS = 14
lW = 2

fig, axs = plt.subplots(nrows=1, ncols=2, sharex=True, figsize=(14, 5))

for s, label in enumerate(labels):
    axs[0].plot(num_terms, S_L[s], marker='o', linewidth=lW, label=label)
    axs[1].plot(num_terms, S_vN[s], marker='o', linewidth=lW, label=label)

axs[0].set_ylabel('linear entropy', fontsize=fS)
axs[1].set_ylabel('von Neumann entropy (bits)', fontsize=fS)
for ax in axs:
    ax.set_xlabel('number of basis terms', fontsize=fS)
    ax.legend(fontsize=fS)

fig.savefig(os.path.join(results_dir, 'entropy_convergence.png'),
            bbox_inches='tight')
