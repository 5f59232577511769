import os

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from heentangle.stabilization import (DensityCurve, StabilizationScan,
                                      ResonanceFit, lorentzian)
from heentangle.viz import viz_density, viz_stabilization


def test_viz_stabilization(tmp_path):
    alphas = np.linspace(0.2, 1.0, 41)
    curves = np.array([-2 + 0.5 * alphas, -0.78 + 0.001 * alphas])
    result = StabilizationScan(alphas, curves, omega=0)
    fit = ResonanceFit(-0.7795, 0.0045, 0.01, 0.5, 0.9999, curve_index=1,
                       window=(0.4, 0.6))

    fn = str(tmp_path / 'stabilization.png')
    viz_stabilization(result, highlight=[fit], savefn=fn)
    assert os.path.getsize(fn) > 0
    plt.close('all')


def test_viz_density(tmp_path):
    energies = np.linspace(-0.79, -0.766, 50)
    rho = lorentzian(energies, -0.778, 0.0045, 1., 0.1)
    dc = DensityCurve(energies, rho, np.linspace(0.3, 0.5, 50))
    fit = ResonanceFit(-0.778, 0.0045, 1., 0.1, 1.)

    fig, ax = plt.subplots()
    fn = str(tmp_path / 'density.png')
    viz_density(dc, fit=fit, ax=ax, savefn=fn)
    assert os.path.getsize(fn) > 0
    plt.close('all')
