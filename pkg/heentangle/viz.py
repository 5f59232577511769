import numpy as np
import matplotlib.pyplot as plt

from heentangle.stabilization import lorentzian


def viz_stabilization(scan_result, highlight=None, ax=None, savefn=''):
    """
    Visualise eigenvalue curves against alpha.

    Parameters
    ----------
    scan_result : StabilizationScan
        Curves to draw.
    highlight : list(ResonanceFit)
        Fits whose windows are marked on their curves, (def = None).
    ax : Axes
        Axis handle to plot in, (def = None).
    savefn : str
        Filename to save figure to, (def = '').

    Returns
    -------
    None

    """
    if ax is None:
        # Figure options
        fig, ax = plt.subplots(figsize=(6, 8))
    else:
        fig = ax.figure

    # Plot every curve
    for curve in scan_result.curves:
        ax.plot(scan_result.alphas, curve, color='k', linewidth=.8)

    # Mark fitted plateaus
    for fit in highlight or []:
        inside = (scan_result.alphas >= fit.window[0]) & \
            (scan_result.alphas <= fit.window[1])
        ax.plot(scan_result.alphas[inside],
                scan_result.curves[fit.curve_index, inside],
                color='r', linewidth=2)
        ax.axhline(fit.E_r, color='r', linestyle=':', linewidth=.8)

    ax.set_xlabel(r'$\alpha$')
    ax.set_ylabel('E (a.u.)')
    ax.set_ylim(top=scan_result.energy_ceiling)

    # Check whether to save figure
    if savefn:
        fig.savefig(savefn, bbox_inches='tight')

    else:
        plt.show()


def viz_density(dc, fit=None, ax=None, savefn=''):
    """
    Visualise a density of resonance states with its Lorentzian fit.

    Parameters
    ----------
    dc : DensityCurve
        Density points.
    fit : ResonanceFit
        Fitted profile to overlay, (def = None).
    ax : Axes
        Axis handle to plot in, (def = None).
    savefn : str
        Filename to save figure to, (def = '').

    Returns
    -------
    None

    """
    if ax is None:
        fig, ax = plt.subplots()
    else:
        fig = ax.figure

    ax.scatter(dc.energies, dc.rho, c='b', marker='o', s=12, label='density')

    if fit is not None:
        energy = np.linspace(np.min(dc.energies), np.max(dc.energies), 400)
        ax.plot(energy, lorentzian(energy, fit.E_r, fit.Gamma, fit.a, fit.b),
                color='r', label=r'Lorentzian, $r^2$={:.6f}'.format(
                    fit.r_squared))

    ax.set_xlabel('E (a.u.)')
    ax.set_ylabel(r'$\rho$')
    ax.legend()

    # Check whether to save figure
    if savefn:
        fig.savefig(savefn, bbox_inches='tight')

    else:
        plt.show()
