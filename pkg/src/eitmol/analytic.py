"""Closed-form steady-state populations of the driven cascade system.

The expressions are exact to lowest order in the probe Rabi frequency g1 and
to all orders in the coupling Rabi frequency g2.  Writing Gij = gamma_ij + w
(polarization decay plus transit) and G2 = gamma2 + w, G3 = gamma3 + w
(population decay plus transit), the populations of the two excited levels
are

    rho22 = -(g1^2 rho11_0 / (2 D)) *
            Im{ [ (g2^2/4) (1 - W32/G3) (D2 - i G32) + A (D1 + D2 + i G31) ]
                / [ (D1 + i G21)(D1 + D2 + i G31) - g2^2/4 ] }

    rho33 = (g1^2 g2^2 rho11_0 / (8 D G3)) *
            Im{ [ -2 G32 (D1 + D2 + i G31) + G2 (D2 - i G32) ]
                / [ (D1 + i G21)(D1 + D2 + i G31) - g2^2/4 ] }

with the coupling-saturation factor A and the normalization D defined below.
Both populations are non-normalized (arbitrary units) and scale exactly as
g1^2.  The g2 = 0 limit reduces rho22 to the two-level Lorentzian and sends
rho33 to zero; no special-casing is needed, the formulas are regular there.

Every function accepts numpy arrays for the detunings and broadcasts.
"""

import numpy as np

from .system import CascadeSystem, DriveParams


def coupling_saturation_factor(sys: CascadeSystem, drv: DriveParams):
    """Power-broadened coupling-line factor: D2^2 + G32^2 + g2^2 G32/(2 G3)."""
    return _saturation_factor(sys, drv.g2, drv.delta2)


def steady_state_denominator(sys: CascadeSystem, drv: DriveParams):
    """Overall population normalization D; strictly positive for physical input."""
    return _denominator(sys, drv.g2, drv.delta2)


def rho22_analytic(sys: CascadeSystem, drv: DriveParams):
    """Non-normalized steady-state population of the intermediate level."""
    return population_rho22(sys, drv.g1, drv.g2, drv.delta1, drv.delta2,
                            drv.rho11_init)


def rho33_analytic(sys: CascadeSystem, drv: DriveParams):
    """Non-normalized steady-state population of the upper level."""
    return population_rho33(sys, drv.g1, drv.g2, drv.delta1, drv.delta2,
                            drv.rho11_init)


# array kernels -------------------------------------------------------------

def _saturation_factor(sys, g2, delta2):
    w = sys.transit_rate
    G32 = sys.gamma32 + w
    G3 = sys.gamma3 + w
    return delta2**2 + G32**2 + g2**2 * G32 / (2.0 * G3)


def _denominator(sys, g2, delta2):
    w = sys.transit_rate
    G32 = sys.gamma32 + w
    G3 = sys.gamma3 + w
    A = _saturation_factor(sys, g2, delta2)
    return A * (sys.gamma2 + w) + 0.5 * g2**2 * G32 * (1.0 - sys.W32 / G3)


def _probe_response(sys, g2, delta1, delta2):
    """Shared complex denominator of the dressed probe transition."""
    w = sys.transit_rate
    G21 = sys.gamma21 + w
    G31 = sys.gamma31 + w
    return (delta1 + 1j * G21) * (delta1 + delta2 + 1j * G31) - g2**2 / 4.0


def population_rho22(sys, g1, g2, delta1, delta2, rho11_init=1.0):
    w = sys.transit_rate
    G31 = sys.gamma31 + w
    G32 = sys.gamma32 + w
    G3 = sys.gamma3 + w
    A = _saturation_factor(sys, g2, delta2)
    D = _denominator(sys, g2, delta2)
    num = ((g2**2 / 4.0) * (1.0 - sys.W32 / G3) * (delta2 - 1j * G32)
           + A * (delta1 + delta2 + 1j * G31))
    frac = num / _probe_response(sys, g2, delta1, delta2)
    return -(g1**2 * rho11_init) / (2.0 * D) * np.imag(frac)


def population_rho33(sys, g1, g2, delta1, delta2, rho11_init=1.0):
    w = sys.transit_rate
    G31 = sys.gamma31 + w
    G32 = sys.gamma32 + w
    G3 = sys.gamma3 + w
    G2 = sys.gamma2 + w
    D = _denominator(sys, g2, delta2)
    num = -2.0 * G32 * (delta1 + delta2 + 1j * G31) + G2 * (delta2 - 1j * G32)
    frac = num / _probe_response(sys, g2, delta1, delta2)
    return (g1**2 * g2**2 * rho11_init) / (8.0 * D * G3) * np.imag(frac)
