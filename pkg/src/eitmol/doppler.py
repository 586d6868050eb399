"""Velocity-class detunings and Maxwellian averaging.

For counter-propagating beams (probe to +z, coupling to -z) a molecule with
axial velocity vz sees

    D1(vz) = delta1 - (vz/c) * omega1_laser
    D2(vz) = delta2 + (vz/c) * omega2_laser

which, with omega_laser = omega_transition + delta, is the full form that
keeps the (1 -+ vz/c) factor on the detunings.  A co-propagating coupling
beam flips the sign of the vz term in D2.

Observables are averaged over the one-dimensional Maxwellian

    N(vz) = exp(-(vz/u_p)^2) / (sqrt(pi) u_p),   u_p = sqrt(2 k T / m).

The default quadrature is a uniform trapezoid rule over +-span*u_p: the
integrand contains sub-natural-width coherence structures that defeat
low-order Gauss-Hermite, and for an analytic integrand the trapezoid rule is
spectrally accurate once the narrowest Lorentzian is resolved by the node
spacing.  Convergence is enforced, not assumed: every average is re-checked
on a doubled grid and rejected if it moved more than the refinement
tolerance.
"""

from dataclasses import dataclass
from math import log, pi, sqrt

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .constants import ATOMIC_MASS_KG, BOLTZMANN_K, SPEED_OF_LIGHT
from .errors import QuadratureNotConverged

TRAPEZOID = "uniform_trapezoid"
GAUSS_HERMITE = "gauss_hermite"

COUNTER_PROPAGATING = "counter_propagating"
CO_PROPAGATING = "co_propagating"


@dataclass(frozen=True)
class Ensemble:
    """Thermal ensemble; u_p may be overridden by a measured Doppler width."""

    temperature_k: float
    mass_amu: float
    geometry: str = COUNTER_PROPAGATING
    u_p_override: float | None = None

    def __post_init__(self):
        if self.geometry not in (COUNTER_PROPAGATING, CO_PROPAGATING):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.u_p_override is None and (self.temperature_k <= 0
                                          or self.mass_amu <= 0):
            raise ValueError("temperature and mass must be > 0")

    @property
    def u_p(self) -> float:
        """Most probable speed, m/s."""
        if self.u_p_override is not None:
            return self.u_p_override
        return sqrt(2.0 * BOLTZMANN_K * self.temperature_k
                    / (self.mass_amu * ATOMIC_MASS_KG))

    @classmethod
    def from_doppler_fwhm(cls, fwhm_mhz: float, omega_cm: float,
                          geometry: str = COUNTER_PROPAGATING) -> "Ensemble":
        """Set u_p from a measured Gaussian FWHM (cyclic MHz) at omega_cm."""
        k = 2.0 * pi * 100.0 * omega_cm  # rad/m
        u_p = 2.0 * pi * fwhm_mhz * 1e6 / (2.0 * sqrt(log(2.0)) * k)
        return cls(temperature_k=0.0, mass_amu=0.0, geometry=geometry,
                   u_p_override=u_p)


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: str = TRAPEZOID
    node_count: int = 4001
    span: float = 4.0                    # trapezoid half-width in units of u_p
    refinement_tolerance: float = 1e-4   # relative, against the peak value

    def __post_init__(self):
        if self.scheme not in (TRAPEZOID, GAUSS_HERMITE):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.scheme == TRAPEZOID:
            if self.node_count < 51 or self.node_count % 2 == 0:
                raise ValueError("trapezoid node_count must be odd and >= 51")
        elif self.node_count < 2:
            raise ValueError("node_count must be >= 2")
        if self.span <= 0 or self.refinement_tolerance <= 0:
            raise ValueError("span and refinement_tolerance must be > 0")

    def doubled(self) -> "QuadratureSpec":
        if self.scheme == TRAPEZOID:
            n = 2 * self.node_count - 1   # halves the step, keeps nodes odd
        else:
            n = 2 * self.node_count
        return QuadratureSpec(self.scheme, n, self.span,
                              self.refinement_tolerance)


def velocity_detunings(delta1, delta2, omega1, omega2, vz, geometry):
    """Effective detunings (Mrad/s) for velocity class vz (m/s).

    ``omega1``/``omega2`` are the angular *laser* frequencies; passing
    transition + detuning reproduces the full velocity-dependent form.
    """
    beta = np.asarray(vz) / SPEED_OF_LIGHT
    d1 = delta1 - beta * omega1
    if geometry == COUNTER_PROPAGATING:
        d2 = delta2 + beta * omega2
    elif geometry == CO_PROPAGATING:
        d2 = delta2 - beta * omega2
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    return d1, d2


def two_photon_velocity(delta1, delta2, omega1, omega2,
                        geometry=COUNTER_PROPAGATING):
    """Velocity class (m/s) where D1 + D2 = 0, from the full detuning form."""
    if geometry == COUNTER_PROPAGATING:
        denom = omega1 - omega2
    else:
        denom = omega1 + omega2
    return SPEED_OF_LIGHT * (delta1 + delta2) / denom


def maxwellian_trapezoid_weights(vz: np.ndarray, ens: Ensemble) -> np.ndarray:
    """Trapezoid weights folded with N(vz) on the given uniform nodes.

    Normalizing the discrete weights to sum to one removes the ~1e-8 tail
    truncation of the finite span, so a constant observable averages exactly
    to itself.
    """
    u = ens.u_p
    h = vz[1] - vz[0]
    w = np.full(vz.size, h)
    w[0] = w[-1] = 0.5 * h
    w *= np.exp(-((vz / u) ** 2)) / (sqrt(pi) * u)
    return w / compensated_sum(w)


def quadrature_nodes(ens: Ensemble, q: QuadratureSpec):
    """Velocity nodes and Maxwellian-folded weights, weights summing to 1."""
    u = ens.u_p
    if q.scheme == TRAPEZOID:
        vz = np.linspace(-q.span * u, q.span * u, q.node_count)
        return vz, maxwellian_trapezoid_weights(vz, ens)
    t, gw = hermgauss(q.node_count)
    vz = t * u
    w = gw / sqrt(pi)
    return vz, w / compensated_sum(w)


def compensated_sum(values: np.ndarray):
    """Kahan-compensated sum in fixed index order along the last axis."""
    values = np.asarray(values, float)
    total = np.zeros(values.shape[:-1])
    comp = np.zeros_like(total)
    for k in range(values.shape[-1]):
        term = values[..., k] - comp
        new = total + term
        comp = (new - total) - term
        total = new
    return total


def compensated_weighted_sum(values, weights):
    """sum(values * weights) along the last axis, compensated, fixed order.

    Vectorizes over leading axes; the accumulation order never depends on
    how callers chunk or thread the leading axes, so results are bit-stable.
    """
    values = np.asarray(values, float)
    weights = np.asarray(weights, float)
    total = np.zeros(values.shape[:-1])
    comp = np.zeros_like(total)
    for k in range(values.shape[-1]):
        term = values[..., k] * weights[k] - comp
        new = total + term
        comp = (new - total) - term
        total = new
    return total


def doppler_average(observable, ens: Ensemble, q: QuadratureSpec) -> float:
    """Maxwellian-weighted average of ``observable(vz)``.

    The value at ``q.node_count`` nodes is returned only after a doubled-node
    re-evaluation agrees within ``q.refinement_tolerance`` (relative to the
    larger magnitude); otherwise QuadratureNotConverged is raised, which
    signals that the node count is too low for the sharpest feature present.
    """
    coarse, _ = _average_once(observable, ens, q)
    fine, peak = _average_once(observable, ens, q.doubled())
    # averages much smaller than the integrand magnitude are cancellation
    # values; judge those against the integrand scale, not themselves
    scale = max(abs(coarse), abs(fine), 1e-3 * peak)
    if scale > 0 and abs(fine - coarse) > q.refinement_tolerance * scale:
        raise QuadratureNotConverged(
            f"average moved by {abs(fine - coarse) / scale:.3e} (relative) on"
            f" node doubling; increase node_count above {q.node_count}")
    return float(coarse)


def _average_once(observable, ens, q):
    vz, w = quadrature_nodes(ens, q)
    try:
        y = np.asarray(observable(vz), float)
        if y.shape != vz.shape:
            raise TypeError
    except (TypeError, ValueError):  # scalar-only observable
        y = np.array([float(observable(v)) for v in vz])
    if not np.all(np.isfinite(y)):
        raise ValueError("observable is not finite on the integration span")
    return float(compensated_weighted_sum(y, w)), float(np.max(np.abs(y)))
