"""Velocity detunings and Maxwellian quadrature."""

import numpy as np
import pytest

from eitmol.analytic import population_rho22
from eitmol.constants import SPEED_OF_LIGHT
from eitmol.doppler import (
    CO_PROPAGATING,
    COUNTER_PROPAGATING,
    GAUSS_HERMITE,
    Ensemble,
    QuadratureSpec,
    doppler_average,
    quadrature_nodes,
    two_photon_velocity,
    velocity_detunings,
)
from eitmol.errors import QuadratureNotConverged
from eitmol.system import CascadeSystem
from eitmol.units import angular_from_mhz, angular_from_wavenumber

OM1 = angular_from_wavenumber(15642.636)
OM2 = angular_from_wavenumber(17053.954)


def test_rest_frame_recovers_laser_detunings():
    d1, d2 = velocity_detunings(10.0, -20.0, OM1, OM2, 0.0,
                                COUNTER_PROPAGATING)
    assert d1 == 10.0 and d2 == -20.0


def test_counter_propagating_signs_and_ratio():
    d1, d2 = velocity_detunings(0.0, 0.0, OM1, OM2, 100.0,
                                COUNTER_PROPAGATING)
    assert d1 < 0 and d2 > 0
    assert abs(d1) / abs(d2) == pytest.approx(OM1 / OM2, rel=1e-12)


def test_co_propagating_flips_coupling_shift():
    _, d2_counter = velocity_detunings(0.0, 0.0, OM1, OM2, 100.0,
                                       COUNTER_PROPAGATING)
    _, d2_co = velocity_detunings(0.0, 0.0, OM1, OM2, 100.0, CO_PROPAGATING)
    assert d2_co == -d2_counter


def test_two_photon_velocity_zeroes_the_sum():
    delta1 = angular_from_mhz(420.0)
    delta2 = angular_from_mhz(-130.0)
    w1 = OM1 + delta1
    w2 = OM2 + delta2
    vz = two_photon_velocity(delta1, delta2, w1, w2)
    d1, d2 = velocity_detunings(delta1, delta2, w1, w2, vz,
                                COUNTER_PROPAGATING)
    assert abs(d1 + d2) <= 1e-9 * abs(delta1) + 1e-9


def test_full_form_keeps_detuning_recoil_term():
    # (1 - vz/c) delta1 on top of the main -vz/c omega shift
    delta1 = angular_from_mhz(500.0)
    vz = 800.0
    d1, _ = velocity_detunings(delta1, 0.0, OM1 + delta1, OM2, vz,
                               COUNTER_PROPAGATING)
    beta = vz / SPEED_OF_LIGHT
    assert d1 == pytest.approx((1 - beta) * delta1 - beta * OM1, rel=1e-14)


def test_most_probable_speed():
    ens = Ensemble(temperature_k=1000.0, mass_amu=14.0)
    assert ens.u_p == pytest.approx(1089.85, rel=1e-4)


def test_ensemble_from_measured_width():
    ens = Ensemble.from_doppler_fwhm(2600.0, 15642.636)
    # FWHM = 2 sqrt(ln 2) k u_p: invert and check round trip
    k = 2 * np.pi * 100.0 * 15642.636
    fwhm = 2 * np.sqrt(np.log(2)) * k * ens.u_p / (2 * np.pi * 1e6)
    assert fwhm == pytest.approx(2600.0, rel=1e-12)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(node_count=50)       # even
    with pytest.raises(ValueError):
        QuadratureSpec(node_count=31)       # too few
    with pytest.raises(ValueError):
        QuadratureSpec(scheme="simpson")


def test_weights_normalized(li2_ensemble):
    for spec in (QuadratureSpec(node_count=201),
                 QuadratureSpec(scheme=GAUSS_HERMITE, node_count=64)):
        _, w = quadrature_nodes(li2_ensemble, spec)
        assert np.sum(w) == pytest.approx(1.0, abs=1e-14)


def test_average_of_unity(li2_ensemble):
    q = QuadratureSpec(node_count=201)
    assert doppler_average(lambda v: np.ones_like(v), li2_ensemble, q) \
        == pytest.approx(1.0, abs=1e-8)


def test_average_of_odd_observable_vanishes(li2_ensemble):
    q = QuadratureSpec(node_count=201)
    avg = doppler_average(lambda v: v, li2_ensemble, q)
    assert abs(avg) <= 1e-8 * li2_ensemble.u_p


def test_scalar_observable_supported(li2_ensemble):
    q = QuadratureSpec(node_count=51)
    avg = doppler_average(lambda v: float(v) ** 2, li2_ensemble, q)
    assert avg == pytest.approx(0.5 * li2_ensemble.u_p**2, rel=1e-3)


def test_doppler_dominated_profile_is_gaussian(li2_ensemble):
    """Two-level line with gamma << k u_p: averaged profile has the pure
    Doppler FWHM 2 sqrt(ln 2) k u_p within 2%."""
    # gamma/(k u_p) ~ 0.01: Doppler dominated, but the Lorentzian core is
    # still wider than the velocity node spacing so the quadrature resolves it
    sys = CascadeSystem(omega21_cm=15642.636, omega32_cm=17053.954,
                        gamma2=120.0, gamma3=120.0, b2=0.1, b3=0.2,
                        transit_rate=12.0, refill_rate=12.0,
                        J1=15, J2=14, J3=14)
    k1 = OM1 / SPEED_OF_LIGHT
    q = QuadratureSpec(node_count=4001)
    deltas = np.linspace(-3.0, 3.0, 121) * k1 * li2_ensemble.u_p

    def profile(delta1):
        def obs(vz):
            d1 = delta1 - (vz / SPEED_OF_LIGHT) * (OM1 + delta1)
            return population_rho22(sys, 0.01, 0.0, d1, 0.0, 1.0)
        return doppler_average(obs, li2_ensemble, q)

    signal = np.array([profile(d) for d in deltas])
    half = signal.max() / 2.0
    above = np.where(signal >= half)[0]
    i, j = above[0], above[-1]
    left = np.interp(half, [signal[i - 1], signal[i]], [deltas[i - 1], deltas[i]])
    right = np.interp(half, [signal[j + 1], signal[j]], [deltas[j + 1], deltas[j]])
    expected = 2.0 * np.sqrt(np.log(2.0)) * k1 * li2_ensemble.u_p
    assert right - left == pytest.approx(expected, rel=0.02)


def test_unresolved_feature_raises(li2_ensemble):
    """A Lorentzian far narrower than the node spacing must be rejected."""
    width = 0.05 * li2_ensemble.u_p / 100.0  # ~0.5 m/s

    def razor(vz):
        return width**2 / (vz**2 + width**2)

    q = QuadratureSpec(node_count=51)
    with pytest.raises(QuadratureNotConverged):
        doppler_average(razor, li2_ensemble, q)


def test_nonfinite_observable_rejected(li2_ensemble):
    q = QuadratureSpec(node_count=51)
    with np.errstate(invalid="ignore"), pytest.raises(ValueError):
        doppler_average(lambda v: v / v, li2_ensemble, q)  # NaN at vz = 0
