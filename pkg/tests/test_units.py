import math

import pytest
from hypothesis import given, strategies as st

from eitmol import constants
from eitmol.errors import IncompatibleDimensions, NonPositiveWaist
from eitmol.units import (
    ANGULAR_MRADS,
    DIPOLE_AU,
    DIPOLE_CM,
    FREQUENCY_MHZ,
    POWER_W,
    TEMPERATURE_K,
    TIME_NS,
    WAVENUMBER_CM,
    Quantity,
    convert,
    field_amplitude,
    rabi_frequency,
    rate_from_lifetime_ns,
)


def test_wavenumber_to_mhz_definition_of_c():
    q = convert(Quantity(1.0, WAVENUMBER_CM), FREQUENCY_MHZ)
    assert q.value == pytest.approx(29979.2458, rel=1e-12)


def test_lifetime_to_decay_rate_is_inverse_lifetime():
    # 18 ns -> gamma = 1/tau = 55.5556 in the canonical angular unit
    q = convert(Quantity(18.0, TIME_NS), ANGULAR_MRADS)
    assert q.value == pytest.approx(1e3 / 18.0, rel=1e-12)
    assert rate_from_lifetime_ns(18.0) == pytest.approx(55.5556, rel=1e-5)
    # and back
    back = convert(q, TIME_NS)
    assert back.value == pytest.approx(18.0, rel=1e-12)


def test_mhz_to_angular_carries_two_pi():
    q = convert(Quantity(2.0, FREQUENCY_MHZ), ANGULAR_MRADS)
    assert q.value == pytest.approx(4.0 * math.pi, rel=1e-12)


def test_zero_converts_to_zero():
    for unit, target in [(WAVENUMBER_CM, FREQUENCY_MHZ),
                         (FREQUENCY_MHZ, ANGULAR_MRADS),
                         (DIPOLE_AU, DIPOLE_CM),
                         (POWER_W, POWER_W)]:
        assert convert(Quantity(0.0, unit), target).value == 0.0


def test_dipole_atomic_unit_value():
    q = convert(Quantity(1.0, DIPOLE_AU), DIPOLE_CM)
    assert q.value == 8.4783536e-30


def test_incompatible_dimensions_rejected():
    with pytest.raises(IncompatibleDimensions):
        convert(Quantity(1.0, POWER_W), TEMPERATURE_K)
    with pytest.raises(IncompatibleDimensions):
        convert(Quantity(1.0, WAVENUMBER_CM), POWER_W)
    with pytest.raises(IncompatibleDimensions):
        Quantity(1.0, "furlongs")


_SPECTROSCOPIC = [WAVENUMBER_CM, FREQUENCY_MHZ, ANGULAR_MRADS]


@given(value=st.floats(min_value=1e-6, max_value=1e6),
       src=st.sampled_from(_SPECTROSCOPIC + [TIME_NS]),
       dst=st.sampled_from(_SPECTROSCOPIC + [TIME_NS]))
def test_round_trip_property(value, src, dst):
    q = Quantity(value, src)
    back = convert(convert(q, dst), src)
    assert back.value == pytest.approx(value, rel=1e-12)


def test_field_amplitude_zero_power():
    assert field_amplitude(0.0, 360e-6) == 0.0


def test_field_amplitude_coupling_preset():
    # hand evaluation of I0 = 2P/(pi w0^2), E = sqrt(2 I0/(eps0 c))
    # for P = 0.48 W, w0 = 360 um gives 4.21491e4 V/m
    assert field_amplitude(0.48, 360e-6) == pytest.approx(4.21491e4, rel=1e-5)


def test_field_amplitude_square_root_power_law():
    e1 = field_amplitude(0.1, 300e-6)
    e4 = field_amplitude(0.4, 300e-6)
    assert e4 == pytest.approx(2.0 * e1, rel=1e-12)


def test_field_amplitude_monotonicity():
    assert field_amplitude(0.2, 300e-6) > field_amplitude(0.1, 300e-6)
    assert field_amplitude(0.1, 400e-6) < field_amplitude(0.1, 300e-6)


def test_field_amplitude_domain_errors():
    with pytest.raises(NonPositiveWaist):
        field_amplitude(0.1, 0.0)
    with pytest.raises(ValueError):
        field_amplitude(-0.1, 300e-6)


def test_rabi_frequency_scale():
    # 1 a.u. dipole in a 1e4 V/m field
    expected = 8.4783536e-30 * 1e4 / constants.HBAR / 1e6
    assert rabi_frequency(1.0, 1e4) == pytest.approx(expected, rel=1e-12)


def test_constants_table_file_matches_module():
    text = constants.shipped_constants_text()
    assert text == constants.constants_table_text()
    table = {}
    for line in text.splitlines():
        if line.startswith("#"):
            continue
        name, value, _unit = line.split()
        table[name] = float(value)
    assert table["speed_of_light"] == constants.SPEED_OF_LIGHT
    assert table["hbar"] == constants.HBAR
    assert table["dipole_atomic_unit"] == constants.DIPOLE_AU_CM
    assert table["wavenumber_to_MHz"] == constants.WAVENUMBER_TO_MHZ
