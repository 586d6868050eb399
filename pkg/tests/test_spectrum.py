"""Scan engine behavior, engine cross-checks, and serialization."""

import json

import numpy as np
import pytest

from eitmol.errors import FewerThanTwoPeaks
from eitmol.features import extract_features, profile_fwhm
from eitmol.spectrum import (
    ScanConfig,
    per_m_components,
    simulate,
    spectrum_csv_text,
    spectrum_json_dict,
    write_spectrum,
)
from eitmol.sublevels import build_channels
from eitmol.doppler import QuadratureSpec


def scan(grid, **kw):
    return ScanConfig(delta1_mhz=np.asarray(grid, float), **kw)


def weak_probe_channels(li2, li2_lasers, mu_coupling=1.45):
    """Channel set with the probe scaled deep into the weak-probe regime."""
    return build_channels(li2, 1e-5, mu_coupling, li2_lasers.field_probe,
                          li2_lasers.field_coupling)


def test_grid_must_increase():
    with pytest.raises(ValueError):
        scan([0.0, -1.0, 1.0])
    with pytest.raises(ValueError):
        scan([0.0, 1.0], channels=("rho44",))
    with pytest.raises(ValueError):
        scan([0.0, 1.0], engine="magic")


def test_coupling_off_gives_doppler_profile_and_dark_upper_level(
        li2, li2_lasers, li2_ensemble, fast_quadrature):
    cs = build_channels(li2, 1.0, 1.45, li2_lasers.field_probe, 0.0)
    sp = simulate(li2, li2_lasers, li2_ensemble, cs,
                  scan(np.linspace(-3000, 3000, 241)),
                  quadrature=fast_quadrature)
    assert np.all(sp.signal_rho33 == 0.0)
    # single smooth Doppler-dominated profile, peaked at line center
    with pytest.raises(FewerThanTwoPeaks):
        extract_features(sp, "rho22")
    pos, fwhm = profile_fwhm(sp.delta1_mhz, sp.signal_rho22)
    assert pos == pytest.approx(0.0, abs=15.0)
    assert 2000.0 < fwhm < 3600.0


def test_weak_coupling_single_oodr_peak(li2, li2_lasers, li2_ensemble,
                                        fast_quadrature):
    cs = build_channels(li2, 1.0, 1.45, li2_lasers.field_probe,
                        li2_lasers.field_coupling * np.sqrt(0.001 / 0.48))
    sp = simulate(li2, li2_lasers, li2_ensemble, cs,
                  scan(np.linspace(-1200, 1200, 301), channels=("rho33",)),
                  quadrature=fast_quadrature)
    with pytest.raises(FewerThanTwoPeaks):
        extract_features(sp, "rho33")
    pos, fwhm = profile_fwhm(sp.delta1_mhz, sp.signal_rho33)
    assert pos == pytest.approx(0.0, abs=10.0)
    assert fwhm < 400.0  # far below the Doppler width: velocity selective


def test_strong_coupling_dip_and_splitting(li2, li2_lasers, li2_ensemble,
                                           li2_channels, fast_quadrature):
    sp = simulate(li2, li2_lasers, li2_ensemble, li2_channels,
                  scan(np.linspace(-3000, 3000, 601)),
                  quadrature=fast_quadrature)
    f22 = extract_features(sp, "rho22")
    assert f22.dip_position == pytest.approx(0.0, abs=15.0)
    assert f22.dip_depth_fraction > 0.3
    f33 = extract_features(sp, "rho33")
    assert f33.at_splitting > 100.0


def test_single_channel_autler_townes_splitting_matches_rabi(li2,
                                                             li2_channels):
    """Doppler-free, strongest |M| channel: splitting ~ g2 within 10%."""
    from eitmol.sublevels import ChannelSet

    ch = li2_channels.channel(14)
    assert ch.g2 > 10.0 * li2.gamma32  # strong-coupling regime
    one = ChannelSet(channels=(ch,), g1_bare=li2_channels.g1_bare,
                     g2_bare=li2_channels.g2_bare)
    g2_mhz = ch.g2 / (2.0 * np.pi)
    grid = np.linspace(-1.5 * g2_mhz, 1.5 * g2_mhz, 1501)
    sp = simulate(li2, None, None, one, scan(grid, doppler_on=False,
                                             channels=("rho33",)))
    f = extract_features(sp, "rho33")
    assert f.at_splitting == pytest.approx(g2_mhz, rel=0.10)


def test_components_sum_to_simulated_spectrum(li2, li2_lasers, li2_ensemble,
                                              li2_channels):
    q = QuadratureSpec(node_count=501, refinement_tolerance=1.0)
    grid = np.linspace(-800, 800, 81)
    sp = simulate(li2, li2_lasers, li2_ensemble, li2_channels, scan(grid),
                  quadrature=q)
    comps = per_m_components(li2, li2_lasers, li2_ensemble, li2_channels,
                             scan(grid), quadrature=q)
    assert len(comps) == 15
    total22 = np.zeros_like(grid)
    total33 = np.zeros_like(grid)
    for c in comps:
        total22 += c.signal_rho22
        total33 += c.signal_rho33
    assert np.allclose(total22, sp.signal_rho22, rtol=1e-12, atol=0)
    assert np.allclose(total33, sp.signal_rho33, rtol=1e-12, atol=0)


def test_components_metadata_and_upper_level_count(li2, li2_lasers,
                                                   li2_ensemble,
                                                   li2_channels):
    q = QuadratureSpec(node_count=501, refinement_tolerance=1.0)
    grid = np.linspace(-600, 200, 41)
    comps = per_m_components(li2, li2_lasers, li2_ensemble, li2_channels,
                             scan(grid, delta2_mhz=420.0), quadrature=q)
    ms = [c.metadata["component.abs_m"] for c in comps]
    assert ms == list(range(15))
    nonzero33 = [c for c in comps if c.signal_rho33.max() > 0]
    assert len(nonzero33) == 14


def test_engines_agree_in_weak_probe_regime(li2, li2_lasers):
    """Analytic vs direct-solve engine on a 50-point scan, Doppler free."""
    cs = weak_probe_channels(li2, li2_lasers)
    grid = np.linspace(-1500.0, 1500.0, 50)
    sc_a = scan(grid, doppler_on=False)
    sc_o = scan(grid, doppler_on=False, engine="oracle")
    a = simulate(li2, li2_lasers, None, cs, sc_a)
    o = simulate(li2, li2_lasers, None, cs, sc_o)
    for channel in ("rho22", "rho33"):
        ya, yo = a.signal(channel), o.signal(channel)
        assert np.max(np.abs(ya - yo) / np.abs(yo)) <= 1e-3


def test_oracle_engine_with_doppler_average(li2, li2_lasers, li2_ensemble):
    cs = weak_probe_channels(li2, li2_lasers)
    grid = np.linspace(-200.0, 200.0, 5)
    q = QuadratureSpec(node_count=301, refinement_tolerance=1.0)
    sc_a = scan(grid, verify_quadrature=False)
    sc_o = scan(grid, verify_quadrature=False, engine="oracle")
    a = simulate(li2, li2_lasers, li2_ensemble, cs, sc_a, quadrature=q)
    o = simulate(li2, li2_lasers, li2_ensemble, cs, sc_o, quadrature=q)
    assert np.max(np.abs(a.signal_rho22 - o.signal_rho22)
                  / np.abs(o.signal_rho22)) <= 1e-3


def test_threads_do_not_change_bytes(li2, li2_lasers, li2_ensemble,
                                     li2_channels, fast_quadrature):
    grid = np.linspace(-500, 500, 101)
    kw = dict(quadrature=fast_quadrature)
    s1 = simulate(li2, li2_lasers, li2_ensemble, li2_channels, scan(grid),
                  threads=1, **kw)
    s8 = simulate(li2, li2_lasers, li2_ensemble, li2_channels, scan(grid),
                  threads=8, **kw)
    assert spectrum_csv_text(s1) == spectrum_csv_text(s8)
    assert np.array_equal(s1.signal_rho22, s8.signal_rho22)
    assert np.array_equal(s1.signal_rho33, s8.signal_rho33)


def test_csv_and_json_round_trip(tmp_path, li2, li2_lasers, li2_channels):
    sp = simulate(li2, li2_lasers, None, li2_channels,
                  scan(np.linspace(-100, 100, 11), doppler_on=False))
    csv_path = tmp_path / "spec.csv"
    json_path = tmp_path / "spec.json"
    write_spectrum(sp, csv_path, json_path)

    text = csv_path.read_text()
    header_end = text.index("delta1_MHz,rho22_au,rho33_au")
    assert "# engine = analytic" in text[:header_end]
    assert "# system.omega21_cm = 15642.636" in text[:header_end]
    rows = [r for r in text[header_end:].splitlines()[1:] if r]
    assert len(rows) == 11
    parsed = np.array([[float(v) for v in r.split(",")] for r in rows])
    assert np.allclose(parsed[:, 0], sp.delta1_mhz, rtol=1e-11)
    assert np.allclose(parsed[:, 1], sp.signal_rho22, rtol=1e-11)

    blob = json.loads(json_path.read_text())
    assert blob["metadata"]["engine"] == "analytic"
    assert np.allclose(blob["rho22_au"], sp.signal_rho22, rtol=1e-11)
    # 12-significant-digit fixed formatting, stable across writes
    assert spectrum_csv_text(sp) == spectrum_csv_text(sp)


def test_requested_channel_subset(li2, li2_lasers, li2_channels):
    sp = simulate(li2, li2_lasers, None, li2_channels,
                  scan(np.linspace(-100, 100, 11), doppler_on=False,
                       channels=("rho33",)))
    assert np.all(sp.signal_rho22 == 0.0)
    assert sp.signal_rho33.max() > 0.0


def test_metadata_echoes_parameters(li2, li2_lasers, li2_ensemble,
                                    li2_channels, fast_quadrature):
    sp = simulate(li2, li2_lasers, li2_ensemble, li2_channels,
                  scan(np.linspace(-50, 50, 5)), quadrature=fast_quadrature)
    md = sp.metadata
    assert md["system.gamma2_Mrad_s"] == li2.gamma2
    assert md["lasers.power_coupling_W"] == 0.48
    assert md["channels.probe_coupled"] == 29
    assert md["quadrature.node_count"] == fast_quadrature.node_count
    assert md["quadrature.verified"] is True
    assert md["quadrature.max_refinement_shift"] <= 1e-4
