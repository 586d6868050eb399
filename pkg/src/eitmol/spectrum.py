"""Fluorescence lineshape scan engine.

For each probe detuning delta1 the reported signal of level i is

    signal_i(delta1, delta2) = sum_|M| multiplicity(|M|) *
        integral rho_ii(D1(vz), D2(vz); g1(|M|), g2(|M|)) N(vz) dvz

i.e. the per-channel steady-state population, Doppler averaged, then summed
over magnetic sublevel channels.  Signals are non-normalized (arbitrary
units); an overall scale is left to the fitting layer.

Determinism: the grid is processed in fixed-size chunks whose boundaries do
not depend on the thread count, every velocity reduction runs in fixed index
order with compensated summation, and the channel sum runs in ascending-|M|
order, so outputs are bit-identical for any ``threads`` value.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analytic import population_rho22, population_rho33
from .bloch import populations_grid
from .doppler import (
    CO_PROPAGATING,
    GAUSS_HERMITE,
    TRAPEZOID,
    Ensemble,
    QuadratureSpec,
    compensated_weighted_sum,
    maxwellian_trapezoid_weights,
    quadrature_nodes,
    velocity_detunings,
)
from .errors import QuadratureNotConverged
from .sublevels import ChannelSet
from .system import CascadeSystem, LaserPair
from .units import angular_from_mhz

ENGINE_ANALYTIC = "analytic"
ENGINE_ORACLE = "oracle"

RHO22 = "rho22"
RHO33 = "rho33"

_CHUNK = 32  # delta1 points per work unit; fixed so threading cannot reorder math


@dataclass(frozen=True, eq=False)
class ScanConfig:
    """Probe-detuning scan description (detunings in cyclic MHz)."""

    delta1_mhz: np.ndarray
    delta2_mhz: float = 0.0
    channels: tuple = (RHO22, RHO33)
    doppler_on: bool = True
    m_sum_on: bool = True
    engine: str = ENGINE_ANALYTIC
    verify_quadrature: bool = True
    feature_resolution_mhz: float | None = None

    def __post_init__(self):
        grid = np.asarray(self.delta1_mhz, float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("delta1 grid must be a 1-D array of >= 2 points")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("delta1 grid must be strictly increasing")
        object.__setattr__(self, "delta1_mhz", grid)
        if not self.channels or not set(self.channels) <= {RHO22, RHO33}:
            raise ValueError("channels must be a non-empty subset of"
                             " {rho22, rho33}")
        if self.engine not in (ENGINE_ANALYTIC, ENGINE_ORACLE):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.feature_resolution_mhz is not None:
            if np.max(np.diff(grid)) > self.feature_resolution_mhz:
                raise ValueError("grid spacing exceeds the requested feature"
                                 " resolution")


@dataclass(eq=False)
class Spectrum:
    """Signals on the probe-detuning grid plus a full parameter echo."""

    delta1_mhz: np.ndarray
    signal_rho22: np.ndarray
    signal_rho33: np.ndarray
    metadata: dict = field(default_factory=dict)

    def signal(self, channel: str) -> np.ndarray:
        if channel == RHO22:
            return self.signal_rho22
        if channel == RHO33:
            return self.signal_rho33
        raise KeyError(channel)


def simulate(sys: CascadeSystem, lasers: LaserPair, ensemble: Ensemble | None,
             channelset: ChannelSet, scan: ScanConfig,
             quadrature: QuadratureSpec | None = None,
             threads: int = 1) -> Spectrum:
    """Run the scan and return the |M|-summed spectrum."""
    quadrature = quadrature or QuadratureSpec()
    channels = _active_channels(channelset, scan)
    per = _per_channel_spectra(sys, ensemble, channels, scan, quadrature,
                               threads)
    n = scan.delta1_mhz.size
    coarse = {RHO22: np.zeros(n), RHO33: np.zeros(n)}
    fine = {RHO22: np.zeros(n), RHO33: np.zeros(n)} if per.verified else None
    for i, ch in enumerate(channels):
        for sig in scan.channels:
            coarse[sig] += ch.multiplicity * per.coarse[sig][i]
            if fine is not None:
                fine[sig] += ch.multiplicity * per.fine[sig][i]
    shift = _check_refinement(coarse, fine, scan, quadrature)
    meta = _metadata(sys, lasers, ensemble, channelset, scan, quadrature,
                     shift)
    return Spectrum(
        delta1_mhz=scan.delta1_mhz.copy(),
        signal_rho22=_finalize(coarse[RHO22]),
        signal_rho33=_finalize(coarse[RHO33]),
        metadata=meta,
    )


def per_m_components(sys: CascadeSystem, lasers: LaserPair,
                     ensemble: Ensemble | None, channelset: ChannelSet,
                     scan: ScanConfig,
                     quadrature: QuadratureSpec | None = None,
                     threads: int = 1) -> list:
    """Per-|M| spectra (multiplicity applied) before the channel sum."""
    quadrature = quadrature or QuadratureSpec()
    channels = _active_channels(channelset, scan)
    per = _per_channel_spectra(sys, ensemble, channels, scan, quadrature,
                               threads)
    out = []
    for i, ch in enumerate(channels):
        coarse = {sig: ch.multiplicity * per.coarse[sig][i]
                  for sig in (RHO22, RHO33) if sig in scan.channels}
        fine = None
        if per.verified:
            fine = {sig: ch.multiplicity * per.fine[sig][i]
                    for sig in coarse}
        for sig in (RHO22, RHO33):
            coarse.setdefault(sig, np.zeros(scan.delta1_mhz.size))
        shift = _check_refinement(coarse, fine, scan, quadrature)
        meta = _metadata(sys, lasers, ensemble, channelset, scan, quadrature,
                         shift)
        meta["component.abs_m"] = ch.abs_m
        meta["component.multiplicity"] = ch.multiplicity
        out.append(Spectrum(
            delta1_mhz=scan.delta1_mhz.copy(),
            signal_rho22=_finalize(coarse[RHO22]),
            signal_rho33=_finalize(coarse[RHO33]),
            metadata=meta,
        ))
    return out


# engine internals -----------------------------------------------------------

class _PerChannel:
    def __init__(self, n_channels, n_grid, verified):
        self.coarse = {RHO22: [np.zeros(n_grid) for _ in range(n_channels)],
                       RHO33: [np.zeros(n_grid) for _ in range(n_channels)]}
        self.fine = {RHO22: [np.zeros(n_grid) for _ in range(n_channels)],
                     RHO33: [np.zeros(n_grid) for _ in range(n_channels)]}
        self.verified = verified


def _active_channels(channelset: ChannelSet, scan: ScanConfig):
    if scan.m_sum_on:
        return list(channelset.channels)
    return [channelset.bare_channel()]


def _populations(sys, engine, g1, g2, d1, d2, rho11_init, wanted):
    if engine == ENGINE_ORACLE:
        return populations_grid(sys, g1, g2, d1, d2, rho11_init)
    r22 = population_rho22(sys, g1, g2, d1, d2, rho11_init) \
        if RHO22 in wanted else None
    r33 = population_rho33(sys, g1, g2, d1, d2, rho11_init) \
        if RHO33 in wanted else None
    return r22, r33


def _per_channel_spectra(sys, ensemble, channels, scan, quadrature, threads):
    if scan.doppler_on and ensemble is None:
        raise ValueError("doppler_on scan requires an Ensemble")
    n = scan.delta1_mhz.size
    verified = scan.doppler_on and scan.verify_quadrature
    per = _PerChannel(len(channels), n, verified)
    rho11_init = sys.rho11_init

    nodes = _node_plan(ensemble, quadrature, verified) if scan.doppler_on \
        else None
    chunks = [(lo, min(lo + _CHUNK, n)) for lo in range(0, n, _CHUNK)]

    def work(bounds):
        lo, hi = bounds
        d1_mhz = scan.delta1_mhz[lo:hi]
        if scan.doppler_on:
            res = _doppler_chunk(sys, ensemble, channels, scan, nodes,
                                 d1_mhz, rho11_init)
        else:
            res = _rest_frame_chunk(sys, channels, scan, d1_mhz, rho11_init)
        for sig in scan.channels:
            for i in range(len(channels)):
                per.coarse[sig][i][lo:hi] = res[0][sig][i]
                if verified:
                    per.fine[sig][i][lo:hi] = res[1][sig][i]

    if threads <= 1:
        for c in chunks:
            work(c)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, chunks))
    return per


def _node_plan(ensemble, quadrature, verified):
    """Evaluation nodes plus (slice, weights) for the coarse and fine rules.

    For the trapezoid rule the coarse nodes are every second node of the
    doubled rule, so one integrand evaluation serves both.
    """
    if not verified:
        vz, w = quadrature_nodes(ensemble, quadrature)
        return vz, (slice(None), w), None
    if quadrature.scheme == TRAPEZOID:
        vz_f, w_f = quadrature_nodes(ensemble, quadrature.doubled())
        vz_c = vz_f[::2]
        w_c = maxwellian_trapezoid_weights(vz_c, ensemble)
        return vz_f, (slice(None, None, 2), w_c), (slice(None), w_f)
    vz_c, w_c = quadrature_nodes(ensemble, quadrature)
    vz_f, w_f = quadrature_nodes(ensemble, quadrature.doubled())
    vz = np.concatenate([vz_c, vz_f])
    return vz, (slice(0, vz_c.size), w_c), (slice(vz_c.size, None), w_f)


def _doppler_chunk(sys, ensemble, channels, scan, nodes, d1_mhz, rho11_init):
    vz, coarse_rule, fine_rule = nodes
    d1 = angular_from_mhz(d1_mhz)[:, None]
    d2 = angular_from_mhz(scan.delta2_mhz)
    omega1 = sys.omega21_angular + d1
    omega2 = sys.omega32_angular + d2
    geometry = ensemble.geometry if ensemble is not None else CO_PROPAGATING
    big_d1, big_d2 = velocity_detunings(d1, d2, omega1, omega2, vz[None, :],
                                        geometry)
    stacks = {RHO22: [], RHO33: []}
    for ch in channels:
        r22, r33 = _populations(sys, scan.engine, ch.g1, ch.g2, big_d1,
                                big_d2, rho11_init, scan.channels)
        if r22 is not None:
            stacks[RHO22].append(r22)
        if r33 is not None:
            stacks[RHO33].append(r33)
    coarse = {}
    fine = {}
    for sig in scan.channels:
        vals = np.stack(stacks[sig])            # (channels, grid, nodes)
        sl, w = coarse_rule
        coarse[sig] = compensated_weighted_sum(vals[..., sl], w)
        if fine_rule is not None:
            sl, w = fine_rule
            fine[sig] = compensated_weighted_sum(vals[..., sl], w)
    return coarse, fine


def _rest_frame_chunk(sys, channels, scan, d1_mhz, rho11_init):
    d1 = angular_from_mhz(d1_mhz)
    d2 = angular_from_mhz(scan.delta2_mhz)
    coarse = {RHO22: [], RHO33: []}
    for ch in channels:
        r22, r33 = _populations(sys, scan.engine, ch.g1, ch.g2, d1, d2,
                                rho11_init, scan.channels)
        if r22 is not None:
            coarse[RHO22].append(r22)
        if r33 is not None:
            coarse[RHO33].append(r33)
    return coarse, None


def _check_refinement(coarse, fine, scan, quadrature):
    """Largest relative move of any reported point on node doubling."""
    if fine is None:
        return None
    worst = 0.0
    for sig in scan.channels:
        peak = float(np.max(np.abs(coarse[sig])))
        if peak == 0.0:
            continue
        shift = float(np.max(np.abs(fine[sig] - coarse[sig]))) / peak
        worst = max(worst, shift)
    if worst > quadrature.refinement_tolerance:
        raise QuadratureNotConverged(
            f"spectrum moved by {worst:.3e} of peak on node doubling;"
            f" increase node_count above {quadrature.node_count}")
    return worst


def _finalize(signal):
    """Clip negative rounding noise; genuine negatives indicate a bug."""
    floor = -1e-12 * max(float(np.max(np.abs(signal))), np.finfo(float).tiny)
    if float(np.min(signal)) < floor:
        raise RuntimeError("negative population signal beyond rounding noise")
    return np.clip(signal, 0.0, None)


def _metadata(sys, lasers, ensemble, channelset, scan, quadrature, shift):
    meta = {
        "package": f"eitmol {__version__}",
        "engine": scan.engine,
        "system.omega21_cm": sys.omega21_cm,
        "system.omega32_cm": sys.omega32_cm,
        "system.gamma2_Mrad_s": sys.gamma2,
        "system.gamma3_Mrad_s": sys.gamma3,
        "system.b2": sys.b2,
        "system.b3": sys.b3,
        "system.gamma12_col_Mrad_s": sys.gamma12_col,
        "system.gamma13_col_Mrad_s": sys.gamma13_col,
        "system.gamma23_col_Mrad_s": sys.gamma23_col,
        "system.transit_rate_Mrad_s": sys.transit_rate,
        "system.refill_rate_Mrad_s": sys.refill_rate,
        "system.J": f"{sys.J1},{sys.J2},{sys.J3}",
        "system.branches": f"{sys.branch_probe},{sys.branch_coupling}",
        "scan.delta2_MHz": scan.delta2_mhz,
        "scan.points": int(scan.delta1_mhz.size),
        "scan.delta1_min_MHz": float(scan.delta1_mhz[0]),
        "scan.delta1_max_MHz": float(scan.delta1_mhz[-1]),
        "scan.channels": ",".join(scan.channels),
        "scan.doppler_on": scan.doppler_on,
        "scan.m_sum_on": scan.m_sum_on,
        "channels.count": len(channelset),
        "channels.probe_coupled": channelset.probe_coupled_count,
        "channels.coupling_coupled": channelset.coupling_coupled_count,
        "channels.g1_bare_Mrad_s": channelset.g1_bare,
        "channels.g2_bare_Mrad_s": channelset.g2_bare,
        "quadrature.scheme": quadrature.scheme,
        "quadrature.node_count": quadrature.node_count,
        "quadrature.span_u_p": quadrature.span,
        "quadrature.refinement_tolerance": quadrature.refinement_tolerance,
        "quadrature.max_refinement_shift": shift,
        "quadrature.verified": shift is not None,
    }
    if lasers is not None:
        meta["lasers.omega_probe_cm"] = lasers.omega_probe_cm
        meta["lasers.omega_coupling_cm"] = lasers.omega_coupling_cm
        meta["lasers.power_probe_W"] = lasers.power_probe_w
        meta["lasers.power_coupling_W"] = lasers.power_coupling_w
        meta["lasers.waist_probe_m"] = lasers.waist_probe_m
        meta["lasers.waist_coupling_m"] = lasers.waist_coupling_m
    if ensemble is not None:
        meta["ensemble.temperature_K"] = ensemble.temperature_k
        meta["ensemble.mass_amu"] = ensemble.mass_amu
        meta["ensemble.geometry"] = ensemble.geometry
        meta["ensemble.u_p_m_s"] = ensemble.u_p
    return meta


# serialization ---------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _plain(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def spectrum_csv_text(spec: Spectrum) -> str:
    lines = ["# eitmol spectrum"]
    for key in sorted(spec.metadata):
        lines.append(f"# {key} = {_plain(spec.metadata[key])}")
    lines.append("delta1_MHz,rho22_au,rho33_au")
    for x, a, b in zip(spec.delta1_mhz, spec.signal_rho22, spec.signal_rho33):
        lines.append(f"{_fmt(x)},{_fmt(a)},{_fmt(b)}")
    return "\n".join(lines) + "\n"


def spectrum_json_dict(spec: Spectrum) -> dict:
    return {
        "metadata": {k: _plain(spec.metadata[k]) for k in sorted(spec.metadata)},
        "delta1_MHz": [float(_fmt(x)) for x in spec.delta1_mhz],
        "rho22_au": [float(_fmt(x)) for x in spec.signal_rho22],
        "rho33_au": [float(_fmt(x)) for x in spec.signal_rho33],
    }


def write_spectrum(spec: Spectrum, csv_path, json_path=None) -> None:
    import json

    with open(csv_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(spectrum_csv_text(spec))
    if json_path is not None:
        with open(json_path, "w", encoding="ascii", newline="\n") as fh:
            json.dump(spectrum_json_dict(spec), fh, indent=1, sort_keys=True)
            fh.write("\n")
