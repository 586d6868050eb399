"""Command-line interface.

Subcommands: simulate, components, fit, dip, oracle-check.  Exit codes:
0 success, 2 configuration/input error, 3 numeric non-convergence,
4 fit non-convergence.  ``--json-errors`` switches error reporting to a
machine-readable JSON object on stderr.
"""

import argparse
import json
import os
import sys as _sys

import numpy as np

from . import __version__
from .analytic import population_rho22, population_rho33
from .bloch import populations_grid
from .config import available_presets, load_config, load_spectrum
from .errors import (
    EitmolError,
    ParseError,
    QuadratureNotConverged,
    SingularSystem,
    UnitError,
    ValidationError,
)
from .features import predict_dip_position
from .fitting import FitProblem, fit, fit_report_dict, model_spectrum
from .spectrum import ScanConfig, per_m_components, simulate, write_spectrum
from .sublevels import build_channels

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_FIT = 4

ORACLE_CHECK_TOL = 1e-4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eitmol",
        description="Steady-state EIT / dark-fluorescence lineshape engine"
                    " for Doppler-broadened cascade molecular systems.")
    parser.add_argument("--version", action="version",
                        version=f"eitmol {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="config file path or preset name"
                             f" ({', '.join(available_presets())})")
    common.add_argument("--json-errors", action="store_true",
                        help="report errors as JSON on stderr")

    engine = argparse.ArgumentParser(add_help=False)
    engine.add_argument("--engine", choices=("analytic", "oracle"),
                        help="override the scan engine")
    engine.add_argument("--threads", type=int, default=1,
                        help="worker threads for the scan (default 1)")
    engine.add_argument("--out", help="output directory (default from config)")

    p = sub.add_parser("simulate", parents=[common, engine],
                       help="write the simulated spectrum as CSV + JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("components", parents=[common, engine],
                       help="write one spectrum per |M| channel")
    p.set_defaults(func=cmd_components)

    p = sub.add_parser("fit", parents=[common, engine],
                       help="fit free parameters to a measured spectrum")
    p.add_argument("--data", required=True, help="measured spectrum file")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("dip", parents=[common],
                       help="print the predicted dip position")
    p.set_defaults(func=cmd_dip)

    p = sub.add_parser("oracle-check", parents=[common],
                       help="compare analytic populations against the exact"
                            " steady-state solve")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, UnitError, OSError) as exc:
        return _report(exc, EXIT_CONFIG, args)
    except (QuadratureNotConverged, SingularSystem) as exc:
        return _report(exc, EXIT_NUMERIC, args)
    except EitmolError as exc:
        return _report(exc, EXIT_NUMERIC, args)


def _report(exc, code, args):
    if getattr(args, "json_errors", False):
        payload = {"error": type(exc).__name__, "message": str(exc),
                   "exit_code": code}
        print(json.dumps(payload), file=_sys.stderr)
    else:
        print(f"eitmol: error: {exc}", file=_sys.stderr)
    return code


def _prepare(args):
    cfg = load_config(args.config)
    scan = cfg.scan
    if getattr(args, "engine", None):
        scan = ScanConfig(
            delta1_mhz=scan.delta1_mhz,
            delta2_mhz=scan.delta2_mhz,
            channels=scan.channels,
            doppler_on=scan.doppler_on,
            m_sum_on=scan.m_sum_on,
            engine=args.engine,
            verify_quadrature=scan.verify_quadrature,
            feature_resolution_mhz=scan.feature_resolution_mhz,
        )
    channelset = build_channels(cfg.system, cfg.mu_probe_au,
                                cfg.mu_coupling_au, cfg.lasers.field_probe,
                                cfg.lasers.field_coupling)
    return cfg, scan, channelset


def _outdir(args, cfg):
    out = args.out if getattr(args, "out", None) else cfg.output.directory
    os.makedirs(out, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg, scan, channelset = _prepare(args)
    spec = simulate(cfg.system, cfg.lasers, cfg.ensemble, channelset, scan,
                    quadrature=cfg.quadrature, threads=args.threads)
    out = _outdir(args, cfg)
    base = os.path.join(out, cfg.output.basename)
    write_spectrum(spec, base + ".csv", base + ".json")
    print(f"wrote {base}.csv and {base}.json")
    return EXIT_OK


def cmd_components(args) -> int:
    cfg, scan, channelset = _prepare(args)
    comps = per_m_components(cfg.system, cfg.lasers, cfg.ensemble, channelset,
                             scan, quadrature=cfg.quadrature,
                             threads=args.threads)
    out = _outdir(args, cfg)
    for spec in comps:
        m = spec.metadata["component.abs_m"]
        base = os.path.join(out, f"{cfg.output.basename}_m{m:02d}")
        write_spectrum(spec, base + ".csv", base + ".json")
    print(f"wrote {len(comps)} |M| components to {out}")
    return EXIT_OK


def cmd_dip(args) -> int:
    cfg = load_config(args.config)
    pos = predict_dip_position(cfg.scan.delta2_mhz, cfg.system.omega21_cm,
                               cfg.system.omega32_cm,
                               doppler_on=cfg.scan.doppler_on)
    print(f"{pos:.1f} MHz")
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg, scan, _ = _prepare(args)
    if cfg.fit is None:
        raise ValidationError(f"{cfg.source}: fitting requires a [fit] section")
    data = load_spectrum(args.data, abscissa=cfg.fit.data_abscissa,
                         resonance_cm=cfg.system.omega21_cm)
    problem = FitProblem(
        target_delta1_mhz=data.delta1_mhz,
        target_signal=data.signal,
        channel=cfg.fit.channel,
        free=cfg.fit.free,
        bounds=cfg.fit.bounds,
        system=cfg.system,
        lasers=cfg.lasers,
        ensemble=cfg.ensemble,
        mu_probe_au=cfg.mu_probe_au,
        mu_coupling_au=cfg.mu_coupling_au,
        delta2_mhz=scan.delta2_mhz,
        doppler_on=scan.doppler_on,
        m_sum_on=scan.m_sum_on,
        quadrature=cfg.quadrature,
        max_evaluations=cfg.fit.max_evaluations,
    )
    result = fit(problem, cfg.fit.init)
    out = _outdir(args, cfg)
    base = os.path.join(out, cfg.output.basename)
    with open(base + "_fit.json", "w", encoding="ascii") as fh:
        json.dump(fit_report_dict(result, problem), fh, indent=1,
                  sort_keys=True)
        fh.write("\n")
    best = model_spectrum(problem, result.best_params)
    write_spectrum(best, base + "_bestfit.csv", base + "_bestfit.json")
    for name in problem.free:
        unit = result.units[name]
        print(f"{name} = {result.best_params[name]:.6g} {unit}"
              f" (+- {result.sensitivity[name]['half_interval']:.2g},"
              " curvature sensitivity)")
    print(f"residual {result.residual_norm:.6g} after"
          f" {result.evaluations} evaluations;"
          f" converged: {result.converged}")
    if not result.converged:
        return EXIT_FIT
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    """Weak-probe analytic populations vs the 9x9 direct solve.

    The probe Rabi frequency is pinned to 1e-3 * gamma2 so the analytic
    lowest-order-in-probe result is in its domain of validity; detunings and
    coupling strengths span weak to strong coupling.
    """
    cfg = load_config(args.config)
    sys = cfg.system
    g1 = 1e-3 * sys.gamma2
    gam = sys.gamma2
    detunings = np.array([-50.0, -5.0, 0.0, 5.0, 50.0]) * gam
    couplings = np.array([0.01, 0.2, 2.0, 20.0, 100.0]) * gam
    rho11 = sys.rho11_init
    worst = 0.0
    for d1 in detunings:
        for d2 in detunings:
            for g2 in couplings:
                a22 = population_rho22(sys, g1, g2, d1, d2, rho11)
                a33 = population_rho33(sys, g1, g2, d1, d2, rho11)
                o22, o33 = populations_grid(sys, g1, g2, d1, d2, rho11)
                worst = max(worst,
                            abs(a22 - o22) / abs(o22),
                            abs(a33 - o33) / abs(o33))
    ok = worst <= ORACLE_CHECK_TOL
    print(f"oracle check: max relative deviation {worst:.3e} over"
          f" {detunings.size}x{detunings.size}x{couplings.size} grid"
          f" (tolerance {ORACLE_CHECK_TOL:.0e}): {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
