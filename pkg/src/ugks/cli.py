"""Command line entry point: ``ugks {relax,sod,shock} --config FILE --out DIR``."""

import argparse
import logging
import os
import sys

import numpy as np

from .config import ConfigError, default_config, load_config, write_config
from .errors import UGKSError
from .io import records_from_arrays, write_profile_csv, write_slice_csv, write_table_csv

log = logging.getLogger("ugks")


def _parser():
    p = argparse.ArgumentParser(prog="ugks", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("relax", "homogeneous relaxation"), ("sod", "Sod shock tube"),
                        ("shock", "normal shock structure")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="TOML run configuration (defaults if omitted)")
        s.add_argument("--out", help="output directory (overrides output.dir)")
        s.add_argument("--collision", choices=("hybrid", "shakhov", "boltzmann"),
                       help="override the collision operator")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def _load(args):
    cfg = load_config(args.config) if args.config else default_config(args.command)
    if cfg.experiment != args.command:
        raise ConfigError("experiment", f"config is for {cfg.experiment!r}, not {args.command!r}")
    if args.collision:
        cfg = cfg.with_operator(args.collision)
    if args.out:
        cfg.output.dir = args.out
    return cfg


def _run_relax(cfg, out):
    from .experiments import run_relaxation

    ops = ("shakhov", cfg.hybrid.operator) if cfg.hybrid.operator != "shakhov" else ("shakhov",)
    res = run_relaxation(cfg, ops)
    labels = [f"t={t:.6g}" for t in res.times]
    for op in ops:
        write_slice_csv(res.u, res.slices[op], os.path.join(out, f"slice_{op}.csv"), labels)
        write_table_csv(os.path.join(out, f"moments_{op}.csv"),
                        ["t", "rho", "rho_u", "rho_v", "rho_w", "rho_E"],
                        np.column_stack([res.times, res.conserved[op]]))
    if len(ops) > 1:
        d = res.discrepancy(ops[1])
        write_table_csv(os.path.join(out, "discrepancy.csv"), ["t", "linf_rel"],
                        np.column_stack([res.times, d]))
        for t, v in zip(res.times, d):
            print(f"t = {t:g} tau_r: max |{ops[1]} - shakhov| / peak = {v:.4e}")


def _run_sod(cfg, out):
    from .experiments import run_sod

    res = run_sod(cfg)
    write_profile_csv(res.records, os.path.join(out, "profile.csv"))
    write_table_csv(os.path.join(out, "dt_tau.csv"), ["t", "dt_tau_min", "dt_tau_max"],
                    res.dt_tau_history)
    print(f"sod: {res.steps} steps, L1(rho - exact) = {res.l1_error:.4e}, "
          f"dt/tau in [{res.dt_tau_min:.3g}, {res.dt_tau_max:.3g}]")


def _run_shock(cfg, out):
    from .experiments import run_shock_structure

    res = run_shock_structure(cfg)
    s = res.state
    rho, U, T = res.solver.primitives(s)
    recs = records_from_arrays(x=res.x, rho=res.rho_hat, U=res.U_hat, T=res.T_hat,
                               p=rho * res.solver.gas.R * T, q_x=res.heat_flux, shear=res.shear,
                               dt_tau=s.dt * res.solver.settings.model.inverse_relaxation_time(rho, T))
    write_profile_csv(recs, os.path.join(out, "profile.csv"))
    write_table_csv(os.path.join(out, "residuals.csv"), ["step", "residual"],
                    np.column_stack([np.arange(1, len(res.residuals) + 1), res.residuals]))
    print(f"shock: {res.steps} steps, flux deviation {np.max(res.flux_deviation):.3e}, "
          f"switch at x = {[round(v, 3) for v in res.switch_x]}")


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args)
        out = cfg.output.dir
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "config.toml"), "w", encoding="utf-8") as fh:
            fh.write(write_config(cfg))
        {"relax": _run_relax, "sod": _run_sod, "shock": _run_shock}[args.command](cfg, out)
    except ConfigError as exc:
        print(f"ugks: configuration error: {exc}", file=sys.stderr)
        return 2
    except UGKSError as exc:
        print(f"ugks: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"ugks: I/O error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
