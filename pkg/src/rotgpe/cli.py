"""Command line front end: simulate | converge | kappa | diagnose.

Exit codes: 0 success, 2 configuration error, 3 numerical-resolution flag
(non-monotone convergence errors). Output directory resolves, in order:
--outdir flag, ROTGPE_OUTDIR environment variable, run.outdir config key.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import (config as config_mod, diagnostics, dynamics, field as field_mod,
               harness, hermite, oscillator2d, plots)

ENV_OUTDIR = "ROTGPE_OUTDIR"


def _load(args) -> config_mod.RunConfig:
    if args.config:
        cfg = config_mod.load_config(args.config)
    else:
        cfg = config_mod.RunConfig()
    for item in args.set or []:
        if "=" not in item:
            raise config_mod.ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        cfg.set(k.strip(), v.strip())
    return cfg


def _outdir(args, cfg) -> str:
    out = args.outdir or os.environ.get(ENV_OUTDIR) or cfg["run.outdir"]
    os.makedirs(out, exist_ok=True)
    return out


def _initial_state(params: field_mod.SimParams, grid):
    """Ground-polarized default initial data for each model family."""
    if params.model in ("full_psi", "gauged_u", "limit3d_phi"):
        c = harness.default_initial_state(grid)
        if params.model == "full_psi":
            return grid.basis.backward(c)        # physical representation
        return c
    if params.model == "effective2d_varphi":
        prof = oscillator2d.ground_state_profile(grid)
        return (prof / np.sqrt(np.sum(prof**2) * grid.cell)).astype(complex)
    chi0z = hermite.hermite_eval_table(1, grid.z)[0].astype(complex)
    chi0z /= np.sqrt(np.sum(np.abs(chi0z) ** 2) * grid.dz)
    if params.model == "effective1d":
        return chi0z
    c = np.zeros(grid.shape(field_mod.XMODES), dtype=complex)
    c[0, 0, :] = chi0z
    if params.model == "full_psi_2dconf":
        # physical representation: chi_00(x) chi_0(z)
        w = field_mod.WaveField(c, field_mod.XMODES, grid)
        return w.to(field_mod.PHYSICAL).data
    return c


def _basic_record(t, state, params, grid, stepper):
    """Diagnostics row for states the field module wraps naturally; reduced
    (mass only) rows for the 2D/1D effective states."""
    if params.model in ("full_psi", "gauged_u", "limit3d_phi",
                        "full_psi_2dconf", "limit_phi1d"):
        rep = stepper.rep
        f = field_mod.WaveField(state, rep, grid)
        return diagnostics.record(t, f, params, warnings=stepper.warnings)
    if params.model == "effective2d_varphi":
        m = float(np.sum(np.abs(state) ** 2) * grid.cell)
    else:
        m = float(np.sum(np.abs(state) ** 2) * grid.dz)
    return diagnostics.DiagnosticsRecord(
        t=t, mass=m, energy=float("nan"), hz_expectation=float("nan"),
        band_populations=np.zeros(8), boundary_mass=0.0,
        warnings=list(stepper.warnings))


def cmd_simulate(args) -> int:
    cfg = _load(args)
    params = cfg.sim_params()
    out = _outdir(args, cfg)
    stepper = dynamics.make_stepper(params)
    grid = stepper.grid
    state = _initial_state(params, grid)
    n_steps = round(params.t_final / params.dt)
    stride = max(1, cfg["run.snapshot_stride"])
    records = []

    def cb(i, t, s):
        records.append(_basic_record(t, s, params, grid, stepper))
        if cfg["run.save_fields"] and params.model not in (
                "effective2d_varphi", "effective1d"):
            f = field_mod.WaveField(s, stepper.rep, grid)
            field_mod.save_field(os.path.join(out, f"field_{i:06d}.gpef"), f)

    dynamics.evolve(stepper, state, n_steps, snapshot_stride=stride, callback=cb)
    csv_path = os.path.join(out, "diagnostics.csv")
    with open(csv_path, "w") as fh:
        fh.write(f"# config {cfg.fingerprint()}\n")
        fh.write(diagnostics.CSV_HEADER + "\n")
        for r in records:
            fh.write(diagnostics.csv_row(r) + "\n")
    plots.diagnostics_figure(records, os.path.join(out, "diagnostics.png"))
    for w in stepper.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {csv_path} ({len(records)} records)")
    return 0


def cmd_converge(args) -> int:
    cfg = _load(args)
    params = cfg.sim_params()
    out = _outdir(args, cfg)
    report = harness.run_convergence(
        params, cfg["converge.epsilons"],
        corrected_data=cfg["converge.corrected_data"],
        dt_limit=cfg["converge.dt_limit"],
        snapshot_dt=cfg["converge.snapshot_dt"],
        n_theta_limit=cfg["converge.n_theta_limit"],
    )
    report.config_fingerprint = cfg.fingerprint()
    with open(os.path.join(out, "convergence.json"), "w") as fh:
        fh.write(report.to_json())
    with open(os.path.join(out, "convergence.dat"), "w") as fh:
        fh.write(f"# config {cfg.fingerprint()}\n")
        fh.write(report.plot_data())
    plots.convergence_figure(report, os.path.join(out, "convergence.png"))
    print(f"fitted order: {report.fitted_order:.4f} "
          f"(max residual {report.max_residual:.4f})")
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if report.non_monotone:
        return 3
    return 0


def cmd_kappa(args) -> int:
    rows = [(n, hermite.kappa_n(n, args.sigma, args.lam))
            for n in range(args.n_max + 1)]
    print("n,kappa_n")
    for n, k in rows:
        print(f"{n},{k:.10f}")
    if args.outdir or os.environ.get(ENV_OUTDIR):
        out = args.outdir or os.environ.get(ENV_OUTDIR)
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "kappa.csv"), "w") as fh:
            fh.write("n,kappa_n\n")
            for n, k in rows:
                fh.write(f"{n},{k:.16e}\n")
    return 0


def cmd_diagnose(args) -> int:
    (e1, e2), confining = diagnostics.effective_potential_analysis(
        (args.omega1, args.omega2))
    verdict = "confining" if confining else "not confining"
    print(f"effective potential eigenvalues: ({e1:.6f}, {e2:.6f}) -> {verdict}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rotgpe",
                                description="anisotropic rotating condensate simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key-value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key")
        sp.add_argument("--outdir", help="output directory")

    sp = sub.add_parser("simulate", help="run one model, write diagnostics")
    common(sp)
    sp.set_defaults(func=cmd_simulate)
    sp = sub.add_parser("converge", help="epsilon convergence study")
    common(sp)
    sp.set_defaults(func=cmd_converge)
    sp = sub.add_parser("kappa", help="effective band coupling constants")
    sp.add_argument("--n-max", type=int, default=3)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--lam", type=float, default=1.0)
    sp.add_argument("--outdir")
    sp.set_defaults(func=cmd_kappa)
    sp = sub.add_parser("diagnose", help="effective potential confinement check")
    sp.add_argument("--omega1", type=float, required=True)
    sp.add_argument("--omega2", type=float, required=True)
    sp.set_defaults(func=cmd_diagnose)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except config_mod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
