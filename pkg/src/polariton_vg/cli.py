"""Command-line front end.

    polariton-vg bands      [--config FILE] [--sweep AXIS=V1,V2,...] [--out DIR]
    polariton-vg vg         [...]
    polariton-vg ehrenfest  [...] [--seed S] [--ntraj N] [--workers W] [--force]
    polariton-vg compare    THEORY.csv SUMMARY.csv [...] [--tolerance T] [--out DIR]
    polariton-vg config     print the effective configuration as TOML

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
3 comparison outside tolerance.  The default output directory is taken from
``$POLARITON_VG_OUT`` when neither --out nor [output].directory is given.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, SWEEP_AXES
from .ehrenfest import EnsembleFailure, TrajectoryFailure, run_ensemble
from .greens import (ConfigurationError, TastParams, renormalized_band,
                     renormalized_vg_at, tast_vg)
from .model import (bare_group_velocity, cavity_dispersion, dense_grid, discretize_bath,
                    k_at_lp_energy, polariton_point)
from .tables import UNITS, Table, parse_value, read_table

log = logging.getLogger("polariton_vg")

ENV_OUT = "POLARITON_VG_OUT"
DEFAULT_OUT = "polariton_vg_out"
# Above this reorganization energy the perturbative theory is not expected to
# track the dynamics; compare reports such points but does not enforce them.
LAMBDA_ENFORCE_MAX = 0.012

BANDS_COLUMNS = ["k_par", "E_photon", "E_UP_bare", "E_LP_bare", "E_UP_renorm", "E_LP_renorm",
                 "hopfield_LP", "gamma_LP"]
VG_COLUMNS = ["sweep_value", "k_par", "lp_energy", "vg_bare", "vg_renorm_full",
              "vg_renorm_darkonly", "vg_tast"]
FRONT_COLUMNS = ["t", "x_front"]
DENSITY_COLUMNS = ["t", "x", "rho"]
SUMMARY_COLUMNS = ["sweep_value", "lp_energy", "k_par", "vg_fit", "vg_err", "n_traj", "n_failed",
                   "norm_drift", "energy_drift", "boundary_hit", "base_seed"]
COMPARE_COLUMNS = ["sweep_value", "lp_energy", "vg_theory", "vg_sim", "vg_sim_err", "rel_dev",
                   "enforced", "pass"]

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_TOLERANCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- configuration ---------------------------------------------------------

def parse_sweep(text):
    axis, sep, values = text.partition("=")
    axis = axis.strip()
    if not sep or axis not in SWEEP_AXES:
        raise UsageError(f"--sweep expects AXIS=V1,V2,... with AXIS in {SWEEP_AXES}")
    try:
        vals = [float(v) for v in values.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad sweep value: {exc}") from exc
    if not vals:
        raise UsageError("--sweep needs at least one value")
    return axis, vals


def load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    data = cfg.to_dict()
    if getattr(args, "sweep", None):
        axis, vals = parse_sweep(args.sweep)
        data["sweep"] = {"axis": axis, "values": vals}
    ens = data["ensemble"]
    if getattr(args, "seed", None) is not None:
        ens["base_seed"] = args.seed
    if getattr(args, "ntraj", None) is not None:
        ens["n_traj"] = args.ntraj
    if getattr(args, "workers", None) is not None:
        ens["workers"] = args.workers
    return RunConfig.from_dict(data)


def output_dir(args, cfg: RunConfig) -> Path:
    out = args.out or cfg.output.directory or os.environ.get(ENV_OUT) or DEFAULT_OUT
    path = Path(out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {path}: {exc}") from exc
    if not os.access(path, os.W_OK):
        raise UsageError(f"output directory {path} is not writable")
    return path


def provenance(command, cfg: RunConfig, seed=None):
    prov = {
        "generator": f"polariton_vg {__version__}",
        "command": command,
        "config_sha256": cfg.digest(),
        "sweep_axis": cfg.sweep.axis or "none",
        "units": UNITS,
    }
    if seed is not None:
        prov["seed"] = seed
    return prov


def sweep_tag(axis, value):
    return "run" if axis is None else f"{axis}_{value:.12g}"


# -- commands ----------------------------------------------------------------

def band_table(cfg: RunConfig) -> Table:
    params = cfg.model_params()
    se = cfg.self_energy
    grid = dense_grid(params, k_max=se.k_max, n_points=se.n_dense)
    band = renormalized_band(grid, params, discretize_bath(cfg.bath_spec()), cfg.thermal_state(),
                             cfg.self_energy_config())
    base = band.base
    k = band.k_parallel
    cols = [k, cavity_dispersion(k, params), base.energy_up, base.energy_lp, band.energy_up,
            band.energy_lp, base.hopfield_lp, band.linewidth_lp]
    return Table(BANDS_COLUMNS, [list(r) for r in zip(*cols)])


def cmd_bands(args):
    cfg = load_config(args)
    out = output_dir(args, cfg)
    written = []
    for value, point in cfg.sweep_points():
        table = band_table(point)
        table.provenance = provenance("bands", cfg)
        if value is not None:
            table.provenance["sweep_value"] = f"{value:.12g}"
        path = out / f"bands_{sweep_tag(cfg.sweep.axis, value)}.csv"
        table.write(path)
        written.append(path)
    for p in written:
        print(p)
    return EXIT_OK


def vg_rows(cfg: RunConfig, value):
    params = cfg.model_params()
    bath = discretize_bath(cfg.bath_spec())
    thermal = cfg.thermal_state()
    energies = cfg.theory.lp_energies
    k = np.array([k_at_lp_energy(e, params) for e in energies])
    vg_bare = bare_group_velocity(k, "LP", params)
    dark = renormalized_vg_at(k, params, bath, thermal, cfg.self_energy_config(dark_only=True))
    full = renormalized_vg_at(k, params, bath, thermal, cfg.self_energy_config(dark_only=False))
    if cfg.tast.G is not None:
        gap = polariton_point(k, params).dark_gap
        tast = tast_vg(vg_bare, gap, thermal, TastParams(cfg.tast.G))
    else:
        tast = [None] * k.size
    return [[value, k[i], energies[i], vg_bare[i], full[i], dark[i], tast[i]] for i in range(k.size)]


def cmd_vg(args):
    cfg = load_config(args)
    out = output_dir(args, cfg)
    rows = []
    for value, point in cfg.sweep_points():
        rows.extend(vg_rows(point, value))
    table = Table(VG_COLUMNS, rows, provenance("vg", cfg))
    path = out / "vg.csv"
    table.write(path)
    print(path)
    return EXIT_OK


def cmd_ehrenfest(args):
    cfg = load_config(args)
    cost = cfg.dynamics_cost()
    if cost > cfg.ensemble.budget and not args.force:
        raise UsageError(f"run cost N*M*steps*substeps*nTraj = {cost:.3g} exceeds budget "
                         f"{cfg.ensemble.budget:.3g}; pass --force to run anyway")
    out = output_dir(args, cfg)
    prov = provenance("ehrenfest", cfg, seed=cfg.ensemble.base_seed)
    summary = []
    # worker count is an execution detail; leaving it out keeps the manifest
    # identical across parallel settings
    recorded = cfg.to_dict()
    recorded["ensemble"].pop("workers", None)
    manifest = {"generator": prov["generator"], "config_sha256": prov["config_sha256"],
                "config": recorded, "runs": []}
    for value, point in cfg.sweep_points():
        ecfg = point.ensemble_config()
        res = run_ensemble(ecfg)
        tag = sweep_tag(cfg.sweep.axis, value)
        stride = max(1, point.ensemble.snapshot_stride)
        x = res.positions
        order = np.argsort(x)
        dens = [[t, x[j], res.density[f, j]] for f, t in enumerate(res.times) for j in order]
        Table(DENSITY_COLUMNS, dens, prov).write(out / f"density_{tag}.csv")
        Table(FRONT_COLUMNS, [[t, xf] for t, xf in zip(res.times, res.front)], prov).write(
            out / f"front_{tag}.csv")
        lp_energy = float(polariton_point(res.k0, point.model_params()).energy_lp)
        summary.append([value, lp_energy, res.k0, res.vg_fit, res.vg_err, res.n_traj, res.n_failed,
                        float(np.max(res.norm_drift)), float(np.max(res.energy_drift)),
                        res.fit.boundary_hit, ecfg.base_seed])
        manifest["runs"].append({
            "sweep_value": value,
            "tag": tag,
            "snapshot_stride_steps": stride,
            "seeds": [list(s) if isinstance(s, tuple) else s for s in res.seeds],
            "norm_drift": [float(v) for v in res.norm_drift],
            "energy_drift": [float(v) for v in res.energy_drift],
        })
    Table(SUMMARY_COLUMNS, summary, prov).write(out / "summary.csv")
    with open(out / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True, default=_json_default)
        fh.write("\n")
    print(out / "summary.csv")
    return EXIT_OK


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


def _key(sweep_value, lp_energy):
    sv = None if sweep_value is None else round(sweep_value, 12)
    return sv, round(lp_energy, 6)


def compare_tables(theory: Table, summaries, tolerance, column="vg_renorm_darkonly"):
    """Join theory rows with ensemble summary rows on (sweep_value, lp_energy)."""
    if not summaries or all(not s.rows for s in summaries):
        raise UsageError("no ensemble summary rows to compare")
    axis = theory.provenance.get("sweep_axis", "none")
    for s in summaries:
        other = s.provenance.get("sweep_axis", "none")
        if other != axis:
            raise UsageError(f"sweep axis mismatch: theory '{axis}' vs ensemble '{other}'")
    if column not in theory.columns:
        raise UsageError(f"theory table has no column {column!r}")
    lookup = {}
    for rec in theory.records():
        key = _key(parse_value(rec["sweep_value"]), parse_value(rec["lp_energy"]))
        lookup[key] = parse_value(rec[column])
    rows, failed = [], False
    for s in summaries:
        if "vg_fit" in s.columns:
            sim_col, err_col = "vg_fit", "vg_err"
        elif column in s.columns:
            sim_col, err_col = column, None
        else:
            raise UsageError("ensemble table has neither vg_fit nor the theory column")
        for rec in s.records():
            sv = parse_value(rec["sweep_value"])
            lp = parse_value(rec["lp_energy"])
            key = _key(sv, lp)
            if key not in lookup:
                raise UsageError(f"no theory point for sweep_value={sv}, lp_energy={lp}")
            theo = lookup[key]
            sim = parse_value(rec[sim_col])
            dev = abs(sim - theo) / abs(theo)
            enforced = not (axis == "lambda" and sv is not None and sv > LAMBDA_ENFORCE_MAX)
            ok = dev <= tolerance
            failed |= enforced and not ok
            err = parse_value(rec[err_col]) if err_col else None
            rows.append([sv, lp, theo, sim, err, dev, enforced, ok])
    if not rows:
        raise UsageError("no ensemble summary rows to compare")
    return Table(COMPARE_COLUMNS, rows), failed


def cmd_compare(args):
    try:
        theory = read_table(args.theory)
        summaries = [read_table(p) for p in args.summaries]
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    table, failed = compare_tables(theory, summaries, args.tolerance, args.column)
    table.provenance = {
        "generator": f"polariton_vg {__version__}",
        "command": "compare",
        "theory_config_sha256": theory.provenance.get("config_sha256", "unknown"),
        "sweep_axis": theory.provenance.get("sweep_axis", "none"),
        "tolerance": f"{args.tolerance:.12g}",
        "units": UNITS,
    }
    out = Path(args.out or os.environ.get(ENV_OUT) or DEFAULT_OUT)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "compare.csv"
    table.write(path)
    print(path)
    if failed:
        print(f"relative deviation above {args.tolerance:g} on enforced points", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_config(args):
    cfg = load_config(args)
    sys.stdout.write(cfg.dumps())
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="polariton-vg", description="Polariton group-velocity renormalization.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="TOML run configuration")
        p.add_argument("--sweep", help="sweep override, e.g. lambda=0.002,0.004,0.006")
        p.add_argument("--out", help="output directory")

    for name, func, help_ in [("bands", cmd_bands, "bare and renormalized band structure"),
                              ("vg", cmd_vg, "group velocities from the theory"),
                              ("config", cmd_config, "print the effective configuration")]:
        p = sub.add_parser(name, help=help_)
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("ehrenfest", help="Ehrenfest trajectory ensemble")
    common(p)
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--ntraj", type=int, help="number of trajectories")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--force", action="store_true", help="ignore the desk-scale budget")
    p.set_defaults(func=cmd_ehrenfest)

    p = sub.add_parser("compare", help="join theory and ensemble group velocities")
    p.add_argument("theory", help="table written by 'vg'")
    p.add_argument("summaries", nargs="+", help="summary tables written by 'ehrenfest'")
    p.add_argument("--tolerance", type=float, default=0.15, help="relative tolerance")
    p.add_argument("--column", default="vg_renorm_darkonly", help="theory column to compare")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TrajectoryFailure, EnsembleFailure, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
