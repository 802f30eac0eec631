"""Command-line front end: one binary, one subcommand per experiment.

Subcommands: params-table, poincare, ground-state, evolve, wigner,
wigner-avg, liouville, depletion, render.  Options may also come from a
flat `key = value` config file via --config; explicit flags override file
values and unknown keys are rejected.  Exit codes: 0 success, 1 numerical
failure, 2 usage error.  KGPE_THREADS caps worker threads where a
subcommand parallelizes over independent snapshots.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import bogoliubov, classical, fileio, gpe, liouville, wigner
from .errors import DomainError, KgpeError
from .grids import default_half_width, make_grid
from .scaling import SPECIES, ScaledParams, reference_table

DEFAULT_TAU_NUM = 1
DEFAULT_TAU_DEN = 6
DEFAULT_KAPPA = 1.0
DEFAULT_MODES = 15
DEFAULT_PARTICLES = 1_000_000
DEFAULT_N_POINTS = 1024
MIN_PRODUCTION_PARTICLES = 10_000


@dataclass
class RunConfig:
    """Echoable record of one run's full option set."""

    subcommand: str
    options: dict

    def to_dict(self) -> dict:
        return {"subcommand": self.subcommand, **self.options}


def worker_count() -> int:
    raw = os.environ.get("KGPE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        n = min(4, os.cpu_count() or 1)
    return n


def _add_scaled_options(sub, kappa=True):
    sub.add_argument("--eta", type=float, default=None,
                     help="dimensionless Lamb-Dicke-like parameter")
    sub.add_argument("--upsilon", type=float, default=None,
                     help="dimensionless interaction strength")
    if kappa:
        sub.add_argument("--kappa", type=float, default=DEFAULT_KAPPA,
                         help="dimensionless kick strength")
    sub.add_argument("--tau-num", type=int, default=DEFAULT_TAU_NUM,
                     help="kick period numerator r in tau_h = 2*pi*r/q")
    sub.add_argument("--tau-den", type=int, default=DEFAULT_TAU_DEN,
                     help="kick period denominator q in tau_h = 2*pi*r/q")


def _add_grid_options(sub):
    sub.add_argument("--n-points", type=int, default=DEFAULT_N_POINTS)
    sub.add_argument("--half-width", type=float, default=None,
                     help="grid half width (default sized from the centre)")


def _add_common(sub):
    sub.add_argument("--config", default=None,
                     help="flat key = value file; flags override it")
    sub.add_argument("-o", "--output-dir", default="kgpe-out")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kgpe",
        description="Numerical laboratory for the delta-kicked "
                    "harmonic-oscillator Gross-Pitaevskii equation")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand")
    table = {}

    sub = subs.add_parser("params-table",
                          help="experimental-design table (lambda, nu rows)")
    sub.add_argument("--omega-ratio", type=float, default=10.0)
    _add_common(sub)
    table["params-table"] = sub

    sub = subs.add_parser("poincare", help="classical kicked-oscillator orbits")
    sub.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    sub.add_argument("--tau-num", type=int, default=DEFAULT_TAU_NUM)
    sub.add_argument("--tau-den", type=int, default=DEFAULT_TAU_DEN)
    sub.add_argument("--kicks", type=int, default=1000)
    sub.add_argument("--seeds-file", default=None,
                     help="CSV of x_tilde,p_tilde seeds (default: built-in set)")
    sub.add_argument("--ppm", default=None,
                     help="also render a histogram image with this name")
    _add_common(sub)
    table["poincare"] = sub

    sub = subs.add_parser("ground-state", help="imaginary-time ground state")
    _add_scaled_options(sub, kappa=False)
    _add_grid_options(sub)
    _add_common(sub)
    table["ground-state"] = sub

    sub = subs.add_parser("evolve", help="kicked GPE run with snapshots")
    _add_scaled_options(sub)
    _add_grid_options(sub)
    sub.add_argument("--kicks", type=int, default=100)
    sub.add_argument("--center", default="unstable",
                     help="stable | unstable | explicit position")
    sub.add_argument("--substeps", type=int, default=gpe.DEFAULT_SUBSTEPS)
    sub.add_argument("--dump-every", type=int, default=0,
                     help="dump the pre-kick field every N kicks (0: none)")
    _add_common(sub)
    table["evolve"] = sub

    sub = subs.add_parser("wigner", help="Wigner transform of a field dump")
    sub.add_argument("--input", required=False, default=None)
    sub.add_argument("--output", default="wigner.wig")
    _add_common(sub)
    table["wigner"] = sub

    sub = subs.add_parser("wigner-avg",
                          help="average Wigner transform of a snapshot directory")
    sub.add_argument("--input-dir", default=None)
    sub.add_argument("--output", default="wigner-avg.wig")
    _add_common(sub)
    table["wigner-avg"] = sub

    sub = subs.add_parser("liouville", help="self-consistent ensemble run")
    _add_scaled_options(sub)
    _add_grid_options(sub)
    sub.add_argument("--particles", type=int, default=DEFAULT_PARTICLES)
    sub.add_argument("--kicks", type=int, default=100)
    sub.add_argument("--seed", type=int, default=1)
    sub.add_argument("--center", default="unstable")
    sub.add_argument("--substeps", type=int, default=1024,
                     help="mean-field substeps per kick period")
    sub.add_argument("--density-refresh", type=int, default=1)
    sub.add_argument("--bandwidth-cells", type=float,
                     default=liouville.DEFAULT_BANDWIDTH_CELLS)
    _add_common(sub)
    table["liouville"] = sub

    sub = subs.add_parser("depletion", help="Bogoliubov depletion run")
    _add_scaled_options(sub)
    _add_grid_options(sub)
    sub.add_argument("--kicks", type=int, default=100)
    sub.add_argument("--modes", type=int, default=DEFAULT_MODES)
    sub.add_argument("--center", default="unstable")
    sub.add_argument("--substeps", type=int, default=2048)
    _add_common(sub)
    table["depletion"] = sub

    sub = subs.add_parser("render", help="pseudocolor PPM of a Wigner dump")
    sub.add_argument("--input", default=None)
    sub.add_argument("--output", default="wigner.ppm")
    _add_common(sub)
    table["render"] = sub

    return parser, table


def parse_config_file(path) -> dict:
    values = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise DomainError(f"{path}:{lineno}: expected key = value")
                key, _, val = line.partition("=")
                values[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise DomainError(f"cannot read config file {path}: {exc}") from exc
    return values


def parse_args(argv):
    parser, table = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        raise SystemExit(2)
    if getattr(args, "config", None):
        sub = table[args.subcommand]
        actions = {a.dest: a for a in sub._actions}
        raw = parse_config_file(args.config)
        defaults = {}
        for key, val in raw.items():
            if key not in actions or key in ("help", "config"):
                sub.error(f"unknown config key {key!r}")
            action = actions[key]
            defaults[key] = action.type(val) if action.type else val
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def require(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        print(f"kgpe {args.subcommand}: missing required option(s): "
              + ", ".join("--" + n for n in missing), file=sys.stderr)
        raise SystemExit(2)


def out_path(outdir, name):
    """Resolve a name inside the output directory, refusing escapes."""
    full = os.path.realpath(os.path.join(outdir, name))
    base = os.path.realpath(outdir)
    if not (full == base or full.startswith(base + os.sep)):
        print(f"kgpe: refusing to write outside output directory: {name}",
              file=sys.stderr)
        raise SystemExit(2)
    return full


def scaled_from_args(args) -> ScaledParams:
    require(args, "eta")
    tau_h = 2 * math.pi * args.tau_num / args.tau_den
    kappa = getattr(args, "kappa", 0.0)
    upsilon = args.upsilon if args.upsilon is not None else 0.0
    return ScaledParams(eta=args.eta, kappa=kappa, upsilon=upsilon, tau_h=tau_h)


def grid_from_args(args, center_value):
    half = args.half_width
    if half is None:
        half = default_half_width(center_value)
    return make_grid(args.n_points, half)


def start_run(args) -> tuple[str, fileio.RunManifest]:
    outdir = args.output_dir
    os.makedirs(outdir, exist_ok=True)
    options = {k: v for k, v in vars(args).items()
               if k not in ("subcommand",) and not k.startswith("_")}
    config = RunConfig(args.subcommand, options)
    return outdir, fileio.RunManifest(config=config.to_dict(),
                                      code_version=__version__)


# --- subcommand handlers ----------------------------------------------------

def cmd_params_table(args):
    rows = reference_table(args.omega_ratio)
    header = ["species", "upsilon", "eta_prime", "mu_hw", "lambda", "nu"]
    widths = [9, 8, 9, 6, 11, 11]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for r in rows:
        cells = [r["species"], f"{r['upsilon']:g}", f"{r['eta_prime']:g}",
                 f"{r['mu_hw']:g}", f"{r['lambda']:.3e}", f"{r['nu']:.3e}"]
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    print()
    print(",".join(header))
    for r in rows:
        print(f"{r['species']},{r['upsilon']:g},{r['eta_prime']:g},"
              f"{r['mu_hw']:g},{r['lambda']:.17g},{r['nu']:.17g}")
    return 0


def cmd_poincare(args):
    outdir, manifest = start_run(args)
    g = math.gcd(args.tau_num, args.tau_den)
    spec = classical.ResonanceSpec(args.tau_num // g, args.tau_den // g)
    if args.seeds_file:
        seeds = np.loadtxt(args.seeds_file, delimiter=",", ndmin=2)
    else:
        radii = np.linspace(0.5, 4.0, 8) * np.sqrt(2) * np.pi / 2
        seeds = np.column_stack([radii, np.zeros_like(radii)])
    cloud = classical.poincare_section(seeds, args.kicks, spec, args.kappa)
    orbit_file = out_path(outdir, "orbits.csv")
    fileio.write_series(orbit_file, ["x_tilde", "p_tilde"], cloud)
    manifest.add_output(orbit_file)
    if args.ppm:
        half = float(np.max(np.abs(cloud))) * (1 + 1e-12)
        edges = np.linspace(-half, half, 257)
        hist, _, _ = np.histogram2d(cloud[:, 0], cloud[:, 1],
                                    bins=[edges, edges])
        ppm = out_path(outdir, args.ppm)
        fileio.emit_pseudocolor(hist, ppm)
        manifest.add_output(ppm)
        manifest.add_output(ppm + ".zero.txt")
    manifest.diagnostics["n_points"] = int(cloud.shape[0])
    manifest.write(outdir)
    return 0


def cmd_ground_state(args):
    require(args, "eta", "upsilon")
    outdir, manifest = start_run(args)
    params = scaled_from_args(args)
    grid = grid_from_args(args, 0.0)
    gs = gpe.ground_state(params, grid)
    field_file = out_path(outdir, "ground.fld")
    fileio.write_field(field_file, gs.field)
    series_file = out_path(outdir, "ground.csv")
    fileio.write_series(series_file, ["mu", "residual"], [[gs.mu, gs.residual]])
    manifest.add_output(field_file)
    manifest.add_output(series_file)
    manifest.diagnostics["mu"] = gs.mu
    manifest.diagnostics["residual"] = gs.residual
    manifest.write(outdir)
    print(f"mu = {gs.mu:.6f} (hbar*omega), residual {gs.residual:.2e}")
    return 0


def cmd_evolve(args):
    require(args, "eta", "upsilon")
    outdir, manifest = start_run(args)
    params = scaled_from_args(args)
    center = gpe.center_position(_parse_center(args.center), params)
    grid = grid_from_args(args, center)
    state0 = gpe.displaced_ground_state(params, center, grid)
    dumps = []

    def dump_observer(j, state):
        if args.dump_every and j % args.dump_every == 0:
            path = out_path(outdir, f"snap_{j:05d}.fld")
            fileio.write_field(path, state.field)
            dumps.append(path)

    record = gpe.run_kicked(state0, args.kicks, observers=[dump_observer],
                            n_substeps=args.substeps)
    final_file = out_path(outdir, "final.fld")
    fileio.write_field(final_file, record.final_state.field)
    series_file = out_path(outdir, "series.csv")
    rows = np.column_stack([np.arange(args.kicks + 1), record.norms,
                            record.energies, record.x_means, record.p_means])
    fileio.write_series(series_file, ["kick", "norm", "energy", "x_mean",
                                      "p_mean"], rows)
    for path in [final_file, series_file] + dumps:
        manifest.add_output(path)
    manifest.diagnostics["norm_drift"] = float(np.abs(record.norms - 1).max())
    manifest.write(outdir)
    return 0


def cmd_wigner(args):
    require(args, "input")
    outdir, manifest = start_run(args)
    field = fileio.read_field(args.input)
    w = wigner.wigner_transform(field)
    out = out_path(outdir, args.output)
    fileio.write_wigner(out, w)
    manifest.add_output(out)
    manifest.write(outdir)
    return 0


def cmd_wigner_avg(args):
    require(args, "input-dir")
    outdir, manifest = start_run(args)
    names = sorted(n for n in os.listdir(args.input_dir) if n.endswith(".fld"))
    if not names:
        print(f"kgpe wigner-avg: no .fld files in {args.input_dir}",
              file=sys.stderr)
        raise SystemExit(2)
    paths = [os.path.join(args.input_dir, n) for n in names]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        snaps = list(pool.map(
            lambda p: wigner.wigner_transform(fileio.read_field(p)), paths))
    avg = wigner.accumulate_time_average(snaps)
    out = out_path(outdir, args.output)
    fileio.write_wigner(out, avg)
    manifest.add_output(out)
    manifest.diagnostics["n_snapshots"] = len(snaps)
    manifest.write(outdir)
    return 0


def cmd_liouville(args):
    require(args, "eta", "upsilon")
    if args.particles < MIN_PRODUCTION_PARTICLES:
        print(f"kgpe liouville: production runs need at least "
              f"{MIN_PRODUCTION_PARTICLES} particles", file=sys.stderr)
        raise SystemExit(2)
    outdir, manifest = start_run(args)
    params = scaled_from_args(args)
    center = gpe.center_position(_parse_center(args.center), params)
    grid = grid_from_args(args, center)
    gs = gpe.ground_state(params, grid)
    w0 = wigner.wigner_transform(gpe.displace(gs.field, center))
    ens = liouville.sample_from_wigner(
        w0, args.particles, args.seed, params,
        bandwidth=args.bandwidth_cells * grid.dx)
    record = liouville.run_kicked_ensemble(
        ens, args.kicks, dt=params.tau_h / args.substeps,
        density_refresh=args.density_refresh)
    hist_file = out_path(outdir, "liouville-avg.wig")
    fileio.write_wigner(hist_file, record.average_histogram)
    ens_file = out_path(outdir, "final.ens")
    fileio.write_ensemble(ens_file, record.ensemble.x, record.ensemble.p)
    manifest.add_output(hist_file)
    manifest.add_output(ens_file)
    manifest.diagnostics["outside_events"] = record.ensemble.outside_events
    manifest.write(outdir)
    return 0


def cmd_depletion(args):
    require(args, "eta", "upsilon")
    outdir, manifest = start_run(args)
    params = scaled_from_args(args)
    series = bogoliubov.depletion_run(params, _parse_center(args.center),
                                      args.kicks, n_modes=args.modes,
                                      n_substeps=args.substeps,
                                      grid=_depletion_grid(args, params))
    vk_file = out_path(outdir, "vk_norms.csv")
    rows = [[int(k), mode + 1, series.vk[i, mode]]
            for i, k in enumerate(series.kicks)
            for mode in range(series.vk.shape[1])]
    fileio.write_series(vk_file, ["kick", "k", "vk_norm"], rows)
    sum_file = out_path(outdir, "depletion_sum.csv")
    fileio.write_series(sum_file, ["kick", "sum"],
                        np.column_stack([series.kicks, series.sums]))
    manifest.add_output(vk_file)
    manifest.add_output(sum_file)
    manifest.diagnostics["max_norm_drift"] = float(series.norm_drift.max())
    manifest.write(outdir)
    return 0


def _depletion_grid(args, params):
    center = gpe.center_position(_parse_center(args.center), params)
    return grid_from_args(args, center)


def cmd_render(args):
    require(args, "input")
    outdir, manifest = start_run(args)
    w = fileio.read_wigner(args.input)
    out = out_path(outdir, args.output)
    fileio.emit_pseudocolor(w.values, out)
    manifest.add_output(out)
    manifest.add_output(out + ".zero.txt")
    manifest.write(outdir)
    return 0


def _parse_center(raw):
    if raw in ("stable", "unstable"):
        return raw
    try:
        return float(raw)
    except ValueError:
        print(f"kgpe: invalid --center {raw!r} (stable|unstable|number)",
              file=sys.stderr)
        raise SystemExit(2) from None


HANDLERS = {
    "params-table": cmd_params_table,
    "poincare": cmd_poincare,
    "ground-state": cmd_ground_state,
    "evolve": cmd_evolve,
    "wigner": cmd_wigner,
    "wigner-avg": cmd_wigner_avg,
    "liouville": cmd_liouville,
    "depletion": cmd_depletion,
    "render": cmd_render,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parse_args(argv)
    handler = HANDLERS[args.subcommand]
    try:
        return handler(args)
    except KgpeError as exc:
        print(f"kgpe {args.subcommand}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"kgpe {args.subcommand}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
