"""Command-line driver: rule derivation, oracle verification, simulation,
analysis, and field probing.  Subcommand outputs are deterministic data
files (CSV/JSON plus gnuplot scripts); no plotting backends required."""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import analysis as ana
from .angular import Polarization, derive_selection_rules
from .beam import vector_potential
from .grid import Wavefunction, read_checkpoint, write_checkpoint
from .oracle import verify_rule_set
from .runconfig import ConfigError, RunConfig, load_run_config, parse_run_config, serialize_run_config
from .tdse import PropagationError, init_ground_state, run
from .utils import set_workers

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3
EXIT_VERIFY_FAILED = 4

_POL_NAMES = ("linear-x", "linear-y", "circ-left", "circ-right")


def _json_dump(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _resolve_config_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("oam_ionize") / "configs" / name
    if bundled.is_file():
        return Path(str(bundled))
    raise FileNotFoundError(f"config {name!r} not found (no file, no bundled config)")


def cmd_derive_rules(args) -> int:
    pol = Polarization.from_name(args.pol)
    rules = {part: derive_selection_rules(args.ell, pol, part) for part in ("HI", "HII")}
    for part in ("HI", "HII"):
        print(rules[part].describe())
    if args.json:
        _json_dump({part: r.to_json_obj() for part, r in rules.items()}, args.json)
    return EXIT_OK


def cmd_oracle_verify(args) -> int:
    pols = _POL_NAMES if args.pols == "all" else tuple(args.pols.split(","))
    reports = []
    ok = True
    for ell in range(args.ell_min, args.ell_max + 1):
        for pol_name in pols:
            pol = Polarization.from_name(pol_name)
            for part in ("HI", "HII"):
                rules = derive_selection_rules(ell, pol, part)
                rep = verify_rule_set(rules, L_max=args.l_max)
                verified = rep.ok and not rep.missing_classes()
                ok = ok and verified
                print(
                    f"ell={ell:+d} {pol_name:11s} {part}: "
                    f"{'verified' if verified else 'FAILED'} "
                    f"({rep.n_pairs} pairs, {len(rep.disagreements)} disagreements, "
                    f"{len(rep.accidental_zeros)} accidental zeros)"
                )
                reports.append({"ell": ell, "pol": pol_name, **rep.to_json_obj()})
    if args.out:
        _json_dump(reports, args.out)
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


_GP_TRAJECTORY = """set datafile separator ','
set key autotitle columnhead
set xlabel 't (au)'
plot '{csv}' using 1:4 with lines title 'L_z', \\
     '{csv}' using 1:2 with lines title 'ground population'
"""

_GP_SPECTRUM = """set datafile separator ','
set key autotitle columnhead
set xlabel 'channel index'
set ylabel 'P_{{L,M}}'
set logscale y
plot '{csv}' using 0:3:xtic(sprintf('(%d,%d)', column(1), column(2))) with boxes notitle
"""

_GP_PROJECTION = """set datafile separator ','
set pm3d map
set size square
splot '{csv}' matrix nonuniform notitle
"""


def _simulate(cfg: RunConfig, out_dir: Path, progress: bool) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run_config.cfg").write_text(serialize_run_config(cfg))
    ground = init_ground_state(cfg.grid, cfg.prop)
    write_checkpoint(out_dir / "ground_state.wf", ground, 0.0, 0)
    try:
        final, rec = run(
            cfg.grid,
            cfg.prop,
            cfg.beam,
            record_every=cfg.record_every,
            tail_time=cfg.tail_time,
            ground=ground,
            checkpoint_every=cfg.checkpoint_every,
            out_dir=out_dir,
            progress=progress,
        )
    except PropagationError as exc:
        _json_dump(
            {"error": str(exc), "diagnostics": exc.diagnostics},
            out_dir / "diagnostic.json",
        )
        print(f"simulation aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    rec.to_csv(out_dir / "trajectory.csv")
    write_checkpoint(out_dir / "final_state.wf", final,
                     float(rec.t[-1]), int(round(rec.t[-1] / cfg.prop.dt)))
    (out_dir / "trajectory.gp").write_text(
        _GP_TRAJECTORY.format(csv="trajectory.csv")
    )
    meta = {
        "label": cfg.label,
        "ground_energy": ground.energy,
        "final_time": float(rec.t[-1]),
        "final_norm": float(rec.norm[-1]),
        "final_pop_ground": float(rec.pop_ground[-1]),
        "final_Lz": float(rec.Lz[-1]),
        "absorbed": float(rec.absorbed[-1]),
    }
    _json_dump(meta, out_dir / "summary.json")
    print(json.dumps(meta, sort_keys=True))
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        cfg = load_run_config(_resolve_config_path(args.config))
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out_dir:
        out = Path(args.out_dir)
    else:
        out = Path(cfg.out_dir) / cfg.label
    if args.checkpoint_every is not None:
        from dataclasses import replace

        cfg = replace(cfg, checkpoint_every=args.checkpoint_every)
    return _simulate(cfg, out, args.progress)


def cmd_analyze(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    state, t, step = read_checkpoint(args.state)
    if args.ground:
        ground, _, _ = read_checkpoint(args.ground)
        if ground.grid != state.grid:
            print("ground/state grid mismatch", file=sys.stderr)
            return EXIT_USAGE
    else:
        from .tdse import PropagatorConfig

        ground = init_ground_state(state.grid, PropagatorConfig(soft_core_a=args.soft_core_a))
    alpha, delta = ana.split_excited(state, ground)
    spec = ana.spherical_spectrum(
        delta, L_max=args.l_max, n_radial=args.n_radial, r_max=args.r_max
    )
    spec.to_csv(out_dir / "spectrum.csv")
    _json_dump(spec.to_json_obj(), out_dir / "spectrum.json")
    (out_dir / "spectrum.gp").write_text(_GP_SPECTRUM.format(csv="spectrum.csv"))

    proj, xa, ya = ana.xy_projection(delta)
    header = "xy projection; first row = y axis, first column = x axis"
    mat = np.zeros((proj.shape[0] + 1, proj.shape[1] + 1))
    mat[0, 1:] = ya
    mat[1:, 0] = xa
    mat[1:, 1:] = proj
    np.savetxt(out_dir / "xy_projection.csv", mat, delimiter=",", header=header)
    (out_dir / "projection.gp").write_text(
        _GP_PROJECTION.format(csv="xy_projection.csv")
    )

    report = {
        "t": t,
        "step": step,
        "ground_population": abs(alpha) ** 2,
        "excited_norm": delta.norm2(),
        "spectrum_total": spec.total,
    }
    if args.ell is not None:
        pol = Polarization.from_name(args.pol)
        comp = ana.compliance(spec, args.ell, pol, args.order)
        _json_dump(comp.to_json_obj(), out_dir / "compliance.json")
        report["forbidden_fraction"] = comp.forbidden_fraction
    _json_dump(report, out_dir / "analysis.json")
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def cmd_field_probe(args) -> int:
    try:
        cfg = load_run_config(_resolve_config_path(args.config))
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    point = np.array([float(v) for v in args.point.split(",")])
    if point.size != 3:
        print("point must be 'x,y,z'", file=sys.stderr)
        return EXIT_USAGE
    t0 = args.t0 if args.t0 is not None else 0.0
    t1 = args.t1 if args.t1 is not None else cfg.beam.t_end + 0.5
    ts = np.arange(t0, t1, args.dt)
    rows = []
    for t in ts:
        sample = vector_potential(point, float(t), cfg.beam)
        rows.append((t, sample.A[0], sample.A[1], sample.E[0], sample.E[1]))
    np.savetxt(
        args.out,
        np.asarray(rows),
        delimiter=",",
        header="t,Ax,Ay,Ex,Ey",
        comments="",
    )
    print(f"wrote {len(rows)} samples to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="oam-ionize",
        description="Vortex-pulse photoionization laboratory: selection rules, "
        "quadrature verification, 3D propagation, and spectral analysis.",
    )
    ap.add_argument("--threads", type=int, default=None,
                    help="FFT worker threads (default: OAM_IONIZE_THREADS or all cores)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive-rules", help="print selection rules for (ell, polarization)")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--pol", choices=_POL_NAMES, default="linear-x")
    p.add_argument("--json", default=None, help="also write rules as JSON")
    p.set_defaults(func=cmd_derive_rules)

    p = sub.add_parser("oracle-verify",
                       help="verify selection rules by sphere quadrature")
    p.add_argument("--ell-min", type=int, default=-3)
    p.add_argument("--ell-max", type=int, default=3)
    p.add_argument("--l-max", type=int, default=8)
    p.add_argument("--pols", default="all",
                   help="comma list of polarizations, or 'all'")
    p.add_argument("--out", default=None, help="write JSON report")
    p.set_defaults(func=cmd_oracle_verify)

    p = sub.add_parser("simulate", help="run a configured propagation")
    p.add_argument("--config", required=True,
                   help="path to a run config (or a bundled config name)")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--checkpoint-every", type=int, default=None)
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="analyze a saved state")
    p.add_argument("--state", required=True, help="checkpoint file")
    p.add_argument("--ground", default=None,
                   help="relaxed ground-state checkpoint (else re-relaxed)")
    p.add_argument("--soft-core-a", type=float, default=0.05)
    p.add_argument("--l-max", type=int, default=8)
    p.add_argument("--n-radial", type=int, default=64)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--ell", type=int, default=None,
                   help="with --pol/--order: compliance classification")
    p.add_argument("--pol", choices=_POL_NAMES, default="linear-x")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("field-probe", help="dump A/E time series at a point")
    p.add_argument("--config", required=True)
    p.add_argument("--point", required=True, help="'x,y,z' in au")
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--t1", type=float, default=None)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_field_probe)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        set_workers(args.threads)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
