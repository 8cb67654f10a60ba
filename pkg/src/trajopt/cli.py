"""Command-line entry point.

Every subcommand accepts ``--config`` (flat key-value file) and ``--seed``;
outputs go to ``<runs-root>/<config hash>/``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .config import load_config, save_config
from .core import load_trajectory_bin, load_trajectory_csv, save_trajectory_bin, save_trajectory_csv, undersampling_factor
from .optimizer import optimize, radial_init

log = logging.getLogger("trajopt")


def _load_traj(path):
    path = Path(path)
    if path.suffix == ".bin":
        return load_trajectory_bin(path)
    return load_trajectory_csv(path)


def _setup(args, **overrides):
    cfg, spec = load_config(args.config, seed=args.seed, **overrides)
    run_dir = Path(args.runs_root) / cfg.digest()
    run_dir.mkdir(parents=True, exist_ok=True)
    save_config(run_dir / "config.txt", cfg, spec)
    return cfg, spec, run_dir


def _dataset(args, cfg, spec):
    if args.images:
        from .phantom import load_gray_image

        files = sorted(Path(args.images).glob("*.png"))
        if not files:
            raise SystemExit(f"no PNG images under {args.images}")
        stack = np.stack([load_gray_image(f) for f in files]).astype(complex)
        n_test = max(1, len(stack) // 5)
        return stack[:-n_test], stack[-n_test:]
    return bench.synthetic_split(spec.matrix_size, args.n_train, args.n_test, args.phase)


def cmd_init(args):
    cfg, spec, run_dir = _setup(args)
    traj = radial_init(cfg.n_shots, cfg.n_samples, spec, cfg.projection_tol)
    save_trajectory_csv(traj, run_dir / "init.csv")
    save_trajectory_bin(traj, run_dir / "init.bin")
    print(run_dir / "init.csv")


def cmd_optimize(args):
    cfg, spec, run_dir = _setup(args, mode=args.mode)
    train, test = _dataset(args, cfg, spec)
    init = _load_traj(args.init) if args.init else None
    hist = optimize(train, spec, cfg, init=init)
    hist.export(run_dir / "history.csv")
    save_trajectory_csv(hist.final, run_dir / "final.csv")
    save_trajectory_bin(hist.final, run_dir / "final.bin")
    meta = {"config_hash": cfg.digest(), "seed": cfg.seed, "mode": cfg.mode}
    for name, traj in (("init", hist.initial), ("final", hist.final)):
        rep = bench.evaluate(traj, test, spec, "dc_adjoint", cfg.dwell_ratio, cfg.pipe_iters, metadata=meta)
        (run_dir / f"report_{name}.json").write_text(rep.to_json())
        log.info("%s: median PSNR %.2f dB", name, rep.summary["psnr"]["median"])
    for w in hist.warnings:
        log.warning(w)
    print(run_dir)


def cmd_evaluate(args):
    cfg, spec, run_dir = _setup(args)
    traj = _load_traj(args.traj)
    _, test = _dataset(args, cfg, spec)
    meta = {"config_hash": cfg.digest(), "seed": cfg.seed, "trajectory": Path(args.traj).name}
    rep = bench.evaluate(traj, test, spec, args.recon, cfg.dwell_ratio, cfg.pipe_iters, metadata=meta)
    out = run_dir / f"evaluate_{Path(args.traj).stem}_{args.recon}.json"
    out.write_text(rep.to_json())
    print(out)


def cmd_profiles(args):
    cfg, spec, run_dir = _setup(args)
    traj = _load_traj(args.traj)
    out = run_dir / f"profiles_{Path(args.traj).stem}.csv"
    bench.export_profiles(traj, spec, out)
    print(out)


def cmd_compare(args):
    cfg, spec, run_dir = _setup(args)
    train, test = _dataset(args, cfg, spec)
    cfg_proj = dataclasses.replace(cfg, mode="projection")
    mu = tuple(args.mu) if args.mu else cfg.penalty_weights
    cfg_pen = dataclasses.replace(cfg, mode="penalty", penalty_weights=mu)
    result, hists = bench.compare_modes(cfg_proj, cfg_pen, train, spec, heldout=test)
    (run_dir / "compare.json").write_text(json.dumps(result, sort_keys=True, indent=2) + "\n")
    for label, hist in hists.items():
        hist.export(run_dir / f"history_{label}.csv")
        save_trajectory_csv(hist.final, run_dir / f"final_{label}.csv")
        bench.export_profiles(hist.final, spec, run_dir / f"profiles_{label}.csv")
    for label, row in result["activity"].items():
        print(f"{label:>10}: slew_active={row['slew_active_fraction']:.3f} "
              f"max_slew_viol={row['max_slew_violation']:.3e} "
              f"median PSNR={result['reports'][label]['summary']['psnr']['median']:.2f} dB")
    print(run_dir)


def cmd_uf(args):
    print(repr(undersampling_factor(args.N, args.n_shots, args.n_samples, args.dwell_ratio)))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--runs-root", default="runs")
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--n-train", type=int, default=32)
    data.add_argument("--n-test", type=int, default=8)
    data.add_argument("--phase", type=float, default=0.5, help="phase smoothness (max |phase| / pi)")
    data.add_argument("--images", help="directory of grayscale PNGs used instead of phantoms")

    p = argparse.ArgumentParser(prog="trajopt", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("init", parents=[common], help="write the radial initialization")
    s.set_defaults(func=cmd_init)

    s = sub.add_parser("optimize", parents=[common, data], help="learn a trajectory")
    s.add_argument("--mode", choices=["projection", "penalty"], default=None)
    s.add_argument("--init", help="initial trajectory (.csv or .bin)")
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("evaluate", parents=[common, data], help="score a trajectory")
    s.add_argument("traj")
    s.add_argument("--recon", choices=bench.RECONS, default="dc_adjoint")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("profiles", parents=[common], help="export gradient / slew profiles")
    s.add_argument("traj")
    s.set_defaults(func=cmd_profiles)

    s = sub.add_parser("compare", parents=[common, data], help="projection vs penalty benchmark")
    s.add_argument("--mu", type=float, nargs=2, metavar=("SPEED", "SLEW"))
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("uf", parents=[common], help="undersampling factor")
    s.add_argument("N", type=int)
    s.add_argument("n_shots", type=int)
    s.add_argument("n_samples", type=int)
    s.add_argument("dwell_ratio", type=int)
    s.set_defaults(func=cmd_uf)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
