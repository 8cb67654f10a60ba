"""Projection vs penalty on the desk fixture.

Trains both modes from the same radial initialization and seed, then
prints held-out PSNR / SSIM and constraint activity for each.

    python scripts/desk_benchmark.py [--config configs/desk.cfg] [--out runs/desk]
"""

import argparse
import dataclasses
import json
import warnings
from pathlib import Path

from trajopt.bench import compare_modes, export_profiles, synthetic_split
from trajopt.config import load_config

ROOT = Path(__file__).resolve().parents[1]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", default=ROOT / "configs" / "desk.cfg")
    p.add_argument("--out", default=ROOT / "runs" / "desk")
    p.add_argument("--seed", type=int, default=None)
    args = p.parse_args()

    cfg, spec = load_config(args.config, seed=args.seed)
    train, test = synthetic_split(spec.matrix_size, 32, 8)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result, hists = compare_modes(
            dataclasses.replace(cfg, mode="projection"),
            dataclasses.replace(cfg, mode="penalty"),
            train, spec, heldout=test,
        )
    out = Path(args.out) / cfg.digest()
    out.mkdir(parents=True, exist_ok=True)
    (out / "compare.json").write_text(json.dumps(result, sort_keys=True, indent=2) + "\n")
    for label, hist in hists.items():
        hist.export(out / f"history_{label}.csv")
        export_profiles(hist.final, spec, out / f"profiles_{label}.csv")

    init = result["reports"]["projection_init"]["summary"]
    print(f"{'':>12} {'mean PSNR':>10} {'mean SSIM':>10} {'slew active':>12} {'max viol':>10}")
    print(f"{'radial':>12} {init['psnr']['mean']:10.2f} {init['ssim']['mean']:10.4f}")
    for label in ("projection", "penalty"):
        s = result["reports"][label]["summary"]
        act = result["activity"][label]
        viol = max(act["max_speed_violation"], act["max_slew_violation"])
        print(f"{label:>12} {s['psnr']['mean']:10.2f} {s['ssim']['mean']:10.4f} "
              f"{act['slew_active_fraction']:12.3f} {viol:10.2e}")
    print(out)


if __name__ == "__main__":
    main()
