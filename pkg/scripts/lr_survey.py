"""Held-out PSNR gain of the desk fixture across learning rates and seeds.

    python scripts/lr_survey.py --lr 1e-3 3e-3 1e-2 --seeds 1234 1 2 3
"""

import argparse
import dataclasses
import warnings
from pathlib import Path

import numpy as np

from trajopt.bench import evaluate, synthetic_split
from trajopt.config import load_config
from trajopt.optimizer import optimize

ROOT = Path(__file__).resolve().parents[1]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", default=ROOT / "configs" / "desk.cfg")
    p.add_argument("--lr", type=float, nargs="+", default=[1e-3, 1e-2])
    p.add_argument("--seeds", type=int, nargs="+", default=[1234])
    p.add_argument("--mode", choices=["projection", "penalty"], default="projection")
    args = p.parse_args()

    base, spec = load_config(args.config)
    train, test = synthetic_split(spec.matrix_size, 32, 8)
    print("lr,seed,mode,psnr_init,psnr_final,gain,slew_active_fraction")
    for lr in args.lr:
        for seed in args.seeds:
            cfg = dataclasses.replace(base, lr=lr, seed=seed, mode=args.mode)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                hist = optimize(train, spec, cfg)
            a = np.mean(evaluate(hist.initial, test, spec, "dc_adjoint", cfg.dwell_ratio).psnr)
            b = np.mean(evaluate(hist.final, test, spec, "dc_adjoint", cfg.dwell_ratio).psnr)
            act = hist.records[-1].report.slew_active_fraction
            print(f"{lr:g},{seed},{args.mode},{a:.3f},{b:.3f},{b - a:+.3f},{act:.3f}")


if __name__ == "__main__":
    main()
