"""Evaluation and projection-vs-penalty benchmark reports."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .constraints import check_feasibility
from .core import HardwareSpec, Trajectory, traj_to_profile, undersampling_factor
from .density import pipe_weights
from .metrics import psnr, ssim
from .nufft import NufftPlan
from .optimizer import OptimConfig, RunHistory, dwell_locations, optimize
from .phantom import make_dataset
from .recon import cg_least_squares

__all__ = [
    "BenchReport",
    "summarize",
    "export_profiles",
    "evaluate",
    "compare_modes",
    "synthetic_split",
]

RECONS = ("adjoint", "dc_adjoint", "cg")


def summarize(values) -> dict:
    v = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return {
        "min": float(v.min()),
        "q1": float(q1),
        "median": float(med),
        "q3": float(q3),
        "max": float(v.max()),
        "mean": float(v.mean()),
    }


@dataclass
class BenchReport:
    psnr: list
    ssim: list
    feasibility: dict
    uf: float
    recon: str
    metadata: dict = field(default_factory=dict)

    @property
    def summary(self) -> dict:
        return {"psnr": summarize(self.psnr), "ssim": summarize(self.ssim)}

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["summary"] = self.summary
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def synthetic_split(N: int, n_train: int, n_test: int, smoothness: float = 0.5):
    """Disjoint train / held-out stacks of perturbed phase-modulated phantoms."""
    train = make_dataset(N, range(n_train), smoothness)
    test = make_dataset(N, range(n_train, n_train + n_test), smoothness)
    return train, test


def export_profiles(traj: Trajectory, spec: HardwareSpec, path) -> int:
    """Write gradient / slew-rate magnitude profiles as CSV.

    One row per raster interval (``Ns - 1`` per shot).  The slew column of
    the last interval of each shot is left empty: slew rates live on the
    ``Ns - 2`` interior knots.  Returns the number of data rows.
    """
    prof = traj_to_profile(traj, spec)
    g = prof.gradient_norms * 1e3  # mT/m
    s = prof.slew_norms
    rows = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["shot", "t_ms", "grad_norm_mT_per_m", "slew_norm_T_per_m_per_s"])
        for c in range(g.shape[0]):
            for i in range(g.shape[1]):
                t_ms = i * spec.raster_dt * 1e3
                slew = format(s[c, i], ".17g") if i < s.shape[1] else ""
                writer.writerow([c, format(t_ms, ".17g"), format(g[c, i], ".17g"), slew])
                rows += 1
    return rows


def evaluate(
    traj: Trajectory,
    dataset,
    spec: HardwareSpec,
    recon: str = "dc_adjoint",
    dwell_ratio: int | None = None,
    pipe_iters: int = 10,
    cg_iters: int = 15,
    metadata: dict | None = None,
) -> BenchReport:
    """Simulate acquisition of every image and score the reconstructions.

    Scores compare reconstruction magnitudes with reference magnitudes.
    ``adjoint`` is the unweighted ``F^H y``.
    """
    if recon not in RECONS:
        raise ValueError(f"recon must be one of {RECONS}, got {recon!r}")
    dataset = np.asarray(dataset)
    if dataset.ndim == 2:
        dataset = dataset[None]
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    ratio = spec.dwell_ratio if dwell_ratio is None else dwell_ratio
    N = dataset.shape[-1]
    locs = dwell_locations(traj.points, traj.decimation * ratio).reshape(-1, 2)
    plan = NufftPlan(locs, N)
    y = plan.forward(dataset)
    if recon == "adjoint":
        xhat = plan.adjoint(y)
    else:
        w = pipe_weights(locs, N, pipe_iters, plan=plan)
        if recon == "dc_adjoint":
            xhat = plan.adjoint(w * y)
        else:
            xhat = np.stack([cg_least_squares(y[b], w, locs, N, cg_iters, plan=plan) for b in range(len(y))])
    ref = np.abs(dataset)
    mag = np.abs(xhat)
    scores_psnr = [psnr(mag[b], ref[b]) for b in range(len(ref))]
    scores_ssim = [ssim(mag[b], ref[b]) for b in range(len(ref))]
    feas = {}
    if traj.n_samples >= 3:
        feas = dataclasses.asdict(check_feasibility(traj, spec))
    n_raster = (traj.n_samples - 1) * traj.decimation + 1
    return BenchReport(
        psnr=scores_psnr,
        ssim=scores_ssim,
        feasibility=feas,
        uf=undersampling_factor(N, traj.n_shots, n_raster, ratio),
        recon=recon,
        metadata=dict(metadata or {}),
    )


def _same_except_mode(a: OptimConfig, b: OptimConfig) -> bool:
    da, db = a.to_dict(), b.to_dict()
    for key in ("mode", "penalty_weights"):
        da.pop(key)
        db.pop(key)
    return da == db


def compare_modes(
    cfg_projection: OptimConfig,
    cfg_penalty: OptimConfig,
    dataset,
    spec: HardwareSpec,
    heldout=None,
    recon: str = "dc_adjoint",
):
    """Train once per constraint-handling mode and score both results.

    Returns ``(result, histories)`` where ``result`` is a JSON-ready dict
    holding the paired reports and a constraint-activity table.
    """
    if not _same_except_mode(cfg_projection, cfg_penalty):
        raise ValueError("configs must differ only in mode and penalty_weights")
    heldout = dataset if heldout is None else heldout
    out = {"reports": {}, "activity": {}}
    histories = {}
    for label, cfg in (("projection", cfg_projection), ("penalty", cfg_penalty)):
        hist: RunHistory = optimize(dataset, spec, cfg)
        histories[label] = hist
        meta = {"config_hash": cfg.digest(), "seed": cfg.seed, "mode": cfg.mode}
        rep = evaluate(hist.final, heldout, spec, recon, cfg.dwell_ratio, cfg.pipe_iters, metadata=meta)
        init_rep = evaluate(hist.initial, heldout, spec, recon, cfg.dwell_ratio, cfg.pipe_iters)
        out["reports"][label] = rep.to_dict()
        out["reports"][label + "_init"] = init_rep.to_dict()
        fr = check_feasibility(hist.final, spec, cfg.activity_tol)
        out["activity"][label] = {
            "slew_active_fraction": fr.slew_active_fraction,
            "speed_active_fraction": fr.speed_active_fraction,
            "max_speed_violation": fr.max_speed_violation,
            "max_slew_violation": fr.max_accel_violation,
        }
    out["digest"] = hashlib.sha256(json.dumps(out, sort_keys=True).encode()).hexdigest()[:12]
    return out, histories
