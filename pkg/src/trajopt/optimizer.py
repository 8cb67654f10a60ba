"""Joint trajectory optimization: projected Adam and penalty-augmented Adam.

The forward pipeline for one image ``x`` is

    control points --upsample--> sample locations K
    y    = F_K x                    (exact NUFFT)
    w    = pipe_weights(K)          (held constant: no gradient)
    xhat = F_K^H (w * y)
    loss = combined_loss(xhat, x)

and its gradient with respect to ``K`` is propagated analytically through
both occurrences of ``F_K``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constraints import FeasibilityReport, ProjectionWarning, check_points, project_points, scaled_bounds
from .core import HardwareSpec, Trajectory
from .density import pipe_weights
from .interp import change_resolution, upsample_adjoint, upsample_points
from .metrics import combined_loss, loss_grad_image
from .nufft import NufftPlan

__all__ = [
    "OptimConfig",
    "AdamState",
    "StepRecord",
    "RunHistory",
    "adam_init",
    "adam_step",
    "penalty_value_and_grad",
    "dwell_locations",
    "pipeline_loss_and_location_grad",
    "trajectory_gradient",
    "radial_init",
    "batch_indices",
    "optimize",
]


@dataclass(frozen=True)
class OptimConfig:
    mode: str = "projection"
    lr: float = 1e-3
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    steps_per_level: int = 40
    decimation_levels: tuple[int, ...] = (16, 8, 4, 2, 1)
    loss_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    penalty_weights: tuple[float, float] = (100.0, 100.0)
    batch_size: int = 8
    seed: int = 0
    dwell_ratio: int = 5
    n_shots: int = 16
    n_samples: int = 513
    pipe_iters: int = 10
    projection_tol: float = 1e-9
    projection_max_iter: int = 5000
    activity_tol: float = 0.01
    drop_last_sample: bool = False

    def __post_init__(self):
        object.__setattr__(self, "adam_betas", tuple(float(b) for b in self.adam_betas))
        object.__setattr__(self, "decimation_levels", tuple(int(d) for d in self.decimation_levels))
        object.__setattr__(self, "loss_weights", tuple(float(v) for v in self.loss_weights))
        object.__setattr__(self, "penalty_weights", tuple(float(v) for v in self.penalty_weights))
        if self.mode not in ("projection", "penalty"):
            raise ValueError(f"mode must be 'projection' or 'penalty', got {self.mode!r}")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if not all(0 < b < 1 for b in self.adam_betas) or len(self.adam_betas) != 2:
            raise ValueError("adam_betas must be two values in (0, 1)")
        levels = self.decimation_levels
        if not levels or levels[-1] != 1 or any(a <= b for a, b in zip(levels, levels[1:])):
            raise ValueError(f"decimation_levels must be strictly decreasing and end at 1, got {levels}")
        if len(self.loss_weights) != 3 or min(self.loss_weights) < 0:
            raise ValueError("loss_weights must be three nonnegative values")
        if len(self.penalty_weights) != 2 or min(self.penalty_weights) < 0:
            raise ValueError("penalty_weights must be two nonnegative values")
        if self.steps_per_level < 0 or self.batch_size < 1 or self.dwell_ratio < 1:
            raise ValueError("steps_per_level >= 0, batch_size >= 1 and dwell_ratio >= 1 required")
        if (self.n_samples - 1) % levels[0]:
            raise ValueError(
                f"n_samples - 1 = {self.n_samples - 1} must be divisible by every decimation level"
            )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


# --- Adam ------------------------------------------------------------------

@dataclass(frozen=True)
class AdamState:
    params: np.ndarray
    m: np.ndarray
    v: np.ndarray
    t: int = 0


def adam_init(params) -> AdamState:
    params = np.array(params, dtype=float)
    return AdamState(params, np.zeros_like(params), np.zeros_like(params), 0)


def adam_step(state: AdamState, grad, lr: float, betas=(0.9, 0.999), eps: float = 1e-8) -> AdamState:
    """One bias-corrected Adam update; returns a new state."""
    grad = np.asarray(grad, dtype=float)
    if grad.shape != state.params.shape:
        raise ValueError(f"gradient shape {grad.shape} != parameter shape {state.params.shape}")
    b1, b2 = betas
    t = state.t + 1
    m = b1 * state.m + (1 - b1) * grad
    v = b2 * state.v + (1 - b2) * grad * grad
    m_hat = m / (1 - b1**t)
    v_hat = v / (1 - b2**t)
    params = state.params - lr * m_hat / (np.sqrt(v_hat) + eps)
    return AdamState(params, m, v, t)


# --- penalty ---------------------------------------------------------------

def _hinge_sq(diffs, bound):
    norms = np.linalg.norm(diffs, axis=-1)
    excess = np.maximum(norms - bound, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        unit = np.where(norms[..., None] > 0, diffs / norms[..., None], 0.0)
    return np.sum(excess**2), 2.0 * excess[..., None] * unit


def penalty_value_and_grad(points, alpha: float, beta: float, mu=(1.0, 1.0)):
    """Squared-hinge penalty on gradient and slew violations.

    ``P = mu_speed * sum (||D1 k|| - alpha)_+^2 + mu_slew * sum (||D2 k|| - beta)_+^2``
    """
    k = np.asarray(points.points if isinstance(points, Trajectory) else points, dtype=float)
    if k.shape[1] < 3:
        raise ValueError("at least 3 samples per shot are needed")
    mu_speed, mu_slew = mu
    p1, g1 = _hinge_sq(k[:, 1:] - k[:, :-1], alpha)
    p2, g2 = _hinge_sq(k[:, 2:] - 2 * k[:, 1:-1] + k[:, :-2], beta)
    grad = np.zeros_like(k)
    grad[:, 1:] += mu_speed * g1
    grad[:, :-1] -= mu_speed * g1
    grad[:, 2:] += mu_slew * g2
    grad[:, 1:-1] -= 2 * mu_slew * g2
    grad[:, :-2] += mu_slew * g2
    return float(mu_speed * p1 + mu_slew * p2), grad


# --- reconstruction loss gradient -------------------------------------------

def dwell_locations(control_points, factor: int, drop_last: bool = False) -> np.ndarray:
    """``(Nc, Ns', 2)`` dwell-time sample locations of a control trajectory."""
    full = upsample_points(control_points, factor)
    return full[:, :-1] if drop_last else full


def pipeline_loss_and_location_grad(locations, images, loss_weights=(1.0, 1.0, 1.0), pipe_iters: int = 10, weights=None):
    """Mean loss over ``images`` and its gradient w.r.t. flat ``(M, 2)`` locations.

    ``weights`` fixes the density compensation; by default it is computed
    at ``locations`` and treated as a constant.
    Returns ``(loss, grad, weights)``.
    """
    images = np.asarray(images, dtype=complex)
    if images.ndim == 2:
        images = images[None]
    N = images.shape[-1]
    plan = NufftPlan(locations, N)
    if weights is None:
        weights = pipe_weights(locations, N, pipe_iters, plan=plan)
    y = plan.forward(images)  # (B, M)
    u = weights * y
    xhat = plan.adjoint(u)
    total = 0.0
    grad = np.zeros((plan.M, 2))
    for b in range(images.shape[0]):
        total += combined_loss(xhat[b], images[b], loss_weights)
        W = loss_grad_image(xhat[b], images[b], loss_weights)
        # d xhat = dF^H u + F^H (w * dF x)
        grad += plan.location_grad(W, u[b])
        grad += plan.location_grad(images[b], weights * plan.forward(W))
    n = images.shape[0]
    return total / n, 2.0 * grad / n, weights


def trajectory_gradient(control: Trajectory, batch, spec: HardwareSpec, cfg: OptimConfig):
    """Loss and control-point gradient of the reconstruction pipeline.

    Returns ``(loss, grad)`` with ``grad`` shaped like ``control.points``.
    """
    batch = np.asarray(batch)
    if batch.size == 0:
        raise ValueError("empty batch")
    factor = control.decimation * cfg.dwell_ratio
    locs = dwell_locations(control.points, factor, cfg.drop_last_sample)
    loss, g, _ = pipeline_loss_and_location_grad(
        locs.reshape(-1, 2), batch, cfg.loss_weights, cfg.pipe_iters
    )
    g = g.reshape(locs.shape)
    if cfg.drop_last_sample:
        g = np.concatenate([g, np.zeros_like(g[:, :1])], axis=1)
    grad = upsample_adjoint(g, factor)
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError(f"non-finite trajectory gradient (loss={loss!r})")
    return loss, grad


# --- initialization --------------------------------------------------------

def radial_init(n_shots: int, n_samples: int, spec: HardwareSpec | None = None, tol: float = 1e-9) -> Trajectory:
    """Center-out spokes at angles ``pi * j / n_shots``, projected to feasibility.

    With ``spec=None`` the raw (unprojected) spokes are returned.
    """
    if n_shots < 1 or n_samples < 2:
        raise ValueError("need n_shots >= 1 and n_samples >= 2")
    theta = np.pi * np.arange(n_shots) / n_shots
    radius = np.linspace(0.0, 0.5, n_samples)
    pts = np.stack(
        [radius[None, :] * np.cos(theta)[:, None], radius[None, :] * np.sin(theta)[:, None]], axis=-1
    )
    if spec is None:
        return Trajectory(pts)
    alpha, beta = scaled_bounds(spec, 1)
    z, _ = project_points(pts, alpha, beta, tol=tol)
    return Trajectory(z)


# --- the optimization loop --------------------------------------------------

@dataclass(frozen=True)
class StepRecord:
    step: int
    level: int
    loss: float
    report: FeasibilityReport
    projection_converged: bool = True

    def csv_line(self) -> str:
        r = self.report
        return ",".join([
            str(self.step),
            str(self.level),
            repr(float(self.loss)),
            repr(r.max_speed_violation),
            repr(r.max_accel_violation),
            repr(r.slew_active_fraction),
        ])


@dataclass
class RunHistory:
    config: OptimConfig
    initial: Trajectory
    records: list = field(default_factory=list)
    trajectories: list = field(default_factory=list)
    level_boundaries: list = field(default_factory=list)  # (level, first step index)
    warnings: list = field(default_factory=list)
    final: Trajectory | None = None

    HEADER = "step,level,loss,max_speed_viol,max_slew_viol,slew_active_fraction"

    @property
    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.records])

    def export_lines(self) -> str:
        return "\n".join([self.HEADER] + [r.csv_line() for r in self.records]) + "\n"

    def export(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.export_lines())


def batch_indices(seed: int, step: int, n_items: int, batch_size: int) -> np.ndarray:
    """Sampling with replacement from a counter-based generator keyed by (seed, step)."""
    bitgen = np.random.Philox(key=np.array([seed, step], dtype=np.uint64))
    return np.random.Generator(bitgen).integers(0, n_items, batch_size)


def optimize(dataset, spec: HardwareSpec, cfg: OptimConfig, init: Trajectory | None = None) -> RunHistory:
    """Multi-resolution trajectory learning.

    For every decimation level, coarse to fine: ``steps_per_level`` Adam
    iterations on the control points, each followed by a projection onto
    the (decimation-scaled) constraint set in projection mode, or with the
    squared-hinge penalty added to the loss in penalty mode.  Adam moments
    are reset when the resolution changes.
    """
    dataset = np.asarray(dataset)
    if dataset.ndim != 3 or len(dataset) == 0:
        raise ValueError("dataset must be a nonempty (n_images, N, N) stack")
    if init is None:
        init = radial_init(cfg.n_shots, cfg.n_samples, spec, cfg.projection_tol)
    if init.decimation != 1:
        raise ValueError("initial trajectory must be at raster resolution")
    if (init.n_samples - 1) % cfg.decimation_levels[0]:
        raise ValueError("initial trajectory length incompatible with decimation levels")
    history = RunHistory(config=cfg, initial=init)
    if cfg.steps_per_level == 0:
        history.final = init
        return history

    projection = cfg.mode == "projection"
    control = init
    step = 0
    for level in cfg.decimation_levels:
        control = change_resolution(control, level)
        alpha, beta = scaled_bounds(spec, level)
        dual = None
        if projection:
            pts, info = project_points(
                control.points, alpha, beta, cfg.projection_tol, cfg.projection_max_iter
            )
            control = Trajectory(pts, decimation=level)
            dual = info.dual
        history.level_boundaries.append((level, step))
        state = adam_init(control.points)
        for _ in range(cfg.steps_per_level):
            idx = batch_indices(cfg.seed, step, len(dataset), cfg.batch_size)
            loss, grad = trajectory_gradient(control, dataset[idx], spec, cfg)
            if not projection:
                p_val, p_grad = penalty_value_and_grad(control.points, alpha, beta, cfg.penalty_weights)
                loss += p_val
                grad = grad + p_grad
            state = adam_step(state, grad, cfg.lr, cfg.adam_betas, cfg.adam_eps)
            pts = np.clip(state.params, -0.5, 0.5)
            converged = True
            if projection:
                pts, info = project_points(
                    pts, alpha, beta, cfg.projection_tol, cfg.projection_max_iter, dual=dual
                )
                dual = info.dual
                converged = info.converged
                if not converged:
                    msg = f"step {step}: projection not converged (gap {info.gap:.3e})"
                    history.warnings.append(msg)
                    warnings.warn(msg, ProjectionWarning, stacklevel=2)
            state = dataclasses.replace(state, params=pts)
            control = Trajectory(pts, decimation=level)
            report = check_points(pts, alpha, beta, cfg.activity_tol)
            history.records.append(StepRecord(step, level, float(loss), report, converged))
            history.trajectories.append(control)
            step += 1
    history.final = control
    return history
