"""Feasibility checks and Euclidean projection onto the kinematic constraint set.

The feasible set for one shot ``z`` (``Ns x 2``) is

    ||z[i+1] - z[i]||_2          <= alpha     (gradient amplitude)
    ||z[i+2] - 2 z[i+1] + z[i]||_2 <= beta    (slew rate)
    |z[i, a]|                    <= 0.5       (Nyquist box)

Shots are independent.  The projection is computed by FISTA on the dual
problem; all shots are processed together as one batch of arrays.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np

from .core import HardwareSpec, Trajectory, normalized_bounds

__all__ = [
    "FeasibilityReport",
    "ProjectionInfo",
    "ProjectionWarning",
    "scaled_bounds",
    "check_feasibility",
    "check_points",
    "project",
    "project_points",
]

BOX = 0.5


class ProjectionWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class FeasibilityReport:
    max_speed_violation: float
    max_accel_violation: float
    speed_active_fraction: float
    slew_active_fraction: float

    @property
    def max_violation(self) -> float:
        return max(self.max_speed_violation, self.max_accel_violation)


@dataclass
class ProjectionInfo:
    converged: bool
    iterations: int
    gap: float  # worst per-shot duality gap (squared normalized units)
    residual: float  # feasibility violation of the dual iterate before restoration
    dual: tuple  # (u, v, w) dual variables, reusable as a warm start


def scaled_bounds(spec: HardwareSpec, decimation: int = 1) -> tuple[float, float]:
    """Bounds for control points spaced ``decimation`` raster steps apart."""
    alpha, beta = normalized_bounds(spec)
    return alpha * decimation, beta * decimation**2


def _d1(z):
    return z[:, 1:] - z[:, :-1]


def _d2(z):
    return z[:, 2:] - 2.0 * z[:, 1:-1] + z[:, :-2]


def _d1t(u):
    pad = np.zeros((u.shape[0], 1, u.shape[2]))
    return np.concatenate([pad, u], axis=1) - np.concatenate([u, pad], axis=1)


def _d2t(v):
    return _d1t(_d1t(v))


def check_points(points, alpha, beta, activity_tol=0.01) -> FeasibilityReport:
    points = np.asarray(points, dtype=float)
    if points.shape[1] < 3:
        raise ValueError("at least 3 samples per shot are needed")
    if not 0 < activity_tol < 1:
        raise ValueError("activity_tol must lie in (0, 1)")
    speed = np.linalg.norm(_d1(points), axis=-1)
    accel = np.linalg.norm(_d2(points), axis=-1)
    return FeasibilityReport(
        max_speed_violation=float(max(0.0, np.max(speed - alpha))),
        max_accel_violation=float(max(0.0, np.max(accel - beta))),
        speed_active_fraction=float(np.mean(speed >= (1 - activity_tol) * alpha)),
        slew_active_fraction=float(np.mean(accel >= (1 - activity_tol) * beta)),
    )


def check_feasibility(traj: Trajectory, spec: HardwareSpec, activity_tol: float = 0.01) -> FeasibilityReport:
    """Constraint violations and activity of ``traj``.

    Bounds are scaled by the trajectory's decimation, so a control-point
    trajectory is judged against the bounds it is projected onto.
    """
    alpha, beta = scaled_bounds(spec, traj.decimation)
    return check_points(traj.points, alpha, beta, activity_tol)


@functools.lru_cache(maxsize=64)
def _operator_norm_sq(n_samples: int, n_iter: int = 50) -> float:
    # power iteration on L^T L with L = [D1; D2; I]
    rng = np.random.default_rng(n_samples)
    z = rng.standard_normal((1, n_samples, 2))
    est = 0.0
    for _ in range(n_iter):
        z = _d1t(_d1(z)) + _d2t(_d2(z)) + z
        est = np.linalg.norm(z)
        z /= est
    # power iteration approaches from below; 21 is the analytic ceiling (4 + 16 + 1)
    return min(1.02 * est, 21.0)


def _restore(z, mean, alpha, beta, box=BOX):
    """Shrink each shot toward ``mean`` until it is exactly feasible."""
    if box is not None:
        z = np.clip(z, -box, box)
    speed = np.linalg.norm(_d1(z), axis=-1).max(axis=1, initial=0.0)
    accel = np.linalg.norm(_d2(z), axis=-1).max(axis=1, initial=0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.minimum(1.0, np.minimum(alpha / speed, beta / accel))
    # land strictly inside so round-off cannot push the norm back above the bound
    shrink = s < 1.0
    if not shrink.any():
        return z
    s = np.where(shrink, s * (1 - 1e-13), 1.0)[:, None, None]
    return np.where(shrink[:, None, None], mean + s * (z - mean), z)


def _support(radius, norms):
    # radius * sum ||lam_j||, with an infinite radius only reached at lam = 0
    total = norms.sum(axis=1)
    with np.errstate(invalid="ignore"):
        return np.where(total > 0, radius * total, 0.0)


def _dual_value(k, z, u, v, w, alpha, beta, box):
    # D(lam) = <lam, L k> - 1/2 ||L^T lam||^2 - sum_j r_j ||lam_j||, per shot
    lt = k - z
    val = (
        np.sum(u * _d1(k), axis=(1, 2))
        + np.sum(v * _d2(k), axis=(1, 2))
        + np.sum(w * k, axis=(1, 2))
        - 0.5 * np.sum(lt * lt, axis=(1, 2))
        - _support(alpha, np.linalg.norm(u, axis=-1))
        - _support(beta, np.linalg.norm(v, axis=-1))
    )
    if box is not None:
        val = val - _support(box, np.abs(w).reshape(w.shape[0], -1))
    return val


def _group_shrink(x, thresh):
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(norm > thresh, 1.0 - thresh / norm, 0.0)
    return x * factor


def project_points(
    points,
    alpha: float,
    beta: float,
    tol: float = 1e-9,
    max_iter: int = 5000,
    gap_rtol: float = 1e-12,
    dual=None,
    check_every: int = 10,
    box: float | None = BOX,
):
    """Project a ``(Nc, Ns, 2)`` array of shots onto the constraint set.

    Returns ``(z, info)``.  ``z`` is always feasible to within ``tol``
    (a final shrink toward each shot's centroid removes any residual
    violation of the dual iterate).  Convergence means the per-shot
    duality gap fell below ``gap_rtol`` times the squared displacement,
    or to the round-off level of the objective.
    Bounds may be ``inf``; ``box=None`` drops the coordinate box, and
    two-sample shots carry no slew constraint.
    ``dual`` warm-starts the iteration with a previous ``info.dual``.
    """
    k = np.asarray(points, dtype=float)
    if k.ndim != 3 or k.shape[2] != 2:
        raise ValueError(f"points must have shape (Nc, Ns, 2), got {k.shape}")
    n_shots, n_samples, _ = k.shape
    if n_samples < 2:
        raise ValueError("at least 2 samples per shot are needed")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if alpha < 0 or beta < 0:
        raise ValueError("bounds must be nonnegative")
    mean = k.mean(axis=1, keepdims=True)
    if box is not None:
        mean = np.clip(mean, -box, box)

    if dual is not None and dual[0].shape == (n_shots, n_samples - 1, 2):
        u, v, w = (np.array(d, dtype=float) for d in dual)
    else:
        u = np.zeros((n_shots, n_samples - 1, 2))
        v = np.zeros((n_shots, n_samples - 2, 2))
        w = np.zeros((n_shots, n_samples, 2))
    if box is None:
        w = np.zeros((n_shots, n_samples, 2))
    step = 1.0 / _operator_norm_sq(n_samples)
    # the gap is a difference of sums of size ~||k||^2; below this it is noise
    roundoff = 16 * np.finfo(float).eps * (np.sum(k * k, axis=(1, 2)) + 1e-30)

    def primal(u, v, w):
        return k - _d1t(u) - _d2t(v) - w

    def status(u, v, w):
        z = primal(u, v, w)
        resid = max(
            float(np.max(np.linalg.norm(_d1(z), axis=-1) - alpha, initial=0.0)),
            float(np.max(np.linalg.norm(_d2(z), axis=-1) - beta, initial=0.0)),
            float(np.max(np.abs(z) - box, initial=0.0)) if box is not None else 0.0,
        )
        zf = _restore(z, mean, alpha, beta, box)
        p_val = 0.5 * np.sum((zf - k) ** 2, axis=(1, 2))
        gap = p_val - _dual_value(k, z, u, v, w, alpha, beta, box)
        done = gap <= gap_rtol * p_val + roundoff
        return zf, resid, gap, done

    zf, resid, gap, done = status(u, v, w)
    it = 0
    if not done.all():
        yu, yv, yw = u.copy(), v.copy(), w.copy()
        t = np.ones(n_shots)
        for it in range(1, max_iter + 1):
            z = primal(yu, yv, yw)
            nu = _group_shrink(yu + step * _d1(z), step * alpha)
            nv = _group_shrink(yv + step * _d2(z), step * beta)
            if box is None:
                nw = w
            else:
                raw = yw + step * z
                nw = np.sign(raw) * np.maximum(np.abs(raw) - step * box, 0.0)
            # gradient-based adaptive restart, per shot
            restart = (
                np.sum((yu - nu) * (nu - u), axis=(1, 2))
                + np.sum((yv - nv) * (nv - v), axis=(1, 2))
                + np.sum((yw - nw) * (nw - w), axis=(1, 2))
            ) > 0
            t_next = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
            mom = np.where(restart, 0.0, (t - 1) / t_next)[:, None, None]
            t = np.where(restart, 1.0, t_next)
            yu = nu + mom * (nu - u)
            yv = nv + mom * (nv - v)
            yw = nw + mom * (nw - w)
            u, v, w = nu, nv, nw
            if it % check_every == 0 or it == max_iter:
                zf, resid, gap, done = status(u, v, w)
                if done.all():
                    break
    return zf, ProjectionInfo(
        converged=bool(done.all()),
        iterations=it,
        gap=float(np.max(gap)),
        residual=resid,
        dual=(u, v, w),
    )


def project(
    traj: Trajectory,
    spec: HardwareSpec,
    tol: float = 1e-9,
    max_iter: int = 5000,
) -> Trajectory:
    """Nearest hardware-compliant trajectory (Euclidean distance).

    Bounds are scaled by ``traj.decimation``.  Emits a
    :class:`ProjectionWarning` carrying the attained duality gap if the
    dual iteration does not converge within ``max_iter``; the returned
    trajectory is feasible either way.
    """
    alpha, beta = scaled_bounds(spec, traj.decimation)
    z, info = project_points(traj.points, alpha, beta, tol=tol, max_iter=max_iter)
    if not info.converged:
        warnings.warn(
            f"projection did not converge in {max_iter} iterations "
            f"(duality gap {info.gap:.3e}, dual residual {info.residual:.3e})",
            ProjectionWarning,
            stacklevel=2,
        )
    return Trajectory(z, decimation=traj.decimation)
