"""Linear interpolation of control points to sample locations, and its adjoint."""

import numpy as np

from .core import Trajectory

__all__ = ["upsample_points", "upsample_linear", "upsample_adjoint", "change_resolution"]


def _weights(factor: int) -> np.ndarray:
    return np.arange(factor) / factor


def upsample_points(points, factor: int) -> np.ndarray:
    """Insert ``factor - 1`` equally spaced points in every interval.

    ``(Nc, Ns, d) -> (Nc, (Ns-1)*factor + 1, d)``; knots are reproduced exactly.
    """
    if int(factor) != factor or factor < 1:
        raise ValueError(f"factor must be an integer >= 1, got {factor}")
    points = np.asarray(points, dtype=float)
    if factor == 1:
        return points.copy()
    lam = _weights(factor)[None, None, :, None]
    left = points[:, :-1, None, :]
    right = points[:, 1:, None, :]
    inner = (1.0 - lam) * left + lam * right  # (Nc, Ns-1, factor, d)
    n_shots, n_int = inner.shape[:2]
    out = inner.reshape(n_shots, n_int * factor, -1)
    return np.concatenate([out, points[:, -1:, :]], axis=1)


def upsample_linear(control: Trajectory, factor: int) -> Trajectory:
    """Piecewise-linear refinement of a control-point trajectory.

    Refining past raster resolution (dwell-time sampling) reports
    ``decimation=1``.
    """
    pts = upsample_points(control.points, factor)
    return Trajectory(pts, decimation=max(control.decimation // factor, 1))


def upsample_adjoint(grad_full, factor: int) -> np.ndarray:
    """Transpose of :func:`upsample_points` applied to ``(Nc, Ns', d)`` gradients."""
    if int(factor) != factor or factor < 1:
        raise ValueError(f"factor must be an integer >= 1, got {factor}")
    g = np.asarray(grad_full, dtype=float)
    n_full = g.shape[1]
    if (n_full - 1) % factor:
        raise ValueError(f"length {n_full} is not (Ns-1)*{factor}+1 for any Ns")
    if factor == 1:
        return g.copy()
    n_int = (n_full - 1) // factor
    lam = _weights(factor)[None, None, :, None]
    blocks = g[:, :-1, :].reshape(g.shape[0], n_int, factor, -1)
    out = np.zeros((g.shape[0], n_int + 1, g.shape[2]))
    out[:, :-1] += np.sum((1.0 - lam) * blocks, axis=2)
    out[:, 1:] += np.sum(lam * blocks, axis=2)
    out[:, -1] += g[:, -1]
    return out


def change_resolution(control: Trajectory, new_decimation: int) -> Trajectory:
    """Refine (linear interpolation) or coarsen (subsampling) control points."""
    old = control.decimation
    if new_decimation == old:
        return control
    n_int = control.n_samples - 1
    if new_decimation < old:
        if old % new_decimation:
            raise ValueError(f"decimation {new_decimation} does not divide {old}")
        ratio = old // new_decimation
        return Trajectory(upsample_points(control.points, ratio), decimation=new_decimation)
    if new_decimation % old:
        raise ValueError(f"decimation {old} does not divide {new_decimation}")
    ratio = new_decimation // old
    if n_int % ratio:
        raise ValueError(f"{n_int} intervals cannot be coarsened by {ratio}")
    return Trajectory(control.points[:, ::ratio], decimation=new_decimation)
