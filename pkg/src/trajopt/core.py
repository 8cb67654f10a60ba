"""Domain types, unit conventions and trajectory kinematics.

K-space coordinates are normalized to the Nyquist box [-0.5, 0.5]^2
(cycles per pixel).  Physical spatial frequency is ``k_norm * 2 * k_max``
with ``k_max = N / (2 * fov)``.  Gradients are forward differences at the
gradient raster time.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "HardwareSpec",
    "Trajectory",
    "GradientProfile",
    "normalized_bounds",
    "traj_to_profile",
    "undersampling_factor",
    "save_trajectory_csv",
    "load_trajectory_csv",
    "save_trajectory_bin",
    "load_trajectory_bin",
]


@dataclass(frozen=True)
class HardwareSpec:
    """Scanner constants.

    Defaults are typical 3T values (40 mT/m, 180 T/m/s) with the
    10 us raster / 2 us dwell timing.
    """

    gamma: float = 42.576e6  # Hz/T
    g_max: float = 0.04  # T/m
    s_max: float = 180.0  # T/m/s
    raster_dt: float = 10e-6  # s
    dwell_dt: float = 2e-6  # s
    fov: float = 0.23  # m
    matrix_size: int = 320

    def __post_init__(self):
        for name in ("gamma", "g_max", "s_max", "raster_dt", "dwell_dt", "fov", "matrix_size"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        ratio = self.raster_dt / self.dwell_dt
        if ratio < 1 - 1e-9 or abs(ratio - round(ratio)) > 1e-6:
            raise ValueError(
                f"raster_dt must be an integer multiple of dwell_dt, got ratio {ratio}"
            )

    @property
    def k_max(self) -> float:
        return self.matrix_size / (2.0 * self.fov)

    @property
    def dwell_ratio(self) -> int:
        return int(round(self.raster_dt / self.dwell_dt))


def normalized_bounds(spec: HardwareSpec) -> tuple[float, float]:
    """Speed and acceleration bounds in normalized k-space units.

    Returns ``(alpha, beta)``: the largest admissible step between two
    consecutive raster samples and the largest admissible second
    difference.
    """
    two_kmax = 2.0 * spec.k_max
    alpha = spec.gamma * spec.g_max * spec.raster_dt / two_kmax
    beta = spec.gamma * spec.s_max * spec.raster_dt**2 / two_kmax
    return alpha, beta


@dataclass(frozen=True, eq=False)
class Trajectory:
    """``n_shots x n_samples x 2`` normalized k-space trajectory.

    ``decimation`` is the number of raster steps between consecutive
    points (1 = full raster resolution).  ``points`` is stored read-only.
    """

    points: np.ndarray
    decimation: int = 1
    check_box: bool = field(default=True, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 3 or pts.shape[2] != 2:
            raise ValueError(f"points must have shape (Nc, Ns, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("trajectory contains non-finite coordinates")
        if self.check_box and np.any(np.abs(pts) > 0.5 + 1e-12):
            raise ValueError("trajectory leaves the normalized Nyquist box [-0.5, 0.5]^2")
        if int(self.decimation) != self.decimation or self.decimation < 1:
            raise ValueError(f"decimation must be an integer >= 1, got {self.decimation}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "decimation", int(self.decimation))

    @property
    def n_shots(self) -> int:
        return self.points.shape[0]

    @property
    def n_samples(self) -> int:
        return self.points.shape[1]

    def locations(self) -> np.ndarray:
        """Flattened ``(Nc*Ns, 2)`` sample locations, shot-major."""
        return self.points.reshape(-1, 2).copy()

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.decimation == other.decimation and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((self.points.tobytes(), self.decimation))


@dataclass(frozen=True, eq=False)
class GradientProfile:
    gradients: np.ndarray  # (Nc, Ns-1, 2) T/m
    slew: np.ndarray  # (Nc, Ns-2, 2) T/m/s

    @property
    def gradient_norms(self) -> np.ndarray:
        return np.linalg.norm(self.gradients, axis=-1)

    @property
    def slew_norms(self) -> np.ndarray:
        return np.linalg.norm(self.slew, axis=-1)


def traj_to_profile(traj: Trajectory, spec: HardwareSpec) -> GradientProfile:
    """Gradient and slew-rate waveforms of a full-resolution trajectory."""
    if traj.decimation != 1:
        raise ValueError("profiles are defined at raster resolution (decimation=1)")
    if traj.n_samples < 3:
        raise ValueError("at least 3 samples per shot are needed for slew rates")
    scale = 2.0 * spec.k_max / (spec.gamma * spec.raster_dt)
    grads = np.diff(traj.points, axis=1) * scale
    slew = np.diff(grads, axis=1) / spec.raster_dt
    return GradientProfile(gradients=grads, slew=slew)


def undersampling_factor(N: int, n_shots: int, n_samples: int, dwell_ratio: int) -> float:
    """Ratio of Cartesian sample count ``N**2`` to acquired sample count."""
    if min(N, n_shots, n_samples, dwell_ratio) <= 0:
        raise ValueError("all arguments must be positive")
    return N * N / (n_shots * n_samples * dwell_ratio)


# --- file formats -----------------------------------------------------------

_BIN_HEADER = struct.Struct("<III")


def save_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["shot", "index", "kx", "ky"])
        for c in range(traj.n_shots):
            for i in range(traj.n_samples):
                kx, ky = traj.points[c, i]
                writer.writerow([c, i, format(kx, ".17g"), format(ky, ".17g")])


def load_trajectory_csv(path, decimation: int = 1) -> Trajectory:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["shot", "index", "kx", "ky"]:
            raise ValueError(f"unexpected trajectory CSV header: {header}")
        rows = [(int(s), int(i), float(x), float(y)) for s, i, x, y in reader]
    if not rows:
        raise ValueError("empty trajectory file")
    n_shots = max(r[0] for r in rows) + 1
    n_samples = max(r[1] for r in rows) + 1
    if len(rows) != n_shots * n_samples:
        raise ValueError("trajectory CSV does not describe a full Nc x Ns grid")
    pts = np.full((n_shots, n_samples, 2), np.nan)
    for s, i, x, y in rows:
        pts[s, i] = x, y
    return Trajectory(pts, decimation=decimation)


def save_trajectory_bin(traj: Trajectory, path) -> None:
    data = _BIN_HEADER.pack(traj.n_shots, traj.n_samples, 2)
    data += np.ascontiguousarray(traj.points, dtype="<f8").tobytes()
    Path(path).write_bytes(data)


def load_trajectory_bin(path, decimation: int = 1) -> Trajectory:
    raw = Path(path).read_bytes()
    if len(raw) < _BIN_HEADER.size:
        raise ValueError("truncated trajectory header")
    n_shots, n_samples, dims = _BIN_HEADER.unpack_from(raw)
    if dims != 2:
        raise ValueError(f"only 2D trajectories are supported, got dims={dims}")
    expected = _BIN_HEADER.size + 8 * n_shots * n_samples * dims
    if len(raw) != expected:
        raise ValueError(f"trajectory file has {len(raw)} bytes, expected {expected}")
    pts = np.frombuffer(raw, dtype="<f8", offset=_BIN_HEADER.size)
    return Trajectory(pts.reshape(n_shots, n_samples, dims), decimation=decimation)
