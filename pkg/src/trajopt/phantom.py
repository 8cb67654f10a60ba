"""Synthetic phantoms with smooth phase, and grayscale image I/O."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "SHEPP_LOGAN_ELLIPSES",
    "pixel_grid",
    "shepp_logan",
    "synth_phase",
    "make_dataset",
    "load_gray_image",
    "save_image",
]

# (intensity, semi-axis x, semi-axis y, center x, center y, angle in degrees)
# Modified (high-contrast) Shepp-Logan parameters; values stay in [0, 1].
SHEPP_LOGAN_ELLIPSES = np.array([
    [1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0],
    [-0.80, 0.6624, 0.8740, 0.00, -0.0184, 0.0],
    [-0.20, 0.1100, 0.3100, 0.22, 0.0000, -18.0],
    [-0.20, 0.1600, 0.4100, -0.22, 0.0000, 18.0],
    [0.10, 0.2100, 0.2500, 0.00, 0.3500, 0.0],
    [0.10, 0.0460, 0.0460, 0.00, 0.1000, 0.0],
    [0.10, 0.0460, 0.0460, 0.00, -0.1000, 0.0],
    [0.10, 0.0460, 0.0230, -0.08, -0.6050, 0.0],
    [0.10, 0.0230, 0.0230, 0.00, -0.6060, 0.0],
    [0.10, 0.0230, 0.0460, 0.06, -0.6050, 0.0],
])

_KIMG = struct.Struct("<4sII")


def pixel_grid(N: int):
    """Pixel-center coordinates in [-1, 1]; row 0 is the top (y = +1 side)."""
    c = (np.arange(N) + 0.5) / N * 2.0 - 1.0
    x = c[None, :]
    y = -c[:, None]
    return x, y


def _jitter(ellipses, seed):
    rng = np.random.default_rng(seed)
    e = ellipses.copy()
    n = len(e)
    e[:, 1:3] *= 1.0 + rng.uniform(-0.05, 0.05, (n, 2))
    e[:, 3:5] += rng.uniform(-0.05, 0.05, (n, 2))
    e[:, 5] += rng.uniform(-0.05, 0.05, n) * 180.0
    return e


def shepp_logan(N: int, perturb_seed: int | None = None) -> np.ndarray:
    """Rasterized 10-ellipse phantom, optionally with jittered geometry.

    A seed perturbs every ellipse by up to 5%: semi-axes relatively,
    centers by 0.05 (5% of the field width [-1, 1] half-span) and angles
    by 9 degrees (5% of a half turn).
    """
    if N < 16 or N % 2:
        raise ValueError(f"N must be even and >= 16, got {N}")
    ellipses = SHEPP_LOGAN_ELLIPSES if perturb_seed is None else _jitter(SHEPP_LOGAN_ELLIPSES, perturb_seed)
    x, y = pixel_grid(N)
    img = np.zeros((N, N))
    for rho, a, b, x0, y0, deg in ellipses:
        th = np.deg2rad(deg)
        dx, dy = x - x0, y - y0
        u = dx * np.cos(th) + dy * np.sin(th)
        v = -dx * np.sin(th) + dy * np.cos(th)
        img += rho * ((u / a) ** 2 + (v / b) ** 2 <= 1.0)
    return np.clip(img, 0.0, 1.0)


def synth_phase(mag, smoothness: float, seed: int) -> np.ndarray:
    """``mag * exp(i phi)`` with ``phi`` a random polynomial of degree <= 2.

    ``phi`` is rescaled so that ``max |phi| = pi * smoothness``.
    """
    mag = np.asarray(mag, dtype=float)
    if smoothness < 0:
        raise ValueError("smoothness must be positive")
    rng = np.random.default_rng(seed)
    coef = rng.uniform(-1.0, 1.0, 6)
    x, y = pixel_grid(mag.shape[0])
    x = np.broadcast_to(x, mag.shape)
    y = np.broadcast_to(y, mag.shape)
    phi = coef[0] + coef[1] * x + coef[2] * y + coef[3] * x * x + coef[4] * x * y + coef[5] * y * y
    peak = np.max(np.abs(phi))
    if peak > 0:
        phi = phi * (np.pi * smoothness / peak)
    return mag * np.exp(1j * phi)


def make_dataset(N: int, seeds, smoothness: float = 0.5) -> np.ndarray:
    """Stack of perturbed complex phantoms, one per seed."""
    return np.stack([synth_phase(shepp_logan(N, s), smoothness, s) for s in seeds])


# --- I/O -------------------------------------------------------------------

def save_image(path, image) -> None:
    """Write a real image.

    ``.png`` stores an 8-bit grayscale quantization of [0, 1] (round half
    up); any other suffix stores the raw ``KIMG`` float64 format.
    """
    path = Path(path)
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError("image must be 2D")
    if path.suffix.lower() == ".png":
        q = np.floor(np.clip(image, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
        Image.fromarray(q, mode="L").save(path)
        return
    rows, cols = image.shape
    path.write_bytes(_KIMG.pack(b"KIMG", rows, cols) + np.ascontiguousarray(image, dtype="<f8").tobytes())


def load_gray_image(path) -> np.ndarray:
    """Read a square grayscale image.

    PNGs (8- or 16-bit) are normalized to [0, 1] by their bit depth; raw
    ``KIMG`` files are returned bit-exactly.
    """
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == b"KIMG":
        if len(raw) < _KIMG.size:
            raise ValueError("truncated KIMG header")
        _, rows, cols = _KIMG.unpack_from(raw)
        if rows != cols:
            raise ValueError(f"image is not square ({rows}x{cols})")
        if len(raw) != _KIMG.size + 8 * rows * cols:
            raise ValueError("KIMG payload size does not match header")
        return np.frombuffer(raw, dtype="<f8", offset=_KIMG.size).reshape(rows, cols).copy()
    with Image.open(path) as im:
        if im.mode == "L":
            scale = 255.0
        elif im.mode in ("I;16", "I;16B", "I;16L", "I"):
            scale = 65535.0
        else:
            raise ValueError(f"unsupported image mode {im.mode!r}; expected 8/16-bit grayscale")
        data = np.asarray(im, dtype=float)
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise ValueError(f"image is not square: {data.shape}")
    return data / scale
