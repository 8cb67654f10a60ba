"""Exact non-uniform Fourier transform by direct summation.

    y_m = sum_n x_n exp(-2 pi i k_m . r_n)

with pixel coordinates ``r = (ix - N/2, iy - N/2)`` for ``image[iy, ix]``
and normalized locations ``k_m = (kx, ky)``.  No normalization is applied
to the forward transform; the adjoint is its exact conjugate transpose.

The exponential factorizes over the two axes, so each transform is two
dense matrix products of cost O(M N^2) instead of an explicit M x N^2
matrix.  Leading batch dimensions on images / data are supported.
"""

import numpy as np

__all__ = [
    "pixel_coords",
    "nufft_forward",
    "nufft_adjoint",
    "nufft_location_grad",
    "NufftPlan",
]


def pixel_coords(N: int) -> np.ndarray:
    if N % 2:
        raise ValueError(f"image size must be even, got {N}")
    return np.arange(N) - N // 2


class NufftPlan:
    """Precomputed per-axis phase tables for a set of locations."""

    def __init__(self, locations, N: int):
        locations = np.asarray(locations, dtype=float)
        if locations.ndim != 2 or locations.shape[1] != 2:
            raise ValueError(f"locations must have shape (M, 2), got {locations.shape}")
        self.N = N
        self.locations = locations
        self.r = pixel_coords(N).astype(float)
        self.ex = np.exp(-2j * np.pi * np.outer(locations[:, 0], self.r))  # (M, N)
        self.ey = np.exp(-2j * np.pi * np.outer(locations[:, 1], self.r))

    @property
    def M(self) -> int:
        return self.locations.shape[0]

    def forward(self, x):
        x = np.asarray(x)
        if x.shape[-2:] != (self.N, self.N):
            raise ValueError(f"expected a {self.N}x{self.N} image, got {x.shape}")
        # (..., N_y, M) then contract the y axis against ey
        tmp = x @ self.ex.T
        return np.einsum("...jm,mj->...m", tmp, self.ey)

    def adjoint(self, y):
        y = np.asarray(y)
        if y.shape[-1] != self.M:
            raise ValueError(f"expected {self.M} samples, got {y.shape[-1]}")
        return (self.ey.conj().T * y[..., None, :]) @ self.ex.conj()

    def location_grad(self, x, cotangent):
        """d Re<c, F x> / d k_m, shape ``(M, 2)``; summed over any batch axis."""
        x = np.asarray(x)
        c = np.conj(np.asarray(cotangent))
        gx = self.forward(x * self.r[None, :])
        gy = self.forward(x * self.r[:, None])
        scale = -2j * np.pi
        out = np.stack([np.real(c * scale * gx), np.real(c * scale * gy)], axis=-1)
        if out.ndim > 2:
            out = out.reshape(-1, self.M, 2).sum(axis=0)
        return out


def nufft_forward(x, locations) -> np.ndarray:
    """Samples of the Fourier transform of image ``x`` at ``locations``."""
    x = np.asarray(x)
    return NufftPlan(locations, x.shape[-1]).forward(x)


def nufft_adjoint(y, locations, N: int) -> np.ndarray:
    """Conjugate transpose of :func:`nufft_forward`."""
    return NufftPlan(locations, N).adjoint(y)


def nufft_location_grad(x, locations, cotangent) -> np.ndarray:
    """Gradient of ``Re <cotangent, nufft_forward(x, locations)>`` w.r.t. locations.

    Uses the analytic derivative
    ``d y_m / d k_m^a = -2 pi i sum_n r_n^a x_n exp(-2 pi i k_m . r_n)``.
    """
    x = np.asarray(x)
    return NufftPlan(locations, x.shape[-1]).location_grad(x, cotangent)
