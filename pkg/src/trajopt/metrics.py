"""Image quality metrics and the combined L1 / L2 / MSSIM training loss.

SSIM is computed on magnitude images with a uniform ``window x window``
box, averaged over all windows lying fully inside the image.  Variances
and covariances are population (1/n) statistics.  The dynamic range is
the peak magnitude of the reference (magnitudes start at zero).

Complex gradients use the Wirtinger convention ``dL/d conj(x)``, so a
real-valued perturbation ``dx`` changes the loss by ``2 Re <W, dx>``.
"""

import numpy as np

__all__ = [
    "PSNR_CAP",
    "psnr",
    "ssim",
    "combined_loss",
    "loss_grad_image",
]

PSNR_CAP = 1e9
HUBER_DELTA = 1e-6


def psnr(xhat, xref) -> float:
    """Peak signal-to-noise ratio in dB, peak = max |xref|.

    Returns ``PSNR_CAP`` when the images are identical.
    """
    xhat = np.asarray(xhat)
    xref = np.asarray(xref)
    if xhat.shape != xref.shape:
        raise ValueError(f"shape mismatch {xhat.shape} vs {xref.shape}")
    peak = np.max(np.abs(xref))
    if peak == 0:
        raise ValueError("reference image is identically zero")
    mse = np.mean(np.abs(xhat - xref) ** 2)
    if mse == 0:
        return PSNR_CAP
    return float(min(10.0 * np.log10(peak**2 / mse), PSNR_CAP))


def _box_sum(img, w):
    """Sums over all fully contained ``w x w`` windows."""
    c = np.cumsum(np.cumsum(img, axis=-2), axis=-1)
    c = np.pad(c, [(0, 0)] * (c.ndim - 2) + [(1, 0), (1, 0)])
    return c[..., w:, w:] - c[..., :-w, w:] - c[..., w:, :-w] + c[..., :-w, :-w]


def _box_sum_adjoint(win_map, w):
    """Transpose of :func:`_box_sum`: spread each window value over its pixels."""
    pad = [(0, 0)] * (win_map.ndim - 2) + [(w - 1, w - 1), (w - 1, w - 1)]
    return _box_sum(np.pad(win_map, pad), w)


def _ssim_parts(a, b, window, k1, k2):
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    if min(a.shape[-2:]) < window:
        raise ValueError(f"image {a.shape[-2:]} smaller than the {window}x{window} window")
    L = np.max(b)
    if L == 0:
        L = 1.0
    c1 = (k1 * L) ** 2
    c2 = (k2 * L) ** 2
    n = window * window
    mu_a = _box_sum(a, window) / n
    mu_b = _box_sum(b, window) / n
    var_a = _box_sum(a * a, window) / n - mu_a**2
    var_b = _box_sum(b * b, window) / n - mu_b**2
    cov = _box_sum(a * b, window) / n - mu_a * mu_b
    A1 = 2 * mu_a * mu_b + c1
    A2 = 2 * cov + c2
    B1 = mu_a**2 + mu_b**2 + c1
    B2 = var_a + var_b + c2
    S = A1 * A2 / (B1 * B2)
    return S, (mu_a, mu_b, A1, A2, B1, B2, n)


def ssim(xhat, xref, window: int = 7, k1: float = 0.01, k2: float = 0.03) -> float:
    """Mean structural similarity of the magnitudes of two images."""
    a = np.abs(np.asarray(xhat)).astype(float)
    b = np.abs(np.asarray(xref)).astype(float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    S, _ = _ssim_parts(a, b, window, k1, k2)
    return float(np.mean(S))


def _mssim_grad(a, b, window, k1, k2):
    """d MSSIM / d a for real images ``a`` (varied) and ``b`` (fixed)."""
    S, (mu_a, mu_b, A1, A2, B1, B2, n) = _ssim_parts(a, b, window, k1, k2)
    scale = 2.0 / (n * B1 * B2 * S.size)
    c0 = scale * (mu_b * A2 - A1 * mu_b - S * mu_a * B2 + S * B1 * mu_a)
    c1 = scale * A1
    c2 = -scale * S * B1
    return (
        _box_sum_adjoint(c0, window)
        + b * _box_sum_adjoint(c1, window)
        + a * _box_sum_adjoint(c2, window)
    )


def combined_loss(xhat, xref, weights=(1.0, 1.0, 1.0), window: int = 7, k1: float = 0.01, k2: float = 0.03) -> float:
    """``l1 * mean|d| + l2 * mean|d|^2 + l3 * (1 - MSSIM(|xhat|, |xref|))``."""
    l1, l2, l3 = weights
    if min(weights) < 0:
        raise ValueError("loss weights must be nonnegative")
    xhat = np.asarray(xhat)
    xref = np.asarray(xref)
    d = np.abs(xhat - xref)
    loss = l1 * np.mean(d) + l2 * np.mean(d * d)
    if l3:
        loss += l3 * (1.0 - ssim(xhat, xref, window, k1, k2))
    return float(loss)


def loss_grad_image(xhat, xref, weights=(1.0, 1.0, 1.0), window: int = 7, k1: float = 0.01, k2: float = 0.03) -> np.ndarray:
    """Wirtinger gradient ``dL/d conj(xhat)`` of :func:`combined_loss`.

    The L1 term is Huber-smoothed (delta = 1e-6) so the gradient is
    defined at ``xhat == xref``.
    """
    l1, l2, l3 = weights
    xhat = np.asarray(xhat, dtype=complex)
    xref = np.asarray(xref)
    d = xhat - xref
    size = d.size
    grad = np.zeros_like(xhat)
    if l1:
        grad += (l1 / size) * d / (2.0 * np.maximum(np.abs(d), HUBER_DELTA))
    if l2:
        grad += (l2 / size) * d
    if l3:
        a = np.abs(xhat)
        g_mag = -l3 * _mssim_grad(a, np.abs(xref).astype(float), window, k1, k2)
        with np.errstate(divide="ignore", invalid="ignore"):
            phase = np.where(a > 0, xhat / (2.0 * a), 0.0)
        grad += g_mag * phase
    return grad
