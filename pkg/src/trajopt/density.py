"""Iterative (Pipe-Menon style) sampling density compensation.

The iteration ``w <- w / |G w|`` needs a sample-to-sample kernel ``G``.
Two kernels are available:

``"dirichlet"``
    ``G = F F^H`` with the exact transform.  Its kernel (a 2D Dirichlet
    kernel) has negative side lobes, so ``G w`` can nearly cancel at a
    sample and the iteration oscillates on strongly non-uniform patterns.
``"fejer"`` (default)
    ``G[m, m'] = |(F F^H)[m, m']|^2 / N^2``, the Fejer kernel.  It is
    positive with diagonal ``N^2``, so every weight stays below ``1/N^2``
    and the iteration is stable.  It is applied as a forward / adjoint
    pair on a ``2N`` grid with a triangular taper.

Both kernels equal ``N^2 I`` on the full Cartesian grid, where the
weights are uniform ``1/N^2`` after one iteration.
"""

import numpy as np

from .nufft import NufftPlan

__all__ = ["pipe_weights", "DegenerateSamplingError", "KERNELS"]

KERNELS = ("fejer", "dirichlet")


class DegenerateSamplingError(ArithmeticError):
    pass


def _fejer_operator(locations, N):
    plan2 = NufftPlan(locations, 2 * N)
    tri = (N - np.abs(plan2.r)) / N
    taper = np.outer(tri, tri)

    def apply(w):
        return plan2.forward(taper * plan2.adjoint(w))

    return apply


def pipe_weights(locations, N: int, iters: int = 10, plan: NufftPlan | None = None, kernel: str = "fejer") -> np.ndarray:
    """Density compensation weights for ``locations`` on an ``N x N`` image.

    Iterates ``w <- w / |G w|`` from ``w = 1/M`` (see module docstring for
    the choice of ``G``).

    Parameters
    ----------
    locations : (M, 2) array
        Normalized sample locations.
    N : int
        Image size.
    iters : int
        Number of fixed-point iterations (>= 1).
    plan : NufftPlan, optional
        Precomputed phase tables for the same locations (dirichlet kernel).
    kernel : {"fejer", "dirichlet"}

    Returns
    -------
    w : (M,) array of nonnegative weights
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    locations = np.asarray(locations, dtype=float)
    if kernel == "fejer":
        apply = _fejer_operator(locations, N)
    elif kernel == "dirichlet":
        if plan is None:
            plan = NufftPlan(locations, N)

        def apply(w):
            return plan.forward(plan.adjoint(w))
    else:
        raise ValueError(f"kernel must be one of {KERNELS}, got {kernel!r}")
    M = locations.shape[0]
    w = np.full(M, 1.0 / M)
    for it in range(iters):
        denom = np.abs(apply(w.astype(complex)))
        worst = int(np.argmin(denom))
        if denom[worst] < 1e-14:
            raise DegenerateSamplingError(
                f"density iteration {it}: |G w| = {denom[worst]:.3e} at sample {worst} "
                f"(location {locations[worst].tolist()})"
            )
        w = w / denom
    return w
