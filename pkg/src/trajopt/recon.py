"""Non-learned reconstructions: density-compensated adjoint and weighted CG."""

import numpy as np

from .nufft import NufftPlan

__all__ = ["dc_adjoint", "cg_least_squares"]


def dc_adjoint(y, w, locations, N: int, plan: NufftPlan | None = None) -> np.ndarray:
    """``F^H (w * y)``."""
    y = np.asarray(y)
    w = np.asarray(w, dtype=float)
    if y.shape[-1] != w.shape[-1]:
        raise ValueError(f"{y.shape[-1]} samples but {w.shape[-1]} weights")
    if plan is None:
        plan = NufftPlan(locations, N)
    return plan.adjoint(w * y)


def cg_least_squares(y, w, locations, N: int, iters: int = 10, plan: NufftPlan | None = None) -> np.ndarray:
    """Minimize ``||sqrt(w) * (F x - y)||^2`` by CG on the normal equations.

    Starts from :func:`dc_adjoint`.  Each iteration does not increase the
    weighted data residual.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if plan is None:
        plan = NufftPlan(locations, N)
    w = np.asarray(w, dtype=float)

    def normal(x):
        return plan.adjoint(w * plan.forward(x))

    b = plan.adjoint(w * np.asarray(y))
    x = b.copy()
    r = b - normal(x)
    p = r.copy()
    rr = np.vdot(r, r).real
    for it in range(iters):
        if rr == 0.0:
            break
        Ap = normal(p)
        denom = np.vdot(p, Ap).real
        if denom <= 0.0:
            break
        a = rr / denom
        x = x + a * p
        r = r - a * Ap
        rr_new = np.vdot(r, r).real
        if not np.isfinite(rr_new):
            raise FloatingPointError(f"CG produced non-finite residual at iteration {it}")
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x
