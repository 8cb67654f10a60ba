"""Convergence of the density-compensation iteration for both kernels.

For radial and random sampling, prints the worst deviation of ``|G w|``
from 1 (0 at a fixed point) after each iteration.  The Dirichlet kernel keeps
oscillating on sparse radial patterns; the Fejer kernel settles.

    python scripts/density_kernels.py
"""

import numpy as np

from trajopt.density import _fejer_operator
from trajopt.nufft import NufftPlan
from trajopt.optimizer import dwell_locations, radial_init


def residuals(locs, N, kernel, iters):
    if kernel == "fejer":
        apply = _fejer_operator(locs, N)
    else:
        plan = NufftPlan(locs, N)

        def apply(w):
            return plan.forward(plan.adjoint(w))

    w = np.full(len(locs), 1.0 / len(locs))
    out = []
    for _ in range(iters):
        g = np.abs(apply(w.astype(complex)))
        w = w / g
        out.append(float(np.max(np.abs(np.abs(apply(w.astype(complex))) - 1.0))))
    return out


def main():
    N = 64
    cases = {
        "radial 4x129": dwell_locations(radial_init(4, 65).points, 2).reshape(-1, 2),
        "radial 16x65": radial_init(16, 65).locations(),
        "random 500": np.random.default_rng(0).uniform(-0.5, 0.5, (500, 2)),
    }
    for name, locs in cases.items():
        for kernel in ("fejer", "dirichlet"):
            r = residuals(locs, N, kernel, 10)
            print(f"{name:>14} {kernel:>9}: " + " ".join(f"{v:8.2e}" for v in r))


if __name__ == "__main__":
    main()
