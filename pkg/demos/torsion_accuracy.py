"""Grid-refinement study of the torsion solver against the exact reference.

Straight tubes have the closed-form torsion function, so the full
two-dimensional solve can be graded exactly.  Errors fall at better than
fourth order on the graded mesh; the steep-profile case (radius 1.5) shows
why the mesh clusters toward the boundary.
"""

import time

import numpy as np

from serrin import BoundaryProfile, radial_torsion, solve_torsion
from serrin.radial import radial_flux


def main():
    print(f"{'radius':>7s} {'nodes':>9s} {'u error':>10s} {'flux error':>11s} "
          f"{'seconds':>8s}")
    for lam in (0.8, 1.2, 1.5):
        prev = None
        for n in (16, 32, 64, 128):
            prof = BoundaryProfile.constant("xi", lam)
            start = time.perf_counter()
            fld = solve_torsion(prof, (n, 16))
            dt = time.perf_counter() - start
            err = np.max(np.abs(fld.u - radial_torsion(lam, fld.t * lam)[:, None]))
            ferr = abs(np.mean(fld.neumann) - radial_flux(lam))
            rate = f"  (order {np.log2(prev / err):4.1f})" if prev else ""
            print(f"{lam:7.2f} {n:4d}x16   {err:10.2e} {ferr:11.2e} {dt:8.2f}{rate}")
            prev = err
        print()


if __name__ == "__main__":
    main()
