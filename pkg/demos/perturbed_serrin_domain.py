"""Trace a branch of perturbed Serrin domains and inspect one of them.

Certifies the bifurcation hypotheses at the first xi root, follows the
branch to a visible amplitude, and contrasts the continued profile (flux
constant to ~1e-10) with the naive perturbation at frozen radius (flux
varying at the 1e-4 level): the corrections computed by the continuation
are what make the domain a Serrin domain.
"""

import numpy as np

from serrin import BoundaryProfile, ModeIndex, serrin_defect, solve_torsion
from serrin.branch import branch_report, check_cr_hypotheses, trace_branch


def main():
    mode = ModeIndex("xi", 2)
    cert = check_cr_hypotheses(mode, truncation=12, resolution=(48, 32))
    print(f"certificate at lambda_2 = {cert.lambda_j:.10f}: "
          f"spectral gap {cert.spectral_gap:.3f}, "
          f"transversal slope {cert.transversality_slope:+.3f}")

    run = trace_branch(mode, s_max=0.03, n_steps=6, resolution=(48, 32),
                       truncation=12, certificate=cert)
    rep = branch_report(run)
    print(f"\nbranch: {run.termination}, {len(run.points)} points")
    print(f"{'s':>7s} {'lambda':>12s} {'defect':>10s} {'volume frac':>12s} "
          f"{'iters':>5s}")
    for row in rep.rows:
        print(f"{row['s']:7.3f} {row['lambda']:12.8f} {row['defect']:10.1e} "
              f"{row['volume_fraction']:12.6f} {row['newton_iters']:5d}")

    last = run.points[-1]
    frozen = BoundaryProfile.perturbed(mode.axis, cert.lambda_j, mode.n, last.s)
    frozen_defect = serrin_defect(solve_torsion(frozen, (48, 32)))
    print(f"\nat amplitude s = {last.s}:")
    print(f"  continued profile defect : {last.defect:.2e}")
    print(f"  frozen-radius defect     : {frozen_defect:.2e}")
    print(f"  correction coefficients  : "
          f"{np.array2string(last.w.coeffs, precision=5, suppress_small=True)}")
    print("\nthe boundary profile is genuinely nonconstant, so the domain is "
          "not a straight tube, yet its normal flux is constant: a perturbed "
          "Serrin domain.")


if __name__ == "__main__":
    main()
