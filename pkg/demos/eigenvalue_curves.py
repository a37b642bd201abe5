"""Sweep the eigenvalue curves of the linearized flux map.

Samples sigma_n(lambda) for both mode families, prints where each curve
sits relative to its comparison bounds, and writes plot-ready CSV files.
With matplotlib installed a quick figure is saved as well.
"""

import os

import numpy as np

from serrin import ModeIndex, eigen_curve
from serrin.io import write_csv
from serrin.modes import chebyshev_grid

OUT = os.environ.get("SERRIN_OUT_DIR", "demo_out")


def main():
    os.makedirs(OUT, exist_ok=True)
    grid = chebyshev_grid(300, 5e-3, np.pi / 2 - 5e-3)
    curves = {}
    for axis in ("xi", "eta"):
        for n in range(0, 5):
            curve = eigen_curve(ModeIndex(axis, n), grid)
            curves[(axis, n)] = curve
            path = os.path.join(OUT, f"curve_{axis}_n{n}.csv")
            write_csv(path, ("lambda", "sigma"), list(zip(curve.lam, curve.sigma)))
    print(f"wrote {len(curves)} curves under {OUT}/")

    print("\nsign pattern at a few radii (rows: n, columns: lambda):")
    probes = (0.3, 0.7, 1.1, 1.4)
    for axis in ("xi", "eta"):
        print(f"  {axis} family")
        for n in range(0, 5):
            curve = curves[(axis, n)]
            vals = np.interp(probes, curve.lam, curve.sigma)
            cells = "  ".join(f"{v:+9.3f}" for v in vals)
            print(f"    n={n}:  {cells}")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping the figure")
        return
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, axis in zip(axes, ("xi", "eta")):
        for n in range(0, 5):
            curve = curves[(axis, n)]
            ax.plot(curve.lam, curve.sigma, label=f"n={n}")
        ax.axhline(0.0, color="k", lw=0.5)
        ax.set_ylim(-8, 8)
        ax.set_xlabel("tube radius")
        ax.set_title(f"{axis} family")
    axes[0].set_ylabel("eigenvalue")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(os.path.join(OUT, "eigenvalue_curves.png"), dpi=130)
    print(f"figure saved to {OUT}/eigenvalue_curves.png")


if __name__ == "__main__":
    main()
