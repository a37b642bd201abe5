"""Locate the bifurcation radii and check their closed-form slopes.

Prints the table of roots lambda_n for both families: the xi roots march
toward 0 (thin tubes), the eta roots toward pi/2 (tubes exhausting the
sphere), with the n = 2 xi root sitting exactly at pi/4.
"""

import numpy as np

from serrin import ModeIndex, find_lambda_n, sigma_prime_closed_form


def main():
    print(f"{'family':6s} {'n':>2s} {'lambda_n':>16s} {'interval':>24s} "
          f"{'slope':>12s} {'volume frac':>12s}")
    for axis in ("xi", "eta"):
        for n in range(2, 9):
            p = find_lambda_n(ModeIndex(axis, n))
            slope = sigma_prime_closed_form(p)
            if axis == "xi":
                window = f"(0, {np.arcsin(n ** -0.5):.6f}]"
            else:
                window = f"({np.arccos(1 / n):.6f}, pi/2)"
            frac = np.sin(p.lambda_n) ** 2
            print(f"{axis:6s} {n:2d} {p.lambda_n:16.12f} {window:>24s} "
                  f"{slope:12.4f} {frac:12.4f}")
        print()
    p2 = find_lambda_n(ModeIndex("xi", 2))
    print(f"the first xi root minus pi/4: {p2.lambda_n - np.pi / 4:+.2e} "
          "(an exact quarter-pi crossing)")


if __name__ == "__main__":
    main()
