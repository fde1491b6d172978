"""Sector spectra of the two-mode JC model against the closed form over a parameter grid."""

import argparse
import time
import warnings
from itertools import product

import numpy as np

from fockforge.models import MODIFIED_JC_N, AnalyticRangeWarning, ModifiedJCParams, jc_analytic_spectrum, modified_jc
from fockforge.spectra import sector_spectrum


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--jmax", type=int, default=5)
    ap.add_argument("--freqs", type=float, nargs="+", default=[0.5, 1.0, 1.3])
    ap.add_argument("--couplings", type=float, nargs="+", default=[0.0, 0.3, 0.7])
    args = ap.parse_args()

    t0 = time.perf_counter()
    worst = 0.0
    print(f"{'omega':>6} {'omega0':>6} {'l1':>5} {'l2':>5}  max|diff| over j<={args.jmax}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AnalyticRangeWarning)
        for w, w0, l1, l2 in product(args.freqs, args.freqs, args.couplings, args.couplings):
            p = ModifiedJCParams(w, w0, l1, l2)
            spec = modified_jc(p)
            diff = max(
                np.abs(sector_spectrum(spec, MODIFIED_JC_N, MODIFIED_JC_N.j_label(j)).real - jc_analytic_spectrum(p, j)).max()
                for j in range(args.jmax + 1)
            )
            worst = max(worst, diff)
            print(f"{w:6.2f} {w0:6.2f} {l1:5.2f} {l2:5.2f}  {diff:.3e}")
    print(f"worst {worst:.3e} in {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()
