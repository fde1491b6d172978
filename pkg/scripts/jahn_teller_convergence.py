"""Lowest levels of a Jahn-Teller sector as the truncation grows."""

import argparse

from fockforge.models import JAHN_TELLER_N, JahnTellerParams, jahn_teller
from fockforge.spectra import convergence_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, default=0.1)
    ap.add_argument("--kappa", type=float, default=0.2)
    ap.add_argument("--j", type=int, default=0)
    ap.add_argument("--levels", type=int, default=5)
    ap.add_argument("--cutoffs", type=int, nargs="+", default=[10, 20, 40, 60, 80])
    args = ap.parse_args()

    spec = jahn_teller(JahnTellerParams(args.mu, args.kappa))
    res = convergence_scan(spec, JAHN_TELLER_N, JAHN_TELLER_N.j_label(args.j), args.cutoffs, args.levels)
    print("cutoff " + " ".join(f"{'E' + str(i):>16}" for i in range(args.levels)))
    for c, vals in res.history.items():
        print(f"{c:6d} " + " ".join(f"{v.real:16.12f}" for v in vals))
    print("delta  " + " ".join(f"{d:16.3e}" for d in res.deltas))


if __name__ == "__main__":
    main()
