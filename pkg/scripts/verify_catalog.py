"""Check closure of every generator set in the catalog."""

import argparse
import sys

from fockforge.algebra import CATALOG_NAMES, catalog, verify_closure


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cutoff", type=int, default=10)
    ap.add_argument("--tol", type=float, default=1e-10)
    args = ap.parse_args()

    ok = True
    for name in CATALOG_NAMES:
        # the deformed set lives on mode 1 only
        cutoff = (max(args.cutoff, 14), 0) if name == "deformed_su2" else (args.cutoff, args.cutoff)
        report = verify_closure(catalog(name), cutoff, args.tol)
        ok &= report.passed
        status = "closed" if report.passed else "OPEN"
        print(f"{name:14s} {status:6s} {len(report.results):3d} relations  max residual {report.max_residual:.2e}")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
