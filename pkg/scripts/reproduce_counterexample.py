#!/usr/bin/env python3
"""Rerun the summand-instability search end to end and print the verdict.

Scans the Gaussian-lattice scenario for a module endomorphism that moves a
class out of the lattice summand of H^2, rechecks the tower correspondence,
and exits 0 only when the witness is found and certified.
"""

import sys

from coclass import cli


def main() -> int:
    args = ["verify-counterexample", "--scenario", "d8_gaussian"]
    if len(sys.argv) > 1:
        args += ["--out", sys.argv[1]]
    return cli.main(args)


if __name__ == "__main__":
    raise SystemExit(main())
