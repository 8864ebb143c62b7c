"""Squeezed vacuum r=1, N=6, eta=0.6 at s=-0.25: significance along the real axis."""

import sys

from clickspace.cli import main

if __name__ == "__main__":
    out = (sys.argv[1] if len(sys.argv) > 1 else ".") + "/squeezed_low_s.csv"
    argv = f"scan --state squeezed:r=1 --detectors 6 --eta 0.6 --s -0.25 --re 0:2:201 --summary -o {out}"
    sys.exit(main(argv.split()))
