"""Squeezed vacuum r=1, N=6, eta=0.9, s=0: P_N over Re(alpha) in [-2, 2] and out to saturation."""

import sys

from clickspace.cli import main

if __name__ == "__main__":
    outdir = sys.argv[1] if len(sys.argv) > 1 else "."
    for name, grid in (("scan_core", "-2:2:201"), ("scan_wide", "-8:8:321")):
        out = f"{outdir}/{name}.csv"
        argv = f"scan --state squeezed:r=1 --detectors 6 --eta 0.9 --s 0 --nu 10000 --re {grid} --summary -o {out}"
        if main(argv.split()):
            sys.exit(1)
