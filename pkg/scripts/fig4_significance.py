"""Significance of the squeezed-vacuum negativity after 10^4 measurements."""

import sys

from clickspace.cli import main

if __name__ == "__main__":
    out = (sys.argv[1] if len(sys.argv) > 1 else ".") + "/significance.csv"
    argv = f"scan --state squeezed:r=1 --detectors 6 --eta 0.9 --s 0 --nu 10000 --re 0:2:201 --summary -o {out}"
    sys.exit(main(argv.split()))
