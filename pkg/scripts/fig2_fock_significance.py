"""Significance at the origin versus s for single-photon and three-photon inputs."""

import sys

from clickspace.cli import main

CASES = [(1, 4), (3, 8)]
ETAS = [0.6, 0.9]

if __name__ == "__main__":
    outdir = sys.argv[1] if len(sys.argv) > 1 else "."
    for n, N in CASES:
        for eta in ETAS:
            out = f"{outdir}/fock{n}_N{N}_eta{eta}.csv"
            argv = f"significance-vs-s --state fock:n={n} --detectors {N} --eta {eta} --alpha 0 --s-grid -1:0.9:39 -o {out}"
            if main(argv.split()):
                sys.exit(1)
            print(out)
