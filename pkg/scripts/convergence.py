"""Error of P_N against the analytic quasiprobability as N doubles (coherent beta=0.5, eta=0.8, s=0)."""

import csv
import sys

from clickspace import Coherent, DetectorArray, evaluate, reference_quasiprob

if __name__ == "__main__":
    state = Coherent(0.5)
    exact = reference_quasiprob(state, 0, 0)
    writer = csv.writer(sys.stdout)
    writer.writerow(["N", "p_value", "exact", "abs_error", "ratio_to_previous"])
    prev = None
    for N in (8, 16, 32, 64, 128, 256, 512):
        value = evaluate(state, DetectorArray(N, 0.8), 0, 0, 10**4).value
        err = abs(value - exact)
        writer.writerow([N, repr(value), repr(exact), repr(err), "" if prev is None else repr(prev / err)])
        prev = err
