"""Click-counting POVM of an array of N equally illuminated on-off detectors.

The k-click POVM element is diagonal in the Fock basis with entries

    D[k, m] = C(N, k) * sum_j C(k, j) (-1)^(k-j) (1 - eta + j eta / N)^m,

the probability that ``m`` photons (each detected with efficiency ``eta`` and
landing uniformly in one of ``N`` bins) fire exactly ``k`` detectors.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .special import PrecisionError, power_sum
from .states import PhotonNumberDistribution

CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class DetectorArray:
    n_detectors: int
    efficiency: float

    def __post_init__(self):
        if int(self.n_detectors) != self.n_detectors or self.n_detectors < 1:
            raise ValueError(f"number of detectors must be a positive integer, got {self.n_detectors}")
        if not 0 < self.efficiency <= 1:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.efficiency}")

    @property
    def even(self) -> bool:
        """Positivity of P_N for classical light is only guaranteed for even N."""
        return self.n_detectors % 2 == 0


@dataclass(frozen=True, eq=False)
class DSymbolTable:
    tau: float
    sigma: float
    entries: np.ndarray  # shape (N + 1, max_m + 1)

    @property
    def n_detectors(self) -> int:
        return self.entries.shape[0] - 1

    @property
    def max_m(self) -> int:
        return self.entries.shape[1] - 1


@dataclass(frozen=True, eq=False)
class ClickDistribution:
    c: np.ndarray
    detector: DetectorArray


def d_symbol_row(n_detectors: int, k: int, eta: float, max_m: int) -> np.ndarray:
    """``D[k, m]`` for ``m = 0..max_m`` via the alternating closed form."""
    N = n_detectors
    eta_q = Fraction(eta)
    bases = [1 - eta_q + j * eta_q / N for j in range(k + 1)]
    coefs = [math.comb(N, k) * math.comb(k, j) * (-1) ** (k - j) for j in range(k + 1)]
    row = np.zeros(max_m + 1)
    # fewer photons than clicks is impossible; skip the cancelling zeros
    if k <= max_m:
        row[k:] = power_sum(coefs, bases, max_m, m_min=k)
    return row


def d_symbol_exact(n_detectors: int, k: int, m: int, eta: Fraction) -> Fraction:
    """Closed form in exact rational arithmetic."""
    N = n_detectors
    eta = Fraction(eta)
    total = sum(
        math.comb(k, j) * (-1) ** (k - j) * (1 - eta + j * eta / N) ** m for j in range(k + 1)
    )
    return math.comb(N, k) * total


_CACHE: dict[tuple[int, float], DSymbolTable] = {}
_CACHE_LOCK = threading.Lock()


def _build_table(detector: DetectorArray, max_m: int) -> DSymbolTable:
    N, eta = detector.n_detectors, detector.efficiency
    entries = np.vstack([d_symbol_row(N, k, eta, max_m) for k in range(N + 1)])
    if entries.min() < -1e-10 or entries.max() > 1 + 1e-10:
        raise PrecisionError("D-symbol entries left [0, 1]")
    entries = np.clip(entries, 0.0, 1.0)
    entries.setflags(write=False)
    return DSymbolTable(1 - eta, eta, entries)


def d_symbol_table(detector: DetectorArray, max_m: int) -> DSymbolTable:
    """POVM diagonal for ``m = 0..max_m``, cached per ``(N, eta)``.

    The cache keeps the widest table built so far and serves narrower requests
    by slicing; construction is serialised under a lock.
    """
    if max_m < 0:
        raise ValueError("max_m must be nonnegative")
    key = (detector.n_detectors, float(detector.efficiency))
    table = _CACHE.get(key)
    if table is None or table.max_m < max_m:
        with _CACHE_LOCK:
            table = _CACHE.get(key)
            if table is None or table.max_m < max_m:
                width = max_m if table is None else max(max_m, 2 * table.max_m)
                table = _build_table(detector, width)
                _CACHE[key] = table
    if table.max_m == max_m:
        return table
    return DSymbolTable(table.tau, table.sigma, table.entries[:, : max_m + 1])


def _clamped(c: np.ndarray, detector: DetectorArray) -> ClickDistribution:
    if c.min() < -CLAMP_TOL:
        raise PrecisionError(f"click probability {c.min():.3g} below clamp tolerance")
    c = np.where(c < 0, 0.0, c)
    c.setflags(write=False)
    return ClickDistribution(c, detector)


def click_distribution(pnd: PhotonNumberDistribution, detector: DetectorArray) -> ClickDistribution:
    """``c_k = sum_m D[k, m] p_m``; the truncation error is at most ``pnd.tail_bound``."""
    if pnd.tail_bound > 1e-9:
        raise ValueError(f"photon-number tail bound {pnd.tail_bound:.3g} exceeds 1e-9")
    table = d_symbol_table(detector, pnd.cutoff)
    return _clamped(table.entries @ pnd.probs, detector)


def click_distribution_coherent(beta_eff: complex, detector: DetectorArray) -> ClickDistribution:
    """Binomial click statistics of a coherent state with amplitude ``beta_eff``.

    Each detector independently stays dark with probability
    ``exp(-eta |beta_eff|^2 / N)``.
    """
    N, eta = detector.n_detectors, detector.efficiency
    mu = eta * abs(complex(beta_eff)) ** 2 / N
    k = np.arange(N + 1)
    c = np.zeros(N + 1)
    if mu == 0.0:
        c[0] = 1.0
    elif math.isinf(mu) or math.exp(-mu) == 0.0:
        c[N] = 1.0
    else:
        log_p = math.log(-math.expm1(-mu))
        lnc = np.array([math.lgamma(N + 1) - math.lgamma(i + 1) - math.lgamma(N - i + 1) for i in k])
        c = np.exp(lnc - (N - k) * mu + k * log_p)
    return _clamped(c, detector)
