"""Click-counting phase-space functions P_N(alpha; s) and their statistical errors.

With ``w = (eta(1-s) - 2) / (eta(1-s))`` the estimator is a fixed linear
functional of the click statistics::

    P_N(alpha; s) = 2 / (pi (1 - s)) * sum_k w**k c_k(alpha)

so its sampling error over ``nu`` shots follows from the multinomial
distribution of the click counts.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .detector import ClickDistribution, DetectorArray, click_distribution
from .special import laguerre_assoc, power_sum
from .states import (
    DEFAULT_TAIL_EPS,
    Coherent,
    Fock,
    PhotonNumberDistribution,
    SqueezedVacuum,
    StateSpec,
    photon_distribution,
)

CSV_COLUMNS = (
    "re_alpha",
    "im_alpha",
    "s",
    "N",
    "eta",
    "nu",
    "p_value",
    "stderr_paper",
    "stderr_exact",
    "significance",
)


def _check_s(s: float) -> float:
    s = float(s)
    if not s < 1:
        raise ValueError(f"ordering parameter s must be < 1, got {s}")
    return s


def weight(s: float, eta: float) -> float:
    """Per-click weight ``(eta(1-s) - 2) / (eta(1-s))``."""
    s = _check_s(s)
    if not 0 < eta <= 1:
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")
    t = eta * (1 - s)
    return (t - 2) / t


def prefactor(s: float) -> float:
    return 2.0 / (math.pi * (1 - _check_s(s)))


def _coefficients(n_detectors: int, eta: float, s: float) -> np.ndarray:
    """``u_k`` such that ``P_N = sum_k u_k c_k``."""
    return prefactor(s) * weight(s, eta) ** np.arange(n_detectors + 1)


def quasiprob(clicks: ClickDistribution, s: float) -> float:
    """P_N(alpha; s) from click probabilities."""
    det = clicks.detector
    u = _coefficients(det.n_detectors, det.efficiency, s)
    return math.fsum(u * clicks.c)


@lru_cache(maxsize=128)
def _genfn_moments(n_detectors: int, eta: float, s: float, max_m: int) -> np.ndarray:
    N = n_detectors
    eta_q, s_q = Fraction(eta), Fraction(s)
    a = (eta_q * (1 - s_q) - 2) / 2
    coefs = [math.comb(N, j) * a ** (N - j) for j in range(N + 1)]
    bases = [1 - eta_q * j / N for j in range(N + 1)]
    return power_sum(coefs, bases, max_m)


def quasiprob_genfn(pnd: PhotonNumberDistribution, detector: DetectorArray, s: float) -> float:
    """P_N from the normally ordered N-th power, bypassing click probabilities.

    Each Fock state contributes
    ``sum_j C(N, j) ((eta(1-s) - 2)/2)^(N-j) (1 - eta j / N)^m``; the sum is
    weighted by ``p_m`` and scaled by ``(eta/pi) (2/(eta(1-s)))^(N+1)``.
    """
    s = _check_s(s)
    if pnd.tail_bound > 1e-9:
        raise ValueError(f"photon-number tail bound {pnd.tail_bound:.3g} exceeds 1e-9")
    N, eta = detector.n_detectors, float(detector.efficiency)
    moments = _genfn_moments(N, eta, s, pnd.cutoff)
    scale = eta / math.pi * (2 / (eta * (1 - s))) ** (N + 1)
    return scale * math.fsum(pnd.probs * moments)


def stderr_paper(clicks: ClickDistribution, s: float, nu: int) -> float:
    """Standard error treating each ``c_k`` as an independent binomial frequency."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    det = clicks.detector
    u = _coefficients(det.n_detectors, det.efficiency, s)
    c = clicks.c
    return math.sqrt(math.fsum(u**2 * c * (1 - c)) / nu)


def stderr_exact(clicks: ClickDistribution, s: float, nu: int) -> float:
    """Standard error of the sample-mean estimator under multinomial sampling."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    det = clicks.detector
    u = _coefficients(det.n_detectors, det.efficiency, s)
    c = clicks.c
    mean = math.fsum(u * c)
    var = math.fsum(u**2 * c) - mean**2
    return math.sqrt(max(var, 0.0) / nu)


@dataclass(frozen=True)
class QuasiprobEstimate:
    """A P_N value with both standard errors.

    ``significance`` is ``value / stderr_paper``; it is ``None`` when the click
    outcome is deterministic and the standard error vanishes.
    """

    value: float
    stderr_paper: float
    stderr_exact: float
    significance: Optional[float]
    nu: int


def make_estimate(clicks: ClickDistribution, s: float, nu: int) -> QuasiprobEstimate:
    value = quasiprob(clicks, s)
    sp = stderr_paper(clicks, s, nu)
    se = stderr_exact(clicks, s, nu)
    return QuasiprobEstimate(value, sp, se, value / sp if sp > 0 else None, nu)


@dataclass(frozen=True)
class ScanRow:
    re_alpha: float
    im_alpha: float
    s: float
    N: int
    eta: float
    nu: int
    p_value: float
    stderr_paper: float
    stderr_exact: float
    significance: Optional[float]

    @classmethod
    def from_estimate(cls, alpha: complex, s, detector: DetectorArray, est: QuasiprobEstimate):
        alpha = complex(alpha)
        return cls(
            alpha.real,
            alpha.imag,
            float(s),
            detector.n_detectors,
            float(detector.efficiency),
            est.nu,
            est.value,
            est.stderr_paper,
            est.stderr_exact,
            est.significance,
        )

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate(
    state: StateSpec,
    detector: DetectorArray,
    alpha: complex,
    s: float,
    nu: int,
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> QuasiprobEstimate:
    """Exact pipeline: displaced photon statistics -> clicks -> P_N."""
    clicks = click_distribution(photon_distribution(state, alpha, tail_eps), detector)
    return make_estimate(clicks, s, nu)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("CLICKSPACE_THREADS", "1")))
    except ValueError:
        return 1


def scan_line(
    state: StateSpec,
    detector: DetectorArray,
    s: float,
    nu: int,
    re_range: tuple[float, float, int],
    im_alpha: float = 0.0,
    tail_eps: float = DEFAULT_TAIL_EPS,
    threads: Optional[int] = None,
) -> list[ScanRow]:
    """P_N along ``Re(alpha)`` in ``linspace(*re_range)`` at fixed ``Im(alpha)``.

    Points are independent; with ``threads > 1`` they are evaluated
    concurrently but rows always come back in grid order.
    """
    start, stop, steps = re_range
    if steps < 1:
        raise ValueError("scan needs at least one grid point")
    _check_s(s)
    alphas = [complex(x, im_alpha) for x in np.linspace(start, stop, int(steps))]

    def point(alpha):
        est = evaluate(state, detector, alpha, s, nu, tail_eps)
        return ScanRow.from_estimate(alpha, s, detector, est)

    threads = threads or default_threads()
    if threads == 1:
        return [point(a) for a in alphas]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(point, alphas))


def significance_vs_s(
    state: StateSpec,
    detector: DetectorArray,
    alpha: complex,
    nu: int,
    s_grid: Sequence[float],
    tail_eps: float = DEFAULT_TAIL_EPS,
) -> list[ScanRow]:
    """P_N and its significance at one phase-space point for each ``s``."""
    s_grid = [_check_s(s) for s in s_grid]
    clicks = click_distribution(photon_distribution(state, alpha, tail_eps), detector)
    return [ScanRow.from_estimate(alpha, s, detector, make_estimate(clicks, s, nu)) for s in s_grid]


def reference_quasiprob(state: StateSpec, alpha: complex, s: float) -> float:
    """Cahill-Glauber s-ordered quasiprobability of the undisplaced ``state`` at ``alpha``.

    Normalised so that the vacuum gives ``2 / (pi (1 - s))`` at the origin.
    Coherent states accept any ``s < 1``; Fock and squeezed vacuum states
    accept ``-1 <= s <= 0``.
    """
    s = _check_s(s)
    alpha = complex(alpha)
    if isinstance(state, Coherent):
        d2 = abs(alpha - complex(state.beta)) ** 2
        return prefactor(s) * math.exp(-2 * d2 / (1 - s))
    if not -1 <= s <= 0:
        raise ValueError(f"reference for {type(state).__name__} needs -1 <= s <= 0, got {s}")
    if isinstance(state, Fock):
        n, x = state.n, abs(alpha) ** 2
        if s == -1:
            return math.exp(-x + n * math.log(x) - math.lgamma(n + 1)) / math.pi if x > 0 else (
                1 / math.pi if n == 0 else 0.0
            )
        ratio = (s + 1) / (s - 1)
        return prefactor(s) * ratio**n * math.exp(-2 * x / (1 - s)) * laguerre_assoc(n, 0, 4 * x / (1 - s * s))
    if isinstance(state, SqueezedVacuum):
        # quadrature variances in units where the vacuum has 1/4
        var_re = (math.exp(-2 * state.r) - s) / 4
        var_im = (math.exp(2 * state.r) - s) / 4
        expo = alpha.real**2 / (2 * var_re) + alpha.imag**2 / (2 * var_im)
        return math.exp(-expo) / (2 * math.pi * math.sqrt(var_re * var_im))
    raise ValueError(f"no reference quasiprobability for {state!r}")
