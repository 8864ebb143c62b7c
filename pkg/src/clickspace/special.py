"""Numerically careful special functions and combinatorics.

Everything downstream (photon-number distributions, detector POVMs, the
generating-function route) is built from three primitives:

* log-factorials / log-binomials from a lazily grown extended-precision table,
* associated Laguerre polynomials by forward three-term recurrence,
* sums of the form ``sum_j c_j * b_j**m`` that alternate in sign and may cancel
  catastrophically; these are evaluated with an exactly rounded float sum and
  re-evaluated in exact integer arithmetic when the cancellation is too severe.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from typing import Sequence

import numpy as np

DEFAULT_M_MAX = 4096
# exact fallback refuses powers beyond this order
EXACT_POWER_LIMIT = 8192

_EPS = np.finfo(float).eps


class PrecisionError(ArithmeticError):
    """Raised when a result cannot be delivered at the requested accuracy."""


class LogFactorialTable:
    """Table of ``ln(m!)`` for ``m = 0..m_max``, grown on demand.

    Values are accumulated in ``np.longdouble`` so that differences of
    neighbouring entries stay accurate even where ``ln(m!)`` itself is large.
    The table only ever grows; readers see a consistent prefix.
    """

    def __init__(self, m_max: int = DEFAULT_M_MAX):
        self._lock = threading.Lock()
        self._values = np.zeros(1, dtype=np.longdouble)
        self.ensure(m_max)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def m_max(self) -> int:
        return len(self._values) - 1

    def ensure(self, m: int) -> None:
        if m <= self.m_max:
            return
        with self._lock:
            old = self._values
            if m <= len(old) - 1:
                return
            size = max(m, 2 * (len(old) - 1)) + 1
            logs = np.log(np.arange(len(old), size, dtype=np.longdouble))
            tail = old[-1] + np.cumsum(logs)
            self._values = np.concatenate([old, tail])

    def __getitem__(self, m):
        top = int(np.max(m)) if np.ndim(m) else int(m)
        self.ensure(top)
        return self._values[m]


_LOG_FACTORIALS = LogFactorialTable()


def log_factorial(m) -> np.ndarray:
    """``ln(m!)`` for an integer or integer array, in extended precision."""
    return _LOG_FACTORIALS[m]


def ln_binomial(n: int, k: int) -> float:
    """Natural log of the binomial coefficient ``C(n, k)``.

    Raises:
        ValueError: if ``k`` is outside ``[0, n]``.
    """
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"binomial C({n}, {k}) requires 0 <= k <= n")
    lf = log_factorial(np.array([n, k, n - k]))
    return float(lf[0] - lf[1] - lf[2])


def laguerre_assoc(n: int, k: float, x: float) -> float:
    """Associated Laguerre polynomial ``L_n^{(k)}(x)`` by upward recurrence."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    prev, cur = 0.0, 1.0
    for j in range(n):
        prev, cur = cur, ((2 * j + k + 1 - x) * cur - (j + k) * prev) / (j + 1)
    return cur


def laguerre_table(j_max: int, d_max: int, x: float):
    """All ``L_j^{(d)}(x)`` for ``0 <= j <= j_max``, ``0 <= d <= d_max``.

    The recurrence runs in ``j`` and is vectorised over ``d``.  Each column is
    rescaled whenever it grows past ``1e150`` so the result is returned as
    ``(log|L|, sign)``; exact zeros come back as ``(-inf, 0)``.

    Returns:
        tuple of two arrays of shape ``(j_max + 1, d_max + 1)``.
    """
    d = np.arange(d_max + 1, dtype=float)
    logabs = np.empty((j_max + 1, d_max + 1))
    sign = np.empty((j_max + 1, d_max + 1))
    scale = np.zeros(d_max + 1)
    prev = np.zeros(d_max + 1)
    cur = np.ones(d_max + 1)

    def store(j, vals):
        with np.errstate(divide="ignore"):
            logabs[j] = np.log(np.abs(vals)) + scale
        sign[j] = np.sign(vals)

    store(0, cur)
    for j in range(j_max):
        nxt = ((2 * j + d + 1 - x) * cur - (j + d) * prev) / (j + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e150
        if big.any():
            f = np.where(big, np.abs(cur), 1.0)
            cur = cur / f
            prev = prev / f
            scale = scale + np.log(f)
        store(j + 1, cur)
    return logabs, sign


def compensated_alternating_sum(terms: Sequence[float]) -> tuple[float, float]:
    """Exactly rounded sum of ``terms`` plus a cancellation diagnostic.

    The diagnostic is ``max|term| / |sum|``: 1 means no cancellation, large
    values mean that much of the magnitude cancelled (``inf`` for an exact
    zero from nonzero terms).
    """
    terms = [float(t) for t in terms]
    total = math.fsum(terms)
    biggest = max((abs(t) for t in terms), default=0.0)
    if biggest == 0.0:
        return total, 1.0
    if total == 0.0:
        return total, math.inf
    return total, biggest / abs(total)


def _as_fraction(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def power_sum(
    coefs: Sequence,
    bases: Sequence,
    m_max: int,
    *,
    m_min: int = 0,
    rel_tol: float = 1e-12,
    cancel_limit: float = 1e12,
) -> np.ndarray:
    """Evaluate ``S_m = sum_j coefs[j] * bases[j]**m`` for ``m = m_min..m_max``.

    ``coefs`` and ``bases`` are exact (ints or ``Fraction``; floats are taken
    at their exact binary value).  Each ``S_m`` is first summed in floating
    point with exact rounding; when the cancellation diagnostic exceeds
    ``cancel_limit`` or the implied relative error exceeds ``rel_tol`` the
    value is recomputed exactly with integers and rounded once.

    Raises:
        PrecisionError: if an exact recomputation is needed beyond
            ``EXACT_POWER_LIMIT``.
    """
    coefs = [_as_fraction(c) for c in coefs]
    bases = [_as_fraction(b) for b in bases]
    m = np.arange(m_min, m_max + 1)
    cf = np.array([float(c) for c in coefs])
    bf = np.array([float(b) for b in bases])
    with np.errstate(under="ignore", over="ignore"):
        terms = cf[:, None] * np.power(bf[:, None], m[None, :])
    out = np.empty(len(m))
    redo = []
    for i, order in enumerate(m):
        col = terms[:, i]
        total, diag = compensated_alternating_sum(col)
        # rounding of the bases is amplified ~m-fold by the power
        err = (order + 2) * _EPS * float(np.sum(np.abs(col)))
        out[i] = total
        if err > 0.0 and (diag > cancel_limit or err > rel_tol * abs(total)):
            redo.append(i)
    if redo:
        top = int(m[redo[-1]])
        if top > EXACT_POWER_LIMIT:
            raise PrecisionError(
                f"exact re-evaluation needed at order {top} (limit {EXACT_POWER_LIMIT})"
            )
        out[redo] = _exact_power_sum(coefs, bases, [int(m[i]) for i in redo])
    return out


def _exact_power_sum(coefs, bases, orders) -> list[float]:
    cden = math.lcm(*(c.denominator for c in coefs))
    cnum = [c.numerator * (cden // c.denominator) for c in coefs]
    bden = math.lcm(*(b.denominator for b in bases))
    bnum = [b.numerator * (bden // b.denominator) for b in bases]
    powers = [1] * len(bnum)
    dpow = 1
    done = 0
    res = []
    for order in orders:
        for _ in range(order - done):
            powers = [p * b for p, b in zip(powers, bnum)]
            dpow *= bden
        done = order
        num = sum(c * p for c, p in zip(cnum, powers))
        # int / int is correctly rounded in Python
        res.append(num / (cden * dpow))
    return res
