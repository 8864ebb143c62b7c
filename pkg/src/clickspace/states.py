"""Photon-number statistics of displaced single-mode states.

The signal ``rho`` is mixed with the local oscillator, so the detectors see
``rho_alpha = D(-alpha) rho D(-alpha)^dagger``.  Only the diagonal
``p_m = <m|rho_alpha|m>`` is needed because the click POVM is diagonal in the
Fock basis.

Squeezing convention: ``|xi> = exp(r (a^2 - a^dagger^2) / 2)|0>``, which for
``r > 0`` squeezes the quadrature along ``Re(alpha)``.  Scans along the real
axis therefore probe the squeezed direction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .special import PrecisionError, laguerre_table, log_factorial

DEFAULT_TAIL_EPS = 1e-12
MAX_CUTOFF = 4096
CLAMP_TOL = 1e-14


class CutoffError(RuntimeError):
    """The requested tail bound could not be reached within ``MAX_CUTOFF``."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved tail bound {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True)
class Coherent:
    beta: complex = 0j


@dataclass(frozen=True)
class Fock:
    n: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"Fock photon number must be a nonnegative integer, got {self.n}")


@dataclass(frozen=True)
class Thermal:
    mean: float = 0.0

    def __post_init__(self):
        if not (self.mean >= 0 and math.isfinite(self.mean)):
            raise ValueError(f"thermal mean photon number must be >= 0, got {self.mean}")


@dataclass(frozen=True)
class SqueezedVacuum:
    r: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.r):
            raise ValueError("squeezing parameter must be finite")


StateSpec = Union[Coherent, Fock, Thermal, SqueezedVacuum]

_STATE_RE = re.compile(r"^\s*([a-z_]+)\s*(?::(.*))?$")
_FIELDS = {
    "coherent": {"beta_re", "beta_im"},
    "fock": {"n"},
    "thermal": {"mean"},
    "squeezed": {"r"},
}


def parse_state(text: str) -> StateSpec:
    """Parse ``kind:key=value,...``.

    Accepted forms::

        coherent:beta_re=0.5,beta_im=0   (both keys optional, default 0)
        fock:n=1
        thermal:mean=0.5
        squeezed:r=1
        vacuum                           (alias for fock:n=0)

    Raises:
        ValueError: on an unknown kind, unknown/missing key or bad value.
    """
    m = _STATE_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse state {text!r}")
    kind, body = m.group(1), m.group(2) or ""
    if kind == "vacuum" and not body.strip():
        return Fock(0)
    if kind not in _FIELDS:
        raise ValueError(f"unknown state kind {kind!r}; expected one of {sorted(_FIELDS)}")
    params = {}
    for item in filter(None, (p.strip() for p in body.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in _FIELDS[kind]:
            raise ValueError(f"bad parameter {item!r} for {kind}; allowed: {sorted(_FIELDS[kind])}")
        try:
            params[key] = float(value)
        except ValueError:
            raise ValueError(f"parameter {key} needs a number, got {value.strip()!r}") from None
    if kind == "coherent":
        return Coherent(complex(params.get("beta_re", 0.0), params.get("beta_im", 0.0)))
    missing = _FIELDS[kind] - params.keys()
    if missing:
        raise ValueError(f"{kind} state needs {sorted(missing)}")
    if kind == "fock":
        if params["n"] != int(params["n"]):
            raise ValueError(f"Fock n must be an integer, got {params['n']}")
        return Fock(int(params["n"]))
    if kind == "thermal":
        return Thermal(params["mean"])
    return SqueezedVacuum(params["r"])


def format_state(state: StateSpec) -> str:
    """Inverse of :func:`parse_state`."""
    if isinstance(state, Coherent):
        b = complex(state.beta)
        return f"coherent:beta_re={b.real!r},beta_im={b.imag!r}"
    if isinstance(state, Fock):
        return f"fock:n={state.n}"
    if isinstance(state, Thermal):
        return f"thermal:mean={state.mean!r}"
    return f"squeezed:r={state.r!r}"


@dataclass(frozen=True, eq=False)
class PhotonNumberDistribution:
    """Truncated ``p_m``, ``m = 0..cutoff``, with a bound on the missing mass."""

    probs: np.ndarray
    tail_bound: float

    @property
    def cutoff(self) -> int:
        return len(self.probs) - 1

    @property
    def mean(self) -> float:
        return math.fsum(np.arange(len(self.probs)) * self.probs)


def _finish(probs: np.ndarray) -> PhotonNumberDistribution:
    probs = np.asarray(probs, dtype=float)
    if probs.min() < -CLAMP_TOL:
        raise PrecisionError(f"photon-number probability {probs.min():.3g} below clamp tolerance")
    probs = np.where(probs < 0, 0.0, probs)
    probs.setflags(write=False)
    return PhotonNumberDistribution(probs, max(0.0, 1.0 - math.fsum(probs)))


def _adaptive(build: Callable[[int], np.ndarray], guess: float, tail_eps: float):
    if not 0 < tail_eps <= 1e-6:
        raise ValueError(f"tail_eps must lie in (0, 1e-6], got {tail_eps}")
    cutoff = max(8, int(math.ceil(guess)))
    while True:
        cutoff = min(cutoff, MAX_CUTOFF)
        pnd = _finish(build(cutoff))
        if pnd.tail_bound <= tail_eps:
            return pnd
        if cutoff >= MAX_CUTOFF:
            raise CutoffError(f"tail bound {tail_eps:g} not reached at cutoff {MAX_CUTOFF}", pnd.tail_bound)
        cutoff *= 2


def _delta(n: int) -> PhotonNumberDistribution:
    p = np.zeros(n + 1)
    p[n] = 1.0
    return _finish(p)


def _poisson(mu: float, cutoff: int) -> np.ndarray:
    m = np.arange(cutoff + 1)
    return np.exp(-mu + m * math.log(mu) - log_factorial(m).astype(float))


def coherent_distribution(beta: complex, alpha: complex, tail_eps: float = DEFAULT_TAIL_EPS):
    """Poisson statistics of the displaced coherent state ``|beta - alpha>``."""
    mu = abs(complex(beta) - complex(alpha)) ** 2
    if mu == 0.0:
        return _delta(0)
    return _adaptive(lambda c: _poisson(mu, c), mu + 12 * math.sqrt(mu) + 20, tail_eps)


def displaced_fock_distribution(n: int, alpha: complex, tail_eps: float = DEFAULT_TAIL_EPS):
    """``p_m = |<m|D(-alpha)|n>|^2`` from the Laguerre closed form."""
    x = abs(alpha) ** 2
    if x == 0.0:
        return _delta(n)
    if not 0 < tail_eps <= 1e-6:
        raise ValueError(f"tail_eps must lie in (0, 1e-6], got {tail_eps}")

    def build(cutoff):
        if cutoff < n:
            cutoff = n
        m = np.arange(cutoff + 1)
        lo = np.minimum(m, n)
        hi = np.maximum(m, n)
        d = np.abs(m - n)
        logabs, _ = laguerre_table(n, max(cutoff - n, n), x)
        lf = log_factorial(np.arange(max(cutoff, n) + 1)).astype(float)
        logp = -x + lf[lo] - lf[hi] + d * math.log(x) + 2 * logabs[lo, d]
        return np.exp(logp)

    guess = n + x + 12 * math.sqrt((2 * n + 1) * x + 1) + 20
    return _adaptive(build, guess, tail_eps)


def displacement_matrix(gamma: complex, rows: int, cols: int) -> np.ndarray:
    """Block ``<m|D(gamma)|n>`` for ``m < rows``, ``n < cols`` of the exact operator.

    Entries come from the Laguerre closed form, assembled in log space so that
    large indices neither overflow nor underflow prematurely.
    """
    gamma = complex(gamma)
    x = abs(gamma) ** 2
    if x == 0.0:
        return np.eye(rows, cols, dtype=complex)
    m = np.arange(rows)[:, None]
    n = np.arange(cols)[None, :]
    lo = np.minimum(m, n)
    hi = np.maximum(m, n)
    d = np.abs(m - n)
    size = max(rows, cols)
    logabs, sign = laguerre_table(size - 1, size - 1, x)
    lf = log_factorial(np.arange(size)).astype(float)
    mag = np.exp(0.5 * (lf[lo] - lf[hi]) + 0.5 * d * math.log(x) - 0.5 * x + logabs[lo, d])
    phase = np.exp(1j * math.atan2(gamma.imag, gamma.real) * (m - n))
    phase = np.where(m < n, phase * (-1.0) ** d, phase)
    return mag * sign[lo, d] * phase


def squeezed_vacuum_amplitudes(r: float, cutoff: int) -> np.ndarray:
    """Fock amplitudes of ``exp(r (a^2 - a^dagger^2)/2)|0>`` up to ``cutoff``.

    Only even entries are nonzero; they obey
    ``psi[2i+2] = -tanh(r) sqrt((2i+1)/(2i+2)) psi[2i]`` with
    ``psi[0] = cosh(r)^(-1/2)``.
    """
    psi = np.zeros(cutoff + 1)
    psi[0] = 1.0 / math.sqrt(math.cosh(r))
    t = -math.tanh(r)
    for i in range(0, cutoff - 1, 2):
        psi[i + 2] = t * math.sqrt((i + 1) / (i + 2)) * psi[i]
    return psi


def _squeezed_input_cutoff(r: float, delta: float) -> int:
    t2 = math.tanh(r) ** 2
    if t2 == 0.0:
        return 0
    # p_{2i} <= sech(r) t2^i; sum of the geometric tail past i
    lead = 1.0 / math.cosh(r)
    i = max(0, math.ceil(math.log(delta * (1 - t2) / lead) / math.log(t2)))
    return 2 * i + 2


def displaced_squeezed_vacuum_distribution(r: float, alpha: complex, tail_eps: float = DEFAULT_TAIL_EPS):
    """``p_m = |<m|D(-alpha)|xi>|^2`` for the squeezed vacuum ``|xi>``.

    Intended for ``|r| <= 3``; larger squeezing needs cutoffs beyond
    ``MAX_CUTOFF`` for small ``tail_eps``.
    """
    if not 0 < tail_eps <= 1e-6:
        raise ValueError(f"tail_eps must lie in (0, 1e-6], got {tail_eps}")
    # input truncation small enough that amplitude errors stay below tail_eps
    k_in = _squeezed_input_cutoff(r, tail_eps**2 / 4)
    if k_in > MAX_CUTOFF:
        raise CutoffError(f"squeezed-vacuum input needs cutoff {k_in}", 1.0)
    psi = squeezed_vacuum_amplitudes(r, k_in)
    x = abs(alpha) ** 2
    if x == 0.0:
        return _finish(psi**2)

    def build(cutoff):
        dmat = displacement_matrix(-complex(alpha), cutoff + 1, k_in + 1)
        return np.abs(dmat @ psi) ** 2

    sh = math.sinh(r) ** 2
    var = x * math.exp(2 * abs(r)) + 2 * sh * (sh + 1)
    return _adaptive(build, sh + x + 12 * math.sqrt(var) + 20, tail_eps)


def thermal_distribution(mean: float, alpha: complex, tail_eps: float = DEFAULT_TAIL_EPS):
    """Photon statistics of a displaced thermal state.

    ``p_m = nbar^m / (1+nbar)^(m+1) exp(-|alpha|^2/(1+nbar)) L_m(-|alpha|^2/(nbar(1+nbar)))``,
    the geometric distribution at ``alpha = 0``.
    """
    if mean < 0:
        raise ValueError("thermal mean photon number must be >= 0")
    if mean == 0.0:
        return coherent_distribution(0j, alpha, tail_eps)
    x = abs(alpha) ** 2
    shift = x / (1 + mean)

    def build(cutoff):
        # g_m = nbar^m L_m(-x / (nbar (1 + nbar))) keeps tiny nbar finite
        logg = np.empty(cutoff + 1)
        prev, cur, scale = 0.0, 1.0, 0.0
        logg[0] = 0.0
        for m in range(cutoff):
            prev, cur = cur, (((2 * m + 1) * mean + shift) * cur - m * mean * mean * prev) / (m + 1)
            if cur > 1e150 or 0 < cur < 1e-150:
                f = cur
                prev, cur, scale = prev / f, 1.0, scale + math.log(f)
            logg[m + 1] = math.log(cur) + scale if cur > 0 else -math.inf
        m = np.arange(cutoff + 1)
        return np.exp(logg - (m + 1) * math.log1p(mean) - shift)

    var = mean * (mean + 1) + x * (2 * mean + 1)
    return _adaptive(build, mean + x + 12 * math.sqrt(var) + 20, tail_eps)


def photon_distribution(state: StateSpec, alpha: complex, tail_eps: float = DEFAULT_TAIL_EPS):
    """Dispatch to the constructor for ``state`` displaced by ``-alpha``."""
    if isinstance(state, Coherent):
        return coherent_distribution(state.beta, alpha, tail_eps)
    if isinstance(state, Fock):
        return displaced_fock_distribution(state.n, alpha, tail_eps)
    if isinstance(state, Thermal):
        return thermal_distribution(state.mean, alpha, tail_eps)
    if isinstance(state, SqueezedVacuum):
        return displaced_squeezed_vacuum_distribution(state.r, alpha, tail_eps)
    raise TypeError(f"not a state spec: {state!r}")
