"""Explicit constants: beta_q = q q*, the composite bounds C, D, C', the BMO
and Kahane-Khintchine constants, and their asymptotics tables.

    C(p,p1,p2) = b_p b_p1 b_p2 + min(b_p1^2 b_p, b_p^2 b_p1)
                 + min(b_p2^2 b_p, b_p^2 b_p2) + min(b_p2^2 b_p1, b_p1^2 b_p2)
    D(p,p1,p2) = C(p,p1,p2) (b_p1 + b_p2) + b_p1 b_p2 (b_p + b_p1 + b_p2)
    C'(p,p1,p2) = C + min(C''(p,p1), C''(p,p2)) + min(C''(p1,p2), C''(p1,p))
                  + min(C''(p2,p1), C''(p2,p)),   C''(p,q) = b_p^3 b_q^2 C_BMO(q)
    C_BMO(p)   = 2e (e p Gamma(p))^{1/p}
    kappa(p,q) = 2^{1+1/q} e (1 + 2 p / q)

D(p, 2p, 2p) grows like p^4 p*; the lower-bound reference scale is p^2 p*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadExponent

# Lanczos approximation, g = 7, 9 coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def log_gamma(x: float) -> float:
    """log Gamma on (0, inf) via the Lanczos series (1e-12 relative on [1, 200])."""
    if x <= 0:
        raise ValueError(f"log_gamma needs x > 0, got {x}")
    if x < 0.5:
        # reflection keeps the series in its accurate range
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    x = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (x + 0.5) * math.log(t) - t + math.log(acc)


def conj(p: float) -> float:
    """Hoelder conjugate p/(p-1)."""
    if not 1.0 < p < math.inf:
        raise BadExponent(f"need p in (1, inf), got {p}")
    return p / (p - 1.0)


def beta(q: float) -> float:
    """q q* = q^2/(q-1), the Schatten UMD-scale factor."""
    if not 1.0 < q < math.inf:
        raise BadExponent(f"need q in (1, inf), got {q}")
    return q * q / (q - 1.0)


@dataclass(frozen=True)
class ExponentTriple:
    p: float
    p1: float
    p2: float

    def __post_init__(self):
        for q in (self.p, self.p1, self.p2):
            if not 1.0 < q < math.inf:
                raise BadExponent(f"exponents must lie in (1, inf), got {q}")
        if abs(1.0 / self.p - (1.0 / self.p1 + 1.0 / self.p2)) > 1e-12:
            raise BadExponent(
                f"need 1/p = 1/p1 + 1/p2, got ({self.p}, {self.p1}, {self.p2})")

    @staticmethod
    def split(p: float) -> "ExponentTriple":
        return ExponentTriple(p, 2.0 * p, 2.0 * p)


def C_constant(t: ExponentTriple) -> float:
    bp, b1, b2 = beta(t.p), beta(t.p1), beta(t.p2)
    return (bp * b1 * b2
            + min(b1 ** 2 * bp, bp ** 2 * b1)
            + min(b2 ** 2 * bp, bp ** 2 * b2)
            + min(b2 ** 2 * b1, b1 ** 2 * b2))


def D_constant(t: ExponentTriple) -> float:
    bp, b1, b2 = beta(t.p), beta(t.p1), beta(t.p2)
    return C_constant(t) * (b1 + b2) + b1 * b2 * (bp + b1 + b2)


def C_BMO(p: float) -> float:
    """2e (e p Gamma(p))^{1/p}, the John-Nirenberg normalization; O(p) growth."""
    if p <= 0:
        raise BadExponent(f"need p > 0, got {p}")
    return 2.0 * math.e * math.exp((1.0 + math.log(p) + log_gamma(p)) / p)


def C_double_prime(p: float, q: float) -> float:
    return beta(p) ** 3 * beta(q) ** 2 * C_BMO(q)


def Cprime_constant(t: ExponentTriple) -> float:
    return (C_constant(t)
            + min(C_double_prime(t.p, t.p1), C_double_prime(t.p, t.p2))
            + min(C_double_prime(t.p1, t.p2), C_double_prime(t.p1, t.p))
            + min(C_double_prime(t.p2, t.p1), C_double_prime(t.p2, t.p)))


def kappa(p: float, q: float) -> float:
    """Kahane-Khintchine comparison constant 2^{1+1/q} e (1 + 2p/q)."""
    if p <= 0 or q <= 0:
        raise BadExponent("kappa needs positive exponents")
    return 2.0 ** (1.0 + 1.0 / q) * math.e * (1.0 + 2.0 * p / q)


@dataclass
class AsymptoticsTable:
    ps: np.ndarray
    d_values: np.ndarray
    ratio: np.ndarray        # D(p,2p,2p) / (p^4 p*)
    lower_reference: np.ndarray  # p^2 p*
    slope_top_decade: float

    def rows(self):
        for i in range(len(self.ps)):
            yield (self.ps[i], self.d_values[i], self.ratio[i], self.lower_reference[i])


def loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    lx, ly = np.log(x), np.log(y)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    return float(coef[0])


def asymptotics_table(pmin: float = 1.01, pmax: float = 64.0,
                      points_per_decade: int = 32) -> AsymptoticsTable:
    """D(p, 2p, 2p) over a log grid with its p^4 p* ratio and top-decade slope."""
    n = max(2, int(round(points_per_decade * math.log10(pmax / pmin))))
    ps = np.geomspace(pmin, pmax, n)
    dvals = np.asarray([D_constant(ExponentTriple.split(p)) for p in ps])
    pstar = ps / (ps - 1.0)
    ratio = dvals / (ps ** 4 * pstar)
    lower = ps ** 2 * pstar
    top = ps >= pmax / 10.0
    slope = loglog_slope(ps[top], dvals[top])
    return AsymptoticsTable(ps, dvals, ratio, lower, slope)
