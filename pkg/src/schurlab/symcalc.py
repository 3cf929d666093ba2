"""Homogeneous symbol calculus: circle Fourier expansions, the order -2
convolution kernel of odd symbols, size/smoothness constants, and the
oscillatory factorization of quadrant-supported symbols with its constant.

A homogeneous order-0 symbol is determined by its circle profile rho.  For an
odd symbol with rho(theta) = sum_k alpha_k e^{ik theta} (alpha_0 = 0), the
Fourier transform is

    K(z) = sum_{k != 0} |k| alpha_k / (2 pi i^k) * z^k / |z|^{k+2},

homogeneous of order -2 with gradient homogeneous of order -3.

A symbol supported in the open quadrant sigma_1 R_+ x sigma_2 R_+ factorizes
through imaginary powers: with h(t) = m(sigma_1 e^t, sigma_2) one has
h(t) = int g(s) e^{ist} ds, hence m(xi) = int g(s) |xi_1|^{is} |xi_2|^{-is} ds
on the quadrant, and the associated constant is C(m) = int |g(s)| (1+2|s|)^2 ds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .decomp import SectorPartition, smoothstep
from .errors import OriginQuery, SupportViolation

_I_POWERS = (1.0 + 0j, 1j, -1.0 + 0j, -1j)
TWO_PI = 2.0 * math.pi


@dataclass
class HomogeneousSymbol:
    """Order-0 homogeneous symbol given by its circle profile."""

    profile: Callable  # theta (array ok) -> complex value
    parity: str = "none"  # even | odd | none
    support_arcs: Optional[tuple] = None
    name: str = ""

    def __post_init__(self):
        if self.parity not in ("even", "odd", "none"):
            raise ValueError(f"parity must be even/odd/none, got {self.parity!r}")
        if self.parity != "none":
            th = np.linspace(0.0, TWO_PI, 64, endpoint=False)
            a = np.asarray(self.profile(th), dtype=complex)
            b = np.asarray(self.profile(th + math.pi), dtype=complex)
            sgn = 1.0 if self.parity == "even" else -1.0
            scale = 1.0 + np.max(np.abs(a))
            if np.max(np.abs(b - sgn * a)) > 1e-12 * scale:
                raise ValueError(f"profile does not have parity {self.parity!r}")

    def __call__(self, xi1, xi2):
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        if np.any((xi1 == 0) & (xi2 == 0)):
            raise OriginQuery("homogeneous symbol undefined at the origin")
        return self.profile(np.mod(np.arctan2(xi2, xi1), TWO_PI))


def harmonic_symbol(k: int, real: bool = False) -> HomogeneousSymbol:
    """e^{ik theta}, or its real form cos(k theta)."""
    parity = "even" if k % 2 == 0 else "odd"
    if real:
        return HomogeneousSymbol(lambda th: np.cos(k * th), parity, name=f"cos{k}")
    return HomogeneousSymbol(lambda th: np.exp(1j * k * th), parity, name=f"e{k}")


def sine_symbol(k: int) -> HomogeneousSymbol:
    parity = "even" if k % 2 == 0 else "odd"
    return HomogeneousSymbol(lambda th: np.sin(k * th), parity, name=f"sin{k}")


def bump_symbol(arc=(math.pi / 8, 3 * math.pi / 8), width: float = None) -> HomogeneousSymbol:
    """Smooth bump supported in the given angular arc (first quadrant default).

    The default transition width (b-a)/2 makes the two smoothsteps meet in the
    middle, which maximizes the decay rate of the factorization transform."""
    a, b = arc
    if width is None:
        width = (b - a) / 2

    def profile(th):
        th = np.mod(np.asarray(th, dtype=float), TWO_PI)
        return smoothstep((th - a) / width) * smoothstep((b - th) / width)

    return HomogeneousSymbol(profile, "none", support_arcs=((a, b),), name="bump")


def profile_from_table(thetas: Sequence[float], values: Sequence[float]) -> Callable:
    """Periodic cubic interpolation of tabulated (theta, rho) samples."""
    from scipy.interpolate import CubicSpline

    thetas = np.asarray(thetas, dtype=float)
    values = np.asarray(values)
    if thetas[0] != 0.0 or not np.all(np.diff(thetas) > 0):
        raise ValueError("thetas must start at 0 and increase")
    th = np.append(thetas, TWO_PI)
    vals = np.append(values, values[0])
    spline = CubicSpline(th, vals, bc_type="periodic")
    return lambda t: spline(np.mod(t, TWO_PI))


@dataclass
class CircleCoefficients:
    K: int
    alphas: np.ndarray  # index k + K, k in [-K, K]

    def alpha(self, k: int) -> complex:
        if abs(k) > self.K:
            return 0.0 + 0j
        return complex(self.alphas[k + self.K])

    def kernel_factors(self):
        """c_k = |k| alpha_k / (2 pi i^k) for k != 0."""
        ks = np.arange(-self.K, self.K + 1)
        ipow = np.asarray([_I_POWERS[k % 4] for k in ks])
        c = np.abs(ks) * self.alphas / (TWO_PI * ipow)
        c[self.K] = 0.0
        return ks, c


def circle_fourier_coeffs(m: HomogeneousSymbol, K: int) -> CircleCoefficients:
    """alpha_k from 4K-point uniform circle sampling (exact for band limit < 3K)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    n = 4 * K
    th = TWO_PI * np.arange(n) / n
    vals = np.asarray(m.profile(th), dtype=complex)
    c = np.fft.fft(vals) / n
    alphas = np.empty(2 * K + 1, dtype=complex)
    for k in range(-K, K + 1):
        alphas[k + K] = c[k % n]
    return CircleCoefficients(K, alphas)


def coeff_tail_bound(m: HomogeneousSymbol, K: int, factor: int = 4) -> float:
    """Recorded tail sum_{K < |k| <= factor*K} |k| |alpha_k|."""
    big = circle_fourier_coeffs(m, factor * K)
    ks = np.arange(-factor * K, factor * K + 1)
    mask = np.abs(ks) > K
    return float(np.sum(np.abs(ks[mask]) * np.abs(big.alphas[mask])))


def _polar(z):
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    if np.any(r == 0):
        raise OriginQuery("kernel undefined at the origin")
    return r, np.angle(z)


def kernel_eval(m: HomogeneousSymbol, z, K: int = 256,
                coeffs: CircleCoefficients = None):
    """Truncated kernel sum at z (complex number(s) standing for R^2 points)."""
    if coeffs is None:
        coeffs = circle_fourier_coeffs(m, K)
    r, th = _polar(z)
    ks, c = coeffs.kernel_factors()
    phase = np.exp(1j * np.multiply.outer(th, ks))
    return (phase @ c) / r ** 2


def kernel_gradient(m: HomogeneousSymbol, z, K: int = 256,
                    coeffs: CircleCoefficients = None):
    """(d/dx, d/dy) of the truncated kernel, term-wise analytic."""
    if coeffs is None:
        coeffs = circle_fourier_coeffs(m, K)
    r, th = _polar(z)
    ks, c = coeffs.kernel_factors()
    phase = np.exp(1j * np.multiply.outer(th, ks))  # (..., k)
    cos_t = np.cos(th)[..., None]
    sin_t = np.sin(th)[..., None]
    gx = (phase * (-2.0 * cos_t - 1j * ks * sin_t)) @ c / r ** 3
    gy = (phase * (-2.0 * sin_t + 1j * ks * cos_t)) @ c / r ** 3
    return gx, gy


@dataclass
class SizeSmoothnessReport:
    c1_hat: float
    c2_hat: float
    c1_per_annulus: tuple
    c2_per_annulus: tuple
    tail: float


def size_smoothness_check(m: HomogeneousSymbol, radii=(1.0, 10.0), K: int = 256,
                          n_angles: int = 720) -> SizeSmoothnessReport:
    """Sampled sup of |z|^2 |K(z)| and |z|^3 |grad K(z)| over circles."""
    coeffs = circle_fourier_coeffs(m, K)
    th = TWO_PI * np.arange(n_angles) / n_angles
    c1s, c2s = [], []
    for r in radii:
        z = r * np.exp(1j * th)
        kv = kernel_eval(m, z, coeffs=coeffs)
        gx, gy = kernel_gradient(m, z, coeffs=coeffs)
        c1s.append(float(np.max(np.abs(kv)) * r ** 2))
        c2s.append(float(np.max(np.hypot(np.abs(gx), np.abs(gy))) * r ** 3))
    return SizeSmoothnessReport(max(c1s), max(c2s), tuple(c1s), tuple(c2s),
                                coeff_tail_bound(m, K))


# ----------------------------------------------------------------------------
# quadrant factorization
# ----------------------------------------------------------------------------

def _quadrant_mask(theta, sigma1: int, sigma2: int):
    return (sigma1 * np.cos(theta) > 0) & (sigma2 * np.sin(theta) > 0)


@dataclass
class S1Factorization:
    sigma1: int
    sigma2: int
    s_grid: np.ndarray
    g_values: np.ndarray
    C_m: float
    t_window: tuple
    t_points: int
    tail_density: float = field(default=0.0)  # |g(S)| (1+2S)^2 at the grid edge

    def reconstruct(self, xi1, xi2):
        """int g(s) |xi1|^{is} |xi2|^{-is} ds on the quadrant."""
        xi1 = np.asarray(xi1, dtype=float)
        xi2 = np.asarray(xi2, dtype=float)
        if np.any(self.sigma1 * xi1 <= 0) or np.any(self.sigma2 * xi2 <= 0):
            raise SupportViolation("reconstruction point outside the quadrant")
        t = np.log(np.abs(xi1)) - np.log(np.abs(xi2))
        phase = np.exp(1j * np.multiply.outer(t, self.s_grid))
        w = np.full(len(self.s_grid), self.s_grid[1] - self.s_grid[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        return phase @ (self.g_values * w)


def s1_factorize(m: HomogeneousSymbol, quadrant=( -1, 1), S: float = 40.0,
                 N: int = 4096, t_points: int = 8192,
                 support_tol: float = 1e-12) -> S1Factorization:
    """Fourier factorization of a one-quadrant symbol, with its constant C(m).

    The profile is checked to vanish (up to support_tol) outside the open
    quadrant; the t-integral runs over the detected support padded by 2.
    """
    sigma1, sigma2 = quadrant
    if sigma1 not in (-1, 1) or sigma2 not in (-1, 1):
        raise ValueError("quadrant signs must be +-1")
    probe = TWO_PI * np.arange(8192) / 8192
    vals = np.asarray(m.profile(probe), dtype=complex)
    outside = ~_quadrant_mask(probe, sigma1, sigma2)
    if np.max(np.abs(vals[outside]), initial=0.0) > support_tol:
        raise SupportViolation(
            f"symbol mass outside quadrant ({sigma1:+d},{sigma2:+d}) exceeds {support_tol}")

    s_grid = np.linspace(-S, S, N)
    inside = ~outside
    if np.max(np.abs(vals[inside]), initial=0.0) <= support_tol:
        g = np.zeros(N, dtype=complex)
        return S1Factorization(sigma1, sigma2, s_grid, g, 0.0, (-1.0, 1.0), t_points)

    theta_in = probe[inside & (np.abs(vals) > 1e-15)]
    t_vals = np.log(np.abs(np.cos(theta_in))) - np.log(np.abs(np.sin(theta_in)))
    t_lo, t_hi = float(np.min(t_vals)) - 2.0, float(np.max(t_vals)) + 2.0
    t = np.linspace(t_lo, t_hi, t_points)
    h = np.asarray(m.profile(np.mod(np.arctan2(sigma2 * np.ones_like(t),
                                               sigma1 * np.exp(t)), TWO_PI)),
                   dtype=complex)
    edge = max(abs(h[0]), abs(h[-1]))
    if edge > 1e-12 * (1.0 + np.max(np.abs(h))):
        raise SupportViolation("profile does not decay within the detected t-window")

    dt = t[1] - t[0]
    w = np.full(t_points, dt)
    w[0] *= 0.5
    w[-1] *= 0.5
    hw = h * w
    g = np.empty(N, dtype=complex)
    chunk = 256
    for start in range(0, N, chunk):
        ss = s_grid[start:start + chunk]
        g[start:start + chunk] = np.exp(-1j * np.outer(ss, t)) @ hw / TWO_PI
    weight = (1.0 + 2.0 * np.abs(s_grid)) ** 2
    C_m = float(np.trapezoid(np.abs(g) * weight, s_grid))
    tail_density = float(np.abs(g[0]) * weight[0] + np.abs(g[-1]) * weight[-1]) / 2
    return S1Factorization(sigma1, sigma2, s_grid, g, C_m, (t_lo, t_hi), t_points,
                           tail_density)


def a_base_profile(P: SectorPartition, which: int, sigma: int) -> HomogeneousSymbol:
    """Circle profile of the Toeplitz base of a_which (which in 3..6) restricted
    to the quadrant (-sigma R_+, sigma R_+)."""
    if which not in (3, 4, 5, 6):
        raise ValueError("which must be one of 3, 4, 5, 6")

    def profile(th):
        th = np.asarray(th, dtype=float)
        c, s = np.cos(th), np.sin(th)
        u = c + s
        with np.errstate(divide="ignore", invalid="ignore"):
            if which == 3:
                factor = np.where(u >= 0, 1.0, -1.0) * np.where(s != 0, u / np.where(s != 0, s, 1.0), 0.0)
                sector = 2
            elif which == 4:
                factor = np.where(c >= 0, 1.0, -1.0) * np.where(s != 0, -c / np.where(s != 0, s, 1.0), 0.0)
                sector = 2
            elif which == 5:
                factor = np.where(s >= 0, 1.0, -1.0) * np.where(c != 0, -s / np.where(c != 0, c, 1.0), 0.0)
                sector = 3
            else:
                factor = np.where(u >= 0, 1.0, -1.0) * np.where(c != 0, u / np.where(c != 0, c, 1.0), 0.0)
                sector = 3
        mask = _quadrant_mask(th, -sigma, sigma)
        return np.where(mask, P.theta_of_angle(sector, th) * factor, 0.0)

    return HomogeneousSymbol(profile, "none", name=f"a{which}[{sigma:+d}]")


def corollary52_constants(P: SectorPartition, which: int, S: float = 40.0,
                          N: int = 4096, t_points: int = 8192) -> float:
    """C(a_which) summed over the two opposite quadrant restrictions."""
    total = 0.0
    for sigma in (1, -1):
        sym = a_base_profile(P, which, sigma)
        total += s1_factorize(sym, (-sigma, sigma), S=S, N=N, t_points=t_points).C_m
    return total
