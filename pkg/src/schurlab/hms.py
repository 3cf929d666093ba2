"""Hoermander-Mikhlin-Schur quantities for two-variable symbols (d = 1).

For a symbol phi on R^2 minus the diagonal the quantity computed here is

    |||phi||| = sup |phi|  +  sup |lam - mu| (|d_lam phi| + |d_mu phi|),

sampled over a diagonal-avoiding grid, so the reported value is monotone
non-decreasing under grid refinement and never exceeds the true supremum.

For phi(lam, mu) = f^[n](lam^(k), mu^(n+1-k)) the first-order partials are

    d_lam = k f^[n+1](lam^(k+1), mu^(n+1-k)),
    d_mu  = (n+1-k) f^[n+1](lam^(k), mu^(n+2-k)),

and |||phi||| <= (2n+3)/n! * sup|f^(n)|, which is the bound verified by the
test suite alongside the window estimate

    |lam-mu|^g |d^g_lam phi| <= 2^g (k+g-1)!/(k-1)! * sup|f^(n)|/n!,  g <= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .divdiff import divdiff_two_var_grid
from .errors import BadExponent, DiagonalMargin, OrderUnsupported
from .functions import KIND_GENERALIZED_ABS, ScalarFunction, sup_deriv


@dataclass(frozen=True)
class GridSpec:
    """Chebyshev tensor grid on box^2 with a strip of width margin removed
    around the diagonal."""

    box: tuple = (-5.0, 5.0)
    points: int = 512
    margin: float = None

    def __post_init__(self):
        lo, hi = self.box
        if hi <= lo:
            raise ValueError("box must have positive width")
        if self.margin is None:
            object.__setattr__(self, "margin", 1e-3 * (hi - lo))
        if self.margin <= 0:
            raise DiagonalMargin(f"diagonal margin must be positive, got {self.margin}")

    def nodes(self) -> np.ndarray:
        lo, hi = self.box
        k = np.arange(self.points)
        cheb = np.cos((2 * k + 1) * math.pi / (2 * self.points))
        return (lo + hi) / 2 + (hi - lo) / 2 * cheb


@dataclass
class TwoVariableSymbol:
    """Symbol with value and first partials; ``mask`` restricts the domain."""

    value: Callable
    partial_lam: Callable
    partial_mu: Callable
    mask: Optional[Callable] = None
    name: str = ""


def symbol_from_divdiff(f: ScalarFunction, n: int, k: int, fd_step: float = 1e-6) -> TwoVariableSymbol:
    """phi_f(lam, mu) = f^[n](lam^(k), mu^(n+1-k)) with analytic partials when
    f^(n+1) exists, central finite differences otherwise."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")

    def value(lam, mu):
        return divdiff_two_var_grid(f, n, k, lam, mu)

    analytic = f.kind != KIND_GENERALIZED_ABS and n + 1 <= f.max_order
    if analytic:
        def partial_lam(lam, mu):
            return k * divdiff_two_var_grid(f, n + 1, k + 1, lam, mu)

        def partial_mu(lam, mu):
            return (n + 1 - k) * divdiff_two_var_grid(f, n + 1, k, lam, mu)
    else:
        def partial_lam(lam, mu):
            return (value(lam + fd_step, mu) - value(lam - fd_step, mu)) / (2 * fd_step)

        def partial_mu(lam, mu):
            return (value(lam, mu + fd_step) - value(lam, mu - fd_step)) / (2 * fd_step)

    return TwoVariableSymbol(value, partial_lam, partial_mu,
                             name=f"divdiff[{f.name},n={n},k={k}]")


def signed_symbol(sym: TwoVariableSymbol) -> TwoVariableSymbol:
    """Multiply a symbol by sign(mu - lam) (sign(0) = 1), off-diagonal partials
    scaling accordingly."""
    def eps(lam, mu):
        return np.where(np.asarray(mu) - np.asarray(lam) >= 0, 1.0, -1.0)

    return TwoVariableSymbol(
        value=lambda lam, mu: eps(lam, mu) * sym.value(lam, mu),
        partial_lam=lambda lam, mu: eps(lam, mu) * sym.partial_lam(lam, mu),
        partial_mu=lambda lam, mu: eps(lam, mu) * sym.partial_mu(lam, mu),
        mask=sym.mask,
        name=f"sign*{sym.name}",
    )


def make_ks_symbol(s: float, sigma: int = 1) -> TwoVariableSymbol:
    """|mu - lam|^{is} on the half plane sigma(mu - lam) > 0, zero elsewhere."""
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")

    def mask(lam, mu):
        return sigma * (np.asarray(mu) - np.asarray(lam)) > 0

    def value(lam, mu):
        gap = np.abs(np.asarray(mu) - np.asarray(lam))
        return np.exp(1j * s * np.log(gap))

    def partial_lam(lam, mu):
        gap = np.asarray(mu) - np.asarray(lam)
        return value(lam, mu) * (-1j * s) / gap

    def partial_mu(lam, mu):
        gap = np.asarray(mu) - np.asarray(lam)
        return value(lam, mu) * (1j * s) / gap

    return TwoVariableSymbol(value, partial_lam, partial_mu, mask=mask,
                             name=f"k_s[s={s},sigma={sigma:+d}]")


@dataclass
class HmsReport:
    value: float
    sup_abs: float
    sup_weighted: float
    grid: GridSpec
    points_used: int


def hms_norm(sym: TwoVariableSymbol, grid: GridSpec = GridSpec()) -> HmsReport:
    """Sampled |||phi||| over the grid (restricted to the symbol's domain)."""
    if grid.margin <= 0:
        raise DiagonalMargin("diagonal margin must be positive")
    nodes = grid.nodes()
    lam = nodes[:, None]
    mu = nodes[None, :]
    keep = np.abs(lam - mu) >= grid.margin
    if sym.mask is not None:
        keep = keep & sym.mask(lam, mu)
    lam_b, mu_b = np.broadcast_arrays(lam, mu)
    lv, mv = lam_b[keep], mu_b[keep]
    if lv.size == 0:
        raise DiagonalMargin("grid left no admissible sample points")
    vals = np.abs(sym.value(lv, mv))
    weighted = np.abs(lv - mv) * (np.abs(sym.partial_lam(lv, mv))
                                  + np.abs(sym.partial_mu(lv, mv)))
    sup_abs = float(np.max(vals))
    sup_w = float(np.max(weighted))
    return HmsReport(sup_abs + sup_w, sup_abs, sup_w, grid, int(lv.size))


def hms_theorem_bound(n: int, k: int, f: ScalarFunction, interval=(-5.0, 5.0)) -> float:
    """(2n+3)/n! * sup|f^(n)| with the sup estimated on the given interval."""
    if n < 1 or not 1 <= k <= n:
        raise OrderUnsupported(f"need n >= 1 and 1 <= k <= n, got n={n}, k={k}")
    if f.kind != KIND_GENERALIZED_ABS and n > f.max_order:
        raise OrderUnsupported(f"{f.name} has no derivative of order {n}")
    return (2 * n + 3) / math.factorial(n) * sup_deriv(f, n, *interval)


def lemma43_check(n: int, k: int, gamma: int, f: ScalarFunction, samples: int = 1000,
                  box=(-5.0, 5.0), seed: int = 0, min_gap: float = 1e-3) -> float:
    """Max over random samples of lhs - rhs for the weighted derivative bound;
    non-positive up to roundoff when the bound holds."""
    if gamma not in (0, 1) or gamma > min(k, n + 1 - k):
        raise OrderUnsupported(
            f"need 0 <= gamma <= min(k, n+1-k) and gamma <= 1, got {gamma}")
    if f.kind == KIND_GENERALIZED_ABS or n + gamma > f.max_order:
        raise OrderUnsupported(f"{f.name} lacks derivatives of order {n + gamma}")
    rng = np.random.default_rng(seed)
    lo, hi = box
    lam = rng.uniform(lo, hi, samples)
    mu = rng.uniform(lo, hi, samples)
    shift = np.where(mu >= lam, min_gap, -min_gap)
    mu = mu + shift  # keep |lam - mu| >= min_gap
    sup_fn = sup_deriv(f, n, min(lo, np.min(mu)), max(hi, np.max(mu)))
    rhs = 2.0 ** gamma * math.factorial(k + gamma - 1) / math.factorial(k - 1) \
        * sup_fn / math.factorial(n)
    if gamma == 0:
        lhs = np.abs(divdiff_two_var_grid(f, n, k, lam, mu))
    else:
        lhs = np.abs(lam - mu) * np.abs(k * divdiff_two_var_grid(f, n + 1, k + 1, lam, mu))
    return float(np.max(lhs - rhs))


def pp_star_factor(p: float) -> float:
    """The multiplier growth factor p p* from the imported linear theorem."""
    if not 1 < p < np.inf:
        raise BadExponent(f"need p in (1, inf), got {p}")
    return p * p / (p - 1.0)
