"""Angular sectors, smooth partition of unity, and the six-term decomposition
of second-order divided differences into two-variable and Toeplitz factors.

The three sector families on R^2 \\ {0} are, in angle coordinates,

    A_1 = (-2e, pi/2 + 2e) u (pi - 2e, 3pi/2 + 2e)
    A_2 = (pi/2 + e, 3pi/4 + e) u (3pi/2 + e, 7pi/4 + e)
    A_3 = (3pi/4 - e, pi - e) u (7pi/4 - e, 2pi - e)

with overlap parameter e.  The partition theta_1 + theta_2 + theta_3 = 1 is
built from exp(-1/t) smoothsteps supported strictly inside each arc,
symmetrized under xi -> -xi and normalized by the pointwise sum.

The six Toeplitz-side symbols are

    a_1 = e_1 th_1 psi_1    a_2 = e_2 th_1 (1 - psi_1)
    a_3 = e_3 th_2 psi_2    a_4 = e_1 th_2 (1 - psi_2)
    a_5 = e_2 th_3 psi_3    a_6 = e_3 th_3 (1 - psi_3)

where th_j(l0,l1,l2) = theta_j(l1-l0, l2-l1), psi_1 = (l0-l1)/(l0-l2) and its
cyclic relabelings, and e_1, e_2, e_3 are the signs of l1-l0, l2-l1, l2-l0
with sign(0) = 1.  Each product th_j * psi-factor is extended by zero off the
support of th_j, which absorbs the psi poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divdiff import divdiff_two_var_grid, divided_difference
from .errors import DiagonalQuery, OriginQuery, PoleHit
from .functions import KIND_GENERALIZED_ABS, ScalarFunction
from .matrixnum import as_matrix
from .schur import PointSet, apply_bilinear

TWO_PI = 2.0 * math.pi
_SUPPORT_FLOOR = 1e-300


def smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, exp(-1/t) blend between."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out


def sign1(t):
    """sign with the convention sign(0) = 1."""
    t = np.asarray(t, dtype=float)
    return np.where(t >= 0.0, 1.0, -1.0)


@dataclass(frozen=True)
class SectorPartition:
    """epsilon-parameterized partition of unity over the three sector families.

    ``band`` is the smoothstep transition width and ``inset`` how far the bump
    support is pulled inside each open arc; defaults epsilon/2 and epsilon/4
    keep the three supports overlapping, so the normalizing sum is positive.
    """

    epsilon: float = math.pi / 32
    band: float = None
    inset: float = None

    def __post_init__(self):
        if not 0 < self.epsilon < math.pi / 8:
            raise ValueError(f"epsilon must lie in (0, pi/8), got {self.epsilon}")
        if self.band is None:
            object.__setattr__(self, "band", self.epsilon / 2)
        if self.inset is None:
            object.__setattr__(self, "inset", self.epsilon / 4)
        if self.band <= 0 or self.inset < 0:
            raise ValueError("band must be positive and inset non-negative")

    def arcs(self, j: int):
        e = self.epsilon
        if j == 1:
            base = [(-2 * e, math.pi / 2 + 2 * e)]
        elif j == 2:
            base = [(math.pi / 2 + e, 3 * math.pi / 4 + e)]
        elif j == 3:
            base = [(3 * math.pi / 4 - e, math.pi - e)]
        else:
            raise ValueError(f"sector index must be 1, 2 or 3, got {j}")
        return base + [(a + math.pi, b + math.pi) for a, b in base]

    def _bump(self, j: int, phi):
        """Raw bump of sector j on angle array phi (no symmetrization)."""
        phi = np.asarray(phi, dtype=float)
        out = np.zeros_like(phi)
        for a, b in self.arcs(j):
            length = b - a
            d = np.mod(phi - a, TWO_PI)
            out = out + smoothstep((d - self.inset) / self.band) \
                * smoothstep((length - self.inset - d) / self.band)
        return out

    def theta_of_angle(self, j: int, phi):
        """theta_j as a function of the angle; even by explicit symmetrization."""
        phi = np.asarray(phi, dtype=float)
        nums = [0.5 * (self._bump(k, phi) + self._bump(k, phi + math.pi))
                for k in (1, 2, 3)]
        den = nums[0] + nums[1] + nums[2]
        return nums[j - 1] / den

    def support_bound(self) -> float:
        """Recorded bound for sup |theta_j * psi_j| over the support."""
        return 1.0 / math.sin(2.0 * self.epsilon) + 1.0


def theta(j: int, xi, P: SectorPartition) -> float:
    """theta_j at a nonzero point of R^2."""
    x1, x2 = float(xi[0]), float(xi[1])
    if x1 == 0.0 and x2 == 0.0:
        raise OriginQuery("theta undefined at the origin")
    return float(P.theta_of_angle(j, math.atan2(x2, x1)))


_PSI_DEFS = {
    1: (0, 1, 0, 2),  # (l0 - l1)/(l0 - l2)
    2: (2, 0, 2, 1),  # (l2 - l0)/(l2 - l1)
    3: (1, 2, 1, 0),  # (l1 - l2)/(l1 - l0)
}


def psi(j: int, triple) -> float:
    """psi_j, the rational Toeplitz interpolation factor."""
    lam = tuple(float(v) for v in triple)
    a, b, c, d = _PSI_DEFS[j]
    den = lam[c] - lam[d]
    if den == 0.0:
        raise PoleHit(f"psi_{j} pole at {triple}")
    return (lam[a] - lam[b]) / den


# (sector j, use 1 - psi_j?, sign-factor index) for a_1 ... a_6
_A_DEFS = {
    1: (1, False, 1), 2: (1, True, 2),
    3: (2, False, 3), 4: (2, True, 1),
    5: (3, False, 2), 6: (3, True, 3),
}


def _sign_factor(idx: int, l0, l1, l2):
    if idx == 1:
        return sign1(l1 - l0)
    if idx == 2:
        return sign1(l2 - l1)
    return sign1(l2 - l0)


def a_symbol(i: int, triple, P: SectorPartition) -> float:
    """a_i at an off-diagonal triple, with the zero extension off supp(theta)."""
    l0, l1, l2 = (float(v) for v in triple)
    if l0 == l1 == l2:
        raise DiagonalQuery(f"a_{i} undefined on the diagonal, got {triple}")
    j, complement, sgn_idx = _A_DEFS[i]
    th = theta(j, (l1 - l0, l2 - l1), P)
    if th < _SUPPORT_FLOOR:
        return 0.0
    p = psi(j, (l0, l1, l2))
    if complement:
        p = 1.0 - p
    return float(_sign_factor(sgn_idx, l0, l1, l2)) * th * p


# ----------------------------------------------------------------------------
# vectorized tables over a point set
# ----------------------------------------------------------------------------

def f2_values(f: ScalarFunction, l0, l1, l2):
    """Vectorized f^[2] over triples whose coordinates are exactly equal or
    separated (as on a PointSet grid); repeated coordinates use the derivative
    conventions, the full diagonal uses f''/2 (0 for s|s|)."""
    l0, l1, l2 = np.broadcast_arrays(np.asarray(l0, float), np.asarray(l1, float),
                                     np.asarray(l2, float))
    stacked = np.sort(np.stack([l0, l1, l2]), axis=0)
    lo, mid, hi = stacked[0], stacked[1], stacked[2]

    flo, fmid, fhi = f.eval(lo), f.eval(mid), f.eval(hi)
    d1 = f.deriv(1)
    span = hi - lo
    gap_lm = mid - lo
    gap_mh = hi - mid

    with np.errstate(divide="ignore", invalid="ignore"):
        slope_lm = np.where(gap_lm > 0, (fmid - flo) / np.where(gap_lm > 0, gap_lm, 1.0),
                            d1(lo))
        slope_mh = np.where(gap_mh > 0, (fhi - fmid) / np.where(gap_mh > 0, gap_mh, 1.0),
                            d1(hi))
        out = np.where(span > 0, (slope_mh - slope_lm) / np.where(span > 0, span, 1.0), 0.0)

    diag = lo == hi
    if np.any(diag):
        if f.kind == KIND_GENERALIZED_ABS:
            out = np.where(diag, 0.0, out)
        else:
            out = np.where(diag, f.deriv(2)(lo) / 2.0, out)
    return out


def two_var_tables(f: ScalarFunction, X: PointSet):
    """(phi, ring) tables on X: phi[i,j] = f^[2](x_i, x_j, x_j) and
    ring[i,j] = f^[2](x_i, x_i, x_j)."""
    v = X.values
    lam, mu = v[:, None], v[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = divdiff_two_var_grid(f, 2, 1, lam, mu)
        ring = divdiff_two_var_grid(f, 2, 2, lam, mu)
    if f.kind == KIND_GENERALIZED_ABS:
        dvals = np.zeros(X.n)
    else:
        dvals = f.deriv(2)(v) / 2.0
    idx = np.arange(X.n)
    phi[idx, idx] = dvals
    ring[idx, idx] = dvals
    return phi, ring


def a_values(l0, l1, l2, P: SectorPartition):
    """The six a_i evaluated on broadcastable arrays of off-diagonal triples."""
    l0, l1, l2 = np.broadcast_arrays(np.asarray(l0, float), np.asarray(l1, float),
                                     np.asarray(l2, float))
    phi = np.arctan2(l2 - l1, l1 - l0)
    thetas = {j: P.theta_of_angle(j, phi) for j in (1, 2, 3)}
    psis = {}
    for j, (a, b, c, d) in _PSI_DEFS.items():
        lam = (l0, l1, l2)
        den = lam[c] - lam[d]
        safe = np.where(den != 0, den, 1.0)
        psis[j] = np.where(den != 0, (lam[a] - lam[b]) / safe, 0.0)
    out = []
    for i in range(1, 7):
        j, complement, sgn_idx = _A_DEFS[i]
        th = thetas[j]
        p = 1.0 - psis[j] if complement else psis[j]
        out.append(_sign_factor(sgn_idx, l0, l1, l2)
                   * np.where(th > _SUPPORT_FLOOR, th * p, 0.0))
    return out


def a_tables(X: PointSet, P: SectorPartition):
    """The six a_i tables over X^3, with a_1 = 1 and a_i = 0 (i > 1) on the
    full diagonal so that the operator identity extends to diagonal triples."""
    v = X.values
    tables = a_values(v[:, None, None], v[None, :, None], v[None, None, :], P)
    idx = np.arange(X.n)
    for i, tab in enumerate(tables, start=1):
        tab[idx, idx, idx] = 1.0 if i == 1 else 0.0
    return tables


def decomposition_residual(f: ScalarFunction, triple, P: SectorPartition) -> float:
    """f^[2](triple) minus the six-term reconstruction, at one off-diagonal triple."""
    l0, l1, l2 = (float(v) for v in triple)
    if l0 == l1 == l2:
        raise DiagonalQuery(f"residual undefined on the diagonal, got {triple}")
    lhs = divided_difference(f, (l0, l1, l2))

    def phi_f(a, b):
        return divided_difference(f, (a, b, b))

    def ring_f(a, b):
        return divided_difference(f, (a, a, b))

    eps = lambda a, b: float(sign1(b - a))
    terms = (
        a_symbol(1, triple, P) * eps(l0, l1) * phi_f(l0, l1),
        a_symbol(2, triple, P) * eps(l1, l2) * ring_f(l1, l2),
        a_symbol(3, triple, P) * eps(l0, l2) * ring_f(l0, l2),
        a_symbol(4, triple, P) * eps(l0, l1) * ring_f(l0, l1),
        a_symbol(5, triple, P) * eps(l1, l2) * phi_f(l1, l2),
        a_symbol(6, triple, P) * eps(l0, l2) * phi_f(l0, l2),
    )
    return lhs - sum(terms)


def decomposition_residuals(f: ScalarFunction, triples, P: SectorPartition):
    """Vectorized six-term residuals at an (m, 3) array of off-diagonal triples."""
    triples = np.asarray(triples, dtype=float)
    l0, l1, l2 = triples[..., 0], triples[..., 1], triples[..., 2]
    lhs = f2_values(f, l0, l1, l2)
    a = a_values(l0, l1, l2, P)
    phi01 = f2_values(f, l0, l1, l1)
    phi12 = f2_values(f, l1, l2, l2)
    phi02 = f2_values(f, l0, l2, l2)
    ring12 = f2_values(f, l1, l1, l2)
    ring02 = f2_values(f, l0, l0, l2)
    ring01 = f2_values(f, l0, l0, l1)
    e01 = sign1(l1 - l0)
    e12 = sign1(l2 - l1)
    e02 = sign1(l2 - l0)
    rhs = (a[0] * e01 * phi01 + a[1] * e12 * ring12 + a[2] * e02 * ring02
           + a[3] * e01 * ring01 + a[4] * e12 * phi12 + a[5] * e02 * phi02)
    return lhs - rhs


def decomposition_tables(f: ScalarFunction, X: PointSet, P: SectorPartition) -> dict:
    """Everything schur_decomposition_residual needs, precomputed for X."""
    v = X.values
    f2 = f2_values(f, v[:, None, None], v[None, :, None], v[None, None, :])
    phi, ring = two_var_tables(f, X)
    eps2 = sign1(v[None, :] - v[:, None])
    return {
        "f2": f2.astype(complex),
        "a": a_tables(X, P),
        "eps_phi": (eps2 * phi).astype(complex),
        "eps_ring": (eps2 * ring).astype(complex),
    }


def schur_decomposition_residual(f: ScalarFunction, X: PointSet, a, b,
                                 P: SectorPartition, tables: dict = None) -> float:
    """S_2 distance between M_{f^[2]}(a, b) and its six-term composition."""
    a, b = as_matrix(a), as_matrix(b)
    if tables is None:
        tables = decomposition_tables(f, X, P)
    lhs = apply_bilinear(tables["f2"], X, a, b)
    a1, a2, a3, a4, a5, a6 = tables["a"]
    ep, er = tables["eps_phi"], tables["eps_ring"]
    rhs = apply_bilinear(a1, X, ep * a, b)
    rhs += apply_bilinear(a2, X, a, er * b)
    rhs += er * apply_bilinear(a3, X, a, b)
    rhs += apply_bilinear(a4, X, er * a, b)
    rhs += apply_bilinear(a5, X, a, ep * b)
    rhs += ep * apply_bilinear(a6, X, a, b)
    return float(np.linalg.norm(lhs - rhs))
