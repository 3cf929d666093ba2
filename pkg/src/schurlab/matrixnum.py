"""Dense complex matrices: singular values, Schatten and Marcinkiewicz norms,
decreasing rearrangement, polar-based Hoelder factorization, and text I/O.

Matrices are plain complex numpy arrays throughout.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import BadExponent, ConvergenceFailure, DimensionMismatch


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise ValueError("matrix entries must be finite")
    return m


def singular_values(a) -> np.ndarray:
    """Non-increasing singular values (LAPACK SVD behind the spec contract)."""
    m = as_matrix(a)
    try:
        return np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc


def schatten_norm(a, p) -> float:
    """(sum s_j^p)^(1/p); the largest singular value for p = inf."""
    if p != np.inf and p < 1:
        raise BadExponent(f"Schatten exponent must be >= 1 or inf, got {p}")
    s = singular_values(a)
    top = float(s[0])
    if top == 0.0:
        return 0.0
    if p == np.inf:
        return top
    if p == 2:  # Frobenius, exact
        return float(np.linalg.norm(s))
    # scale out the top value so large p cannot overflow
    return top * float(np.sum((s / top) ** p)) ** (1.0 / p)


def schatten_norm_from_sv(s: np.ndarray, p) -> float:
    if p != np.inf and p < 1:
        raise BadExponent(f"Schatten exponent must be >= 1 or inf, got {p}")
    top = float(s[0]) if len(s) else 0.0
    if top == 0.0:
        return 0.0
    if p == np.inf:
        return top
    return top * float(np.sum((s / top) ** p)) ** (1.0 / p)


def decreasing_rearrangement(a, t: float) -> float:
    """mu_t: right-continuous step function of the singular values."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    s = singular_values(a)
    idx = int(math.floor(t))
    return float(s[idx]) if idx < len(s) else 0.0


def _segment_max(c: float, slope: float, m: int):
    """max of (c + slope*(t-m)) / log(1+t) over [m, m+1] for m >= 1.

    The ratio has at most one interior critical point (a minimum), so the
    maximum sits at an endpoint; a bracketed search is run as a guard.
    """
    def ratio(t):
        return (c + slope * (t - m)) / math.log1p(t)

    best = max(ratio(m), ratio(m + 1))
    res = minimize_scalar(lambda t: -ratio(t), bounds=(m, m + 1), method="bounded",
                          options={"xatol": 1e-10})
    if res.success:
        best = max(best, -float(res.fun))
    return best


def marcinkiewicz_norm(a) -> float:
    """sup_t (integral_0^t mu_s ds) / log(1+t), the M_{1,inf} quasi-norm.

    The integral is piecewise linear with integer breakpoints; the supremum is
    taken exactly segment by segment (on [0,1] the ratio is increasing, and
    past the rank the numerator is constant while log grows).
    """
    s = singular_values(a)
    s = s[s > 0]
    if len(s) == 0:
        return 0.0
    best = float(s[0]) / math.log(2.0)  # t = 1 endpoint of the first segment
    cum = float(s[0])
    for m in range(1, len(s)):
        best = max(best, _segment_max(cum, float(s[m]), m))
        cum += float(s[m])
    # beyond t = rank the ratio only decays
    best = max(best, cum / math.log1p(len(s)))
    return best


def cumulative_singular_integral(s: np.ndarray, t: float) -> float:
    """integral_0^t mu of the step function with values s (piecewise linear)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    full = int(math.floor(t))
    out = float(np.sum(s[:min(full, len(s))]))
    if full < len(s):
        out += float(s[full]) * (t - full)
    return out


def holder_split(z, p: float):
    """Factor z = y @ x with ||z||_p = ||y||_2p * ||x||_2p via the polar parts.

    y = U |z|^{1/2} and x = |z|^{1/2} where z = U |z|.
    """
    if p < 1:
        raise BadExponent(f"need p >= 1, got {p}")
    m = as_matrix(z)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch("holder_split needs a square matrix")
    try:
        u, s, vh = np.linalg.svd(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    root = np.sqrt(s)
    y = (u * root) @ vh
    x = (vh.conj().T * root) @ vh
    return y, x


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish unitary from the QR factorization of a complex Gaussian."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def write_matrix(path, a):
    """Plain text: header 'rows cols', then row-major 're im' pairs (17 digits)."""
    m = as_matrix(a)
    rows, cols = m.shape
    with open(path, "w") as fh:
        fh.write(f"{rows} {cols}\n")
        for i in range(rows):
            parts = []
            for j in range(cols):
                v = m[i, j]
                parts.append(f"{v.real:.17g} {v.imag:.17g}")
            fh.write(" ".join(parts) + "\n")


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing header")
    rows, cols = int(tokens[0]), int(tokens[1])
    data = np.asarray([float(t) for t in tokens[2:]], dtype=float)
    if data.size != 2 * rows * cols:
        raise ValueError(f"{path}: expected {2 * rows * cols} numbers, got {data.size}")
    data = data.reshape(rows * cols, 2)
    return (data[:, 0] + 1j * data[:, 1]).reshape(rows, cols)
