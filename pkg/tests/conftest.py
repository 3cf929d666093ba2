"""Shared oracles for the test suite.

Two independent reference implementations of the divided-difference recursion:
an exact-rational one (Fraction arithmetic, for polynomial kernels and s|s| at
rational nodes) and an extended-precision one (mpmath at >= 40 digits, for the
transcendental functions).  Both follow the bare textbook recursion with exact
equality tests and are kept independent of the production path.
"""

from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

MP_FUNCS = {
    "square": lambda s: s * s,
    "cube": lambda s: s ** 3,
    "sin": mp.sin,
    "cos": mp.cos,
    "exp": mp.exp,
    "abs2": lambda s: s * abs(s),
}


def mp_divdiff(fname, nodes, dps=40):
    """Bare recursion at dps digits; nodes must not be fully coincident unless
    the function is polynomial-like."""
    f = MP_FUNCS[fname]
    with mp.workdps(dps):
        xs = [mp.mpf(str(v)) for v in nodes]

        def rec(zs):
            if len(zs) == 1:
                return f(zs[0])
            # split on the widest gap
            best = None
            for a in range(len(zs)):
                for b in range(len(zs)):
                    if zs[a] != zs[b]:
                        if best is None or abs(zs[a] - zs[b]) > abs(zs[best[0]] - zs[best[1]]):
                            best = (a, b)
            if best is None:
                raise ValueError("confluent tuple needs derivative data")
            a, b = best
            za = [z for i, z in enumerate(zs) if i != a]
            zb = [z for i, z in enumerate(zs) if i != b]
            return (rec(za) - rec(zb)) / (zs[b] - zs[a])

        return float(rec(xs))


def rational_divdiff(f, nodes, fprime=None):
    """Exact recursion over Fraction nodes; f maps Fraction -> Fraction.
    A first derivative handles order-1 confluent pairs when supplied."""
    xs = [Fraction(v) for v in nodes]

    def rec(zs):
        if len(zs) == 1:
            return f(zs[0])
        if len(zs) == 2 and zs[0] == zs[1] and fprime is not None:
            return fprime(zs[0])
        for a in range(len(zs)):
            for b in range(len(zs)):
                if zs[a] != zs[b]:
                    za = [z for i, z in enumerate(zs) if i != a]
                    zb = [z for i, z in enumerate(zs) if i != b]
                    return (rec(za) - rec(zb)) / (zs[b] - zs[a])
        raise ValueError("confluent tuple")

    return rec(xs)


def abs2_prime_rational(s: Fraction) -> Fraction:
    return 2 * abs(s)


def abs2_rational(s: Fraction) -> Fraction:
    return s * abs(s)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_unitary(n, rng):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
