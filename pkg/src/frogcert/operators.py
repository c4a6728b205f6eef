"""Interval evaluation of the generating-function operators L, H and A.

``L g``, ``H g`` and ``A g`` are evaluated compositionally from their
definitions: the handle ``g`` is queried at the induced points and the
terms are combined in interval arithmetic.  This works for any handle,
not only exponentials, and is what the certificate and the box-model
oracle both exercise.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

import numpy as np

from .interval import (
    Interval,
    as_interval,
    iv_const,
    iv_div_int,
    iv_exp,
    iv_mul,
    iv_sq,
)

__all__ = [
    "ExponentialPGF",
    "GeneratingFunctionHandle",
    "IteratedA",
    "MAX_DIRECT_ITERATIONS",
    "constant_one",
    "exp_pgf_deriv",
    "exp_pgf_eval",
    "iterate_A_on_exponential",
    "op_A",
    "op_H",
    "op_L",
]

MAX_DIRECT_ITERATIONS = 3


class GeneratingFunctionHandle:
    """A PGF on [0, 1] evaluated on intervals.

    ``eval`` maps an Interval of points (scalar or grid) to an Interval
    enclosing the PGF values there.
    """

    def __init__(self, eval: Callable[[Interval], Interval], descriptor: str):
        self._eval = eval
        self.descriptor = descriptor

    def eval(self, x: Interval) -> Interval:
        return self._eval(as_interval(x))

    def __call__(self, x) -> Interval:
        return self.eval(x)

    def __repr__(self):
        return f"<PGF {self.descriptor}>"


def _rate_interval(rate) -> Interval:
    if isinstance(rate, Interval):
        if np.any(np.asarray(rate.lo) < 0):
            raise ValueError("rate must be nonnegative")
        return rate
    if isinstance(rate, float):
        rate = Fraction(rate)
    if Fraction(rate) < 0:
        raise ValueError(f"rate must be nonnegative, got {rate}")
    return iv_const(rate)


def exp_pgf_eval(a, x) -> Interval:
    """Enclosure of e^{a(x-1)}, the PGF of Poisson(a)."""
    rate = _rate_interval(a)
    x = as_interval(x)
    return iv_exp(iv_mul(rate, x - 1))


def exp_pgf_deriv(a, x) -> Interval:
    """Enclosure of a*e^{a(x-1)}."""
    rate = _rate_interval(a)
    return iv_mul(rate, exp_pgf_eval(rate, x))


class ExponentialPGF(GeneratingFunctionHandle):
    """e^{rate (x-1)}; rate 0 is the constant-1 PGF."""

    def __init__(self, rate):
        if isinstance(rate, float):
            rate = Fraction(rate)
        if Fraction(rate) < 0:
            raise ValueError(f"rate must be nonnegative, got {rate}")
        self.rate = Fraction(rate)
        self._rate_iv = iv_const(self.rate)
        super().__init__(self._eval_exp, f"exp({self.rate}*(x-1))")

    def _eval_exp(self, x: Interval) -> Interval:
        return iv_exp(iv_mul(self._rate_iv, x - 1))

    def deriv(self, x) -> Interval:
        return iv_mul(self._rate_iv, self.eval(x))


def constant_one() -> ExponentialPGF:
    return ExponentialPGF(0)


# -- L and H from precomputed handle values -----------------------------------
#
# g2, g1, g0 are enclosures of g((x+2)/3), g((x+1)/3), g(x/3).


def _L_from_values(x: Interval, g2: Interval, g1: Interval, g0: Interval) -> Interval:
    g1sq = iv_sq(g1)
    t1 = iv_div_int(x + 3, 4) * (iv_sq(g2) * g2)
    t2 = iv_div_int(x + 2, 2) * (g1sq - g2 * g1sq)
    t3 = iv_div_int(x + 1, 4) * (g0 - 2 * (g1 * g0) - iv_sq(g2) * g0 + 2 * (g2 * g1 * g0))
    return t1 + t2 + t3


def _H_from_values(x: Interval, L: Interval, g2: Interval, g1: Interval) -> Interval:
    g1sq = iv_sq(g1)
    return (
        iv_div_int(L, 3)
        + iv_div_int(x + 3, 6) * (iv_sq(g2) * g2)
        + iv_div_int(x + 2, 6) * (g1sq - g2 * g1sq)
    )


def _thirds(x: Interval):
    return iv_div_int(x + 2, 3), iv_div_int(x + 1, 3), iv_div_int(x, 3)


def _LH(g: GeneratingFunctionHandle, x: Interval):
    p2, p1, p0 = _thirds(x)
    g2, g1, g0 = g(p2), g(p1), g(p0)
    L = _L_from_values(x, g2, g1, g0)
    return L, _H_from_values(x, L, g2, g1)


def op_L(g: GeneratingFunctionHandle, x) -> Interval:
    """Enclosure of (L g)(x)."""
    x = as_interval(x)
    p2, p1, p0 = _thirds(x)
    return _L_from_values(x, g(p2), g(p1), g(p0))


def op_H(g: GeneratingFunctionHandle, x) -> Interval:
    """Enclosure of (H g)(x)."""
    x = as_interval(x)
    return _LH(g, x)[1]


def op_A(g: GeneratingFunctionHandle, x) -> Interval:
    """Enclosure of (A g)(x), querying g at six points per x."""
    x = as_interval(x)
    L_lo, H_lo = _LH(g, iv_div_int(x, 2))
    L_hi, H_hi = _LH(g, iv_div_int(x + 1, 2))
    x3 = iv_div_int(x, 3)
    return (
        x3 * L_lo
        + iv_div_int(x + 1, 3) * iv_sq(L_hi)
        - x3 * (L_hi * L_lo)
        + iv_div_int(H_lo, 3)
        + iv_div_int(L_hi * H_hi, 3)
        - iv_div_int(L_hi * H_lo, 3)
    )


class _Memo(GeneratingFunctionHandle):
    """Caches handle answers keyed by the exact query interval."""

    def __init__(self, inner: GeneratingFunctionHandle):
        self._inner = inner
        self._cache: dict = {}
        super().__init__(self._lookup, inner.descriptor)

    def _lookup(self, x: Interval) -> Interval:
        key = (np.shape(x.lo), np.asarray(x.lo).tobytes(), np.asarray(x.hi).tobytes())
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = self._inner.eval(x)
        return hit


class IteratedA(GeneratingFunctionHandle):
    """The handle A^n g, expanded recursively (6^n base queries per point)."""

    def __init__(self, base: GeneratingFunctionHandle, n: int):
        if n < 0:
            raise ValueError("iteration count must be nonnegative")
        self.base = base
        self.n = n
        inner = base if n == 0 else _Memo(IteratedA(base, n - 1))
        self._inner = inner
        super().__init__(self._eval_iter, f"A^{n}[{base.descriptor}]")

    def _eval_iter(self, x: Interval) -> Interval:
        if self.n == 0:
            return self.base.eval(x)
        return op_A(self._inner, x)


def iterate_A_on_exponential(a, n: int, grid) -> Interval:
    """Enclosures of A^n[e^{a(x-1)}] at each grid point (n <= 3)."""
    if n > MAX_DIRECT_ITERATIONS:
        raise ValueError(
            f"n={n} exceeds the direct-iteration bound {MAX_DIRECT_ITERATIONS}: "
            f"the evaluation tree grows as 6**n handle queries per point "
            f"({6**n} here)"
        )
    if n < 0:
        raise ValueError("iteration count must be nonnegative")
    xs = _grid_interval(grid)
    return IteratedA(ExponentialPGF(a), n).eval(xs)


def _grid_interval(grid) -> Interval:
    if isinstance(grid, Interval):
        return grid
    pts = list(grid)
    if all(isinstance(p, (int, Fraction)) for p in pts):
        encl = [iv_const(p) for p in pts]
        return Interval(np.array([e.lo for e in encl]), np.array([e.hi for e in encl]))
    arr = np.asarray(pts, dtype=float)
    return Interval(arr, arr)
