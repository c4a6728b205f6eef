"""Outward-rounded interval arithmetic on binary64 endpoints.

Endpoints may be Python floats or numpy arrays of equal shape; every
operation broadcasts, so a whole grid of enclosures can be pushed through
the same formula in one call.

Rounding is done without touching the FPU mode.  Addition and
multiplication use error-free transformations (TwoSum, Dekker's
TwoProduct) to find the sign of the rounding error, and an endpoint is
moved one representable value outward only when the computed float is on
the wrong side of the exact result.  Exact results therefore stay
degenerate, e.g. ``[1, 2] + [3, 4] == [4, 6]``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import numpy as np

__all__ = [
    "EXP_WIDEN_ULPS",
    "Interval",
    "as_interval",
    "iv_add",
    "iv_const",
    "iv_contains",
    "iv_div_int",
    "iv_exp",
    "iv_hull",
    "iv_mul",
    "iv_neg",
    "iv_point",
    "iv_sq",
    "iv_strictly_right_of",
    "iv_sub",
    "iv_subset",
]

# Widening applied to each endpoint of exp, in units in the last place.
# Covers a host exp() with error below one ulp, with one ulp to spare.
EXP_WIDEN_ULPS = 2

_INF = np.inf
_SPLITTER = 134217729.0  # 2**27 + 1
# Below this magnitude Dekker's split may lose bits to underflow; such
# products are widened unconditionally instead.
_TINY = 2.0**-900


def _down(x):
    return np.nextafter(x, -_INF)


def _up(x):
    return np.nextafter(x, _INF)


def _scalarize(v):
    if isinstance(v, np.ndarray) and v.ndim == 0:
        return float(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


class Interval:
    """Closed interval ``[lo, hi]``; endpoints are floats or same-shape arrays."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        if isinstance(lo, np.ndarray) or isinstance(hi, np.ndarray):
            lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
            if lo.ndim == 0:
                lo, hi = float(lo), float(hi)
        else:
            lo, hi = float(lo), float(hi)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("interval endpoints must be finite")
        if np.any(lo > hi):
            raise ValueError(f"empty interval: lo={lo!r} > hi={hi!r}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("Interval is immutable")

    @classmethod
    def _raw(cls, lo, hi) -> Interval:
        # trusted constructor for results of the primitives below
        obj = object.__new__(cls)
        object.__setattr__(obj, "lo", _scalarize(lo))
        object.__setattr__(obj, "hi", _scalarize(hi))
        return obj

    @property
    def shape(self):
        return np.shape(self.lo)

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return 0.5 * self.lo + 0.5 * self.hi

    def __getitem__(self, idx) -> Interval:
        return Interval._raw(np.asarray(self.lo)[idx], np.asarray(self.hi)[idx])

    def __len__(self):
        return len(self.lo)

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return bool(np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi))

    def __hash__(self):
        return hash((np.asarray(self.lo).tobytes(), np.asarray(self.hi).tobytes()))

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __contains__(self, value):
        return iv_contains(self, value)

    def __add__(self, other):
        return iv_add(self, as_interval(other))

    __radd__ = __add__

    def __sub__(self, other):
        return iv_sub(self, as_interval(other))

    def __rsub__(self, other):
        return iv_sub(as_interval(other), self)

    def __mul__(self, other):
        return iv_mul(self, as_interval(other))

    __rmul__ = __mul__

    def __neg__(self):
        return iv_neg(self)

    def __truediv__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return iv_div_int(self, other)
        if isinstance(other, Rational):
            return iv_mul(self, iv_const(1 / Fraction(other)))
        return NotImplemented

    def __pow__(self, n):
        if n == 2:
            return iv_sq(self)
        if n == 3:
            return iv_mul(iv_sq(self), self)
        raise ValueError("only squares and cubes are supported")


# -- error-free transformations ------------------------------------------------


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _sum_down(a, b):
    s, err = _two_sum(a, b)
    return np.where(err < 0, _down(s), s)


def _sum_up(a, b):
    s, err = _two_sum(a, b)
    return np.where(err > 0, _up(s), s)


def _prod_bounds(a, b):
    """Lower and upper enclosure of the exact product a*b (elementwise)."""
    p, err = _two_prod(a, b)
    zero = np.asarray(a == 0) | np.asarray(b == 0)
    tiny = (np.abs(p) < _TINY) & ~zero
    lo = np.where((err < 0) | tiny, _down(p), p)
    hi = np.where((err > 0) | tiny, _up(p), p)
    # the sign of a product is known exactly; never widen across zero
    same = np.asarray(a > 0) == np.asarray(b > 0)
    lo = np.where(same & ~zero, np.maximum(lo, 0.0), lo)
    hi = np.where(~same & ~zero, np.minimum(hi, 0.0), hi)
    return lo, hi


# -- constructors --------------------------------------------------------------


def iv_point(v) -> Interval:
    """Enclosure of a single real number.

    Floats are taken as exact.  Rationals (``Fraction``, ``int``) that are not
    representable get the two neighbouring floats as endpoints.
    """
    if isinstance(v, Interval):
        return v
    if isinstance(v, Rational):
        return iv_const(v)
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {v!r}")
    return Interval._raw(v, v)


def iv_const(q) -> Interval:
    """Tightest float enclosure of an exact rational."""
    q = Fraction(q)
    f = float(q)
    if not math.isfinite(f):
        raise ValueError(f"rational {q} is out of float range")
    exact = Fraction(f)
    if exact == q:
        return Interval._raw(f, f)
    if exact < q:
        return Interval._raw(f, math.nextafter(f, math.inf))
    return Interval._raw(math.nextafter(f, -math.inf), f)


def as_interval(v) -> Interval:
    if isinstance(v, Interval):
        return v
    if isinstance(v, np.ndarray):
        return Interval(v, v)
    return iv_point(v)


# -- arithmetic ----------------------------------------------------------------


def iv_add(a: Interval, b: Interval) -> Interval:
    return Interval._raw(_sum_down(a.lo, b.lo), _sum_up(a.hi, b.hi))


def iv_neg(a: Interval) -> Interval:
    return Interval._raw(-a.hi, -a.lo)


def iv_sub(a: Interval, b: Interval) -> Interval:
    return Interval._raw(_sum_down(a.lo, -b.hi), _sum_up(a.hi, -b.lo))


def iv_mul(a: Interval, b: Interval) -> Interval:
    los, his = [], []
    for x in (a.lo, a.hi):
        for y in (b.lo, b.hi):
            lo, hi = _prod_bounds(x, y)
            los.append(lo)
            his.append(hi)
    lo = np.minimum(np.minimum(los[0], los[1]), np.minimum(los[2], los[3]))
    hi = np.maximum(np.maximum(his[0], his[1]), np.maximum(his[2], his[3]))
    return Interval._raw(lo, hi)


def iv_sq(a: Interval) -> Interval:
    """Square with the dependency handled: the result never dips below 0."""
    lo_sq_lo, lo_sq_hi = _prod_bounds(a.lo, a.lo)
    hi_sq_lo, hi_sq_hi = _prod_bounds(a.hi, a.hi)
    straddle = (a.lo < 0) & (a.hi > 0)
    lo = np.where(straddle, 0.0, np.minimum(lo_sq_lo, hi_sq_lo))
    hi = np.maximum(lo_sq_hi, hi_sq_hi)
    return Interval._raw(lo, hi)


def _quot_down(x, n):
    q = x / n
    p, err = _two_prod(q, np.float64(n))
    # sign of q*n - x, computed exactly (p - x is exact by Sterbenz)
    d = (p - x) + err
    return np.where(d > 0, _down(q), q)


def _quot_up(x, n):
    q = x / n
    p, err = _two_prod(q, np.float64(n))
    d = (p - x) + err
    return np.where(d < 0, _up(q), q)


def iv_div_int(a: Interval, n: int) -> Interval:
    """Division by a nonzero exact integer (|n| < 2**26), outward rounded."""
    if n == 0:
        raise ZeroDivisionError("interval division by zero")
    if abs(n) >= 2**26:
        raise ValueError("integer divisor too large for exact residual check")
    if n < 0:
        return iv_neg(iv_div_int(a, -n))
    lo, hi = np.asarray(a.lo, dtype=float), np.asarray(a.hi, dtype=float)
    small = (np.abs(lo) < _TINY) | (np.abs(hi) < _TINY)
    qlo = np.where(small, _down(lo / n), _quot_down(lo, n))
    qhi = np.where(small, _up(hi / n), _quot_up(hi, n))
    qlo = np.where(lo >= 0, np.maximum(qlo, 0.0), qlo)
    qhi = np.where(hi <= 0, np.minimum(qhi, 0.0), qhi)
    return Interval._raw(qlo, qhi)


def _widen(x, steps, direction):
    for _ in range(steps):
        x = np.nextafter(x, direction)
    return x


def _host_exp(x):
    if isinstance(x, np.ndarray):
        flat = x.ravel()
        return np.fromiter((math.exp(v) for v in flat), dtype=float, count=flat.size).reshape(x.shape)
    return math.exp(x)


def iv_exp(a: Interval) -> Interval:
    """exp over an interval: monotone endpoints, widened EXP_WIDEN_ULPS each way."""
    lo = _widen(_host_exp(a.lo), EXP_WIDEN_ULPS, -_INF)
    hi = _widen(_host_exp(a.hi), EXP_WIDEN_ULPS, _INF)
    return Interval._raw(np.maximum(lo, 0.0), hi)


# -- predicates ----------------------------------------------------------------


def iv_strictly_right_of(a: Interval, b: Interval):
    """True where every point of ``a`` exceeds every point of ``b``.

    Touching endpoints count as failure.  Returns a bool for scalar
    intervals and a boolean array otherwise.
    """
    res = np.asarray(a.lo) > np.asarray(b.hi)
    return bool(res) if res.ndim == 0 else res


def iv_contains(a: Interval, value) -> bool:
    """Whether ``a`` contains ``value`` (a float, Fraction or Interval) everywhere."""
    if isinstance(value, Interval):
        return iv_subset(value, a)
    if isinstance(value, Rational):
        q = Fraction(value)
        lo = np.asarray(a.lo).ravel()
        hi = np.asarray(a.hi).ravel()
        return all(Fraction(float(l)) <= q <= Fraction(float(h)) for l, h in zip(lo, hi))
    return bool(np.all((a.lo <= value) & (value <= a.hi)))


def iv_subset(a: Interval, b: Interval) -> bool:
    return bool(np.all((b.lo <= a.lo) & (a.hi <= b.hi)))


def iv_hull(a: Interval, b: Interval) -> Interval:
    return Interval._raw(np.minimum(a.lo, b.lo), np.maximum(a.hi, b.hi))
