"""Analytic upper bounds for A[e^{a(x-1)}] and the scalar checks behind them.

``l_upper``/``h_upper`` bound L and H of an exponential PGF, ``psi``
combines them into a single four-term bound on A, and ``q_func`` is
``psi`` with the leading exponential divided out.  ``region_constants``
evaluates the four scalar quantities that split [0, 1] into regions,
each against its threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .interval import (
    Interval,
    as_interval,
    iv_const,
    iv_div_int,
    iv_exp,
    iv_mul,
    iv_sq,
    iv_strictly_right_of,
)
from .operators import ExponentialPGF, _grid_interval, op_A

__all__ = [
    "EPS",
    "MIN_RATE",
    "BoundParams",
    "RegionReport",
    "REFERENCE_REGION_VALUES",
    "default_grid",
    "eps_step_check",
    "exp_closed_H",
    "exp_closed_L",
    "h_upper",
    "iv_rational_power",
    "l_upper",
    "psbound_check",
    "psi",
    "psi_dominates_A",
    "q_func",
    "region_constants",
]

EPS = Fraction(1, 20)
# psi bounds A[e^{a(x-1)}] for every a >= 3; the eps-step claim needs a >= 15.
MIN_RATE = 3
REFERENCE_REGION_VALUES = {
    "i": Fraction(513, 1000),
    "ii": Fraction(369, 1000),
    "iii": Fraction(926, 1000),
    "iv": Fraction(9203, 10000),
}
REFERENCE_VALUE_TOL = Fraction(1, 1000)


def default_grid(n: int = 256) -> Interval:
    """The n+1 points (n-i)/n, i = 0..n, from 1 down to 0 (exact for n a power of 2)."""
    return _grid_interval([Fraction(n - i, n) for i in range(n + 1)])


def iv_rational_power(q, p: int, r: int) -> Interval:
    """Enclosure of q**(p/r) for rational q > 0, verified in exact arithmetic."""
    q = Fraction(q)
    if q <= 0 or r <= 0:
        raise ValueError("need q > 0 and r > 0")
    target = q**p
    guess = float(target) ** (1.0 / r)
    lo = hi = guess
    while Fraction(lo) ** r > target:
        lo = math.nextafter(lo, -math.inf)
    while Fraction(hi) ** r < target:
        hi = math.nextafter(hi, math.inf)
    return Interval(lo, hi)


def _rate(a) -> Fraction:
    a = Fraction(a)
    if a < MIN_RATE:
        raise ValueError(f"rate a={a} is below the validity threshold {MIN_RATE}")
    return a


def _e(k: Fraction, x: Interval, shift) -> Interval:
    """e^{k (x - shift)}"""
    return iv_exp(iv_mul(iv_const(k), x - iv_const(shift)))


def _e_const(k: Fraction) -> Interval:
    return iv_exp(iv_const(k))


@dataclass(frozen=True)
class BoundParams:
    a: Fraction
    c: Interval
    d: Interval
    ca: Interval
    eps: Fraction = EPS

    @classmethod
    def for_rate(cls, a) -> BoundParams:
        a = _rate(a)
        e3 = _e_const(-a / 3)
        c = iv_const(Fraction(3, 2)) - iv_mul(iv_const(Fraction(3, 4)), e3)
        d = 1 - iv_mul(iv_const(Fraction(7, 12)), e3)
        return cls(a=a, c=c, d=d, ca=iv_rational_power(a, -9, 4))


def l_upper(a, x) -> Interval:
    """(x+3)/4 e^{a(x-1)} + (x+1)/4 e^{a/3 (x-3)} + c e^{2a/3 (x-2)}"""
    p = BoundParams.for_rate(a)
    x = as_interval(x)
    return (
        iv_div_int(x + 3, 4) * _e(p.a, x, 1)
        + iv_div_int(x + 1, 4) * _e(p.a / 3, x, 3)
        + p.c * _e(2 * p.a / 3, x, 2)
    )


def h_upper(a, x) -> Interval:
    """(x+3)/4 e^{a(x-1)} + (x+1)/12 e^{a/3 (x-3)} + d e^{2a/3 (x-2)}"""
    p = BoundParams.for_rate(a)
    x = as_interval(x)
    return (
        iv_div_int(x + 3, 4) * _e(p.a, x, 1)
        + iv_div_int(x + 1, 12) * _e(p.a / 3, x, 3)
        + p.d * _e(2 * p.a / 3, x, 2)
    )


def psi(a, x) -> Interval:
    a = _rate(a)
    x = as_interval(x)
    return (
        iv_div_int(x + 2, 3) * iv_sq(iv_div_int(x + 7, 8)) * _e(a, x, 1)
        + iv_div_int(x + 1, 3) * iv_div_int(x + 6, 8) * _e(a / 2, x, 2)
        + iv_div_int(x + iv_const(Fraction(1, 3)), 3) * iv_div_int(x + 2, 8) * _e(a / 6, x, 6)
        + iv_const(Fraction(41, 9)) * _e(2 * a / 3, x, 2)
    )


def q_func(a, x) -> Interval:
    """e^{-a(x-1)} psi(x, a), with the exponents combined before evaluation."""
    a = _rate(a)
    x = as_interval(x)
    zero = Fraction(0)
    return (
        iv_div_int(x + 2, 3) * iv_sq(iv_div_int(x + 7, 8))
        + iv_div_int(x + 1, 3) * iv_div_int(x + 6, 8) * _e(-a / 2, x, zero)
        + iv_div_int(x + iv_const(Fraction(1, 3)), 3) * iv_div_int(x + 2, 8) * _e(-5 * a / 6, x, zero)
        + iv_const(Fraction(41, 9)) * _e(-a / 3, x, -1)
    )


def exp_closed_L(a, x) -> Interval:
    """L[e^{a(x-1)}] written out termwise; independent of op_L's composition."""
    a = Fraction(a)
    x = as_interval(x)
    return (
        iv_div_int(x + 3, 4) * _e(a, x, 1)
        + iv_div_int(x + 2, 2) * (_e(2 * a / 3, x, 2) - _e(a, x, Fraction(5, 3)))
        + iv_div_int(x + 1, 4)
        * (
            _e(a / 3, x, 3)
            - 2 * _e(2 * a / 3, x, Fraction(5, 2))
            - _e(a, x, Fraction(5, 3))
            + 2 * _e(a, x, 2)
        )
    )


def exp_closed_H(a, x) -> Interval:
    """H[e^{a(x-1)}] written out termwise."""
    a = Fraction(a)
    x = as_interval(x)
    return (
        iv_div_int(x + 3, 4) * _e(a, x, 1)
        + iv_div_int(x + 2, 3) * (_e(2 * a / 3, x, 2) - _e(a, x, Fraction(5, 3)))
        + iv_div_int(x + 1, 12)
        * (
            _e(a / 3, x, 3)
            - 2 * _e(2 * a / 3, x, Fraction(5, 2))
            - _e(a, x, Fraction(5, 3))
            + 2 * _e(a, x, 2)
        )
    )


@dataclass(frozen=True)
class RegionReport:
    region: str
    constant: Interval
    reference_value: Fraction | None
    threshold: Interval
    side: str  # "<" or ">": required relation of constant to threshold
    verdict: bool
    matches_reference: bool | None

    def as_dict(self) -> dict:
        return {
            "region": self.region,
            "constant": [self.constant.lo, self.constant.hi],
            "reference_value": self.reference_value,
            "threshold": [self.threshold.lo, self.threshold.hi],
            "side": self.side,
            "verdict": self.verdict,
            "matches_reference": self.matches_reference,
        }


def _region_i(a: Fraction) -> Interval:
    # 13/24 a^{-1/4} + 7/12 a^{9/4} e^{-a/2} + 85/18 a^{9/4} e^{-2a/3}
    a94 = iv_rational_power(a, 9, 4)
    return (
        iv_const(Fraction(13, 24)) * iv_rational_power(a, -1, 4)
        + iv_const(Fraction(7, 12)) * a94 * _e_const(-a / 2)
        + iv_const(Fraction(85, 18)) * a94 * _e_const(-2 * a / 3)
    )


def _region_ii(a: Fraction) -> Interval:
    # 125/256 - 7a/24 e^{-a/4} - 5a/36 e^{-5a/12} - 41a/27 e^{-a/2}
    return (
        iv_const(Fraction(125, 256))
        - iv_const(7 * a / 24) * _e_const(-a / 4)
        - iv_const(5 * a / 36) * _e_const(-5 * a / 12)
        - iv_const(41 * a / 27) * _e_const(-a / 2)
    )


def _region_iii(a: Fraction) -> Interval:
    # Q on [1/8, 1/2): polynomials at 1/2, exponentials at 1/8
    return (
        iv_const(Fraction(375, 512))
        + iv_const(Fraction(13, 32)) * _e_const(-a / 16)
        + iv_const(Fraction(25, 288)) * _e_const(-5 * a / 48)
        + iv_const(Fraction(41, 9)) * _e_const(-3 * a / 8)
    )


def _region_iv(a: Fraction) -> Interval:
    # Q on [0, 1/8): polynomials at 1/8, exponentials at 0
    poly = (
        Fraction(17, 24) * Fraction(57, 64) ** 2
        + Fraction(3, 8) * Fraction(49, 64)
        + Fraction(11, 72) * Fraction(17, 64)
    )
    return iv_const(poly) + iv_const(Fraction(41, 9)) * _e_const(-a / 3)


_REGIONS = {
    "i": (_region_i, "<", lambda: iv_const(Fraction(7, 12) - EPS)),
    "ii": (_region_ii, ">", lambda: iv_const(EPS)),
    "iii": (_region_iii, "<", lambda: _e_const(EPS * (Fraction(1, 8) - 1))),
    "iv": (_region_iv, "<", lambda: _e_const(-EPS)),
}


def region_constants(a=15) -> list[RegionReport]:
    """Evaluate the four region constants at rate a and check their side conditions."""
    a = Fraction(a)
    reports = []
    for name, (fn, side, threshold_fn) in _REGIONS.items():
        const = fn(a)
        thr = threshold_fn()
        ok = iv_strictly_right_of(thr, const) if side == "<" else iv_strictly_right_of(const, thr)
        ref = REFERENCE_REGION_VALUES[name] if a == 15 else None
        matches = None
        if ref is not None:
            matches = bool(
                Fraction(const.lo) >= ref - REFERENCE_VALUE_TOL and Fraction(const.hi) <= ref + REFERENCE_VALUE_TOL
            )
        reports.append(RegionReport(name, const, ref, thr, side, bool(ok), matches))
    return reports


def psbound_check(a=15) -> tuple[Interval, Interval, bool]:
    """psi(1 - c(a), a) <= 1 - (a + 1/20) c(a), with c(a) = a^{-9/4}."""
    p = BoundParams.for_rate(a)
    lhs = psi(p.a, 1 - p.ca)
    rhs = 1 - iv_const(p.a + EPS) * p.ca
    return lhs, rhs, bool(iv_strictly_right_of(rhs, lhs))


def psi_dominates_A(a, grid=None) -> bool:
    """Certified psi(x, a) >= A[e^{a(x-1)}] at every grid point."""
    xs = default_grid() if grid is None else _grid_interval(grid)
    upper = psi(a, xs)
    lower = op_A(ExponentialPGF(a), xs)
    return bool(np.all(np.asarray(upper.lo) >= np.asarray(lower.hi)))


def eps_step_check(a, grid=None) -> bool:
    """Grid check of A[e^{a(x-1)}] <= e^{(a+1/20)(x-1)}.

    Fails only where the operator enclosure lies strictly above the
    exponential enclosure; overlaps (including the shared value 1 at x=1)
    pass.  This is a statement about the grid points only, not the
    segments between them.
    """
    a = Fraction(a)
    if a <= 0:
        raise ValueError("rate must be positive")
    xs = default_grid() if grid is None else _grid_interval(grid)
    bound = ExponentialPGF(a + EPS).eval(xs)
    value = op_A(ExponentialPGF(a), xs)
    return not bool(np.any(iv_strictly_right_of(value, bound)))
