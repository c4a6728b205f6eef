"""Grid certificate that the iterated operator drives e^{u(x-1)} to large rates.

One pass takes the current rate ``u`` and tries each step ``delta`` of the
menu, largest first.  A step is accepted when, on every cell
``[c_{j+1}, c_j]`` of the grid ``c_i = (N-i)/N``, the tangent line of
``f1 = e^{(u+delta)(x-1)}`` at ``c_j`` evaluated at ``c_{j+1}`` lies strictly
above ``f2 = A[e^{u(x-1)}]`` at ``c_{j+1}``.  Since ``f1`` is convex and
``f2`` is nondecreasing, that gives ``f1 >= f2`` on the whole cell, hence
``A[e^{u(x-1)}] <= e^{(u+delta)(x-1)}`` on [0, 1].
Rates are kept as exact fractions throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .interval import Interval, iv_const, iv_strictly_right_of
from .operators import ExponentialPGF, _grid_interval, op_A

__all__ = [
    "CLAIM",
    "DEFAULT_GRID_INTERVALS",
    "DEFAULT_MAX_PASSES",
    "DEFAULT_MENU",
    "TARGET_RATE",
    "Certificate",
    "CertificateError",
    "CertificateStep",
    "check_certificate",
    "grid_points",
    "run_certificate",
    "tangent_condition",
    "tangent_margins",
    "verify_certificate",
]

DEFAULT_GRID_INTERVALS = 256
DEFAULT_MENU = (Fraction(1, 16), Fraction(1, 32), Fraction(3, 256))
DEFAULT_MAX_PASSES = 340
TARGET_RATE = Fraction(15)
CLAIM = (
    "for every step: A[exp(u_before*(x-1))] <= exp(u_after*(x-1)) on [0,1], "
    "by tangent-line dominance of the convex upper function on each grid cell"
)


class CertificateError(ValueError):
    """A certificate document that is malformed or internally inconsistent."""


def grid_points(n: int = DEFAULT_GRID_INTERVALS) -> list[Fraction]:
    if n < 1:
        raise ValueError("grid needs at least one cell")
    return [Fraction(n - i, n) for i in range(n + 1)]


@dataclass(frozen=True)
class _Grid:
    n: int
    left: Interval   # c_j, j = 0..n-1
    right: Interval  # c_{j+1}
    h: Interval      # 1/n

    @classmethod
    def make(cls, n: int) -> _Grid:
        pts = _grid_interval(grid_points(n))
        return cls(n, pts[:-1], pts[1:], iv_const(Fraction(1, n)))


def _upper_tangent(rate: Fraction, g: _Grid) -> Interval:
    f1 = ExponentialPGF(rate)
    return f1(g.left) - g.h * f1.deriv(g.left)


def _lower_values(rate: Fraction, g: _Grid) -> Interval:
    return op_A(ExponentialPGF(rate), g.right)


def tangent_margins(u, delta, n: int = DEFAULT_GRID_INTERVALS) -> np.ndarray:
    """Certified gaps (tangent lower end minus A upper end) for all cells."""
    g = _Grid.make(n)
    up = _upper_tangent(Fraction(u) + Fraction(delta), g)
    low = _lower_values(Fraction(u), g)
    return np.asarray(up.lo) - np.asarray(low.hi)


def tangent_condition(u, delta, n: int = DEFAULT_GRID_INTERVALS) -> bool:
    """Whether the step u -> u + delta is certified on every grid cell."""
    return bool(np.all(tangent_margins(u, delta, n) > 0))


@dataclass(frozen=True)
class CertificateStep:
    n: int
    u_before: Fraction
    delta: Fraction
    u_after: Fraction
    # smallest certified gap over the cells (informational, not serialized)
    margin: float = field(default=float("nan"), compare=False)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "u_before": _frac_str(self.u_before),
            "delta": _frac_str(self.delta),
            "u_after": _frac_str(self.u_after),
        }


@dataclass(frozen=True)
class Certificate:
    grid_size: int
    step_menu: tuple
    steps: tuple
    passes: int
    final_rate: Fraction
    # steps where a larger menu value was rejected only because the enclosures
    # touched or overlapped, not because the operator was certainly larger
    overlap_rejections: tuple = field(default=(), compare=False)

    @property
    def intervals(self) -> int:
        return self.grid_size - 1

    def reaches(self, target=TARGET_RATE) -> bool:
        return self.final_rate >= Fraction(target)

    def as_dict(self) -> dict:
        return {
            "claim": CLAIM,
            "grid_size": self.grid_size,
            "step_menu": [_frac_str(d) for d in self.step_menu],
            "steps": [s.as_dict() for s in self.steps],
            "passes": self.passes,
            "final_rate": _frac_str(self.final_rate),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, doc: dict) -> Certificate:
        try:
            steps = tuple(
                CertificateStep(
                    int(s["n"]),
                    _parse_frac(s["u_before"]),
                    _parse_frac(s["delta"]),
                    _parse_frac(s["u_after"]),
                )
                for s in doc["steps"]
            )
            return cls(
                grid_size=int(doc["grid_size"]),
                step_menu=tuple(_parse_frac(d) for d in doc["step_menu"]),
                steps=steps,
                passes=int(doc["passes"]),
                final_rate=_parse_frac(doc["final_rate"]),
            )
        except (KeyError, TypeError) as exc:
            raise CertificateError(f"malformed certificate: {exc!r}") from exc

    @classmethod
    def from_json(cls, text: str) -> Certificate:
        return cls.from_dict(json.loads(text))


def _frac_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _parse_frac(s) -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise CertificateError(f"expected a rational 'p/q' string, got {s!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise CertificateError(f"bad rational {s!r}") from exc


def _validate_menu(menu) -> tuple:
    menu = tuple(sorted((Fraction(d) for d in menu), reverse=True))
    if not menu:
        raise ValueError("step menu is empty")
    if any(d <= 0 for d in menu):
        raise ValueError("step sizes must be positive")
    return menu


def run_certificate(
    grid_intervals: int = DEFAULT_GRID_INTERVALS,
    menu=DEFAULT_MENU,
    max_passes: int = DEFAULT_MAX_PASSES,
    start_rate=0,
    progress=None,
) -> Certificate:
    """Greedy search: at each pass accept the largest menu step that certifies.

    Stops after ``max_passes`` passes or when no menu step certifies.
    ``progress`` is called as ``progress(pass_index, rate)`` after each pass.
    """
    menu = _validate_menu(menu)
    if max_passes < 0:
        raise ValueError("max_passes must be nonnegative")
    g = _Grid.make(grid_intervals)
    u = Fraction(start_rate)
    steps: list[CertificateStep] = []
    overlaps: list[int] = []
    while len(steps) < max_passes:
        low = _lower_values(u, g)
        accepted = None
        overlap = False
        for d in menu:
            up = _upper_tangent(u + d, g)
            gaps = np.asarray(up.lo) - np.asarray(low.hi)
            if np.all(gaps > 0):
                accepted = CertificateStep(len(steps), u, d, u + d, float(gaps.min()))
                break
            # rejected; was any cell certainly violated, or only unresolved?
            if not np.any(iv_strictly_right_of(low, up)):
                overlap = True
        if accepted is None:
            break
        if overlap:
            overlaps.append(accepted.n)
        steps.append(accepted)
        u = accepted.u_after
        if progress is not None:
            progress(len(steps), u)
    return Certificate(
        grid_size=grid_intervals + 1,
        step_menu=menu,
        steps=tuple(steps),
        passes=len(steps),
        final_rate=u,
        overlap_rejections=tuple(overlaps),
    )


def check_certificate(cert: Certificate) -> tuple[bool, int | None, str]:
    """Re-verify every step; returns (ok, first failing step index, reason)."""
    if cert.grid_size < 2:
        return False, None, "grid must have at least two points"
    if not cert.steps:
        return False, None, "certificate has no steps"
    if cert.passes != len(cert.steps):
        return False, None, f"passes={cert.passes} but {len(cert.steps)} steps recorded"
    g = _Grid.make(cert.grid_size - 1)
    menu = set(cert.step_menu)
    prev = Fraction(0)
    for k, s in enumerate(cert.steps):
        if s.n != k:
            return False, k, f"step index {s.n} out of order"
        if s.u_before != prev:
            return False, k, "rate does not continue from the previous step"
        if s.delta <= 0 or s.u_after != s.u_before + s.delta:
            return False, k, "u_after differs from u_before + delta"
        if menu and s.delta not in menu:
            return False, k, f"delta {s.delta} is not in the step menu"
        gaps = np.asarray(_upper_tangent(s.u_after, g).lo) - np.asarray(_lower_values(s.u_before, g).hi)
        if not np.all(gaps > 0):
            return False, k, f"tangent condition fails at {int(np.sum(gaps <= 0))} cells"
        prev = s.u_after
    if cert.final_rate != prev:
        return False, len(cert.steps) - 1, "final_rate differs from the last u_after"
    return True, None, "ok"


def verify_certificate(cert: Certificate, target=TARGET_RATE) -> bool:
    """True iff every step re-verifies and the final rate reaches ``target``."""
    ok, _, _ = check_certificate(cert)
    return ok and cert.final_rate >= Fraction(target)
