"""Acceptance gate: one test per criterion, each recording a pass/fail line.

The lines are printed in the pytest terminal summary ("acceptance criteria")
and on stdout when run with ``-s`` or as a script.
"""

import random
import time
from fractions import Fraction

import numpy as np
import pytest

from frogcert.bounds import (
    EPS,
    REFERENCE_REGION_VALUES,
    default_grid,
    psi,
    region_constants,
)
from frogcert.cli import dispatch
from frogcert.interval import iv_contains
from frogcert.operators import ExponentialPGF, op_A
from frogcert.report import dumps

GRID = default_grid()
SLACK = 1e-12
CERTIFY = ["certify"]
ORACLE = ["oracle", "--model", "all", "--dist", "all"]
HIT = ["simulate", "--mode", "hit", "--episodes", "1000000", "--depth-cap", "40", "--seed", "2024"]
PHI = ["simulate", "--mode", "phi", "--episodes", "1000000", "--depth-cap", "40", "--seed", "2024"]
COUPLED = [
    "simulate", "--mode", "coupled", "--episodes", "100000",
    "--depth-cap", "3", "--step-cap", "10000", "--seed", "2024",
]

_cache: dict = {}


def _report(args, threads=1):
    key = (tuple(args), threads)
    if key not in _cache:
        t0 = time.perf_counter()
        code, report = dispatch(list(args) + ["--threads", str(threads), "--out", "/dev/null"])
        _cache[key] = (code, report, dumps(report), time.perf_counter() - t0)
    return _cache[key]


def test_criterion_1_certificate(record_criterion):
    code, report, _, secs = _report(CERTIFY)
    r = report.results
    ok = code == 0 and r["passes"] == 340 and r["final_rate"] == Fraction(973, 64)
    ok = ok and float(r["final_rate"]) == 15.203125 and secs < 60
    record_criterion(1, ok, f"passes={r['passes']} final_rate={r['final_rate']} ({secs:.1f}s)")
    assert ok


def test_criterion_2_region_constants(record_criterion):
    reps = region_constants(15)
    details, ok = [], True
    for r in reps:
        ref = REFERENCE_REGION_VALUES[r.region]
        near = abs(Fraction(r.constant.lo) - ref) <= Fraction(1, 1000) and abs(
            Fraction(r.constant.hi) - ref
        ) <= Fraction(1, 1000)
        ok &= near and r.verdict
        details.append(f"{r.region}={r.constant.mid:.5f}{r.side}{r.threshold.mid:.5f}")
    record_criterion(2, ok, " ".join(details))
    assert ok


def test_criterion_3_envelopes(record_criterion):
    ok, details = True, []
    for a in (3, 15, 20, 50):
        value = op_A(ExponentialPGF(a), GRID)
        upper = psi(a, GRID)
        psi_ok = bool(np.all(upper.lo >= value.hi))
        ok &= psi_ok
        entry = f"a={a}: psi {psi_ok}"
        if a >= 15:
            bound = ExponentialPGF(Fraction(a) + EPS)(GRID)
            # x = 1 is a point of equality (both are exactly 1 there)
            interior = bool(np.all(bound.lo[1:] >= value.hi[1:]))
            at_one = iv_contains(bound[0], 1) and iv_contains(value[0], 1)
            ok &= interior and at_one
            entry += f", exp {interior and at_one}"
        details.append(entry)
    record_criterion(3, ok, "; ".join(details))
    assert ok


def test_criterion_4_oracle(record_criterion):
    code, report, _, secs = _report(ORACLE)
    comps = report.results["comparisons"]
    widths = max(c["max_width"] for c in comps.values())
    ok = code == 0 and len(comps) == 9 and widths < 1e-12
    ok = ok and comps["A/delta0"]["law"]["0"] == "13/24"
    ok = ok and comps["L/delta0"]["law"] == {"0": "3/4", "1": "1/4"}
    record_criterion(4, ok, f"{len(comps)} model/law pairs, max width {widths:.2e} ({secs:.1f}s)")
    assert ok


def test_criterion_5_closure_monotonicity(record_criterion):
    rng = random.Random(5)
    rates = sorted(Fraction(rng.randint(0, 40 * 64), 64) for _ in range(20))
    vals = [op_A(ExponentialPGF(a), GRID) for a in rates]
    ok = True
    for v in vals:
        ok &= bool(np.all(v.lo >= -SLACK) and np.all(v.hi <= 1 + SLACK))
        ok &= iv_contains(v[0], 1)
        ok &= bool(np.all(v.lo[:-1] >= v.hi[1:] - SLACK))
        ok &= bool(np.all(v.hi[:-2] - 2 * v.lo[1:-1] + v.hi[2:] >= -SLACK))
    for v1, v2 in zip(vals, vals[1:]):
        ok &= bool(np.all(v1.hi >= v2.lo - SLACK))
    record_criterion(5, ok, f"20 rates in [{float(rates[0]):.2f}, {float(rates[-1]):.2f}]")
    assert ok


def test_criterion_6_stochastic_constants(record_criterion):
    c1, hit, _, s1 = _report(HIT)
    c2, phi, _, s2 = _report(PHI)
    h = hit.results["hit"]
    f = phi.results["first_up"]
    r = phi.results["up_after_up"]
    ok = c1 == 0 and c2 == 0 and s1 + s2 < 300
    for table in (h, f, r):
        ok &= all(row["within_4_sigma"] for row in table.values())
    first = ",".join(f"{f[k]['estimate']:.4f}" for k in sorted(f))
    after = ",".join(f"{r[k]['estimate']:.4f}" for k in sorted(r))
    detail = (
        f"p1={h['1']['estimate']:.4f} p2={h['2']['estimate']:.4f} "
        f"first-up={first} up-after-up={after} ({s1 + s2:.0f}s)"
    )
    record_criterion(6, ok, detail)
    assert ok


def test_criterion_7_coupling(record_criterion):
    code, report, _, secs = _report(COUPLED)
    r = report.results
    ok = code == 0 and r["subset_violations"] == 0 and r["order_violations"] == 0
    ok = ok and r["exclusion_rate"] < 0.05 and r["episodes"] == 100_000
    record_criterion(
        7,
        ok,
        f"violations subset={r['subset_violations']} order={r['order_violations']}, "
        f"excluded {r['exclusion_rate']:.2%} ({secs:.0f}s)",
    )
    assert ok


@pytest.mark.parametrize("threads", [4, 8])
def test_criterion_8_determinism(threads, record_criterion):
    same = []
    for args in (CERTIFY, ORACLE, HIT, PHI, COUPLED):
        base = _report(args, 1)[2]
        other = _report(args, threads)[2]
        same.append(base == other)
    ok = all(same)
    prev = _criterion8.get("ok", True)
    _criterion8["ok"] = prev and ok
    _criterion8.setdefault("threads", []).append(threads)
    record_criterion(
        8, _criterion8["ok"], f"byte-identical reports for threads 1 vs {_criterion8['threads']}"
    )
    assert ok


_criterion8: dict = {}
