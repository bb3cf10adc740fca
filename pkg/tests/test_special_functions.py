from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact.errors import DomainError
from artifact.special_functions import (
    PrecisionContext,
    bernoulli_poly,
    bessel_i_half,
    bessel_i_series,
    beta_of_square,
    big_e,
    erf_fn,
    eta_fn,
    kappa,
    precision_for,
)

CTX = PrecisionContext(128)
MP = CTX.mp


def test_bernoulli_values():
    assert bernoulli_poly(2, Fraction(1, 2)) == Fraction(-1, 12)
    assert bernoulli_poly(0, Fraction(3, 7)) == 1
    assert bernoulli_poly(4, Fraction(1, 2)) == Fraction(7, 240)


def test_kappa_values():
    assert kappa(0, 0, 0).r == 1 and kappa(0, 0, 0).a == 0
    assert kappa(0, 0, 1).r == Fraction(1, 12)
    k = kappa(1, 0, 0)
    assert (k.r, k.a) == (Fraction(-1, 2), 1)


def test_kappa_recomputed():
    from math import factorial

    for a in range(4):
        for b in range(4):
            for c in range(4):
                num = (-1) ** (a + c) * factorial(2 * (a + b + c)) * bernoulli_poly(2 * c, Fraction(1, 2))
                den = factorial(a) * factorial(2 * b + 1) * factorial(2 * c) * 4 ** (a + b)
                assert kappa(a, b, c).r == Fraction(num) / den


def test_bessel_closed_forms():
    assert abs(bessel_i_half(-1, MP.mpf(1), CTX) - MP.sqrt(2 / MP.pi) * MP.cosh(1)) < MP.mpf(2) ** -120
    x = MP.mpf(3.7)
    assert abs(bessel_i_half(1, x, CTX) / bessel_i_half(-1, x, CTX) - MP.tanh(x)) < MP.mpf(2) ** -120
    big = MP.mpf(10) ** 4
    assert abs(bessel_i_half(5, big, CTX) * MP.sqrt(2 * MP.pi * big) / MP.exp(big) - 1) < 1e-3
    with pytest.raises(DomainError):
        bessel_i_half(1, MP.mpf(0), CTX)


@pytest.mark.parametrize("two_nu", [-1, 1, 3, 5])
@pytest.mark.parametrize("x", [1, 10, 100])
def test_bessel_recurrence_vs_series(two_nu, x):
    a = bessel_i_half(two_nu, MP.mpf(x), CTX)
    b = bessel_i_series(MP.mpf(two_nu) / 2, MP.mpf(x), CTX)
    assert abs(a - b) / abs(b) < MP.mpf(2) ** -(CTX.bits - 40)


def test_eta_laws():
    t = MP.mpc(0, 2)
    assert abs(eta_fn(t + 1, CTX) / eta_fn(t, CTX) - MP.expjpi(MP.mpf(1) / 12)) < MP.mpf(2) ** -110
    t = MP.mpc(1, 1)
    assert abs(eta_fn(-1 / t, CTX) / eta_fn(t, CTX) - MP.sqrt(-1j * t)) < MP.mpf(2) ** -110
    e = eta_fn(MP.mpc(0, 1), CTX)
    assert abs(e.imag) < MP.mpf(2) ** -120 and e.real > 0


def test_erf_and_e():
    assert erf_fn(0, CTX) == 0
    assert abs(erf_fn(20, CTX) - 1) < MP.mpf(2) ** -(CTX.bits // 2)
    for x in (MP.mpf(0.7), MP.mpf(-0.7)):
        sgn = 1 if x > 0 else -1
        assert abs(big_e(x, CTX) - sgn * (1 - beta_of_square(x, CTX))) < MP.mpf(2) ** -120


def test_precision_policy():
    assert precision_for(100).bits == 96 + __import__("math").ceil(__import__("math").pi * (800) ** 0.5 / __import__("math").log(2))
    with pytest.raises(DomainError):
        PrecisionContext(32)


@settings(max_examples=25, deadline=None)
@given(x=st.floats(0.05, 50), two_nu=st.sampled_from([-3, -1, 1, 3, 5, 7]))
def test_precision_stability(x, two_nu):
    lo = PrecisionContext(96)
    hi = lo.doubled()
    a = bessel_i_half(two_nu, lo.mp.mpf(x), lo)
    b = bessel_i_half(two_nu, hi.mp.mpf(x), hi)
    assert abs(hi.mp.mpf(a) - b) / abs(b) <= hi.mp.mpf(2) ** -(lo.bits - 32)
