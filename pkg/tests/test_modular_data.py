import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact.errors import DomainError
from artifact.modular_data import (
    UnityRoot24,
    alpha_pm,
    chi,
    choose_inverse,
    farey_arcs,
    h_tilde,
    inverse_mod,
    kernel_constants,
    nu_knopp,
    nu_knopp_closed,
    nu_numeric,
    xi,
)

SEED = 424242


def test_farey_level_three():
    arcs = farey_arcs(3)
    assert [(a.h, a.k) for a in arcs] == [(0, 1), (1, 3), (1, 2), (2, 3)]
    half = next(a for a in arcs if (a.h, a.k) == (1, 2))
    assert half.theta_prime == half.theta_double_prime == Fraction(1, 10)
    assert arcs[0].theta_prime == Fraction(1, 4)


@pytest.mark.parametrize("N", [1, 2, 5, 9, 17])
def test_farey_gap_bounds(N):
    for a in farey_arcs(N):
        assert math.gcd(a.h, a.k) == 1 and 0 <= a.h < a.k <= N or (a.h, a.k) == (0, 1)
        for t in (a.theta_prime, a.theta_double_prime):
            assert Fraction(1, 2 * a.k * N) <= t <= Fraction(1, a.k * (N + 1))


def test_choose_inverse_examples():
    assert choose_inverse(1, 3).value == 32
    assert choose_inverse(1, 4).value == 15
    assert choose_inverse(0, 1).value == 0
    with pytest.raises(DomainError):
        choose_inverse(2, 4)


@settings(max_examples=60, deadline=None)
@given(k=st.integers(1, 60), h=st.integers(0, 200))
def test_choose_inverse_conventions(k, h):
    if math.gcd(h, k) != 1:
        return
    x = choose_inverse(h, k).value
    assert x >= 0
    if k % 2:
        assert x % 32 == 0 and (-h * x - 1) % k == 0
    elif k % 4 == 0:
        assert (-h * x - 1) % (4 * k) == 0
    else:
        assert (-2 * h * x - 1) % (k // 2) == 0


def test_h_tilde():
    assert [h_tilde(7), h_tilde(4), h_tilde(6), h_tilde(1)] == [-1, 0, 2, 1]


def test_chi_examples():
    assert chi(0, 0, 1) == UnityRoot24(-6)
    for h, k in ((1, 3), (2, 5), (3, 8), (5, 12)):
        x = choose_inverse(h, k).value
        c = chi(h, x, k)
        assert (c ** 24).t % 48 == 0
        assert chi(h, x + 24 * k, k) == c
        assert chi(h, x + 8 * k, k) ** 3 == c ** 3


def test_nu_examples():
    assert nu_knopp(((1, 1), (0, 1))) == UnityRoot24(2)
    assert nu_knopp(((0, -1), (1, 0))) == UnityRoot24(-6)


def test_nu_closed_form_against_snap():
    rng = random.Random(SEED)
    done = 0
    while done < 100:
        g = rng.randint(1, 50)
        d = rng.randint(-60, 60)
        if math.gcd(g, d) != 1:
            continue
        b = pow(-g, -1, abs(d)) if abs(d) > 1 else 0
        a = (1 + b * g) // d if d else None
        if d == 0 or (1 + b * g) % d:
            continue
        A = ((a, b), (g, d))
        assert nu_knopp_closed(A) == nu_numeric(A)
        done += 1


def test_xi_examples():
    assert abs(xi(0, 0, 1) + 1) < 1e-12
    rng = random.Random(SEED + 1)
    for _ in range(50):
        k = rng.randint(1, 40)
        h = rng.randint(0, 4 * k)
        if math.gcd(h, k) != 1:
            continue
        assert abs(abs(xi(h, inverse_mod(h, k), k)) - 1) < 1e-12


def test_xi_matches_composition():
    h, x, k = 1, 32, 3
    ht = h_tilde(h)
    c = chi(h, x, k).value()
    import cmath

    direct = (
        cmath.exp(1j * math.pi / 4)
        * c**-3
        * (-1) ** ((h - ht) // 4)
        * cmath.exp(1j * math.pi * ht / (8 * k) - 1j * math.pi * x * (ht - h) ** 2 / (16 * k))
    )
    assert abs(xi(h, x, k) - direct) < 1e-12


def test_kernel_constants():
    for s in (1, -1):
        val, alpha = kernel_constants(0, 0, 1, s)
        assert abs(val + 1) < 1e-12
        assert alpha == Fraction(s, 4)
    for k in range(1, 12):
        for ell in range(k):
            for s in (1, -1):
                assert -Fraction(1, 2) < alpha_pm(ell, k, s) < Fraction(1, 2)
                h = next(h for h in range(k) if math.gcd(h, k) == 1) if k > 1 else 0
                assert abs(abs(kernel_constants(ell, h, k, s)[0]) - 1) < 1e-12
