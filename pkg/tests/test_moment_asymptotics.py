import math

import pytest
from hypothesis import given, settings, strategies as st

from artifact.errors import DomainError
from artifact.exact_engine import moment
from artifact.moment_asymptotics import a_k_sum, moment_estimate, moment_leading, moment_report
from artifact.special_functions import PrecisionContext

CTX = PrecisionContext(160)
MP = CTX.mp

# rounded estimates of the finite expansion, (ell, n) -> integer
ROUNDED = {
    (1, 10): 74,
    (2, 10): 870,
    (3, 10): 13769,
    (1, 100): 447153539,
    (2, 100): 101241634569,
    (3, 100): 44527640083065,
}


def test_a1_is_sqrt2():
    for n in (1, 2, 7, 100):
        assert abs(a_k_sum(1, n, CTX) - MP.sqrt(2)) < MP.mpf(10) ** -40


def test_ak_rejects_k_2_mod_4():
    for k in (2, 6, 10):
        with pytest.raises(DomainError):
            a_k_sum(k, 5, CTX)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 24).filter(lambda k: k % 4 != 2), st.integers(1, 200))
def test_ak_periodic_in_n(k, n):
    assert abs(a_k_sum(k, n, CTX) - a_k_sum(k, n + k, CTX)) < MP.mpf(10) ** -35


@pytest.mark.parametrize("key", sorted(ROUNDED))
def test_rounded_estimates(key):
    est = moment_estimate(*key, CTX)
    assert est.rounded == ROUNDED[key]
    assert est.imag_residual < 0.5


def test_round_invariant():
    est = moment_estimate(2, 37, CTX)
    assert abs(est.value.real - est.rounded) <= 0.5
    assert est.imag_residual == float(abs(est.value.imag))


def test_domain_errors():
    with pytest.raises(DomainError):
        moment_estimate(0, 10, CTX)
    with pytest.raises(DomainError):
        moment_leading(1, 0, CTX)


def test_leading_closed_form_ell1():
    for n in (5, 50, 500):
        expect = MP.sqrt(2) / 12 * MP.exp(MP.pi * MP.sqrt(MP.mpf(n) / 2))
        assert abs(moment_leading(1, n, CTX) / expect - 1) < MP.mpf(10) ** -40


def test_leading_ratios(table200):
    r1 = moment_leading(1, 10, CTX) / moment(2, 10, table200)
    r2 = moment_leading(2, 100, CTX) / moment(4, 100, table200)
    assert abs(r1 - MP.mpf("1.892666")) < 1e-5
    assert abs(r2 - MP.mpf("1.447874")) < 1e-5


def test_report_rows(table200):
    rows = {(r.ell, r.n): r for r in moment_report({1, 3}, {10, 100}, table200, CTX)}
    assert rows[(3, 10)].estimate == 13769 and rows[(3, 10)].exact == 9910
    assert rows[(3, 100)].estimate == 44527640083065
    dev = rows[(1, 100)].estimate_ratio - 1
    assert abs(dev / MP.mpf("2.5e-8") - 1) < 0.2


def test_report_without_table_matches_table(table200):
    a = moment_report({2}, {30}, table200, CTX)[0]
    b = moment_report({2}, {30}, None, CTX)[0]
    assert a.exact == b.exact and a.estimate == b.estimate


def test_error_growth_reported():
    # |rounded - exact| <= C n^{2l-1} log(n+2); C is reported, not bounded a priori
    from artifact.exact_engine import moment_series

    ser = moment_series(2, 300)
    cs = []
    for n in (50, 100, 200, 300):
        diff = abs(moment_estimate(1, n, CTX).rounded - ser[n])
        cs.append(diff / (n * math.log(n + 2)))
    assert all(math.isfinite(c) for c in cs)
    print("fitted C (ell=1):", max(cs))


def test_deterministic():
    a = moment_estimate(2, 64, CTX)
    b = moment_estimate(2, 64, PrecisionContext(160))
    assert a.rounded == b.rounded and a.value == b.value
