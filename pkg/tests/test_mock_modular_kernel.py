import random

import pytest
from hypothesis import given, settings, strategies as st

from artifact.errors import DomainError
from artifact.exact_engine import p2_series
from artifact.mock_modular_kernel import (
    MAIN_TERM_TRIPLES,
    _random_point,
    arc_integral_suite,
    f_nu,
    f_nu_expansion,
    h_fn,
    identity_suite,
    moment_remainder_fit,
    mu_fn,
    mu_main_term_suite,
    mu_tilde_fn,
    r2_dual_residual,
    r2_numeric,
    r2_series,
    r2_transform_residual,
    s_fn,
    theta_fn,
    theta_product,
)
from artifact.special_functions import PrecisionContext

CTX = PrecisionContext(128)
MP = CTX.mp
TOL = MP.ldexp(1, -(CTX.bits - 64))


def close(a, b, tol=TOL):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1)


def test_theta_zero_and_antiperiod():
    assert abs(theta_fn(0, 1j, CTX)) < TOL
    u = MP.mpc(0.3, 0.1)
    assert close(theta_fn(u + 1, 1j, CTX), -theta_fn(u, 1j, CTX))


def test_theta_series_matches_product():
    rng = random.Random(7)
    for _ in range(20):
        u, tau = _random_point(rng, MP)
        assert close(theta_fn(u, tau, CTX), theta_product(u, tau, CTX))


def test_s_at_half_tau():
    tau = MP.mpc(0, 0.5)
    assert close(s_fn(tau / 2, tau, CTX), MP.expjpi(tau / 4))


def test_s_laws():
    u, tau = MP.mpc(0.17, 0.05), MP.mpc(0.1, 0.9)
    assert close(s_fn(u + 1, tau, CTX), -s_fn(u, tau, CTX))
    assert close(s_fn(u, tau + 1, CTX), MP.expjpi(-0.25) * s_fn(u, tau, CTX))


def test_h_even_and_positive():
    u, tau = MP.mpc(0.21, 0.1), MP.mpc(0.05, 1.1)
    assert close(h_fn(-u, tau, CTX), h_fn(u, tau, CTX))
    h0 = h_fn(0, MP.mpc(0, 1), CTX)
    assert abs(h0.imag) < TOL and h0.real > 0


def test_mu_tilde_definition_and_antiperiod():
    u, v, tau = MP.mpc(0.13, 0.05), MP.mpc(-0.22, 0.1), MP.mpc(0.1, 1.0)
    assert close(mu_tilde_fn(u, v, tau, CTX), mu_fn(u, v, tau, CTX) + 0.5j * s_fn(u - v, tau, CTX))
    assert close(mu_tilde_fn(u + 1, v, tau, CTX), -mu_tilde_fn(u, v, tau, CTX))


def test_r2_routes_agree():
    q = MP.exp(-2 * MP.pi)
    a = r2_numeric(MP.mpf(1) / 6, q, CTX, "mu")
    b = r2_numeric(MP.mpf(1) / 6, q, CTX, "series")
    assert close(a, b, MP.ldexp(1, -(CTX.bits - 48)))


def test_r2_at_i_kills_q_cubed():
    # coefficient extraction by a discrete Fourier sum on a small circle
    rho = MP.mpf(1) / 8
    pts = 32
    vals = [r2_numeric(0.25, rho * MP.expjpi(2 * MP.mpf(j) / pts), CTX, "series") for j in range(pts)]
    c3 = sum(v * MP.expjpi(-2 * MP.mpf(3 * j) / pts) for j, v in enumerate(vals)) / pts / rho**3
    assert abs(c3) < MP.mpf(10) ** -10


def test_r2_at_zeta_one_is_p2():
    rho = MP.mpf(1) / 8
    pts = 32
    vals = [r2_series(0, MP.log(rho * MP.expjpi(2 * MP.mpf(j) / pts)) / (2j * MP.pi), CTX) for j in range(pts)]
    p2 = p2_series(10)
    for n in range(10):
        cn = sum(v * MP.expjpi(-2 * MP.mpf(n * j) / pts) for j, v in enumerate(vals)) / pts / rho**n
        assert abs(cn - p2[n]) < MP.mpf(10) ** -8


def test_r2_numeric_domain():
    with pytest.raises(DomainError):
        r2_numeric(0.25, 0.9, CTX)
    with pytest.raises(DomainError):
        r2_numeric(0.25, MP.mpf(0.1), CTX, route="nope")


def test_f_nu_limits():
    z = MP.mpc(0.3, 0.1)
    assert f_nu(2, 0, z, CTX) == z
    u = MP.mpc(0.05, 0.02)
    assert close(f_nu(2, u, z, CTX), f_nu(2, -u, z, CTX))
    assert close(f_nu_expansion(1, 0, z, CTX), z)
    assert close(f_nu_expansion(1, u, z, CTX, r_max=30), f_nu(1, u, z, CTX), MP.mpf(10) ** -25)
    with pytest.raises(DomainError):
        f_nu(1, 1, z, CTX)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_r2_dual_route_property(seed):
    rng = random.Random(seed)
    u = MP.mpf(rng.choice([1, 2, 3])) / rng.choice([5, 7, 8])
    tau = MP.mpc(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 1.5))
    assert r2_dual_residual(u, tau, CTX) < MP.ldexp(1, -(CTX.bits - 48))


@pytest.mark.parametrize("h,k", [(1, 4), (1, 2), (1, 5), (3, 7)])
def test_r2_transformation(h, k):
    z = MP.mpc(MP.mpf(1) / 5, MP.mpf(1) / 20)
    assert r2_transform_residual(MP.mpf(1) / 6, h, k, z, CTX) < TOL


def test_identity_suite_128_bits():
    recs = identity_suite(CTX, points=4)
    assert len(recs) == 8
    for r in recs:
        assert r.passed, r


def test_mu_main_terms_within_bounds():
    for r in mu_main_term_suite(CTX):
        assert r.passed and r.max_residual < 1, r


def test_arc_integral_within_bound():
    (rec,), checks = arc_integral_suite(CTX)
    assert rec.passed
    assert [(c.k, c.n, c.r) for c in checks] == list(MAIN_TERM_TRIPLES)


def test_moment_fit_reports_rows():
    rows = moment_remainder_fit(ells=(1,), cusps=((0, 1),), zs=(0.25,), ctx=CTX)
    assert rows and all(r["fitted_C"] >= 0 for r in rows)
