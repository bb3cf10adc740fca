import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact.errors import DomainError, VerificationError
from artifact.exact_engine import build_rank_table, combination_series, n2_mod
from artifact.inequality_certifier import (
    Cyclotomic,
    InequalitySpec,
    MEMORY_GUARD_N,
    _iv,
    _table3,
    analytic_terms,
    builtin_specs,
    certify,
    check_equalities,
    closing_list,
    cyclotomic_polynomial,
    mao1_spec,
    mao3_spec,
    replay,
    residue_spec,
    spec_from_json,
)
from artifact.special_functions import PrecisionContext

CTX = PrecisionContext(192)


@pytest.fixture(scope="module")
def mao1_cert():
    return certify(mao1_spec(), CTX)


@pytest.fixture(scope="module")
def mao3_cert():
    return certify(mao3_spec(), CTX)


def test_cyclotomic_polynomials():
    assert cyclotomic_polynomial(1) == (-1, 1)
    assert cyclotomic_polynomial(4) == (1, 0, 1)
    assert cyclotomic_polynomial(6) == (1, -1, 1)
    assert cyclotomic_polynomial(10) == (1, -1, 1, -1, 1)


def test_cyclotomic_arithmetic():
    z = Cyclotomic.zeta(10, 1)
    assert (Cyclotomic.zeta(10, 5) + Cyclotomic.zeta(10, 0)).is_zero()
    assert (z * Cyclotomic.zeta(10, 9)).rational_value() == 1
    # 4 cos(2 pi/5) + 1 = sqrt 5
    d = Cyclotomic.from_powers(10, {0: 1, 2: 2, 8: 2})
    assert (d * d).rational_value() == 5
    iv = _iv(128)
    x = d.real_interval(iv)
    r5 = iv.sqrt(5)
    assert x.a <= r5.b and r5.a <= x.b and x.b - x.a < 1e-30
    assert x.a > 0
    with pytest.raises(DomainError):
        z + Cyclotomic.zeta(5, 1)


def test_mao3_unity_form_matches_coefficients():
    s = mao3_spec()
    assert s.unity_form is not None
    for r in range(10):
        assert s.residue_coeffs[r] == s.residue_coeffs[(-r) % 10]


def test_bad_unity_form_rejected():
    s = mao3_spec()
    with pytest.raises(VerificationError):
        InequalitySpec("bad", 10, tuple(Fraction(1) for _ in range(10)), unity_form=s.unity_form)


def test_spec_validation():
    with pytest.raises(DomainError):
        residue_spec("x", 2, [0], [1])
    with pytest.raises(DomainError):
        residue_spec("x", 5, [0], [1], step=5, offset=5)
    with pytest.raises(DomainError):
        InequalitySpec("x", 5, (1, 0, 0))


def test_zero_component_is_rejected():
    # N2(0,4,n) - N2(2,4,n) alone is fine; adding the constant class breaks the top term
    with pytest.raises(DomainError):
        analytic_terms(residue_spec("flat", 4, [0, 1, 2, 3], []))


def test_mao1_proved(mao1_cert):
    c = mao1_cert
    assert c.status == "proved"
    lo, hi = c.checked_range
    assert lo == 0 and hi >= 3823
    assert c.analytic_threshold is not None and c.analytic_threshold <= hi + 1


def test_mao3_proved(mao3_cert):
    c = mao3_cert
    assert c.status == "proved"
    lo, hi = c.checked_range
    assert lo == 3 and hi >= 1190


def test_certificate_json_roundtrip(mao3_cert):
    d = mao3_cert.to_json()
    assert json.loads(json.dumps(d)) == d
    assert "seconds" not in d and d["status"] == "proved"


def test_certificate_json_is_deterministic():
    a = certify(_table3()[0], CTX).to_json()
    b = certify(_table3()[0], CTX).to_json()
    assert a == b


@pytest.mark.parametrize("idx", [0, 1, 2])
def test_fast_table_rows(idx):
    s = _table3()[idx]
    c = certify(s, CTX)
    assert c.status == "proved"
    assert c.checked_range[1] >= s.stated_start + s.stated_terms
    assert c.analytic_threshold <= 10 * (s.stated_start + s.stated_terms)


def test_table_row_catalogue():
    rows = _table3()
    assert len(rows) == 12
    assert [r.stated_terms for r in rows[1:9]] == [934, 876, 870, 892, 934, 876, 869, 892]
    assert rows[0].stated_terms == 1286
    names = set(builtin_specs())
    assert {"mao1", "mao3", "table3:1", "table3:12"} <= names
    assert len(closing_list()) == 16 and all(s.name in names for s in closing_list())


def test_replay_agrees(mao1_cert):
    again = replay(mao1_cert)
    assert again.status == mao1_cert.status and again.bits == 2 * mao1_cert.bits


def test_supplied_values_detect_failure():
    s = residue_spec("fails", 3, [1], [0], step=3, n_start=1)
    vals = [5] * 5000
    vals[7] = 0
    c = certify(s, CTX, values=vals)
    assert c.status == "failed" and c.failed_at == 7


def test_discovered_start():
    # N2(0,5,5n+3) > N2(1,5,5n+3) fails at small n; the certifier finds the start
    s = residue_spec("disc", 5, [0], [1], step=5, offset=3, n_start=None)
    c = certify(s, CTX)
    assert c.discovered_start is not None
    assert c.checked_range[0] == c.discovered_start


def test_spec_from_json():
    s = spec_from_json({"name": "j", "c": 3, "plus": [1], "minus": [0], "step": 3, "n_start": 1})
    assert s == residue_spec("j", 3, [1], [0], step=3, n_start=1)
    with pytest.raises(DomainError):
        spec_from_json({"plus": [1]})


def test_equalities(table500):
    rep = check_equalities(500, table500)
    assert rep.ok and rep.checked["N2(m,n)=N2(-m,n)"] == 501
    with pytest.raises(DomainError):
        check_equalities(600, table500)


def test_guard_constant():
    assert MEMORY_GUARD_N == 100_000


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 12), st.data())
def test_integer_weights_scale_coefficients(c, data):
    plus = data.draw(st.lists(st.integers(0, c - 1), max_size=3))
    minus = data.draw(st.lists(st.integers(0, c - 1), max_size=3))
    s = residue_spec("h", c, plus, minus)
    w = s.integer_weights()
    assert set(w) == {r for r, x in enumerate(s.residue_coeffs) if x}
    for r, x in w.items():
        assert Fraction(x) == s.residue_coeffs[r]


_TABLE = build_rank_table(100)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100), st.sampled_from([5, 7, 8]))
def test_combination_series_matches_counts(n, c):
    s = residue_spec("h", c, [1], [0])
    ser = combination_series(s.integer_weights(), c, 100)
    assert ser[n] == n2_mod(1, c, n, _TABLE) - n2_mod(0, c, n, _TABLE)
