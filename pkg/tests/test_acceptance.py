"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (printed in the terminal summary and to
stdout) and then asserts.  A failing criterion is left failing.
"""

import math
import time
from fractions import Fraction

from artifact.exact_engine import (
    build_rank_table,
    insertion_dp_table,
    lambert_oracle_table,
    moment,
    moment_at,
    n2_mod,
    p2_series,
    residue_series,
)
from artifact.inequality_certifier import CHAIN_START, CHAIN_TERMS, certify, mao1_spec, mao3_spec, reproduce_table3
from artifact.mock_modular_kernel import arc_integral_suite, identity_suite, r2_transform_suite
from artifact.moment_asymptotics import moment_estimate, moment_leading
from artifact.special_functions import PrecisionContext, precision_for
from artifact.unity_asymptotics import error_bound, leading_profile, main_estimate

S2, S5, S6 = math.sqrt(2), math.sqrt(5), math.sqrt(6)


def record(report, num, passed, detail):
    report.append((num, bool(passed), detail))
    print(f"{'PASS' if passed else 'FAIL'} criterion {num}: {detail}")
    assert passed, detail


def test_criterion_01_exact_values(acceptance_report):
    expect = {
        (1, 10): 70,
        (2, 10): 742,
        (3, 10): 9910,
        (1, 100): 447153528,
        (2, 100): 101241563496,
        (3, 100): 44527325322888,
    }
    t0 = time.perf_counter()
    t100 = build_rank_table(100)
    s100 = time.perf_counter() - t0
    t0 = time.perf_counter()
    build_rank_table(4000)
    s4000 = time.perf_counter() - t0
    bad = [k for k, v in expect.items() if moment(2 * k[0], k[1], t100) != v]
    ok = not bad and s100 < 10 and s4000 < 600
    record(acceptance_report, 1, ok, f"6 moment values exact (mismatches {bad}); table n=100 in {s100:.2f} s, n=4000 in {s4000:.1f} s")


def test_criterion_02_moment_estimates(acceptance_report):
    expect = {
        (1, 10): 74,
        (2, 10): 870,
        (3, 10): 13769,
        (1, 100): 447153539,
        (2, 100): 101241634569,
        (3, 100): 44527640083065,
    }
    bad, worst = [], 0.0
    for (ell, n), v in expect.items():
        est = moment_estimate(ell, n, precision_for(n))
        worst = max(worst, est.imag_residual)
        if est.rounded != v or est.imag_residual >= 0.5:
            bad.append((ell, n, est.rounded))
    record(acceptance_report, 2, not bad, f"6 rounded estimates (mismatches {bad}); max imaginary residual {worst:.2e}")


# (ell, n, leading ratio, full ratio as ("plain", value) or ("dev", x) meaning 1 + x)
TABLE1 = [
    (1, 10, "1.892666", ("plain", "1.057143")),
    (1, 100, "1.170779", ("dev", "2.5e-8")),
    (1, 1000, "1.049075", ("dev", "1.3e-28")),
    (1, 10000, "1.015085", ("dev", "4.2e-94")),
    (2, 10, "4.999495", ("plain", "1.172507")),
    (2, 100, "1.447874", ("dev", "7.0e-7")),
    (2, 1000, "1.117096", ("dev", "2.5e-25")),
    (2, 10000, "1.035043", ("dev", "8.0e-91")),
    (3, 10, "23.68219", ("plain", "1.389405")),
    (3, 100, "2.082709", ("plain", "1.000007")),
    (3, 1000, "1.245479", ("dev", "2.0e-24")),
    (3, 10000, "1.070652", ("dev", "6.0e-88")),
]


def test_criterion_03_table1_ratios(acceptance_report):
    bad = []
    for ell, n, lead, (kind, full) in TABLE1:
        ctx = precision_for(n)
        mp = ctx.mp
        exact = moment_at(2 * ell, n)
        r_lead = moment_leading(ell, n, ctx) / exact
        r_full = mp.mpf(moment_estimate(ell, n, ctx).rounded) / exact
        ok = abs(r_lead - mp.mpf(lead)) <= mp.mpf("1e-5")
        if kind == "plain":
            ok = ok and abs(r_full - mp.mpf(full)) <= mp.mpf("1e-5")
        else:
            # the stated one- or two-digit deviation, to its last printed digit
            x = mp.mpf(full)
            ok = ok and abs((r_full - 1) - x) <= x / 5
        if not ok:
            bad.append((ell, n, mp.nstr(r_lead, 8), mp.nstr(r_full - 1, 3)))
    record(acceptance_report, 3, not bad, f"{len(TABLE1)} rows of leading and full ratios (mismatches {bad})")


def test_criterion_04_n1000_digits(acceptance_report):
    t0 = time.perf_counter()
    exact = moment_at(2, 1000)
    est = moment_estimate(1, 1000, precision_for(1000)).rounded
    secs = time.perf_counter() - t0
    ok = exact == 362167772560345987220442602052 and est == 362167772560345987220442602098 and secs < 1800
    record(acceptance_report, 4, ok, f"exact {exact}, estimate {est}, {secs:.2f} s")


def test_criterion_05_sandwich(acceptance_report):
    ns = (10, 25, 50, 100, 200, 400)
    ctx = PrecisionContext(192)
    mp = ctx.mp
    bad, worst = [], 0.0
    for a, c in ((1, 3), (1, 4), (1, 6), (1, 10), (3, 10)):
        rs = residue_series(c, max(ns))
        for n in ns:
            est, _ = main_estimate(a, c, n, ctx)
            exact = sum(rs[r][n] * mp.cospi(mp.mpf(2 * a * r) / c) for r in range(c))
            b = error_bound(a, c, n, ctx)
            worst = max(worst, float(abs(est - exact) / b))
            if abs(est - exact) > b:
                bad.append((a, c, n))
    record(acceptance_report, 5, not bad, f"30 (a/c, n) points, violations {bad}; max |error|/bound {worst:.2e}")


def _profiles():
    out = [
        (1, 6, 7, Fraction(1, 12), 2 * S2),
        (1, 7, 7, Fraction(3, 28), 4 * S2 * math.sin(math.pi / 7)),
        (1, 8, 7, Fraction(1, 8), 4 * S2 * math.sin(math.pi / 8)),
        (1, 9, 7, Fraction(5, 36), 4 * S2 * math.sin(math.pi / 9)),
        (1, 10, 7, Fraction(3, 20), S2 * (S5 - 1)),
    ]
    # epsilon_3(n): -2 on n = 0 mod 3, 1 otherwise
    out += [(1, 3, n, Fraction(1, 12), e * 2 * S6 / 3) for n, e in ((3, -2), (4, 1), (5, 1))]
    # epsilon_5(n) by n mod 5
    e5 = (6 * S2 * (5 - S5), 2 * S2 * (5 + S5), 20 * S2, 2 * S2 * (5 - S5), 6 * S2 * (5 + S5))
    out += [(1, 5, n, Fraction(1, 20), e5[n] * math.sin(math.pi / 5) / 5) for n in range(5)]
    return out


def test_criterion_06_leading_profiles(acceptance_report):
    ctx = PrecisionContext(160)
    bad = []
    rows = _profiles()
    for a, c, n, rate, amp in rows:
        p = leading_profile(a, c, n, ctx)
        if p.rate != rate or abs(float(p.amplitude) - amp) >= 1e-10:
            bad.append((a, c, n, p.rate, float(p.amplitude)))
    record(acceptance_report, 6, not bad, f"{len(rows)} profiles for c in 3,5,6,7,8,9,10 (mismatches {bad})")


def test_criterion_07_certificates(acceptance_report):
    ctx = PrecisionContext(192)
    t0 = time.perf_counter()
    c1 = certify(mao1_spec(), ctx)
    c3 = certify(mao3_spec(), ctx)
    rep = reproduce_table3(ctx)
    secs = time.perf_counter() - t0
    problems = []
    if not (c1.status == "proved" and c1.checked_range[0] <= 0 and c1.checked_range[1] >= 3823):
        problems.append(f"mao1 {c1.status} {c1.checked_range}")
    if not (c3.status == "proved" and c3.checked_range[0] <= 3 and c3.checked_range[1] >= 1190):
        problems.append(f"mao3 {c3.status} {c3.checked_range}")
    for c in rep.rows:
        s = c.spec
        stated_end = s.stated_start + s.stated_terms
        if c.status != "proved" or c.checked_range[0] > s.stated_start or c.checked_range[1] < stated_end:
            problems.append(f"{s.name} {c.status} {c.checked_range}")
        elif c.analytic_threshold > 10 * stated_end:
            problems.append(f"{s.name} threshold {c.analytic_threshold} outside the 10x band")
    inconclusive = []
    for c in rep.chains:
        s = c.spec
        lo, hi = c.checked_range
        if c.status == "failed" or hi < CHAIN_START + CHAIN_TERMS:
            problems.append(f"{s.name} {c.status} {c.checked_range}")
        elif lo > CHAIN_START:
            problems.append(f"{s.name} fails at m = {lo - 1}, holds only from m = {lo} (stated range starts at {CHAIN_START})")
        if c.status == "inconclusive":
            inconclusive.append(f"{s.name} ({c.note}; exact on {c.checked_range})")
    if secs >= 3600:
        problems.append(f"wall time {secs:.0f} s")
    detail = (
        f"mao1, mao3, {len(rep.rows)} table rows, {len(rep.chains)} chain links in {secs:.0f} s; "
        f"analytic part inconclusive for {inconclusive or 'none'}; problems {problems or 'none'}"
    )
    record(acceptance_report, 7, not problems, detail)


def test_criterion_08_identity_suite(acceptance_report):
    ctx = PrecisionContext(256)
    recs = identity_suite(ctx) + r2_transform_suite(ctx)
    bad = [r.name for r in recs if not r.passed]
    worst = max(r.max_residual for r in recs)
    record(acceptance_report, 8, not bad, f"{len(recs)} identity groups at 256 bits, failures {bad}; max residual {worst:.2e}")


def test_criterion_09_engine_invariants(acceptance_report, table500):
    t = table500
    p2 = p2_series(500)
    problems = []
    for n in range(501):
        row = t.row(n)
        if any(row.get(-m, 0) != v for m, v in row.items()):
            problems.append(f"symmetry at {n}")
        if sum(row.values()) != p2[n]:
            problems.append(f"conservation at {n}")
        if any(moment(ell, n, t) != 0 for ell in (1, 3, 5)):
            problems.append(f"odd moment at {n}")
    for n in range(1, 501, 5):
        if n2_mod(1, 5, n, t) != n2_mod(2, 5, n, t):
            problems.append(f"N2(1,5,{n}) != N2(2,5,{n})")
    for n in range(3, 501, 5):
        if n2_mod(0, 5, n, t) != n2_mod(2, 5, n, t):
            problems.append(f"N2(0,5,{n}) != N2(2,5,{n})")
    dp, lam = insertion_dp_table(200), lambert_oracle_table(200)
    if not (dp.agrees_with(lam, 200) and t.agrees_with(lam, 200)):
        problems.append("DP and Lambert oracle disagree below 200")
    record(acceptance_report, 9, not problems, f"symmetry, conservation, odd moments, equalities to 500, DP = Lambert to 200; problems {problems[:5] or 'none'}")


def test_criterion_10_arc_integral(acceptance_report):
    (rec,), checks = arc_integral_suite(PrecisionContext(128))
    detail = ", ".join(f"(k={c.k}, n={c.n}, r={c.r}) |E| = {c.error:.3g} <= {c.bound:.3g}" for c in checks)
    record(acceptance_report, 10, rec.passed, detail)
