"""Asymptotic expansion of the even rank moments ``N2_{2l}(n)``.

The expansion is a finite double sum over ``k <= floor(sqrt(n))`` with
``k != 2 (mod 4)``, Kloosterman-type weights :func:`a_k_sum`, the
``kappa(a,b,c)`` constants and half-order Bessel functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional

from .errors import DomainError
from .exact_engine import RankTable, moment, moment_at
from .modular_data import choose_inverse, h_tilde, xi_phase
from .special_functions import (
    PrecisionContext,
    bernoulli_poly,
    bessel_i_half,
    kappa,
    precision_for,
)


def _expjpi(mp, phase: Fraction):
    return mp.expjpi(mp.mpf(phase.numerator) / phase.denominator)


def a_k_sum(k: int, n: int, ctx: PrecisionContext):
    """The weight ``A_k(n)`` attached to denominator ``k``."""
    if k <= 0:
        raise DomainError("k must be positive")
    if k % 4 == 2:
        raise DomainError("A_k(n) is not defined for k = 2 (mod 4)")
    mp = ctx.mp
    total = mp.mpc(0)
    if k % 4 == 0:
        K = k // 4
        for h in range(k):
            if math.gcd(h, k) != 1:
                continue
            x = choose_inverse(h, k).value
            phase = Fraction(-2 * h * n, k) + xi_phase(h, x, K)
            total += h_tilde(h) * _expjpi(mp, phase % 2)
        return -1j * total
    for h in range(k):
        if math.gcd(h, k) != 1:
            continue
        y = choose_inverse(h, k).value
        phase = Fraction(-2 * h * n, k) - Fraction(y, 16 * k) + xi_phase(4 * h, y // 4, k)
        total += _expjpi(mp, phase % 2)
    return -total / mp.sinpi(mp.mpf(k) / 4)


@dataclass(frozen=True)
class MomentEstimate:
    ell: int
    n: int
    value: object  # mpmath complex
    rounded: int
    imag_residual: float


def _round_half_away(mp, x) -> int:
    # exact on mpf values; math.floor would round through a double
    r = int(mp.floor(abs(x) + mp.mpf(1) / 2))
    return r if x >= 0 else -r


def moment_estimate(ell: int, n: int, ctx: Optional[PrecisionContext] = None) -> MomentEstimate:
    """Evaluate the finite expansion for ``N2_{2 ell}(n)`` with ``N = floor(sqrt(n))``."""
    if ell < 1 or n < 1:
        raise DomainError("need ell >= 1 and n >= 1")
    ctx = ctx or precision_for(n)
    mp = ctx.mp
    N = math.isqrt(n)
    w = mp.mpf(8 * n - 1)
    sw = mp.sqrt(w)
    triples = [(a, b, ell - a - b) for a in range(ell + 1) for b in range(ell + 1 - a)]
    kap = {t: kappa(*t).evaluate(ctx) for t in triples}
    total = mp.mpc(0)
    for k in range(1, N + 1):  # ascending k for a deterministic reduction
        if k % 4 == 2:
            continue
        Ak = a_k_sum(k, n, ctx)
        if k % 4 == 0:
            x = mp.pi * sw / (2 * k)
            base, pref = k, 2 * mp.pi
        else:
            x = mp.pi * sw / (4 * k)
            base, pref = 2 * k, mp.pi / mp.sqrt(2)
        inner = mp.mpf(0)
        for a, b, c in triples:
            inner += (
                mp.mpf(base) ** a
                * w ** (mp.mpf(2 * a + 4 * c - 3) / 4)
                * kap[(a, b, c)]
                * bessel_i_half(2 * a + 4 * c - 3, x, ctx)
            )
        total += pref * Ak / k * inner
    re = total.real
    return MomentEstimate(ell, n, total, _round_half_away(mp, re), float(abs(total.imag)))


def moment_leading(ell: int, n: int, ctx: Optional[PrecisionContext] = None):
    """``(-1)^l sqrt(2) (8n)^{l-1} B_{2l}(1/2) exp(pi sqrt(n/2))``."""
    if ell < 1 or n < 1:
        raise DomainError("need ell >= 1 and n >= 1")
    ctx = ctx or precision_for(n)
    mp = ctx.mp
    b = bernoulli_poly(2 * ell, Fraction(1, 2))
    return (
        (-1) ** ell
        * mp.sqrt(2)
        * mp.mpf(8 * n) ** (ell - 1)
        * (mp.mpf(b.numerator) / b.denominator)
        * mp.exp(mp.pi * mp.sqrt(mp.mpf(n) / 2))
    )


@dataclass(frozen=True)
class MomentRow:
    ell: int
    n: int
    exact: int
    estimate: int
    leading_ratio: object
    estimate_ratio: object
    imag_residual: float


def moment_report(
    ells: Iterable[int],
    ns: Iterable[int],
    table: Optional[RankTable] = None,
    ctx: Optional[PrecisionContext] = None,
) -> List[MomentRow]:
    """Exact moments beside the leading term and the full expansion.

    Moments come from ``table`` when it covers ``n`` and from the series
    route otherwise.  Ratios are leading/exact and rounded-estimate/exact.
    """
    rows = []
    for ell in sorted(set(ells)):
        for n in sorted(set(ns)):
            c = ctx or precision_for(n)
            mp = c.mp
            if table is not None and n <= table.n_max:
                exact = moment(2 * ell, n, table)
            else:
                exact = moment_at(2 * ell, n)
            est = moment_estimate(ell, n, c)
            lead = moment_leading(ell, n, c)
            rows.append(
                MomentRow(
                    ell,
                    n,
                    exact,
                    est.rounded,
                    lead / exact,
                    mp.mpf(est.rounded) / exact,
                    est.imag_residual,
                )
            )
    return rows
