"""Main terms and explicit error bounds for the coefficients ``A(a/c; n)``.

``A(a/c; n)`` is the coefficient of ``q^n`` in ``R2(e^{2 pi i a/c}; q)``.  Its
main term is a finite sum of entries

    amplitude * cosh(pi * sqrt(r (8n - 1)) / k) / sqrt(8n - 1)

indexed by a denominator ``k <= floor(sqrt n)``, a kind and an inner index
``m``.  Entries are collected in a :class:`TermCatalog`.  Every gate and
every floor/fractional part is evaluated in exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import ArtifactError, DomainError, VerificationError
from .modular_data import choose_inverse, h_tilde, xi_phase
from .special_functions import PrecisionContext, precision_for

# ``True`` reads the floor inside the D-plain phase as floor(2ka/c), the
# reading used by the neighbouring terms; ``False`` keeps floor(2k/c).
DPLAIN_CONTEXTUAL_FLOOR = True

KINDS_ZERO_MOD_4 = ("D1", "D2", "D3", "D4", "D5", "Dminus", "Dplus", "C0")
KINDS_ODD = ("D6", "D7", "Dplain", "C1")
ALL_KINDS = KINDS_ZERO_MOD_4 + KINDS_ODD


class AmbiguityError(ArtifactError):
    """Top-rate amplitude too small to call zero or nonzero at this precision."""


class SingularityError(ArtifactError, ZeroDivisionError):
    """A csc/sin denominator vanished inside an exponential sum."""


# ---------------------------------------------------------------------------
# exact rational helpers
# ---------------------------------------------------------------------------


def _floor(x: Fraction) -> int:
    return math.floor(x)


def _frac(x: Fraction) -> Fraction:
    return x - math.floor(x)


def _ceil(x: Fraction) -> int:
    return math.ceil(x)


def _check_ac(a: int, c: int) -> None:
    if c <= 0:
        raise DomainError("c must be positive")
    if (2 * a) % c == 0:
        raise DomainError(f"c = {c} divides 2a = {2 * a}")


def _u_even(a: int, c: int, k: int) -> Fraction:
    """``{ka / 2c}`` for ``k = 0 (mod 4)``."""
    return _frac(Fraction(k * a, 2 * c))


def _u_odd(a: int, c: int, k: int) -> Fraction:
    """``{2ka / c}`` for odd ``k``."""
    return _frac(Fraction(2 * k * a, c))


def _class_check(j: int, k: int) -> None:
    if j in (1, 2, 3, 4, 5):
        if k % 4:
            raise DomainError(f"j = {j} needs k = 0 (mod 4), got k = {k}")
    elif j in (6, 7):
        if k % 2 == 0:
            raise DomainError(f"j = {j} needs odd k, got k = {k}")
    else:
        raise DomainError("j must be in 1..7")


def _r_formula(j: int, u: Fraction, m: int) -> Fraction:
    if j == 1:
        return 4 * u * u - 6 * u - 8 * m * u + Fraction(1, 4)
    if j == 2:
        return 4 * u * u + 2 * u - 8 * m * (1 - u) - Fraction(23, 4)
    if j == 3:
        return 4 * u * u - 2 * u - 8 * m * u + Fraction(1, 4)
    if j == 4:
        return 4 * u * u - 2 * u - 8 * m * u - Fraction(7, 4)
    if j == 5:
        return 4 * u * u + 6 * u - 8 * m * (1 - u) - Fraction(39, 4)
    if j == 6:
        return u * u / 4 - u / 4 - Fraction(m, 2) * u + Fraction(1, 16)
    return u * u / 4 + u / 4 - Fraction(m, 2) * (1 - u) - Fraction(7, 16)


def _m_formula(j: int, u: Fraction) -> int:
    if u == 0 or u == 1:
        raise DomainError("fractional part must lie strictly between 0 and 1")
    if j == 1:
        return _ceil((16 * u * u - 56 * u + 1) / (32 * u))
    if j == 2:
        return _ceil((16 * u * u + 40 * u - 55) / (32 * (1 - u)))
    if j == 3:
        return _ceil((16 * u * u - 40 * u + 1) / (32 * u))
    if j == 4:
        return _ceil((16 * u * u - 40 * u - 7) / (32 * u))
    if j == 5:
        return _ceil((16 * u * u + 56 * u - 71) / (32 * (1 - u)))
    if j == 6:
        return _ceil((4 * u * u - 12 * u + 1) / (8 * u))
    return _ceil((4 * u * u + 12 * u - 15) / (8 * (1 - u)))


def _u_for(j: int, a: int, c: int, k: int) -> Fraction:
    return _u_even(a, c, k) if j <= 5 else _u_odd(a, c, k)


def m_bound(j: int, a: int, c: int, k: int) -> int:
    """``M_j``; a negative value means the inner sum is empty."""
    _class_check(j, k)
    return _m_formula(j, _u_for(j, a, c, k))


def r_value(j: int, a: int, c: int, k: int, m: int) -> Fraction:
    """``r_{j,a,c,k}(m)`` exactly; positive whenever ``0 <= m <= M_j``."""
    _class_check(j, k)
    if m < 0:
        raise DomainError("m must be nonnegative")
    u = _u_for(j, a, c, k)
    r = _r_formula(j, u, m)
    if m <= _m_formula(j, u) and r <= 0:
        raise VerificationError(f"r_{j} = {r} <= 0 inside the summation range")
    return r


def b_bound(j: int, c: int) -> int:
    """``B_{j,c}``, bounding the number of summands behind ``M_j``.

    Negative ceilings are clamped to 0, as is the formula value at ``c = 24``
    for ``j = 5`` (it is nonpositive there).
    """
    if c < 3:
        raise DomainError("need c >= 3")
    F = Fraction
    if j == 1:
        v = _ceil(F(c * c - 24 * c + 16, 32 * c))
    elif j == 2:
        v = _ceil(F(c * c - 40 * c + 16, 32 * c))
    elif j == 3:
        v = 1 if c == 4 else _ceil(F(c * c - 8 * c + 16, 32 * c))
    elif j == 4:
        v = _ceil(F(c * c - 24 * c + 16, 32 * c * (c - 1)))
    elif j == 5:
        v = 0 if c < 24 else _ceil(F(c * c - 56 * c + 16, 32 * c))
    elif j == 6:
        v = _ceil(F(c * c - 4 * c + 4, 8 * c))
    elif j == 7:
        v = 0 if c < 12 else _ceil(F(c * c - 12 * c + 4, 8 * c))
    else:
        raise DomainError("j must be in 1..7")
    return max(v, 0)


# ---------------------------------------------------------------------------
# exponential sums
# ---------------------------------------------------------------------------


def _gate(kind: str, a: int, c: int, k: int) -> None:
    if kind not in ALL_KINDS:
        raise DomainError(f"unknown kind {kind!r}")
    if kind in KINDS_ZERO_MOD_4:
        if k % 4:
            raise DomainError(f"{kind} needs k = 0 (mod 4)")
        divisible = (k * a) % (2 * c) == 0
        if kind == "C0":
            if not divisible:
                raise DomainError("C0 needs 2c | ka")
            return
        if divisible:
            raise DomainError(f"{kind} needs 2c not dividing ka")
        u = _u_even(a, c, k)
        if kind == "Dminus" and not u > Fraction(3, 4):
            raise DomainError("Dminus needs {ka/2c} > 3/4")
        if kind == "Dplus" and not u > Fraction(1, 4):
            raise DomainError("Dplus needs {ka/2c} > 1/4")
        return
    if k % 2 == 0:
        raise DomainError(f"{kind} needs odd k")
    divisible = (2 * k * a) % c == 0
    if kind == "C1":
        if not divisible:
            raise DomainError("C1 needs c | 2ka")
        return
    if divisible:
        raise DomainError(f"{kind} needs c not dividing 2ka")
    if kind == "Dplain" and not _u_odd(a, c, k) > Fraction(1, 2):
        raise DomainError("Dplain needs {2ka/c} > 1/2")


def _units(k: int):
    return [h for h in range(k) if math.gcd(h, k) == 1]


def _e(mp, phi: Fraction):
    phi %= 2
    return mp.expjpi(mp.mpf(phi.numerator) / phi.denominator)


def exp_sum(kind: str, a: int, c: int, k: int, n: int, m: int, ctx: PrecisionContext):
    """The finite sum over ``0 <= h < k``, ``gcd(h, k) = 1`` attached to ``kind``.

    ``m`` is used by D1..D7 only.  ``Dminus``/``Dplus`` carry their ``±h~``.
    """
    _gate(kind, a, c, k)
    mp = ctx.mp
    total = mp.mpc(0)
    if kind in KINDS_ZERO_MOD_4:
        K = k // 4
        F = _floor(Fraction(k * a, 2 * c))
        for h in _units(k):
            X = choose_inverse(h, k).value
            ht = h_tilde(h)
            base = Fraction(-2 * n * h, k) + xi_phase(h, X, K)
            w = Fraction(4 * X, k)
            if kind == "C0":
                if (a * X) % c == 0:
                    raise SingularityError(f"csc(pi a [-h]/c) is singular at h = {h}, k = {k}")
                s = mp.sinpi(mp.mpf(a * X) / c)
                phi = base - Fraction(X * k * a * a, c * c)
                total += ht / s * _e(mp, phi)
                continue
            if kind == "D1":
                inner = -F * F - (2 * m + Fraction(3, 2)) * F
            elif kind == "D2":
                inner = -F * F + (2 * m + Fraction(1, 2)) * F + 2 * m + Fraction(3, 2)
            elif kind == "D3":
                inner = -F * F - (2 * m + Fraction(1, 2)) * F
            elif kind == "D4":
                inner = -F * F - (2 * m + Fraction(1, 2)) * F + Fraction(1, 2)
            elif kind == "D5":
                inner = -F * F + (2 * m + Fraction(3, 2)) * F + 2 * m + Fraction(5, 2)
            else:
                sg = 1 if kind == "Dplus" else -1
                inner = -F * F - F - sg * ht * (2 * F + 1) * Fraction(h - ht, 4) - Fraction(1, 4)
                phi = base + w * inner - sg * Fraction(ht * (2 * F + 1), k)
                total += sg * ht * _e(mp, phi)
                continue
            total += ht * _e(mp, base + w * inner)
        return total
    G = _floor(Fraction(2 * k * a, c))
    csc = 1 / mp.sinpi(mp.mpf(k) / 4)
    for h in _units(k):
        Y = choose_inverse(h, k).value
        base = Fraction(-2 * n * h, k) + xi_phase(4 * h, Y // 4, k)
        w = Fraction(Y, 4 * k)
        if kind == "D6":
            coef = mp.cospi(mp.mpf(G * k) / 2) * csc
            phi = base + w * (-G * G - (2 * m + 1) * G - Fraction(1, 4))
        elif kind == "D7":
            coef = mp.mpc(0, 1) ** (1 + k) * mp.sinpi(mp.mpf(G * k) / 2) * csc
            phi = base + w * (-G * G + (2 * m + 1) * G + Fraction(7, 4) + 2 * m)
        elif kind == "Dplain":
            coef = mp.sinpi(mp.mpf((2 * G + 1) * k) / 4)
            G2 = G if DPLAIN_CONTEXTUAL_FLOOR else _floor(Fraction(2 * k, c))
            phi = base + w * (-G * G - G2 - Fraction(1, 4))
        else:  # C1
            if (a * Y) % (2 * c) == 0:
                raise SingularityError(f"sin(pi a [-h]/2c) vanishes at h = {h}, k = {k}")
            num = mp.cospi(mp.mpf(a * (1 + h * Y)) / c)
            den = mp.sinpi(mp.mpf(k) / 4) * mp.sinpi(mp.mpf(a * Y) / (2 * c))
            coef = num / den
            phi = base - Fraction(k * a * a * Y, c * c) - Fraction(Y, 16 * k)
        total += coef * _e(mp, phi)
    return total


# ---------------------------------------------------------------------------
# the catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TermEntry:
    """One main-term entry ``amplitude * cosh(pi sqrt(r (8n-1)) / k) / sqrt(8n-1)``."""

    k: int
    kind: str
    m: int
    r: Fraction
    amplitude: object  # mpmath complex

    @property
    def rate_sq(self) -> Fraction:
        """Square of the normalised rate ``sqrt(r)/k``."""
        return self.r / (self.k * self.k)

    @property
    def rate(self):
        """``sqrt(r)/k`` as a Fraction when exact, else a float."""
        return exact_sqrt(self.rate_sq)


def exact_sqrt(x: Fraction):
    p, q = x.numerator, x.denominator
    sp, sq = math.isqrt(p), math.isqrt(q)
    if sp * sp == p and sq * sq == q:
        return Fraction(sp, sq)
    return math.sqrt(x)


@dataclass
class TermCatalog:
    a: int
    c: int
    n: int
    entries: List[TermEntry] = field(default_factory=list)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def by_rate(self) -> List[Tuple[Fraction, List[TermEntry]]]:
        """Entries grouped by exact ``rate_sq``, largest rate first."""
        groups: Dict[Fraction, List[TermEntry]] = {}
        for e in self.entries:
            groups.setdefault(e.rate_sq, []).append(e)
        return sorted(groups.items(), key=lambda kv: kv[0], reverse=True)


def _entries_for_k(a: int, c: int, k: int, n: int, ctx: PrecisionContext) -> List[TermEntry]:
    mp = ctx.mp
    s = mp.sinpi(mp.mpf(a) / c)
    rk = mp.sqrt(k)
    out: List[TermEntry] = []
    if k % 4 == 0:
        if (k * a) % (2 * c) == 0:
            sign = -1 if (k * a // (2 * c)) % 2 else 1
            amp = -4 * s * sign / rk * exp_sum("C0", a, c, k, n, 0, ctx)
            out.append(TermEntry(k, "C0", 0, Fraction(1, 4), amp))
            return out
        F = _floor(Fraction(k * a, 2 * c))
        u = _u_even(a, c, k)
        pre = mp.mpc(0, 8) * s * (-1 if F % 2 else 1) / rk
        for j in range(1, 6):
            for m in range(m_bound(j, a, c, k) + 1):
                amp = -pre * exp_sum(f"D{j}", a, c, k, n, m, ctx)
                out.append(TermEntry(k, f"D{j}", m, r_value(j, a, c, k, m), amp))
        if u > Fraction(3, 4):
            amp = pre * exp_sum("Dminus", a, c, k, n, 0, ctx)
            out.append(TermEntry(k, "Dminus", 0, 4 * (u - Fraction(3, 4)) ** 2, amp))
        if u > Fraction(1, 4):
            amp = pre * exp_sum("Dplus", a, c, k, n, 0, ctx)
            out.append(TermEntry(k, "Dplus", 0, 4 * (u - Fraction(1, 4)) ** 2, amp))
        return out
    if k % 2 == 0:
        return out  # k = 2 (mod 4) carries no main term
    if (2 * k * a) % c == 0:
        sign = -1 if (2 * k * a // c) % 2 else 1
        amp = mp.mpc(0, 2) * s * sign / rk * exp_sum("C1", a, c, k, n, 0, ctx)
        out.append(TermEntry(k, "C1", 0, Fraction(1, 16), amp))
        return out
    G = _floor(Fraction(2 * k * a, c))
    u = _u_odd(a, c, k)
    sg = -1 if G % 2 else 1
    for j in (6, 7):
        for m in range(m_bound(j, a, c, k) + 1):
            amp = -4 * s * sg / rk * exp_sum(f"D{j}", a, c, k, n, m, ctx)
            out.append(TermEntry(k, f"D{j}", m, r_value(j, a, c, k, m), amp))
    if u > Fraction(1, 2):
        amp = 8 * s * sg / rk * exp_sum("Dplain", a, c, k, n, 0, ctx)
        out.append(TermEntry(k, "Dplain", 0, (u - Fraction(1, 2)) ** 2 / 4, amp))
    return out


def build_catalog(a: int, c: int, n: int, k_max: int, ctx: PrecisionContext) -> TermCatalog:
    """All entries with ``1 <= k <= k_max``; amplitudes evaluated at ``n``."""
    _check_ac(a, c)
    cat = TermCatalog(a, c, n)
    for k in range(1, k_max + 1):  # ascending k, fixed assembly order
        cat.entries.extend(_entries_for_k(a, c, k, n, ctx))
    return cat


def catalog_value(cat: TermCatalog, n: int, ctx: PrecisionContext):
    mp = ctx.mp
    w = mp.mpf(8 * n - 1)
    sw = mp.sqrt(w)
    total = mp.mpc(0)
    scale = mp.mpf(0)
    for e in cat.entries:
        r = mp.mpf(e.r.numerator) / e.r.denominator
        t = e.amplitude * mp.cosh(mp.pi * mp.sqrt(r * w) / e.k) / sw
        total += t
        scale += abs(t)
    return total, scale


def main_estimate(a: int, c: int, n: int, ctx: Optional[PrecisionContext] = None):
    """Main term for ``A(a/c; n)`` and its catalog; ``N = floor(sqrt(n))``."""
    _check_ac(a, c)
    if n < 2:
        raise DomainError("need n >= 2")
    ctx = ctx or precision_for(n)
    cat = build_catalog(a, c, n, math.isqrt(n), ctx)
    total, scale = catalog_value(cat, n, ctx)
    mp = ctx.mp
    if abs(total.imag) > mp.ldexp(1, -(ctx.bits - 16)) * max(scale, mp.mpf(1)):
        raise VerificationError(f"main term has imaginary part {mp.nstr(total.imag, 5)}")
    return total.real, cat


# ---------------------------------------------------------------------------
# explicit bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorBoundParams:
    c: int
    c1: int
    a1: object
    a2: object
    a3: object
    a4: object
    B: Tuple[int, ...]


def error_params(c: int, ctx: PrecisionContext) -> ErrorBoundParams:
    mp = ctx.mp
    if c < 3:
        raise DomainError("need c >= 3")
    B = tuple(b_bound(j, c) for j in range(1, 8))
    B1, B2, B3, B4, B5, B6, B7 = B
    c1 = c // math.gcd(2, c)
    C = mp.mpf(c)
    C1 = mp.mpf(c1)
    s1 = mp.sinpi(1 / C)
    s2 = mp.sinpi(1 / (2 * C))
    g67 = 1 + B6 + B7
    g1245 = 1 + B1 + B2 + B4 + B5
    big = mp.mpf("2.9e15")
    a1 = 2350 * (C1 - 1) * g67 / C1 + 35050 * (C - 1) * g1245 / C + big * (C - 1) * (1 + B3) / C
    a2 = (
        1175 / s2
        + 17525 / s1
        + 4699 * (C1 - 1) * g67 / C1
        + 70099 * (C - 1) * g1245 / C
        + mp.mpf("5.8e15") * (C - 1) * (1 + B3) / C
    )
    a3 = (
        5116 / C
        + mp.mpf("1.2e5") / C1
        + big * (C - 1) / C
        + 89572 * (C1 - 1) / C1
        + 35052 * (C - 1) * (B1 + B2 + B4 + B5) / C
        + big * (C - 1) * B3 / C
        + 2351 * (C1 - 1) * (B6 + B7) / C1
        + 21035 / (C * s1)
        + 8654 / (C1 * s1)
        + 1176 / (C1 * s2)
        + 6345 * (C - 1) / (C * s2)
        + 22705 * (C - 1) / (C * (1 - mp.exp(-4 * mp.pi / C)))
        + 12253 * (C - 1) / (C * (1 - mp.exp(-mp.pi / C)))
        + 40655 * (C1 - 1) / (C1 * (1 - mp.exp(-mp.pi / (4 * C))))
    )
    a4 = (
        3663
        + 1596 / C
        + mp.mpf("1.7e6") / C1
        + 5173 * (C1 - 1) / C1
        + 7294 / s1
        + 4295 * (C - 1) / (C * s2)
        + mp.mpf("1.7e6") * (C1 - 1) / (C1 * s2)
    )
    return ErrorBoundParams(c, c1, a1, a2, a3, a4, B)


def error_bound(a: int, c: int, n: int, ctx: Optional[PrecisionContext] = None):
    """Explicit bound on ``|A(a/c; n) - main_estimate(a, c, n)|``."""
    _check_ac(a, c)
    if math.gcd(a, c) != 1:
        raise DomainError("the explicit bound assumes gcd(a, c) = 1")
    if n < 2:
        raise DomainError("need n >= 2")
    ctx = ctx or precision_for(n)
    mp = ctx.mp
    p = error_params(c, ctx)
    N = mp.mpf(n)
    s = abs(mp.sinpi(mp.mpf(a) / c))
    return s * (p.a1 * N ** mp.mpf(-0.75) + p.a2 * N ** mp.mpf(-0.25) + p.a3 * N ** mp.mpf(0.25) + p.a4 * mp.sqrt(N))


def _as_mp_rate(mp, rate):
    if isinstance(rate, Fraction):
        return mp.mpf(rate.numerator) / rate.denominator
    return mp.mpf(rate)


def subleading_bound(a: int, c: int, n: int, r2, ctx: Optional[PrecisionContext] = None):
    """Bound for every main-term contribution whose rate is at most ``r2``.

    ``r2`` is the normalised rate, i.e. the ``rho`` in ``cosh(pi rho sqrt(8n-1))``.
    """
    _check_ac(a, c)
    ctx = ctx or precision_for(n)
    mp = ctx.mp
    rho = _as_mp_rate(mp, r2)
    if rho < 0:
        raise DomainError("rate must be nonnegative")
    count = 5 + sum(b_bound(j, c) for j in range(1, 8))
    sw = mp.sqrt(mp.mpf(8 * n - 1))
    return 16 * count * (mp.sqrt(n) + 1) ** mp.mpf(1.5) * mp.cosh(mp.pi * rho * sw) / (3 * sw)


# ---------------------------------------------------------------------------
# leading profiles
# ---------------------------------------------------------------------------

MAX_SQRT_R = Fraction(3, 2)  # sqrt(r) <= 3/2 for every kind


@dataclass(frozen=True)
class RateGroup:
    rate_sq: Fraction
    amplitude: object  # mpmath real: sum of all amplitudes with this rate
    entries: Tuple[TermEntry, ...]

    @property
    def rate(self):
        return exact_sqrt(self.rate_sq)


def rate_groups(a: int, c: int, n: int, floor_rate_sq: Fraction, ctx: PrecisionContext) -> List[RateGroup]:
    """Every rate group with ``rate_sq >= floor_rate_sq``, complete in ``k``.

    Since ``sqrt(r) <= 3/2``, denominators ``k > 3/(2 sqrt(floor))`` cannot reach
    the floor, which fixes how far the catalog is built.
    """
    if floor_rate_sq <= 0:
        raise DomainError("floor must be positive")
    k_max = 1
    while Fraction(9, 4) / ((k_max + 1) ** 2) >= floor_rate_sq:
        k_max += 1
    cat = build_catalog(a, c, n, k_max, ctx)
    out = []
    for rs, group in cat.by_rate():
        if rs < floor_rate_sq:
            break
        amp = sum((e.amplitude for e in group), ctx.mp.mpc(0))
        out.append(RateGroup(rs, amp, tuple(group)))
    return out


def _is_zero(mp, value, scale, bits: int) -> bool:
    tiny = mp.ldexp(1, -(bits - 24)) * max(scale, mp.mpf(1))
    if abs(value) <= tiny:
        return True
    if abs(value) <= mp.ldexp(1, -(bits // 2)) * max(scale, mp.mpf(1)):
        raise AmbiguityError(f"amplitude {mp.nstr(abs(value), 5)} is neither clearly zero nor nonzero")
    return False


@dataclass(frozen=True)
class LeadingProfile:
    a: int
    c: int
    n: int
    rate_sq: Fraction
    amplitude: object
    next_rate_sq: Optional[Fraction]

    @property
    def rate(self):
        return exact_sqrt(self.rate_sq)


def leading_profile(a: int, c: int, n: int, ctx: Optional[PrecisionContext] = None) -> LeadingProfile:
    """Largest rate with nonvanishing total amplitude, for ``n`` in its residue class.

    The amplitudes depend on ``n`` only through ``n mod k`` for the ``k``
    involved, so any representative of the class can be passed.
    """
    _check_ac(a, c)
    ctx = ctx or PrecisionContext(192)
    mp = ctx.mp
    floor = Fraction(1, 64 * c * c)
    while True:
        groups = rate_groups(a, c, n, floor, ctx)
        lead = None
        for i, g in enumerate(groups):
            scale = sum((abs(e.amplitude) for e in g.entries), mp.mpf(0))
            if _is_zero(mp, g.amplitude, scale, ctx.bits):
                continue
            if abs(g.amplitude.imag) > mp.ldexp(1, -(ctx.bits - 24)) * max(scale, 1):
                raise VerificationError("leading amplitude is not real")
            lead = (g, [h for h in groups[i + 1 :]])
            break
        if lead is not None:
            g, rest = lead
            nxt = None
            for h in rest:
                scale = sum((abs(e.amplitude) for e in h.entries), mp.mpf(0))
                if not _is_zero(mp, h.amplitude, scale, ctx.bits):
                    nxt = h.rate_sq
                    break
            return LeadingProfile(a, c, n, g.rate_sq, g.amplitude.real, nxt)
        floor /= 4
        if floor < Fraction(1, 10**8):
            raise AmbiguityError("no nonvanishing rate found")


def max_rate_below(a: int, c: int, rate_sq: Fraction, ctx: PrecisionContext, n: int = 0) -> Optional[Fraction]:
    """Largest catalog rate strictly below ``rate_sq``, counting every entry.

    Entries are included whatever their amplitude, which keeps the bound
    built on it valid for all ``n``.
    """
    floor = rate_sq / 16
    while True:
        groups = rate_groups(a, c, n, floor, ctx)
        below = [g.rate_sq for g in groups if g.rate_sq < rate_sq]
        if below:
            return below[0]
        floor /= 16
        if floor < Fraction(1, 10**8):
            return None
