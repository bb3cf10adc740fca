"""High-precision kernels: Bernoulli polynomials, kappa constants, half-order
Bessel I, Dedekind eta and the error function.

All transcendental routines take an explicit :class:`PrecisionContext`;
nothing here reads or mutates mpmath's global precision.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict

from mpmath.ctx_mp import MPContext

from .errors import DomainError

_CTX_LOCK = threading.Lock()
_CTX_CACHE: Dict[int, MPContext] = {}


@dataclass(frozen=True)
class PrecisionContext:
    """Working binary precision, passed explicitly to every numeric routine."""

    bits: int = 128

    def __post_init__(self) -> None:
        if self.bits < 64:
            raise DomainError(f"precision must be at least 64 bits, got {self.bits}")

    @property
    def mp(self) -> MPContext:
        # one mpmath context per precision, never re-configured after creation
        with _CTX_LOCK:
            ctx = _CTX_CACHE.get(self.bits)
            if ctx is None:
                ctx = MPContext()
                ctx.prec = self.bits
                _CTX_CACHE[self.bits] = ctx
            return ctx

    @property
    def eps(self):
        return self.mp.ldexp(1, -self.bits)

    def doubled(self) -> "PrecisionContext":
        return PrecisionContext(2 * self.bits)


def precision_for(n: int, guard: int = 96) -> PrecisionContext:
    """Default working precision for a computation at argument scale ``n``."""
    n = max(int(n), 1)
    return PrecisionContext(math.ceil(math.pi * math.sqrt(8 * n) / math.log(2)) + guard)


# ---------------------------------------------------------------------------
# exact constants
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def bernoulli_number(n: int) -> Fraction:
    """``B_n`` from ``t/(e^t - 1)``, so ``B_1 = -1/2``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    if n == 0:
        return Fraction(1)
    if n > 1 and n % 2:
        return Fraction(0)
    # sum_{j<n+1} C(n+1, j) B_j = 0
    acc = Fraction(0)
    for j in range(n):
        acc += math.comb(n + 1, j) * bernoulli_number(j)
    return -acc / (n + 1)


def bernoulli_poly(n: int, x) -> Fraction:
    """``B_n(x)`` exactly, for rational ``x``."""
    if not 0 <= n <= 64:
        raise DomainError("bernoulli_poly supports 0 <= n <= 64")
    x = Fraction(x)
    return sum(
        (math.comb(n, j) * bernoulli_number(j) * x ** (n - j) for j in range(n + 1)),
        Fraction(0),
    )


@dataclass(frozen=True)
class PiScaledRational:
    """The exact number ``r * pi**(-a)``."""

    r: Fraction
    a: int

    def evaluate(self, ctx: PrecisionContext):
        mp = ctx.mp
        return mp.mpf(self.r.numerator) / self.r.denominator / mp.pi**self.a


@lru_cache(maxsize=None)
def kappa(a: int, b: int, c: int) -> PiScaledRational:
    """Expansion constant ``(-1)^{a+c} (2(a+b+c))! B_{2c}(1/2) / (a!(2b+1)!(2c)! pi^a 4^{a+b})``."""
    if min(a, b, c) < 0:
        raise DomainError("kappa needs nonnegative arguments")
    num = (-1) ** (a + c) * math.factorial(2 * (a + b + c)) * bernoulli_poly(2 * c, Fraction(1, 2))
    den = math.factorial(a) * math.factorial(2 * b + 1) * math.factorial(2 * c) * 4 ** (a + b)
    return PiScaledRational(Fraction(num) / den, a)


# ---------------------------------------------------------------------------
# Bessel I of half-integer order
# ---------------------------------------------------------------------------


def bessel_i_half(two_nu: int, x, ctx: PrecisionContext):
    """``I_{two_nu/2}(x)`` for odd ``two_nu`` and ``x > 0``.

    Starts from ``I_{-1/2} = sqrt(2/(pi x)) cosh x`` and
    ``I_{1/2} = sqrt(2/(pi x)) sinh x`` and walks the recurrence
    ``I_{nu-1} - I_{nu+1} = (2 nu / x) I_nu`` in either direction.
    """
    if two_nu % 2 == 0:
        raise DomainError("order must be a half-integer (odd two_nu)")
    mp = ctx.mp
    x = mp.mpf(x)
    if x <= 0:
        raise DomainError("bessel_i_half needs x > 0")
    pref = mp.sqrt(2 / (mp.pi * x))
    lo, hi = pref * mp.cosh(x), pref * mp.sinh(x)  # orders -1/2, 1/2
    if two_nu == -1:
        return lo
    if two_nu == 1:
        return hi
    if two_nu > 1:
        nu = Fraction(1, 2)
        while 2 * nu < two_nu:
            lo, hi = hi, lo - 2 * (mp.mpf(nu.numerator) / nu.denominator) / x * hi
            nu += 1
        return hi
    nu = Fraction(-1, 2)
    while 2 * nu > two_nu:
        lo, hi = hi + 2 * (mp.mpf(nu.numerator) / nu.denominator) / x * lo, lo
        nu -= 1
    return lo


def bessel_i_series(nu, x, ctx: PrecisionContext):
    """``I_nu(x)`` from its power series; a cross-check for small and moderate ``x``."""
    mp = ctx.mp
    nu = mp.mpf(nu)
    x = mp.mpf(x)
    half = x / 2
    term = half**nu / mp.gamma(nu + 1)
    total = term
    m = 0
    sq = half * half
    while True:
        m += 1
        term = term * sq / (m * (m + nu))
        total += term
        if m > x and abs(term) < ctx.eps * abs(total) * mp.mpf(2) ** -8:
            return total


# ---------------------------------------------------------------------------
# eta and erf
# ---------------------------------------------------------------------------


def eta_fn(tau, ctx: PrecisionContext):
    """Dedekind ``eta(tau) = q^{1/24} prod (1 - q^n)`` with ``q = e^{2 pi i tau}``."""
    mp = ctx.mp
    tau = mp.mpc(tau)
    if tau.imag <= 0:
        raise DomainError("eta needs Im(tau) > 0")
    q = mp.expjpi(2 * tau)
    cutoff = mp.ldexp(1, -ctx.bits - 16)
    prod = mp.mpc(1)
    qn = q
    while abs(qn) >= cutoff:
        prod *= 1 - qn
        qn *= q
    return mp.expjpi(tau / 12) * prod


def erf_fn(x, ctx: PrecisionContext):
    return ctx.mp.erf(ctx.mp.mpf(x))


def big_e(x, ctx: PrecisionContext):
    """``E(x) = erf(sqrt(pi) x)``."""
    mp = ctx.mp
    return mp.erf(mp.sqrt(mp.pi) * mp.mpf(x))


def beta_fn(x, ctx: PrecisionContext):
    """``beta(x) = int_x^inf t^{-1/2} e^{-pi t} dt = erfc(sqrt(pi x))`` for ``x >= 0``."""
    mp = ctx.mp
    x = mp.mpf(x)
    if x < 0:
        raise DomainError("beta is evaluated here only for x >= 0")
    return mp.erfc(mp.sqrt(mp.pi * x))


def beta_of_square(x, ctx: PrecisionContext):
    """``beta(x^2) = 1 - |E(x)|``, computed without cancellation."""
    mp = ctx.mp
    return mp.erfc(mp.sqrt(mp.pi) * abs(mp.mpf(x)))
