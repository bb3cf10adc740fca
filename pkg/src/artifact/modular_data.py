"""Farey arcs, inverse choices and the eta-multiplier roots of unity.

Phases are kept exact wherever possible: :class:`UnityRoot24` stores
``e^{pi i t / 24}`` by the integer ``t mod 48``, and :func:`xi_phase`
returns the rational ``phi`` with ``xi = e^{pi i phi}``.

The multipliers ``chi`` and ``nu`` are *defined* by evaluating both sides
of the eta transformation numerically and snapping to the nearest 48th
root of unity.  Knopp's closed form is exposed as :func:`nu_knopp` and is
checked against the snap on every call.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np

from .errors import DomainError, SnapError
from .special_functions import PrecisionContext, eta_fn

SNAP_TOLERANCE = 1e-6


# ---------------------------------------------------------------------------
# Farey arcs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FareyArc:
    h: int
    k: int
    theta_prime: Fraction
    theta_double_prime: Fraction


def _farey_sequence(N: int) -> List[Tuple[int, int]]:
    # standard next-term recurrence over [0, 1]
    a, b, c, d = 0, 1, 1, N
    seq = [(0, 1)]
    while c <= N:
        k = (N + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
        seq.append((a, b))
    return seq


def farey_arcs(N: int) -> List[FareyArc]:
    """Arcs for every reduced ``h/k`` in ``[0, 1)`` with ``k <= N``."""
    if N < 1:
        raise DomainError("N must be positive")
    seq = _farey_sequence(N)  # ends with 1/1
    arcs = []
    for i, (h, k) in enumerate(seq[:-1]):
        k1 = seq[i + 1][1]
        if i == 0:
            tp = Fraction(1, N + 1)
        else:
            tp = Fraction(1, k * (seq[i - 1][1] + k))
        arcs.append(FareyArc(h, k, tp, Fraction(1, k * (k1 + k))))
    return arcs


# ---------------------------------------------------------------------------
# inverses and residues
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InverseChoice:
    """The chosen representative ``[-h]`` for the pair ``(h, k)``.

    ``k`` odd: ``32 | value`` and ``-h value = 1 (mod k)``, so that
    ``value/4`` serves as ``[-4h]_k``.  ``k = 0 (mod 4)``:
    ``-h value = 1 (mod 4k)``.  ``k = 2 (mod 4)``: ``-2h value = 1 (mod k/2)``.
    """

    h: int
    k: int
    value: int

    @property
    def quarter(self) -> int:
        """``value / 4`` (the ``[-4h]_k`` role for odd ``k``)."""
        if self.k % 2 == 0:
            raise DomainError("quarter inverse is defined for odd k only")
        return self.value // 4


def _crt_smallest(residue: int, modulus: int, extra_mod: int) -> int:
    # smallest x >= 0 with x = residue (mod modulus) and x = 0 (mod extra_mod)
    for t in range(modulus):
        x = extra_mod * t
        if (x - residue) % modulus == 0:
            return x
    raise DomainError("no simultaneous solution")


def choose_inverse(h: int, k: int) -> InverseChoice:
    """Smallest nonnegative representative obeying the congruence class rules."""
    if k <= 0:
        raise DomainError("k must be positive")
    if math.gcd(h, k) != 1:
        raise DomainError(f"gcd({h}, {k}) != 1")
    if k % 2 == 1:
        target = (-pow(h, -1, k)) % k if k > 1 else 0
        return InverseChoice(h, k, _crt_smallest(target, k, 32))
    if k % 4 == 0:
        mod = 4 * k
        return InverseChoice(h, k, (-pow(h, -1, mod)) % mod)
    half = k // 2
    target = (-pow(2 * h, -1, half)) % half if half > 1 else 0
    return InverseChoice(h, k, target)


def inverse_mod(h: int, k: int) -> int:
    """Smallest nonnegative ``x`` with ``-h x = 1 (mod k)`` (no extra conditions)."""
    if k == 1:
        return 0
    return (-pow(h, -1, k)) % k


def h_tilde(h: int) -> int:
    """Representative of ``h mod 4`` in ``{-1, 0, 1, 2}``."""
    r = h % 4
    return -1 if r == 3 else r


# ---------------------------------------------------------------------------
# roots of unity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnityRoot24:
    """``e^{pi i t / 24}`` with ``t`` taken mod 48."""

    t: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", self.t % 48)

    def __mul__(self, other: "UnityRoot24") -> "UnityRoot24":
        return UnityRoot24(self.t + other.t)

    def __pow__(self, e: int) -> "UnityRoot24":
        return UnityRoot24(self.t * e)

    def inverse(self) -> "UnityRoot24":
        return UnityRoot24(-self.t)

    @property
    def phase(self) -> Fraction:
        """``phi`` in ``e^{pi i phi}``."""
        return Fraction(self.t, 24)

    def value(self, ctx: PrecisionContext | None = None):
        if ctx is None:
            return cmath.exp(1j * math.pi * self.t / 24)
        return ctx.mp.expjpi(ctx.mp.mpf(self.t) / 24)

    @classmethod
    def snap(cls, w: complex, what: str = "multiplier") -> "UnityRoot24":
        """Nearest ``e^{pi i t/24}`` to ``w``; raises if none is within tolerance."""
        if not math.isfinite(abs(w)) or abs(abs(w) - 1) > 1e-4:
            raise SnapError(f"{what}: |value| = {abs(w)} is not 1")
        ang = cmath.phase(w) * 24 / math.pi
        t = round(ang)
        if abs(ang - t) * math.pi / 24 > SNAP_TOLERANCE:
            raise SnapError(f"{what}: value {w} is not a 48th root of unity")
        return cls(t)


# ---------------------------------------------------------------------------
# numeric eta evaluation for snapping
# ---------------------------------------------------------------------------


def _eta_double(tau: complex) -> complex:
    """Double-precision ``eta`` for multiplier snapping (vectorised product)."""
    y = tau.imag
    if y <= 0:
        raise DomainError("eta needs Im(tau) > 0")
    terms = int(40.0 / (2 * math.pi * y)) + 8  # |q|^n below ~e^{-40}
    n = np.arange(1, terms + 1)
    qn = np.exp(2j * np.pi * tau * n)
    logs = np.log(1 - qn)
    return complex(np.exp(2j * np.pi * tau / 24 + logs.sum()))


def _eta_ratio(tau_left: complex, tau_right: complex, bits: int) -> complex:
    if bits <= 53:
        return _eta_double(tau_left) / _eta_double(tau_right)
    ctx = PrecisionContext(bits)
    return complex(eta_fn(tau_left, ctx) / eta_fn(tau_right, ctx))


def _principal_sqrt(w: complex) -> complex:
    return cmath.sqrt(w)  # branch cut on the negative axis: Re >= 0


_CHI_LOCK = threading.Lock()
_CHI_CACHE: Dict[Tuple[int, int, int, int], UnityRoot24] = {}


def chi(h: int, hinv: int | InverseChoice, k: int, bits: int = 53) -> UnityRoot24:
    """``chi(h, [-h]_k, k)`` defined by
    ``eta((h+iz)/k) = chi sqrt(i/z) eta(([-h]_k + i/z)/k)``, evaluated at ``z = 1``.
    """
    x = hinv.value if isinstance(hinv, InverseChoice) else int(hinv)
    if k <= 0 or math.gcd(h, k) != 1:
        raise DomainError(f"chi needs gcd(h,k)=1 and k>0, got ({h},{k})")
    if (-h * x - 1) % k:
        raise DomainError(f"{x} is not an inverse of -{h} mod {k}")
    # eta(tau + t) = e^{pi i t/12} eta(tau): reduce h, x mod k exactly and
    # evaluate numerically only on [0, k)
    h0, th = h % k, h // k
    x0, tx = x % k, x // k
    shift = UnityRoot24(2 * (th - tx))
    key = (h0, x0, k, bits)
    with _CHI_LOCK:
        hit = _CHI_CACHE.get(key)
    if hit is None:
        w = _eta_ratio(complex(h0, 1) / k, complex(x0, 1) / k, bits) / _principal_sqrt(1j)
        hit = UnityRoot24.snap(w, f"chi({h0},{x0},{k})")
        with _CHI_LOCK:
            _CHI_CACHE[key] = hit
    return hit * shift


def nu_numeric(A, bits: int = 53) -> UnityRoot24:
    """``nu(A)`` from ``eta(A tau) = nu(A) sqrt(gamma tau + delta) eta(tau)`` at one test point."""
    (al, be), (ga, de) = A
    if al * de - be * ga != 1:
        raise DomainError("matrix must have determinant 1")
    if ga > 0:
        tau = complex(-de, 1) / ga
    elif ga < 0:
        tau = complex(-de, -1) / ga
    else:
        tau = 1j
    image = (al * tau + be) / (ga * tau + de)
    w = _eta_ratio(image, tau, bits) / _principal_sqrt(ga * tau + de)
    return UnityRoot24.snap(w, f"nu({A})")


def jacobi_symbol(m: int, n: int) -> int:
    """Jacobi symbol ``(m/n)`` for odd ``n > 0``."""
    if n <= 0 or n % 2 == 0:
        raise DomainError("Jacobi symbol needs odd positive n")
    m %= n
    result = 1
    while m:
        while m % 2 == 0:
            m //= 2
            if n % 8 in (3, 5):
                result = -result
        m, n = n, m
        if m % 4 == 3 and n % 4 == 3:
            result = -result
        m %= n
    return result if n == 1 else 0


def generalized_legendre(m: int, n: int) -> int:
    """Symbol ``(m/n)`` for odd ``n`` of either sign.

    ``(m/n) = (m/|n|)``, negated when both ``m`` and ``n`` are negative;
    ``(0/+-1) = 1``.
    """
    if n % 2 == 0:
        raise DomainError("lower argument must be odd")
    s = jacobi_symbol(m, abs(n))
    if m < 0 and n < 0:
        s = -s
    return s


def nu_knopp_closed(A) -> UnityRoot24:
    """Knopp's closed form for ``nu(A)``, without the numeric cross-check."""
    (al, be), (ga, de) = A
    if al * de - be * ga != 1:
        raise DomainError("matrix must have determinant 1")
    if ga % 2:
        sym = generalized_legendre(de, abs(ga))
        e = (al + de) * ga - be * de * (ga * ga - 1) - 3 * ga
    else:
        sym = generalized_legendre(ga, de)
        e = (al + de) * ga - be * de * (ga * ga - 1) + 3 * de - 3 - 3 * ga * de
    return UnityRoot24(2 * e + (24 if sym == -1 else 0))


def nu_knopp(A, bits: int = 53) -> UnityRoot24:
    """Knopp's closed form, checked against :func:`nu_numeric`."""
    closed = nu_knopp_closed(A)
    numeric = nu_numeric(A, bits)
    if closed != numeric:
        raise SnapError(
            f"closed form nu{A} = e^(pi i {closed.t}/24) disagrees with numeric "
            f"e^(pi i {numeric.t}/24)"
        )
    return closed


# ---------------------------------------------------------------------------
# xi, xi^pm_l and alpha^pm
# ---------------------------------------------------------------------------


def xi_phase(h: int, x: int, k: int, bits: int = 53) -> Fraction:
    """Rational ``phi`` with ``xi(h, x, k) = e^{pi i phi}`` (reduced mod 2).

    ``xi = e^{pi i/4} chi^{-3} (-1)^{(h - ht)/4} exp(pi i ht/(8k) - pi i x (ht - h)^2/(16k))``.
    """
    ht = h_tilde(h)
    c = chi(h, x, k, bits)
    phi = (
        Fraction(1, 4)
        - 3 * c.phase
        + Fraction((h - ht) // 4)
        + Fraction(ht, 8 * k)
        - Fraction(x * (ht - h) ** 2, 16 * k)
    )
    return phi % 2


def xi(h: int, hinv: int | InverseChoice, k: int, ctx: PrecisionContext | None = None):
    """``xi(h, [-h]_k, k)``; a complex float, or an mpmath value when ``ctx`` is given."""
    x = hinv.value if isinstance(hinv, InverseChoice) else int(hinv)
    phi = xi_phase(h, x, k)
    if ctx is None:
        return cmath.exp(1j * math.pi * float(phi))
    return ctx.mp.expjpi(ctx.mp.mpf(phi.numerator) / phi.denominator)


def xi_pm_phase(ell: int, h: int, k: int, sign: int) -> Fraction:
    """Rational phase of ``xi^{sign}_ell(h, k)``."""
    ht = h_tilde(h)
    s = 1 if sign > 0 else -1
    phi = (
        Fraction(ell + 1)
        + Fraction(-h * (2 * ell + 1) ** 2, 4 * k)
        + s * Fraction((ht - h) * (2 * ell + 1), 4 * k)
        + Fraction(ht, 8 * k)
    )
    return phi % 2


def alpha_pm(ell: int, k: int, sign: int) -> Fraction:
    s = 1 if sign > 0 else -1
    return (Fraction(-ell) + Fraction(k - 1, 2) + s * Fraction(1, 4)) / k


def kernel_constants(ell: int, h: int, k: int, sign: int, ctx: PrecisionContext | None = None):
    """``(xi^{sign}_ell(h,k), alpha^{sign}(ell,k))``."""
    if not 0 <= ell < k:
        raise DomainError("need 0 <= ell < k")
    phi = xi_pm_phase(ell, h, k, sign)
    if ctx is None:
        val = cmath.exp(1j * math.pi * float(phi))
    else:
        val = ctx.mp.expjpi(ctx.mp.mpf(phi.numerator) / phi.denominator)
    return val, alpha_pm(ell, k, sign)


def chi_matrix(h: int, x: int, k: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """The matrix taking ``(x + i/z)/k`` to ``(h + iz)/k``."""
    return ((h, -(1 + h * x) // k), (k, -x))
