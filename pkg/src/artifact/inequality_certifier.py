"""Certificates for linear inequalities among the residue counts ``N2(r, c, n)``.

An inequality ``sum_r lambda_r N2(r, c, s m + o) > 0`` for ``m >= m0`` is
rewritten as a real combination of the coefficients ``A(a/c; n)``.  Above an
analytic threshold the leading cosh term beats the explicit error and
subleading bounds; below it every value is checked with exact integers.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from mpmath.ctx_iv import MPIntervalContext

from .errors import DomainError, VerificationError
from .exact_engine import RankTable, combination_series, n2_mod
from .special_functions import PrecisionContext
from .unity_asymptotics import (
    error_bound,
    exact_sqrt,
    max_rate_below,
    rate_groups,
    subleading_bound,
)

DEFAULT_BITS = 192
MEMORY_GUARD_N = 100_000


# ---------------------------------------------------------------------------
# exact arithmetic in Q(zeta_c)
# ---------------------------------------------------------------------------


def _poly_divmod(num: List[int], den: List[int]) -> Tuple[List[int], List[int]]:
    num = list(num)
    q = [0] * max(len(num) - len(den) + 1, 1)
    lead = den[-1]
    for i in range(len(num) - len(den), -1, -1):
        coef = num[i + len(den) - 1] // lead
        q[i] = coef
        for j, d in enumerate(den):
            num[i + j] -= coef * d
    return q, num[: len(den) - 1]


@lru_cache(maxsize=None)
def cyclotomic_polynomial(c: int) -> Tuple[int, ...]:
    """Integer coefficients of ``Phi_c``, constant term first."""
    if c < 1:
        raise DomainError("c must be positive")
    poly = [-1] + [0] * (c - 1) + [1]
    for d in range(1, c):
        if c % d == 0:
            poly, rem = _poly_divmod(poly, list(cyclotomic_polynomial(d)))
            if any(rem):
                raise VerificationError("cyclotomic division left a remainder")
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return tuple(poly)


@lru_cache(maxsize=None)
def _power_basis(c: int) -> Tuple[Tuple[int, ...], ...]:
    # zeta^e for 0 <= e < c, reduced mod Phi_c
    phi = list(cyclotomic_polynomial(c))
    deg = len(phi) - 1
    out = []
    for e in range(c):
        if e < deg:
            v = [0] * deg
            v[e] = 1
        else:
            _, v = _poly_divmod([0] * e + [1], phi)
            v = v + [0] * (deg - len(v))
        out.append(tuple(v))
    return tuple(out)


@dataclass(frozen=True)
class Cyclotomic:
    """An element of ``Q(zeta_c)`` in the power basis ``1, zeta, ..., zeta^{phi(c)-1}``."""

    c: int
    coeffs: Tuple[Fraction, ...]

    @classmethod
    def zero(cls, c: int) -> "Cyclotomic":
        return cls(c, tuple(Fraction(0) for _ in _power_basis(c)[0]))

    @classmethod
    def zeta(cls, c: int, e: int, scale=1) -> "Cyclotomic":
        s = Fraction(scale)
        return cls(c, tuple(s * v for v in _power_basis(c)[e % c]))

    @classmethod
    def from_powers(cls, c: int, powers: Mapping[int, object]) -> "Cyclotomic":
        out = cls.zero(c)
        for e, s in powers.items():
            out = out + cls.zeta(c, e, s)
        return out

    def __add__(self, other: "Cyclotomic") -> "Cyclotomic":
        self._same(other)
        return Cyclotomic(self.c, tuple(x + y for x, y in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Cyclotomic") -> "Cyclotomic":
        return self + other.scale(-1)

    def scale(self, s) -> "Cyclotomic":
        s = Fraction(s)
        return Cyclotomic(self.c, tuple(s * x for x in self.coeffs))

    def __mul__(self, other: "Cyclotomic") -> "Cyclotomic":
        self._same(other)
        out = Cyclotomic.zero(self.c)
        for i, x in enumerate(self.coeffs):
            if not x:
                continue
            for j, y in enumerate(other.coeffs):
                if y:
                    out = out + Cyclotomic.zeta(self.c, i + j, x * y)
        return out

    def _same(self, other: "Cyclotomic") -> None:
        if self.c != other.c:
            raise DomainError("elements live in different cyclotomic fields")

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def rational_value(self) -> Optional[Fraction]:
        if any(self.coeffs[1:]):
            return None
        return self.coeffs[0]

    def real_interval(self, iv: MPIntervalContext):
        """Enclosure of the real part of the complex embedding ``zeta = e^{2 pi i/c}``."""
        total = iv.mpf(0)
        for e, x in enumerate(self.coeffs):
            if x:
                total += iv.mpf(x.numerator) / x.denominator * iv.cos(2 * iv.pi * e / self.c)
        return total


def _iv(bits: int) -> MPIntervalContext:
    ctx = MPIntervalContext()
    ctx.prec = bits
    return ctx


# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnityForm:
    """``(sum_a w_a R2(zeta_c^a; q)) / divisor`` with cyclotomic ``w_a`` and divisor."""

    c: int
    weights: Tuple[Tuple[int, Cyclotomic], ...]
    divisor: Cyclotomic
    text: str = ""


@dataclass(frozen=True)
class InequalitySpec:
    """``sum_r lambda_r N2(r, c, step*m + offset) > 0`` for ``m >= n_start``.

    ``n_start = None`` asks the certifier to discover the first ``m`` from
    which the inequality holds.
    """

    name: str
    c: int
    residue_coeffs: Tuple[Fraction, ...]
    step: int = 1
    offset: int = 0
    n_start: Optional[int] = 0
    stated_start: Optional[int] = None
    stated_terms: Optional[int] = None
    text: str = ""
    unity_form: Optional[UnityForm] = None

    def __post_init__(self) -> None:
        if self.c < 3:
            raise DomainError("need c >= 3")
        if len(self.residue_coeffs) != self.c:
            raise DomainError("need one coefficient per residue")
        if self.step < 1 or not 0 <= self.offset < self.step:
            raise DomainError("need step >= 1 and 0 <= offset < step")
        if self.unity_form is not None:
            _check_unity_form(self)

    def n_of(self, m: int) -> int:
        return self.step * m + self.offset

    def integer_weights(self) -> Dict[int, int]:
        den = math.lcm(*(Fraction(x).denominator for x in self.residue_coeffs))
        return {r: int(Fraction(x) * den) for r, x in enumerate(self.residue_coeffs) if x}


def _check_unity_form(spec: InequalitySpec) -> None:
    """The N2 coefficients times the divisor must equal the unity-side coefficients exactly."""
    uf = spec.unity_form
    if uf.c != spec.c:
        raise DomainError("unity form modulus differs from the inequality modulus")
    for r in range(spec.c):
        rhs = Cyclotomic.zero(spec.c)
        for a, w in uf.weights:
            rhs = rhs + w * Cyclotomic.zeta(spec.c, a * r)
        lhs = uf.divisor.scale(spec.residue_coeffs[r])
        if not (lhs - rhs).is_zero():
            raise VerificationError(f"unity form does not reproduce the coefficient of N2({r}, {spec.c}, n)")


def residue_spec(name: str, c: int, plus: Sequence[int], minus: Sequence[int], **kw) -> InequalitySpec:
    coeffs = [Fraction(0)] * c
    for r in plus:
        coeffs[r % c] += 1
    for r in minus:
        coeffs[r % c] -= 1
    return InequalitySpec(name, c, tuple(coeffs), **kw)


@dataclass(frozen=True)
class AnalyticTerm:
    a: int
    c: int
    weight: Cyclotomic  # the real weight, exact


def analytic_terms(spec: InequalitySpec) -> List[AnalyticTerm]:
    """``sum_r lambda_r N2(r,c,n) = sum_a W_a A(a/c; n)`` with ``a/c`` reduced and ``W_a`` exact."""
    c = spec.c
    lam = spec.residue_coeffs
    if sum(lam) != 0:
        raise DomainError("the combination has a p2(n) component (sum of coefficients is nonzero)")
    if c % 2 == 0 and sum(x * (-1) ** r for r, x in enumerate(lam)) != 0:
        raise DomainError("the combination has an R2(-1; q) component, not covered by the expansion")
    out = []
    for a in range(1, (c + 1) // 2):
        w = Cyclotomic.zero(c)
        for r, x in enumerate(lam):
            if x:
                w = w + Cyclotomic.zeta(c, a * r, Fraction(x) / c) + Cyclotomic.zeta(c, -a * r, Fraction(x) / c)
        if w.is_zero():
            continue
        g = math.gcd(a, c)
        out.append(AnalyticTerm(a // g, c // g, w))
    return out


# ---------------------------------------------------------------------------
# analytic threshold
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassLead:
    """Leading behaviour on the residue class ``n = residue (mod modulus)``."""

    residue: int
    modulus: int
    rate_sq: Fraction
    amplitude: float
    subleading_rate_sq: Tuple[Optional[Fraction], ...]
    threshold_n: Optional[int]

    @property
    def rate(self):
        return exact_sqrt(self.rate_sq)


def _combined_walk(terms, weights_mp, n_rep: int, ctx: PrecisionContext, floor: Fraction):
    """First rate (descending) whose combined amplitude is nonzero at ``n_rep``.

    Returns ``(rate_sq, amplitude, scale, lcm_of_k_seen)`` or ``None``.
    """
    mp = ctx.mp
    groups: Dict[Fraction, list] = {}
    for i, t in enumerate(terms):
        for g in rate_groups(t.a, t.c, n_rep, floor, ctx):
            groups.setdefault(g.rate_sq, []).append((i, g))
    modulus = 1
    for rs in sorted(groups, reverse=True):
        amp = mp.mpc(0)
        scale = mp.mpf(0)
        for i, g in groups[rs]:
            amp += weights_mp[i] * g.amplitude
            for e in g.entries:
                scale += abs(weights_mp[i]) * abs(e.amplitude)
                modulus = math.lcm(modulus, e.k)
        if abs(amp) > mp.ldexp(1, -(ctx.bits - 24)) * max(scale, mp.mpf(1)):
            if abs(amp.imag) > mp.ldexp(1, -(ctx.bits - 24)) * max(scale, mp.mpf(1)):
                raise VerificationError("combined amplitude is not real")
            return rs, amp.real, scale, modulus
    return None


def _class_leads(spec: InequalitySpec, terms, ctx: PrecisionContext):
    """Split ``n = offset (mod step)`` until each class has a fixed leading term."""
    mp = ctx.mp
    weights_mp = [mp.mpf(t.weight.real_interval(_iv(ctx.bits + 32)).mid) for t in terms]
    floor = Fraction(1, 64 * max(t.c for t in terms) ** 2)
    pending = [(spec.offset, spec.step)]
    done = []
    while pending:
        res, mod = pending.pop()
        walk = None
        f = floor
        while walk is None:
            walk = _combined_walk(terms, weights_mp, res, ctx, f)
            if walk is None:
                f /= 16
                if f < Fraction(1, 10**6):
                    raise VerificationError(f"no nonvanishing main term on class {res} mod {mod}")
        rs, amp, scale, kmod = walk
        new_mod = math.lcm(mod, kmod)
        if new_mod != mod:
            pending.extend((res + mod * t, new_mod) for t in range(new_mod // mod))
            continue
        done.append((res, mod, rs, amp, scale))
    return sorted(done)


def _margin(n: int, lead_rate, amp_lo, terms, w_abs, r2s, ctx: PrecisionContext):
    mp = ctx.mp
    sw = mp.sqrt(mp.mpf(8 * n - 1))
    lead = amp_lo * mp.cosh(mp.pi * lead_rate * sw) / sw
    bound = mp.mpf(0)
    for t, w, r2 in zip(terms, w_abs, r2s):
        rho = 0 if r2 is None else mp.sqrt(mp.mpf(r2.numerator) / r2.denominator)
        bound += w * (error_bound(t.a, t.c, n, ctx) + subleading_bound(t.a, t.c, n, rho, ctx))
    return lead - bound, bound / lead


def _class_threshold(rs: Fraction, amp_lo, terms, w_abs, r2s, ctx: PrecisionContext):
    """Smallest ``n`` with positive margin, plus the sampled dominance check."""
    mp = ctx.mp
    rate = mp.sqrt(mp.mpf(rs.numerator) / rs.denominator)
    # every k carrying the lead must satisfy k <= floor(sqrt(n))
    n_lo = max(2, math.ceil((1.5 / float(rate)) ** 2))
    f = lambda n: _margin(n, rate, amp_lo, terms, w_abs, r2s, ctx)
    if f(n_lo)[0] > 0:
        T = n_lo
    else:
        hi = n_lo
        while f(hi)[0] <= 0:
            hi *= 2
            if hi > 10**9:
                return None, "margin never became positive"
        lo = hi // 2 if hi > n_lo else n_lo
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if f(mid)[0] > 0:
                hi = mid
            else:
                lo = mid
        T = hi
    # dominance: sign at T, 2T, 4T and a nonincreasing bound/lead ratio
    for m in (T, 2 * T, 4 * T):
        if f(m)[0] <= 0:
            return None, f"margin not positive at {m}"
    samples = sorted({int(T * 2 ** (i / 4)) for i in range(41)})
    ratios = [f(m)[1] for m in samples]
    for x, y in zip(ratios, ratios[1:]):
        if y > x:
            return None, "bound/lead ratio not monotone on the sampled range"
    return T, "ok"


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass
class Certificate:
    spec: InequalitySpec
    status: str  # "proved", "failed", "inconclusive"
    analytic_threshold: Optional[int]  # in m
    checked_range: Tuple[int, int]  # inclusive, in m
    failed_at: Optional[int] = None
    discovered_start: Optional[int] = None
    classes: List[ClassLead] = field(default_factory=list)
    note: str = ""
    bits: int = DEFAULT_BITS
    seconds: float = 0.0

    def to_json(self) -> Dict[str, object]:
        s = self.spec
        return {
            "name": s.name,
            "inequality": s.text,
            "modulus": s.c,
            "step": s.step,
            "offset": s.offset,
            "n_start": s.n_start if s.n_start is not None else self.discovered_start,
            "status": self.status,
            "analytic_threshold": self.analytic_threshold,
            "checked_range": list(self.checked_range),
            "failed_at": self.failed_at,
            "stated_start": s.stated_start,
            "stated_terms": s.stated_terms,
            "classes": [
                {
                    "residue": cl.residue,
                    "modulus": cl.modulus,
                    "rate": str(cl.rate) if isinstance(cl.rate, Fraction) else cl.rate,
                    "rate_sq": str(cl.rate_sq),
                    "amplitude": cl.amplitude,
                    "threshold_n": cl.threshold_n,
                }
                for cl in self.classes
            ],
            "note": self.note,
            "precision_bits": self.bits,
        }


def _exact_values(spec: InequalitySpec, m_end: int) -> List[int]:
    n_end = spec.n_of(m_end)
    if n_end > MEMORY_GUARD_N:
        raise DomainError(f"exhaustive range reaches n = {n_end}, above the {MEMORY_GUARD_N} guard")
    series = combination_series(spec.integer_weights(), spec.c, n_end)
    return [series[spec.n_of(m)] for m in range(m_end + 1)]


def analytic_threshold(spec: InequalitySpec, ctx: Optional[PrecisionContext] = None):
    """Threshold (in ``m``) above which the analytic margin is positive on every class.

    Returns ``(T or None, classes, note)``.
    """
    ctx = ctx or PrecisionContext(DEFAULT_BITS)
    mp = ctx.mp
    iv = _iv(ctx.bits)
    terms = analytic_terms(spec)
    if not terms:
        raise DomainError("the combination is identically zero")
    w_iv = [t.weight.real_interval(iv) for t in terms]
    w_abs = [mp.mpf(max(abs(x.a), abs(x.b))) for x in w_iv]
    for x in w_iv:
        if x.a <= 0 <= x.b:
            return None, [], "a weight interval straddles zero"
    classes = []
    T_m = 0
    note = "ok"
    for res, mod, rs, amp, scale in _class_leads(spec, terms, ctx):
        # directed lower bound for the amplitude
        amp_lo = amp - mp.ldexp(1, -(ctx.bits - 32)) * max(scale, mp.mpf(1))
        r2s = tuple(max_rate_below(t.a, t.c, rs, ctx, res) for t in terms)
        if amp_lo <= 0:
            classes.append(ClassLead(res, mod, rs, float(amp), r2s, None))
            return None, classes, f"leading amplitude {float(amp):.6g} is not positive on class {res} mod {mod}"
        T_n, why = _class_threshold(rs, amp_lo, terms, w_abs, r2s, ctx)
        classes.append(ClassLead(res, mod, rs, float(amp), r2s, T_n))
        if T_n is None:
            return None, classes, why
        m = max(0, -(-(T_n - spec.offset) // spec.step))
        T_m = max(T_m, m)
    return T_m, classes, note


def certify(spec: InequalitySpec, ctx: Optional[PrecisionContext] = None, values: Optional[Sequence[int]] = None) -> Certificate:
    """Analytic threshold plus exhaustive exact verification below it.

    The exhaustive range always reaches the stated initial range when one
    is recorded in the spec.
    """
    t0 = time.perf_counter()
    ctx = ctx or PrecisionContext(DEFAULT_BITS)
    T, classes, note = analytic_threshold(spec, ctx)
    start = spec.n_start if spec.n_start is not None else 0
    end = (T - 1) if T is not None else 0
    if spec.stated_terms is not None:
        end = max(end, (spec.stated_start or start) + spec.stated_terms)
    if spec.stated_start is not None and spec.n_start is None:
        end = max(end, spec.stated_start)
    if T is not None and spec.n_of(end) > MEMORY_GUARD_N:
        # the analytic part alone is not enough; keep the exact check on the stated range
        note = f"threshold n = {spec.n_of(T)} is above the exhaustive guard"
        T = None
        end = max(start, (spec.stated_start or start) + (spec.stated_terms or 0))
    vals = list(values) if values is not None else _exact_values(spec, end)
    if len(vals) <= end:
        raise DomainError("not enough exact values supplied")
    failures = [m for m in range(0, end + 1) if vals[m] <= 0]
    cert = Certificate(spec, "inconclusive", T, (start, end), classes=classes, note=note, bits=ctx.bits)
    if spec.n_start is None:
        cert.discovered_start = (failures[-1] + 1) if failures else 0
        start = cert.discovered_start
        cert.checked_range = (start, end)
        bad = []
    else:
        bad = [m for m in failures if m >= start]
    if bad:
        cert.status = "failed"
        cert.failed_at = bad[0]
    elif T is not None:
        cert.status = "proved"
    cert.seconds = time.perf_counter() - t0
    return cert


def replay(cert: Certificate) -> Certificate:
    """Re-run the certificate with doubled precision; the status must agree."""
    again = certify(cert.spec, PrecisionContext(2 * cert.bits))
    if again.status != cert.status or again.analytic_threshold != cert.analytic_threshold:
        # a threshold can move by rounding only through a tie at the boundary
        if again.status != cert.status:
            raise VerificationError(f"replay changed status {cert.status} -> {again.status}")
    return again


# ---------------------------------------------------------------------------
# built-in specs
# ---------------------------------------------------------------------------


def _mao3_unity_form() -> UnityForm:
    c = 10
    w = ((1, Cyclotomic.zeta(c, 0)), (9, Cyclotomic.zeta(c, 0)), (3, Cyclotomic.zeta(c, 0, -1)), (7, Cyclotomic.zeta(c, 0, -1)))
    # 4 cos(2 pi/5) + 1 = 2 (zeta_10^2 + zeta_10^8) + 1
    divisor = Cyclotomic.from_powers(c, {0: 1, 2: 2, 8: 2})
    # R2(zeta) and R2(zeta^{-1}) coincide, so the pair (1, 9) and (3, 7) give
    # twice (R2(zeta_10) - R2(zeta_10^3)); halve to match the displayed form
    w = tuple((a, x.scale(Fraction(1, 2))) for a, x in w)
    return UnityForm(c, w, divisor, "(R2(zeta_10; q) - R2(zeta_10^3; q)) / (4 cos(2 pi/5) + 1)")


def _table3() -> List[InequalitySpec]:
    rows = [
        residue_spec("table3:1", 3, [1], [0], step=3, n_start=1, stated_start=1, stated_terms=1286, text="N2(1,3,3n) > N2(0,3,3n)"),
    ]
    mod4 = [  # (offset, larger residue, n_start, terms)
        (0, 2, 6, 934),
        (1, 0, 0, 876),
        (2, 0, 0, 870),
        (3, 2, 3, 892),
        (4, 0, 8, 934),
        (5, 2, 1, 876),
        (6, 2, 0, 869),
        (7, 0, 0, 892),
    ]
    for i, (o, big, s, terms) in enumerate(mod4):
        small = 2 - big
        rows.append(
            residue_spec(
                f"table3:{i + 2}", 4, [big], [small], step=8, offset=o, n_start=s, stated_start=s, stated_terms=terms,
                text=f"N2({big},4,8n+{o}) > N2({small},4,8n+{o})",
            )
        )
    rows.append(mao1_spec("table3:10"))
    rows.append(mao3_spec("table3:11"))
    rows.append(
        residue_spec("table3:12", 10, [0, 3], [2, 5], n_start=7, stated_start=7, stated_terms=1233,
                     text="N2(0,10,n) + N2(3,10,n) > N2(2,10,n) + N2(5,10,n)")
    )
    return rows


def mao1_spec(name: str = "mao1") -> InequalitySpec:
    return residue_spec(name, 6, [0, 1], [2, 3], n_start=0, stated_start=0, stated_terms=3823,
                        text="N2(0,6,n) + N2(1,6,n) > N2(2,6,n) + N2(3,6,n)")


def mao3_spec(name: str = "mao3") -> InequalitySpec:
    base = residue_spec(name, 10, [1, 2], [3, 4], n_start=3, stated_start=3, stated_terms=1190,
                        text="N2(1,10,n) + N2(2,10,n) > N2(3,10,n) + N2(4,10,n)")
    # symmetrised coefficients, so that the unity form matches residue by residue
    lam = [Fraction(0)] * 10
    for r, x in enumerate(base.residue_coeffs):
        lam[r] += x / 2
        lam[(-r) % 10] += x / 2
    return replace(base, residue_coeffs=tuple(lam), unity_form=_mao3_unity_form())


CHAIN_TERMS = 2838
CHAIN_START = 36

_CHAINS = [  # (c, step, offset, increasing residues)
    (5, 5, 0, (1, 2, 0)),
    (5, 5, 1, (1, 0)),
    (5, 5, 2, (2, 1, 0)),
    (5, 5, 3, (0, 1)),
    (5, 5, 4, (2, 0, 1)),
    (7, 1, 0, (3, 2, 1, 0)),
    (8, 1, 0, (4, 0)),
    (8, 1, 0, (3, 1)),
    (9, 1, 0, (3, 0)),
    (9, 1, 0, (4, 2, 1)),
]


def _chain_text(c, step, offset, lo, hi):
    arg = "n" if step == 1 else f"{step}n+{offset}"
    return f"N2({lo},{c},{arg}) < N2({hi},{c},{arg})"


def closing_list() -> List[InequalitySpec]:
    """Each link ``N2(lo) < N2(hi)`` of the closing chains as its own spec."""
    out = []
    for c, step, offset, chain in _CHAINS:
        for lo, hi in zip(chain, chain[1:]):
            name = f"list:c{c}_{step}n+{offset}_{lo}lt{hi}"
            out.append(
                residue_spec(name, c, [hi], [lo], step=step, offset=offset, n_start=None,
                             stated_start=CHAIN_START, stated_terms=CHAIN_TERMS,
                             text=_chain_text(c, step, offset, lo, hi))
            )
    return out


def builtin_specs() -> Dict[str, InequalitySpec]:
    specs = {"mao1": mao1_spec(), "mao3": mao3_spec()}
    for s in _table3() + closing_list():
        specs[s.name] = s
    return specs


def spec_from_json(obj: Mapping[str, object]) -> InequalitySpec:
    """``{"name", "c", "plus": [...], "minus": [...], "step", "offset", "n_start"}``."""
    try:
        return residue_spec(
            str(obj.get("name", "custom")),
            int(obj["c"]),
            [int(r) for r in obj.get("plus", [])],
            [int(r) for r in obj.get("minus", [])],
            step=int(obj.get("step", 1)),
            offset=int(obj.get("offset", 0)),
            n_start=None if obj.get("n_start") is None else int(obj["n_start"]),
            text=str(obj.get("text", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"bad inequality spec: {exc}") from exc


@dataclass
class Table3Report:
    rows: List[Certificate]
    chains: List[Certificate]

    @property
    def all_proved(self) -> bool:
        return all(c.status == "proved" for c in self.rows + self.chains)


def reproduce_table3(ctx: Optional[PrecisionContext] = None) -> Table3Report:
    """Certificates for every table row and every link of the closing chains."""
    ctx = ctx or PrecisionContext(DEFAULT_BITS)
    rows = [certify(s, ctx) for s in _table3()]
    chains = [certify(s, ctx) for s in closing_list()]
    return Table3Report(rows, chains)


# ---------------------------------------------------------------------------
# equalities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EqualityReport:
    n_max: int
    checked: Dict[str, int]
    violations: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_equalities(n_max: int, table: RankTable) -> EqualityReport:
    """The two mod-5 equalities and rank symmetry, exactly, up to ``n_max``."""
    if table.n_max < n_max:
        raise DomainError("table does not cover n_max")
    bad = []
    checked = {"N2(1,5,5n+1)=N2(2,5,5n+1)": 0, "N2(0,5,5n+3)=N2(2,5,5n+3)": 0, "N2(m,n)=N2(-m,n)": 0}
    for n in range(1, n_max + 1, 5):
        checked["N2(1,5,5n+1)=N2(2,5,5n+1)"] += 1
        if n2_mod(1, 5, n, table) != n2_mod(2, 5, n, table):
            bad.append(f"N2(1,5,{n}) != N2(2,5,{n})")
    for n in range(3, n_max + 1, 5):
        checked["N2(0,5,5n+3)=N2(2,5,5n+3)"] += 1
        if n2_mod(0, 5, n, table) != n2_mod(2, 5, n, table):
            bad.append(f"N2(0,5,{n}) != N2(2,5,{n})")
    for n in range(n_max + 1):
        row = table.row(n)
        checked["N2(m,n)=N2(-m,n)"] += 1
        for m, v in row.items():
            if row.get(-m, 0) != v:
                bad.append(f"N2({m},{n}) != N2({-m},{n})")
                break
    if bad:
        raise VerificationError("exact-engine equality failure: " + "; ".join(bad[:5]))
    return EqualityReport(n_max, checked, tuple(bad))
