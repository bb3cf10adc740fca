"""Exact counts for the M2-rank of partitions without repeated odd parts.

A partition without repeated odd parts has M2-rank
``ceil(largest / 2) - (number of parts)``.  ``N2(m, n)`` counts those
partitions of ``n`` with rank ``m``.

Four independent routes are provided:

* :func:`build_rank_table` (main route).  For every fixed rank ``m`` the
  generating function of ``N2(m, n)`` is ``P2(q) * T_m(q)``, where
  ``P2 = (-q; q^2)_inf / (q^2; q^2)_inf`` and ``T_m`` is a sparse
  theta-type series (see :func:`rank_kernel_terms`).  Obtained by
  expanding the Lambert-type form of the two-variable generating function
  in powers of ``z``.
* :func:`lambert_oracle_table` expands
  ``sum_n q^{n^2} (-q; q^2)_n / ((z q^2; q^2)_n (z^-1 q^2; q^2)_n)``
  directly as a polynomial in ``q`` and ``z``.
* :func:`insertion_dp_table` inserts parts one size at a time while
  tracking the number of parts.
* :func:`enumerate_partitions` lists partitions for small ``n``.

For arguments too large for a full table, :func:`residue_series`,
:func:`combination_series` and :func:`moment_series` give residue-class
counts and moments to ``n`` in the tens of thousands.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple

import gmpy2
import numpy as np

from .errors import CacheError, DomainError, ResourceCapError, VerificationError

ENUMERATION_CAP = 60
TABLE_CAP = 6000
CACHE_HEADER = "M2RANK-TABLE v1"


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Non-increasing parts in which no odd value is repeated."""

    parts: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        parts = tuple(int(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        for i, p in enumerate(parts):
            if p <= 0:
                raise DomainError(f"parts must be positive, got {p}")
            if i and parts[i - 1] < p:
                raise DomainError("parts must be non-increasing")
            if i and p % 2 == 1 and parts[i - 1] == p:
                raise DomainError(f"odd part {p} is repeated")

    @property
    def size(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)


def m2_rank(p: Partition) -> int:
    """``ceil(largest/2) - #parts``; the empty partition has rank 0."""
    if not p.parts:
        return 0
    return (p.parts[0] + 1) // 2 - len(p.parts)


def _partitions_bounded(n: int, bound: int) -> Iterator[Tuple[int, ...]]:
    # parts <= bound, non-increasing; a part equal to an odd ``bound`` lowers
    # the bound for the rest because odd values may not repeat
    if n == 0:
        yield ()
        return
    for first in range(min(n, bound), 0, -1):
        nxt = first - 1 if first % 2 else first
        for rest in _partitions_bounded(n - first, nxt):
            yield (first,) + rest


def enumerate_partitions(n: int, cap: int = ENUMERATION_CAP) -> List[Partition]:
    """All partitions of ``n`` without repeated odd parts.

    The list is in reverse lexicographic order of the part tuples, which for
    ``n = 5`` gives ``(5), (4,1), (3,2), (2,2,1)``.  Enumeration is an
    oracle for small ``n`` only and refuses anything above ``cap``.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    if n > cap:
        raise ResourceCapError(f"enumeration refused for n={n} > cap={cap}", cap)
    return [Partition(t) for t in _partitions_bounded(n, n)]


# ---------------------------------------------------------------------------
# power series helpers
# ---------------------------------------------------------------------------


def _pentagonal(n_max: int, scale: int = 1) -> List[Tuple[int, int]]:
    """Nonzero terms ``(exponent, sign)`` of ``(q^s; q^s)_inf`` up to ``q^n_max``."""
    out = [(0, 1)]
    k = 1
    while True:
        e1 = scale * k * (3 * k - 1) // 2
        if e1 > n_max:
            break
        sign = -1 if k % 2 else 1
        out.append((e1, sign))
        e2 = scale * k * (3 * k + 1) // 2
        if e2 <= n_max:
            out.append((e2, sign))
        k += 1
    out.sort()
    return out


def _divide_sparse(num: List[int], den: List[Tuple[int, int]]) -> List[int]:
    # den has constant term 1; solve b * den = num by forward substitution
    tail = [(e, s) for e, s in den if e > 0]
    b = list(num)
    for n in range(len(b)):
        acc = b[n]
        for e, s in tail:
            if e > n:
                break
            acc -= s * b[n - e]
        b[n] = acc
    return b


def _multiply_sparse(a: List[int], sparse: List[Tuple[int, int]]) -> List[int]:
    out = [0] * len(a)
    for e, s in sparse:
        for n in range(e, len(a)):
            out[n] += s * a[n - e]
    return out


def partition_numbers(n_max: int) -> List[int]:
    """Ordinary partition numbers ``p(0..n_max)`` by the pentagonal recurrence."""
    one = [1] + [0] * n_max
    return _divide_sparse(one, _pentagonal(n_max))


def p2_series(n_max: int) -> List[int]:
    """``p2(0..n_max)``, the number of partitions without repeated odd parts.

    Uses ``P2 = (q^2;q^2) / ((q;q) (q^4;q^4))`` so that every step is a
    sparse (pentagonal) convolution or division.
    """
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    p = partition_numbers(n_max)
    s = _multiply_sparse(p, _pentagonal(n_max, 2))
    return _divide_sparse(s, _pentagonal(n_max, 4))


def rank_kernel_terms(m: int, n_max: int) -> List[Tuple[int, int]]:
    """Sparse terms of ``T_m`` with ``sum_n N2(m,n) q^n = P2(q) T_m(q)``.

    ``T_0 = 1 + 2 sum_{j>=1} (-1)^j q^{2j^2+j}`` and, for ``m >= 1``,
    ``T_m = sum_{j>=1} (-1)^{j+1} q^{2j^2+2jm-j} (1 - q^{2j})``.
    """
    m = abs(m)
    terms: List[Tuple[int, int]] = []
    j = 1
    if m == 0:
        terms.append((0, 1))
        while 2 * j * j + j <= n_max:
            terms.append((2 * j * j + j, 2 if j % 2 == 0 else -2))
            j += 1
        return terms
    while True:
        e = 2 * j * j + 2 * j * m - j
        if e > n_max:
            break
        s = 1 if j % 2 else -1
        terms.append((e, s))
        if e + 2 * j <= n_max:
            terms.append((e + 2 * j, -s))
        j += 1
    return terms


def _weighted_kernel(weight, n_max: int) -> List[int]:
    """Dense ``sum_m weight(m) T_m`` over all integers ``m`` (``weight`` even-aware)."""
    out = [0] * (n_max + 1)
    w0 = weight(0)
    if w0:
        for e, s in rank_kernel_terms(0, n_max):
            out[e] += w0 * s
    m = 1
    while 2 + 2 * m - 1 <= n_max:  # smallest exponent 2j^2+2jm-j at j=1
        wm = weight(m) + weight(-m)
        if wm:
            for e, s in rank_kernel_terms(m, n_max):
                out[e] += wm * s
        m += 1
    return out


def _pack(values: Sequence[int], width: int) -> int:
    return int.from_bytes(b"".join(v.to_bytes(width, "little") for v in values), "little")


def _kronecker_product(a: Sequence[int], b: Sequence[int], n_max: int) -> List[int]:
    """Truncated product of two nonnegative integer series by Kronecker packing."""
    if not any(a) or not any(b):
        return [0] * (n_max + 1)
    bits = max(x.bit_length() for x in a) + max(y.bit_length() for y in b)
    bits += (min(len(a), len(b))).bit_length() + 1
    width = (bits + 7) // 8
    # GMP's FFT multiplication; Python's Karatsuba is far slower at this size
    prod = int(gmpy2.mpz(_pack(a[: n_max + 1], width)) * gmpy2.mpz(_pack(b[: n_max + 1], width)))
    raw = prod.to_bytes((prod.bit_length() + 7) // 8, "little")
    return [int.from_bytes(raw[n * width:(n + 1) * width], "little") for n in range(n_max + 1)]


def series_product(a: Sequence[int], b: Sequence[int], n_max: int) -> List[int]:
    """Exact truncated product of integer series (signs allowed)."""
    a_pos = [x if x > 0 else 0 for x in a]
    a_neg = [-x if x < 0 else 0 for x in a]
    b_pos = [x if x > 0 else 0 for x in b]
    b_neg = [-x if x < 0 else 0 for x in b]
    pp = _kronecker_product(a_pos, b_pos, n_max)
    nn = _kronecker_product(a_neg, b_neg, n_max)
    pn = _kronecker_product(a_pos, b_neg, n_max)
    np_ = _kronecker_product(a_neg, b_pos, n_max)
    return [pp[i] + nn[i] - pn[i] - np_[i] for i in range(n_max + 1)]


# ---------------------------------------------------------------------------
# rank tables
# ---------------------------------------------------------------------------


class RankTable:
    """Immutable table of ``N2(m, n)`` for ``0 <= n <= n_max``.

    Only ``m >= 0`` is stored; negative ranks follow from ``N2(m,n) = N2(-m,n)``.
    """

    def __init__(self, n_max: int, nonneg: np.ndarray):
        self.n_max = int(n_max)
        self.width = nonneg.shape[1]
        nonneg.flags.writeable = False
        self._c = nonneg

    def count(self, n: int, m: int) -> int:
        self._check(n)
        m = abs(m)
        if m >= self.width:
            return 0
        return int(self._c[n, m])

    def row(self, n: int) -> Dict[int, int]:
        """Nonzero counts of row ``n`` keyed by rank (both signs)."""
        self._check(n)
        out: Dict[int, int] = {}
        for m in range(self.width - 1, -1, -1):
            v = int(self._c[n, m])
            if v:
                out[m] = v
                if m:
                    out[-m] = v
        return dict(sorted(out.items(), reverse=True))

    def row_nonneg(self, n: int) -> List[int]:
        self._check(n)
        return [int(x) for x in self._c[n, : (n + 1) // 2 + 1]]

    def p2(self, n: int) -> int:
        r = self.row_nonneg(n)
        return r[0] + 2 * sum(r[1:])

    def _check(self, n: int) -> None:
        if not 0 <= n <= self.n_max:
            raise DomainError(f"n={n} outside table range [0, {self.n_max}]")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RankTable):
            return NotImplemented
        top = min(self.n_max, other.n_max)
        return self.n_max == other.n_max and all(
            self.row_nonneg(n) == other.row_nonneg(n) for n in range(top + 1)
        )

    def agrees_with(self, other: "RankTable", n_top: int) -> bool:
        return all(self.row_nonneg(n) == other.row_nonneg(n) for n in range(n_top + 1))

    def __repr__(self) -> str:
        return f"RankTable(n_max={self.n_max})"


def _support_width(n_max: int) -> int:
    return (n_max + 1) // 2 + 1


def _check_support(arr: np.ndarray, n_max: int) -> None:
    for n in range(n_max + 1):
        hi = (n + 1) // 2
        if any(int(v) for v in arr[n, hi + 1:]):
            raise VerificationError(f"nonzero count beyond rank bound at n={n}")
        if any(int(v) < 0 for v in arr[n, : hi + 1]):
            raise VerificationError(f"negative count at n={n}")


def build_rank_table(n_max: int, cap: int = TABLE_CAP) -> RankTable:
    """Exact ``N2(m, n)`` table through the fixed-rank theta route."""
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    if n_max > cap:
        raise ResourceCapError(
            f"full table to n={n_max} exceeds cap {cap}; use residue_series", cap
        )
    p2 = np.array(p2_series(n_max), dtype=object)
    width = _support_width(n_max)
    arr = np.zeros((n_max + 1, width), dtype=object)
    for m in range(width):
        col = np.zeros(n_max + 1, dtype=object)
        for e, s in rank_kernel_terms(m, n_max):
            seg = p2[: n_max + 1 - e]
            if s == 1:
                col[e:] += seg
            elif s == -1:
                col[e:] -= seg
            else:
                col[e:] += s * seg
        arr[:, m] = col
    _check_support(arr, n_max)
    return RankTable(n_max, arr)


def lambert_oracle_table(n_max: int) -> RankTable:
    """Table from the direct two-variable expansion of the generating function.

    Every factor expands with nonnegative coefficients, so truncating the
    ``z``-degree at ``n_max`` (beyond the support bound) is lossless.
    """
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    z0 = n_max  # offset of z^0
    width = 2 * n_max + 1
    total = np.zeros((n_max + 1, width), dtype=object)
    j = 0
    while j * j <= n_max:
        term = np.zeros((n_max + 1, width), dtype=object)
        # q^{j^2} (-q; q^2)_j
        num = [0] * (n_max + 1)
        num[j * j] = 1
        for i in range(j):
            e = 2 * i + 1
            for d in range(n_max, e - 1, -1):
                num[d] += num[d - e]
        term[:, z0] = np.array(num, dtype=object)
        for i in range(1, j + 1):
            e = 2 * i
            # divide by (1 - z q^e) then by (1 - z^-1 q^e)
            for d in range(e, n_max + 1):
                term[d, 1:] += term[d - e, :-1]
            for d in range(e, n_max + 1):
                term[d, :-1] += term[d - e, 1:]
        total += term
        j += 1
    width_out = _support_width(n_max)
    arr = total[:, z0: z0 + width_out].copy()
    for n in range(n_max + 1):
        left = total[n, :z0][::-1]
        right = total[n, z0 + 1:]
        if list(left) != list(right):
            raise VerificationError(f"oracle expansion not symmetric at n={n}")
    if any(int(v) for v in total[:, z0 + width_out:].ravel()):
        raise VerificationError("oracle expansion exceeds the rank support bound")
    _check_support(arr, n_max)
    return RankTable(n_max, arr)


def insertion_dp_table(n_max: int, cap: int = 300) -> RankTable:
    """Table from inserting part sizes in increasing order.

    State ``g[n, k]`` counts partitions of ``n`` into ``k`` parts of size at
    most ``s``.  The partitions whose largest part is exactly ``s`` are
    ``g_s - g_{s-1}``; each contributes rank ``ceil(s/2) - k``.  Cost is cubic,
    so this route is a cross-check for small tables.
    """
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    if n_max > cap:
        raise ResourceCapError(f"insertion DP refused for n_max={n_max} > {cap}", cap)
    size = n_max + 1
    g = np.zeros((size, size), dtype=object)
    g[0, 0] = 1
    off = n_max  # column of rank 0 in the two-sided accumulator
    full = np.zeros((size, 2 * n_max + 1), dtype=object)
    full[0, off] = 1
    for s in range(1, n_max + 1):
        new = g.copy()
        if s % 2:
            new[s:, 1:] += g[:-s, :-1]
        else:
            for n in range(s, size):
                new[n, 1:] += new[n - s, :-1]
        fresh = new - g
        half = (s + 1) // 2
        for k in range(1, size):
            full[:, off + half - k] += fresh[:, k]
        g = new
    if any(list(full[n, :off][::-1]) != list(full[n, off + 1:]) for n in range(size)):
        raise VerificationError("insertion DP table is not rank-symmetric")
    arr = full[:, off: off + _support_width(n_max)].copy()
    _check_support(arr, n_max)
    return RankTable(n_max, arr)


def counts_from_enumeration(n: int) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for p in enumerate_partitions(n):
        r = m2_rank(p)
        out[r] = out.get(r, 0) + 1
    return dict(sorted(out.items(), reverse=True))


# ---------------------------------------------------------------------------
# derived statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CyclotomicCoefficient:
    """Residue counts ``(N2(0,c,n), ..., N2(c-1,c,n))`` for one ``n``."""

    c: int
    residue_counts: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.residue_counts) != self.c:
            raise DomainError("need exactly c residue counts")

    def evaluate(self, a: int, bits: int = 128):
        """``sum_r N2(r,c,n) cos(2 pi a r / c)`` as an mpmath real."""
        from .special_functions import PrecisionContext

        ctx = PrecisionContext(bits).mp
        total = ctx.mpf(0)
        for r, v in enumerate(self.residue_counts):
            if v:
                total += v * ctx.cospi(ctx.mpf(2 * a * r) / self.c)
        return total


def n2_mod(r: int, c: int, n: int, t: RankTable) -> int:
    """``N2(r, c, n)``: number of partitions of ``n`` with rank congruent to ``r`` mod ``c``."""
    if c <= 0:
        raise DomainError("c must be positive")
    t._check(n)
    r %= c
    row = t.row_nonneg(n)
    total = row[0] if r == 0 else 0
    for m in range(1, len(row)):
        if m % c == r:
            total += row[m]
        if (-m) % c == r:
            total += row[m]
    return total


def residue_vector(c: int, n: int, t: RankTable) -> CyclotomicCoefficient:
    return CyclotomicCoefficient(c, tuple(n2_mod(r, c, n, t) for r in range(c)))


def moment(ell: int, n: int, t: RankTable) -> int:
    """``N2_ell(n) = sum_m m^ell N2(m, n)``."""
    if ell < 0:
        raise DomainError("ell must be nonnegative")
    row = t.row_nonneg(n)
    if ell == 0:
        return row[0] + 2 * sum(row[1:])
    if ell % 2:
        return 0
    return 2 * sum(m**ell * v for m, v in enumerate(row) if m)


def coefficient_A(a: int, c: int, n: int, t: RankTable, bits: int = 128):
    """Coefficient of ``q^n`` in the rank generating function at ``zeta_c^a``.

    Returns the exact residue vector and its real value.
    """
    cc = residue_vector(c, n, t)
    return cc, cc.evaluate(a % c, bits)


# ---------------------------------------------------------------------------
# large-n series routes
# ---------------------------------------------------------------------------


def combination_series(weights: Mapping[int, int], c: int, n_max: int) -> List[int]:
    """``sum_r weights[r] * N2(r, c, n)`` for ``0 <= n <= n_max``.

    ``weights`` maps residues mod ``c`` to integer coefficients.
    """
    if c <= 0:
        raise DomainError("c must be positive")
    w = {int(r) % c: int(v) for r, v in weights.items()}
    kernel = _weighted_kernel(lambda m: w.get(m % c, 0), n_max)
    return series_product(p2_series(n_max), kernel, n_max)


def residue_series(c: int, n_max: int) -> List[List[int]]:
    """``[[N2(r, c, n) for n in 0..n_max] for r in 0..c-1]``."""
    p2 = p2_series(n_max)
    out = []
    for r in range(c):
        kernel = _weighted_kernel(lambda m, r=r: 1 if m % c == r else 0, n_max)
        out.append(series_product(p2, kernel, n_max))
    return out


def moment_series(ell: int, n_max: int) -> List[int]:
    """``N2_ell(n)`` for ``0 <= n <= n_max``."""
    if ell < 0:
        raise DomainError("ell must be nonnegative")
    if ell % 2:
        return [0] * (n_max + 1)
    if ell == 0:
        return p2_series(n_max)
    kernel = _weighted_kernel(lambda m: m**ell, n_max)
    return series_product(p2_series(n_max), kernel, n_max)


def moment_at(ell: int, n: int) -> int:
    """Single moment ``N2_ell(n)`` via one dot product (cheaper than a series)."""
    if ell % 2:
        return 0
    p2 = p2_series(n)
    kernel = _weighted_kernel((lambda m: m**ell) if ell else (lambda m: 1 if m == 0 else 0), n)
    if ell == 0:
        return p2[n]
    return sum(p2[n - e] * kernel[e] for e in range(n + 1) if kernel[e])


# ---------------------------------------------------------------------------
# cache files
# ---------------------------------------------------------------------------


def _table_body(t: RankTable) -> str:
    lines = []
    for n in range(t.n_max + 1):
        for m, v in enumerate(t.row_nonneg(n)):
            lines.append(f"{n},{m},{v}")
    return "\n".join(lines) + "\n"


def save_rank_table(t: RankTable, path: os.PathLike | str) -> Path:
    body = _table_body(t)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(f"{CACHE_HEADER} n_max={t.n_max} sha256={digest}\n" + body, encoding="utf-8")
    tmp.replace(path)
    return path


def load_rank_table(path: os.PathLike | str) -> RankTable:
    text = Path(path).read_text(encoding="utf-8")
    header, _, body = text.partition("\n")
    parts = header.split()
    if len(parts) != 4 or " ".join(parts[:2]) != CACHE_HEADER:
        raise CacheError(f"bad cache header: {header!r}")
    try:
        n_max = int(parts[2].removeprefix("n_max="))
        digest = parts[3].removeprefix("sha256=")
    except ValueError as exc:
        raise CacheError(f"bad cache header: {header!r}") from exc
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != digest:
        raise CacheError("cache checksum mismatch")
    arr = np.zeros((n_max + 1, _support_width(n_max)), dtype=object)
    for line in body.splitlines():
        n, m, v = (int(x) for x in line.split(","))
        arr[n, m] = v
    return RankTable(n_max, arr)


def cached_rank_table(n_max: int, cache_dir: os.PathLike | str | None) -> RankTable:
    """Load a table from ``cache_dir`` if valid and large enough, else rebuild it."""
    if cache_dir is None:
        return build_rank_table(n_max)
    path = Path(cache_dir) / f"m2rank_{n_max}.txt"
    if path.exists():
        try:
            t = load_rank_table(path)
            if t.n_max == n_max:
                return t
        except CacheError:
            pass
    t = build_rank_table(n_max)
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    save_rank_table(t, path)
    return t
