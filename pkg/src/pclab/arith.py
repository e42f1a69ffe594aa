"""Prime sieving, arithmetic functions, singular series, and prime second moments.

Everything here is exact integer/float arithmetic over a sieved table:
the von Mangoldt function Lambda(n), Chebyshev psi(x), Moebius mu(n), the
logarithmic integral li(x), the Hardy-Littlewood singular series S(k) with
the twin-prime constant C2, twin correlation sums, prime-gap scans, and
the second moments of psi over short intervals evaluated piecewise-exactly
between jump points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.special

from .errors import InvalidArgumentError, OutOfRangeError, ResourceLimitError
from .summing import chunked_sum

TWO_PI = 2.0 * math.pi

# bytes per sieved integer: spf (int32) + Lambda (float64) + cumulative psi (float64)
_BYTES_PER_N = 20
DEFAULT_MEM_CAP = 2 << 30
DEFAULT_SEGMENT = 1 << 22


@dataclass(frozen=True)
class PrimeTable:
    """Sieve-backed arithmetic functions on 2..limit.

    spf[n] is the smallest prime factor of n (spf[n] == n exactly for primes),
    lam[n] = Lambda(n), psi_cum[n] = psi(n) = sum_{m<=n} Lambda(m).
    Immutable after construction; safe for shared concurrent reads.
    """

    limit: int
    spf: np.ndarray
    lam: np.ndarray
    psi_cum: np.ndarray
    primes: np.ndarray

    def von_mangoldt(self, n: int) -> float:
        if not 1 <= n <= self.limit:
            raise OutOfRangeError(f"n={n} outside table range [1, {self.limit}]")
        return float(self.lam[n])

    def prime_count(self, x: float) -> int:
        """pi(x) = number of primes <= x."""
        if x > self.limit:
            raise OutOfRangeError(f"x={x} exceeds table limit {self.limit}")
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def prime_powers(self, hi: int | None = None) -> np.ndarray:
        """All n <= hi with Lambda(n) > 0, ascending."""
        hi = self.limit if hi is None else min(hi, self.limit)
        return np.flatnonzero(self.lam[: hi + 1] > 0.0)


def sieve_build(limit: int, segment_size: int = DEFAULT_SEGMENT,
                mem_cap_bytes: int = DEFAULT_MEM_CAP) -> PrimeTable:
    """Segmented smallest-prime-factor sieve up to `limit` (inclusive).

    Segments bound the marking working set; the result arrays are dense, so
    the memory estimate _BYTES_PER_N * limit is checked against the cap first.
    """
    if limit < 2:
        raise InvalidArgumentError(f"sieve limit must be >= 2, got {limit}")
    if limit > 10 ** 9:
        raise InvalidArgumentError(f"sieve limit capped at 1e9, got {limit}")
    estimate = _BYTES_PER_N * (limit + 1)
    if estimate > mem_cap_bytes:
        raise ResourceLimitError(
            f"sieve to {limit} needs ~{estimate / 2**20:.0f} MiB "
            f"(cap {mem_cap_bytes / 2**20:.0f} MiB)")

    root = math.isqrt(limit)
    base = _simple_primes(root)

    spf = np.zeros(limit + 1, dtype=np.int32)
    for lo in range(2, limit + 1, segment_size):
        hi = min(lo + segment_size, limit + 1)
        for p in base:
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start >= hi:
                continue
            idx = np.arange(start, hi, p)
            unset = spf[idx] == 0
            spf[idx[unset]] = p
    ns = np.arange(limit + 1, dtype=np.int64)
    prime_mask = (spf == 0) & (ns >= 2)
    spf[prime_mask] = ns[prime_mask]
    primes = ns[prime_mask]

    lam = np.zeros(limit + 1)
    lam[primes] = np.log(primes)
    for p in base:  # prime powers p^k <= limit only exist for p <= sqrt(limit)
        q = p * p
        logp = math.log(p)
        while q <= limit:
            lam[q] = logp
            q *= p
    psi_cum = np.cumsum(lam)
    return PrimeTable(limit=limit, spf=spf, lam=lam, psi_cum=psi_cum, primes=primes)


def _simple_primes(n: int) -> np.ndarray:
    if n < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if mask[p]:
            mask[p * p:: p] = False
    return np.flatnonzero(mask).astype(np.int64)


def chebyshev_psi(x: float, table: PrimeTable, midpoint: bool = False) -> float:
    """psi(x) = sum_{n<=x} Lambda(n); with midpoint=True, psi0 at integer jumps.

    psi0(x) = psi(x) - Lambda(x)/2 when x is exactly an integer prime power;
    non-integer x never hits a jump, so the flag is a no-op there.
    """
    if x <= 0:
        raise InvalidArgumentError(f"x must be positive, got {x}")
    if x > table.limit:
        raise OutOfRangeError(f"x={x} exceeds table limit {table.limit}")
    n = math.floor(x)
    if n < 2:
        return 0.0
    value = float(table.psi_cum[n])
    if midpoint and x == n:
        value -= 0.5 * float(table.lam[n])
    return value


def mobius(n: int, table: PrimeTable | None = None) -> int:
    """Moebius mu(n): mu(1) = 1, (-1)^m on squarefree products of m primes, else 0."""
    if n == 0:
        raise InvalidArgumentError("mu(0) is undefined")
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    if n == 1:
        return 1
    sign = 1
    if table is not None and n <= table.limit:
        spf = table.spf
        while n > 1:
            p = int(spf[n])
            n //= p
            if n % p == 0:
                return 0
            sign = -sign
        return sign
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            sign = -sign
        d += 1 if d == 2 else 2
    if n > 1:
        sign = -sign
    return sign


def log_integral(x: float) -> float:
    """li(x) = integral_2^x du/log u, via the exponential integral Ei."""
    if x < 2:
        raise InvalidArgumentError(f"li requires x >= 2, got {x}")
    return float(scipy.special.expi(math.log(x)) - scipy.special.expi(math.log(2.0)))


# ---------------------------------------------------------------------------
# singular series
# ---------------------------------------------------------------------------

@dataclass
class SingularSeriesTable:
    """Twin-prime constant C2 and cached singular-series values S(k)."""

    c2: float
    prime_cutoff: int
    _cache: dict[int, float] = field(default_factory=dict)


def _prime_tail_quadratic(prime_cutoff: int, n_primes_below: int) -> float:
    """sum_{p > P} 1/(p-1)^2 via the prime-density integral int_P^inf du/((u-1)^2 log u).

    Substituting u = P/s maps the integral onto the finite interval (0, 1];
    the leading correction for pi(P) - li(P) is added, leaving an error well
    below 1e-11 at P = 1e6.
    """
    p = float(prime_cutoff)

    def integrand(s: float) -> float:
        return p / ((p - s) ** 2 * math.log(p / s))

    tail, _ = scipy.integrate.quad(integrand, 0.0, 1.0, epsabs=1e-16, epsrel=1e-13)
    li_p = float(scipy.special.expi(math.log(p)) - scipy.special.expi(math.log(2.0)))
    f_p = 1.0 / ((p - 1.0) ** 2 * math.log(p))
    return tail + f_p * (li_p - n_primes_below)


def build_singular_series_table(prime_cutoff: int = 10 ** 6) -> SingularSeriesTable:
    """C2 = prod_{p>2} (1 - 1/(p-1)^2), truncated at prime_cutoff.

    The truncated log-product is completed with the tail sum_{p>P} 1/(p-1)^2
    estimated by the prime-density integral (with a pi(P) - li(P) correction),
    which is accurate to ~1e-11 at the default cutoff: >= 10 correct digits.
    """
    primes = _simple_primes(prime_cutoff)
    odd = primes[primes > 2].astype(float)
    log_prod = chunked_sum(np.log1p(-1.0 / (odd - 1.0) ** 2))
    tail = _prime_tail_quadratic(prime_cutoff, len(primes))
    return SingularSeriesTable(c2=math.exp(log_prod - tail), prime_cutoff=prime_cutoff)


_default_sstable: SingularSeriesTable | None = None


def default_singular_series_table() -> SingularSeriesTable:
    global _default_sstable
    if _default_sstable is None:
        _default_sstable = build_singular_series_table()
    return _default_sstable


def singular_series(k: int, table: SingularSeriesTable | None = None) -> float:
    """Hardy-Littlewood S(k): 0 for odd k, 2*C2*prod_{p|k, p>2} (p-1)/(p-2) for even k."""
    if k == 0:
        raise InvalidArgumentError("S(0) is undefined")
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if k % 2 == 1:
        return 0.0
    table = table if table is not None else default_singular_series_table()
    if k in table._cache:
        return table._cache[k]
    value = 2.0 * table.c2
    m = k
    while m % 2 == 0:
        m //= 2
    d = 3
    while d * d <= m:
        if m % d == 0:
            value *= (d - 1.0) / (d - 2.0)
            while m % d == 0:
                m //= d
        d += 2
    if m > 1:
        value *= (m - 1.0) / (m - 2.0)
    table._cache[k] = value
    return value


def singular_series_direct(k: int, prime_cutoff: int = 10 ** 6) -> float:
    """S(k) straight from its Euler product (slow cross-check route).

    local factor at odd p: 1 - 1/(p-1)^2 if p does not divide k, p/(p-1) if it does;
    the same density tail correction as C2 applies (all p | k lie below the cutoff).
    """
    if k == 0:
        raise InvalidArgumentError("S(0) is undefined")
    if k % 2 == 1:
        return 0.0
    primes = _simple_primes(prime_cutoff)
    odd = primes[primes > 2].astype(float)
    divides = (k % primes[primes > 2]) == 0
    factors = np.where(divides, odd / (odd - 1.0), 1.0 - 1.0 / (odd - 1.0) ** 2)
    log_prod = chunked_sum(np.log(factors))
    tail = _prime_tail_quadratic(prime_cutoff, len(primes))
    return 2.0 * math.exp(log_prod - tail)


# ---------------------------------------------------------------------------
# twin correlation sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwinSumResult:
    n: int
    k: int
    value: float                 # sum_{n<=N} Lambda(n) Lambda(n+k)
    model: float                 # S(k) * N
    ratio: float                 # value / model (nan for odd k where the model is 0)


def twin_sum(n: int, k: int, table: PrimeTable,
             sstable: SingularSeriesTable | None = None) -> TwinSumResult:
    """Exact correlation sum sum_{m<=n} Lambda(m) Lambda(m+k) with its S(k)*N ratio."""
    if n < 1 or k < 1:
        raise InvalidArgumentError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if n + k > table.limit:
        raise OutOfRangeError(f"n+k={n + k} exceeds table limit {table.limit}")
    lam = table.lam
    value = chunked_sum(lam[2:n + 1] * lam[2 + k:n + k + 1])
    model = singular_series(k, sstable) * n
    ratio = value / model if model > 0 else math.nan
    return TwinSumResult(n=n, k=k, value=value, model=model, ratio=ratio)


# ---------------------------------------------------------------------------
# second moments of primes in short intervals (piecewise-exact)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalMomentResult:
    value: float
    model: float
    ratio: float
    degenerate: bool             # windows too short to contain integers over most of [1, X]


def interval_second_moment(x_max: int, delta: float, table: PrimeTable) -> IntervalMomentResult:
    """I(X, delta) = int_1^X (psi((1+delta)x) - psi(x) - delta*x)^2 dx, exactly.

    The difference psi((1+delta)x) - psi(x) is a step function of x with jumps
    at prime powers q (down by Lambda(q)) and at q/(1+delta) (up by Lambda(q));
    between jumps the integrand is the quadratic (c - delta*x)^2, integrated in
    closed form, so the only rounding is float arithmetic.
    Model: (1/2) delta X^2 log(1/delta).
    """
    if not 0.0 < delta < 1.0:
        raise InvalidArgumentError(f"delta must be in (0, 1), got {delta}")
    if x_max < 2:
        raise InvalidArgumentError(f"X must be >= 2, got {x_max}")
    if (1.0 + delta) * x_max > table.limit:
        raise OutOfRangeError(
            f"(1+delta)*X = {(1 + delta) * x_max:.0f} exceeds table limit {table.limit}")

    qq = table.prime_powers(int(math.ceil((1.0 + delta) * x_max)) + 1).astype(float)
    lamq = table.lam[qq.astype(np.int64)]
    # c(x) jumps: -Lambda(q) at x = q, +Lambda(q) at x = q/(1+delta)
    down_pos, down_val = qq, -lamq
    up_pos, up_val = qq / (1.0 + delta), lamq
    positions = np.concatenate([down_pos, up_pos])
    deltas = np.concatenate([down_val, up_val])
    inside = (positions > 1.0) & (positions < float(x_max))
    positions, deltas = positions[inside], deltas[inside]
    order = np.argsort(positions, kind="stable")
    positions, deltas = positions[order], deltas[order]

    c0 = chebyshev_psi(1.0 + delta, table) - 0.0  # psi(1) = 0
    edges = np.concatenate([[1.0], positions, [float(x_max)]])
    c = np.concatenate([[c0], c0 + np.cumsum(deltas)])
    # int_a^b (c - delta x)^2 dx, with the difference factored to avoid
    # cancellation between nearly equal cubes on short segments
    lo, hi = edges[:-1], edges[1:]
    seg = (hi - lo) * (c * c - c * delta * (lo + hi)
                       + delta * delta * (lo * lo + lo * hi + hi * hi) / 3.0)
    value = chunked_sum(seg)
    model = 0.5 * delta * x_max ** 2 * math.log(1.0 / delta)
    return IntervalMomentResult(value=value, model=model, ratio=value / model,
                                degenerate=delta * x_max < 2.0)


def fixed_interval_second_moment(x_max: int, h: float, table: PrimeTable) -> IntervalMomentResult:
    """J(X, h) = int_1^X (psi(x+h) - psi(x) - h)^2 dx, exactly; model h X log(X/h)."""
    if h <= 0.0:
        raise InvalidArgumentError(f"h must be positive, got {h}")
    if x_max < 2:
        raise InvalidArgumentError(f"X must be >= 2, got {x_max}")
    if x_max + h > table.limit:
        raise OutOfRangeError(f"X+h = {x_max + h:.0f} exceeds table limit {table.limit}")

    qq = table.prime_powers(int(math.ceil(x_max + h)) + 1).astype(float)
    lamq = table.lam[qq.astype(np.int64)]
    positions = np.concatenate([qq, qq - h])
    deltas = np.concatenate([-lamq, lamq])
    inside = (positions > 1.0) & (positions < float(x_max))
    positions, deltas = positions[inside], deltas[inside]
    order = np.argsort(positions, kind="stable")
    positions, deltas = positions[order], deltas[order]

    c0 = chebyshev_psi(1.0 + h, table)
    edges = np.concatenate([[1.0], positions, [float(x_max)]])
    c = np.concatenate([[c0], c0 + np.cumsum(deltas)])
    seg = (c - h) ** 2 * (edges[1:] - edges[:-1])
    value = chunked_sum(seg)
    model = h * x_max * math.log(x_max / h)
    return IntervalMomentResult(value=value, model=model, ratio=value / model,
                                degenerate=h < 1.0)


# ---------------------------------------------------------------------------
# prime gap scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapRecord:
    p: int                       # gap start
    p_next: int
    gap: int
    ratio_sqrt_log2: float       # gap / (sqrt(p) log^2 p)
    ratio_sqrt_log: float        # gap / (sqrt(p) log p)
    ratio_log2: float            # gap / log^2 p   (Cramer ratio)


@dataclass(frozen=True)
class GapScanReport:
    records: list[GapRecord]     # record (maximal) gaps in increasing p
    max_ratio_sqrt_log2: float
    max_ratio_sqrt_log: float
    max_ratio_log2: float


def prime_gap_scan(table: PrimeTable) -> GapScanReport:
    """Scan consecutive prime gaps; report record gaps and global normalized maxima.

    The three normalizations mirror the conditional gap bounds
    sqrt(p) log^2 p, sqrt(p) log p, and log^2 p; ratios are reported,
    never asserted as theorems.  Ratios normalize by the gap's right
    endpoint (the asymptotic-bound reading; left-endpoint normalization
    blows up at p = 2, 3, 7 where the bounds are not meaningful anyway).
    """
    if table.limit < 100:
        raise InvalidArgumentError("gap scan needs a table with limit >= 100")
    p = table.primes[1:].astype(float)
    gaps = np.diff(table.primes).astype(float)
    logp = np.log(p)
    r1 = gaps / (np.sqrt(p) * logp ** 2)
    r2 = gaps / (np.sqrt(p) * logp)
    r3 = gaps / logp ** 2
    running = np.maximum.accumulate(gaps)
    is_record = gaps >= running  # first occurrence of each new maximum
    first = np.ones(len(gaps), dtype=bool)
    first[1:] = running[1:] > running[:-1]
    is_record &= first
    is_record[0] = True
    records = [GapRecord(int(table.primes[i]), int(table.primes[i + 1]), int(gaps[i]),
                         float(r1[i]), float(r2[i]), float(r3[i]))
               for i in np.flatnonzero(is_record)]
    return GapScanReport(records=records,
                         max_ratio_sqrt_log2=float(r1.max()),
                         max_ratio_sqrt_log=float(r2.max()),
                         max_ratio_log2=float(r3.max()))
