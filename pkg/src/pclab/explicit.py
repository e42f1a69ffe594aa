"""Explicit-formula engines connecting zeros and primes.

Truncated psi(x) reconstruction from zeros, Landau's prime-detecting sum,
Montgomery's two-sided weighted formula, Selberg's tapered weight Lambda_x
and his S(t) approximation, and the smoothed zeta'/zeta identity.

Zero tables store gamma > 0 only; sums over all complex zeros fold the
conjugate, either as 2 Re (psi reconstruction, where the terms pair up) or
by summing the +gamma and -gamma branches explicitly (Montgomery / smoothed
log-derivative, where a t-shift breaks the pairing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import PrimeTable, chebyshev_psi
from .errors import CoverageError, InvalidArgumentError, NearSingularityError, OutOfRangeError
from .summing import CHUNK
from .zeros import ZeroTable
from . import zeta as zeta_eval

TWO_PI = 2.0 * math.pi
LOG_2PI = math.log(TWO_PI)


@dataclass(frozen=True)
class ExplicitEvalReport:
    """Two-sided evaluation of an explicit formula at one point."""

    x: float
    t: float | None
    left: complex
    right: complex | None
    residual: float | None           # |left - right| when both sides exist
    zero_height: float
    prime_cutoff: float | None
    truncation_estimate: float


def a_weight(n: float, x: float):
    """Montgomery's weight a_n(x) = min((n/x)^(1/2), (x/n)^(3/2))."""
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 1) or x < 1:
        raise InvalidArgumentError("a_weight requires n >= 1 and x >= 1")
    out = np.minimum(np.sqrt(n_arr / x), (x / n_arr) ** 1.5)
    return float(out) if out.ndim == 0 else out


def _zero_sum_psi(x: float, table: ZeroTable, t_cap: float) -> float:
    """2 Re sum_{0 < gamma <= T} m x^(1/2 + i gamma) / (1/2 + i gamma)."""
    k = int(np.searchsorted(table.ordinates, t_cap, side="right"))
    g = table.ordinates[:k]
    m = table.multiplicities[:k].astype(float)
    lx = math.log(x)
    parts = []
    for i in range(0, len(g), CHUNK):
        gg = g[i:i + CHUNK]
        rho = 0.5 + 1j * gg
        terms = np.exp(1j * (gg * lx)) / rho
        parts.append(float(np.sum(terms.real * m[i:i + CHUNK])))
    return 2.0 * math.sqrt(x) * math.fsum(parts)


def psi_from_zeros(x: float, table: ZeroTable, t_cap: float,
                   ptable: PrimeTable | None = None) -> ExplicitEvalReport:
    """psi0(x) from the explicit formula truncated at zero height T.

    left  = x - sum_{|gamma|<=T} x^rho/rho - log 2pi - (1/2) log(1 - x^-2)
    right = sieved psi0(x) when a prime table is supplied.
    The truncation estimate is (x/T) log^2(xT) + log(x) min(1, x/(T ||x||)).
    """
    if x <= 1.0:
        raise InvalidArgumentError(f"x must be > 1, got {x}")
    if t_cap > table.t_max:
        raise CoverageError(f"T={t_cap} exceeds table coverage {table.t_max}")
    left = (x - _zero_sum_psi(x, table, t_cap) - LOG_2PI
            - 0.5 * math.log1p(-1.0 / (x * x)))
    dist = abs(x - round(x))
    spike = 1.0 if dist == 0.0 else min(1.0, x / (t_cap * dist))
    estimate = x / t_cap * math.log(x * t_cap) ** 2 + math.log(x) * spike
    right = residual = None
    if ptable is not None:
        if x > ptable.limit:
            raise OutOfRangeError(f"x={x} exceeds prime table limit {ptable.limit}")
        right = chebyshev_psi(x, ptable, midpoint=True)
        residual = abs(left - right)
    return ExplicitEvalReport(x=x, t=None, left=left, right=right, residual=residual,
                              zero_height=t_cap, prime_cutoff=None,
                              truncation_estimate=estimate)


def landau_detect(x: float, table: ZeroTable, t_cap: float) -> float:
    """Lambda-hat(x) = -(2 pi / T) Re sum_{0 < gamma <= T} m x^(1/2 + i gamma).

    Peaks of the detector over x sit at prime powers (Landau's formula);
    Lambda(x) := 0 for non-integer x, so the detector should be small there.
    """
    if x <= 1.0:
        raise InvalidArgumentError(f"x must be > 1, got {x}")
    if t_cap > table.t_max:
        raise CoverageError(f"T={t_cap} exceeds table coverage {table.t_max}")
    k = int(np.searchsorted(table.ordinates, t_cap, side="right"))
    g = table.ordinates[:k]
    m = table.multiplicities[:k].astype(float)
    lx = math.log(x)
    parts = [float(np.sum(np.cos(g[i:i + CHUNK] * lx) * m[i:i + CHUNK]))
             for i in range(0, len(g), CHUNK)]
    return -(TWO_PI / t_cap) * math.sqrt(x) * math.fsum(parts)


def landau_scan(xs: np.ndarray, table: ZeroTable, t_cap: float) -> np.ndarray:
    """Vectorized landau_detect over a grid of x values."""
    if t_cap > table.t_max:
        raise CoverageError(f"T={t_cap} exceeds table coverage {table.t_max}")
    k = int(np.searchsorted(table.ordinates, t_cap, side="right"))
    g = table.ordinates[:k]
    m = table.multiplicities[:k].astype(float)
    xs = np.asarray(xs, dtype=float)
    out = np.empty_like(xs)
    lx = np.log(xs)
    for j in range(len(xs)):
        parts = [float(np.sum(np.cos(g[i:i + CHUNK] * lx[j]) * m[i:i + CHUNK]))
                 for i in range(0, len(g), CHUNK)]
        out[j] = math.fsum(parts)
    return -(TWO_PI / t_cap) * np.sqrt(xs) * out


def montgomery_formula(x: float, t: float, ztable: ZeroTable, ptable: PrimeTable,
                       t_cap: float | None = None,
                       prime_cap: float | None = None) -> ExplicitEvalReport:
    """Montgomery's weighted explicit formula at (x, t).

    left  = 2 x^(1/2 - it) sum_gamma x^(i gamma) / (1 + (t - gamma)^2),
            both conjugate branches summed from the stored gamma > 0.
    right = -sum_n Lambda(n) a_n(x) n^(-it)
            + 2 x^(1 - it) / ((1/2 + it)(3/2 - it)) + x^(-1/2) log(|t| + 2),
    with the O(1) and O(x^-2/(|t|+2)) terms set to zero and their magnitudes
    folded into the truncation estimate.  The prime sum stops where
    a_n(x) Lambda(n) < 1e-12 or at the table limit, whichever is first; the
    beyond-table mass enters the estimate via the PNT bound 2.1 x^(3/2)/sqrt(L).
    """
    if x < 1.0:
        raise InvalidArgumentError(f"x must be >= 1, got {x}")
    t_cap = ztable.t_max if t_cap is None else t_cap
    if t_cap > ztable.t_max:
        raise CoverageError(f"T={t_cap} exceeds table coverage {ztable.t_max}")
    if t_cap < abs(t) + 50.0:
        raise CoverageError(
            f"zeros must cover |t| + 50 = {abs(t) + 50:.0f}, have {t_cap:.0f}")

    k = int(np.searchsorted(ztable.ordinates, t_cap, side="right"))
    g = ztable.ordinates[:k]
    m = ztable.multiplicities[:k].astype(float)
    lx = math.log(x)
    parts = []
    for i in range(0, len(g), CHUNK):
        gg = g[i:i + CHUNK]
        mm = m[i:i + CHUNK]
        osc = np.exp(1j * gg * lx)
        both = osc / (1.0 + (t - gg) ** 2) + np.conj(osc) / (1.0 + (t + gg) ** 2)
        parts.append(complex(np.sum(both * mm)))
    zero_sum = complex(sum(parts))
    left = 2.0 * x ** 0.5 * np.exp(-1j * t * lx) * zero_sum

    # prime cutoff: (x/n)^{3/2} log n < 1e-12 for n > x
    limit = float(ptable.limit) if prime_cap is None else min(float(prime_cap),
                                                              float(ptable.limit))
    guess = x * 1e8 ** (2.0 / 3.0)
    for _ in range(40):
        new = x * (1e12 * max(math.log(max(guess, 2.0)), 1.0)) ** (2.0 / 3.0)
        if abs(new - guess) < 0.5:
            break
        guess = new
    n_cut = min(limit, guess)
    qq = ptable.prime_powers(int(n_cut))
    qq = qq[qq >= 2]
    lam = ptable.lam[qq]
    qf = qq.astype(float)
    weights = lam * a_weight(qf, x)
    prime_sum = complex(np.sum(weights * np.exp(-1j * t * np.log(qf))))
    main = 2.0 * x * np.exp(-1j * t * lx) / ((0.5 + 1j * t) * (1.5 - 1j * t))
    right = -prime_sum + main + x ** -0.5 * math.log(abs(t) + 2.0)

    prime_tail = 2.1 * x ** 1.5 / math.sqrt(n_cut) if n_cut >= limit else 1e-12
    dist = max(t_cap - abs(t), 1.0)
    zero_tail = 2.0 * x ** 0.5 * 2.0 * 6.0 * math.log(t_cap) / dist
    estimate = (x ** -0.5 * 1.0 + prime_tail + zero_tail
                + x ** -2.0 / (abs(t) + 2.0))
    return ExplicitEvalReport(x=x, t=t, left=complex(left), right=complex(right),
                              residual=abs(complex(left) - complex(right)),
                              zero_height=t_cap, prime_cutoff=n_cut,
                              truncation_estimate=estimate)


# ---------------------------------------------------------------------------
# Selberg's tapered weight and S(t) approximation
# ---------------------------------------------------------------------------

def von_mangoldt(n: int) -> float:
    """Lambda(n) by trial division (standalone; no table needed)."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    if n == 1:
        return 0.0
    d = 2
    while d * d <= n:
        if n % d == 0:
            while n % d == 0:
                n //= d
            return math.log(d) if n == 1 else 0.0
        d += 1 if d == 2 else 2
    return math.log(n)


def lambda_x(n: int, x: float) -> float:
    """Selberg's taper: Lambda(n) up to x, times log(x^2/n)/log n on (x, x^2], 0 beyond."""
    if x <= 1.0:
        raise InvalidArgumentError(f"x must be > 1, got {x}")
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    if n <= x:
        return von_mangoldt(n)
    if n <= x * x:
        return von_mangoldt(n) * math.log(x * x / n) / math.log(n)
    return 0.0


def _selberg_weights(x: float, ptable: PrimeTable) -> tuple[np.ndarray, np.ndarray]:
    """(n, weight) for prime powers n < x^2, taper log(x^2/n)/log x on (x, x^2].

    This is the taper for which the smoothed log-derivative identity is exact
    (verified to quadrature level); `lambda_x` keeps the /log n variant.
    """
    hi = int(math.ceil(x * x)) - 1
    qq = ptable.prime_powers(hi)
    qq = qq[qq >= 2]
    qf = qq.astype(float)
    lam = ptable.lam[qq].copy()
    taper = qf > x
    lam[taper] *= np.log(x * x / qf[taper]) / math.log(x)
    return qf, lam


@dataclass(frozen=True)
class SelbergApproxResult:
    value: float                 # -(1/pi) sum_{n<x^2} Lambda_x(n) n^-sigma1 sin(t log n)/log n
    err_dirichlet: float         # |sum Lambda_x(n) n^(-sigma1 - it)| / log x
    err_logt: float              # log t / log x


def selberg_s_approx(t: float, x: float, ptable: PrimeTable) -> SelbergApproxResult:
    """Selberg's short-Dirichlet-series approximation to S(t).

    The main sum approximates pi S(t); dividing by pi makes the output
    directly comparable to the counted S(t).  The two dropped error terms
    are reported at their formula-level magnitudes.
    """
    if t < 2.0:
        raise InvalidArgumentError(f"t must be >= 2, got {t}")
    if not 4.0 <= x <= t * t:
        raise InvalidArgumentError(f"x must lie in [4, t^2] = [4, {t * t:.3g}], got {x}")
    if x * x > ptable.limit:
        raise OutOfRangeError(f"x^2 = {x * x:.0f} exceeds prime table limit {ptable.limit}")
    sigma1 = 0.5 + 1.0 / math.log(x)
    qf, lam = _selberg_weights(x, ptable)
    coeff = lam * qf ** (-sigma1)
    logq = np.log(qf)
    value = -float(np.sum(coeff * np.sin(t * logq) / logq)) / math.pi
    dir_mag = abs(complex(np.sum(coeff * np.exp(-1j * t * logq))))
    return SelbergApproxResult(value=value,
                               err_dirichlet=dir_mag / math.log(x),
                               err_logt=math.log(t) / math.log(x))


def selberg_s_curve(ts: np.ndarray, x: float, ptable: PrimeTable) -> np.ndarray:
    """Vectorized Selberg approximation over a grid of t (values only)."""
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 2.0):
        raise InvalidArgumentError("all t must be >= 2")
    if not 4.0 <= x <= float(np.min(ts)) ** 2:
        raise InvalidArgumentError("x must lie in [4, min(t)^2]")
    if x * x > ptable.limit:
        raise OutOfRangeError(f"x^2 = {x * x:.0f} exceeds prime table limit {ptable.limit}")
    sigma1 = 0.5 + 1.0 / math.log(x)
    qf, lam = _selberg_weights(x, ptable)
    weights = lam * qf ** (-sigma1) / np.log(qf)
    return -(np.sin(np.outer(ts, np.log(qf))) @ weights) / math.pi


# ---------------------------------------------------------------------------
# smoothed zeta'/zeta identity
# ---------------------------------------------------------------------------

def smoothed_logderiv_check(s: complex, x: float, ztable: ZeroTable,
                            ptable: PrimeTable, t_cap: float | None = None) -> ExplicitEvalReport:
    """Selberg's smoothed identity for zeta'/zeta(s) at smoothing length x.

    left  = zeta'/zeta(s) (Euler-Maclaurin quotient).
    right = -sum_{n<=x^2} Lambda_x(n) n^-s
            + (x^{2(1-s)} - x^{1-s}) / ((1-s)^2 log x)
            + (1/log x) sum_rho (x^{rho-s} - x^{2(rho-s)}) / (rho-s)^2
            + (1/log x) sum_{k>=1} (x^{-2k-s} - x^{-2(2k+s)}) / (2k+s)^2.
    """
    s = complex(s)
    if s.real < -1.0:
        raise InvalidArgumentError(f"sigma must be >= -1, got {s.real}")
    if abs(s - 1.0) < 1e-3:
        raise InvalidArgumentError("s too close to the pole at 1")
    if x <= 1.0:
        raise InvalidArgumentError(f"x must be > 1, got {x}")
    if x * x > ptable.limit:
        raise OutOfRangeError(f"x^2 = {x * x:.0f} exceeds prime table limit {ptable.limit}")
    t_cap = ztable.t_max if t_cap is None else t_cap
    if t_cap > ztable.t_max:
        raise CoverageError(f"T={t_cap} exceeds table coverage {ztable.t_max}")

    k = int(np.searchsorted(ztable.ordinates, t_cap, side="right"))
    g = ztable.ordinates[:k]
    m = ztable.multiplicities[:k].astype(float)
    rho_up = 0.5 + 1j * g
    dist = np.minimum(np.abs(rho_up - s), np.abs(np.conj(rho_up) - s))
    if len(dist) and float(dist.min()) < 1e-3:
        raise NearSingularityError(
            f"s={s} within {float(dist.min()):.2g} of a covered zero")

    lx = math.log(x)
    qf, lam = _selberg_weights(x, ptable)
    dirichlet = complex(np.sum(lam * qf ** (-s)))

    pole_term = (x ** (2.0 * (1.0 - s)) - x ** (1.0 - s)) / ((1.0 - s) ** 2 * lx)

    def branch(rho: np.ndarray, mult: np.ndarray) -> complex:
        d = rho - s
        return complex(np.sum(mult * (x ** d - x ** (2.0 * d)) / d ** 2))

    zero_sum = complex(0.0)
    for i in range(0, len(g), CHUNK):
        zero_sum += branch(rho_up[i:i + CHUNK], m[i:i + CHUNK])
        zero_sum += branch(np.conj(rho_up[i:i + CHUNK]), m[i:i + CHUNK])
    zero_sum /= lx

    trivial = complex(0.0)
    for k2 in range(1, 400):
        term = (x ** (-2 * k2 - s) - x ** (-2.0 * (2 * k2 + s))) / (2 * k2 + s) ** 2
        trivial += term
        if abs(term) < 1e-18:
            break
    trivial /= lx

    right = -dirichlet + pole_term + zero_sum + trivial
    left = zeta_eval.log_deriv_zeta(s, tol=1e-9)

    sig = s.real
    mag = max(x ** (0.5 - sig), x ** (2.0 * (0.5 - sig)))
    gap = max(t_cap - abs(s.imag), 1.0)
    estimate = 2.0 * mag * 6.0 * math.log(t_cap) / (lx * gap)
    return ExplicitEvalReport(x=x, t=s.imag, left=left, right=right,
                              residual=abs(left - right), zero_height=t_cap,
                              prime_cutoff=x * x, truncation_estimate=estimate)
