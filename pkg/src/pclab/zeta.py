"""Zeta-function evaluation and critical-line zero location.

Two evaluation engines:

* Euler-Maclaurin with a rigorous remainder bound (any s != 1 up to the
  desk height cap).  Used for zeta(s), zeta'/zeta(s), Hardy Z below
  moderate heights, and all zero refinement where the error budget matters.
* Riemann-Siegel main sum with the first two correction terms (C0 and
  C1 = -Psi'''(p)/(96 pi^2)), used only by the bulk zero-table builder at
  heights where its error (< ~6e-6 above t = 1500) is far below the
  spacing scale.

Zero location walks Rosser blocks between good Gram points: each block of
k Gram intervals carries exactly k zeros at desk heights, so sign changes
are hunted with progressive subdivision until the block count is exhausted,
then refined by vectorized bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special as sp
from numpy.polynomial import chebyshev as _cheb

from .errors import (BelowHeightError, HeightCapError, InvalidArgumentError,
                     MissedZeroError, NearSingularityError, PoleError)
from .zeros import ZeroTable

TWO_PI = 2.0 * math.pi
HEIGHT_CAP = 1.0e5          # |Im s| cap for direct evaluation
FIND_ZEROS_CAP = 1.0e4      # height cap for find_zeros (larger tables are ingested/built)
RS_CROSSOVER = 1500.0       # bulk Z: Euler-Maclaurin below, Riemann-Siegel above

# B_{2k}/(2k)! = (-1)^{k+1} 2 zeta(2k) / (2 pi)^{2k}
_BERN_FACT = [(-1.0) ** (k + 1) * 2.0 * float(sp.zeta(2 * k)) / TWO_PI ** (2 * k)
              for k in range(1, 32)]


@dataclass(frozen=True)
class ZetaEvaluation:
    s: complex
    value: complex
    method: str
    est_error: float


def _em_core(s: complex, n_cut: int, m_terms: int) -> tuple[complex, float]:
    """Euler-Maclaurin value and rigorous remainder bound (n_cut, m_terms fixed)."""
    n = np.arange(1, n_cut)
    total = complex(np.sum(n ** (-s)))
    total += n_cut ** (1.0 - s) / (s - 1.0)
    total += 0.5 * n_cut ** (-s)
    prod = s  # prod_{j=0}^{2k-2} (s+j), built incrementally
    for k in range(1, m_terms + 1):
        total += _BERN_FACT[k - 1] * prod * n_cut ** (-s - 2 * k + 1)
        prod = prod * (s + 2 * k - 1) * (s + 2 * k)
    k = m_terms + 1
    sigma = s.real
    # |R| <= |B_{2k}/(2k)! prod_{j<=2M}(s+j) N^{-s-2k+1}| * |s+2k-1|/(sigma+2k-1)
    bound = (abs(_BERN_FACT[k - 1]) * abs(prod) * n_cut ** (-sigma - 2 * k + 1)
             * abs(s + 2 * k - 1) / (sigma + 2 * k - 1))
    return total, bound


def _fp_error(s: complex, n_cut: int) -> float:
    """Rounding-error allowance for the main sum: phase error eps*|t|*log n per term."""
    t = abs(s.imag)
    return 8e-16 * (t + 2.0) * math.log(n_cut + 2.0) ** 1.5 + 1e-15


def _choose_em_params(s: complex, tol: float) -> tuple[int, int]:
    t = abs(s.imag)
    n_cut = max(24, int(0.62 * t) + 12)
    for _ in range(8):
        for m_terms in (10, 14, 18, 24, 30):
            if s.real + 2 * m_terms + 1 <= 1.0:
                continue
            _, bound = _em_core(s, n_cut, m_terms)
            if bound <= 0.5 * tol:
                return n_cut, m_terms
        n_cut = int(n_cut * 1.6) + 8
    raise HeightCapError(f"Euler-Maclaurin bound not met for s={s} at tol={tol}")


def zeta(s: complex, tol: float = 1e-12) -> ZetaEvaluation:
    """zeta(s) by Euler-Maclaurin with remainder below tol.

    Raises PoleError at s = 1, HeightCapError when |Im s| exceeds the desk
    cap or floating-point accumulation makes tol unachievable at that height.
    """
    s = complex(s)
    if tol < 1e-12:
        raise InvalidArgumentError(f"tol must be >= 1e-12, got {tol}")
    if s == 1.0:
        raise PoleError("zeta has a simple pole at s = 1")
    if abs(s.imag) > HEIGHT_CAP:
        raise HeightCapError(f"|Im s| = {abs(s.imag)} exceeds height cap {HEIGHT_CAP}")
    n_cut, m_terms = _choose_em_params(s, tol)
    value, bound = _em_core(s, n_cut, m_terms)
    err = bound + _fp_error(s, n_cut)
    if err > tol:
        raise HeightCapError(
            f"tolerance {tol} unachievable at height {abs(s.imag):.3g} "
            f"(float accumulation ~{err:.2g})")
    return ZetaEvaluation(s=s, value=value, method=f"euler-maclaurin(N={n_cut},M={m_terms})",
                          est_error=err)


def _em_deriv(s: complex, n_cut: int, m_terms: int) -> complex:
    """d/ds of the Euler-Maclaurin formula, term by term."""
    n = np.arange(2, n_cut)
    logn = np.log(n)
    total = complex(-np.sum(logn * n ** (-s)))
    ln = math.log(n_cut)
    total += -ln * n_cut ** (1.0 - s) / (s - 1.0) - n_cut ** (1.0 - s) / (s - 1.0) ** 2
    total += -0.5 * ln * n_cut ** (-s)
    prod = s
    dprod = complex(1.0)
    for k in range(1, m_terms + 1):
        npow = n_cut ** (-s - 2 * k + 1)
        total += _BERN_FACT[k - 1] * (dprod - ln * prod) * npow
        dprod = (dprod * (s + 2 * k - 1) * (s + 2 * k)
                 + prod * ((s + 2 * k) + (s + 2 * k - 1)))
        prod = prod * (s + 2 * k - 1) * (s + 2 * k)
    return total


def zeta_deriv(s: complex, tol: float = 1e-10) -> ZetaEvaluation:
    """zeta'(s) by differentiated Euler-Maclaurin; error estimate scales the zeta bound."""
    s = complex(s)
    if s == 1.0:
        raise PoleError("zeta' has a pole at s = 1")
    if abs(s.imag) > HEIGHT_CAP:
        raise HeightCapError(f"|Im s| = {abs(s.imag)} exceeds height cap {HEIGHT_CAP}")
    n_cut, m_terms = _choose_em_params(s, max(tol / 8.0, 1e-12))
    value = _em_deriv(s, n_cut, m_terms)
    _, bound = _em_core(s, n_cut, m_terms)
    err = bound * (math.log(n_cut) + 3.0) + _fp_error(s, n_cut) * (math.log(n_cut) + 3.0)
    return ZetaEvaluation(s=s, value=value, method=f"euler-maclaurin-d(N={n_cut},M={m_terms})",
                          est_error=err)


def log_deriv_zeta(s: complex, tol: float = 1e-10) -> complex:
    """zeta'/zeta(s) via the quotient of Euler-Maclaurin evaluations.

    Near a zero of zeta the quotient blows up; the estimated distance
    |zeta(s)/zeta'(s)| below 1e-6 raises NearSingularityError.
    """
    s = complex(s)
    z = zeta(s, max(tol, 1e-12))
    d = zeta_deriv(s, tol)
    if d.value != 0 and abs(z.value / d.value) < 1e-6:
        raise NearSingularityError(f"s={s} is within ~1e-6 of a zeta zero")
    if abs(z.value) < 1e-100:
        raise NearSingularityError(f"zeta({s}) vanishes to double precision")
    return d.value / z.value


def log_deriv_zeta_series(s: complex, n_terms: int = 1 << 20) -> tuple[complex, float]:
    """Dirichlet-series route -sum Lambda(n)/n^s for sigma > 1, with its tail bound.

    Returns (value, tail_bound); only the prime powers contribute.  The bound
    integrates log(u) u^{-sigma} beyond the cutoff, so it is only small for
    sigma comfortably above 1.
    """
    s = complex(s)
    sigma = s.real
    if sigma <= 1.0:
        raise InvalidArgumentError(f"series route needs sigma > 1, got {sigma}")
    from .arith import sieve_build  # local import; arith does not import zeta
    table = sieve_build(n_terms)
    qq = table.prime_powers()
    lam = table.lam[qq]
    value = -complex(np.sum(lam * qq.astype(float) ** (-s)))
    u = float(n_terms)
    tail = (u ** (1.0 - sigma)) * (math.log(u) / (sigma - 1.0) + 1.0 / (sigma - 1.0) ** 2)
    return value, tail


# ---------------------------------------------------------------------------
# Riemann-Siegel theta and Hardy Z
# ---------------------------------------------------------------------------

def riemann_siegel_theta(t):
    """theta(t) = Im log Gamma(1/4 + it/2) - (t/2) log pi, exact via loggamma."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 2.0):
        raise BelowHeightError("theta requires t >= 2")
    out = sp.loggamma(0.25 + 0.5j * t_arr).imag - 0.5 * t_arr * math.log(math.pi)
    return float(out) if np.isscalar(t) else out


def _theta_raw(t_arr: np.ndarray) -> np.ndarray:
    return sp.loggamma(0.25 + 0.5j * t_arr).imag - 0.5 * t_arr * math.log(math.pi)


def _z_em_bulk(ts: np.ndarray, m_terms: int = 14, chunk: int = 2048) -> np.ndarray:
    """Euler-Maclaurin Z(t) on an array, chunked by height so N is shared."""
    out = np.empty_like(ts)
    order = np.argsort(ts)
    st = ts[order]
    i = 0
    while i < len(st):
        block = st[i:i + chunk]
        tmax = block[-1]
        n_cut = max(24, int(0.62 * tmax) + 12)
        n = np.arange(1, n_cut)
        s = 0.5 + 1j * block
        main = np.exp(-1j * np.outer(block, np.log(n))) @ (n ** -0.5)
        val = main + n_cut ** (1.0 - s) / (s - 1.0) + 0.5 * n_cut ** (-s)
        prod = s.copy()
        for k in range(1, m_terms + 1):
            val += _BERN_FACT[k - 1] * prod * n_cut ** (-s - 2 * k + 1)
            prod = prod * (s + 2 * k - 1) * (s + 2 * k)
        out[order[i:i + chunk]] = (np.exp(1j * _theta_raw(block)) * val).real
        i += chunk
    return out


def hardy_z(t, tol: float = 1e-10) -> float:
    """Z(t) = e^{i theta(t)} zeta(1/2 + it); real, zeros at half-line ordinates."""
    t = float(t)
    if t < 2.0:
        raise BelowHeightError("Z requires t >= 2")
    ev = zeta(0.5 + 1j * t, max(tol, 1e-12))
    return float((np.exp(1j * _theta_raw(np.array([t]))) * ev.value).real[0])


# --- Riemann-Siegel correction machinery -----------------------------------
# Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p); singularities at p = 1/4,
# 3/4 are removable, so a Chebyshev fit on [0,1] gives stable derivatives.

def _build_psi_fits():
    deg = 90
    nodes = np.cos(math.pi * (np.arange(4 * deg) + 0.5) / (4 * deg))
    p = 0.5 * (nodes + 1.0)
    vals = np.cos(TWO_PI * (p * p - p - 1.0 / 16.0)) / np.cos(TWO_PI * p)
    fit = _cheb.Chebyshev.fit(2.0 * p - 1.0, vals, deg, domain=[-1, 1])
    return fit, fit.deriv(3)


_PSI_FIT, _PSI3_FIT = _build_psi_fits()


def _z_rs_bulk(ts: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Riemann-Siegel Z with C0 and C1 corrections; |error| < ~6e-6 for t >= 1500."""
    out = np.empty_like(ts)
    order = np.argsort(ts)
    st = ts[order]
    i = 0
    while i < len(st):
        block = st[i:i + chunk]
        a = np.sqrt(block / TWO_PI)
        nu = np.floor(a).astype(np.int64)
        p = a - nu
        n = np.arange(1, int(nu.max()) + 1)
        mat = np.cos(_theta_raw(block)[:, None] - np.outer(block, np.log(n)))
        mat *= n ** -0.5
        mat *= n[None, :] <= nu[:, None]
        main = 2.0 * mat.sum(axis=1)
        x = 2.0 * p - 1.0
        c0 = _PSI_FIT(x)
        c1 = -(_PSI3_FIT(x) * 8.0) / (96.0 * math.pi ** 2)
        corr = (-1.0) ** (nu - 1) * a ** -0.5 * (c0 + c1 / a)
        out[order[i:i + chunk]] = main + corr
        i += chunk
    return out


def _z_bulk(ts: np.ndarray) -> np.ndarray:
    """Dispatch Z over heights: Euler-Maclaurin below RS_CROSSOVER, R-S above."""
    ts = np.asarray(ts, dtype=float)
    out = np.empty_like(ts)
    lo = ts < RS_CROSSOVER
    if lo.any():
        out[lo] = _z_em_bulk(ts[lo])
    if (~lo).any():
        out[~lo] = _z_rs_bulk(ts[~lo])
    return out


# ---------------------------------------------------------------------------
# zero location
# ---------------------------------------------------------------------------

def gram_points(n_lo: int, n_hi: int) -> np.ndarray:
    """Gram points g_n, theta(g_n) = n pi, for n = n_lo..n_hi (n >= -1)."""
    n = np.arange(n_lo, n_hi + 1)
    tgt = n * math.pi
    g = TWO_PI * np.exp(1.0 + sp.lambertw((8.0 * tgt + math.pi) / (8.0 * math.pi * math.e)).real)
    g = np.maximum(g, 7.5)
    for _ in range(8):
        g = g - (_theta_raw(g) - tgt) / (0.5 * np.log(g / TWO_PI))
    return g


def _collect_brackets(g: np.ndarray, zg: np.ndarray, n_idx: np.ndarray,
                      z_eval) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Brackets for every zero between good Gram points (Rosser blocks).

    Returns (lo, hi, z_lo) arrays covering one zero each.  Blocks whose sign
    changes are not all visible at Gram spacing are subdivided x8, x64, ...
    """
    good = ((-1.0) ** n_idx) * zg > 0
    good[0] = True
    good[-1] = True
    gi = np.flatnonzero(good)
    starts, ends = gi[:-1], gi[1:]

    lo_list: list[np.ndarray] = []
    hi_list: list[np.ndarray] = []
    zlo_list: list[np.ndarray] = []

    # level 1: sign changes between consecutive Gram points
    flips = np.signbit(zg[:-1]) != np.signbit(zg[1:])
    per_block = np.add.reduceat(flips.astype(np.int64), starts)
    expected = ends - starts
    done = per_block == expected
    if done.any():
        in_done = np.zeros(len(flips), dtype=bool)
        for a, b in zip(starts[done], ends[done]):
            in_done[a:b] = True
        idx = np.flatnonzero(flips & in_done)
        lo_list.append(g[idx])
        hi_list.append(g[idx + 1])
        zlo_list.append(zg[idx])

    pending = [(int(a), int(b)) for a, b in zip(starts[~done], ends[~done])]
    level = 8
    while pending:
        if level > 1 << 14:
            raise MissedZeroError(f"unresolved Rosser blocks at finest subdivision: {pending[:4]}")
        groups: dict[int, list[tuple[int, int]]] = {}
        for a, b in pending:
            groups.setdefault(b - a, []).append((a, b))
        still: list[tuple[int, int]] = []
        for size, blocks in groups.items():
            k = size * level + 1
            arr = np.array(blocks)
            frac = np.linspace(0.0, 1.0, k)
            pts = g[arr[:, 0]][:, None] * (1.0 - frac)[None, :] + g[arr[:, 1]][:, None] * frac[None, :]
            zv = z_eval(pts.ravel()).reshape(pts.shape)
            fl = np.signbit(zv[:, :-1]) != np.signbit(zv[:, 1:])
            counts = fl.sum(axis=1)
            ok = counts == size
            for row in np.flatnonzero(ok):
                cols = np.flatnonzero(fl[row])
                lo_list.append(pts[row, cols])
                hi_list.append(pts[row, cols + 1])
                zlo_list.append(zv[row, cols])
            still.extend(blocks[int(r)] for r in np.flatnonzero(~ok))
        pending = still
        level *= 8
    lo = np.concatenate(lo_list) if lo_list else np.empty(0)
    hi = np.concatenate(hi_list) if hi_list else np.empty(0)
    zlo = np.concatenate(zlo_list) if zlo_list else np.empty(0)
    return lo, hi, zlo


def _bisect_zeros(lo: np.ndarray, hi: np.ndarray, zlo: np.ndarray, tol: float,
                  z_eval) -> np.ndarray:
    width = hi - lo
    iters = int(np.ceil(np.log2(max(float(width.max()), tol) / tol))) + 1
    for _ in range(min(iters, 64)):
        mid = 0.5 * (lo + hi)
        zm = z_eval(mid)
        go_left = np.signbit(zm) != np.signbit(zlo)
        hi = np.where(go_left, mid, hi)
        lo = np.where(go_left, lo, mid)
        zlo = np.where(go_left, zlo, zm)
    out = 0.5 * (lo + hi)
    out.sort()
    return out


def _smooth_main_term(t: float) -> float:
    return t / TWO_PI * math.log(t / (TWO_PI * math.e)) + 7.0 / 8.0


def _locate_zeros(t_max: float, tol: float, z_eval) -> np.ndarray:
    n_hi = int(_theta_raw(np.array([t_max]))[0] / math.pi) + 1
    # extend so the final Gram point is genuinely good (blocks must close)
    g = gram_points(-1, n_hi + 8)
    n_idx = np.arange(-1, n_hi + 9)
    zg = z_eval(g)
    ok = ((-1.0) ** n_idx) * zg > 0
    last = len(g) - 1
    while not ok[last] and last > 2:
        last -= 1
    g, n_idx, zg = g[:last + 1], n_idx[:last + 1], zg[:last + 1]
    lo, hi, zlo = _collect_brackets(g, zg, n_idx, z_eval)
    zeros = _bisect_zeros(lo, hi, zlo, tol, z_eval)
    return zeros[zeros <= t_max]


def find_zeros(t_max: float, tol: float = 1e-9) -> ZeroTable:
    """All critical-line ordinates in (0, t_max], Euler-Maclaurin accuracy.

    t_max is capped at 1e4 (larger tables come from ingestion or the bulk
    builder).  The count is checked against the counting-formula main term;
    a discrepancy >= 1 raises MissedZeroError.
    """
    if not 14.0 <= t_max <= FIND_ZEROS_CAP:
        raise InvalidArgumentError(f"find_zeros covers 14 <= T <= {FIND_ZEROS_CAP}, got {t_max}")
    if tol <= 0 or tol > 1e-3:
        raise InvalidArgumentError(f"tol must be in (0, 1e-3], got {tol}")
    zeros = _locate_zeros(t_max, tol, _z_em_bulk)
    predicted = _smooth_main_term(t_max)
    # |S(T)| reaches ~1.2 below 2e3 already, so the envelope must sit above it;
    # actually missing a zero is excluded structurally by the Rosser-block walk.
    if abs(len(zeros) - predicted) >= 1.6:
        raise MissedZeroError(
            f"found {len(zeros)} zeros <= {t_max}, counting formula predicts {predicted:.3f}")
    return ZeroTable.from_ordinates(zeros, t_max=t_max, source="computed", precision=tol)


def compute_zero_table(t_max: float, tol: float = 1e-9) -> ZeroTable:
    """Bulk zero table to t_max <= 8e4: Euler-Maclaurin below 1500, R-S above.

    Riemann-Siegel Z error (< ~6e-6) dominates refinement above the
    crossover, so the claimed per-ordinate precision is 1e-5 there.
    """
    if not 14.0 <= t_max <= 8.0e4:
        raise InvalidArgumentError(f"builder covers 14 <= T <= 8e4, got {t_max}")
    zeros = _locate_zeros(t_max, tol, _z_bulk)
    predicted = _smooth_main_term(t_max)
    if abs(len(zeros) - predicted) >= 2.0:
        raise MissedZeroError(
            f"found {len(zeros)} zeros <= {t_max}, counting formula predicts {predicted:.3f}")
    precision = max(tol, 1e-5 if t_max > RS_CROSSOVER else 0.0)
    return ZeroTable.from_ordinates(zeros, t_max=t_max, source="computed", precision=precision)
