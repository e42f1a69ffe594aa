"""Zero-ordinate tables: ingestion, caching, counting, and S(t) statistics.

N(T) follows the half-weight convention (exact hits count m/2), so
S(T) = N(T) - smooth_main_term(T) jumps by m at each ordinate and decreases
continuously in between (above t = 2 pi, where the smooth term is increasing).
The R(T) term of the counting formula is dropped throughout; it is O(1/T)
and no expansion for it is available.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (CoverageError, EmptyInputError, InvalidArgumentError,
                     ValidationError, WrongFileError)

TWO_PI = 2.0 * math.pi
CACHE_MAGIC = b"PCLBZRS1"          # binary cache format "PCLB-ZEROS-v1"
FIRST_ZERO_BAND = (14.13, 14.14)   # ingest sanity band for the first ordinate


@dataclass(frozen=True)
class ZeroTable:
    """Ascending positive ordinates of critical-line zeros with multiplicities."""

    ordinates: np.ndarray
    multiplicities: np.ndarray
    t_max: float
    source: str
    precision: float
    _cum: np.ndarray = field(repr=False, default=None)

    @classmethod
    def from_ordinates(cls, ordinates: np.ndarray, t_max: float | None = None,
                       source: str = "computed", precision: float = 0.0,
                       multiplicities: np.ndarray | None = None) -> "ZeroTable":
        ordinates = np.asarray(ordinates, dtype=float)
        if len(ordinates) == 0:
            raise EmptyInputError("zero table must contain at least one ordinate")
        if np.any(np.diff(ordinates) <= 0):
            bad = int(np.flatnonzero(np.diff(ordinates) <= 0)[0]) + 1
            raise ValidationError(f"ordinates not strictly increasing at index {bad}", line=bad + 1)
        if ordinates[0] <= 0:
            raise ValidationError("ordinates must be positive", line=1)
        if multiplicities is None:
            multiplicities = np.ones(len(ordinates), dtype=np.int64)
        else:
            multiplicities = np.asarray(multiplicities, dtype=np.int64)
            if np.any(multiplicities < 1):
                raise InvalidArgumentError("multiplicities must be >= 1")
        if t_max is None:
            t_max = float(ordinates[-1])
        cum = np.concatenate([[0], np.cumsum(multiplicities)]).astype(float)
        return cls(ordinates=ordinates, multiplicities=multiplicities, t_max=float(t_max),
                   source=source, precision=float(precision), _cum=cum)

    def __len__(self) -> int:
        return len(self.ordinates)

    def restrict(self, t_max: float) -> "ZeroTable":
        """Sub-table covering (0, t_max]."""
        if t_max > self.t_max:
            raise CoverageError(f"T={t_max} exceeds coverage {self.t_max}")
        k = int(np.searchsorted(self.ordinates, t_max, side="right"))
        return ZeroTable.from_ordinates(self.ordinates[:k], t_max=t_max,
                                        source=self.source, precision=self.precision,
                                        multiplicities=self.multiplicities[:k])

    def count_below(self, t, side: str = "right"):
        """Multiplicity-weighted n(t) with left/right limits (vectorized)."""
        idx = np.searchsorted(self.ordinates, t, side=side)
        return self._cum[idx]


def count_n(t: float, table: ZeroTable) -> float:
    """N(T) = (n(T+0) + n(T-0))/2: exact hits weighted one-half, multiplicities summed."""
    if t > table.t_max:
        raise CoverageError(f"T={t} exceeds table coverage {table.t_max}")
    lo = float(table.count_below(t, side="left"))
    hi = float(table.count_below(t, side="right"))
    return 0.5 * (lo + hi)


def smooth_main_term(t: float):
    """(T/2pi) log(T/2pi e) + 7/8, the smooth part of the counting formula."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise InvalidArgumentError("smooth_main_term requires T > 0")
    out = t_arr / TWO_PI * np.log(t_arr / (TWO_PI * math.e)) + 7.0 / 8.0
    return float(out) if np.isscalar(t) else out


def s_of_t(t: float, table: ZeroTable) -> float:
    """S(T) = N(T) - smooth_main_term(T); R(T) dropped (O(1/T) bias)."""
    if t < 20.0:
        raise InvalidArgumentError("s_of_t requires T >= 20 (R(T) omission grows below)")
    return count_n(t, table) - smooth_main_term(t)


@dataclass(frozen=True)
class SCurve:
    """S(t) sampled on a grid (right-limit values at jump points)."""

    grid: np.ndarray
    values: np.ndarray
    table: ZeroTable


def s_curve(table: ZeroTable, t_lo: float, t_hi: float, step: float = 0.1) -> SCurve:
    if t_hi > table.t_max:
        raise CoverageError(f"T={t_hi} exceeds table coverage {table.t_max}")
    if t_lo < 0.0:
        raise InvalidArgumentError("t_lo must be >= 0")
    grid = np.arange(t_lo, t_hi + 0.5 * step, step)
    values = table.count_below(grid, side="right") - smooth_main_term(np.maximum(grid, 1e-12))
    return SCurve(grid=grid, values=values, table=table)


# ---------------------------------------------------------------------------
# file ingestion and binary cache
# ---------------------------------------------------------------------------

def ingest(path: str | Path, fmt: str = "plain-ordinates",
           write_cache_file: bool = True, precision: float = 1e-9) -> ZeroTable:
    """Load a zero table from plain text and validate it.

    plain-ordinates: one decimal ordinate per line, '#' starts a comment.
    offset-block: header line "BASE <real>", then per-line offsets from BASE.
    A validated table is cached alongside the file in the PCLB-ZEROS-v1
    binary format (skip with write_cache_file=False).
    """
    path = Path(path)
    if fmt not in ("plain-ordinates", "offset-block"):
        raise InvalidArgumentError(f"unknown zero-file format {fmt!r}")
    values: list[float] = []
    base: float | None = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            if fmt == "offset-block" and base is None:
                parts = text.split()
                if len(parts) != 2 or parts[0] != "BASE":
                    raise ValidationError(
                        f"offset-block file must start with 'BASE <real>' (line {lineno})",
                        line=lineno)
                base = float(parts[1])
                continue
            try:
                v = float(text)
            except ValueError as exc:
                raise ValidationError(f"unparseable ordinate at line {lineno}: {text!r}",
                                      line=lineno) from exc
            if fmt == "offset-block":
                v += base
            if values and v <= values[-1]:
                raise ValidationError(
                    f"non-monotone ordinate at line {lineno}: {v} <= {values[-1]}",
                    line=lineno)
            values.append(v)
    if not values:
        raise EmptyInputError(f"no ordinates in {path}")
    if not FIRST_ZERO_BAND[0] <= values[0] <= FIRST_ZERO_BAND[1]:
        raise WrongFileError(
            f"first ordinate {values[0]} outside {list(FIRST_ZERO_BAND)}; "
            "not a table of zeros from the bottom", line=1)
    table = ZeroTable.from_ordinates(np.array(values), source=f"file:{path}:{fmt}",
                                     precision=precision)
    if write_cache_file:
        write_cache(table, path.with_suffix(path.suffix + ".pclb"))
    return table


def write_cache(table: ZeroTable, path: str | Path) -> None:
    """PCLB-ZEROS-v1: 8-byte magic, u64 count, little-endian f64 ordinates, CRC32."""
    payload = struct.pack("<Q", len(table)) + table.ordinates.astype("<f8").tobytes()
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC + payload + struct.pack("<I", crc))


def load_cache(path: str | Path, source: str | None = None,
               precision: float = 1e-9) -> ZeroTable:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != CACHE_MAGIC:
        raise ValidationError(f"{path}: bad magic, not a PCLB-ZEROS-v1 cache")
    payload, crc_bytes = blob[8:-4], blob[-4:]
    if zlib.crc32(payload) & 0xFFFFFFFF != struct.unpack("<I", crc_bytes)[0]:
        raise ValidationError(f"{path}: CRC mismatch")
    (count,) = struct.unpack("<Q", payload[:8])
    ordinates = np.frombuffer(payload[8:], dtype="<f8")
    if len(ordinates) != count:
        raise ValidationError(f"{path}: count field {count} != payload {len(ordinates)}")
    return ZeroTable.from_ordinates(ordinates.copy(), source=source or f"cache:{path}",
                                    precision=precision)


# ---------------------------------------------------------------------------
# S(t) integrals (trapezoid with exact jump splitting)
# ---------------------------------------------------------------------------

def _segments(table: ZeroTable, t_max: float, grid_step: float,
              extra: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Breakpoints 0..t_max from the grid plus every jump location; returns (a, b, mid)."""
    pts = [np.arange(0.0, t_max + 0.5 * grid_step, grid_step)]
    g = table.ordinates
    pts.append(g[(g > 0) & (g < t_max)])
    if extra is not None:
        pts.append(extra[(extra > 0) & (extra < t_max)])
    bp = np.unique(np.concatenate(pts))
    if bp[-1] < t_max:
        bp = np.append(bp, t_max)
    return bp[:-1], bp[1:], 0.5 * (bp[:-1] + bp[1:])


@dataclass(frozen=True)
class FujiiResult:
    value: float                 # int_0^T (S(t+h) - S(t))^2 dt
    t: float
    h: float
    model: float | None          # (T/pi^2) log(h log T), when h log T > e
    ratio: float | None


def fujii_variance(t_max: float, h: float, table: ZeroTable,
                   grid_step: float = 0.01) -> FujiiResult:
    """Second moment of S(t+h) - S(t) on [0, T], trapezoid between jump points."""
    if h < 0:
        raise InvalidArgumentError(f"h must be >= 0, got {h}")
    if t_max + h > table.t_max:
        raise CoverageError(f"T+h = {t_max + h} exceeds coverage {table.t_max}")
    if h == 0.0:
        return FujiiResult(value=0.0, t=t_max, h=0.0, model=None, ratio=None)
    a, b, mid = _segments(table, t_max, grid_step, extra=table.ordinates - h)
    jump = table.count_below(mid + h) - table.count_below(mid)
    ga = smooth_main_term(a + h) - smooth_main_term(np.maximum(a, 1e-12))
    gb = smooth_main_term(b + h) - smooth_main_term(b)
    value = float(np.sum(0.5 * (b - a) * ((jump - ga) ** 2 + (jump - gb) ** 2)))
    hlt = h * math.log(t_max)
    model = t_max / math.pi ** 2 * math.log(hlt) if hlt > math.e else None
    return FujiiResult(value=value, t=t_max, h=h, model=model,
                       ratio=value / model if model else None)


@dataclass(frozen=True)
class SMomentResult:
    value: float                 # int_0^T S(t)^{2k} dt
    t: float
    k: int
    model: float                 # Gaussian-moment model (2k)!/(k!(2pi)^{2k}) T (loglog T)^k
    ratio: float


def s_moment(t_max: float, k: int, table: ZeroTable, grid_step: float = 0.01) -> SMomentResult:
    """int_0^T S(t)^{2k} dt for k in {1,2,3}, trapezoid between jump points."""
    if k not in (1, 2, 3):
        raise InvalidArgumentError(f"k must be 1, 2 or 3, got {k}")
    if t_max > table.t_max:
        raise CoverageError(f"T = {t_max} exceeds coverage {table.t_max}")
    a, b, mid = _segments(table, t_max, grid_step)
    n_mid = table.count_below(mid)
    sa = n_mid - smooth_main_term(np.maximum(a, 1e-12))
    sb = n_mid - smooth_main_term(b)
    value = float(np.sum(0.5 * (b - a) * (sa ** (2 * k) + sb ** (2 * k))))
    model = (math.factorial(2 * k) / (math.factorial(k) * TWO_PI ** (2 * k))
             * t_max * math.log(math.log(t_max)) ** k)
    return SMomentResult(value=value, t=t_max, k=k, model=model, ratio=value / model)


def sign_changes(t_max: float, table: ZeroTable, grid_step: float | None = None) -> int:
    """Number of sign changes of S(t) on [0, T].

    S is piecewise monotone between jumps (rising only on (0, 2pi), where the
    smooth term decreases), so alternations of the one-sided limit values at
    0+, 2pi, and each ordinate resolve every crossing exactly; a grid cannot
    add information, so grid_step is accepted for interface compatibility
    and ignored.
    """
    if t_max > table.t_max:
        raise CoverageError(f"T = {t_max} exceeds coverage {table.t_max}")
    g = table.ordinates[table.ordinates <= t_max]
    cum = table._cum
    pts: list[float] = []
    if t_max > TWO_PI and (len(g) == 0 or g[0] > TWO_PI):
        pts.append(-smooth_main_term(TWO_PI))  # interior maximum of S before the first jump
    vals_elems = [np.array(pts)] if pts else []
    if len(g):
        sm = smooth_main_term(g)
        before = cum[:len(g)] - sm        # S(gamma_k - 0)
        after = cum[1:len(g) + 1] - sm    # S(gamma_k + 0)
        inter = np.empty(2 * len(g))
        inter[0::2] = before
        inter[1::2] = after
        vals_elems.append(inter)
    tail_n = cum[len(g)]
    vals_elems.append(np.array([tail_n - smooth_main_term(max(t_max, 1e-9))]))
    vals = np.concatenate([[-7.0 / 8.0], *vals_elems])  # S(0+) = -7/8
    sign = np.sign(vals)
    nz = sign != 0
    sign = sign[nz]
    return int(np.sum(sign[:-1] * sign[1:] < 0))
