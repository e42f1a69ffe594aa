"""Zeta evaluation, Hardy Z, and zero finding, cross-checked against mpmath."""

import math

import mpmath
import numpy as np
import pytest

from pclab import zeta
from pclab.errors import (BelowHeightError, HeightCapError, InvalidArgumentError,
                          NearSingularityError, PoleError)

FIRST_SIX = (14.13472, 21.02203, 25.01085, 30.42487, 32.93506, 37.58617)


# --- zeta(s) -------------------------------------------------------------------

def series_tail_oracle(s, n=2_000_000):
    """Direct Dirichlet series plus integral tail bound (sigma > 1 only)."""
    k = np.arange(1, n)
    val = complex(np.sum(k ** (-complex(s))))
    sigma = complex(s).real
    tail = (n - 1) ** (1 - sigma) / (sigma - 1)  # sum_{k>=n} k^-s <= int_{n-1}^inf
    return val, tail


def test_zeta_at_2_series_oracle():
    val, tail = series_tail_oracle(2.0)
    ev = zeta.zeta(2.0 + 0j)
    assert abs(ev.value - val) <= tail + ev.est_error
    assert ev.value.real == pytest.approx(1.6449340668, abs=1e-9)
    assert ev.value.imag == 0.0


@pytest.mark.parametrize("s,tol", [
    (0.5 + 14.134725j, 1e-12), (3 + 5j, 1e-12), (0.5 + 1000j, 1e-10),
    (-0.5 + 100j, 1e-11), (1.5 + 0j, 1e-12), (0.25 + 35.2j, 1e-12),
])
def test_zeta_matches_mpmath(s, tol):
    ev = zeta.zeta(s, tol)
    ref = complex(mpmath.zeta(s))
    assert abs(ev.value - ref) <= max(ev.est_error, 1e-13)
    assert ev.est_error <= tol


def test_zeta_pole_residue():
    # (s-1) zeta(s) -> 1 along the reals
    for k in range(3, 7):
        s = 1.0 + 10.0 ** -k
        ev = zeta.zeta(s + 0j)
        assert (s - 1.0) * ev.value.real == pytest.approx(1.0, abs=2e-3 * 10.0 ** -(k - 3))


def test_zeta_real_on_real_axis():
    for sigma in (1.5, 2.0, 3.0, 7.0):
        assert zeta.zeta(sigma + 0j).value.imag == 0.0


def test_zeta_conjugate_symmetry():
    for s in (2 + 3j, 0.5 + 25j, 1.5 + 100j):
        a = zeta.zeta(s).value
        b = zeta.zeta(s.conjugate()).value
        assert abs(b - a.conjugate()) <= 2 * zeta.zeta(s).est_error + 1e-14


def test_zeta_errors():
    with pytest.raises(PoleError):
        zeta.zeta(1.0 + 0j)
    with pytest.raises(HeightCapError):
        zeta.zeta(0.5 + 2.0e5j)
    with pytest.raises(HeightCapError):
        zeta.zeta(0.5 + 5000j, tol=1e-12)  # fp accumulation exceeds 1e-12 there
    with pytest.raises(InvalidArgumentError):
        zeta.zeta(2.0 + 0j, tol=1e-13)


# --- zeta'/zeta ------------------------------------------------------------------

def test_log_deriv_series_oracle():
    # -sum Lambda(n)/n^2 via 1e6-term sieve oracle
    val, tail = zeta.log_deriv_zeta_series(2.0 + 0j, 1 << 20)
    quo = zeta.log_deriv_zeta(2.0 + 0j)
    assert abs(val - quo) <= tail + 1e-10
    assert quo.real == pytest.approx(-0.5699, abs=2e-4)


def test_log_deriv_two_routes_complex():
    s = 3.0 + 5.0j
    series, tail = zeta.log_deriv_zeta_series(s, 1 << 20)
    quo = zeta.log_deriv_zeta(s)
    assert abs(series - quo) <= tail + 1e-8
    assert abs(series - quo) < 1e-8


def test_log_deriv_large_sigma_leading_term():
    # dominated by the n = 2 term: -log2 * 2^-sigma, next term O(3^-sigma)
    for sigma in (20.0, 30.0):
        val = zeta.log_deriv_zeta(sigma + 0j)
        lead = -math.log(2) * 2.0 ** -sigma
        assert abs(val - lead) < 2.0 * 3.0 ** -sigma


def test_log_deriv_near_zero_raises():
    with pytest.raises(NearSingularityError):
        zeta.log_deriv_zeta(0.5 + 14.134725141734694j)


# --- theta and Z ------------------------------------------------------------------

def test_theta_matches_mpmath():
    for t in (2.0, 14.0, 100.0, 5000.0):
        assert zeta.riemann_siegel_theta(t) == pytest.approx(
            float(mpmath.siegeltheta(t)), abs=1e-10)
    with pytest.raises(BelowHeightError):
        zeta.riemann_siegel_theta(1.0)


def test_hardy_z_matches_mpmath():
    for t in (14.134725, 20.0, 250.0, 1200.0):
        assert zeta.hardy_z(t) == pytest.approx(float(mpmath.siegelz(t)), abs=1e-9)
    with pytest.raises(BelowHeightError):
        zeta.hardy_z(1.5)


def test_hardy_z_first_zero_and_signs():
    assert abs(zeta.hardy_z(14.134725)) < 1e-4
    values = [zeta.hardy_z(t) for t in FIRST_SIX]
    mids = [zeta.hardy_z(0.5 * (a + b)) for a, b in zip(FIRST_SIX[:-1], FIRST_SIX[1:])]
    for left, mid in zip(mids[:-1], mids[1:]):
        assert left * mid < 0  # sign flips between consecutive ordinates


def test_z_squared_equals_zeta_modulus():
    t = 20.0
    z = zeta.hardy_z(t)
    zv = zeta.zeta(0.5 + 1j * t).value
    assert z * z == pytest.approx(abs(zv) ** 2, rel=1e-10)


def test_rs_z_accuracy_vs_em():
    """Riemann-Siegel bulk path vs the Euler-Maclaurin route across heights."""
    rng = np.random.default_rng(7)
    ts = np.sort(rng.uniform(1500.0, 9000.0, 40))
    rs = zeta._z_rs_bulk(ts.copy())
    em = zeta._z_em_bulk(ts.copy())
    assert np.max(np.abs(rs - em)) < 6e-6


# --- find_zeros --------------------------------------------------------------------

@pytest.fixture(scope="module")
def table_100():
    return zeta.find_zeros(100.0, tol=1e-9)


def test_find_zeros_first_six(table_100):
    assert np.max(np.abs(table_100.ordinates[:6] - np.array(FIRST_SIX))) <= 5e-5


def test_find_zeros_count_100(table_100):
    assert len(table_100) == 29


def test_find_zeros_against_mpmath(table_100):
    for idx in (1, 5, 10, 29):
        ref = float(mpmath.zetazero(idx).imag)
        assert table_100.ordinates[idx - 1] == pytest.approx(ref, abs=2e-9)


def test_find_zeros_strictly_increasing(table_100):
    assert np.all(np.diff(table_100.ordinates) > 0)


def test_find_zeros_sign_change_brackets(table_100):
    tol = 1e-9
    for g in table_100.ordinates[:10]:
        assert zeta.hardy_z(g - 2 * tol) * zeta.hardy_z(g + 2 * tol) < 0


def test_find_zeros_tol_contract():
    table = zeta.find_zeros(40.0, tol=1e-10)
    for g, ref_idx in zip(table.ordinates[:3], (1, 2, 3)):
        ref = float(mpmath.zetazero(ref_idx).imag)
        assert abs(g - ref) <= 1e-9  # tol plus Z-evaluation slack
        slope = (zeta.hardy_z(g + 1e-5) - zeta.hardy_z(g - 1e-5)) / 2e-5
        assert abs(zeta.hardy_z(g)) <= abs(slope) * 1e-8 + 1e-9


def test_find_zeros_validates_range():
    with pytest.raises(InvalidArgumentError):
        zeta.find_zeros(12.0)
    with pytest.raises(InvalidArgumentError):
        zeta.find_zeros(2.0e4)


def test_count_envelope_against_main_term():
    from pclab.zeros import smooth_main_term
    table = zeta.find_zeros(400.0)
    grid = np.arange(20.0, 400.0, 5.0)
    counts = table.count_below(grid, "right")
    dev = np.abs(counts - smooth_main_term(grid))
    assert np.max(dev) < 1.2 + 1.0 / 8.0 + 0.1


def test_builder_matches_find_zeros():
    a = zeta.find_zeros(300.0)
    b = zeta.compute_zero_table(300.0)
    assert len(a) == len(b)
    assert np.max(np.abs(a.ordinates - b.ordinates)) < 1e-6
