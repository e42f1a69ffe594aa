"""Zero-table ingestion, cache format, counting, and S(t) statistics."""

import math

import numpy as np
import pytest

from pclab import zeros
from pclab.errors import (CoverageError, EmptyInputError, InvalidArgumentError,
                          ValidationError, WrongFileError)

FIRST_SIX = (14.13472, 21.02203, 25.01085, 30.42487, 32.93506, 37.58617)


# --- ingestion ---------------------------------------------------------------

def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def test_ingest_plain(tmp_path):
    f = write_lines(tmp_path / "six.txt",
                    ["# first six ordinates"] + [f"{g:.5f}" for g in FIRST_SIX])
    table = zeros.ingest(f)
    assert len(table) == 6
    assert table.t_max == pytest.approx(37.58617)
    assert (tmp_path / "six.txt.pclb").exists()


def test_ingest_offset_block(tmp_path):
    base = 14.0
    f = write_lines(tmp_path / "off.txt",
                    ["BASE 14.0"] + [f"{g - base:.5f}" for g in FIRST_SIX])
    table = zeros.ingest(f, fmt="offset-block")
    assert np.allclose(table.ordinates, FIRST_SIX, atol=1e-5)


def test_ingest_empty(tmp_path):
    f = write_lines(tmp_path / "empty.txt", ["# nothing here"])
    with pytest.raises(EmptyInputError):
        zeros.ingest(f)


def test_ingest_non_monotone_names_line(tmp_path):
    f = write_lines(tmp_path / "bad.txt", ["14.13472", "21.02203", "15.0", "30.42487"])
    with pytest.raises(ValidationError) as err:
        zeros.ingest(f)
    assert err.value.line == 3


def test_ingest_wrong_file(tmp_path):
    f = write_lines(tmp_path / "wrong.txt", ["100.5", "101.2"])
    with pytest.raises(WrongFileError):
        zeros.ingest(f)


def test_ingest_unparseable(tmp_path):
    f = write_lines(tmp_path / "junk.txt", ["14.13472", "not-a-number"])
    with pytest.raises(ValidationError) as err:
        zeros.ingest(f)
    assert err.value.line == 2


def test_cache_roundtrip_bit_identical(tmp_path, zeros_2k):
    p1 = tmp_path / "a.pclb"
    p2 = tmp_path / "b.pclb"
    zeros.write_cache(zeros_2k, p1)
    loaded = zeros.load_cache(p1)
    assert np.array_equal(loaded.ordinates.view(np.uint64),
                          zeros_2k.ordinates.view(np.uint64))
    zeros.write_cache(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_cache_detects_corruption(tmp_path, zeros_2k):
    p = tmp_path / "c.pclb"
    zeros.write_cache(zeros_2k, p)
    blob = bytearray(p.read_bytes())
    blob[20] ^= 0xFF
    p.write_bytes(bytes(blob))
    with pytest.raises(ValidationError):
        zeros.load_cache(p)


# --- counting ----------------------------------------------------------------

def test_count_half_weight():
    table = zeros.ZeroTable.from_ordinates(np.array(FIRST_SIX))
    g1 = FIRST_SIX[0]
    assert zeros.count_n(14.0, table) == 0.0
    assert zeros.count_n(g1, table) == 0.5
    assert zeros.count_n(g1 + 1e-9, table) == 1.0
    assert zeros.count_n(37.0, table) == 5.0
    with pytest.raises(CoverageError):
        zeros.count_n(40.0, table)


def test_count_multiplicity_jump():
    table = zeros.ZeroTable.from_ordinates(
        np.array([14.1345, 21.0, 25.0]), multiplicities=np.array([1, 2, 1]))
    assert zeros.count_n(21.0 - 1e-9, table) == 1.0
    assert zeros.count_n(21.0, table) == 2.0          # mean of 1 and 3
    assert zeros.count_n(21.0 + 1e-9, table) == 3.0


def test_smooth_main_term_values():
    # closed form, independently evaluated: T=100 -> 29.0023...
    two_pi_e = 2 * math.pi * math.e
    assert zeros.smooth_main_term(two_pi_e) == pytest.approx(7.0 / 8.0, abs=1e-14)
    assert zeros.smooth_main_term(100.0) == pytest.approx(29.002343587325346, abs=1e-10)
    grid = np.arange(7.0, 1000.0, 1.0)
    vals = zeros.smooth_main_term(grid)
    assert np.all(np.diff(vals) > 0)  # increasing above 2 pi


def test_count_envelope_on_reference(ref_zeros):
    for t in (100.0, 1000.0, 10_000.0, 70_000.0):
        n = zeros.count_n(t, ref_zeros)
        ratio = n / zeros.smooth_main_term(t)
        assert abs(ratio - 1.0) < 0.01, t


def test_n_100_is_29(ref_zeros):
    assert zeros.count_n(100.0, ref_zeros) == 29.0


def test_unit_interval_density_envelope(ref_zeros):
    g = ref_zeros.ordinates
    hi = np.searchsorted(g, np.arange(20.0, ref_zeros.t_max, 250.0) + 1.0)
    lo = np.searchsorted(g, np.arange(20.0, ref_zeros.t_max, 250.0))
    assert np.max(hi - lo) <= 3.0 * math.log(ref_zeros.t_max)


# --- S(t) ----------------------------------------------------------------------

def test_s_of_t_basics(zeros_2k):
    with pytest.raises(InvalidArgumentError):
        zeros.s_of_t(19.0, zeros_2k)
    vals = [zeros.s_of_t(t, zeros_2k) for t in np.arange(20.0, 100.0, 0.1)]
    assert max(abs(v) for v in vals) < 1.2


def test_s_jump_is_one(zeros_2k):
    g = float(zeros_2k.ordinates[100])
    below = zeros.s_of_t(g - 1e-7, zeros_2k)
    above = zeros.s_of_t(g + 1e-7, zeros_2k)
    assert above - below == pytest.approx(1.0, abs=1e-6)


def test_s_mean_near_zero(ref_zeros):
    curve = zeros.s_curve(ref_zeros, 0.0, 74_000.0, 0.25)
    assert abs(float(np.mean(curve.values))) < 0.05


def test_s_of_t_computed_vs_ingested_roundtrip(tmp_path, ref_zeros):
    """find_zeros output and a text-file round trip agree as S(t) sources."""
    from pclab import zeta
    computed = zeta.find_zeros(1000.0)
    f = tmp_path / "thousand.txt"
    f.write_text("\n".join(f"{g:.9f}" for g in computed.ordinates), encoding="ascii")
    ingested = zeros.ingest(f)
    for t in np.arange(20.0, 999.0, 7.3):
        a = zeros.s_of_t(float(t), computed)
        b = zeros.s_of_t(float(t), ingested)
        c = zeros.s_of_t(float(t), ref_zeros)
        assert abs(a - b) < 1e-6
        assert abs(a - c) < 2e-2


# --- Fujii variance, moments, sign changes ------------------------------------

def test_fujii_zero_h(zeros_2k):
    assert zeros.fujii_variance(1000.0, 0.0, zeros_2k).value == 0.0


def test_fujii_nondecreasing_in_h(zeros_2k):
    vals = [zeros.fujii_variance(1500.0, h, zeros_2k, grid_step=0.02).value
            for h in (0.1, 0.5, 1.0)]
    assert vals[0] <= vals[1] <= vals[2]


def test_fujii_model_band(ref_zeros):
    res = zeros.fujii_variance(5000.0, 1.0, ref_zeros.restrict(5001.0), grid_step=0.01)
    assert res.model == pytest.approx(5000.0 / math.pi ** 2 * math.log(math.log(5000.0)),
                                      rel=1e-12)
    assert 0.4 <= res.ratio <= 2.5


def test_fujii_coverage(zeros_2k):
    with pytest.raises(CoverageError):
        zeros.fujii_variance(2000.0, 1.0, zeros_2k)


def test_s_moment_models(zeros_2k):
    res1 = zeros.s_moment(1000.0, 1, zeros_2k)
    assert res1.model == pytest.approx(1000.0 * math.log(math.log(1000.0)) / (2 * math.pi ** 2),
                                       rel=1e-12)
    # model coefficients: k=1 -> 1/(2 pi^2) ~ 0.050660, k=2 -> 12/(2 pi)^4 ~ 0.0077
    assert 2 / (1 * (2 * math.pi) ** 2) == pytest.approx(0.050660, abs=1e-6)
    assert 24 / (2 * (2 * math.pi) ** 4) == pytest.approx(0.0077, abs=1e-4)
    with pytest.raises(InvalidArgumentError):
        zeros.s_moment(1000.0, 4, zeros_2k)


def test_s_moment_trapezoid_vs_fine_grid(zeros_2k):
    coarse = zeros.s_moment(500.0, 1, zeros_2k, grid_step=0.05)
    fine = zeros.s_moment(500.0, 1, zeros_2k, grid_step=0.005)
    assert coarse.value == pytest.approx(fine.value, rel=1e-3)


def test_sign_changes_monotone_and_floor(zeros_2k):
    z100 = zeros.sign_changes(100.0, zeros_2k)
    z500 = zeros.sign_changes(500.0, zeros_2k)
    z1000 = zeros.sign_changes(1000.0, zeros_2k)
    assert z100 >= 20
    assert z100 <= z500 <= z1000


def test_sign_changes_grid_step_is_cosmetic(zeros_2k):
    assert (zeros.sign_changes(800.0, zeros_2k)
            == zeros.sign_changes(800.0, zeros_2k, grid_step=0.5))


def test_sign_changes_ratio_reported(ref_zeros):
    t = 10_000.0
    count = zeros.sign_changes(t, ref_zeros)
    model = t * math.log(t) / math.sqrt(math.pi * math.log(math.log(t)))
    assert count > 0 and 0.0 < count / model < 10.0  # reported, sanity only
