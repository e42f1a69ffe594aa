"""Form factor, kernel pair sums, GUE comparison, and the small-gap constant."""

import math

import numpy as np
import pytest
import scipy.integrate
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from pclab import paircorr as pc
from pclab.errors import CoverageError, GridRangeError, InvalidArgumentError


# --- weight and kernels --------------------------------------------------------

def test_weight_w_values():
    assert pc.weight_w(0.0) == 1.0
    assert pc.weight_w(2.0) == 0.5


@given(st.floats(min_value=-500, max_value=500, allow_nan=False))
@settings(max_examples=100, deadline=None)
def test_weight_w_even_and_bounded(u):
    assert pc.weight_w(u) == pc.weight_w(-u)
    assert 0.0 < pc.weight_w(u) <= 1.0


def test_fejer_pair_values():
    k = pc.fejer_pair(1.0)
    assert k.r(np.array([0.0]))[0] == 1.0
    assert k.r_hat(np.array([0.0]))[0] == 1.0
    assert k.r_hat(np.array([1.0]))[0] == 0.0
    assert k.r_hat(np.array([1.5]))[0] == 0.0
    k2 = pc.fejer_pair(0.5)
    assert k2.r_hat(np.array([0.0]))[0] == pytest.approx(2.0)
    assert k2.support_radius == 0.5
    with pytest.raises(InvalidArgumentError):
        pc.fejer_pair(0.0)


def test_fejer_removable_singularity_branch():
    k = pc.fejer_pair(1.0)
    smooth = k.r(np.array([1e-5, 1e-4, 2e-4, 1e-3]))
    direct = (np.sin(np.pi * np.array([2e-4, 1e-3])) / (np.pi * np.array([2e-4, 1e-3]))) ** 2
    assert smooth[2] == pytest.approx(direct[0], rel=1e-12)
    assert np.all(np.diff(smooth) < 0)


def test_selberg_minorant_values():
    h = pc.selberg_minorant_pair()
    assert h.r(np.array([0.0]))[0] == 1.0
    assert h.r(np.array([1.0]))[0] == pytest.approx(0.0, abs=1e-15)
    assert h.r_hat(np.array([0.0]))[0] == 1.0
    assert h.r_hat(np.array([1.0]))[0] == pytest.approx(0.0, abs=1e-15)
    u = np.linspace(-3.0, 3.0, 1001)
    vals = h.r(u)
    inside = np.abs(u) <= 1.0
    assert np.all(vals[inside] <= 1.0 + 1e-12)
    assert np.all(vals[~inside] <= 1e-12)  # minorant of the indicator


def _osc_tail(c, u0):
    """int_{u0}^inf cos(c u) / u^2 du (c >= 0), by parts via Si."""
    if c == 0.0:
        return 1.0 / u0
    si = float(scipy.special.sici(c * u0)[0])
    return math.cos(c * u0) / u0 - c * (math.pi / 2.0 - si)


def transform_oracle_fejer(lam, alpha, u0=60.0):
    """2 int_0^inf k(u) cos(2 pi alpha u) du: finite quadrature + closed-form tail.

    Beyond u0 the kernel is (1 - cos(2 pi lam u)) / (2 pi^2 lam^2 u^2); the
    product with cos(2 pi alpha u) splits into three 1/u^2 cosine tails.
    """
    pair = pc.fejer_pair(lam)
    head, _ = scipy.integrate.quad(
        lambda u: float(pair.r(np.array([u]))[0]) * math.cos(2 * math.pi * alpha * u),
        0.0, u0, limit=4000, epsabs=1e-12)
    coef = 1.0 / (2.0 * math.pi ** 2 * lam ** 2)
    tail = coef * (_osc_tail(2 * math.pi * alpha, u0)
                   - 0.5 * _osc_tail(2 * math.pi * (lam + alpha), u0)
                   - 0.5 * _osc_tail(2 * math.pi * abs(lam - alpha), u0))
    return 2.0 * (head + tail)


def test_fejer_numerical_transform():
    for lam in (1.0, 0.5):
        pair = pc.fejer_pair(lam)
        for a in np.linspace(0.0, 1.2 * lam, 21):
            num = transform_oracle_fejer(lam, float(a))
            assert num == pytest.approx(float(pair.r_hat(np.array([a]))[0]),
                                        abs=1e-6), (lam, a)


def test_selberg_numerical_transform():
    pair = pc.selberg_minorant_pair()
    u0 = 60.0
    # |h(u)| <= 1/(pi^2 u^2 (u^2-1)) beyond u0: tail below 2e-8
    for a in np.linspace(0.0, 1.2, 21):
        head, _ = scipy.integrate.quad(
            lambda u: float(pair.r(np.array([u]))[0]) * math.cos(2 * math.pi * a * u),
            0.0, u0, limit=4000, epsabs=1e-12)
        assert 2.0 * head == pytest.approx(float(pair.r_hat(np.array([a]))[0]),
                                           abs=1e-6), a


# --- GUE model ------------------------------------------------------------------

def test_gue_model_basics():
    assert pc.gue_model(0.0) == 0.0
    assert abs(pc.gue_model(20.0) - 19.5) < 0.01
    beta = np.linspace(0.0, 5.0, 200)
    vals = pc.gue_model(beta)
    assert np.all(np.diff(vals) >= 0)
    assert np.all(vals <= beta + 1e-12)
    with pytest.raises(InvalidArgumentError):
        pc.gue_model(-0.5)


def test_gue_model_matches_quadrature():
    for beta in (0.3, 1.0, 2.5):
        ref, _ = scipy.integrate.quad(lambda u: 1.0 - np.sinc(u) ** 2, 0.0, beta)
        assert pc.gue_model(beta) == pytest.approx(ref, abs=1e-9)


def test_sinc_squared_integral_is_one():
    cut = 300.0
    val, _ = scipy.integrate.quad(lambda u: np.sinc(u) ** 2, 0.0, cut, limit=4000)
    total = 2.0 * (val + 1.0 / (2.0 * math.pi ** 2 * cut))
    assert total == pytest.approx(1.0, abs=1e-6)


# --- small-gap threshold ----------------------------------------------------------

def test_small_gap_threshold_value():
    lam = pc.small_gap_threshold(1e-10)
    assert lam == pytest.approx(0.6072, abs=2e-4)
    with pytest.raises(InvalidArgumentError):
        pc.small_gap_threshold(1e-6)


def test_small_gap_bracket_signs():
    h_hat = pc.selberg_minorant_pair().r_hat

    def g(lam):
        val, _ = scipy.integrate.quad(lambda a: a * float(h_hat(np.array([lam * a]))[0]),
                                      0.0, 1.0, epsabs=1e-12)
        return lam - 1.0 + 2.0 * lam * val

    assert g(0.5) < 0.0
    assert g(1.0) > 0.0


# --- form factor -------------------------------------------------------------------

@pytest.fixture(scope="module")
def pairs_5k(ref_zeros):
    return pc.pair_differences(ref_zeros, 5000.0, 200.0)


@pytest.fixture(scope="module")
def series_5k(ref_zeros, pairs_5k):
    alphas = np.round(np.arange(0, 201) * 0.01, 10)
    return pc.f_alpha(ref_zeros, 5000.0, alphas, pairs=pairs_5k)


def test_f_alpha_nonnegative_and_even_mirror(series_5k):
    assert np.min(series_5k.values) >= 0.0
    assert series_5k.value_at(-0.5) == series_5k.value_at(0.5)


def test_f_alpha_rotation_matches_cos_path(ref_zeros, pairs_5k):
    uniform = np.round(np.arange(0, 41) * 0.01, 10)
    jitter = uniform.copy()
    jitter[1] += 1e-6  # breaks uniformity -> per-alpha cosine path
    a = pc.f_alpha(ref_zeros, 5000.0, uniform, pairs=pairs_5k)
    b = pc.f_alpha(ref_zeros, 5000.0, jitter, pairs=pairs_5k)
    mask = np.ones(len(uniform), dtype=bool)
    mask[1] = False
    assert np.max(np.abs(a.values[mask] - b.values[mask])) < 1e-9


def test_f_alpha_truncation_self_consistency(ref_zeros):
    alphas = np.round(np.arange(0, 11) * 0.05, 10)
    full = pc.f_alpha(ref_zeros, 5000.0, alphas, cutoff=200.0)
    half = pc.f_alpha(ref_zeros, 5000.0, alphas, cutoff=100.0)
    assert np.max(np.abs(full.values - half.values)) < half.tail_bound
    assert half.tail_bound > 0


def test_f_alpha_grid_validation(ref_zeros):
    with pytest.raises(InvalidArgumentError):
        pc.f_alpha(ref_zeros, 5000.0, np.array([0.0, 0.0, 0.1]))
    with pytest.raises(InvalidArgumentError):
        pc.f_alpha(ref_zeros, 5000.0, np.array([2.0, 3.5]))
    with pytest.raises(CoverageError):
        pc.f_alpha(ref_zeros, 1.0e6, np.array([0.0, 1.0]))


def test_f_alpha_tail_flag(ref_zeros):
    ser = pc.f_alpha(ref_zeros, 5000.0, np.array([0.0, 0.5, 1.0]), cutoff=60.0,
                     tail_tol=1e-3)
    assert ser.tail_exceeds_tol


def test_log_factor_scales(ref_zeros):
    lit = pc.log_factor(ref_zeros, 5000.0, "literal")
    eff = pc.log_factor(ref_zeros, 5000.0, "effective")
    assert lit == pytest.approx(math.log(5000.0))
    # effective factor tracks log(T/2 pi e) up to S(T)-level fluctuation
    assert eff == pytest.approx(math.log(5000.0 / (2 * math.pi * math.e)), abs=0.01)
    with pytest.raises(InvalidArgumentError):
        pc.log_factor(ref_zeros, 5000.0, "bogus")


# --- pair sums -----------------------------------------------------------------------

def test_pair_sum_two_route_identity(ref_zeros, pairs_5k):
    for lam in (0.5, 1.0):
        res = pc.pair_sum(ref_zeros, 5000.0, pc.fejer_pair(lam), pairs=pairs_5k)
        assert res.transform is not None
        assert abs(res.direct - res.transform) / abs(res.direct) < 0.02, lam
    res = pc.pair_sum(ref_zeros, 5000.0, pc.selberg_minorant_pair(), pairs=pairs_5k)
    assert abs(res.direct - res.transform) / abs(res.direct) < 0.02


def test_pair_sum_zero_kernel(ref_zeros, pairs_5k):
    null = pc.FourierPair(r=lambda u: np.zeros_like(np.asarray(u, dtype=float)),
                          r_hat=lambda a: np.zeros_like(np.asarray(a, dtype=float)),
                          support_radius=1.0, name="null")
    res = pc.pair_sum(ref_zeros, 5000.0, null, pairs=pairs_5k)
    assert res.direct == 0.0
    assert res.transform == 0.0


def test_fejer_pair_sum_model_band(desk_ctx):
    """Eq.-5.5-style band at desk height: within 15% of 1/lam + lam/3."""
    ctx = desk_ctx
    for lam in (0.5, 1.0):
        res = pc.pair_sum(ctx.zero_table, ctx.t_ref, pc.fejer_pair(lam),
                          pairs=ctx.pairs(), series=ctx.falpha_grid())
        model = 1.0 / lam + lam / 3.0
        assert abs(res.normalized / model - 1.0) <= 0.15, (lam, res.normalized)


# --- histogram, stats, mu ---------------------------------------------------------

def test_pcc_histogram_shapes(ref_zeros, pairs_5k):
    hist = pc.pcc_histogram(ref_zeros, 5000.0, 3.0, 30, pairs=pairs_5k)
    assert len(hist.counts) == 30
    assert np.all(hist.counts >= 0)
    cum = hist.cumulative()
    assert np.all(np.diff(cum) >= 0)
    with pytest.raises(InvalidArgumentError):
        pc.pcc_histogram(ref_zeros, 5000.0, 3.0, 5, pairs=pairs_5k)


def test_pcc_histogram_vs_gue(desk_ctx):
    hist = pc.pcc_histogram(desk_ctx.zero_table, desk_ctx.t_ref, 3.0, 30,
                            pairs=desk_ctx.pairs())
    supdev = np.max(np.abs(hist.cumulative() - pc.gue_model(hist.edges[1:])))
    assert supdev < 0.15
    assert hist.counts[0] < 0.02  # zero repulsion in the first bin (beta <= 0.1)


def test_zero_stats_all_simple(ref_zeros):
    stats = pc.zero_stats(ref_zeros, 10_000.0)
    assert stats.n_star == pytest.approx(1.0, abs=0.1)
    assert stats.n_simple == stats.n_total


def test_zero_stats_with_multiplicity():
    from pclab.zeros import ZeroTable
    table = ZeroTable.from_ordinates(np.array([14.1345, 21.0, 25.0, 30.4]),
                                     t_max=31.0, multiplicities=np.array([1, 2, 1, 1]))
    stats = pc.zero_stats(table, 31.0)
    assert stats.n_total == 5.0
    assert stats.n_simple == 3.0
    simple = ZeroTable.from_ordinates(np.array([14.1345, 21.0, 25.0, 30.4]), t_max=31.0)
    assert stats.n_star > pc.zero_stats(simple, 31.0).n_star


def test_empirical_mu_gue_substitution(ref_zeros):
    edges = np.linspace(0.0, 5.0, 51)
    counts = np.diff(pc.gue_model(edges))
    hist = pc.PairHistogram(t_max=5000.0, edges=edges, counts=counts,
                            log_used=pc.log_factor(ref_zeros, 5000.0), weighted=False)
    stats = pc.zero_stats(ref_zeros, 5000.0)
    rep = pc.empirical_mu(hist, stats)
    assert rep.total == pytest.approx(1.0, abs=1e-9)


def test_empirical_mu_weighted_matches_plain(desk_ctx):
    ctx = desk_ctx
    stats = pc.zero_stats(ctx.zero_table, ctx.t_ref)
    plain = pc.empirical_mu(pc.pcc_histogram(ctx.zero_table, ctx.t_ref, 5.0, 50,
                                             pairs=ctx.pairs()), stats)
    weighted = pc.empirical_mu(pc.pcc_histogram(ctx.zero_table, ctx.t_ref, 5.0, 50,
                                                weighted=True, pairs=ctx.pairs()), stats)
    assert abs(plain.total - weighted.total) < 0.05
    assert plain.deviation < 0.25
    assert weighted.deviation < 0.25


def test_empirical_mu_requires_range(ref_zeros, pairs_5k):
    hist = pc.pcc_histogram(ref_zeros, 5000.0, 3.0, 30, pairs=pairs_5k)
    stats = pc.zero_stats(ref_zeros, 5000.0)
    with pytest.raises(GridRangeError):
        pc.empirical_mu(hist, stats)


# --- lemma 1 window and hb ratio -----------------------------------------------------

def test_lemma1_windows(series_5k):
    for b in (0.0, 0.5, 1.0):
        val = pc.lemma1_window(series_5k, b)
        assert 0.0 <= val <= 3.0, b
    with pytest.raises(GridRangeError):
        pc.lemma1_window(series_5k, 1.5)


def test_hb_ratio_diagnostics(ref_zeros, series_5k):
    res1 = pc.hb_ratio(ref_zeros, 5000.0, 1.0, series_5k)
    n = float(ref_zeros.count_below(5000.0, "right"))
    assert res1.numerator == pytest.approx(n, rel=1e-12)
    assert math.isfinite(res1.ratio)
    res2 = pc.hb_ratio(ref_zeros, 5000.0, 2.0, series_5k)
    res_half = pc.hb_ratio(ref_zeros, 5000.0, 0.5, series_5k)
    assert res2.numerator == pytest.approx(res_half.numerator, rel=1e-12)  # x -> 1/x
    assert 0.0 < res2.ratio < 50.0
