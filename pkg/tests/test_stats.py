"""Statistics engine checked against an independent reference implementation.

The package computes every statistic itself; these tests are the only place
scipy appears, as a cross-check that the in-house routines agree with a
widely trusted implementation to tight tolerance.
"""

import math
import random

import pytest
import scipy.special
import scipy.stats

from mmauth.errors import ConfigError
from mmauth.stats import (GroupStats, StatsSummary, betainc_regularized,
                          cohens_d_pooled, compare_samples, group_stats, mean,
                          norm_cdf, norm_ppf, percentile, required_sample_size,
                          sample_sd, sample_var, t_cdf, t_ppf, t_two_tailed_p,
                          welch_t)

TOL = 1e-9


def random_fixtures(count=100, seed=424242):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        na, nb = rng.randint(5, 60), rng.randint(5, 60)
        mu_a, mu_b = rng.uniform(-5, 5), rng.uniform(-5, 5)
        sd_a, sd_b = rng.uniform(0.2, 4.0), rng.uniform(0.2, 4.0)
        a = [rng.gauss(mu_a, sd_a) for _ in range(na)]
        b = [rng.gauss(mu_b, sd_b) for _ in range(nb)]
        out.append((a, b))
    return out


def test_welch_t_matches_reference_on_100_fixtures():
    for a, b in random_fixtures():
        t, dof = welch_t(a, b)
        # reference computes (first minus second); call with swapped order
        ref = scipy.stats.ttest_ind(b, a, equal_var=False)
        assert t == pytest.approx(ref.statistic, abs=TOL, rel=TOL)
        assert dof == pytest.approx(ref.df, abs=TOL, rel=TOL)
        assert t_two_tailed_p(t, dof) == pytest.approx(ref.pvalue, abs=TOL, rel=TOL)


def test_compare_samples_matches_reference_end_to_end():
    for a, b in random_fixtures(30, seed=77):
        s = compare_samples(a, b)
        ref = scipy.stats.ttest_ind(b, a, equal_var=False)
        assert s.t_stat == pytest.approx(ref.statistic, abs=TOL, rel=TOL)
        assert s.p_value == pytest.approx(ref.pvalue, abs=TOL, rel=TOL)
        assert s.mean_diff == pytest.approx(sum(b) / len(b) - sum(a) / len(a), abs=TOL)
        assert not s.degenerate


def test_group_stats_ci_matches_reference():
    for a, _ in random_fixtures(20, seed=5):
        g = group_stats(a)
        n, m, sd = len(a), sum(a) / len(a), sample_sd(a)
        lo, hi = scipy.stats.t.interval(0.95, n - 1, loc=m, scale=sd / math.sqrt(n))
        assert g.n == n
        assert g.mean == pytest.approx(m, abs=TOL)
        assert g.ci95_low == pytest.approx(lo, abs=1e-8)
        assert g.ci95_high == pytest.approx(hi, abs=1e-8)


def test_incomplete_beta_matches_reference():
    rng = random.Random(11)
    for _ in range(200):
        a = rng.uniform(0.3, 50.0)
        b = rng.uniform(0.3, 50.0)
        x = rng.random()
        assert betainc_regularized(a, b, x) == pytest.approx(
            scipy.special.betainc(a, b, x), abs=TOL, rel=TOL)
    assert betainc_regularized(2.0, 3.0, 0.0) == 0.0
    assert betainc_regularized(2.0, 3.0, 1.0) == 1.0


def test_distribution_functions_match_reference():
    for x in (-4.0, -1.5, -0.1, 0.0, 0.3, 2.2, 5.0):
        assert norm_cdf(x) == pytest.approx(scipy.stats.norm.cdf(x), abs=TOL)
        for dof in (1, 3, 24, 117.5):
            assert t_cdf(x, dof) == pytest.approx(scipy.stats.t.cdf(x, dof), abs=TOL)
    for q in (0.025, 0.2, 0.5, 0.8, 0.975):
        assert norm_ppf(q) == pytest.approx(scipy.stats.norm.ppf(q), abs=1e-8)
    for q in (0.025, 0.2, 0.8, 0.975):
        assert t_ppf(q, 29) == pytest.approx(scipy.stats.t.ppf(q, 29), abs=1e-8)
    # dof/(dof+t*t) rounds to 1.0 for |t| under ~1e-7, flattening the CDF
    # right at the median; the quantile is only pinned to that plateau width
    assert t_ppf(0.5, 29) == pytest.approx(0.0, abs=1e-6)


def test_cohens_d_worked_example():
    a = [1.0, 2.0, 3.0, 4.0, 5.0]
    b = [2.0, 3.0, 4.0, 5.0, 6.0]
    # mean shift 1.0 over pooled sd sqrt(2.5)
    assert cohens_d_pooled(a, b) == pytest.approx(1.0 / math.sqrt(2.5), abs=TOL)
    assert cohens_d_pooled(b, a) == pytest.approx(-1.0 / math.sqrt(2.5), abs=TOL)


def test_cohens_d_against_reference_formula():
    for a, b in random_fixtures(20, seed=9):
        na, nb = len(a), len(b)
        sp = math.sqrt(((na - 1) * sample_var(a) + (nb - 1) * sample_var(b))
                       / (na + nb - 2))
        want = (sum(b) / nb - sum(a) / na) / sp
        assert cohens_d_pooled(a, b) == pytest.approx(want, abs=TOL)


def test_required_sample_size_textbook_values():
    assert required_sample_size(0.8, 0.05, 0.8) == 25
    assert required_sample_size(0.5, 0.05, 0.8) == 63
    assert required_sample_size(0.2, 0.05, 0.8) == 393
    # huge effects need almost nobody
    assert required_sample_size(10.0, 0.05, 0.8) == 1
    with pytest.raises(ConfigError):
        required_sample_size(0.0, 0.05, 0.8)
    with pytest.raises(ConfigError):
        required_sample_size(0.8, 0.0, 0.8)


def test_percentile_matches_linear_interpolation():
    import numpy
    rng = random.Random(3)
    xs = [rng.uniform(0, 100) for _ in range(37)]
    for q in (0, 10, 25, 50, 75, 90, 99, 100):
        assert percentile(xs, q) == pytest.approx(
            float(numpy.percentile(xs, q)), abs=1e-10)
    assert percentile([42.0], 50) == 42.0
    with pytest.raises(ConfigError):
        percentile([], 50)
    with pytest.raises(ConfigError):
        percentile(xs, 101)


def test_degenerate_samples():
    s = compare_samples([2.0, 2.0, 2.0], [2.0, 2.0, 2.0])
    assert s.degenerate
    assert s.t_stat == 0.0 and s.p_value == 1.0
    assert s.a.ci95_low == s.a.ci95_high == 2.0

    shifted = compare_samples([2.0, 2.0, 2.0], [3.0, 3.0, 3.0])
    assert shifted.degenerate
    assert math.isinf(shifted.t_stat) and shifted.t_stat > 0
    assert shifted.p_value == 0.0
    assert math.isinf(shifted.cohens_d)
    # serialization stays JSON-able with infinities
    d = shifted.to_json_dict()
    assert d["t_stat"] == "inf" and d["cohens_d"] == "inf"


def test_input_validation():
    with pytest.raises(ConfigError):
        mean([])
    with pytest.raises(ConfigError):
        sample_var([1.0])
    with pytest.raises(ConfigError):
        welch_t([1.0], [1.0, 2.0])
    with pytest.raises(ConfigError):
        welch_t([1.0, float("nan")], [1.0, 2.0])
    with pytest.raises(ConfigError):
        t_two_tailed_p(1.0, 0.0)


def test_sign_convention_second_minus_first():
    slow = [10.0, 11.0, 12.0]
    fast = [5.0, 6.0, 7.0]
    s = compare_samples(fast, slow)
    assert s.mean_diff > 0 and s.t_stat > 0 and s.cohens_d > 0
