import numpy as np
import pytest
from scipy import stats

from latent_adjust.baselines import (
    _ols_tstats,
    _top_right_vectors,
    eigenstrat,
    oracle_regress,
    prob_nonnull,
    raw_regress,
    storey_pi0,
    sva,
    sva_weights,
)
from latent_adjust.core import InvalidRank, StudyDesign
from latent_adjust.simgen import SimScenario, generate, group_primary


def _noise(seed, N=1000, n=60):
    return np.random.default_rng(seed).standard_normal((N, n)), StudyDesign(group_primary(n))


def test_raw_noise_free_recovers_gamma(rng):
    g = group_primary(10)
    gamma = rng.standard_normal(25)
    res = raw_regress(np.outer(gamma, g), StudyDesign(g))
    np.testing.assert_allclose(res.meta["coef"], gamma, atol=1e-12)


def test_raw_matches_textbook_t(rng):
    Y = rng.standard_normal((4, 12))
    g = group_primary(12)
    res = raw_regress(Y, StudyDesign(g))
    for i in range(4):
        slope = Y[i] @ g
        s2 = np.sum((Y[i] - slope * g) ** 2) / 11
        assert res.t_stat[i] == pytest.approx(slope / np.sqrt(s2), rel=1e-10)


@pytest.mark.parametrize("method", ["raw", "eigenstrat"])
def test_null_statistics_are_standard_normal(method):
    t = []
    for seed in range(20):
        Y, d = _noise(seed)
        res = raw_regress(Y, d) if method == "raw" else eigenstrat(Y, d, 1)
        t.append(res.t_stat)
    df = 59 if method == "raw" else 58
    assert stats.kstest(np.concatenate(t), stats.t(df).cdf).pvalue > 0.001


def test_oracle_with_zero_latent_is_raw(rng):
    Y, d = _noise(1, N=50)
    a = raw_regress(Y, d)
    b = oracle_regress(Y, d, 0)
    c = oracle_regress(Y, d, np.zeros_like(Y))
    np.testing.assert_array_equal(a.t_stat, b.t_stat)
    np.testing.assert_array_equal(a.t_stat, c.t_stat)


def test_oracle_noise_free_support():
    _, d, truth = generate(SimScenario(seed=1))
    Yc = np.outer(truth.gamma, d.g) + truth.latent
    res = oracle_regress(Yc, d, truth.latent)
    top = set(np.flatnonzero(res.rank <= truth.nonnull_mask.sum()))
    assert top == set(np.flatnonzero(truth.nonnull_mask))


def test_eigenstrat_maximal_rank(rng):
    Y = rng.standard_normal((30, 10))
    res = eigenstrat(Y, StudyDesign(group_primary(10)), 8)
    assert sorted(res.rank) == list(range(1, 31))
    with pytest.raises(InvalidRank):
        eigenstrat(Y, StudyDesign(group_primary(10)), 9)


def test_sign_flip_invariance():
    Y, d, _ = generate(SimScenario(seed=2))
    dn = d.normalized()
    V = _top_right_vectors(Y.values, 2)
    flipped = V * np.array([-1.0, 1.0])
    _, t1 = _ols_tstats(Y.values, np.c_[dn.g, V])
    _, t2 = _ols_tstats(Y.values, np.c_[dn.g, flipped])
    np.testing.assert_allclose(np.abs(t1), np.abs(t2), atol=1e-10)


def test_storey_pi0_uniform():
    p = np.random.default_rng(0).random(10**5)
    assert storey_pi0(p) == pytest.approx(1.0, abs=0.02)
    assert storey_pi0(np.r_[np.zeros(500), p[:500]]) < 0.6


def test_prob_nonnull_is_monotone():
    rng = np.random.default_rng(0)
    p = np.r_[rng.random(900), rng.beta(0.1, 5, 100)]
    w = prob_nonnull(p)
    order = np.argsort(p)
    assert np.all(np.diff(w[order]) <= 1e-12)
    assert np.all((w >= 0) & (w <= 1))


def test_sva_weight_for_strong_gene():
    Y, d, truth = generate(SimScenario(snr=2, lnr=2, rho=0.3, seed=3))
    Yv = Y.values.copy()
    Yv[0] += 50 * d.g  # one enormous primary effect
    dn = d.normalized()
    V = _top_right_vectors(Yv - np.outer(Yv @ dn.g, dn.g), 1)
    raw_t = raw_regress(Yv, d).t_stat
    assert abs(raw_t[0]) == np.max(np.abs(raw_t))
    assert sva_weights(Yv, dn, V)[0] < 0.5


def test_sva_runs_and_flags():
    Y, d, _ = generate(SimScenario(seed=4))
    res = sva(Y, d, 1)
    assert sorted(res.rank) == list(range(1, 1001))
    assert res.meta["iterations"] >= 1


def test_all_methods_valid_permutations(rng):
    Y = rng.standard_normal((40, 12))
    d = StudyDesign(rng.standard_normal(12), rng.standard_normal((12, 1)))
    for res in (raw_regress(Y, d), eigenstrat(Y, d, 2), sva(Y, d, 2), oracle_regress(Y, d, 0)):
        assert sorted(res.rank) == list(range(1, 41))
