import numpy as np
import pytest

from latent_adjust.rank_estimate import DegenerateMatrix, RankConfig, parallel_analysis


def test_defaults():
    cfg = RankConfig()
    assert cfg.n_permutations == 20
    assert cfg.significance_threshold == 0.1


def test_pure_noise_rate():
    # an exact permutation test at level 0.1 stops at k=0 about 90% of the time
    ks = [
        parallel_analysis(np.random.default_rng(s).standard_normal((200, 50)), RankConfig(seed=s))
        for s in range(100)
    ]
    assert np.mean(np.array(ks) == 0) >= 0.75
    assert max(ks) <= 3


def _rank_one(seed, ratio=10.0, N=200, m=50):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(N)
    v = rng.standard_normal(m)
    spike = ratio * (np.sqrt(N) + np.sqrt(m)) * np.outer(u / np.linalg.norm(u), v / np.linalg.norm(v))
    return spike + rng.standard_normal((N, m))


def test_rank_one_detected():
    ks = [parallel_analysis(_rank_one(s), RankConfig(seed=s)) for s in range(100)]
    assert sum(k == 1 for k in ks) >= 95


def test_deterministic_given_seed():
    R = _rank_one(3, ratio=0.6)
    assert parallel_analysis(R, RankConfig(seed=9)) == parallel_analysis(R, RankConfig(seed=9))


@pytest.mark.parametrize("c", [1e-3, 7.0, 1e4])
def test_scale_invariance(c):
    R = _rank_one(4, ratio=0.8)
    assert parallel_analysis(c * R, RankConfig(seed=1)) == parallel_analysis(R, RankConfig(seed=1))


def test_zero_variance_rows_dropped(caplog):
    R = _rank_one(5)
    R[:3] = 2.0
    assert parallel_analysis(R, RankConfig(seed=0)) == 1
    assert "zero-variance" in caplog.text


def test_degenerate_inputs():
    with pytest.raises(DegenerateMatrix):
        parallel_analysis(np.ones((10, 5)))
    with pytest.raises(DegenerateMatrix):
        parallel_analysis(np.ones((10, 1)))


def test_config_validation():
    with pytest.raises(ValueError):
        RankConfig(significance_threshold=1.0)
    with pytest.raises(ValueError):
        RankConfig(n_permutations=0)
