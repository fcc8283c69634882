import itertools

import numpy as np
import pytest

from latent_adjust.core import NotUnitVector
from latent_adjust.dantzig import (
    constraint_slack,
    dantzig_from_data,
    dantzig_gamma,
    order_statistic_bound,
)
from latent_adjust.simgen import generate_constant_noise


def _unit(rng, N):
    u = rng.standard_normal(N)
    return u / np.linalg.norm(u)


def vertex_oracle(y, u, t):
    """Minimum l1 norm by enumerating intersections of N of the 3N hyperplanes
    ``(P(y - g))_i = +-t`` and ``g_i = 0``."""
    N = y.size
    P = np.eye(N) - np.outer(u, u)
    rows = np.r_[P, P, np.eye(N)]
    rhs = np.r_[P @ y - t, P @ y + t, np.zeros(N)]
    best = np.inf
    for idx in itertools.combinations(range(3 * N), N):
        A = rows[list(idx)]
        if abs(np.linalg.det(A)) < 1e-10:
            continue
        g = np.linalg.solve(A, rhs[list(idx)])
        if np.max(np.abs(P @ (y - g))) <= t + 1e-9:
            best = min(best, np.abs(g).sum())
    return best


def test_zero_signal_gives_zero():
    rng = np.random.default_rng(0)
    res = dantzig_gamma(np.zeros(20), _unit(rng, 20), 1.0, 2)
    np.testing.assert_allclose(res.gamma_hat, 0, atol=1e-12)
    assert res.feasible


@pytest.mark.parametrize("seed", range(4))
def test_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    N = 5
    y = 3 * rng.standard_normal(N)
    u = _unit(rng, N)
    res = dantzig_gamma(y, u, 0.5, 1)
    t = 0.5 * np.sqrt(np.log(N))
    assert np.abs(res.gamma_hat).sum() == pytest.approx(vertex_oracle(y, u, t), abs=1e-7)


def test_feasible_and_locally_optimal():
    rng = np.random.default_rng(1)
    N = 60
    gamma = np.zeros(N)
    gamma[:3] = 6
    u = _unit(rng, N)
    y = gamma + 4 * u + 0.3 * rng.standard_normal(N)
    res = dantzig_gamma(y, u, 1.0, 3)
    assert res.feasible
    assert constraint_slack(y, u, res.gamma_hat, 1.0) >= -1e-7
    base = np.abs(res.gamma_hat).sum()
    for _ in range(200):
        cand = res.gamma_hat + 0.05 * rng.standard_normal(N)
        if constraint_slack(y, u, cand, 1.0) >= 0:
            assert np.abs(cand).sum() >= base - 1e-9


def test_bound():
    u = np.array([0.8, 0.6, 0.0, 0.0])
    assert order_statistic_bound(u, 1) == pytest.approx(1.0 + 0.5 * 1.0)
    rng = np.random.default_rng(2)
    v = _unit(rng, 100)
    b = [order_statistic_bound(v, s) for s in range(1, 20)]
    assert all(x <= y for x, y in zip(b, b[1:]))


def test_rejects_non_unit():
    with pytest.raises(NotUnitVector):
        dantzig_gamma(np.ones(4), np.ones(4), 1.0, 1)


def test_from_data_recovers_support():
    Y, d, truth = generate_constant_noise(N=200, n=100, sparsity=5, rho=0.3, seed=0)
    res = dantzig_from_data(Y, d.g, 1.0, 5)
    assert res.feasible
    top = np.argsort(-np.abs(res.gamma_hat))[:5]
    assert set(top) == set(np.flatnonzero(truth.gamma))
