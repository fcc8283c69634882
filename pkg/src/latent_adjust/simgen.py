"""Synthetic data from Y = gamma g' + U V' + Sigma E with controlled
signal-to-noise, latent-to-noise and primary/latent correlation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DataMatrix, SimTruth, StudyDesign, ValidationError

STREAMS = {"gamma": 1, "sigma": 2, "U": 3, "W": 4, "E": 5}


class InvalidScenario(ValidationError):
    pass


def stream(seed: int, label: str, *extra: int) -> np.random.Generator:
    """Independent generator for one component, keyed by seed and label.

    Philox is counter based, so any one stream can be reproduced alone.
    """
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, STREAMS[label], *extra])
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SimScenario:
    n: int = 60
    N: int = 1000
    snr: float = 1.0
    lnr: float = 2.0
    rho: float = 0.5
    pi: float = 0.1
    k: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise InvalidScenario(f"n must be even and >= 4, got {self.n}")
        if self.N < 1:
            raise InvalidScenario("N must be positive")
        if not 0 < self.pi < 1:
            raise InvalidScenario("pi must lie in (0, 1)")
        if not -1 < self.rho < 1:
            raise InvalidScenario("rho must lie in (-1, 1)")
        if self.snr < 0 or self.lnr < 0:
            raise InvalidScenario("snr and lnr must be nonnegative")
        if self.k < 1 or self.k > self.n - 2:
            raise InvalidScenario(f"k must lie in [1, n-2], got {self.k}")

    @property
    def effect_size(self) -> float:
        """Nonzero effect ``c`` with ``pi c^2 = snr``."""
        return float(np.sqrt(self.snr / self.pi))

    @property
    def latent_halfwidth(self) -> float:
        """Half-width ``a`` of the uniform latent loadings, ``a^2 / 3 = lnr``."""
        return float(np.sqrt(3.0 * self.lnr))

    @property
    def slr(self) -> float:
        return self.snr / self.lnr


def group_primary(n: int) -> np.ndarray:
    """Balanced +/-1 treatment vector scaled to unit norm."""
    g = np.r_[np.ones(n // 2), -np.ones(n - n // 2)]
    return g / np.linalg.norm(g)


def sample_orthogonal_unit(g: np.ndarray, rng) -> np.ndarray:
    """Uniform draw from the unit vectors orthogonal to unit ``g``."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    g = np.asarray(g, dtype=float)
    while True:
        z = rng.standard_normal(g.size)
        z -= (z @ g) * g
        norm = np.linalg.norm(z)
        if norm > 1e-8:
            w = z / norm
            return w - (w @ g) * g


def generate(sc: SimScenario, replicate: Optional[int] = None, gamma_key: Optional[int] = None):
    """Draw ``(Y, design, truth)`` for one replicate.

    ``replicate`` extends the key of every stream; ``gamma_key`` overrides it for
    the effect vector only, so several datasets can share one gamma.
    """
    key = () if replicate is None else (int(replicate),)
    gkey = key if gamma_key is None else (int(gamma_key),)
    n, N, k = sc.n, sc.N, sc.k
    g = group_primary(n)

    gamma = np.where(stream(sc.seed, "gamma", *gkey).random(N) < sc.pi, sc.effect_size, 0.0)
    precision = stream(sc.seed, "sigma", *key).gamma(5.0, 1.0, N) / 4.0
    sigma = 1.0 / np.sqrt(precision)
    a = sc.latent_halfwidth
    U = stream(sc.seed, "U", *key).uniform(-a, a, (N, k))

    w_rng = stream(sc.seed, "W", *key)
    if k == 1:
        W = sample_orthogonal_unit(g, w_rng)[:, None]
    else:
        # orthonormal columns spanning a random subspace orthogonal to g
        Z = w_rng.standard_normal((n, k))
        Z -= np.outer(g, g @ Z)
        W = np.linalg.qr(Z)[0]
    V = sc.rho * g[:, None] + np.sqrt(1.0 - sc.rho**2) * W

    E = stream(sc.seed, "E", *key).standard_normal((N, n))
    Y = np.outer(gamma, g) + U @ V.T + sigma[:, None] * E
    truth = SimTruth(gamma=gamma, U=U, V=V, sigma=sigma)
    return DataMatrix(Y), StudyDesign(g, None, k), truth


def generate_constant_noise(
    N: int, n: int, sparsity: int, rho: float, sigma: float = 1.0, effect: float = 5.0,
    latent_scale: float = 1.0, seed: int = 0,
):
    """One-factor model with constant noise ``Y = gamma g' + U V' + sigma E``.

    ``gamma`` has exactly ``sparsity`` entries equal to ``effect``; ``U`` is uniform
    with ``||U||^2 / (N n)`` close to ``latent_scale``.
    """
    if not -1 < rho < 1 or n % 2:
        raise InvalidScenario("need |rho| < 1 and even n")
    g = group_primary(n)
    gamma = np.zeros(N)
    gamma[stream(seed, "gamma").choice(N, sparsity, replace=False)] = effect
    a = np.sqrt(3.0 * n * latent_scale)
    U = stream(seed, "U").uniform(-a, a, (N, 1))
    V = rho * g + np.sqrt(1.0 - rho**2) * sample_orthogonal_unit(g, stream(seed, "W"))
    E = stream(seed, "E").standard_normal((N, n))
    Y = np.outer(gamma, g) + U @ V[None, :] + sigma * E
    truth = SimTruth(gamma=gamma, U=U, V=V[:, None], sigma=np.full(N, float(sigma)))
    return DataMatrix(Y), StudyDesign(g, None, 1), truth
