"""Seeded generators for sign-corrupted isotonic data.

The generating process is ``R_i = xi_i (mu_i + eps_i)`` with a
non-decreasing signal ``0 < eta <= mu_1 <= ... <= mu_n``, i.i.d. Gaussian
noise and signs ``xi_i`` chosen by an adversary policy.  Policies may look
at the entire realized clean vector ``mu + eps`` before choosing signs.

Randomness comes from a counter-based Philox stream keyed by a 64-bit
seed.  Noise is drawn first, then any policy randomness, so a given
``(model, seed)`` always yields the same sample.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import BadEta, LengthMismatch

SEED_MASK = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & SEED_MASK))


def derive_seed(master_seed: int, *key) -> int:
    """Stable 64-bit substream seed from a master seed and a key tuple."""
    h = hashlib.blake2b(digest_size=8)
    h.update(struct.pack("<Q", int(master_seed) & SEED_MASK))
    h.update(repr(tuple(key)).encode())
    return int.from_bytes(h.digest(), "little")


# --- adversary policies ----------------------------------------------------


@dataclass(frozen=True)
class Identity:
    """No corruption; recovers classical isotonic regression."""

    def signs(self, clean, rng):
        return np.ones(len(clean))


@dataclass(frozen=True)
class Rademacher:
    """Independent signs, +1 with probability ``p``, independent of the noise."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    def signs(self, clean, rng):
        return np.where(rng.random(len(clean)) < self.p, 1.0, -1.0)


@dataclass(frozen=True)
class SignOfGamma:
    """Fixed signs ``sgn(gamma_i)``; the model's signal is ``|gamma|``.

    This turns ``R_i = gamma_i + eps_i`` with ``|gamma|`` non-decreasing into
    the sign-corrupted form, since ``sgn(gamma_i) eps_i`` is again N(0, sigma^2).
    """

    gamma: tuple

    def __post_init__(self):
        g = np.abs(np.asarray(self.gamma, dtype=float))
        if np.any(np.diff(g) < 0):
            raise ValueError("|gamma| must be non-decreasing")

    def signs(self, clean, rng):
        if len(clean) != len(self.gamma):
            raise LengthMismatch("gamma and sample length differ")
        return np.where(np.asarray(self.gamma, dtype=float) < 0, -1.0, 1.0)


@dataclass(frozen=True)
class ErrorAdaptive:
    """Deterministic sign rule that sees the full clean vector.

    ``rule`` maps the realized ``mu + eps`` to a vector of +-1.  Any
    randomness must live inside the rule itself.
    """

    rule: Callable[[np.ndarray], np.ndarray]
    name: str = field(default="adaptive")

    def signs(self, clean, rng):
        xi = np.asarray(self.rule(np.asarray(clean)), dtype=float)
        if xi.shape != np.shape(clean) or not np.all(np.abs(xi) == 1.0):
            raise ValueError("adaptive rule must return one +-1 sign per entry")
        return xi


AdversaryPolicy = Union[Identity, Rademacher, SignOfGamma, ErrorAdaptive]


def worst_case_adaptive(clean) -> np.ndarray:
    """Flip every response to be non-positive: ``xi_i = -sgn(clean_i)``, -1 at zero."""
    clean = np.asarray(clean, dtype=float)
    return np.where(clean >= 0, -1.0, 1.0)


WORST_CASE = ErrorAdaptive(worst_case_adaptive, name="worst_case")


# --- models and samples ----------------------------------------------------


@dataclass(frozen=True)
class AsciModel:
    mu: np.ndarray
    eta: float
    sigma: float
    adversary: AdversaryPolicy = field(default_factory=Identity)

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        object.__setattr__(self, "mu", mu)
        if not self.eta > 0:
            raise BadEta(f"eta must be > 0, got {self.eta}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if mu.ndim != 1 or mu.size == 0:
            raise ValueError("mu must be a non-empty vector")
        if mu[0] < self.eta or np.any(np.diff(mu) < 0):
            raise ValueError("mu must be non-decreasing with mu[0] >= eta")

    @property
    def n(self) -> int:
        return self.mu.size

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.mu.tobytes())
        h.update(repr((self.eta, self.sigma)).encode())
        adv = self.adversary
        if isinstance(adv, ErrorAdaptive):
            h.update(f"ErrorAdaptive:{adv.name}".encode())
        elif isinstance(adv, SignOfGamma):
            h.update(np.asarray(adv.gamma, dtype=float).tobytes())
        else:
            h.update(repr(adv).encode())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class SampleSet:
    r: np.ndarray
    clean: np.ndarray
    xi: np.ndarray
    seed: int
    model_digest: str


def linear_signal(n: int, eta: float) -> np.ndarray:
    """``mu_i = eta + (1 - eta) (i - 1) / n`` for ``i = 1..n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < eta < 1:
        raise BadEta(f"eta must lie in (0, 1), got {eta}")
    return eta + (1.0 - eta) * np.arange(n) / n


def generate(model: AsciModel, n: int, seed: int) -> SampleSet:
    if n != model.n:
        raise LengthMismatch(f"n={n} but model has {model.n} means")
    rng = make_rng(seed)
    eps = rng.standard_normal(n) * model.sigma
    clean = model.mu + eps
    xi = model.adversary.signs(clean, rng)
    return SampleSet(r=xi * clean, clean=clean, xi=xi, seed=int(seed) & SEED_MASK,
                     model_digest=model.digest())


def example1_model(mu, eta: float, sigma: float, p: float) -> AsciModel:
    """Rademacher(p) signs independent of the noise (two-component mixture case)."""
    return AsciModel(mu=np.asarray(mu, dtype=float), eta=eta, sigma=sigma,
                     adversary=Rademacher(p))


def example2_model(gamma, eta: float, sigma: float) -> AsciModel:
    """Signal ``|gamma|`` with signs ``sgn(gamma)``; observations are ``gamma + noise``."""
    gamma = np.asarray(gamma, dtype=float)
    return AsciModel(mu=np.abs(gamma), eta=eta, sigma=sigma,
                     adversary=SignOfGamma(tuple(gamma.tolist())))
